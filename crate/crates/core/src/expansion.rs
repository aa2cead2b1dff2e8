//! Expansion heuristic for the LDPC ensemble.
//!
//! `α*` is the positive root of
//! `(ν−1)/ν·h₂(α) − h₂(αs/ν)/s − α(s/ν)·h₂(ν/s) = 0`, and `k* = α*M/ν` is the
//! sparsity that an `(α*M, 1 − 1/ν)` expander would suggest is recoverable
//! for non-negative signals. This is a diagnostic, not a guarantee.

use crate::error::{Error, Result};
use crate::special::binary_entropy;
use crate::Scalar;

pub const DEFAULT_TOL: f64 = 1e-10;

/// Left-hand side of the expansion equation.
pub fn expansion_equation<T: Scalar>(alpha: T, var_degree: usize, factor_degree: usize) -> T {
    let nu = T::from_usize_lossy(var_degree);
    let s = T::from_usize_lossy(factor_degree);
    (nu - T::one()) / nu * binary_entropy(alpha)
        - binary_entropy(alpha * s / nu) / s
        - alpha * (s / nu) * binary_entropy(nu / s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expansion<T> {
    pub alpha_star: T,
    pub var_degree: usize,
    pub factor_degree: usize,
}

impl<T: Scalar> Expansion<T> {
    /// Heuristic recoverable sparsity `α*·M/ν`.
    pub fn sparsity(&self, num_vars: usize) -> T {
        self.alpha_star * T::from_usize_lossy(num_vars) / T::from_usize_lossy(self.var_degree)
    }
}

/// Bisection for `α*` on `[tol, ν/s − tol]`.
pub fn expansion_alpha_star<T: Scalar>(
    var_degree: usize,
    factor_degree: usize,
    tol: T,
) -> Result<Expansion<T>> {
    if var_degree < 2 || var_degree >= factor_degree {
        return Err(Error::param(format!(
            "expansion needs 2 <= nu < s, got nu = {var_degree}, s = {factor_degree}"
        )));
    }
    if !(tol > T::zero()) {
        return Err(Error::param("tolerance must be positive"));
    }
    let g = |a: T| expansion_equation(a, var_degree, factor_degree);
    let mut lo = tol;
    let mut hi = T::from_usize_lossy(var_degree) / T::from_usize_lossy(factor_degree) - tol;
    let (mut g_lo, g_hi) = (g(lo), g(hi));
    if !(lo < hi) || g_lo.signum() == g_hi.signum() || g_lo == T::zero() || g_hi == T::zero() {
        return Err(Error::Numerical(format!(
            "no sign change of the expansion equation on [{lo}, {hi}]"
        )));
    }
    let two = T::lit(2.0);
    while hi - lo > tol {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid);
        if g_mid == T::zero() {
            lo = mid;
            hi = mid;
            break;
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Ok(Expansion {
        alpha_star: (lo + hi) / two,
        var_degree,
        factor_degree,
    })
}
