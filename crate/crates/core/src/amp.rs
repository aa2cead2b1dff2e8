//! Approximate message passing with the Bernoulli posterior-mean denoiser on
//! a dense i.i.d. Gaussian sensing matrix.
//!
//! ```text
//! b  = Aᵀr + x
//! x' = f(b; σ̂)
//! r' = y − A x' + r · (1/n) Σ_j f′(b_j)
//! ```
//!
//! with `σ̂ = median(|r|)/Φ⁻¹(¾)`. The first iteration has `r = 0`, which
//! carries no information, so it returns the prior mean `ρ`.

use std::sync::OnceLock;

use crate::channel::BinarySignal;
use crate::error::{check_len, Error, Result};
use crate::nnls::round_binary;
use crate::operator::LinearOperator;
use crate::rng;
use crate::special::{logistic, normal_quantile};
use crate::Scalar;

const SIGMA_FLOOR: f64 = 1e-12;

/// `Φ⁻¹(0.75)`.
pub fn mad_constant() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| normal_quantile(0.75))
}

/// Row-major `n × M` matrix with i.i.d. `N(0, 1/n)` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseGaussianMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseGaussianMatrix<T> {
    pub fn sample(rows: usize, cols: usize, seed: u64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::param("matrix dimensions must be positive"));
        }
        let mut r = rng::seeded(seed);
        let sd = T::lit(1.0 / (rows as f64).sqrt());
        let data = (0..rows * cols)
            .map(|_| sd * rng::standard_normal::<T, _>(&mut r))
            .collect();
        Ok(DenseGaussianMatrix { rows, cols, data })
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column_energy(&self, j: usize) -> T {
        (0..self.rows).map(|i| self.data[i * self.cols + j].powi(2)).sum()
    }
}

impl<T: Scalar> LinearOperator<T> for DenseGaussianMatrix<T> {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn apply_into(&self, x: &[T], out: &mut [T]) {
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *o = row.iter().zip(x).map(|(&a, &b)| a * b).sum();
        }
    }

    fn apply_transpose_into(&self, r: &[T], out: &mut [T]) {
        out.iter_mut().for_each(|o| *o = T::zero());
        for (&ri, row) in r.iter().zip(self.data.chunks_exact(self.cols)) {
            if ri == T::zero() {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(row) {
                *o += ri * a;
            }
        }
    }
}

/// Posterior mean of `x ∈ {0,1}` (prior `Pr(x=1) = ρ`) given `b = x + σ_t·N(0,1)`.
#[inline]
pub fn denoise_scalar<T: Scalar>(b: T, log_odds: T, sigma_t: T) -> T {
    let two = T::lit(2.0);
    logistic(log_odds + (two * b - T::one()) / (two * sigma_t * sigma_t))
}

pub fn denoise<T: Scalar>(b: &[T], rho: T, sigma_t: T) -> Result<Vec<T>> {
    let lam = check_denoiser_args(rho, sigma_t)?;
    Ok(b.iter().map(|&v| denoise_scalar(v, lam, sigma_t)).collect())
}

/// `f′(b) = f(b)(1 − f(b))/σ_t²`.
pub fn denoise_derivative<T: Scalar>(b: &[T], rho: T, sigma_t: T) -> Result<Vec<T>> {
    let lam = check_denoiser_args(rho, sigma_t)?;
    let s2 = sigma_t * sigma_t;
    Ok(b.iter()
        .map(|&v| {
            let f = denoise_scalar(v, lam, sigma_t);
            f * (T::one() - f) / s2
        })
        .collect())
}

fn check_denoiser_args<T: Scalar>(rho: T, sigma_t: T) -> Result<T> {
    if !(sigma_t > T::zero()) {
        return Err(Error::param("denoiser noise level must be positive"));
    }
    crate::glauber::prior_log_odds(rho)
}

/// Robust noise level `median(|r|)/Φ⁻¹(0.75)`, floored at 1e-12.
pub fn estimate_sigma<T: Scalar>(r: &[T]) -> Result<T> {
    if r.is_empty() {
        return Err(Error::param("cannot estimate noise from an empty residual"));
    }
    let mut abs: Vec<T> = r.iter().map(|v| v.abs()).collect();
    let mid = abs.len() / 2;
    let cmp = |a: &T, b: &T| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal);
    let (lower, upper, _) = abs.select_nth_unstable_by(mid, cmp);
    let upper = *upper;
    let median = if r.len() % 2 == 1 {
        upper
    } else {
        let lower_max = lower
            .iter()
            .copied()
            .fold(T::neg_infinity(), |m, v| if v > m { v } else { m });
        (lower_max + upper) / T::lit(2.0)
    };
    Ok((median / T::lit(mad_constant())).max(T::lit(SIGMA_FLOOR)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmpConfig {
    pub iters: usize,
    /// Early stop when `‖x' − x‖∞` falls below this.
    pub tol: f64,
}

impl Default for AmpConfig {
    fn default() -> Self {
        AmpConfig { iters: 25, tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmpState<T> {
    pub x: Vec<T>,
    pub r: Vec<T>,
    /// Noise level used by the most recent denoising step.
    pub sigma_hat: T,
    /// Effective observation `b` fed to the most recent denoising step.
    pub b: Vec<T>,
    pub iter: usize,
}

impl<T: Scalar> AmpState<T> {
    pub fn new(rows: usize, cols: usize) -> Self {
        AmpState {
            x: vec![T::zero(); cols],
            r: vec![T::zero(); rows],
            sigma_hat: T::infinity(),
            b: vec![T::zero(); cols],
            iter: 0,
        }
    }
}

/// One AMP iteration; returns `‖x' − x‖∞`.
pub fn amp_step<T, A>(a: &A, y: &[T], rho: T, state: &mut AmpState<T>) -> Result<T>
where
    T: Scalar,
    A: LinearOperator<T> + ?Sized,
{
    let n = a.rows();
    let lam = crate::glauber::prior_log_odds(rho)?;
    let mut atr = vec![T::zero(); a.cols()];
    a.apply_transpose_into(&state.r, &mut atr);
    for ((b, &g), &x) in state.b.iter_mut().zip(&atr).zip(&state.x) {
        *b = g + x;
    }

    let (x_new, onsager) = if state.iter == 0 {
        // r = 0: uninformative, σ = ∞, f = ρ and f′ = 0.
        state.sigma_hat = T::infinity();
        (vec![rho; a.cols()], T::zero())
    } else {
        let sigma = estimate_sigma(&state.r)?;
        state.sigma_hat = sigma;
        let s2 = sigma * sigma;
        let mut deriv_sum = T::zero();
        let x_new: Vec<T> = state
            .b
            .iter()
            .map(|&b| {
                let f = denoise_scalar(b, lam, sigma);
                deriv_sum += f * (T::one() - f) / s2;
                f
            })
            .collect();
        (x_new, deriv_sum / T::from_usize_lossy(n))
    };

    let mut ax = vec![T::zero(); n];
    a.apply_into(&x_new, &mut ax);
    for ((r, &yi), &axi) in state.r.iter_mut().zip(y).zip(&ax) {
        *r = yi - axi + *r * onsager;
    }
    let change = x_new
        .iter()
        .zip(&state.x)
        .map(|(&p, &q)| (p - q).abs())
        .fold(T::zero(), |m, v| if v > m { v } else { m });
    state.x = x_new;
    state.iter += 1;
    if !change.is_finite() || state.r.iter().any(|v| !v.is_finite()) {
        return Err(Error::DecodeFailure(format!(
            "AMP diverged at iteration {}",
            state.iter
        )));
    }
    Ok(change)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmpOutput<T> {
    pub soft: Vec<T>,
    pub hard: BinarySignal,
    pub iterations: usize,
    pub sigma_history: Vec<T>,
}

pub fn amp_run<T, A>(a: &A, y: &[T], rho: T, config: &AmpConfig) -> Result<AmpOutput<T>>
where
    T: Scalar,
    A: LinearOperator<T> + ?Sized,
{
    if config.iters == 0 {
        return Err(Error::param("AMP needs at least one iteration"));
    }
    check_len(a.rows(), y.len())?;
    let mut state = AmpState::new(a.rows(), a.cols());
    let mut sigma_history = Vec::with_capacity(config.iters);
    let tol = T::lit(config.tol);
    for _ in 0..config.iters {
        let change = amp_step(a, y, rho, &mut state)?;
        sigma_history.push(state.sigma_hat);
        if state.iter > 1 && change < tol {
            break;
        }
    }
    Ok(AmpOutput {
        hard: round_binary(&state.x),
        iterations: state.iter,
        soft: state.x,
        sigma_history,
    })
}
