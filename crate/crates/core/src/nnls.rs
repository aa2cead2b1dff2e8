//! Non-negative least squares by accelerated projected gradient.
//!
//! Minimises `½‖y − Ax‖²` over `x ≥ 0` with FISTA steps of size `1/L`, where
//! `L` bounds the largest eigenvalue of `AᵀA` (power iteration times a safety
//! factor). A candidate that would increase the objective is rejected and the
//! momentum is reset, so the accepted objective sequence never increases.

use rand::Rng;

use crate::channel::BinarySignal;
use crate::error::{check_len, Error, Result};
use crate::operator::LinearOperator;
use crate::rng;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsConfig {
    pub max_iters: usize,
    /// Stop once an accepted step improves the objective by less than this
    /// fraction.
    pub tol: f64,
    pub power_iters: usize,
    pub lipschitz_safety: f64,
}

impl Default for NnlsConfig {
    fn default() -> Self {
        NnlsConfig {
            max_iters: 2000,
            tol: 1e-8,
            power_iters: 50,
            lipschitz_safety: 1.1,
        }
    }
}

impl NnlsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::param("max_iters must be at least 1"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::param("tol must be positive"));
        }
        if self.power_iters == 0 || !(self.lipschitz_safety >= 1.0) {
            return Err(Error::param("power iteration settings are invalid"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution<T> {
    pub x: Vec<T>,
    pub objective: T,
    pub iterations: usize,
    /// Objective after every accepted step, starting at `x = 0`.
    pub history: Vec<T>,
}

/// Largest eigenvalue of `AᵀA` by power iteration from a fixed pseudo-random start.
pub fn gram_spectral_norm<T: Scalar, A: LinearOperator<T> + ?Sized>(a: &A, iters: usize) -> T {
    let mut r = rng::seeded(0x6e6e_6c73);
    let mut v: Vec<T> = (0..a.cols()).map(|_| T::lit(r.random::<f64>() + 0.5)).collect();
    let mut av = vec![T::zero(); a.rows()];
    let mut w = vec![T::zero(); a.cols()];
    let mut estimate = T::zero();
    for _ in 0..iters {
        let norm = v.iter().map(|&t| t * t).sum::<T>().sqrt();
        if norm == T::zero() {
            return T::zero();
        }
        v.iter_mut().for_each(|t| *t /= norm);
        a.apply_into(&v, &mut av);
        a.apply_transpose_into(&av, &mut w);
        estimate = v.iter().zip(&w).map(|(&p, &q)| p * q).sum();
        std::mem::swap(&mut v, &mut w);
    }
    estimate
}

fn objective<T: Scalar, A: LinearOperator<T> + ?Sized>(a: &A, y: &[T], x: &[T], buf: &mut [T]) -> T {
    a.apply_into(x, buf);
    let half = T::lit(0.5);
    buf.iter().zip(y).map(|(&ax, &yi)| (yi - ax) * (yi - ax)).sum::<T>() * half
}

pub fn nnls_solve<T, A>(a: &A, y: &[T], config: &NnlsConfig) -> Result<NnlsSolution<T>>
where
    T: Scalar,
    A: LinearOperator<T> + ?Sized,
{
    config.validate()?;
    check_len(a.rows(), y.len())?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("measurements must be finite"));
    }
    let m = a.cols();
    let mut x = vec![T::zero(); m];
    let mut buf = vec![T::zero(); a.rows()];
    let mut fx = objective(a, y, &x, &mut buf);
    let mut history = vec![fx];
    if fx == T::zero() {
        return Ok(NnlsSolution { x, objective: fx, iterations: 0, history });
    }

    let lip = gram_spectral_norm(a, config.power_iters) * T::lit(config.lipschitz_safety);
    if !(lip.is_finite() && lip > T::zero()) {
        return Err(Error::Numerical(format!("invalid Lipschitz estimate {lip}")));
    }
    let step = T::one() / lip;
    let tol = T::lit(config.tol);
    let (one, two, four) = (T::one(), T::lit(2.0), T::lit(4.0));

    let mut z = x.clone();
    let mut cand = vec![T::zero(); m];
    let mut grad = vec![T::zero(); m];
    let mut theta = one;
    let mut just_restarted = true;
    let mut iterations = 0;

    for it in 1..=config.max_iters {
        iterations = it;
        a.apply_into(&z, &mut buf);
        buf.iter_mut().zip(y).for_each(|(b, &yi)| *b -= yi);
        a.apply_transpose_into(&buf, &mut grad);
        for ((c, &zi), &g) in cand.iter_mut().zip(&z).zip(&grad) {
            let v = zi - step * g;
            *c = if v > T::zero() { v } else { T::zero() };
        }
        let fc = objective(a, y, &cand, &mut buf);
        if !fc.is_finite() {
            return Err(Error::Numerical("objective diverged".into()));
        }
        if fc <= fx {
            let theta_next = (one + (one + four * theta * theta).sqrt()) / two;
            let beta = (theta - one) / theta_next;
            for ((zi, &ci), &xi) in z.iter_mut().zip(&cand).zip(&x) {
                *zi = ci + beta * (ci - xi);
            }
            let rel = (fx - fc) / fx;
            std::mem::swap(&mut x, &mut cand);
            fx = fc;
            theta = theta_next;
            history.push(fx);
            just_restarted = false;
            if fx == T::zero() || rel < tol {
                break;
            }
        } else {
            // A plain projected-gradient step from `x` cannot increase the
            // objective, so failing twice in a row means we are stalled.
            if just_restarted {
                break;
            }
            theta = one;
            z.copy_from_slice(&x);
            just_restarted = true;
        }
    }
    Ok(NnlsSolution { x, objective: fx, iterations, history })
}

/// Rounds each entry to the nearest of {0, 1}; exactly ½ goes to 0.
pub fn round_binary<T: Scalar>(v: &[T]) -> BinarySignal {
    let half = T::lit(0.5);
    BinarySignal::from_bits(v.iter().map(|&t| (t > half) as u8).collect())
        .expect("rounded entries are bits")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{LdpcParams, SparseBinaryMatrix};

    /// Row-major dense test operator.
    struct Dense {
        rows: usize,
        cols: usize,
        a: Vec<f64>,
    }

    impl LinearOperator<f64> for Dense {
        fn rows(&self) -> usize {
            self.rows
        }
        fn cols(&self) -> usize {
            self.cols
        }
        fn apply_into(&self, x: &[f64], out: &mut [f64]) {
            for (i, o) in out.iter_mut().enumerate() {
                *o = (0..self.cols).map(|j| self.a[i * self.cols + j] * x[j]).sum();
            }
        }
        fn apply_transpose_into(&self, r: &[f64], out: &mut [f64]) {
            for (j, o) in out.iter_mut().enumerate() {
                *o = (0..self.rows).map(|i| self.a[i * self.cols + j] * r[i]).sum();
            }
        }
    }

    #[test]
    fn zero_measurements_give_zero() {
        let a = SparseBinaryMatrix::sample_gallager(LdpcParams::new(8, 4, 2).unwrap(), 0).unwrap();
        let sol = nnls_solve(&a, &[0.0f64; 4], &NnlsConfig::default()).unwrap();
        assert!(sol.x.iter().all(|&v| v == 0.0));
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn recovers_overdetermined_nonnegative_solution() {
        let mut r = rng::seeded(5);
        let (rows, cols) = (12, 5);
        let a = Dense {
            rows,
            cols,
            a: (0..rows * cols).map(|_| r.random::<f64>()).collect(),
        };
        let truth = [0.0, 1.5, 0.3, 0.0, 2.0];
        let y = a.apply(&truth).unwrap();
        let cfg = NnlsConfig { max_iters: 200_000, tol: 1e-30, ..Default::default() };
        let sol = nnls_solve(&a, &y, &cfg).unwrap();
        for (g, t) in sol.x.iter().zip(&truth) {
            assert!((g - t).abs() < 1e-6, "{:?}", sol.x);
        }
    }

    #[test]
    fn output_is_nonnegative_and_history_monotone() {
        let a = SparseBinaryMatrix::sample_gallager(LdpcParams::new(1 << 10, 1 << 7, 16).unwrap(), 2)
            .unwrap();
        let mut r = rng::seeded(8);
        let y: Vec<f64> = (0..128).map(|_| r.random::<f64>() * 4.0 - 1.0).collect();
        let sol = nnls_solve(&a, &y, &NnlsConfig::default()).unwrap();
        assert!(sol.x.iter().all(|&v| v >= 0.0));
        assert!(sol.history.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(*sol.history.last().unwrap(), sol.objective);
    }

    #[test]
    fn spectral_norm_of_biregular_gram() {
        // A·1 = s·1 and Aᵀ·1 = ν·1, so λ_max(AᵀA) = νs.
        let a = SparseBinaryMatrix::sample_gallager(LdpcParams::new(64, 16, 4).unwrap(), 1).unwrap();
        let l: f64 = gram_spectral_norm(&a, 200);
        assert!((l - 64.0).abs() < 1e-6, "{l}");
    }

    #[test]
    fn rejects_bad_input() {
        let a = SparseBinaryMatrix::sample_gallager(LdpcParams::new(8, 4, 2).unwrap(), 0).unwrap();
        assert!(nnls_solve(&a, &[0.0f64; 3], &NnlsConfig::default()).is_err());
        assert!(nnls_solve(&a, &[f64::NAN, 0.0, 0.0, 0.0], &NnlsConfig::default()).is_err());
        let bad = NnlsConfig { max_iters: 0, ..Default::default() };
        assert!(nnls_solve(&a, &[0.0f64; 4], &bad).is_err());
    }

    #[test]
    fn rounding_threshold() {
        assert_eq!(round_binary(&[0.0f64; 3]).bits(), &[0, 0, 0]);
        assert_eq!(round_binary(&[0.49f64, 0.51]).bits(), &[0, 1]);
        assert_eq!(round_binary(&[0.5f64, 1.7, -3.0]).bits(), &[0, 1, 0]);
        let mut r = rng::seeded(1);
        let v: Vec<f64> = (0..100).map(|_| r.random::<f64>() * 2.0 - 0.5).collect();
        let b = round_binary(&v);
        for (bit, x) in b.bits().iter().zip(&v) {
            assert_eq!(*bit == 1, *x > 0.5);
        }
    }
}
