//! Brute-force inference on tiny instances (`M ≤ 20`).
//!
//! States are bitmasks: bit `i` of the index is `x_i`. All arithmetic is done
//! in log space.

use rand::Rng;

use crate::channel::BinarySignal;
use crate::error::{check_len, Error, Result};
use crate::sparse::SparseBinaryMatrix;
use crate::special::log_sum_exp;
use crate::Scalar;

pub const MAX_EXACT_VARS: usize = 20;

#[derive(Debug, Clone)]
pub struct TinyInstance<'a, T> {
    pub matrix: &'a SparseBinaryMatrix,
    pub y: Vec<T>,
    pub scale: T,
    pub noise_var: T,
    pub log_odds: T,
}

/// Normalised probabilities over all `2^M` states.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorTable<T> {
    pub num_vars: usize,
    pub probs: Vec<T>,
    pub log_partition: T,
}

impl<'a, T: Scalar> TinyInstance<'a, T> {
    pub fn new(
        matrix: &'a SparseBinaryMatrix,
        y: Vec<T>,
        scale: T,
        noise_var: T,
        log_odds: T,
    ) -> Result<Self> {
        if matrix.num_vars() > MAX_EXACT_VARS {
            return Err(Error::param(format!(
                "exact inference limited to M <= {MAX_EXACT_VARS}, got {}",
                matrix.num_vars()
            )));
        }
        check_len(matrix.num_factors(), y.len())?;
        if !(noise_var > T::zero()) {
            return Err(Error::param("noise variance must be positive"));
        }
        Ok(TinyInstance {
            matrix,
            y,
            scale,
            noise_var,
            log_odds,
        })
    }

    pub fn num_states(&self) -> usize {
        1 << self.matrix.num_vars()
    }

    /// Unnormalised log posterior `−‖y − αAx‖²/(2σ²) + λ‖x‖₁`.
    pub fn log_weight(&self, state: usize) -> T {
        let mut sq = T::zero();
        for f in 0..self.matrix.num_factors() {
            let ones = self
                .matrix
                .factor_neighbors(f)
                .iter()
                .filter(|&&v| (state >> v) & 1 == 1)
                .count();
            let d = self.y[f] - self.scale * T::from_usize_lossy(ones);
            sq += d * d;
        }
        -sq / (T::lit(2.0) * self.noise_var)
            + self.log_odds * T::from_usize_lossy(state.count_ones() as usize)
    }

    pub fn exact_posterior(&self) -> PosteriorTable<T> {
        let logw: Vec<T> = (0..self.num_states()).map(|s| self.log_weight(s)).collect();
        let log_z = log_sum_exp(&logw);
        PosteriorTable {
            num_vars: self.matrix.num_vars(),
            probs: logw.iter().map(|&l| (l - log_z).exp()).collect(),
            log_partition: log_z,
        }
    }

    pub fn exact_bitwise_map(&self) -> BinarySignal {
        self.exact_posterior().bitwise_map()
    }
}

impl<T: Scalar> PosteriorTable<T> {
    /// `Pr(x_i = 1 | y)` for every coordinate.
    pub fn marginals(&self) -> Vec<T> {
        let mut m = vec![T::zero(); self.num_vars];
        for (s, &p) in self.probs.iter().enumerate() {
            for (i, mi) in m.iter_mut().enumerate() {
                if (s >> i) & 1 == 1 {
                    *mi += p;
                }
            }
        }
        m
    }

    /// Per-coordinate MAP; a marginal of exactly ½ resolves to 0.
    pub fn bitwise_map(&self) -> BinarySignal {
        let half = T::lit(0.5);
        BinarySignal::from_bits(self.marginals().iter().map(|&p| (p > half) as u8).collect())
            .expect("bits")
    }

    /// Draws one exact posterior sample (as a bitmask).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = T::lit(rng.random::<f64>());
        let mut acc = T::zero();
        for (s, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return s;
            }
        }
        self.probs.iter().rposition(|&p| p > T::zero()).unwrap_or(0)
    }

    pub fn total(&self) -> T {
        self.probs.iter().copied().sum()
    }
}

/// `½ Σ |p − q|`.
pub fn tv_distance<T: Scalar>(p: &[T], q: &[T]) -> Result<T> {
    check_len(p.len(), q.len())?;
    Ok(p.iter().zip(q).map(|(&a, &b)| (a - b).abs()).sum::<T>() * T::lit(0.5))
}

/// Empirical distribution of observed state indices.
pub fn empirical_law<T: Scalar>(num_states: usize, counts: &[u64]) -> Result<Vec<T>> {
    check_len(num_states, counts.len())?;
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::param("no observations"));
    }
    Ok(counts
        .iter()
        .map(|&c| T::lit(c as f64 / total as f64))
        .collect())
}

pub fn state_index(x: &[u8]) -> usize {
    x.iter()
        .enumerate()
        .fold(0, |acc, (i, &b)| acc | ((b as usize) << i))
}
