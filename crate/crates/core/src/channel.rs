//! Signal generation, noisy measurement and error metrics.

use rand::Rng;

use crate::error::{check_len, Error, Result};
use crate::operator::LinearOperator;
use crate::rng;
use crate::special::{db_to_linear, linear_to_db};
use crate::Scalar;

/// A vector in `{0,1}^M`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinarySignal {
    bits: Vec<u8>,
}

impl BinarySignal {
    pub fn zeros(len: usize) -> Self {
        BinarySignal { bits: vec![0; len] }
    }

    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::param("binary signal entries must be 0 or 1"));
        }
        Ok(BinarySignal { bits })
    }

    pub fn from_support(len: usize, support: &[usize]) -> Result<Self> {
        let mut bits = vec![0u8; len];
        for &i in support {
            if i >= len {
                return Err(Error::param(format!("support index {i} out of range")));
            }
            bits[i] = 1;
        }
        Ok(BinarySignal { bits })
    }

    /// Entry `i` of the bitmask `mask` becomes bit `i` of the signal.
    pub fn from_mask(len: usize, mask: u64) -> Self {
        BinarySignal {
            bits: (0..len).map(|i| ((mask >> i) & 1) as u8).collect(),
        }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn support(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn hamming_distance(&self, other: &BinarySignal) -> Result<usize> {
        check_len(self.len(), other.len())?;
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count())
    }

    pub fn to_real<T: Scalar>(&self) -> Vec<T> {
        self.bits
            .iter()
            .map(|&b| if b == 1 { T::one() } else { T::zero() })
            .collect()
    }
}

/// Nonnegative integer multiplicities, e.g. how many users picked each column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountSignal {
    counts: Vec<u32>,
}

impl CountSignal {
    pub fn from_counts(counts: Vec<u32>) -> Self {
        CountSignal { counts }
    }

    /// Histogram of the given column choices over `len` columns.
    pub fn from_choices(len: usize, choices: &[usize]) -> Result<Self> {
        let mut counts = vec![0u32; len];
        for &c in choices {
            *counts
                .get_mut(c)
                .ok_or_else(|| Error::param(format!("choice {c} out of range")))? += 1;
        }
        Ok(CountSignal { counts })
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// `‖x‖₁`.
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    pub fn to_real<T: Scalar>(&self) -> Vec<T> {
        self.counts.iter().map(|&c| T::lit(c as f64)).collect()
    }
}

/// Anything that can be fed through the measurement model.
pub trait SignalVector {
    fn len(&self) -> usize;
    fn to_real_vec<T: Scalar>(&self) -> Vec<T>;
}

impl SignalVector for BinarySignal {
    fn len(&self) -> usize {
        self.bits.len()
    }
    fn to_real_vec<T: Scalar>(&self) -> Vec<T> {
        self.to_real()
    }
}

impl SignalVector for CountSignal {
    fn len(&self) -> usize {
        self.counts.len()
    }
    fn to_real_vec<T: Scalar>(&self) -> Vec<T> {
        self.to_real()
    }
}

/// Noisy observation `y = α·A x + σ z`.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurements<T> {
    pub y: Vec<T>,
    pub sigma: T,
    pub scale: T,
}

/// i.i.d. Bernoulli(ρ) coordinates.
pub fn sample_bernoulli_signal(len: usize, rho: f64, seed: u64) -> Result<BinarySignal> {
    let mut rng = rng::seeded(seed);
    sample_bernoulli_with(len, rho, &mut rng)
}

pub fn sample_bernoulli_with<R: Rng + ?Sized>(
    len: usize,
    rho: f64,
    rng: &mut R,
) -> Result<BinarySignal> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::param(format!("rho must lie in (0, 1), got {rho}")));
    }
    Ok(BinarySignal {
        bits: (0..len).map(|_| rng.random_bool(rho) as u8).collect(),
    })
}

pub fn measure<T, A, S>(a: &A, x: &S, sigma: T, scale: T, seed: u64) -> Result<Measurements<T>>
where
    T: Scalar,
    A: LinearOperator<T> + ?Sized,
    S: SignalVector + ?Sized,
{
    let mut rng = rng::seeded(seed);
    measure_with(a, x, sigma, scale, &mut rng)
}

pub fn measure_with<T, A, S, R>(
    a: &A,
    x: &S,
    sigma: T,
    scale: T,
    rng: &mut R,
) -> Result<Measurements<T>>
where
    T: Scalar,
    A: LinearOperator<T> + ?Sized,
    S: SignalVector + ?Sized,
    R: Rng + ?Sized,
{
    if !(sigma >= T::zero()) || !sigma.is_finite() {
        return Err(Error::param("noise level must be finite and nonnegative"));
    }
    if !(scale > T::zero()) {
        return Err(Error::param("amplitude must be positive"));
    }
    check_len(a.cols(), x.len())?;
    let mut y = a.apply(&x.to_real_vec::<T>())?;
    for v in y.iter_mut() {
        *v = scale * *v + sigma * rng::standard_normal::<T, _>(rng);
    }
    Ok(Measurements { y, sigma, scale })
}

/// Bit error rate normalised by the expected sparsity `k` (not by `M`).
pub fn ber(x: &BinarySignal, x_hat: &BinarySignal, k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::param("expected sparsity k must be positive"));
    }
    Ok(x.hamming_distance(x_hat)? as f64 / k)
}

/// Noise standard deviation for a target `E_b/N_0 = E_m/(2σ²J)`.
pub fn ebn0_to_sigma(ebn0_db: f64, column_energy: f64, bits: f64) -> Result<f64> {
    if !(column_energy > 0.0 && bits > 0.0) {
        return Err(Error::param("column energy and bits per column must be positive"));
    }
    Ok((column_energy / (2.0 * bits * db_to_linear(ebn0_db))).sqrt())
}

pub fn sigma_to_ebn0(sigma: f64, column_energy: f64, bits: f64) -> Result<f64> {
    if !(column_energy > 0.0 && bits > 0.0 && sigma > 0.0) {
        return Err(Error::param("sigma, column energy and bits must be positive"));
    }
    Ok(linear_to_db(column_energy / (2.0 * sigma * sigma * bits)))
}

/// Column energy of an LDPC sensing matrix scaled by `amplitude`: `α²ν`.
pub fn ldpc_column_energy(var_degree: usize, amplitude: f64) -> f64 {
    amplitude * amplitude * var_degree as f64
}
