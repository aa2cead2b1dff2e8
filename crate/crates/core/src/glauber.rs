//! Glauber dynamics (single-site Gibbs sampling) on the posterior
//!
//! ```text
//! Q(x) ∝ exp{ −‖y − αAx‖² / (2σ²) + λ‖x‖₁ },   x ∈ {0,1}^M
//! ```
//!
//! for a sparse LDPC sensing matrix `A`. The chain caches the residual
//! `r = y − αAx`, so a coordinate update only touches the `ν` factors of that
//! coordinate. The conditional probability that `x_ℓ = 1` is
//!
//! ```text
//! p₁(ℓ) = φ( λ + (α/σ²) Σ_{f ∈ F(ℓ)} (r_f + α x_ℓ − α/2) )
//! ```
//!
//! with `φ` the logistic function; `r_f + α x_ℓ` is `y_f` minus the
//! contribution of every other variable in factor `f`.

use rand::Rng;

use crate::channel::BinarySignal;
use crate::error::{check_len, Error, Result};
use crate::rng;
use crate::sparse::SparseBinaryMatrix;
use crate::special::logistic;
use crate::Scalar;

/// Prior log-odds `λ = ln(ρ/(1−ρ))`.
pub fn prior_log_odds<T: Scalar>(rho: T) -> Result<T> {
    if !(rho > T::zero() && rho < T::one()) {
        return Err(Error::param(format!("rho must lie in (0, 1), got {rho}")));
    }
    Ok((rho / (T::one() - rho)).ln())
}

/// `T = 10·M·lg₂M`, the step budget used for the BER experiments.
pub fn default_steps(num_vars: usize) -> u64 {
    (10.0 * num_vars as f64 * (num_vars as f64).log2()).round() as u64
}

/// Mixing-time bound from path coupling.
///
/// Returns `⌈(ln(1/ε) + ln M)·4σ²M / (4σ² − ν(s−1))⌉`, or `None` when the
/// contraction condition `4σ² > ν(s−1)` fails.
pub fn mixing_time_bound(
    noise_var: f64,
    var_degree: usize,
    factor_degree: usize,
    num_vars: usize,
    eps: f64,
) -> Option<u64> {
    if !(eps > 0.0 && eps < 1.0) || num_vars == 0 || factor_degree == 0 {
        return None;
    }
    let coupling = (var_degree * (factor_degree - 1)) as f64;
    let four_var = 4.0 * noise_var;
    if !(four_var > coupling) {
        return None;
    }
    let m = num_vars as f64;
    let t = ((1.0 / eps).ln() + m.ln()) * four_var * m / (four_var - coupling);
    Some(t.ceil() as u64)
}

/// Contraction threshold `σ₀² = ν(s−1)/4`.
pub fn mixing_noise_threshold(var_degree: usize, factor_degree: usize) -> f64 {
    (var_degree * (factor_degree.saturating_sub(1))) as f64 / 4.0
}

/// Geometric annealing: the sampler starts at `start_noise_var` and decays
/// to the target noise variance over the first half of the run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anneal<T> {
    pub start_noise_var: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlauberConfig<T> {
    pub steps: u64,
    pub noise_var: T,
    pub log_odds: T,
    /// Column amplitude `α` in `y = αAx + σz`.
    pub scale: T,
    pub anneal: Option<Anneal<T>>,
    pub seed: u64,
    pub record_trajectory: bool,
    pub trajectory_stride: u64,
    /// Store the support of the iterate at every trajectory point.
    pub record_states: bool,
    /// Full residual recomputation period; `None` means once per sweep (`M` steps).
    pub refresh_interval: Option<u64>,
}

impl<T: Scalar> GlauberConfig<T> {
    pub fn new(steps: u64, noise_var: T, log_odds: T) -> Result<Self> {
        let cfg = GlauberConfig {
            steps,
            noise_var,
            log_odds,
            scale: T::one(),
            anneal: None,
            seed: 0,
            record_trajectory: false,
            trajectory_stride: 1,
            record_states: false,
            refresh_interval: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_scale(mut self, scale: T) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_anneal(mut self, start_noise_var: T) -> Self {
        self.anneal = Some(Anneal { start_noise_var });
        self
    }

    pub fn with_trajectory(mut self, stride: u64) -> Self {
        self.record_trajectory = true;
        self.trajectory_stride = stride;
        self
    }

    pub fn with_states(mut self) -> Self {
        self.record_states = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_var > T::zero() && self.noise_var.is_finite()) {
            return Err(Error::param("noise variance must be positive and finite"));
        }
        if !self.log_odds.is_finite() {
            return Err(Error::param(
                "prior log-odds must be finite (sparsity must lie strictly inside (0, M))",
            ));
        }
        if !(self.scale > T::zero() && self.scale.is_finite()) {
            return Err(Error::param("amplitude must be positive and finite"));
        }
        if let Some(a) = self.anneal {
            if !(a.start_noise_var >= self.noise_var && a.start_noise_var.is_finite()) {
                return Err(Error::param(
                    "annealing must start at a noise variance >= the target",
                ));
            }
        }
        if self.record_trajectory && self.trajectory_stride == 0 {
            return Err(Error::param("trajectory stride must be positive"));
        }
        if self.refresh_interval == Some(0) {
            return Err(Error::param("refresh interval must be positive"));
        }
        Ok(())
    }

    /// Sampler noise variance in force at `step`.
    pub fn noise_var_at(&self, step: u64) -> T {
        match self.anneal {
            None => self.noise_var,
            Some(a) => {
                let half = self.steps / 2;
                if half == 0 || step >= half {
                    return self.noise_var;
                }
                let frac = T::lit(step as f64 / half as f64);
                a.start_noise_var * (self.noise_var / a.start_noise_var).powf(frac)
            }
        }
    }
}

/// Current iterate with its cached residual `y − αAx`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlauberState<T> {
    x: Vec<u8>,
    residual: Vec<T>,
    residual_sq: T,
    weight: usize,
    step: u64,
}

impl<T: Scalar> GlauberState<T> {
    pub fn x(&self) -> &[u8] {
        &self.x
    }

    pub fn residual(&self) -> &[T] {
        &self.residual
    }

    /// Cached `‖y − αAx‖²`.
    pub fn residual_sq(&self) -> T {
        self.residual_sq
    }

    /// `‖x‖₁`.
    pub fn weight(&self) -> usize {
        self.weight
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    /// `E(x) = −‖y − αAx‖²/(2σ²) + λ‖x‖₁`.
    pub fn energy(&self, noise_var: T, log_odds: T) -> T {
        -self.residual_sq / (T::lit(2.0) * noise_var) + log_odds * T::from_usize_lossy(self.weight)
    }

    pub fn support(&self) -> Vec<usize> {
        self.x
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| (b == 1).then_some(i))
            .collect()
    }

    pub fn to_signal(&self) -> BinarySignal {
        BinarySignal::from_bits(self.x.clone()).expect("state holds bits")
    }
}

/// `p1[i] = Pr(x_i = 1 | x_{∼i}, y)` evaluated at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftOutput<T> {
    pub p1: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint<T> {
    pub step: u64,
    pub energy: T,
    pub ber: Option<f64>,
    /// Support of the iterate, if state recording was requested.
    pub support: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub num_vars: usize,
    pub points: Vec<TrajectoryPoint<T>>,
}

impl<T> Trajectory<T> {
    /// Step count in units of `M·lg₂M`.
    pub fn in_sweep_units(&self, step: u64) -> f64 {
        let m = self.num_vars as f64;
        step as f64 / (m * m.log2())
    }
}

/// Ground truth used to report BER along a trajectory.
#[derive(Debug, Clone, Copy)]
pub struct Reference<'a> {
    pub signal: &'a BinarySignal,
    /// Normaliser `k` of the BER.
    pub sparsity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlauberOutput<T> {
    pub x: BinarySignal,
    pub soft: SoftOutput<T>,
    pub trajectory: Option<Trajectory<T>>,
    pub final_energy: T,
}

/// Sampler bound to one measurement vector.
#[derive(Debug, Clone, Copy)]
pub struct Glauber<'a, T> {
    matrix: &'a SparseBinaryMatrix,
    y: &'a [T],
    scale: T,
}

impl<'a, T: Scalar> Glauber<'a, T> {
    pub fn new(matrix: &'a SparseBinaryMatrix, y: &'a [T], scale: T) -> Result<Self> {
        check_len(matrix.num_factors(), y.len())?;
        if !(scale > T::zero()) {
            return Err(Error::param("amplitude must be positive"));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("measurements must be finite"));
        }
        Ok(Glauber { matrix, y, scale })
    }

    pub fn matrix(&self) -> &SparseBinaryMatrix {
        self.matrix
    }

    pub fn init_state(&self, x0: &BinarySignal) -> Result<GlauberState<T>> {
        check_len(self.matrix.num_vars(), x0.len())?;
        let mut state = GlauberState {
            x: x0.bits().to_vec(),
            residual: vec![T::zero(); self.matrix.num_factors()],
            residual_sq: T::zero(),
            weight: x0.weight(),
            step: 0,
        };
        self.refresh(&mut state);
        Ok(state)
    }

    /// Residual `y − αAx` recomputed from scratch.
    pub fn full_residual(&self, x: &[u8]) -> Vec<T> {
        (0..self.matrix.num_factors())
            .map(|f| {
                let ones = self
                    .matrix
                    .factor_neighbors(f)
                    .iter()
                    .filter(|&&v| x[v as usize] == 1)
                    .count();
                self.y[f] - self.scale * T::from_usize_lossy(ones)
            })
            .collect()
    }

    /// Replaces the cached residual and its norm by exact recomputations.
    pub fn refresh(&self, state: &mut GlauberState<T>) {
        state.residual = self.full_residual(&state.x);
        state.residual_sq = state.residual.iter().map(|&r| r * r).sum();
        state.weight = state.x.iter().filter(|&&b| b == 1).count();
    }

    /// Logistic argument of the conditional law of `x_var`.
    #[inline]
    pub fn local_field(&self, state: &GlauberState<T>, var: usize, noise_var: T, log_odds: T) -> T {
        let alpha = self.scale;
        let own = if state.x[var] == 1 { alpha } else { T::zero() };
        let shift = own - alpha / T::lit(2.0);
        let sum: T = self
            .matrix
            .var_neighbors(var)
            .iter()
            .map(|&f| state.residual[f as usize] + shift)
            .sum();
        log_odds + alpha / noise_var * sum
    }

    /// `Pr(x_var = 1 | x_{∼var}, y)` in `O(ν)`.
    #[inline]
    pub fn flip_probability(&self, state: &GlauberState<T>, var: usize, noise_var: T, log_odds: T) -> T {
        logistic(self.local_field(state, var, noise_var, log_odds))
    }

    /// Sets `x_var = value`, updating residual, norm and weight incrementally.
    pub fn set_coordinate(&self, state: &mut GlauberState<T>, var: usize, value: u8) {
        let old = state.x[var];
        if old == value {
            return;
        }
        let delta = if value == 1 { -self.scale } else { self.scale };
        let mut dsq = T::zero();
        for &f in self.matrix.var_neighbors(var) {
            let r = &mut state.residual[f as usize];
            let new = *r + delta;
            dsq += new * new - *r * *r;
            *r = new;
        }
        state.residual_sq += dsq;
        state.x[var] = value;
        if value == 1 {
            state.weight += 1;
        } else {
            state.weight -= 1;
        }
    }

    /// One Glauber update; returns the chosen coordinate and whether it changed.
    #[inline]
    pub fn step<R: Rng + ?Sized>(
        &self,
        state: &mut GlauberState<T>,
        noise_var: T,
        log_odds: T,
        rng: &mut R,
    ) -> (usize, bool) {
        let var = rng.random_range(0..self.matrix.num_vars());
        let p = self.flip_probability(state, var, noise_var, log_odds);
        let u = T::lit(rng.random::<f64>());
        let value = (u < p) as u8;
        let changed = state.x[var] != value;
        self.set_coordinate(state, var, value);
        state.step += 1;
        (var, changed)
    }

    pub fn soft_output(&self, state: &GlauberState<T>, noise_var: T, log_odds: T) -> SoftOutput<T> {
        SoftOutput {
            p1: (0..self.matrix.num_vars())
                .map(|i| self.flip_probability(state, i, noise_var, log_odds))
                .collect(),
        }
    }

    /// Runs `config.steps` updates from `x0`.
    pub fn run(
        &self,
        config: &GlauberConfig<T>,
        x0: &BinarySignal,
        reference: Option<Reference<'_>>,
    ) -> Result<GlauberOutput<T>> {
        config.validate()?;
        let mut state = self.init_state(x0)?;
        let mut rng = rng::seeded(config.seed);
        let m = self.matrix.num_vars() as u64;
        let refresh = config.refresh_interval.unwrap_or(m).max(1);

        let mut mismatches = match reference {
            Some(r) => {
                check_len(self.matrix.num_vars(), r.signal.len())?;
                if !(r.sparsity > 0.0) {
                    return Err(Error::param("reference sparsity must be positive"));
                }
                Some(
                    x0.hamming_distance(r.signal)
                        .expect("lengths checked above"),
                )
            }
            None => None,
        };
        let ber_now = |mm: Option<usize>| -> Option<f64> {
            mm.zip(reference).map(|(c, r)| c as f64 / r.sparsity)
        };

        let mut trajectory = config.record_trajectory.then(|| Trajectory {
            num_vars: self.matrix.num_vars(),
            points: vec![TrajectoryPoint {
                step: 0,
                energy: state.energy(config.noise_var, config.log_odds),
                ber: ber_now(mismatches),
                support: config.record_states.then(|| state.support()),
            }],
        });

        let mut noise_var = config.noise_var_at(0);
        for t in 1..=config.steps {
            let (var, changed) = self.step(&mut state, noise_var, config.log_odds, &mut rng);
            if changed {
                if let (Some(c), Some(r)) = (mismatches.as_mut(), reference) {
                    if state.x[var] == r.signal.bits()[var] {
                        *c -= 1;
                    } else {
                        *c += 1;
                    }
                }
            }
            if t % refresh == 0 {
                self.refresh(&mut state);
                noise_var = config.noise_var_at(t);
            }
            if let Some(traj) = trajectory.as_mut() {
                if t % config.trajectory_stride == 0 || t == config.steps {
                    traj.points.push(TrajectoryPoint {
                        step: t,
                        energy: state.energy(config.noise_var, config.log_odds),
                        ber: ber_now(mismatches),
                        support: config.record_states.then(|| state.support()),
                    });
                }
            }
        }
        self.refresh(&mut state);
        if let Some(last) = trajectory.as_mut().and_then(|t| t.points.last_mut()) {
            last.energy = state.energy(config.noise_var, config.log_odds);
        }
        Ok(GlauberOutput {
            soft: self.soft_output(&state, config.noise_var, config.log_odds),
            final_energy: state.energy(config.noise_var, config.log_odds),
            x: state.to_signal(),
            trajectory,
        })
    }
}

/// Convenience wrapper: build a sampler and run it.
pub fn run<T: Scalar>(
    matrix: &SparseBinaryMatrix,
    y: &[T],
    config: &GlauberConfig<T>,
    x0: &BinarySignal,
) -> Result<GlauberOutput<T>> {
    Glauber::new(matrix, y, config.scale)?.run(config, x0, None)
}

/// Energy `−‖y − αAx‖²/(2σ²) + λ‖x‖₁` of an arbitrary binary vector.
pub fn energy_of<T: Scalar>(
    matrix: &SparseBinaryMatrix,
    y: &[T],
    scale: T,
    x: &BinarySignal,
    noise_var: T,
    log_odds: T,
) -> Result<T> {
    let g = Glauber::new(matrix, y, scale)?;
    Ok(g.init_state(x)?.energy(noise_var, log_odds))
}

/// Indices of the `k` largest entries of `p1`, largest first; ties go to
/// the smaller index.
pub fn topk_list<T: Scalar>(soft: &SoftOutput<T>, k: usize) -> Result<Vec<usize>> {
    let m = soft.p1.len();
    if k > m {
        return Err(Error::param(format!("list size {k} exceeds signal length {m}")));
    }
    let cmp = |&a: &usize, &b: &usize| {
        soft.p1[b]
            .partial_cmp(&soft.p1[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    };
    let mut idx: Vec<usize> = (0..m).collect();
    if k == 0 {
        return Ok(Vec::new());
    }
    if k < m {
        idx.select_nth_unstable_by(k - 1, cmp);
        idx.truncate(k);
    }
    idx.sort_unstable_by(cmp);
    Ok(idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{measure, sample_bernoulli_signal};
    use crate::sparse::LdpcParams;
    use approx::assert_relative_eq;

    fn tiny() -> SparseBinaryMatrix {
        SparseBinaryMatrix::sample_gallager(LdpcParams::new(8, 4, 2).unwrap(), 0).unwrap()
    }

    /// Ratio form `q₁/(q₀+q₁)` with both residual norms recomputed in full.
    fn ratio_form(a: &SparseBinaryMatrix, y: &[f64], scale: f64, x: &[u8], var: usize, s2: f64, lam: f64) -> f64 {
        let norm = |bits: &[u8]| -> f64 {
            let d = a.to_dense();
            d.iter()
                .zip(y)
                .map(|(row, &yf)| {
                    let ax: f64 = row.iter().zip(bits).map(|(&a, &b)| (a * b) as f64).sum();
                    (yf - scale * ax).powi(2)
                })
                .sum()
        };
        let mut x0 = x.to_vec();
        x0[var] = 0;
        let mut x1 = x.to_vec();
        x1[var] = 1;
        let lq0 = -norm(&x0) / (2.0 * s2);
        let lq1 = -norm(&x1) / (2.0 * s2) + lam;
        let mx = lq0.max(lq1);
        (lq1 - mx).exp() / ((lq0 - mx).exp() + (lq1 - mx).exp())
    }

    #[test]
    fn log_odds() {
        assert_eq!(prior_log_odds(0.5f64).unwrap(), 0.0);
        let rho = 100.0 / 16384.0;
        let lam = prior_log_odds(rho).unwrap();
        assert_relative_eq!(lam, (100.0f64 / 16284.0).ln(), epsilon = 1e-14);
        assert!((lam - (-5.0928)).abs() < 1e-3, "{lam}");
        assert_relative_eq!(lam + prior_log_odds(1.0 - rho).unwrap(), 0.0, epsilon = 1e-12);
        assert!(prior_log_odds(0.0f64).is_err());
        assert!(prior_log_odds(1.0f64).is_err());
    }

    #[test]
    fn default_step_budget() {
        assert_eq!(default_steps(1 << 14), 2_293_760);
    }

    #[test]
    fn mixing_bound_values() {
        assert_eq!(mixing_noise_threshold(16, 128), 508.0);
        assert_eq!(mixing_time_bound(508.0, 16, 128, 1 << 14, 0.01), None);
        assert_eq!(mixing_time_bound(400.0, 16, 128, 1 << 14, 0.01), None);
        let m = (1u64 << 14) as f64;
        let expect = ((100f64).ln() + m.ln()) * 2.0 * m;
        assert_eq!(mixing_time_bound(1016.0, 16, 128, 1 << 14, 0.01), Some(expect.ceil() as u64));
    }

    #[test]
    fn flip_probability_matches_ratio_form_exhaustively() {
        let a = tiny();
        let x = sample_bernoulli_signal(8, 0.3, 2).unwrap();
        for &(scale, sigma, s2, lam) in &[(1.0, 0.5, 0.25, -1.1), (2.0, 0.3, 0.7, 0.4), (0.7, 1.0, 3.0, -3.0)] {
            let y = measure(&a, &x, sigma, scale, 7).unwrap().y;
            let g = Glauber::new(&a, &y, scale).unwrap();
            for mask in 0..256u64 {
                let s = g.init_state(&BinarySignal::from_mask(8, mask)).unwrap();
                for var in 0..8 {
                    let fast = g.flip_probability(&s, var, s2, lam);
                    let slow = ratio_form(&a, &y, scale, s.x(), var, s2, lam);
                    assert!((fast - slow).abs() < 1e-12, "mask {mask} var {var}: {fast} vs {slow}");
                }
            }
        }
    }

    #[test]
    fn flip_probability_limits() {
        let a = tiny();
        let x = BinarySignal::from_support(8, &[2, 5]).unwrap();
        let y = a.matvec(&x.to_real::<f64>()).unwrap();
        let g = Glauber::new(&a, &y, 1.0).unwrap();
        let s = g.init_state(&x).unwrap();
        let lam = prior_log_odds(0.2f64).unwrap();
        // huge noise → prior
        assert_relative_eq!(g.flip_probability(&s, 3, 1e12, lam), 0.2, epsilon = 1e-9);
        // noiseless consistent state keeps its ones and zeros
        assert!(g.flip_probability(&s, 2, 1e-4, lam) > 1.0 - 1e-12);
        assert!(g.flip_probability(&s, 3, 1e-4, lam) < 1e-12);
    }

    #[test]
    fn incremental_residual_matches_recompute() {
        let a = SparseBinaryMatrix::sample_gallager(LdpcParams::new(1 << 10, 1 << 7, 16).unwrap(), 3)
            .unwrap();
        let x = sample_bernoulli_signal(1 << 10, 6.0 / 1024.0, 4).unwrap();
        let y = measure(&a, &x, 0.8f64, 1.3, 5).unwrap().y;
        let g = Glauber::new(&a, &y, 1.3).unwrap();
        let mut s = g.init_state(&BinarySignal::zeros(1 << 10)).unwrap();
        let mut r = rng::seeded(1);
        let lam = prior_log_odds(6.0 / 1024.0).unwrap();
        for i in 0..200_000 {
            let before = s.clone();
            let (_, changed) = g.step(&mut s, 0.64, lam, &mut r);
            if !changed {
                assert_eq!(before.residual(), s.residual());
                assert_eq!(before.residual_sq(), s.residual_sq());
            }
            if i % 997 == 0 {
                let full = g.full_residual(s.x());
                for (a, b) in full.iter().zip(s.residual()) {
                    assert!((a - b).abs() < 1e-9);
                }
                let sq: f64 = full.iter().map(|v| v * v).sum();
                assert!((sq - s.residual_sq()).abs() <= 1e-8 * sq.max(1.0));
            }
        }
    }

    #[test]
    fn zero_steps_returns_start() {
        let a = tiny();
        let y = vec![0.3f64, 1.2, -0.4, 2.0];
        let x0 = BinarySignal::from_support(8, &[1, 6]).unwrap();
        let cfg = GlauberConfig::new(0, 0.5f64, -1.0).unwrap().with_trajectory(5);
        let out = Glauber::new(&a, &y, 1.0).unwrap().run(&cfg, &x0, None).unwrap();
        assert_eq!(out.x, x0);
        let traj = out.trajectory.unwrap();
        assert_eq!(traj.points.len(), 1);
        assert_eq!(traj.points[0].step, 0);
        assert!(out.soft.p1.iter().all(|&p| (0.0..=1.0).contains(&p)));
    }

    #[test]
    fn runs_are_seed_deterministic() {
        let a = tiny();
        let x = BinarySignal::from_support(8, &[0, 3]).unwrap();
        let y = measure(&a, &x, 0.4f64, 1.0, 1).unwrap().y;
        let cfg = GlauberConfig::new(500, 0.16f64, -1.0).unwrap().with_seed(9).with_trajectory(50);
        let r = Reference { signal: &x, sparsity: 2.0 };
        let g = Glauber::new(&a, &y, 1.0).unwrap();
        let o1 = g.run(&cfg, &BinarySignal::zeros(8), Some(r)).unwrap();
        let o2 = g.run(&cfg, &BinarySignal::zeros(8), Some(r)).unwrap();
        assert_eq!(o1, o2);
        let traj = o1.trajectory.unwrap();
        assert_eq!(traj.points.len(), 11);
        let last = traj.points.last().unwrap();
        assert_eq!(last.ber, Some(o1.x.hamming_distance(&x).unwrap() as f64 / 2.0));
        assert_relative_eq!(last.energy, o1.final_energy, epsilon = 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(GlauberConfig::new(10, 0.0f64, 0.0).is_err());
        assert!(GlauberConfig::new(10, 1.0f64, f64::NEG_INFINITY).is_err());
        let c = GlauberConfig::new(10, 1.0f64, 0.0).unwrap();
        assert!(c.clone().with_anneal(0.5).validate().is_err());
        assert!(c.clone().with_trajectory(0).validate().is_err());
        assert!(c.clone().with_scale(0.0).validate().is_err());
    }

    #[test]
    fn anneal_schedule_is_monotone_and_ends_at_target() {
        let c = GlauberConfig::new(1000, 1.0f64, 0.0).unwrap().with_anneal(16.0);
        assert_eq!(c.noise_var_at(0), 16.0);
        assert_relative_eq!(c.noise_var_at(250), 4.0, epsilon = 1e-12);
        assert_eq!(c.noise_var_at(500), 1.0);
        assert_eq!(c.noise_var_at(999), 1.0);
        let mut prev = f64::INFINITY;
        for t in 0..1000 {
            let v = c.noise_var_at(t);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn topk_rules() {
        let one_hot = SoftOutput { p1: vec![0.0, 0.0, 1.0, 0.0f64] };
        assert_eq!(topk_list(&one_hot, 1).unwrap(), vec![2]);
        let flat = SoftOutput { p1: vec![0.5f64; 6] };
        assert_eq!(topk_list(&flat, 3).unwrap(), vec![0, 1, 2]);
        assert!(topk_list(&flat, 7).is_err());
        assert!(topk_list(&flat, 0).unwrap().is_empty());
        assert_eq!(topk_list(&flat, 6).unwrap(), (0..6).collect::<Vec<_>>());

        let mut r = rng::seeded(3);
        for _ in 0..50 {
            let p1: Vec<f64> = (0..8).map(|_| (r.random::<f64>() * 4.0).floor() / 4.0).collect();
            let soft = SoftOutput { p1: p1.clone() };
            let mut reference: Vec<usize> = (0..8).collect();
            reference.sort_by(|&a, &b| p1[b].partial_cmp(&p1[a]).unwrap().then(a.cmp(&b)));
            for k in 0..=8 {
                assert_eq!(topk_list(&soft, k).unwrap(), reference[..k].to_vec());
            }
        }
    }
}
