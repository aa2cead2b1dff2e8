//! BER sweep and trajectory harnesses shared by the command-line tool and the
//! acceptance tests.
//!
//! Every random quantity is drawn from a stream derived from the master seed
//! and the work item's coordinates, so results do not depend on scheduling.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::amp::{amp_run, AmpConfig, DenseGaussianMatrix};
use crate::channel::{
    ber, ebn0_to_sigma, ldpc_column_energy, sample_bernoulli_with, BinarySignal,
};
use crate::error::{Error, Result};
use crate::glauber::{
    default_steps, energy_of, prior_log_odds, Glauber, GlauberConfig, Reference, Trajectory,
};
use crate::nnls::{nnls_solve, round_binary, NnlsConfig};
use crate::operator::LinearOperator;
use crate::rng::{self, stream};
use crate::sparse::{LdpcParams, SparseBinaryMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Decoder {
    GlauberZero,
    GlauberNnls,
    Nnls,
    Amp,
}

impl Decoder {
    pub const ALL: [Decoder; 4] = [
        Decoder::GlauberZero,
        Decoder::GlauberNnls,
        Decoder::Nnls,
        Decoder::Amp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Decoder::GlauberZero => "glauber-zero",
            Decoder::GlauberNnls => "glauber-nnls",
            Decoder::Nnls => "nnls",
            Decoder::Amp => "amp",
        }
    }

    /// AMP runs on its own dense Gaussian matrix; the others share the LDPC one.
    pub fn uses_dense(self) -> bool {
        self == Decoder::Amp
    }
}

impl fmt::Display for Decoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Decoder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Decoder::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| {
                Error::param(format!(
                    "unknown decoder '{s}' (expected glauber-zero, glauber-nnls, nnls or amp)"
                ))
            })
    }
}

/// Decoder knobs that are not part of the channel model.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecoderSettings {
    /// Glauber steps; `None` means `10·M·lg₂M`.
    pub steps: Option<u64>,
    /// Annealing start as a multiple of the target noise variance.
    pub anneal_factor: Option<f64>,
    pub nnls: NnlsConfig,
    pub amp: AmpConfig,
}


impl DecoderSettings {
    pub fn validate(&self) -> Result<()> {
        if let Some(f) = self.anneal_factor {
            if !(f >= 1.0 && f.is_finite()) {
                return Err(Error::param("annealing factor must be finite and >= 1"));
            }
        }
        self.nnls.validate()?;
        if self.amp.iters == 0 {
            return Err(Error::param("AMP needs at least one iteration"));
        }
        Ok(())
    }

    pub fn glauber_config(
        &self,
        num_vars: usize,
        noise_var: f64,
        log_odds: f64,
        scale: f64,
        seed: u64,
    ) -> Result<GlauberConfig<f64>> {
        let steps = self.steps.unwrap_or_else(|| default_steps(num_vars));
        let mut cfg = GlauberConfig::new(steps, noise_var, log_odds)?
            .with_scale(scale)
            .with_seed(seed);
        if let Some(f) = self.anneal_factor {
            cfg = cfg.with_anneal(f * noise_var);
        }
        Ok(cfg)
    }
}

/// Hard decision plus per-coordinate scores (higher means more likely one).
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub hard: BinarySignal,
    pub scores: Vec<f64>,
    pub runtime_ms: f64,
}

/// Runs an LDPC-based decoder on `y = αAx + σz`.
///
/// `warm` is a precomputed NNLS solution for `y/α` (with its runtime); it is
/// computed here when absent.
#[allow(clippy::too_many_arguments)]
pub fn decode_ldpc(
    decoder: Decoder,
    a: &SparseBinaryMatrix,
    y: &[f64],
    sigma: f64,
    scale: f64,
    rho: f64,
    settings: &DecoderSettings,
    seed: u64,
    warm: Option<(&[f64], f64)>,
) -> Result<Decoded> {
    let nnls_soft = |warm: Option<(&[f64], f64)>| -> Result<(Vec<f64>, f64)> {
        match warm {
            Some((v, ms)) => Ok((v.to_vec(), ms)),
            None => {
                let start = Instant::now();
                let y_unit: Vec<f64> = y.iter().map(|v| v / scale).collect();
                let sol = nnls_solve(a, &y_unit, &settings.nnls)?;
                Ok((sol.x, start.elapsed().as_secs_f64() * 1e3))
            }
        }
    };
    match decoder {
        Decoder::Nnls => {
            let (v, ms) = nnls_soft(warm)?;
            Ok(Decoded {
                hard: round_binary(&v),
                scores: v,
                runtime_ms: ms,
            })
        }
        Decoder::GlauberZero | Decoder::GlauberNnls => {
            let (x0, pre_ms) = if decoder == Decoder::GlauberNnls {
                let (v, ms) = nnls_soft(warm)?;
                (round_binary(&v), ms)
            } else {
                (BinarySignal::zeros(a.num_vars()), 0.0)
            };
            let start = Instant::now();
            let lam = prior_log_odds(rho)?;
            let cfg = settings.glauber_config(a.num_vars(), sigma * sigma, lam, scale, seed)?;
            let out = Glauber::new(a, y, scale)?.run(&cfg, &x0, None)?;
            Ok(Decoded {
                hard: out.x,
                scores: out.soft.p1,
                runtime_ms: pre_ms + start.elapsed().as_secs_f64() * 1e3,
            })
        }
        Decoder::Amp => Err(Error::param("AMP needs a dense Gaussian matrix")),
    }
}

/// AMP on `y = αAx + σz` with a dense Gaussian `A`.
pub fn decode_amp(
    a: &DenseGaussianMatrix<f64>,
    y: &[f64],
    scale: f64,
    rho: f64,
    settings: &DecoderSettings,
) -> Result<Decoded> {
    let start = Instant::now();
    let y_unit: Vec<f64> = y.iter().map(|v| v / scale).collect();
    let out = amp_run(a, &y_unit, rho, &settings.amp)?;
    Ok(Decoded {
        hard: out.hard,
        scores: out.soft,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub num_vars: usize,
    pub num_factors: usize,
    pub var_degree: usize,
    pub ks: Vec<usize>,
    pub ebn0_db: Vec<f64>,
    pub trials: usize,
    pub decoders: Vec<Decoder>,
    pub settings: DecoderSettings,
    pub seed: u64,
}

impl SweepConfig {
    pub fn params(&self) -> Result<LdpcParams> {
        LdpcParams::new(self.num_vars, self.num_factors, self.var_degree)
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        if self.num_vars < 2 {
            return Err(Error::param("need at least two variables"));
        }
        if self.decoders.is_empty() {
            return Err(Error::param("no decoders selected"));
        }
        for &k in &self.ks {
            if k == 0 || k >= self.num_vars {
                return Err(Error::param(format!("k = {k} must lie in (0, M)")));
            }
        }
        if self.ebn0_db.iter().any(|e| !e.is_finite()) {
            return Err(Error::param("Eb/N0 values must be finite"));
        }
        self.settings.validate()
    }

    /// Bits carried per column, `lg₂M`.
    pub fn bits_per_column(&self) -> f64 {
        (self.num_vars as f64).log2()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub decoder: Decoder,
    pub k: usize,
    pub ebn0_db: f64,
    pub trials: usize,
    pub mean_ber: f64,
    pub stderr_ber: f64,
    pub mean_runtime_ms: f64,
}

pub const SWEEP_HEADER: &str = "decoder,k,ebn0_db,trials,mean_ber,stderr_ber,mean_runtime_ms";

impl SweepRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{:.6e},{:.6e},{:.3}",
            self.decoder,
            self.k,
            self.ebn0_db,
            self.trials,
            self.mean_ber,
            self.stderr_ber,
            self.mean_runtime_ms
        )
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Matrices shared by every trial of a sweep.
pub struct SweepMatrices {
    pub ldpc: SparseBinaryMatrix,
    pub dense: Option<DenseGaussianMatrix<f64>>,
}

impl SweepMatrices {
    pub fn sample(cfg: &SweepConfig) -> Result<Self> {
        let ldpc =
            SparseBinaryMatrix::sample_gallager(cfg.params()?, rng::derive_seed(cfg.seed, &[stream::MATRIX, 0]))?;
        let dense = if cfg.decoders.iter().any(|d| d.uses_dense()) {
            Some(DenseGaussianMatrix::sample(
                cfg.num_factors,
                cfg.num_vars,
                rng::derive_seed(cfg.seed, &[stream::MATRIX, 1]),
            )?)
        } else {
            None
        };
        Ok(SweepMatrices { ldpc, dense })
    }
}

/// Per-trial signal and unit noise shared by every decoder and energy.
fn trial_draw(cfg: &SweepConfig, k: usize, trial: usize) -> Result<(BinarySignal, Vec<f64>)> {
    let rho = k as f64 / cfg.num_vars as f64;
    let mut rs = rng::derived(cfg.seed, &[stream::SIGNAL, k as u64, trial as u64]);
    let x = sample_bernoulli_with(cfg.num_vars, rho, &mut rs)?;
    let mut rz = rng::derived(cfg.seed, &[stream::NOISE, k as u64, trial as u64]);
    let z = (0..cfg.num_factors)
        .map(|_| rng::standard_normal::<f64, _>(&mut rz))
        .collect();
    Ok((x, z))
}

/// `(ber, runtime_ms)` for every `(ebn0 index, decoder index)` of one trial.
fn run_trial(
    cfg: &SweepConfig,
    mats: &SweepMatrices,
    k: usize,
    trial: usize,
) -> Result<Vec<Vec<(f64, f64)>>> {
    let (x, z) = trial_draw(cfg, k, trial)?;
    let rho = k as f64 / cfg.num_vars as f64;
    let j = cfg.bits_per_column();
    let ax_ldpc = mats.ldpc.matvec(&x.to_real::<f64>())?;
    let ax_dense = match &mats.dense {
        Some(d) => Some(d.apply(&x.to_real::<f64>())?),
        None => None,
    };
    let needs_nnls = cfg
        .decoders
        .iter()
        .any(|d| matches!(d, Decoder::Nnls | Decoder::GlauberNnls));

    let mut out = Vec::with_capacity(cfg.ebn0_db.len());
    for (ei, &db) in cfg.ebn0_db.iter().enumerate() {
        let sigma = ebn0_to_sigma(db, ldpc_column_energy(cfg.var_degree, 1.0), j)?;
        let y: Vec<f64> = ax_ldpc.iter().zip(&z).map(|(a, zz)| a + sigma * zz).collect();
        let warm = if needs_nnls {
            let start = Instant::now();
            let sol = nnls_solve(&mats.ldpc, &y, &cfg.settings.nnls)?;
            Some((sol.x, start.elapsed().as_secs_f64() * 1e3))
        } else {
            None
        };
        let seed = rng::derive_seed(cfg.seed, &[stream::DECODER, k as u64, trial as u64, ei as u64]);
        let mut row = Vec::with_capacity(cfg.decoders.len());
        for &d in &cfg.decoders {
            let dec = if d.uses_dense() {
                let a = mats.dense.as_ref().expect("dense matrix sampled for AMP");
                let sigma_d = ebn0_to_sigma(db, 1.0, j)?;
                let y: Vec<f64> = ax_dense
                    .as_ref()
                    .expect("dense product")
                    .iter()
                    .zip(&z)
                    .map(|(a, zz)| a + sigma_d * zz)
                    .collect();
                decode_amp(a, &y, 1.0, rho, &cfg.settings)?
            } else {
                let w = warm.as_ref().map(|(v, ms)| (v.as_slice(), *ms));
                decode_ldpc(d, &mats.ldpc, &y, sigma, 1.0, rho, &cfg.settings, seed, w)?
            };
            row.push((ber(&x, &dec.hard, k as f64)?, dec.runtime_ms));
        }
        out.push(row);
    }
    Ok(out)
}

/// Rows ordered by `(decoder, k, Eb/N0)` as listed in the config.
pub fn ber_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mats = SweepMatrices::sample(cfg)?;
    ber_sweep_with(cfg, &mats)
}

pub fn ber_sweep_with(cfg: &SweepConfig, mats: &SweepMatrices) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    if cfg.trials == 0 {
        return Ok(rows);
    }
    // per_k[ki][trial][ebn0][decoder]
    let per_k = cfg
        .ks
        .iter()
        .map(|&k| {
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| run_trial(cfg, mats, k, t))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    for (di, &d) in cfg.decoders.iter().enumerate() {
        for (ki, &k) in cfg.ks.iter().enumerate() {
            for (ei, &db) in cfg.ebn0_db.iter().enumerate() {
                let bers: Vec<f64> = per_k[ki].iter().map(|t| t[ei][di].0).collect();
                let times: Vec<f64> = per_k[ki].iter().map(|t| t[ei][di].1).collect();
                let (mean_ber, stderr_ber) = mean_stderr(&bers);
                rows.push(SweepRow {
                    decoder: d,
                    k,
                    ebn0_db: db,
                    trials: cfg.trials,
                    mean_ber,
                    stderr_ber,
                    mean_runtime_ms: mean_stderr(&times).0,
                });
            }
        }
    }
    Ok(rows)
}

/// Smallest Eb/N0 at which a BER curve falls to `level`, interpolating
/// linearly in `log10(BER)` between the bracketing grid points. Points must be
/// sorted by Eb/N0.
pub fn crossing_point(points: &[(f64, f64)], level: f64) -> Option<f64> {
    if !(level > 0.0) {
        return None;
    }
    let first = points.first()?;
    if first.1 <= level {
        return Some(first.0);
    }
    for w in points.windows(2) {
        let ((x0, b0), (x1, b1)) = (w[0], w[1]);
        if b0 > level && b1 <= level {
            if b1 <= 0.0 {
                // log-scale undefined; fall back to linear interpolation
                return Some(x0 + (x1 - x0) * (b0 - level) / (b0 - b1));
            }
            let (l0, l1, lt) = (b0.log10(), b1.log10(), level.log10());
            return Some(x0 + (x1 - x0) * (l0 - lt) / (l0 - l1));
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryConfig {
    pub num_vars: usize,
    pub num_factors: usize,
    pub var_degree: usize,
    pub k: usize,
    pub ebn0_db: f64,
    pub warm_start: bool,
    pub stride: u64,
    pub record_states: bool,
    pub settings: DecoderSettings,
    pub seed: u64,
}

impl TrajectoryConfig {
    /// `k = 100`, `E_b/N_0 = 1 dB` at `M = 2¹⁴`, `n = 2¹¹`, `ν = 16`.
    pub fn reference_preset(seed: u64) -> Self {
        TrajectoryConfig {
            num_vars: 1 << 14,
            num_factors: 1 << 11,
            var_degree: 16,
            k: 100,
            ebn0_db: 1.0,
            warm_start: false,
            stride: 1 << 14,
            record_states: false,
            settings: DecoderSettings::default(),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRun {
    pub trajectory: Trajectory<f64>,
    pub true_energy: f64,
    pub final_ber: f64,
    pub truth: BinarySignal,
    pub y: Vec<f64>,
    pub matrix: SparseBinaryMatrix,
    pub noise_var: f64,
    pub log_odds: f64,
}

/// One recorded decode. The true signal has exactly `k` ones at uniformly
/// random positions.
pub fn run_trajectory(cfg: &TrajectoryConfig) -> Result<TrajectoryRun> {
    cfg.settings.validate()?;
    if cfg.k == 0 || cfg.k >= cfg.num_vars {
        return Err(Error::param("k must lie in (0, M)"));
    }
    if cfg.stride == 0 {
        return Err(Error::param("trajectory stride must be positive"));
    }
    let params = LdpcParams::new(cfg.num_vars, cfg.num_factors, cfg.var_degree)?;
    let a = SparseBinaryMatrix::sample_gallager(params, rng::derive_seed(cfg.seed, &[stream::MATRIX]))?;
    let mut rs = rng::derived(cfg.seed, &[stream::SIGNAL]);
    let support = rand::seq::index::sample(&mut rs, cfg.num_vars, cfg.k).into_vec();
    let truth = BinarySignal::from_support(cfg.num_vars, &support)?;

    let j = (cfg.num_vars as f64).log2();
    let sigma = ebn0_to_sigma(cfg.ebn0_db, ldpc_column_energy(cfg.var_degree, 1.0), j)?;
    let meas = crate::channel::measure(
        &a,
        &truth,
        sigma,
        1.0,
        rng::derive_seed(cfg.seed, &[stream::NOISE]),
    )?;
    let rho = cfg.k as f64 / cfg.num_vars as f64;
    let lam = prior_log_odds(rho)?;
    let noise_var = sigma * sigma;
    let x0 = if cfg.warm_start {
        round_binary(&nnls_solve(&a, &meas.y, &cfg.settings.nnls)?.x)
    } else {
        BinarySignal::zeros(cfg.num_vars)
    };
    let mut gcfg = cfg
        .settings
        .glauber_config(cfg.num_vars, noise_var, lam, 1.0, rng::derive_seed(cfg.seed, &[stream::DECODER]))?
        .with_trajectory(cfg.stride);
    if cfg.record_states {
        gcfg = gcfg.with_states();
    }
    let out = Glauber::new(&a, &meas.y, 1.0)?.run(
        &gcfg,
        &x0,
        Some(Reference {
            signal: &truth,
            sparsity: cfg.k as f64,
        }),
    )?;
    let true_energy = energy_of(&a, &meas.y, 1.0, &truth, noise_var, lam)?;
    let final_ber = ber(&truth, &out.x, cfg.k as f64)?;
    Ok(TrajectoryRun {
        trajectory: out.trajectory.expect("trajectory requested"),
        true_energy,
        final_ber,
        truth,
        y: meas.y,
        matrix: a,
        noise_var,
        log_odds: lam,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_sweep(decoders: Vec<Decoder>, trials: usize) -> SweepConfig {
        SweepConfig {
            num_vars: 256,
            num_factors: 64,
            var_degree: 4,
            ks: vec![4],
            ebn0_db: vec![0.0, 10.0],
            trials,
            decoders,
            settings: DecoderSettings {
                steps: Some(4000),
                ..DecoderSettings::default()
            },
            seed: 11,
        }
    }

    #[test]
    fn decoder_names_round_trip() {
        for d in Decoder::ALL {
            assert_eq!(d.name().parse::<Decoder>().unwrap(), d);
        }
        assert!("lasso".parse::<Decoder>().is_err());
    }

    #[test]
    fn mean_stderr_reference() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_stderr(&[7.0]), (7.0, 0.0));
    }

    #[test]
    fn crossing_interpolates_in_log_domain() {
        let pts = [(0.0, 0.5), (1.0, 0.005)];
        // log10 goes −0.301 → −2.301; 0.05 is at −1.301, halfway
        assert!((crossing_point(&pts, 0.05).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(crossing_point(&[(2.0, 0.01)], 0.05), Some(2.0));
        assert_eq!(crossing_point(&[(0.0, 0.5), (1.0, 0.2)], 0.05), None);
        assert!((crossing_point(&[(0.0, 0.1), (2.0, 0.0)], 0.05).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_rows_are_ordered_and_deterministic() {
        let cfg = small_sweep(Decoder::ALL.to_vec(), 3);
        let a = ber_sweep(&cfg).unwrap();
        let b = ber_sweep(&cfg).unwrap();
        assert_eq!(a.len(), 4 * 2);
        for (ra, rb) in a.iter().zip(&b) {
            assert_eq!((ra.decoder, ra.k, ra.ebn0_db), (rb.decoder, rb.k, rb.ebn0_db));
            assert_eq!(ra.mean_ber.to_bits(), rb.mean_ber.to_bits());
        }
        let order: Vec<_> = a.iter().map(|r| (r.decoder, r.ebn0_db)).collect();
        assert_eq!(order[0], (Decoder::GlauberZero, 0.0));
        assert_eq!(order[1], (Decoder::GlauberZero, 10.0));
        assert_eq!(order[7], (Decoder::Amp, 10.0));
    }

    #[test]
    fn zero_trials_gives_no_rows() {
        assert!(ber_sweep(&small_sweep(vec![Decoder::Nnls], 0)).unwrap().is_empty());
    }

    #[test]
    fn high_snr_sweep_recovers() {
        let cfg = SweepConfig {
            num_vars: 1024,
            num_factors: 128,
            var_degree: 16,
            ks: vec![6],
            ebn0_db: vec![9.0],
            trials: 8,
            decoders: vec![Decoder::GlauberNnls, Decoder::Nnls, Decoder::Amp],
            settings: DecoderSettings::default(),
            seed: 2,
        };
        for row in ber_sweep(&cfg).unwrap() {
            assert!(row.mean_ber < 0.05, "{row:?}");
        }
    }

    #[test]
    fn sweep_validation() {
        let mut cfg = small_sweep(vec![Decoder::Nnls], 1);
        cfg.ks = vec![0];
        assert!(ber_sweep(&cfg).is_err());
        let mut cfg = small_sweep(vec![], 1);
        assert!(cfg.validate().is_err());
        cfg.decoders = vec![Decoder::Nnls];
        cfg.num_factors = 63;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn trajectory_energy_matches_states() {
        let cfg = TrajectoryConfig {
            num_vars: 256,
            num_factors: 64,
            var_degree: 4,
            k: 4,
            ebn0_db: 8.0,
            warm_start: false,
            stride: 500,
            record_states: true,
            settings: DecoderSettings {
                steps: Some(3000),
                ..DecoderSettings::default()
            },
            seed: 5,
        };
        let run = run_trajectory(&cfg).unwrap();
        let pts = &run.trajectory.points;
        assert_eq!(pts.first().unwrap().step, 0);
        assert_eq!(pts.last().unwrap().step, 3000);
        for p in pts {
            let x = BinarySignal::from_support(256, p.support.as_ref().unwrap()).unwrap();
            let e = energy_of(&run.matrix, &run.y, 1.0, &x, run.noise_var, run.log_odds).unwrap();
            assert!((e - p.energy).abs() <= 1e-8 * e.abs().max(1.0), "{e} vs {}", p.energy);
        }
        assert_eq!(run.truth.weight(), 4);
    }
}
