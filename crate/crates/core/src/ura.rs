//! Unsourced random access with a compressed-sensing prefix phase.
//!
//! Phase 1: each of `k` users sends column `m(i)` (its `J`-bit prefix) of an
//! `n₁ × 2^J` LDPC matrix; the receiver lists `k` prefixes. Phase 2 assigns
//! each listed prefix its own slot and is assumed free and error-free.
//! Phase 3: each user sends its remaining `B − J` bits in a slot of
//! `n′ = (n − n₁)/k` channel uses, accounted for by the normal approximation.

use rand::Rng;
use rayon::prelude::*;

use crate::amp::DenseGaussianMatrix;
use crate::channel::{ebn0_to_sigma, measure, CountSignal};
use crate::error::{Error, Result};
use crate::experiment::{decode_amp, decode_ldpc, mean_stderr, Decoder, DecoderSettings};
use crate::glauber::topk_list;
use crate::ppv::{solve_p_star, total_ebn0};
use crate::rng::{self, stream};
use crate::special::{db_to_linear, linear_to_db};
use crate::sparse::{LdpcParams, SparseBinaryMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct UraConfig {
    pub k: usize,
    pub message_bits: usize,
    pub prefix_bits: usize,
    pub blocklength: usize,
    pub phase1_len: usize,
    /// Phase-one column amplitude `α`.
    pub amplitude: f64,
    pub var_degree: usize,
    pub target_pupe: f64,
    pub decoder: Decoder,
    pub settings: DecoderSettings,
    pub trials: usize,
    pub seed: u64,
}

impl UraConfig {
    pub fn num_columns(&self) -> usize {
        1usize << self.prefix_bits
    }

    /// `n′ = (n − n₁)/k`.
    pub fn slot_len(&self) -> usize {
        (self.blocklength - self.phase1_len) / self.k
    }

    pub fn params(&self) -> Result<LdpcParams> {
        LdpcParams::new(self.num_columns(), self.phase1_len, self.var_degree)
    }

    /// Column energy `E_m` of the phase-one codebook.
    pub fn column_energy(&self) -> f64 {
        let a2 = self.amplitude * self.amplitude;
        if self.decoder.uses_dense() {
            a2
        } else {
            a2 * self.var_degree as f64
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::param("need at least one active user"));
        }
        if self.prefix_bits == 0 || self.prefix_bits > 30 {
            return Err(Error::param("prefix bits must lie in 1..=30"));
        }
        if self.prefix_bits >= self.message_bits {
            return Err(Error::param("prefix must be shorter than the message (J < B)"));
        }
        if self.phase1_len == 0 || self.phase1_len >= self.blocklength {
            return Err(Error::param("phase-one length must lie in (0, n)"));
        }
        if !(self.blocklength - self.phase1_len).is_multiple_of(self.k) {
            return Err(Error::param(format!(
                "phase-three length {} is not divisible by k = {}",
                self.blocklength - self.phase1_len,
                self.k
            )));
        }
        if self.k >= self.num_columns() {
            return Err(Error::param("k must be smaller than 2^J"));
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(Error::param("amplitude must be positive"));
        }
        if !(self.target_pupe > 0.0 && self.target_pupe < 0.5) {
            return Err(Error::param("target PUPE must lie in (0, 1/2)"));
        }
        if !self.decoder.uses_dense() {
            self.params()?;
        }
        self.settings.validate()
    }
}

/// Phase-one codebook.
pub enum Codebook {
    Ldpc(SparseBinaryMatrix),
    Dense(DenseGaussianMatrix<f64>),
}

impl Codebook {
    pub fn sample(cfg: &UraConfig, seed: u64) -> Result<Self> {
        Ok(if cfg.decoder.uses_dense() {
            Codebook::Dense(DenseGaussianMatrix::sample(cfg.phase1_len, cfg.num_columns(), seed)?)
        } else {
            Codebook::Ldpc(SparseBinaryMatrix::sample_gallager(cfg.params()?, seed)?)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOneResult {
    /// Prefix `m(i)` of every user.
    pub prefixes: Vec<usize>,
    /// The receiver's list; always `k` distinct entries.
    pub list: Vec<usize>,
    pub collided: Vec<bool>,
    pub in_list: Vec<bool>,
}

impl PhaseOneResult {
    pub fn user_error(&self, i: usize) -> bool {
        self.collided[i] || !self.in_list[i]
    }

    pub fn errors(&self) -> usize {
        (0..self.prefixes.len()).filter(|&i| self.user_error(i)).count()
    }

    pub fn error_fraction(&self) -> f64 {
        self.errors() as f64 / self.prefixes.len() as f64
    }
}

/// Phase 2 hands each listed prefix its own phase-three slot.
pub fn phase2_schedule(list: &[usize], k: usize) -> Vec<(usize, usize)> {
    let mut seen = std::collections::HashSet::with_capacity(list.len());
    assert_eq!(list.len(), k, "phase two expects exactly k listed prefixes");
    assert!(list.iter().all(|m| seen.insert(*m)), "listed prefixes must be distinct");
    list.iter().enumerate().map(|(slot, &m)| (m, slot)).collect()
}

/// Uniform `J`-bit prefixes of `k` users.
pub fn draw_prefixes<R: Rng + ?Sized>(k: usize, num_columns: usize, rng: &mut R) -> Vec<usize> {
    (0..k).map(|_| rng.random_range(0..num_columns)).collect()
}

/// Seed of trial `t` at grid point `grid_index`.
pub fn trial_seed(cfg: &UraConfig, grid_index: u64, trial: u64) -> u64 {
    rng::derive_seed(cfg.seed, &[cfg.k as u64, grid_index, trial])
}

/// One phase-one transmission at the given phase-one `E_b/N_0`.
pub fn simulate_phase1(
    cfg: &UraConfig,
    codebook: &Codebook,
    phase1_ebn0_db: f64,
    seed: u64,
) -> Result<PhaseOneResult> {
    cfg.validate()?;
    let m = cfg.num_columns();
    let prefixes = draw_prefixes(cfg.k, m, &mut rng::derived(seed, &[stream::MESSAGES]));
    let counts = CountSignal::from_choices(m, &prefixes)?;
    let sigma = ebn0_to_sigma(phase1_ebn0_db, cfg.column_energy(), cfg.prefix_bits as f64)?;
    let rho = cfg.k as f64 / m as f64;
    let noise_seed = rng::derive_seed(seed, &[stream::NOISE]);
    let decoded = match codebook {
        Codebook::Ldpc(a) => {
            let y = measure(a, &counts, sigma, cfg.amplitude, noise_seed)?.y;
            decode_ldpc(
                cfg.decoder,
                a,
                &y,
                sigma,
                cfg.amplitude,
                rho,
                &cfg.settings,
                rng::derive_seed(seed, &[stream::DECODER]),
                None,
            )?
        }
        Codebook::Dense(a) => {
            let y = measure(a, &counts, sigma, cfg.amplitude, noise_seed)?.y;
            decode_amp(a, &y, cfg.amplitude, rho, &cfg.settings)?
        }
    };
    let list = topk_list(
        &crate::glauber::SoftOutput {
            p1: decoded.scores,
        },
        cfg.k,
    )?;
    let _ = phase2_schedule(&list, cfg.k);
    let listed: std::collections::HashSet<usize> = list.iter().copied().collect();
    let collided = prefixes.iter().map(|&p| counts.counts()[p] > 1).collect();
    let in_list = prefixes.iter().map(|p| listed.contains(p)).collect();
    Ok(PhaseOneResult {
        prefixes,
        list,
        collided,
        in_list,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eps1Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Monte-Carlo `ε₁` over `cfg.trials` independent transmissions; each trial
/// draws a fresh codebook.
pub fn estimate_eps1(cfg: &UraConfig, phase1_ebn0_db: f64, grid_index: u64) -> Result<Eps1Estimate> {
    cfg.validate()?;
    if cfg.trials == 0 {
        return Err(Error::param("need at least one trial"));
    }
    let fractions = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let base = trial_seed(cfg, grid_index, t as u64);
            let book = Codebook::sample(cfg, rng::derive_seed(base, &[stream::MATRIX]))?;
            Ok(simulate_phase1(cfg, &book, phase1_ebn0_db, base)?.error_fraction())
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, stderr) = mean_stderr(&fractions);
    Ok(Eps1Estimate {
        mean,
        stderr,
        trials: cfg.trials,
    })
}

/// Phase-one energies `start, start + step, …` up to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

impl GridSpec {
    pub const DEFAULT_STEP_DB: f64 = 0.25;

    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.step_db > 0.0) || !self.start_db.is_finite() || !self.stop_db.is_finite() {
            return Err(Error::param("grid needs finite bounds and a positive step"));
        }
        if self.stop_db < self.start_db {
            return Err(Error::param("grid is empty"));
        }
        let n = ((self.stop_db - self.start_db) / self.step_db + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| self.start_db + i as f64 * self.step_db).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetRow {
    pub k: usize,
    pub phase1_ebn0_db: f64,
    pub eps1: f64,
    pub eps1_stderr: f64,
    pub eps2: f64,
    pub p_star: f64,
    pub total_ebn0_db: f64,
    pub feasible: bool,
}

pub const BUDGET_HEADER: &str =
    "k,phase1_ebn0_db,eps1,eps1_stderr,eps2,p_star,total_ebn0_db,feasible";

impl BudgetRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{:.6},{:.6},{:.6},{:.6e},{:.4},{}",
            self.k,
            self.phase1_ebn0_db,
            self.eps1,
            self.eps1_stderr,
            self.eps2,
            self.p_star,
            self.total_ebn0_db,
            self.feasible
        )
    }

    fn infeasible(k: usize, phase1_ebn0_db: f64, est: Eps1Estimate, eps2: f64) -> Self {
        BudgetRow {
            k,
            phase1_ebn0_db,
            eps1: est.mean,
            eps1_stderr: est.stderr,
            eps2,
            p_star: f64::NAN,
            total_ebn0_db: f64::NAN,
            feasible: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetResult {
    pub rows: Vec<BudgetRow>,
    /// Index into `rows` of the smallest feasible total.
    pub best: usize,
}

impl BudgetResult {
    pub fn best_row(&self) -> &BudgetRow {
        &self.rows[self.best]
    }
}

/// Completes a row from a phase-one energy and its `ε₁` estimate.
pub fn budget_row(cfg: &UraConfig, phase1_ebn0_db: f64, est: Eps1Estimate) -> BudgetRow {
    let eps2 = cfg.target_pupe - est.mean;
    if eps2 <= 0.0 {
        return BudgetRow::infeasible(cfg.k, phase1_ebn0_db, est, eps2);
    }
    let bits = (cfg.message_bits - cfg.prefix_bits) as f64;
    let Ok(p_star) = solve_p_star(bits, cfg.slot_len(), eps2) else {
        return BudgetRow::infeasible(cfg.k, phase1_ebn0_db, est, eps2);
    };
    let total = total_ebn0(
        cfg.message_bits,
        cfg.prefix_bits,
        cfg.slot_len(),
        p_star,
        db_to_linear(phase1_ebn0_db),
    )
    .expect("inputs validated");
    BudgetRow {
        k: cfg.k,
        phase1_ebn0_db,
        eps1: est.mean,
        eps1_stderr: est.stderr,
        eps2,
        p_star,
        total_ebn0_db: linear_to_db(total),
        feasible: true,
    }
}

/// Index of the smallest feasible total; ties go to the earlier row.
pub fn argmin_feasible(rows: &[BudgetRow]) -> Option<usize> {
    rows.iter()
        .enumerate()
        .filter(|(_, r)| r.feasible)
        .fold(None, |best: Option<(usize, f64)>, (i, r)| match best {
            Some((_, v)) if v <= r.total_ebn0_db => best,
            _ => Some((i, r.total_ebn0_db)),
        })
        .map(|(i, _)| i)
}

/// One row per phase-one grid point.
pub fn scan_budget(cfg: &UraConfig, grid: &GridSpec) -> Result<Vec<BudgetRow>> {
    cfg.validate()?;
    grid.points()?
        .into_iter()
        .enumerate()
        .map(|(gi, db)| Ok(budget_row(cfg, db, estimate_eps1(cfg, db, gi as u64)?)))
        .collect()
}

/// Scans the phase-one grid and returns every row with the argmin marked.
/// Fails with [`Error::Infeasible`] when no grid point meets the target.
pub fn optimize_budget(cfg: &UraConfig, grid: &GridSpec) -> Result<BudgetResult> {
    let rows = scan_budget(cfg, grid)?;
    match argmin_feasible(&rows) {
        Some(best) => Ok(BudgetResult { rows, best }),
        None => Err(Error::Infeasible(format!(
            "no phase-one energy in the grid reaches PUPE {} at k = {}",
            cfg.target_pupe, cfg.k
        ))),
    }
}
