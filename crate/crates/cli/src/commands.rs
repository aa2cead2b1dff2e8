use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use binsense::amp::{AmpConfig, DenseGaussianMatrix};
use binsense::channel::{ber, ebn0_to_sigma, ldpc_column_energy, measure_with, sample_bernoulli_with};
use binsense::edgelist::{parse_edge_list, write_edge_list};
use binsense::expansion::{expansion_alpha_star, DEFAULT_TOL};
use binsense::experiment::{
    ber_sweep, decode_amp, decode_ldpc, run_trajectory, DecoderSettings, SweepConfig,
    TrajectoryConfig, SWEEP_HEADER,
};
use binsense::nnls::NnlsConfig;
use binsense::rng::{self, stream};
use binsense::ura::{argmin_feasible, scan_budget, GridSpec, UraConfig, BUDGET_HEADER};
use binsense::{Decoder, LdpcParams, SparseBinaryMatrix};

use crate::{
    BerSweepArgs, CliError, Command, DecodeArgs, DecoderArgs, E2eArgs, GenMatrixArgs,
    MatrixArgs, TrajectoryArgs,
};

pub const SCHEMA_LINE: &str = "# schema=1";

pub fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::GenMatrix(a) => gen_matrix(a),
        Command::Decode(a) => decode(a),
        Command::BerSweep(a) => sweep(a),
        Command::Trajectory(a) => trajectory(a),
        Command::E2e(a) => e2e(a),
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn settings(d: &DecoderArgs) -> DecoderSettings {
    DecoderSettings {
        steps: d.steps,
        anneal_factor: d.anneal,
        nnls: NnlsConfig {
            max_iters: d.nnls_iters,
            ..NnlsConfig::default()
        },
        amp: AmpConfig {
            iters: d.amp_iters,
            ..AmpConfig::default()
        },
    }
}

fn parse_decoder(name: &str) -> Result<Decoder, CliError> {
    Ok(name.parse::<Decoder>()?)
}

fn params(m: &MatrixArgs) -> Result<LdpcParams, CliError> {
    Ok(LdpcParams::new(m.num_vars, m.num_factors, m.nu)?)
}

fn gen_matrix(a: GenMatrixArgs) -> Result<(), CliError> {
    let p = LdpcParams::new(a.num_vars, a.num_factors, a.nu)?;
    let m = SparseBinaryMatrix::sample_gallager(p, a.seed)?;
    let mut out = sink(a.output.as_deref())?;
    write_edge_list(&m, &mut out)?;
    out.flush()?;
    eprintln!(
        "M={} n={} nu={} s={} edges={}",
        p.num_vars,
        p.num_factors,
        p.var_degree,
        p.factor_degree,
        p.num_edges()
    );
    match expansion_alpha_star::<f64>(p.var_degree, p.factor_degree, DEFAULT_TOL) {
        Ok(e) => eprintln!(
            "alpha*={:.10} k*={:.2}",
            e.alpha_star,
            e.sparsity(p.num_vars)
        ),
        Err(e) => eprintln!("alpha* unavailable: {e}"),
    }
    Ok(())
}

fn decode(a: DecodeArgs) -> Result<(), CliError> {
    let decoder = parse_decoder(&a.decoder)?;
    let cfg = settings(&a.decoder_args);
    cfg.validate()?;
    let ldpc = match &a.matrix_file {
        Some(path) => parse_edge_list(&fs::read_to_string(path)?)?,
        None => SparseBinaryMatrix::sample_gallager(
            params(&a.matrix)?,
            rng::derive_seed(a.seed, &[stream::MATRIX, 0]),
        )?,
    };
    let (m, n, nu) = (ldpc.num_vars(), ldpc.num_factors(), ldpc.var_degree());
    if a.k == 0 || a.k >= m {
        return Err(CliError::Invalid(format!("k = {} must lie in (0, M)", a.k)));
    }
    let rho = a.k as f64 / m as f64;
    let j = (m as f64).log2();
    let mut rs = rng::derived(a.seed, &[stream::SIGNAL, a.k as u64, 0]);
    let x = sample_bernoulli_with(m, rho, &mut rs)?;
    let mut rz = rng::derived(a.seed, &[stream::NOISE, a.k as u64, 0]);
    let dec = if decoder.uses_dense() {
        let dense = DenseGaussianMatrix::<f64>::sample(n, m, rng::derive_seed(a.seed, &[stream::MATRIX, 1]))?;
        let sigma = ebn0_to_sigma(a.ebn0, 1.0, j)?;
        let y = measure_with(&dense, &x, sigma, 1.0, &mut rz)?.y;
        decode_amp(&dense, &y, 1.0, rho, &cfg)?
    } else {
        let sigma = ebn0_to_sigma(a.ebn0, ldpc_column_energy(nu, 1.0), j)?;
        let y = measure_with(&ldpc, &x, sigma, 1.0, &mut rz)?.y;
        let seed = rng::derive_seed(a.seed, &[stream::DECODER, a.k as u64, 0, 0]);
        decode_ldpc(decoder, &ldpc, &y, sigma, 1.0, rho, &cfg, seed, None)?
    };
    let errors = x.hamming_distance(&dec.hard)?;
    let mut out = sink(a.output.as_deref())?;
    writeln!(out, "{SCHEMA_LINE}")?;
    writeln!(out, "decoder,k,ebn0_db,weight,errors,ber,runtime_ms")?;
    writeln!(
        out,
        "{},{},{},{},{},{:.6e},{:.3}",
        decoder,
        a.k,
        a.ebn0,
        x.weight(),
        errors,
        ber(&x, &dec.hard, a.k as f64)?,
        dec.runtime_ms
    )?;
    out.flush()?;
    Ok(())
}

fn sweep(a: BerSweepArgs) -> Result<(), CliError> {
    let decoders = a
        .decoders
        .iter()
        .map(|d| parse_decoder(d))
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = SweepConfig {
        num_vars: a.matrix.num_vars,
        num_factors: a.matrix.num_factors,
        var_degree: a.matrix.nu,
        ks: a.k,
        ebn0_db: a.ebn0,
        trials: a.trials,
        decoders,
        settings: settings(&a.decoder_args),
        seed: a.seed,
    };
    cfg.validate()?;
    let rows = ber_sweep(&cfg)?;
    let mut out = sink(a.output.as_deref())?;
    writeln!(out, "{SCHEMA_LINE}")?;
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.csv())?;
    }
    out.flush()?;
    Ok(())
}

fn trajectory(a: TrajectoryArgs) -> Result<(), CliError> {
    params(&a.matrix)?;
    let cfg = TrajectoryConfig {
        num_vars: a.matrix.num_vars,
        num_factors: a.matrix.num_factors,
        var_degree: a.matrix.nu,
        k: a.k,
        ebn0_db: a.ebn0,
        warm_start: a.warm_start,
        stride: a.stride.unwrap_or(a.matrix.num_vars as u64),
        record_states: a.dump_states.is_some(),
        settings: settings(&a.decoder_args),
        seed: a.seed,
    };
    let run = run_trajectory(&cfg)?;
    let mut out = sink(a.output.as_deref())?;
    writeln!(out, "{SCHEMA_LINE}")?;
    writeln!(out, "step,step_mj,energy,ber,true_energy,true_ber")?;
    for p in &run.trajectory.points {
        writeln!(
            out,
            "{},{:.6},{:.9e},{:.6e},{:.9e},0",
            p.step,
            run.trajectory.in_sweep_units(p.step),
            p.energy,
            p.ber.unwrap_or(f64::NAN),
            run.true_energy
        )?;
    }
    out.flush()?;
    if let Some(path) = &a.dump_states {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{SCHEMA_LINE}")?;
        writeln!(w, "step,support")?;
        for p in &run.trajectory.points {
            let support = p.support.as_deref().unwrap_or(&[]);
            let joined: Vec<String> = support.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{},{}", p.step, joined.join(" "))?;
        }
        w.flush()?;
    }
    Ok(())
}

fn e2e(a: E2eArgs) -> Result<(), CliError> {
    let decoder = parse_decoder(&a.decoder)?;
    let grid = GridSpec {
        start_db: a.grid_start,
        stop_db: a.grid_stop,
        step_db: a.grid_step,
    };
    grid.points()?;
    let configs = a
        .k
        .iter()
        .map(|&k| {
            let cfg = UraConfig {
                k,
                message_bits: a.message_bits,
                prefix_bits: a.prefix_bits,
                blocklength: a.blocklength,
                phase1_len: a.phase1_len,
                amplitude: a.alpha,
                var_degree: a.nu,
                target_pupe: a.target,
                decoder,
                settings: settings(&a.decoder_args),
                trials: a.trials,
                seed: a.seed,
            };
            cfg.validate()?;
            if a.trials == 0 {
                return Err(CliError::Invalid("need at least one trial".into()));
            }
            Ok(cfg)
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut out = sink(a.output.as_deref())?;
    writeln!(out, "{SCHEMA_LINE}")?;
    writeln!(out, "{BUDGET_HEADER}")?;
    for cfg in &configs {
        let start = Instant::now();
        let rows = scan_budget(cfg, &grid)?;
        let best = argmin_feasible(&rows);
        if best.is_none() {
            eprintln!("k={}: no grid point reaches PUPE {}", cfg.k, cfg.target_pupe);
        }
        if a.grid_rows {
            for r in &rows {
                writeln!(out, "{}", r.csv())?;
            }
        } else {
            // infeasible k: report the grid point closest to feasibility
            let idx = best.unwrap_or_else(|| {
                (0..rows.len())
                    .min_by(|&i, &j| rows[i].eps1.total_cmp(&rows[j].eps1))
                    .expect("grid is nonempty")
            });
            writeln!(out, "{}", rows[idx].csv())?;
        }
        out.flush()?;
        eprintln!("k={} done in {:.1}s", cfg.k, start.elapsed().as_secs_f64());
    }
    Ok(())
}
