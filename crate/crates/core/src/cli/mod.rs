//! Command-line experiment driver.

pub mod batch;
pub mod config;
pub mod oracles;
pub mod records;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::engine::run_point_trial;
use crate::error::{Error, Result};
use crate::reconstruct::chain::exact_chain_mu_with;
use crate::reconstruct::params::{derive_params, parse_delta};
use crate::reconstruct::point::margin;
use crate::scenery::{IidScenery, Scenery};
use crate::seed::trial_seed;

use batch::{check_summary, run_batch};
use config::{BatchMode, ExperimentConfig};
use oracles::{lemma2_table, verify_oracles, ForwardEvolver};
use records::{RecordWriter, TrialRecord};

#[derive(Debug, Parser)]
#[command(name = "scenery", version, about = "Scenery reconstruction experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Experiment config file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Trial count; overrides the config.
    #[arg(long, global = true, value_name = "N")]
    pub trials: Option<u64>,
    /// Output file; overrides the config. Standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Exit with status 1 when acceptance thresholds are missed.
    #[arg(long, global = true)]
    pub check: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a seeded batch and write one JSON record per trial.
    RunBatch,
    /// Reconstruct one cell past the known window for a single trial.
    ReconstructPoint {
        #[arg(long, default_value_t = 0)]
        index: u64,
    },
    /// Grow the window from n0 to target_n for a single trial.
    ReconstructWhole {
        #[arg(long, default_value_t = 0)]
        index: u64,
    },
    /// Stationary law of the oracle stop positions.
    ComputeMu {
        #[arg(long, default_value_t = 0)]
        index: u64,
        /// Known window on [-n, n] as digits; drawn from the trial seed when absent.
        #[arg(long)]
        window: Option<String>,
    },
    /// Per-trial event outcomes as CSV.
    VerifyEvents,
    /// Count δ-paths against the entropy bound.
    VerifyLemma2 {
        #[arg(long, value_delimiter = ',', default_values_t = [6usize, 8, 10, 12])]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values = ["1/5", "1/4", "1/3"])]
        delta: Vec<String>,
        #[arg(long, value_delimiter = ',', default_values_t = [2i64, 3])]
        max_jump: Vec<i64>,
        /// Cross-check every count by exhaustive enumeration.
        #[arg(long)]
        enumerate: bool,
    },
    /// Run the exact small-instance checks.
    VerifyOracles,
}

impl GlobalArgs {
    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn open_out<'a>(path: Option<&Path>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(stdout),
    })
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct MuReport {
    n: usize,
    n_star: i64,
    offset_r: usize,
    window: String,
    pattern: String,
    support: Vec<(i64, f64)>,
    iterations: usize,
    residual: f64,
    mass_deficit: f64,
    transient_states: usize,
    margin: f64,
}

#[derive(Serialize)]
struct EventRow {
    index: u64,
    seed: u64,
    profile_hash: String,
    estimate: Option<u8>,
    truth: u8,
    a: Option<bool>,
    b: bool,
    c: bool,
    d: bool,
    f: bool,
    g: Option<bool>,
    margin: Option<f64>,
    stops_tau: u64,
    stops_nu: u64,
    tau_equals_nu: bool,
}

/// Runs one command. `Ok(false)` means a check failed.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<bool> {
    let g = &cli.global;
    match &cli.command {
        Command::RunBatch => {
            let cfg = g.experiment()?;
            let mut out = RecordWriter::new(open_out(cfg.out.as_deref(), stdout)?);
            let summary = run_batch(&cfg, &mut out)?;
            drop(out);
            if let Some(p) = &cfg.out {
                let mut f = BufWriter::new(File::create(p.with_extension("summary.json"))?);
                write_json(&mut f, &summary)?;
            }
            write_json(stderr, &summary)?;
            if g.check {
                let verdict = check_summary(&cfg, &summary);
                for f in &verdict.failures {
                    writeln!(stderr, "check failed: {f}")?;
                }
                return Ok(verdict.passed);
            }
            Ok(true)
        }
        Command::ReconstructPoint { index } | Command::ReconstructWhole { index } => {
            let mut cfg = g.experiment()?;
            cfg.mode = match cli.command {
                Command::ReconstructPoint { .. } => BatchMode::Point,
                _ => BatchMode::Whole,
            };
            let tcfg = cfg.trial_config()?;
            let rec = batch::run_trial(&cfg, &tcfg, &cfg.params_digest(), *index)?;
            let mut out = open_out(cfg.out.as_deref(), stdout)?;
            out.write_all(rec.to_line().as_bytes())?;
            out.flush()?;
            Ok(!g.check || rec.success)
        }
        Command::ComputeMu { index, window } => {
            let cfg = g.experiment()?;
            let tcfg = cfg.trial_config()?;
            let n = cfg.n as i64;
            let known = match window {
                Some(w) => Scenery::from_digits(-n, w)?,
                None => IidScenery::new(trial_seed(cfg.seed, *index)).window(-n, n),
            };
            if known.lo() != -n || known.hi() != n {
                return Err(Error::InvalidArgument(format!(
                    "window must have {} digits for n = {n}",
                    2 * n + 1
                )));
            }
            let params = derive_params(cfg.n, tcfg.delta, &known, &tcfg.profile)?;
            let sol = exact_chain_mu_with(&params, &known, &tcfg.walk, &tcfg.chain)?;
            let support = params
                .interval_i
                .iter()
                .map(|x| (x, sol.mu.mass(x)))
                .filter(|(_, m)| *m > 0.0)
                .collect();
            let report = MuReport {
                n: cfg.n,
                n_star: params.n_star,
                offset_r: params.offset_r,
                window: known.to_digits(),
                pattern: params.pattern_w.to_string(),
                support,
                iterations: sol.iterations,
                residual: sol.residual,
                mass_deficit: sol.chain.mass_deficit,
                transient_states: sol.chain.transient_states,
                margin: margin(&sol.mu, &tcfg.walk, cfg.n, params.offset_r),
            };
            let mut out = open_out(cfg.out.as_deref(), stdout)?;
            write_json(&mut out, &report)?;
            Ok(true)
        }
        Command::VerifyEvents => {
            let cfg = g.experiment()?;
            let tcfg = cfg.trial_config()?;
            let digest = cfg.params_digest();
            let out = open_out(cfg.out.as_deref(), stdout)?;
            let mut csv = csv::Writer::from_writer(out);
            let mut violations = 0u64;
            for index in 0..cfg.trials {
                let seed = trial_seed(cfg.seed, index);
                let r = run_point_trial(&tcfg, seed)?;
                let e = &r.events;
                violations += e.violates_containment() as u64;
                csv.serialize(EventRow {
                    index,
                    seed,
                    profile_hash: digest.clone(),
                    estimate: r.estimate.map(|c| c.get()),
                    truth: r.truth.get(),
                    a: e.a,
                    b: e.b,
                    c: e.c,
                    d: e.d,
                    f: e.f,
                    g: e.g,
                    margin: e.margin,
                    stops_tau: e.stops_tau,
                    stops_nu: e.stops_nu,
                    tau_equals_nu: e.tau_equals_nu,
                })?;
                csv.flush()?;
            }
            if violations > 0 {
                writeln!(stderr, "{violations} trials had B, C, D, F, G true and A false")?;
            }
            Ok(violations == 0)
        }
        Command::VerifyLemma2 {
            n,
            delta,
            max_jump,
            enumerate,
        } => {
            let deltas = delta.iter().map(|d| parse_delta(d)).collect::<Result<Vec<_>>>()?;
            let rows = lemma2_table(n, &deltas, max_jump, *enumerate)?;
            let mut out = open_out(g.out.as_deref(), stdout)?;
            let mut csv = csv::Writer::from_writer(&mut out);
            let mut ok = true;
            for r in &rows {
                ok &= r.within && r.enumerated.is_none_or(|e| e as u128 == r.count);
                csv.serialize(r)?;
            }
            csv.flush()?;
            Ok(ok)
        }
        Command::VerifyOracles => {
            let report = verify_oracles(&ForwardEvolver);
            let mut out = open_out(g.out.as_deref(), stdout)?;
            for c in &report.checks {
                writeln!(out, "{c}")?;
            }
            out.flush()?;
            Ok(report.all_pass())
        }
    }
}

/// Loads every record of a JSON-lines file.
pub fn load_records(path: &Path) -> Result<Vec<TrialRecord>> {
    records::read_records(std::io::BufReader::new(File::open(path)?))
}
