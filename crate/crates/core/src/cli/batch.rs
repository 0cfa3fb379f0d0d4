//! Seeded trial batches.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::cli::config::{BatchMode, ExperimentConfig};
use crate::cli::records::{RecordWriter, Summary, TrialRecord};
use crate::engine::{run_point_trial, run_whole_trial, TrialConfig};
use crate::error::Result;
use crate::seed::trial_seed;

/// Trials computed in parallel before their records are written in order.
const CHUNK: u64 = 64;

pub fn run_trial(
    cfg: &ExperimentConfig,
    tcfg: &TrialConfig,
    digest: &str,
    index: u64,
) -> Result<TrialRecord> {
    let seed = trial_seed(cfg.seed, index);
    Ok(match cfg.mode {
        BatchMode::Point => TrialRecord::point(index, seed, digest, cfg.n, run_point_trial(tcfg, seed)?),
        BatchMode::Whole => TrialRecord::whole(
            index,
            seed,
            digest,
            cfg.target_n,
            run_whole_trial(tcfg, cfg.n0, cfg.target_n, seed)?,
        ),
    })
}

/// Runs `cfg.trials` trials, streaming one record per trial to `out` in index order.
pub fn run_batch<W: Write>(cfg: &ExperimentConfig, out: &mut RecordWriter<W>) -> Result<Summary> {
    let tcfg = cfg.trial_config()?;
    let digest = cfg.params_digest();
    let mut summary = Summary::new(&digest);
    let mut start = 0;
    while start < cfg.trials {
        let end = (start + CHUNK).min(cfg.trials);
        let recs: Vec<Result<TrialRecord>> = (start..end)
            .into_par_iter()
            .map(|i| run_trial(cfg, &tcfg, &digest, i))
            .collect();
        for rec in recs {
            let rec = rec?;
            out.write(&rec)?;
            summary.add(&rec);
        }
        start = end;
    }
    summary.finish();
    Ok(summary)
}

/// Records of a batch held in memory.
pub fn collect_batch(cfg: &ExperimentConfig) -> Result<(Vec<TrialRecord>, Summary)> {
    let tcfg = cfg.trial_config()?;
    let digest = cfg.params_digest();
    let recs = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, &tcfg, &digest, i))
        .collect::<Result<Vec<_>>>()?;
    let summary = Summary::from_records(&digest, &recs);
    Ok((recs, summary))
}

/// `--check` verdict for a batch.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub passed: bool,
    pub failures: Vec<String>,
}

pub fn check_summary(cfg: &ExperimentConfig, s: &Summary) -> CheckResult {
    let mut failures = Vec::new();
    match (s.success_rate, s.wilson_95) {
        (Some(rate), Some((lo, _))) => {
            if rate <= cfg.min_success {
                failures.push(format!("success rate {rate:.4} is not above {}", cfg.min_success));
            }
            if lo <= cfg.chance_level {
                failures.push(format!(
                    "95% lower bound {lo:.4} is not above chance level {}",
                    cfg.chance_level
                ));
            }
        }
        _ => failures.push("no trials".into()),
    }
    if s.events.containment_violations > 0 {
        failures.push(format!("{} containment violations", s.events.containment_violations));
    }
    if s.whole_all_events_equivalent < s.whole_all_events {
        failures.push(format!(
            "{} of {} whole-loop trials with all events true were not equivalent",
            s.whole_all_events - s.whole_all_events_equivalent,
            s.whole_all_events
        ));
    }
    CheckResult {
        passed: failures.is_empty(),
        failures,
    }
}
