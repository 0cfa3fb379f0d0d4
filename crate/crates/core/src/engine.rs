//! Single-pass simulation-mode trials.
//!
//! The walk, its observations, the pattern matchers for `τ` and `ν`, the
//! window checks behind `D` and the offset tallies are all advanced together
//! one step at a time; only the tallies survive the pass.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{eval_c_count, eval_f, eval_g, EventReport, FReport, WindowTracker};
use crate::observe::PatternAutomaton;
use crate::paths::Delta;
use crate::reconstruct::chain::{exact_chain_mu_with, ChainOptions, StationaryDistribution};
use crate::reconstruct::params::{derive_params, ReconstructionParams, ThresholdProfile};
use crate::reconstruct::point::{
    color_law, corrections, evolved_law, margin_from_law, score_from_counts, ColorScore,
};
use crate::scenery::{Color, GrowingScenery, IidScenery, Scenery};
use crate::walk::{IncrementDistribution, Walker};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub walk: IncrementDistribution,
    pub n: usize,
    pub delta: Delta,
    pub profile: ThresholdProfile,
    pub chain: ChainOptions,
    /// Largest jump considered by the F-event search; defaults to the walk's.
    pub f_max_jump: Option<i64>,
}

impl TrialConfig {
    pub fn new(walk: IncrementDistribution, n: usize, delta: Delta, profile: ThresholdProfile) -> Self {
        TrialConfig {
            walk,
            n,
            delta,
            profile,
            chain: ChainOptions::default(),
            f_max_jump: None,
        }
    }

    pub fn b_bound(&self) -> u64 {
        self.profile.b_bound(self.n)
    }
}

/// Where the stationary law used by a trial came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuSource {
    Exact,
    /// Empirical law of the oracle stop positions of the same trial.
    OracleEstimate,
    Unavailable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Correct,
    Wrong,
    NoData,
}

/// Result of reconstructing one end.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndResult {
    pub truth: Color,
    pub estimate: Option<Color>,
    pub outcome: Outcome,
    pub score: Option<ColorScore>,
    pub events: EventReport,
    pub mu_source: MuSource,
    /// `P_mu(chi_r = e)`, when μ is available.
    pub p_mu: Option<[f64; 5]>,
    /// Empirical law of `chi_{nu + r}`.
    pub p_tilde: Option<[f64; 5]>,
    pub nu_end_positions: Vec<i64>,
    pub f_witness: Option<Vec<i64>>,
}

impl EndResult {
    pub fn success(&self) -> bool {
        self.outcome == Outcome::Correct
    }
}

/// One end being reconstructed during the pass.
struct Probe {
    params: ReconstructionParams,
    known: Scenery,
    truth_color: Color,
    /// `-1` for the mirrored (left) end.
    sign: i64,
    dfa: PatternAutomaton,
    state: usize,
    tau_counts: [u64; 5],
    nu_counts: [u64; 5],
    tau_due: VecDeque<u64>,
    nu_due: VecDeque<u64>,
    stops_tau: u64,
    stops_nu: u64,
    tau_not_nu: u64,
    nu_ends: Vec<i64>,
}

impl Probe {
    fn new(params: ReconstructionParams, known: Scenery, truth_color: Color, sign: i64) -> Self {
        let dfa = PatternAutomaton::new(&params.pattern_w);
        Probe {
            params,
            known,
            truth_color,
            sign,
            dfa,
            state: 0,
            tau_counts: [0; 5],
            nu_counts: [0; 5],
            tau_due: VecDeque::new(),
            nu_due: VecDeque::new(),
            stops_tau: 0,
            stops_nu: 0,
            tau_not_nu: 0,
            nu_ends: Vec::new(),
        }
    }
}

/// Walk-level quantities shared by all probes of a pass.
struct PassSummary {
    max_abs: u64,
    d_holds: bool,
}

fn run_pass(
    cfg: &TrialConfig,
    seed: u64,
    scenery: &mut GrowingScenery,
    probes: &mut [Probe],
) -> PassSummary {
    let n = cfg.n;
    let ni = n as i64;
    let horizon = probes[0].params.horizon_t;
    let r_max = probes.iter().map(|p| p.params.offset_r).max().unwrap_or(0) as u64;
    let mut walker = Walker::new(&cfg.walk, 0, seed);
    let mut tracker = WindowTracker::new(n, cfg.delta);
    let mut max_abs = 0u64;
    let mut d_holds = true;
    let mut last_outside: i64 = -1;
    let mut x = 0i64;
    for t in 0..=horizon + r_max {
        if t > 0 {
            let prev = x;
            x = walker.advance();
            if tracker.push(x - prev) == Some(false) && t <= horizon {
                d_holds = false;
            }
        }
        if t <= horizon {
            max_abs = max_abs.max(x.unsigned_abs());
        }
        if x.abs() > ni {
            last_outside = t as i64;
        }
        let color = scenery.color(x);
        let symbol = color.get() as usize;
        for p in probes.iter_mut() {
            while p.tau_due.front() == Some(&t) {
                p.tau_due.pop_front();
                p.tau_counts[color.index()] += 1;
            }
            while p.nu_due.front() == Some(&t) {
                p.nu_due.pop_front();
                p.nu_counts[color.index()] += 1;
            }
            p.state = p.dfa.next(p.state, symbol);
            if t <= horizon && p.dfa.is_match(p.state) {
                let due = t + p.params.offset_r as u64;
                p.stops_tau += 1;
                p.tau_due.push_back(due);
                if last_outside < t as i64 - ni {
                    p.stops_nu += 1;
                    p.nu_due.push_back(due);
                    p.nu_ends.push(p.sign * x);
                } else {
                    p.tau_not_nu += 1;
                }
            }
        }
    }
    PassSummary { max_abs, d_holds }
}

fn normalized(counts: &[u64; 5]) -> Option<[f64; 5]> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return None;
    }
    let mut out = [0.0; 5];
    for e in 0..5 {
        out[e] = counts[e] as f64 / total as f64;
    }
    Some(out)
}

fn finish_probe(
    cfg: &TrialConfig,
    probe: &Probe,
    pass: &PassSummary,
    truth: &Scenery,
    f: &FReport,
) -> Result<EndResult> {
    let params = &probe.params;
    let (mu, mu_source): (Option<StationaryDistribution>, MuSource) = if params.n <= cfg.chain.max_n {
        match exact_chain_mu_with(params, &probe.known, &cfg.walk, &cfg.chain) {
            Ok(sol) => (Some(sol.mu), MuSource::Exact),
            Err(Error::DegenerateChain(_)) => (None, MuSource::Unavailable),
            Err(e) => return Err(e),
        }
    } else if !probe.nu_ends.is_empty() {
        (
            Some(StationaryDistribution::empirical(params.interval_i, &probe.nu_ends)?),
            MuSource::OracleEstimate,
        )
    } else {
        (None, MuSource::Unavailable)
    };

    let (score, margin, p_mu) = match &mu {
        Some(mu) => {
            let law = evolved_law(mu, &cfg.walk, params.offset_r);
            let corr = corrections(&law, &probe.known, params.interval_i)?;
            let score = score_from_counts(&probe.tau_counts, corr, params.n, params.horizon_t).ok();
            (score, Some(margin_from_law(&law, params.n)), Some(color_law(&law, truth)?))
        }
        None => (None, None, None),
    };
    let p_tilde = normalized(&probe.nu_counts);
    let g = match (margin, p_mu) {
        (Some(m), Some(p_mu)) => match p_tilde {
            Some(pt) => eval_g(&pt, &p_mu, m),
            None => (m > 0.0).then_some(false),
        },
        _ => None,
    };
    let estimate = score.as_ref().map(|s| s.best());
    let outcome = match estimate {
        None => Outcome::NoData,
        Some(e) if e == probe.truth_color => Outcome::Correct,
        Some(_) => Outcome::Wrong,
    };
    let events = EventReport {
        a: Some(outcome == Outcome::Correct),
        b: pass.max_abs <= cfg.b_bound(),
        c: eval_c_count(probe.stops_nu, params.n, cfg.profile.c_base),
        d: pass.d_holds,
        f: f.holds,
        g,
        margin: margin.filter(|m| *m > 0.0),
        stops_tau: probe.stops_tau,
        stops_nu: probe.stops_nu,
        tau_equals_nu: probe.tau_not_nu == 0,
    };
    Ok(EndResult {
        truth: probe.truth_color,
        estimate,
        outcome,
        score,
        events,
        mu_source,
        p_mu,
        p_tilde,
        nu_end_positions: probe.nu_ends.clone(),
        f_witness: f.witness.as_ref().map(|w| w.positions()),
    })
}

/// Radius of truth scenery needed by the F search and the color law of `S_r`.
fn oracle_radius(cfg: &TrialConfig, params: &ReconstructionParams) -> i64 {
    let reach = params.n as i64 + params.offset_r as i64 * cfg.walk.max_jump().max(1);
    (cfg.b_bound() as i64).max(reach)
}

fn f_report(cfg: &TrialConfig, truth: &Scenery, params: &ReconstructionParams) -> Result<FReport> {
    let max_jump = cfg.f_max_jump.unwrap_or_else(|| cfg.walk.max_jump());
    eval_f(truth, params, cfg.b_bound(), max_jump)
}

/// Reconstructs `scenery(n + 1)` of the i.i.d. scenery keyed by `seed`,
/// knowing its true window on `[-n, n]`.
pub fn run_point_trial(cfg: &TrialConfig, seed: u64) -> Result<EndResult> {
    let source = IidScenery::new(seed);
    let ni = cfg.n as i64;
    let known = source.window(-ni, ni);
    let params = derive_params(cfg.n, cfg.delta, &known, &cfg.profile)?;
    let radius = oracle_radius(cfg, &params);
    let truth = source.window(-radius, radius);
    let truth_color = truth.color(ni + 1)?;
    let f = f_report(cfg, &truth, &params)?;
    let mut probes = [Probe::new(params, known, truth_color, 1)];
    let mut scenery = GrowingScenery::new(source, -radius, radius);
    let pass = run_pass(cfg, seed, &mut scenery, &mut probes);
    finish_probe(cfg, &probes[0], &pass, &truth, &f)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WholeLevel {
    pub n: usize,
    pub right: EndResult,
    pub left: EndResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WholeTrialResult {
    pub seed: u64,
    pub window: Scenery,
    pub truth: Scenery,
    pub equivalent: bool,
    pub complete: bool,
    pub levels: Vec<WholeLevel>,
}

impl WholeTrialResult {
    /// Every level's events for both ends had `B` through `G` true.
    pub fn all_events_hold(&self) -> bool {
        !self.levels.is_empty()
            && self
                .levels
                .iter()
                .all(|l| l.right.events.guarantee_holds() && l.left.events.guarantee_holds())
    }
}

/// Extends the true window `[-n0, n0]` of the scenery keyed by `seed` to
/// `[-target_n, target_n]`, one cell per end per level. Every level observes
/// the same walk.
pub fn run_whole_trial(
    cfg: &TrialConfig,
    n0: usize,
    target_n: usize,
    seed: u64,
) -> Result<WholeTrialResult> {
    if target_n < n0 {
        return Err(Error::InvalidArgument(format!("target_n {target_n} < n0 {n0}")));
    }
    let source = IidScenery::new(seed);
    let mut window = source.window(-(n0 as i64), n0 as i64);
    let mut levels = Vec::new();
    let mut complete = true;
    for n in n0..target_n {
        let level_cfg = TrialConfig { n, ..cfg.clone() };
        let ni = n as i64;
        let right_params = derive_params(n, cfg.delta, &window, &cfg.profile)?;
        let mirrored = window.reflected();
        let left_params = derive_params(n, cfg.delta, &mirrored, &cfg.profile)?;
        let radius = oracle_radius(&level_cfg, &right_params);
        let truth = source.window(-radius, radius);
        let truth_mirrored = truth.reflected();
        let f_right = f_report(&level_cfg, &truth, &right_params)?;
        let f_left = f_report(&level_cfg, &truth_mirrored, &left_params)?;
        let mut probes = [
            Probe::new(right_params, window.clone(), truth.color(ni + 1)?, 1),
            Probe::new(left_params, mirrored, truth.color(-ni - 1)?, -1),
        ];
        let mut scenery = GrowingScenery::new(source, -radius, radius);
        let pass = run_pass(&level_cfg, seed, &mut scenery, &mut probes);
        let right = finish_probe(&level_cfg, &probes[0], &pass, &truth, &f_right)?;
        let left = finish_probe(&level_cfg, &probes[1], &pass, &truth_mirrored, &f_left)?;
        let (Some(l), Some(r)) = (left.estimate, right.estimate) else {
            complete = false;
            levels.push(WholeLevel { n, right, left });
            break;
        };
        window = window.extended(l, r);
        levels.push(WholeLevel { n, right, left });
    }
    let t = target_n as i64;
    let truth_window = source.window(-t, t);
    let equivalent = complete && crate::scenery::equivalent(&window, &truth_window)?;
    Ok(WholeTrialResult {
        seed,
        window,
        truth: truth_window,
        equivalent,
        complete,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    fn small_cfg(eps: f64) -> TrialConfig {
        TrialConfig::new(
            IncrementDistribution::lazy_simple(eps).unwrap(),
            4,
            Ratio::new(1, 64),
            ThresholdProfile {
                horizon_cap: 50_000,
                ..ThresholdProfile::default()
            },
        )
    }

    #[test]
    fn point_trial_is_deterministic() {
        let cfg = small_cfg(0.1);
        let a = run_point_trial(&cfg, 77).unwrap();
        let b = run_point_trial(&cfg, 77).unwrap();
        assert_eq!(a, b);
        assert!(a.events.stops_nu <= a.events.stops_tau);
        assert_eq!(a.mu_source, MuSource::Exact);
    }

    #[test]
    fn trial_accounting() {
        let cfg = small_cfg(0.3);
        for seed in 0..60u64 {
            let r = run_point_trial(&cfg, seed).unwrap();
            assert_eq!(r.nu_end_positions.len() as u64, r.events.stops_nu);
            assert!(r.nu_end_positions.iter().all(|x| x.abs() <= 4));
            assert_eq!(r.outcome == Outcome::NoData, r.events.stops_tau == 0);
            assert!(!r.events.violates_containment());
            assert!(!r.events.violates_stop_coincidence());
            if let Some(score) = &r.score {
                assert_eq!(score.samples, r.events.stops_tau);
            }
        }
    }

    #[test]
    fn whole_trial_shapes() {
        let cfg = small_cfg(0.1);
        let r = run_whole_trial(&cfg, 4, 4, 3).unwrap();
        assert!(r.levels.is_empty());
        assert!(r.equivalent);
        let r = run_whole_trial(&cfg, 4, 6, 3).unwrap();
        if r.complete {
            assert_eq!(r.window.len(), 13);
            assert_eq!(r.levels.len(), 2);
        }
    }
}
