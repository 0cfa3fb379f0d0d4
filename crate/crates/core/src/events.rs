//! Oracle evaluation of the events behind the one-point guarantee.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observe::StopTimes;
use crate::paths::{budget_floor, within_budget, Delta, PathFunction};
use crate::reconstruct::params::{ReconstructionParams, ThresholdProfile};
use crate::scenery::ColorSource;
use crate::walk::{IncrementDistribution, WalkRun};

/// Largest DP table accepted by [`eval_f`].
pub const MAX_F_STATES: u64 = 400_000_000;

/// Event outcomes of one trial. `a` is `None` when no reconstruction ran,
/// `g` and `margin` are `None` when the margin is unavailable or not positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventReport {
    pub a: Option<bool>,
    pub b: bool,
    pub c: bool,
    pub d: bool,
    pub f: bool,
    pub g: Option<bool>,
    pub margin: Option<f64>,
    pub stops_tau: u64,
    pub stops_nu: u64,
    /// Every pattern stop up to the horizon was also an oracle stop.
    pub tau_equals_nu: bool,
}

impl EventReport {
    /// `B, C, D, F, G` all hold and the margin is positive.
    pub fn guarantee_holds(&self) -> bool {
        self.b && self.c && self.d && self.f && self.g == Some(true) && self.margin.is_some_and(|m| m > 0.0)
    }

    /// A counterexample to the containment of `B C D F G` in `A`.
    pub fn violates_containment(&self) -> bool {
        self.guarantee_holds() && self.a == Some(false)
    }

    /// `B, D, F` hold but some pattern stop was not an oracle stop.
    pub fn violates_stop_coincidence(&self) -> bool {
        self.b && self.d && self.f && !self.tau_equals_nu
    }
}

pub fn eval_b(run: &WalkRun, bound: u64) -> bool {
    run.positions.iter().all(|x| x.unsigned_abs() <= bound)
}

pub fn eval_c(nu: &StopTimes, n: usize, threshold_base: f64) -> bool {
    eval_c_count(nu.len() as u64, n, threshold_base)
}

pub fn eval_c_count(count: u64, n: usize, threshold_base: f64) -> bool {
    count as f64 >= threshold_base.powi(n as i32)
}

/// Running check that every length-`n` piece of a path is a δ-path.
#[derive(Clone, Debug)]
pub struct WindowTracker {
    n: usize,
    delta: Delta,
    ring: Vec<i64>,
    filled: usize,
    head: usize,
    count: u64,
    variation: u64,
    max_count: u64,
    max_variation: u64,
    failures: u64,
    windows: u64,
}

impl WindowTracker {
    pub fn new(n: usize, delta: Delta) -> Self {
        assert!(n >= 1, "window length must be positive");
        let cap = budget_floor(delta, n);
        WindowTracker {
            n,
            delta,
            ring: vec![1; n],
            filled: 0,
            head: 0,
            count: 0,
            variation: 0,
            max_count: cap,
            max_variation: cap,
            failures: 0,
            windows: 0,
        }
    }

    /// Feeds one step; returns whether the window ending here (if complete) is a δ-path.
    #[inline]
    pub fn push(&mut self, step: i64) -> Option<bool> {
        let old = self.ring[self.head];
        if self.filled == self.n && old.abs() != 1 {
            self.count -= 1;
            self.variation -= old.unsigned_abs();
        }
        if step.abs() != 1 {
            self.count += 1;
            self.variation += step.unsigned_abs();
        }
        self.ring[self.head] = step;
        self.head = (self.head + 1) % self.n;
        if self.filled < self.n {
            self.filled += 1;
            if self.filled < self.n {
                return None;
            }
        }
        let ok = self.count <= self.max_count && self.variation <= self.max_variation;
        self.windows += 1;
        if !ok {
            self.failures += 1;
        }
        Some(ok)
    }

    pub fn failures(&self) -> u64 {
        self.failures
    }

    pub fn windows(&self) -> u64 {
        self.windows
    }

    pub fn all_passed(&self) -> bool {
        self.failures == 0
    }

    pub fn delta(&self) -> Delta {
        self.delta
    }
}

/// Every window `[s - n, s]` of the run is a δ-path.
pub fn eval_d(run: &WalkRun, n: usize, delta: Delta) -> bool {
    let mut tracker = WindowTracker::new(n, delta);
    for w in run.positions.windows(2) {
        tracker.push(w[1] - w[0]);
    }
    tracker.all_passed()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FReport {
    pub holds: bool,
    /// A δ-path generating the pattern that ends outside `J` or leaves `I`.
    pub witness: Option<PathFunction>,
}

/// Decides whether some δ-path inside `[-search_bound, search_bound]` reads
/// the pattern and either ends outside `J` or leaves `I`.
///
/// Dynamic program over (step, position, non-unit count, non-unit variation,
/// left-I flag), with the pattern imposed cell by cell.
pub fn eval_f<S: ColorSource + ?Sized>(
    scenery: &S,
    params: &ReconstructionParams,
    search_bound: u64,
    max_jump: i64,
) -> Result<FReport> {
    let n = params.n;
    let w = params.pattern_w.colors();
    let sb = search_bound as i64;
    let cap = budget_floor(params.delta, n) as usize;
    // a single jump larger than the variation budget is never allowed
    let jump = max_jump.max(1).min(cap.max(1) as i64);
    let width = (2 * sb + 1) as usize;
    let per_layer = width * (cap + 1) * (cap + 1) * 2;
    let total = per_layer as u64 * (n as u64 + 1);
    if total > MAX_F_STATES {
        return Err(Error::BudgetExceeded(format!(
            "F-event table would hold {total} states"
        )));
    }
    let mut colors = Vec::with_capacity(width);
    for x in -sb..=sb {
        colors.push(
            scenery
                .color_at(x)
                .ok_or_else(|| Error::InvalidArgument(format!("scenery unknown at {x}")))?,
        );
    }
    let idx = |x: i64, c: usize, v: usize, out: usize| -> usize {
        ((((x + sb) as usize * (cap + 1) + c) * (cap + 1) + v) << 1) | out
    };
    let interval_i = params.interval_i;
    let mut layers: Vec<Vec<bool>> = Vec::with_capacity(n + 1);
    let mut first = vec![false; per_layer];
    for x in -sb..=sb {
        if colors[(x + sb) as usize] == w[0] {
            first[idx(x, 0, 0, (!interval_i.contains(x)) as usize)] = true;
        }
    }
    layers.push(first);
    let steps: Vec<i64> = (-jump..=jump).collect();
    for j in 1..=n {
        let prev = &layers[j - 1];
        let mut next = vec![false; per_layer];
        let target = w[j];
        for x in -sb..=sb {
            for c in 0..=cap {
                for v in 0..=cap {
                    for out in 0..2 {
                        if !prev[idx(x, c, v, out)] {
                            continue;
                        }
                        for &s in &steps {
                            let y = x + s;
                            if y < -sb || y > sb || colors[(y + sb) as usize] != target {
                                continue;
                            }
                            let (c2, v2) = if s.abs() == 1 {
                                (c, v)
                            } else {
                                (c + 1, v + s.unsigned_abs() as usize)
                            };
                            if c2 > cap || v2 > cap {
                                continue;
                            }
                            let out2 = out | (!interval_i.contains(y)) as usize;
                            next[idx(y, c2, v2, out2)] = true;
                        }
                    }
                }
            }
        }
        layers.push(next);
    }
    let last = &layers[n];
    let mut bad = None;
    'search: for x in -sb..=sb {
        for c in 0..=cap {
            for v in 0..=cap {
                for out in 0..2 {
                    if last[idx(x, c, v, out)] && (out == 1 || !params.interval_j.contains(x)) {
                        bad = Some((x, c, v, out));
                        break 'search;
                    }
                }
            }
        }
    }
    let Some(mut state) = bad else {
        return Ok(FReport {
            holds: true,
            witness: None,
        });
    };
    // walk the layers backwards to recover one offending path
    let mut positions = vec![state.0];
    for j in (1..=n).rev() {
        let (y, c2, v2, out2) = state;
        let prev = &layers[j - 1];
        let mut found = None;
        'pred: for &s in &steps {
            let x = y - s;
            if x < -sb || x > sb {
                continue;
            }
            let (c, v) = if s.abs() == 1 {
                (Some(c2), Some(v2))
            } else {
                (c2.checked_sub(1), v2.checked_sub(s.unsigned_abs() as usize))
            };
            let (Some(c), Some(v)) = (c, v) else { continue };
            let outs: &[usize] = if out2 == 1 && interval_i.contains(y) {
                &[1]
            } else if out2 == 1 {
                &[0, 1]
            } else {
                &[0]
            };
            for &out in outs {
                if prev[idx(x, c, v, out)] {
                    found = Some((x, c, v, out));
                    break 'pred;
                }
            }
        }
        state = found.expect("reachable state has a predecessor");
        positions.push(state.0);
    }
    positions.reverse();
    Ok(FReport {
        holds: false,
        witness: Some(PathFunction::from_positions(&positions)),
    })
}

/// `max_e |p_tilde - p_mu| < margin`; `None` when the margin is not positive.
pub fn eval_g(p_tilde: &[f64; 5], p_mu: &[f64; 5], margin: f64) -> Option<bool> {
    if !(margin > 0.0) {
        return None;
    }
    Some(max_deviation(p_tilde, p_mu) < margin)
}

pub fn max_deviation(a: &[f64; 5], b: &[f64; 5]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `sigma^2 (t_base / b_base)^{2n}`.
pub fn b_envelope(d: &IncrementDistribution, profile: &ThresholdProfile, n: usize) -> f64 {
    d.variance() * (profile.t_base / profile.b_base).powi(2 * n as i32)
}

/// `(eps (1 + e^{-2c} / (1 - e^{-c})))^n + eps^n`, the closed form at `s -> 0`.
pub fn d_window_envelope(epsilon: f64, decay_c: f64, n: usize) -> f64 {
    let q = (-2.0 * decay_c).exp() / (1.0 - (-decay_c).exp());
    (epsilon * (1.0 + q)).powi(n as i32) + epsilon.powi(n as i32)
}

/// Chernoff bound on one window failing, with the full moment generating
/// functions of the jump size and jump indicator, optimized over `s` on a grid.
pub fn d_window_chernoff(d: &IncrementDistribution, n: usize, delta: Delta) -> f64 {
    let a = (budget_floor(delta, n) + 1) as f64;
    let law = d.jump_law();
    let p_unit = 2.0 * law.get(1).copied().unwrap_or(0.0);
    let eps = 1.0 - p_unit;
    let cmax = d.decay_c().unwrap_or(50.0);
    let mut best_x = 1.0f64;
    let mut best_y = 1.0f64;
    for k in 1..=4000 {
        let s = k as f64 * 0.001 * cmax.max(1.0);
        // jump size: X = |step| on non-unit steps, zero otherwise
        let mut mgf_x = p_unit + law[0];
        for (j, p) in law.iter().enumerate().skip(2) {
            mgf_x += 2.0 * p * (s * j as f64).exp();
        }
        let bx = (n as f64 * mgf_x.ln() - s * a).exp();
        let by = (n as f64 * (1.0 - eps + eps * s.exp()).ln() - s * a).exp();
        best_x = best_x.min(bx);
        best_y = best_y.min(by);
    }
    (best_x + best_y).min(1.0)
}

/// Whether every completed window of `run` of length `n` passes, also
/// reporting the failure count.
pub fn window_failures(run: &WalkRun, n: usize, delta: Delta) -> (u64, u64) {
    let mut tracker = WindowTracker::new(n, delta);
    for w in run.positions.windows(2) {
        tracker.push(w[1] - w[0]);
    }
    (tracker.failures(), tracker.windows())
}

/// Exact check used by tests: `x <= δ n`.
pub fn is_within(x: u64, delta: Delta, n: usize) -> bool {
    within_budget(x, delta, n)
}
