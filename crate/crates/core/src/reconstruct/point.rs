//! One-point reconstruction from pattern stops.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::observe::{pattern_stops, ObservationStream};
use crate::reconstruct::chain::StationaryDistribution;
use crate::reconstruct::params::ReconstructionParams;
use crate::scenery::{Color, ColorSource, Scenery};
use crate::walk::{evolve, IncrementDistribution, StateDistribution};

/// Per-color scores; index `i` is color `i + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColorScore {
    pub p_hat: [f64; 5],
    pub correction: [f64; 5],
    pub q_hat: [f64; 5],
    pub samples: u64,
}

impl ColorScore {
    /// Argmax of `q_hat`, lowest color on ties.
    pub fn best(&self) -> Color {
        Color::from_index(argmax_lowest(&self.q_hat))
    }
}

pub fn argmax_lowest(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate().skip(1) {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Law of `S_r` started from `mu`, without confinement.
pub fn evolved_law(
    mu: &StationaryDistribution,
    d: &IncrementDistribution,
    r: usize,
) -> StateDistribution {
    evolve(&mu.as_state_distribution(), &d.support(), r, None)
}

/// `P_mu(scenery(S_r) = e, S_r in interval)` for each color.
pub fn corrections(
    law_r: &StateDistribution,
    known: &Scenery,
    interval: Interval,
) -> Result<[f64; 5]> {
    let mut out = [0.0; 5];
    for x in interval.iter() {
        out[known.color(x)?.index()] += law_r.mass(x);
    }
    Ok(out)
}

/// `P_mu(scenery(S_r) = e)` over the whole support of the law.
pub fn color_law<S: ColorSource + ?Sized>(law_r: &StateDistribution, scenery: &S) -> Result<[f64; 5]> {
    let mut out = [0.0; 5];
    for (x, m) in law_r.iter() {
        if *m == 0.0 {
            continue;
        }
        let c = scenery.color_at(x).ok_or_else(|| {
            Error::InvalidArgument(format!("scenery unknown at {x}"))
        })?;
        out[c.index()] += m;
    }
    Ok(out)
}

/// `(P_mu(S_r = n + 1) - P_mu(S_r not in [-n, n + 1])) / 2`.
pub fn margin_from_law(law_r: &StateDistribution, n: usize) -> f64 {
    let n = n as i64;
    (law_r.mass(n + 1) - law_r.mass_outside(-n, n + 1)) / 2.0
}

pub fn margin(mu: &StationaryDistribution, d: &IncrementDistribution, n: usize, r: usize) -> f64 {
    margin_from_law(&evolved_law(mu, d, r), n)
}

/// Turns per-color tallies into scores.
pub fn score_from_counts(counts: &[u64; 5], correction: [f64; 5], n: usize, horizon: u64) -> Result<ColorScore> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::NoData { n, horizon });
    }
    let mut p_hat = [0.0; 5];
    let mut q_hat = [0.0; 5];
    for e in 0..5 {
        p_hat[e] = counts[e] as f64 / total as f64;
        q_hat[e] = p_hat[e] - correction[e];
    }
    Ok(ColorScore {
        p_hat,
        correction,
        q_hat,
        samples: total,
    })
}

/// Tallies `chi[tau + r]` over pattern stops `tau <= horizon`.
pub fn offset_counts(chi: &ObservationStream, params: &ReconstructionParams) -> [u64; 5] {
    let stops = pattern_stops(chi, &params.pattern_w, params.horizon_t as usize);
    let mut counts = [0u64; 5];
    for t in stops.times {
        if let Some(c) = chi.colors.get(t as usize + params.offset_r) {
            counts[c.index()] += 1;
        }
    }
    counts
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointEstimate {
    pub estimate: Color,
    pub score: ColorScore,
    pub margin: f64,
}

/// Estimates `scenery(n + 1)` from `chi`, the known window on `[-n, n]` and `mu`.
pub fn reconstruct_point(
    params: &ReconstructionParams,
    known: &Scenery,
    chi: &ObservationStream,
    d: &IncrementDistribution,
    mu: &StationaryDistribution,
) -> Result<PointEstimate> {
    let law = evolved_law(mu, d, params.offset_r);
    let corr = corrections(&law, known, params.interval_i)?;
    let counts = offset_counts(chi, params);
    let score = score_from_counts(&counts, corr, params.n, params.horizon_t)?;
    Ok(PointEstimate {
        estimate: score.best(),
        score,
        margin: margin_from_law(&law, params.n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example_margin() {
        let mu = StationaryDistribution::from_points(Interval::symmetric(4), &[(1, 0.5), (3, 0.5)]).unwrap();
        let d = IncrementDistribution::lazy_simple(0.0).unwrap();
        let law = evolved_law(&mu, &d, 4);
        assert!((law.mass(5) - 5.0 / 32.0).abs() < 1e-12);
        assert!((law.mass_outside(-4, 5) - 1.0 / 32.0).abs() < 1e-12);
        assert!((margin(&mu, &d, 4, 4) - 1.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn tie_break_is_lowest_color() {
        assert_eq!(argmax_lowest(&[0.1, 0.3, 0.3, 0.2, 0.0]), 1);
        assert_eq!(argmax_lowest(&[0.0; 5]), 0);
    }

    #[test]
    fn shifting_scores_keeps_argmax() {
        let counts = [3, 9, 1, 4, 4];
        let corr = [0.01, 0.2, 0.0, 0.05, 0.1];
        let s = score_from_counts(&counts, corr, 3, 10).unwrap();
        let shifted: Vec<f64> = s.q_hat.iter().map(|q| q + 7.5).collect();
        assert_eq!(argmax_lowest(&shifted), argmax_lowest(&s.q_hat));
        assert!((s.p_hat.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn no_stops_is_no_data() {
        assert!(matches!(
            score_from_counts(&[0; 5], [0.0; 5], 4, 100),
            Err(Error::NoData { n: 4, horizon: 100 })
        ));
    }
}
