//! One-point reconstruction from i.i.d. observation locations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reconstruct::point::{argmax_lowest, ColorScore};
use crate::scenery::{Color, Scenery};
use crate::walk::StateDistribution;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IidEstimate {
    pub estimate: Color,
    pub score: ColorScore,
    /// `P(Y = b + 1)`.
    pub p_target: f64,
    /// `P(Y not in [a, b + 1])`.
    pub p_escape: f64,
    /// `P(Y = b + 1) > P(Y not in [a, b + 1])`; the estimate is not
    /// guaranteed consistent when false.
    pub condition_holds: bool,
}

/// Estimates `scenery(b + 1)` from colors observed at i.i.d. locations with law `y_law`.
pub fn reconstruct_point_iid(
    a: i64,
    b: i64,
    known: &Scenery,
    y_law: &StateDistribution,
    observations: &[Color],
) -> Result<IidEstimate> {
    if a > b {
        return Err(Error::InvalidArgument(format!("empty interval [{a}, {b}]")));
    }
    if observations.is_empty() {
        return Err(Error::NoData { n: (b - a) as usize, horizon: 0 });
    }
    let p_target = y_law.mass(b + 1);
    let p_escape = y_law.mass_outside(a, b + 1);
    let mut correction = [0.0; 5];
    for x in a..=b {
        correction[known.color(x)?.index()] += y_law.mass(x);
    }
    let mut counts = [0u64; 5];
    for c in observations {
        counts[c.index()] += 1;
    }
    let total = observations.len() as f64;
    let mut p_hat = [0.0; 5];
    let mut q_hat = [0.0; 5];
    for e in 0..5 {
        p_hat[e] = counts[e] as f64 / total;
        q_hat[e] = p_hat[e] - correction[e];
    }
    let estimate = Color::from_index(argmax_lowest(&q_hat));
    Ok(IidEstimate {
        estimate,
        score: ColorScore {
            p_hat,
            correction,
            q_hat,
            samples: observations.len() as u64,
        },
        p_target,
        p_escape,
        condition_holds: p_target > p_escape,
    })
}

/// Two-sided geometric law centred at `center`: mass proportional to `rate^|x - center|`
/// on `[center - reach, center + reach]`.
pub fn two_sided_geometric(center: i64, rate: f64, reach: i64) -> StateDistribution {
    let weights: Vec<f64> = (-reach..=reach).map(|k| rate.powi(k.unsigned_abs() as i32)).collect();
    let z: f64 = weights.iter().sum();
    StateDistribution {
        support_offset: center - reach,
        masses: weights.into_iter().map(|w| w / z).collect(),
    }
}
