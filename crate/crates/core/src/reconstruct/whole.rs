//! Inductive reconstruction of `[-target_n, target_n]` from a seed window.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observe::ObservationStream;
use crate::paths::Delta;
use crate::reconstruct::chain::exact_chain_mu;
use crate::reconstruct::params::{derive_params, ThresholdProfile};
use crate::reconstruct::point::{reconstruct_point, PointEstimate};
use crate::scenery::Scenery;
use crate::walk::IncrementDistribution;

/// Supplies the observations used at each level of the induction.
pub trait ObservationSource {
    /// A stream of at least `len` observations for level `n`.
    fn stream(&mut self, n: usize, len: usize) -> Result<ObservationStream>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WholeStep {
    pub n: usize,
    pub right: PointEstimate,
    pub left: PointEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WholeOutcome {
    pub window: Scenery,
    pub steps: Vec<WholeStep>,
}

/// Estimates `scenery(-n-1)`: the right-end estimate on the mirrored window.
/// The same stream serves both ends since `scenery(S_t) = mirrored(-S_t)` and
/// `-S` has the law of `S`.
pub fn reconstruct_left(
    n: usize,
    known: &Scenery,
    chi: &ObservationStream,
    d: &IncrementDistribution,
    delta: Delta,
    profile: &ThresholdProfile,
) -> Result<PointEstimate> {
    let mirrored = known.reflected();
    let params = derive_params(n, delta, &mirrored, profile)?;
    let mu = exact_chain_mu(&params, &mirrored, d)?.mu;
    reconstruct_point(&params, &mirrored, chi, d, &mu)
}

pub fn reconstruct_right(
    n: usize,
    known: &Scenery,
    chi: &ObservationStream,
    d: &IncrementDistribution,
    delta: Delta,
    profile: &ThresholdProfile,
) -> Result<PointEstimate> {
    let params = derive_params(n, delta, known, profile)?;
    let mu = exact_chain_mu(&params, known, d)?.mu;
    reconstruct_point(&params, known, chi, d, &mu)
}

pub fn reconstruct_whole(
    seed_window: &Scenery,
    n0: usize,
    target_n: usize,
    source: &mut dyn ObservationSource,
    d: &IncrementDistribution,
    delta: Delta,
    profile: &ThresholdProfile,
) -> Result<WholeOutcome> {
    if target_n < n0 {
        return Err(Error::InvalidArgument(format!(
            "target_n {target_n} is below n0 {n0}"
        )));
    }
    let mut window = seed_window.restrict(-(n0 as i64), n0 as i64)?;
    let mut steps = Vec::with_capacity(target_n - n0);
    for n in n0..target_n {
        let params = derive_params(n, delta, &window, profile)?;
        let len = params.horizon_t as usize + params.offset_r + 1;
        let chi = source.stream(n, len)?;
        let right = reconstruct_right(n, &window, &chi, d, delta, profile)?;
        let left = reconstruct_left(n, &window, &chi, d, delta, profile)?;
        window = window.extended(left.estimate, right.estimate);
        steps.push(WholeStep { n, right, left });
    }
    Ok(WholeOutcome { window, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observe::observe;
    use crate::scenery::IidScenery;
    use crate::walk::simulate;
    use num_rational::Ratio;

    struct Fixed {
        truth: Scenery,
        d: IncrementDistribution,
        seed: u64,
    }

    impl ObservationSource for Fixed {
        fn stream(&mut self, n: usize, len: usize) -> Result<ObservationStream> {
            let run = simulate(&self.d, 0, len, self.seed + n as u64);
            observe(&self.truth, &run)
        }
    }

    fn profile() -> ThresholdProfile {
        ThresholdProfile {
            horizon_cap: 20_000,
            ..ThresholdProfile::default()
        }
    }

    #[test]
    fn zero_length_loop_returns_seed_window() {
        let truth = IidScenery::new(5).window(-40_000, 40_000);
        let d = IncrementDistribution::lazy_simple(0.1).unwrap();
        let mut src = Fixed { truth: truth.clone(), d: d.clone(), seed: 1 };
        let out = reconstruct_whole(&truth, 6, 6, &mut src, &d, Ratio::new(1, 64), &profile()).unwrap();
        assert_eq!(out.window, truth.restrict(-6, 6).unwrap());
        assert!(out.steps.is_empty());
    }

    #[test]
    fn one_step_matches_point_reconstruction() {
        let truth = IidScenery::new(6).window(-40_000, 40_000);
        let d = IncrementDistribution::lazy_simple(0.1).unwrap();
        let delta = Ratio::new(1, 64);
        let mut src = Fixed { truth: truth.clone(), d: d.clone(), seed: 9 };
        let out = match reconstruct_whole(&truth, 4, 5, &mut src, &d, delta, &profile()) {
            Ok(o) => o,
            Err(Error::NoData { .. }) => return,
            Err(e) => panic!("{e}"),
        };
        let known = truth.restrict(-4, 4).unwrap();
        let params = derive_params(4, delta, &known, &profile()).unwrap();
        let chi = src.stream(4, params.horizon_t as usize + params.offset_r + 1).unwrap();
        let right = reconstruct_right(4, &known, &chi, &d, delta, &profile()).unwrap();
        assert_eq!(out.steps[0].right, right);
        assert_eq!(out.window.get(5), Some(right.estimate));
        assert_eq!(out.window.len(), 11);
    }

    #[test]
    fn mirror_symmetry() {
        let truth = IidScenery::new(7).window(-40_000, 40_000);
        let d = IncrementDistribution::lazy_simple(0.1).unwrap();
        let delta = Ratio::new(1, 64);
        let known = truth.restrict(-4, 4).unwrap();
        let run = simulate(&d, 0, 20_100, 3);
        let chi = observe(&truth, &run).unwrap();
        let mirrored_truth = truth.reflected();
        let chi_m = observe(&mirrored_truth, &run.reflected()).unwrap();
        assert_eq!(chi, chi_m);
        let left = reconstruct_left(4, &known, &chi, &d, delta, &profile());
        let right_on_mirror = reconstruct_right(4, &known.reflected(), &chi_m, &d, delta, &profile());
        match (left, right_on_mirror) {
            (Ok(a), Ok(b)) => assert_eq!(a, b),
            (Err(Error::NoData { .. }), Err(Error::NoData { .. })) => {}
            (a, b) => panic!("{a:?} vs {b:?}"),
        }
    }
}
