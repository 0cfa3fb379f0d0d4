//! Increment distributions, walk simulation and exact state distributions.

use std::ops::{AddAssign, Mul};

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Condition, Error, Result};
use crate::interval::Interval;
use crate::seed::walk_rng;

/// Default largest representable jump for tailed families.
pub const DEFAULT_TRUNCATION_BOUND: usize = 64;

const MASS_TOL: f64 = 1e-12;

/// Which family an [`IncrementDistribution`] was built from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WalkFamily {
    LazySimple {
        epsilon: f64,
    },
    GeometricTail {
        epsilon: f64,
        decay_c: f64,
        p_zero_frac: f64,
        truncation_bound: usize,
    },
}

/// Law of one step `S_{t+1} - S_t`, stored on `[-bound, bound]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncrementDistribution {
    family: WalkFamily,
    epsilon: f64,
    /// `None` for families without non-unit jumps beyond 0.
    decay_c: Option<f64>,
    bound: usize,
    masses: Vec<f64>,
}

/// Outcome of the five structural checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub total_mass: f64,
    pub nonunit_mass: f64,
    pub mass_one: bool,
    pub nonunit_equals_epsilon: bool,
    /// Largest `P(|step| = i | |step| != 1) / exp(-c i)` over `i`.
    pub worst_tail_ratio: f64,
    pub tail_decay: bool,
    pub symmetric: bool,
    pub positive_zero: bool,
}

impl ConditionReport {
    pub fn all_hold(&self) -> bool {
        self.mass_one
            && self.nonunit_equals_epsilon
            && self.tail_decay
            && self.symmetric
            && self.positive_zero
    }

    /// First failing condition, if any.
    pub fn first_violation(&self) -> Option<Condition> {
        if !self.mass_one {
            Some(Condition::TotalMass)
        } else if !self.nonunit_equals_epsilon {
            Some(Condition::NonUnitMass)
        } else if !self.tail_decay {
            Some(Condition::TailDecay)
        } else if !self.symmetric {
            Some(Condition::Symmetry)
        } else if !self.positive_zero {
            Some(Condition::Aperiodicity)
        } else {
            None
        }
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in [0, 1), got {epsilon}"
        )));
    }
    Ok(())
}

/// `sum_{i=2}^{bound} exp(-c i)`.
fn tail_weight(decay_c: f64, bound: usize) -> f64 {
    (2..=bound).map(|i| (-decay_c * i as f64).exp()).sum()
}

impl IncrementDistribution {
    /// Mass `epsilon` at 0 and `(1 - epsilon) / 2` at each of `+1` and `-1`.
    pub fn lazy_simple(epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let gamma = (1.0 - epsilon) / 2.0;
        Ok(IncrementDistribution {
            family: WalkFamily::LazySimple { epsilon },
            epsilon,
            decay_c: None,
            bound: 1,
            masses: vec![gamma, epsilon, gamma],
        })
    }

    /// Smallest zero-step share of the non-unit mass compatible with the
    /// exponential tail requirement: `1 - sum_{i>=2} exp(-c i)`, floored at 0.
    pub fn min_feasible_p_zero_frac(decay_c: f64, truncation_bound: usize) -> f64 {
        (1.0 - tail_weight(decay_c, truncation_bound)).max(0.0)
    }

    /// Non-unit mass `epsilon` split between 0 (share `p_zero_frac`) and a
    /// symmetric geometric tail with ratio `exp(-c)` on `2 <= |i| <= truncation_bound`.
    pub fn geometric_tail(
        epsilon: f64,
        decay_c: f64,
        p_zero_frac: f64,
        truncation_bound: usize,
    ) -> Result<Self> {
        check_epsilon(epsilon)?;
        if !(decay_c > 0.0 && decay_c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "decay rate must be positive, got {decay_c}"
            )));
        }
        if !(0.0..=1.0).contains(&p_zero_frac) {
            return Err(Error::InvalidArgument(format!(
                "p_zero_frac must lie in [0, 1], got {p_zero_frac}"
            )));
        }
        if truncation_bound < 2 && p_zero_frac < 1.0 {
            return Err(Error::InvalidArgument(
                "truncation bound must be at least 2 when the tail carries mass".into(),
            ));
        }
        let bound = truncation_bound.max(1);
        let mut masses = vec![0.0; 2 * bound + 1];
        let gamma = (1.0 - epsilon) / 2.0;
        masses[bound] = epsilon * p_zero_frac;
        masses[bound - 1] = gamma;
        masses[bound + 1] = gamma;
        let tail_mass = epsilon * (1.0 - p_zero_frac);
        if tail_mass > 0.0 {
            let z = tail_weight(decay_c, bound);
            for i in 2..=bound {
                let m = tail_mass * (-decay_c * i as f64).exp() / (2.0 * z);
                masses[bound + i] = m;
                masses[bound - i] = m;
            }
        }
        let d = IncrementDistribution {
            family: WalkFamily::GeometricTail {
                epsilon,
                decay_c,
                p_zero_frac,
                truncation_bound,
            },
            epsilon,
            decay_c: Some(decay_c),
            bound,
            masses,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn from_family(family: &WalkFamily) -> Result<Self> {
        match *family {
            WalkFamily::LazySimple { epsilon } => Self::lazy_simple(epsilon),
            WalkFamily::GeometricTail {
                epsilon,
                decay_c,
                p_zero_frac,
                truncation_bound,
            } => Self::geometric_tail(epsilon, decay_c, p_zero_frac, truncation_bound),
        }
    }

    pub fn family(&self) -> &WalkFamily {
        &self.family
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn decay_c(&self) -> Option<f64> {
        self.decay_c
    }

    pub fn truncation_bound(&self) -> usize {
        self.bound
    }

    pub fn mass(&self, step: i64) -> f64 {
        if step.unsigned_abs() as usize > self.bound {
            return 0.0;
        }
        self.masses[(step + self.bound as i64) as usize]
    }

    pub fn p_zero(&self) -> f64 {
        self.mass(0)
    }

    /// `jump_law()[i] = P(step = +i) = P(step = -i)`.
    pub fn jump_law(&self) -> Vec<f64> {
        (0..=self.bound as i64).map(|i| self.mass(i)).collect()
    }

    /// Steps with positive mass, ascending.
    pub fn support(&self) -> Vec<(i64, f64)> {
        (-(self.bound as i64)..=self.bound as i64)
            .map(|j| (j, self.mass(j)))
            .filter(|&(_, p)| p > 0.0)
            .collect()
    }

    pub fn max_jump(&self) -> i64 {
        self.support().iter().map(|(j, _)| j.abs()).max().unwrap_or(0)
    }

    pub fn variance(&self) -> f64 {
        self.support().iter().map(|&(j, p)| (j * j) as f64 * p).sum()
    }

    /// Tail mass lost to truncation, at most `exp(-c bound) / (1 - exp(-c))`.
    pub fn truncation_error_bound(&self) -> f64 {
        match self.decay_c {
            Some(c) => (-c * self.bound as f64).exp() / (1.0 - (-c).exp()),
            None => 0.0,
        }
    }

    pub fn check_conditions(&self) -> ConditionReport {
        let total_mass: f64 = self.masses.iter().sum();
        let nonunit_mass = total_mass - self.mass(1) - self.mass(-1);
        let mut worst = 0.0f64;
        if nonunit_mass > 0.0 {
            for i in 0..=self.bound as i64 {
                if i == 1 {
                    continue;
                }
                let abs_mass = if i == 0 {
                    self.mass(0)
                } else {
                    self.mass(i) + self.mass(-i)
                };
                if abs_mass == 0.0 {
                    continue;
                }
                let conditional = abs_mass / nonunit_mass;
                let cap = match (i, self.decay_c) {
                    (0, _) => 1.0,
                    (_, Some(c)) => (-c * i as f64).exp(),
                    (_, None) => 0.0,
                };
                let ratio = if cap > 0.0 { conditional / cap } else { f64::INFINITY };
                worst = worst.max(ratio);
            }
        }
        let symmetric = (1..=self.bound as i64).all(|j| self.mass(j) == self.mass(-j));
        ConditionReport {
            total_mass,
            nonunit_mass,
            mass_one: (total_mass - 1.0).abs() <= MASS_TOL,
            nonunit_equals_epsilon: (nonunit_mass - self.epsilon).abs() <= MASS_TOL,
            worst_tail_ratio: worst,
            tail_decay: worst <= 1.0 + 1e-12,
            symmetric,
            positive_zero: self.mass(0) > 0.0,
        }
    }

    /// Errors with the first violated condition. The aperiodicity condition
    /// is not enforced here: `lazy_simple(0)` is the simple walk, which is a
    /// legitimate (periodic) input to the exact computations.
    pub fn validate(&self) -> Result<()> {
        let report = self.check_conditions();
        match report.first_violation() {
            None | Some(Condition::Aperiodicity) => Ok(()),
            Some(condition) => Err(Error::InvalidDistribution {
                condition,
                detail: format!("{report:?}"),
            }),
        }
    }

    pub fn sampler(&self) -> StepSampler {
        let mut support = self.support();
        // most likely steps first keeps the scan short
        support.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let total: f64 = support.iter().map(|s| s.1).sum();
        let mut acc = 0.0;
        let mut thresholds = Vec::with_capacity(support.len());
        for &(_, p) in &support {
            acc += p / total;
            thresholds.push(if acc >= 1.0 { u64::MAX } else { (acc * 2f64.powi(64)) as u64 });
        }
        *thresholds.last_mut().expect("nonempty support") = u64::MAX;
        StepSampler {
            steps: support.iter().map(|s| s.0).collect(),
            thresholds,
        }
    }
}

/// Draws increments from an [`IncrementDistribution`] by inversion of one
/// 64-bit word.
#[derive(Clone, Debug)]
pub struct StepSampler {
    steps: Vec<i64>,
    thresholds: Vec<u64>,
}

impl StepSampler {
    #[inline]
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> i64 {
        let u = rng.next_u64();
        for (i, &t) in self.thresholds.iter().enumerate() {
            if u < t {
                return self.steps[i];
            }
        }
        self.steps[self.steps.len() - 1]
    }
}

/// A walk being generated step by step.
#[derive(Clone, Debug)]
pub struct Walker {
    position: i64,
    sampler: StepSampler,
    rng: ChaCha8Rng,
}

impl Walker {
    pub fn new(d: &IncrementDistribution, start: i64, seed: u64) -> Self {
        Walker {
            position: start,
            sampler: d.sampler(),
            rng: walk_rng(seed),
        }
    }

    pub fn position(&self) -> i64 {
        self.position
    }

    #[inline]
    pub fn advance(&mut self) -> i64 {
        self.position += self.sampler.sample(&mut self.rng);
        self.position
    }
}

/// One simulated trajectory `S_0, ..., S_horizon`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkRun {
    pub seed: u64,
    pub positions: Vec<i64>,
}

impl WalkRun {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.positions.len() - 1
    }

    /// The path negated, `t -> -S_t`.
    pub fn reflected(&self) -> WalkRun {
        WalkRun {
            seed: self.seed,
            positions: self.positions.iter().map(|x| -x).collect(),
        }
    }
}

pub fn simulate(d: &IncrementDistribution, start: i64, horizon: usize, seed: u64) -> WalkRun {
    let mut walker = Walker::new(d, start, seed);
    let mut positions = Vec::with_capacity(horizon + 1);
    positions.push(start);
    for _ in 0..horizon {
        positions.push(walker.advance());
    }
    WalkRun { seed, positions }
}

/// Streaming form of [`simulate_excursion_compressed`].
pub struct CompressedWalker {
    interval: Interval,
    inner: Walker,
}

impl CompressedWalker {
    pub fn new(d: &IncrementDistribution, interval: Interval, start: i64, seed: u64) -> Result<Self> {
        if d.max_jump() > 1 {
            return Err(Error::InvalidArgument(
                "excursion compression needs a nearest-neighbour increment law".into(),
            ));
        }
        if !interval.contains(start) {
            return Err(Error::InvalidArgument(format!(
                "start {start} outside {interval}"
            )));
        }
        Ok(CompressedWalker {
            interval,
            inner: Walker::new(d, start, seed),
        })
    }

    pub fn position(&self) -> i64 {
        self.inner.position
    }

    #[inline]
    pub fn advance(&mut self) -> i64 {
        let x = self.inner.position;
        if x < self.interval.lo {
            self.inner.position = self.interval.lo;
            self.inner.position
        } else if x > self.interval.hi {
            self.inner.position = self.interval.hi;
            self.inner.position
        } else {
            self.inner.advance()
        }
    }
}

/// Simulates a nearest-neighbour walk with every excursion outside `interval`
/// shortened to a single step outside. The walk must return through the cell
/// it left from, so the sequence of visits to `interval` (and hence every
/// quantity computed from confined pattern occurrences) has the same law as
/// for the uncompressed walk.
pub fn simulate_excursion_compressed(
    d: &IncrementDistribution,
    interval: Interval,
    start: i64,
    horizon: usize,
    seed: u64,
) -> Result<WalkRun> {
    let mut walker = CompressedWalker::new(d, interval, start, seed)?;
    let mut positions = Vec::with_capacity(horizon + 1);
    positions.push(start);
    for _ in 0..horizon {
        positions.push(walker.advance());
    }
    Ok(WalkRun { seed, positions })
}

/// A (possibly sub-stochastic) mass vector on `[support_offset, support_offset + len)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateDistribution<T = f64> {
    pub support_offset: i64,
    pub masses: Vec<T>,
}

impl<T: Clone + Zero + AddAssign> StateDistribution<T> {
    pub fn from_points(points: &[(i64, T)]) -> Self {
        let lo = points.iter().map(|p| p.0).min().unwrap_or(0);
        let hi = points.iter().map(|p| p.0).max().unwrap_or(0);
        let mut masses = vec![T::zero(); (hi - lo + 1) as usize];
        for (x, m) in points {
            masses[(x - lo) as usize] += m.clone();
        }
        StateDistribution {
            support_offset: lo,
            masses,
        }
    }

    pub fn lo(&self) -> i64 {
        self.support_offset
    }

    pub fn hi(&self) -> i64 {
        self.support_offset + self.masses.len() as i64 - 1
    }

    pub fn mass(&self, x: i64) -> T {
        if x < self.support_offset {
            return T::zero();
        }
        self.masses
            .get((x - self.support_offset) as usize)
            .cloned()
            .unwrap_or_else(T::zero)
    }

    pub fn total(&self) -> T {
        let mut s = T::zero();
        for m in &self.masses {
            s += m.clone();
        }
        s
    }

    /// Mass on `[a, b]`.
    pub fn mass_in(&self, a: i64, b: i64) -> T {
        let mut s = T::zero();
        for x in a.max(self.lo())..=b.min(self.hi()) {
            s += self.mass(x);
        }
        s
    }

    /// Mass outside `[a, b]`, summed directly.
    pub fn mass_outside(&self, a: i64, b: i64) -> T {
        let mut s = T::zero();
        for (i, m) in self.masses.iter().enumerate() {
            let x = self.support_offset + i as i64;
            if x < a || x > b {
                s += m.clone();
            }
        }
        s
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &T)> {
        let off = self.support_offset;
        self.masses.iter().enumerate().map(move |(i, m)| (off + i as i64, m))
    }
}

impl<T: Clone + Zero + One + AddAssign> StateDistribution<T> {
    pub fn point(x: i64) -> Self {
        StateDistribution {
            support_offset: x,
            masses: vec![T::one()],
        }
    }
}

/// `t` steps of the forward equation with step law `kernel`, killing mass
/// that leaves `confine` when given.
pub fn evolve<T>(
    start: &StateDistribution<T>,
    kernel: &[(i64, T)],
    t: usize,
    confine: Option<Interval>,
) -> StateDistribution<T>
where
    T: Clone + Zero + AddAssign + Mul<Output = T>,
{
    let reach = kernel.iter().map(|(j, _)| j.abs()).max().unwrap_or(0);
    let mut cur = start.clone();
    for _ in 0..t {
        if cur.masses.is_empty() {
            break;
        }
        let mut lo = cur.lo() - reach;
        let mut hi = cur.hi() + reach;
        if let Some(c) = confine {
            lo = lo.max(c.lo);
            hi = hi.min(c.hi);
        }
        if lo > hi {
            return StateDistribution {
                support_offset: cur.support_offset,
                masses: Vec::new(),
            };
        }
        let mut next = vec![T::zero(); (hi - lo + 1) as usize];
        for (i, m) in cur.masses.iter().enumerate() {
            if m.is_zero() {
                continue;
            }
            let x = cur.support_offset + i as i64;
            for (j, p) in kernel {
                let y = x + j;
                if y < lo || y > hi {
                    continue;
                }
                next[(y - lo) as usize] += m.clone() * p.clone();
            }
        }
        cur = StateDistribution {
            support_offset: lo,
            masses: next,
        };
    }
    cur
}

/// Exact law of `S_t` started from `start_law`, optionally killed on leaving `confine`.
pub fn state_distribution(
    d: &IncrementDistribution,
    start_law: &StateDistribution,
    t: usize,
    confine: Option<Interval>,
) -> Result<StateDistribution> {
    if let Some(c) = confine {
        if let Some((x, _)) = start_law.iter().find(|(x, m)| **m != 0.0 && !c.contains(*x)) {
            return Err(Error::InvalidArgument(format!(
                "start law has mass at {x}, outside confinement {c}"
            )));
        }
    }
    Ok(evolve(start_law, &d.support(), t, confine))
}

/// Exact rational step law of the lazy simple walk.
pub fn lazy_simple_exact(epsilon: &BigRational) -> Vec<(i64, BigRational)> {
    let two = BigRational::from_integer(2.into());
    let gamma = (BigRational::one() - epsilon.clone()) / two;
    vec![(-1, gamma.clone()), (0, epsilon.clone()), (1, gamma)]
        .into_iter()
        .filter(|(_, p)| !p.is_zero())
        .collect()
}

/// `P(S_t = x + 1) / P(S_t = x)` for the walk started at 0.
pub fn decay_ratio(d: &IncrementDistribution, t: usize, x: i64) -> Result<f64> {
    let dist = evolve(&StateDistribution::point(0), &d.support(), t, None);
    let den = dist.mass(x);
    if den == 0.0 {
        return Err(Error::ZeroDenominator { t, x });
    }
    Ok(dist.mass(x + 1) / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn lazy_simple_masses() {
        let d = IncrementDistribution::lazy_simple(0.2).unwrap();
        assert_abs_diff_eq!(d.mass(0), 0.2);
        assert_abs_diff_eq!(d.mass(1), 0.4);
        assert_abs_diff_eq!(d.mass(-1), 0.4);
        assert_eq!(d.mass(2), 0.0);
        let simple = IncrementDistribution::lazy_simple(0.0).unwrap();
        assert_eq!(simple.support(), vec![(-1, 0.5), (1, 0.5)]);
        assert!(!simple.check_conditions().positive_zero);
        assert!(IncrementDistribution::lazy_simple(1.0).is_err());
        for eps in [0.01, 0.2, 0.5, 0.99] {
            assert!(IncrementDistribution::lazy_simple(eps)
                .unwrap()
                .check_conditions()
                .all_hold());
        }
    }

    #[test]
    fn geometric_tail_reduces_to_lazy_when_all_nonunit_mass_is_at_zero() {
        let g = IncrementDistribution::geometric_tail(0.1, 2.0, 1.0, 64).unwrap();
        let l = IncrementDistribution::lazy_simple(0.1).unwrap();
        assert_eq!(g.support(), l.support());
    }

    #[test]
    fn geometric_tail_mass_and_conditions() {
        let p0 = IncrementDistribution::min_feasible_p_zero_frac(2.0, 64);
        let d = IncrementDistribution::geometric_tail(0.1, 2.0, p0, 64).unwrap();
        let total: f64 = (-64..=64).map(|j| d.mass(j)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let r = d.check_conditions();
        assert!(r.all_hold(), "{r:?}");
        // tail mass at each size stays under exp(-c i)
        for i in 2..=64i64 {
            let cond = 2.0 * d.mass(i) / 0.1;
            assert!(cond <= (-2.0 * i as f64).exp() * (1.0 + 1e-12));
        }
        assert!(d.max_jump() == 64);
    }

    #[test]
    fn geometric_tail_rejects_heavy_tail_share() {
        // half of the non-unit mass on |i| >= 2 exceeds exp(-2 i) at i = 2
        let err = IncrementDistribution::geometric_tail(0.1, 2.0, 0.5, 64).unwrap_err();
        match err {
            Error::InvalidDistribution { condition, .. } => {
                assert_eq!(condition, Condition::TailDecay)
            }
            other => panic!("unexpected {other}"),
        }
        assert!(IncrementDistribution::geometric_tail(0.1, -1.0, 1.0, 64).is_err());
    }

    #[test]
    fn simulate_basics() {
        let d = IncrementDistribution::lazy_simple(0.3).unwrap();
        let run = simulate(&d, 5, 0, 1);
        assert_eq!(run.positions, vec![5]);
        let a = simulate(&d, 0, 1000, 9);
        let b = simulate(&d, 0, 1000, 9);
        assert_eq!(a, b);
        assert!(a.positions.windows(2).all(|w| (w[1] - w[0]).abs() <= 1));
    }

    #[test]
    fn simple_walk_increments_are_centered_with_unit_variance() {
        let d = IncrementDistribution::lazy_simple(0.0).unwrap();
        let n = 1_000_000;
        let run = simulate(&d, 0, n, 31);
        let steps: Vec<f64> = run.positions.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
        let mean = steps.iter().sum::<f64>() / n as f64;
        let var = steps.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 3.0 / (n as f64).sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 1e-3, "var {var}");
    }

    #[test]
    fn state_distribution_at_zero_steps_is_identity() {
        let d = IncrementDistribution::lazy_simple(0.1).unwrap();
        let start = StateDistribution::from_points(&[(1, 0.5), (3, 0.5)]);
        assert_eq!(state_distribution(&d, &start, 0, None).unwrap(), start);
    }

    #[test]
    fn two_step_mass_at_origin() {
        for eps in [0.0, 0.1, 0.3, 0.7] {
            let d = IncrementDistribution::lazy_simple(eps).unwrap();
            let dist = state_distribution(&d, &StateDistribution::point(0), 2, None).unwrap();
            let g = (1.0 - eps) / 2.0;
            assert_abs_diff_eq!(dist.mass(0), eps * eps + 2.0 * g * g, epsilon = 1e-15);
        }
    }

    #[test]
    fn unconfined_distribution_is_probability_vector() {
        let p0 = IncrementDistribution::min_feasible_p_zero_frac(1.0, 16);
        for d in [
            IncrementDistribution::lazy_simple(0.25).unwrap(),
            IncrementDistribution::geometric_tail(0.2, 1.0, p0, 16).unwrap(),
        ] {
            for t in [1, 7, 32, 64] {
                let dist = state_distribution(&d, &StateDistribution::point(0), t, None).unwrap();
                assert!((dist.total() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn confined_is_dominated_by_unconfined() {
        let d = IncrementDistribution::lazy_simple(0.1).unwrap();
        let start = StateDistribution::from_points(&[(0, 1.0)]);
        let c = Interval::new(-3, 5);
        let conf = state_distribution(&d, &start, 12, Some(c)).unwrap();
        let free = state_distribution(&d, &start, 12, None).unwrap();
        for (x, m) in conf.iter() {
            assert!(c.contains(x) || *m == 0.0);
            assert!(*m <= free.mass(x) + 1e-15);
        }
        assert!(conf.total() < 1.0);
        assert!(state_distribution(&d, &StateDistribution::point(9), 1, Some(c)).is_err());
    }

    #[test]
    fn exact_rational_evolution() {
        let eps = BigRational::zero();
        let kernel = lazy_simple_exact(&eps);
        let start = StateDistribution::from_points(&[
            (1, BigRational::new(1.into(), 2.into())),
            (3, BigRational::new(1.into(), 2.into())),
        ]);
        let dist = evolve(&start, &kernel, 4, None);
        assert_eq!(dist.mass(5), BigRational::new(5.into(), 32.into()));
        assert_eq!(dist.total(), BigRational::one());
    }

    #[test]
    fn decay_ratio_small_cases() {
        let d = IncrementDistribution::lazy_simple(0.2).unwrap();
        assert_abs_diff_eq!(decay_ratio(&d, 1, 0).unwrap(), 2.0, epsilon = 1e-15);
        assert!(matches!(decay_ratio(&d, 1, 5), Err(Error::ZeroDenominator { .. })));
        let simple = IncrementDistribution::lazy_simple(0.0).unwrap();
        // parity: P(S_2 = 1) = 0
        assert!(decay_ratio(&simple, 2, 1).is_err());
    }

    #[test]
    fn decay_ratio_bound_for_simple_walk() {
        let d = IncrementDistribution::lazy_simple(0.0).unwrap();
        for t in 1..=40usize {
            for x in 0..=t as i64 {
                if let Ok(r) = decay_ratio(&d, t, x) {
                    let bound = (t as f64 - x as f64) / (t as f64 + x as f64 + 1.0);
                    assert!(r <= bound + 1e-12, "t={t} x={x} ratio={r} bound={bound}");
                }
            }
        }
    }

    #[test]
    fn lazy_walk_edge_ratio_exceeds_termwise_bound() {
        // P(S_3 = 3) / P(S_3 = 2) = gamma / (3 eps)
        let d = IncrementDistribution::lazy_simple(0.05).unwrap();
        let r = decay_ratio(&d, 3, 2).unwrap();
        assert_abs_diff_eq!(r, 0.475 / 0.15, epsilon = 1e-12);
        assert!(r > 0.2);
    }

    #[test]
    fn compressed_walk_stays_near_interval() {
        let d = IncrementDistribution::lazy_simple(0.1).unwrap();
        let i = Interval::new(-4, 4);
        let run = simulate_excursion_compressed(&d, i, 0, 10_000, 3).unwrap();
        assert!(run.positions.iter().all(|&x| (-5..=5).contains(&x)));
        let g = IncrementDistribution::geometric_tail(0.1, 1.0, 0.9, 8);
        if let Ok(g) = g {
            assert!(simulate_excursion_compressed(&g, i, 0, 10, 3).is_err());
        }
    }
}
