//! δ-paths, (k,δ)-paths and their enumeration.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` accepted by the exhaustive enumerator.
pub const MAX_ENUMERATION_N: usize = 14;

/// Exact rational `δ`.
pub type Delta = Ratio<i64>;

/// `R(0) = start`, `R(t + 1) - R(t) = steps[t]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathFunction {
    pub start: i64,
    pub steps: Vec<i64>,
}

impl PathFunction {
    pub fn new(start: i64, steps: Vec<i64>) -> Self {
        PathFunction { start, steps }
    }

    pub fn from_positions(positions: &[i64]) -> Self {
        PathFunction {
            start: positions.first().copied().unwrap_or(0),
            steps: positions.windows(2).map(|w| w[1] - w[0]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn positions(&self) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        let mut x = self.start;
        out.push(x);
        for s in &self.steps {
            x += s;
            out.push(x);
        }
        out
    }

    pub fn end(&self) -> i64 {
        self.start + self.steps.iter().sum::<i64>()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaPathReport {
    pub is_delta: bool,
    pub nonunit_count: u64,
    pub nonunit_variation: u64,
}

/// Number and total size of the non-unit steps.
pub fn nonunit_stats(steps: &[i64]) -> (u64, u64) {
    steps
        .iter()
        .filter(|s| s.abs() != 1)
        .fold((0, 0), |(c, v), s| (c + 1, v + s.unsigned_abs()))
}

/// `x <= δ n`, decided exactly.
pub fn within_budget(x: u64, delta: Delta, n: usize) -> bool {
    Ratio::from_integer(x as i64) <= delta * n as i64
}

/// `x < δ n`, decided exactly.
pub fn under_budget(x: u64, delta: Delta, n: usize) -> bool {
    Ratio::from_integer(x as i64) < delta * n as i64
}

/// Largest integer `x` with `x <= δ n`.
pub fn budget_floor(delta: Delta, n: usize) -> u64 {
    (delta * n as i64).floor().to_integer().max(0) as u64
}

pub fn check_delta_path(p: &PathFunction, delta: Delta) -> DeltaPathReport {
    let n = p.len();
    let (count, variation) = nonunit_stats(&p.steps);
    DeltaPathReport {
        is_delta: within_budget(count, delta, n) && within_budget(variation, delta, n),
        nonunit_count: count,
        nonunit_variation: variation,
    }
}

/// Fewer than `δ n` non-unit steps with total size under `δ n`, for a path
/// of length `k n`.
pub fn check_k_delta_path(p: &PathFunction, k: Ratio<i64>, delta: Delta, n: usize) -> Result<bool> {
    let expected = k * n as i64;
    if !expected.is_integer() || expected.to_integer() != p.len() as i64 {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: expected.to_integer().max(0) as usize,
        });
    }
    let (count, variation) = nonunit_stats(&p.steps);
    Ok(under_budget(count, delta, n) && under_budget(variation, delta, n))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathBudget {
    pub delta: f64,
    pub n: usize,
    pub entropy_h: f64,
}

impl PathBudget {
    pub fn new(delta: f64, n: usize) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "delta must lie in (0, 1/2), got {delta}"
            )));
        }
        Ok(PathBudget {
            delta,
            n,
            entropy_h: binary_entropy(delta),
        })
    }
}

/// `H(p) = -p log2 p - (1 - p) log2 (1 - p)`.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma2Variant {
    /// `2^{n(1 + H(δ) + 3δ)}`.
    Standard,
    /// `2^{n(1 + H(δ) + 2δ)}`, the sharper exponent as stated.
    Statement,
    /// `2^{10 δ n (1 + H(0.1) + 0.3)}`, for (10δ, δ)-paths.
    TenDelta,
}

pub fn lemma2_bound(n: usize, delta: f64, variant: Lemma2Variant) -> f64 {
    lemma2_bound_log2(n, delta, variant).exp2()
}

pub fn lemma2_bound_log2(n: usize, delta: f64, variant: Lemma2Variant) -> f64 {
    let n = n as f64;
    match variant {
        Lemma2Variant::Standard => n * (1.0 + binary_entropy(delta) + 3.0 * delta),
        Lemma2Variant::Statement => n * (1.0 + binary_entropy(delta) + 2.0 * delta),
        Lemma2Variant::TenDelta => 10.0 * delta * n * (1.0 + binary_entropy(0.1) + 0.3),
    }
}

/// The δ-paths of length `n` with `|step| <= max_jump`.
#[derive(Clone, Debug)]
pub struct DeltaPaths {
    n: usize,
    start: i64,
    steps: Vec<i64>,
    max_count: u64,
    max_variation: u64,
}

impl DeltaPaths {
    pub fn new(n: usize, delta: Delta, start: i64, max_jump: i64) -> Result<Self> {
        if n > MAX_ENUMERATION_N {
            return Err(Error::BudgetExceeded(format!(
                "exhaustive enumeration is limited to n <= {MAX_ENUMERATION_N}, got {n}"
            )));
        }
        if max_jump < 1 {
            return Err(Error::InvalidArgument("max_jump must be at least 1".into()));
        }
        Ok(DeltaPaths {
            n,
            start,
            steps: (-max_jump..=max_jump).collect(),
            max_count: budget_floor(delta, n),
            max_variation: budget_floor(delta, n),
        })
    }

    /// Exact count by DP over (steps taken, jumps used, variation used).
    pub fn count(&self) -> u128 {
        let (mc, mv) = (self.max_count as usize, self.max_variation as usize);
        let mut table = vec![vec![0u128; mv + 1]; mc + 1];
        table[0][0] = 1;
        for _ in 0..self.n {
            let mut next = vec![vec![0u128; mv + 1]; mc + 1];
            for c in 0..=mc {
                for v in 0..=mv {
                    let ways = table[c][v];
                    if ways == 0 {
                        continue;
                    }
                    for &s in &self.steps {
                        if s.abs() == 1 {
                            next[c][v] += ways;
                        } else {
                            let v2 = v + s.unsigned_abs() as usize;
                            if c < mc && v2 <= mv {
                                next[c + 1][v2] += ways;
                            }
                        }
                    }
                }
            }
            table = next;
        }
        table.iter().flatten().sum()
    }

    /// Depth-first enumeration in lexicographic step order.
    pub fn iter(&self) -> DeltaPathIter<'_> {
        DeltaPathIter {
            spec: self,
            stack: vec![0],
            steps: Vec::with_capacity(self.n),
            counts: vec![(0, 0)],
            done: false,
        }
    }

    /// Number of paths found by walking [`Self::iter`].
    pub fn enumerate_count(&self) -> u64 {
        self.iter().count() as u64
    }
}

pub struct DeltaPathIter<'a> {
    spec: &'a DeltaPaths,
    /// next candidate index at each depth
    stack: Vec<usize>,
    steps: Vec<i64>,
    counts: Vec<(u64, u64)>,
    done: bool,
}

impl Iterator for DeltaPathIter<'_> {
    type Item = PathFunction;

    fn next(&mut self) -> Option<PathFunction> {
        let spec = self.spec;
        if self.done {
            return None;
        }
        if spec.n == 0 {
            self.done = true;
            return Some(PathFunction::new(spec.start, Vec::new()));
        }
        loop {
            let depth = self.steps.len();
            let idx = *self.stack.last().unwrap();
            if idx >= spec.steps.len() {
                self.stack.pop();
                if self.steps.pop().is_none() {
                    self.done = true;
                    return None;
                }
                self.counts.pop();
                continue;
            }
            *self.stack.last_mut().unwrap() += 1;
            let s = spec.steps[idx];
            let (c, v) = self.counts[depth];
            let (c2, v2) = if s.abs() == 1 {
                (c, v)
            } else {
                (c + 1, v + s.unsigned_abs())
            };
            if c2 > spec.max_count || v2 > spec.max_variation {
                continue;
            }
            if depth + 1 == spec.n {
                let mut steps = self.steps.clone();
                steps.push(s);
                return Some(PathFunction::new(spec.start, steps));
            }
            self.steps.push(s);
            self.counts.push((c2, v2));
            self.stack.push(0);
        }
    }
}
