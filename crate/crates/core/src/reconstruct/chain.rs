//! The chain of walk positions at successive oracle stops and its
//! stationary law.
//!
//! Between stops the pair (position, automaton state) is Markov when the
//! automaton reads `scenery(x)` inside the interval and a blank symbol
//! outside it. Hitting probabilities of the match states are obtained from
//! one linear solve over the reachable transient pairs.

use std::collections::{HashMap, VecDeque};

use nalgebra::DMatrix;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::observe::PatternAutomaton;
use crate::reconstruct::params::ReconstructionParams;
use crate::scenery::{Pattern, Scenery};
use crate::walk::{IncrementDistribution, StateDistribution};

const POWER_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-10;
const MAX_POWER_ITERATIONS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainOptions {
    /// Largest `n` for which the exact solve is attempted.
    pub max_n: usize,
    /// Number of cells kept on each side of the interval; positions further
    /// out are merged into the outermost kept cell. Defaults to the largest
    /// jump, which is exact for nearest-neighbour walks.
    pub outside_band: Option<usize>,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions {
            max_n: 40,
            outside_band: None,
        }
    }
}

/// A probability vector on `interval`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub interval: Interval,
    pub masses: Vec<f64>,
}

impl StationaryDistribution {
    pub fn new(interval: Interval, masses: Vec<f64>) -> Result<Self> {
        if masses.len() != interval.len() {
            return Err(Error::LengthMismatch {
                left: masses.len(),
                right: interval.len(),
            });
        }
        if masses.iter().any(|m| !(*m >= 0.0)) {
            return Err(Error::InvalidArgument("negative or NaN mass".into()));
        }
        Ok(StationaryDistribution { interval, masses })
    }

    pub fn from_points(interval: Interval, points: &[(i64, f64)]) -> Result<Self> {
        let mut masses = vec![0.0; interval.len()];
        for &(x, m) in points {
            if !interval.contains(x) {
                return Err(Error::InvalidArgument(format!("{x} outside {interval}")));
            }
            masses[(x - interval.lo) as usize] += m;
        }
        StationaryDistribution::new(interval, masses)
    }

    /// Normalized empirical law of `positions`.
    pub fn empirical(interval: Interval, positions: &[i64]) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidArgument("no positions".into()));
        }
        let w = 1.0 / positions.len() as f64;
        let pts: Vec<(i64, f64)> = positions.iter().map(|&x| (x, w)).collect();
        Self::from_points(interval, &pts)
    }

    pub fn mass(&self, x: i64) -> f64 {
        if self.interval.contains(x) {
            self.masses[(x - self.interval.lo) as usize]
        } else {
            0.0
        }
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn as_state_distribution(&self) -> StateDistribution {
        StateDistribution {
            support_offset: self.interval.lo,
            masses: self.masses.clone(),
        }
    }

    pub fn total_variation(&self, other: &StationaryDistribution) -> f64 {
        let lo = self.interval.lo.min(other.interval.lo);
        let hi = self.interval.hi.max(other.interval.hi);
        0.5 * (lo..=hi).map(|x| (self.mass(x) - other.mass(x)).abs()).sum::<f64>()
    }
}

/// Transition kernel between stop positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopChain {
    pub interval: Interval,
    /// Row-major `|I| x |I|`; rows of impossible stop positions are zero.
    pub kernel: Vec<f64>,
    /// `true` where a stop can end.
    pub stop_positions: Vec<bool>,
    pub transient_states: usize,
    /// Largest `|1 - row sum|` over possible stop positions.
    pub mass_deficit: f64,
}

impl StopChain {
    pub fn size(&self) -> usize {
        self.interval.len()
    }

    pub fn prob(&self, x: i64, y: i64) -> f64 {
        let m = self.size();
        let i = (x - self.interval.lo) as usize;
        let j = (y - self.interval.lo) as usize;
        self.kernel[i * m + j]
    }

    pub fn step(&self, mu: &[f64]) -> Vec<f64> {
        let m = self.size();
        let mut out = vec![0.0; m];
        for (i, &p) in mu.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let row = &self.kernel[i * m..(i + 1) * m];
            for (o, k) in out.iter_mut().zip(row) {
                *o += p * k;
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSolution {
    pub mu: StationaryDistribution,
    pub chain: StopChain,
    pub iterations: usize,
    /// `|| mu P - mu ||_1`.
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Node {
    Inside { x: i64, k: usize },
    Outside { x: i64 },
}

#[derive(Clone, Copy, Debug)]
enum Succ {
    Move(Node),
    Absorb(i64),
}

/// Builds the stop-to-stop kernel for stops of `w` confined to `interval`.
pub fn stop_chain(
    interval: Interval,
    w: &Pattern,
    scenery: &Scenery,
    d: &IncrementDistribution,
    options: &ChainOptions,
) -> Result<StopChain> {
    if !scenery.covers(interval.lo, interval.hi) {
        return Err(Error::InvalidArgument(format!(
            "scenery window does not cover {interval}"
        )));
    }
    let dfa = PatternAutomaton::new(w);
    let m = w.len();
    let steps = d.support();
    let band = options.outside_band.unwrap_or(d.max_jump().max(1) as usize).max(1) as i64;
    let far_lo = interval.lo - band;
    let far_hi = interval.hi + band;
    let symbol = |x: i64| scenery.get(x).map(|c| c.get() as usize).unwrap_or(0);

    // one step from a node: (transient successor, prob) or (absorbing position, prob)
    let successors = |node: Node| -> Vec<(Succ, f64)> {
        let (x, k) = match node {
            Node::Inside { x, k } => (x, k),
            Node::Outside { x } => (x, 0),
        };
        let mut out: Vec<(Succ, f64)> = Vec::with_capacity(steps.len());
        for &(s, p) in &steps {
            let y = x + s;
            if interval.contains(y) {
                let k2 = dfa.next(k, symbol(y));
                if k2 == m {
                    out.push((Succ::Absorb(y), p));
                } else {
                    out.push((Succ::Move(Node::Inside { x: y, k: k2 }), p));
                }
            } else {
                out.push((Succ::Move(Node::Outside { x: y.clamp(far_lo, far_hi) }), p));
            }
        }
        out
    };

    let size = interval.len();
    let last = w.colors()[m - 1].get() as usize;
    let stop_positions: Vec<bool> = interval.iter().map(|x| symbol(x) == last).collect();

    // reachable transient nodes from every post-match configuration
    let mut index: HashMap<Node, usize> = HashMap::new();
    let mut order: Vec<Node> = Vec::new();
    let mut queue: VecDeque<Node> = VecDeque::new();
    let visit = |n: Node, index: &mut HashMap<Node, usize>, order: &mut Vec<Node>, queue: &mut VecDeque<Node>| {
        if let std::collections::hash_map::Entry::Vacant(e) = index.entry(n) {
            e.insert(order.len());
            order.push(n);
            queue.push_back(n);
        }
    };
    for x in interval.iter() {
        if !stop_positions[(x - interval.lo) as usize] {
            continue;
        }
        for (succ, _) in successors(Node::Inside { x, k: m }) {
            if let Succ::Move(n) = succ {
                visit(n, &mut index, &mut order, &mut queue);
            }
        }
    }
    while let Some(node) = queue.pop_front() {
        for (succ, _) in successors(node) {
            if let Succ::Move(n) = succ {
                visit(n, &mut index, &mut order, &mut queue);
            }
        }
    }
    let nt = order.len();

    // (I - Q) H = R
    let mut a = DMatrix::<f64>::identity(nt, nt);
    let mut r = DMatrix::<f64>::zeros(nt, size);
    for (i, &node) in order.iter().enumerate() {
        for (succ, p) in successors(node) {
            match succ {
                Succ::Move(n) => a[(i, index[&n])] -= p,
                Succ::Absorb(y) => r[(i, (y - interval.lo) as usize)] += p,
            }
        }
    }
    let h = if nt == 0 {
        r
    } else {
        a.lu()
            .solve(&r)
            .ok_or_else(|| Error::DegenerateChain("singular first-passage system".into()))?
    };

    let mut kernel = vec![0.0; size * size];
    let mut deficit = 0.0f64;
    for x in interval.iter() {
        let i = (x - interval.lo) as usize;
        if !stop_positions[i] {
            continue;
        }
        let row = &mut kernel[i * size..(i + 1) * size];
        for (succ, p) in successors(Node::Inside { x, k: m }) {
            match succ {
                Succ::Move(n) => {
                    let j = index[&n];
                    for (y, o) in row.iter_mut().enumerate() {
                        *o += p * h[(j, y)];
                    }
                }
                Succ::Absorb(y) => row[(y - interval.lo) as usize] += p,
            }
        }
        for o in row.iter_mut() {
            // round-off from the solve
            if *o < 0.0 {
                *o = 0.0;
            }
        }
        deficit = deficit.max((1.0 - row.iter().sum::<f64>()).abs());
    }
    Ok(StopChain {
        interval,
        kernel,
        stop_positions,
        transient_states: nt,
        mass_deficit: deficit,
    })
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Stationary law of the unique closed class, by power iteration.
pub fn stationary(chain: StopChain) -> Result<ChainSolution> {
    let size = chain.size();
    let mut graph = DiGraph::<usize, ()>::new();
    let nodes: Vec<_> = (0..size).map(|i| graph.add_node(i)).collect();
    for i in 0..size {
        for j in 0..size {
            if chain.kernel[i * size + j] > 0.0 {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let mut closed = Vec::new();
    for comp in tarjan_scc(&graph) {
        let members: Vec<usize> = comp.iter().map(|n| graph[*n]).collect();
        if !chain.stop_positions[members[0]] {
            continue;
        }
        let leaves = members.iter().any(|&i| {
            (0..size).any(|j| chain.kernel[i * size + j] > 0.0 && !members.contains(&j))
        });
        if !leaves {
            closed.push(members);
        }
    }
    let class = match closed.len() {
        0 => {
            return Err(Error::DegenerateChain(
                "the pattern cannot be generated inside the interval".into(),
            ))
        }
        1 => closed.pop().unwrap(),
        k => {
            return Err(Error::DegenerateChain(format!(
                "{k} closed classes; the stop chain is reducible"
            )))
        }
    };

    // period by BFS levels
    let root = class[0];
    let mut level = vec![usize::MAX; size];
    level[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut period = 0usize;
    while let Some(i) = queue.pop_front() {
        for j in 0..size {
            if chain.kernel[i * size + j] <= 0.0 {
                continue;
            }
            if level[j] == usize::MAX {
                level[j] = level[i] + 1;
                queue.push_back(j);
            } else {
                period = gcd(period, (level[i] + 1).abs_diff(level[j]));
            }
        }
    }
    if period != 1 {
        return Err(Error::DegenerateChain(format!("stop chain has period {period}")));
    }

    let mut mu = vec![0.0; size];
    for &i in &class {
        mu[i] = 1.0 / class.len() as f64;
    }
    let mut iterations = 0;
    loop {
        let mut next = chain.step(&mu);
        let total: f64 = next.iter().sum();
        for v in next.iter_mut() {
            *v /= total;
        }
        let change: f64 = next.iter().zip(&mu).map(|(a, b)| (a - b).abs()).sum();
        mu = next;
        iterations += 1;
        if change < POWER_TOL {
            break;
        }
        if iterations >= MAX_POWER_ITERATIONS {
            return Err(Error::DegenerateChain(format!(
                "power iteration did not settle (last change {change:e})"
            )));
        }
    }
    let image = chain.step(&mu);
    let residual: f64 = image.iter().zip(&mu).map(|(a, b)| (a - b).abs()).sum();
    if residual > RESIDUAL_TOL {
        return Err(Error::DegenerateChain(format!("fixed-point residual {residual:e}")));
    }
    Ok(ChainSolution {
        mu: StationaryDistribution::new(chain.interval, mu)?,
        chain,
        iterations,
        residual,
    })
}

/// μ for the pattern and interval of `params`.
pub fn exact_chain_mu(
    params: &ReconstructionParams,
    scenery: &Scenery,
    d: &IncrementDistribution,
) -> Result<ChainSolution> {
    exact_chain_mu_with(params, scenery, d, &ChainOptions::default())
}

pub fn exact_chain_mu_with(
    params: &ReconstructionParams,
    scenery: &Scenery,
    d: &IncrementDistribution,
    options: &ChainOptions,
) -> Result<ChainSolution> {
    if params.n > options.max_n {
        return Err(Error::BudgetExceeded(format!(
            "exact stop chain is limited to n <= {}, got {}",
            options.max_n, params.n
        )));
    }
    stationary(stop_chain(params.interval_i, &params.pattern_w, scenery, d, options)?)
}
