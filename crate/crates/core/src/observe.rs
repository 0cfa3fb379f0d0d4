//! Observation streams and pattern stopping times.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::scenery::{Color, ColorSource, GrowingScenery, Pattern};
use crate::walk::WalkRun;

/// `colors[t] = scenery(S_t)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationStream {
    pub colors: Vec<Color>,
}

impl ObservationStream {
    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }
}

pub fn observe<S: ColorSource + ?Sized>(scenery: &S, run: &WalkRun) -> Result<ObservationStream> {
    let colors = run
        .positions
        .iter()
        .map(|&z| {
            scenery.color_at(z).ok_or_else(|| {
                Error::InvalidArgument(format!("walk visits {z}, outside the scenery window"))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ObservationStream { colors })
}

/// Observation along `run`, extending the window as the walk wanders.
pub fn observe_growing(scenery: &mut GrowingScenery, run: &WalkRun) -> ObservationStream {
    ObservationStream {
        colors: run.positions.iter().map(|&z| scenery.color(z)).collect(),
    }
}

/// Increasing stop times.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopTimes {
    pub times: Vec<u64>,
}

impl StopTimes {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn is_subset_of(&self, other: &StopTimes) -> bool {
        let mut it = other.times.iter();
        self.times.iter().all(|t| it.any(|u| u == t))
    }
}

/// Symbol alphabet of the automaton: `0` is the "outside" marker, `1..=5` colors.
pub const ALPHABET: usize = 6;

/// Knuth-Morris-Pratt automaton for one pattern over [`ALPHABET`].
///
/// State `k` means the last `k` symbols equal the first `k` pattern symbols;
/// reaching `len` is a full match, after which the automaton continues from
/// the longest proper border so overlapping matches are found.
#[derive(Clone, Debug)]
pub struct PatternAutomaton {
    len: usize,
    delta: Vec<[u16; ALPHABET]>,
}

impl PatternAutomaton {
    pub fn new(pattern: &Pattern) -> Self {
        let w: Vec<usize> = pattern.colors().iter().map(|c| c.get() as usize).collect();
        Self::from_symbols(&w)
    }

    fn from_symbols(w: &[usize]) -> Self {
        let m = w.len();
        assert!(m < u16::MAX as usize, "pattern too long for the automaton");
        let mut fail = vec![0usize; m + 1];
        let mut k = 0;
        for i in 1..m {
            while k > 0 && w[i] != w[k] {
                k = fail[k];
            }
            if w[i] == w[k] {
                k += 1;
            }
            fail[i + 1] = k;
        }
        let mut delta = vec![[0u16; ALPHABET]; m + 1];
        for q in 0..=m {
            for a in 0..ALPHABET {
                delta[q][a] = if q < m && w[q] == a {
                    (q + 1) as u16
                } else if q == 0 {
                    0
                } else {
                    delta[fail[q]][a]
                };
            }
        }
        PatternAutomaton { len: m, delta }
    }

    pub fn pattern_len(&self) -> usize {
        self.len
    }

    pub fn num_states(&self) -> usize {
        self.len + 1
    }

    #[inline]
    pub fn next(&self, state: usize, symbol: usize) -> usize {
        self.delta[state][symbol] as usize
    }

    #[inline]
    pub fn is_match(&self, state: usize) -> bool {
        state == self.len
    }
}

/// Streaming matcher: feed colors one at a time.
#[derive(Clone, Debug)]
pub struct StopDetector<'a> {
    dfa: &'a PatternAutomaton,
    state: usize,
}

impl<'a> StopDetector<'a> {
    pub fn new(dfa: &'a PatternAutomaton) -> Self {
        StopDetector { dfa, state: 0 }
    }

    /// Returns true when the symbol just fed completes an occurrence.
    #[inline]
    pub fn push(&mut self, symbol: usize) -> bool {
        self.state = self.dfa.next(self.state, symbol);
        self.dfa.is_match(self.state)
    }
}

/// All `t <= horizon` with `chi[t - n ..= t] = w`, where `|w| = n + 1`.
pub fn pattern_stops(chi: &ObservationStream, w: &Pattern, horizon: usize) -> StopTimes {
    let dfa = PatternAutomaton::new(w);
    let mut det = StopDetector::new(&dfa);
    let end = chi.colors.len().min(horizon.saturating_add(1));
    let times = chi.colors[..end]
        .iter()
        .enumerate()
        .filter_map(|(t, c)| det.push(c.get() as usize).then_some(t as u64))
        .collect();
    StopTimes { times }
}

/// Pattern stops whose last `n + 1` walk positions all lie in `[-n, n]`.
pub fn oracle_stops(
    run: &WalkRun,
    chi: &ObservationStream,
    w: &Pattern,
    n: usize,
    horizon: usize,
) -> StopTimes {
    oracle_stops_in(run, chi, w, Interval::symmetric(n as i64), horizon)
}

/// As [`oracle_stops`] with an arbitrary confining interval.
pub fn oracle_stops_in(
    run: &WalkRun,
    chi: &ObservationStream,
    w: &Pattern,
    interval: Interval,
    horizon: usize,
) -> StopTimes {
    let span = w.len() as i64 - 1;
    let dfa = PatternAutomaton::new(w);
    let mut det = StopDetector::new(&dfa);
    let mut last_outside: i64 = -1;
    let end = chi.colors.len().min(run.positions.len()).min(horizon.saturating_add(1));
    let mut times = Vec::new();
    for t in 0..end {
        if !interval.contains(run.positions[t]) {
            last_outside = t as i64;
        }
        if det.push(chi.colors[t].get() as usize) && last_outside < t as i64 - span {
            times.push(t as u64);
        }
    }
    StopTimes { times }
}

/// Walk positions at the given stop times.
pub fn positions_at(run: &WalkRun, stops: &StopTimes) -> Vec<i64> {
    stops.times.iter().map(|&t| run.positions[t as usize]).collect()
}
