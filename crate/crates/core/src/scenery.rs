//! Five-color sceneries, finite windows of them, and patterns.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{stream_rng, STREAM_SCENERY_NEG, STREAM_SCENERY_NONNEG};

/// A color in `{1, 2, 3, 4, 5}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
#[repr(transparent)]
pub struct Color(u8);

impl Color {
    pub const COUNT: usize = 5;
    pub const ALL: [Color; 5] = [Color(1), Color(2), Color(3), Color(4), Color(5)];

    pub fn new(value: u8) -> Result<Self> {
        if (1..=5).contains(&value) {
            Ok(Color(value))
        } else {
            Err(Error::InvalidColor(value))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Zero-based index, for per-color arrays.
    pub fn index(self) -> usize {
        (self.0 - 1) as usize
    }

    pub fn from_index(i: usize) -> Self {
        assert!(i < 5, "color index {i} out of range");
        Color(i as u8 + 1)
    }
}

impl TryFrom<u8> for Color {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        Color::new(v)
    }
}

impl From<Color> for u8 {
    fn from(c: Color) -> u8 {
        c.0
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub(crate) fn parse_digits(s: &str) -> Result<Vec<Color>> {
    s.bytes()
        .map(|b| {
            if b.is_ascii_digit() {
                Color::new(b - b'0')
            } else {
                Err(Error::InvalidArgument(format!(
                    "unexpected character {:?} in color string",
                    b as char
                )))
            }
        })
        .collect()
}

pub(crate) fn digits(colors: &[Color]) -> String {
    colors.iter().map(|c| char::from(b'0' + c.0)).collect()
}

/// Anything that can answer "what color is at `z`".
pub trait ColorSource {
    fn color_at(&self, z: i64) -> Option<Color>;
}

/// A finite window of a scenery: `colors[i]` is the color at `origin + i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scenery {
    origin: i64,
    colors: Vec<Color>,
}

impl Scenery {
    pub fn new(origin: i64, colors: Vec<Color>) -> Result<Self> {
        if colors.is_empty() {
            return Err(Error::InvalidArgument("empty scenery window".into()));
        }
        Ok(Scenery { origin, colors })
    }

    pub fn from_digits(origin: i64, s: &str) -> Result<Self> {
        Scenery::new(origin, parse_digits(s.trim())?)
    }

    /// i.i.d. uniform cells on `[0, length)`, reproducible for a fixed seed.
    pub fn generate_iid(length: usize, seed: u64) -> Result<Self> {
        if length == 0 {
            return Err(Error::InvalidArgument("scenery length must be positive".into()));
        }
        Ok(IidScenery::new(seed).window(0, length as i64 - 1))
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    /// First stored index.
    pub fn lo(&self) -> i64 {
        self.origin
    }

    /// Last stored index.
    pub fn hi(&self) -> i64 {
        self.origin + self.colors.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn covers(&self, a: i64, b: i64) -> bool {
        a >= self.lo() && b <= self.hi()
    }

    pub fn get(&self, z: i64) -> Option<Color> {
        if z < self.origin {
            return None;
        }
        self.colors.get((z - self.origin) as usize).copied()
    }

    pub fn color(&self, z: i64) -> Result<Color> {
        self.get(z).ok_or(Error::OutOfWindow {
            index: z,
            lo: self.lo(),
            hi: self.hi(),
        })
    }

    fn check_range(&self, a: i64, b: i64) -> Result<()> {
        if a > b {
            return Err(Error::InvalidArgument(format!("empty range [{a}, {b}]")));
        }
        for z in [a, b] {
            if z < self.lo() || z > self.hi() {
                return Err(Error::OutOfWindow {
                    index: z,
                    lo: self.lo(),
                    hi: self.hi(),
                });
            }
        }
        Ok(())
    }

    /// The colors on `[a, b]` as a pattern.
    pub fn window(&self, a: i64, b: i64) -> Result<Pattern> {
        self.check_range(a, b)?;
        let i = (a - self.origin) as usize;
        let j = (b - self.origin) as usize;
        Pattern::new(self.colors[i..=j].to_vec())
    }

    /// Restriction to `[a, b]`, keeping absolute coordinates.
    pub fn restrict(&self, a: i64, b: i64) -> Result<Scenery> {
        let w = self.window(a, b)?;
        Scenery::new(a, w.colors)
    }

    /// The mirror image `z -> scenery(-z)`.
    pub fn reflected(&self) -> Scenery {
        let mut colors = self.colors.clone();
        colors.reverse();
        Scenery {
            origin: -self.hi(),
            colors,
        }
    }

    /// Grows the window by one cell on each side.
    pub fn extended(&self, left: Color, right: Color) -> Scenery {
        let mut colors = Vec::with_capacity(self.colors.len() + 2);
        colors.push(left);
        colors.extend_from_slice(&self.colors);
        colors.push(right);
        Scenery {
            origin: self.origin - 1,
            colors,
        }
    }

    pub fn to_digits(&self) -> String {
        digits(&self.colors)
    }
}

impl ColorSource for Scenery {
    fn color_at(&self, z: i64) -> Option<Color> {
        self.get(z)
    }
}

/// Record form: `<origin> <digits>`, e.g. `-4 243245153`.
impl fmt::Display for Scenery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.origin, self.to_digits())
    }
}

impl FromStr for Scenery {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let (Some(origin), Some(cells), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::InvalidArgument(format!(
                "scenery record must be `<origin> <digits>`, got {s:?}"
            )));
        };
        let origin = origin
            .parse::<i64>()
            .map_err(|e| Error::InvalidArgument(format!("bad origin {origin:?}: {e}")))?;
        Scenery::from_digits(origin, cells)
    }
}

/// True iff the two windows agree as color strings up to shift and reflection.
pub fn equivalent(a: &Scenery, b: &Scenery) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.colors == b.colors || a.colors.iter().rev().eq(b.colors.iter()))
}

/// A nonempty color string, e.g. the reference word read off the known window.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pattern {
    colors: Vec<Color>,
}

impl Pattern {
    pub fn new(colors: Vec<Color>) -> Result<Self> {
        if colors.is_empty() {
            return Err(Error::InvalidArgument("pattern must be nonempty".into()));
        }
        Ok(Pattern { colors })
    }

    pub fn from_digits(s: &str) -> Result<Self> {
        Pattern::new(parse_digits(s.trim())?)
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn reversed(&self) -> Pattern {
        let mut colors = self.colors.clone();
        colors.reverse();
        Pattern { colors }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&digits(&self.colors))
    }
}

/// The bi-infinite i.i.d. uniform scenery keyed by `seed`.
///
/// Cell `z >= 0` is word `z` of ChaCha stream 0 and cell `z < 0` is word
/// `-z - 1` of stream 1, so any window can be materialized independently and
/// growing a window never changes cells already produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IidScenery {
    pub seed: u64,
}

#[inline]
fn color_from_word(u: u64) -> Color {
    Color(((u as u128 * 5) >> 64) as u8 + 1)
}

impl IidScenery {
    pub fn new(seed: u64) -> Self {
        IidScenery { seed }
    }

    fn fill_side(&self, stream: u64, first: u64, count: usize, out: &mut Vec<Color>) {
        let mut rng = stream_rng(self.seed, stream);
        // two 32-bit words per u64 draw
        rng.set_word_pos(2 * first as u128);
        out.extend((0..count).map(|_| color_from_word(rng.next_u64())));
    }

    /// Materializes `[lo, hi]`.
    pub fn window(&self, lo: i64, hi: i64) -> Scenery {
        assert!(lo <= hi, "empty window [{lo}, {hi}]");
        let mut colors = Vec::with_capacity((hi - lo + 1) as usize);
        if lo < 0 {
            let neg_hi = hi.min(-1);
            // indices -z-1 for z in [lo, neg_hi], generated ascending then reversed
            let first = (-neg_hi - 1) as u64;
            let count = (neg_hi - lo + 1) as usize;
            let mut neg = Vec::with_capacity(count);
            self.fill_side(STREAM_SCENERY_NEG, first, count, &mut neg);
            neg.reverse();
            colors.extend(neg);
        }
        if hi >= 0 {
            let start = lo.max(0);
            self.fill_side(
                STREAM_SCENERY_NONNEG,
                start as u64,
                (hi - start + 1) as usize,
                &mut colors,
            );
        }
        Scenery { origin: lo, colors }
    }

    pub fn color(&self, z: i64) -> Color {
        self.window(z, z).colors[0]
    }
}

impl ColorSource for IidScenery {
    fn color_at(&self, z: i64) -> Option<Color> {
        Some(self.color(z))
    }
}

/// A materialized window of an [`IidScenery`] that extends itself on demand.
#[derive(Clone, Debug)]
pub struct GrowingScenery {
    source: IidScenery,
    window: Scenery,
}

impl GrowingScenery {
    pub fn new(source: IidScenery, lo: i64, hi: i64) -> Self {
        GrowingScenery {
            source,
            window: source.window(lo, hi),
        }
    }

    pub fn source(&self) -> IidScenery {
        self.source
    }

    pub fn window(&self) -> &Scenery {
        &self.window
    }

    /// Ensures `[lo, hi]` is materialized.
    pub fn ensure(&mut self, lo: i64, hi: i64) {
        if self.window.covers(lo, hi) {
            return;
        }
        let width = self.window.len() as i64;
        let new_lo = if lo < self.window.lo() {
            lo.min(self.window.lo() - width)
        } else {
            self.window.lo()
        };
        let new_hi = if hi > self.window.hi() {
            hi.max(self.window.hi() + width)
        } else {
            self.window.hi()
        };
        let mut colors = Vec::with_capacity((new_hi - new_lo + 1) as usize);
        if new_lo < self.window.lo() {
            colors.extend(self.source.window(new_lo, self.window.lo() - 1).colors);
        }
        colors.extend_from_slice(&self.window.colors);
        if new_hi > self.window.hi() {
            colors.extend(self.source.window(self.window.hi() + 1, new_hi).colors);
        }
        self.window = Scenery {
            origin: new_lo,
            colors,
        };
    }

    #[inline]
    pub fn color(&mut self, z: i64) -> Color {
        if let Some(c) = self.window.get(z) {
            return c;
        }
        self.ensure(z, z);
        self.window.colors[(z - self.window.origin) as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example() -> Scenery {
        Scenery::from_digits(-4, "243245153").unwrap()
    }

    #[test]
    fn window_of_worked_example() {
        let s = example();
        assert_eq!(s.window(0, 3).unwrap().to_string(), "4515");
        assert_eq!(s.window(-4, 4).unwrap().to_string(), "243245153");
        assert_eq!(s.window(2, 2).unwrap().colors(), &[Color::new(1).unwrap()]);
    }

    #[test]
    fn window_rejects_bad_ranges() {
        let s = example();
        assert!(matches!(s.window(-5, 0), Err(Error::OutOfWindow { index: -5, .. })));
        assert!(matches!(s.window(0, 5), Err(Error::OutOfWindow { index: 5, .. })));
        assert!(s.window(2, 1).is_err());
    }

    #[test]
    fn generate_rejects_zero_length() {
        assert!(Scenery::generate_iid(0, 1).is_err());
    }

    #[test]
    fn generation_is_deterministic_and_extension_stable() {
        let a = Scenery::generate_iid(500, 99).unwrap();
        let b = Scenery::generate_iid(500, 99).unwrap();
        assert_eq!(a, b);
        let src = IidScenery::new(99);
        let wide = src.window(-300, 800);
        assert_eq!(wide.restrict(0, 499).unwrap().colors(), a.colors());
        for z in [-300, -1, 0, 17, 800] {
            assert_eq!(src.color(z), wide.color(z).unwrap());
        }
    }

    #[test]
    fn growing_scenery_matches_source() {
        let src = IidScenery::new(5);
        let mut g = GrowingScenery::new(src, -3, 3);
        for z in [-50, 40, -3, 0, 1000, -999] {
            assert_eq!(g.color(z), src.color(z));
        }
        assert_eq!(g.window().restrict(-50, 40).unwrap(), src.window(-50, 40));
    }

    #[test]
    fn single_cell_colors_are_uniform_over_seeds() {
        let mut counts = [0usize; 5];
        for seed in 0..20_000 {
            let s = Scenery::generate_iid(1, seed).unwrap();
            counts[s.colors()[0].index()] += 1;
        }
        for c in counts {
            let f = c as f64 / 20_000.0;
            assert!((f - 0.2).abs() < 0.015, "frequency {f}");
        }
    }

    #[test]
    fn chi_square_uniformity() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let s = Scenery::generate_iid(100_000, 2024).unwrap();
        let mut counts = [0f64; 5];
        for c in s.colors() {
            counts[c.index()] += 1.0;
        }
        let expected = 100_000.0 / 5.0;
        let stat: f64 = counts.iter().map(|o| (o - expected).powi(2) / expected).sum();
        let critical = ChiSquared::new(4.0).unwrap().inverse_cdf(0.99);
        assert!(stat < critical, "chi-square {stat} >= {critical}");
    }

    #[test]
    fn record_roundtrip() {
        let s = example();
        let line = s.to_string();
        assert_eq!(line, "-4 243245153");
        assert_eq!(line.parse::<Scenery>().unwrap(), s);
        assert!("3 1296".parse::<Scenery>().is_err());
        assert!("x 12".parse::<Scenery>().is_err());
    }

    #[test]
    fn equivalence_examples() {
        let s = Scenery::from_digits(0, "12345").unwrap();
        let t = Scenery::from_digits(7, "13245").unwrap();
        assert!(equivalent(&s, &s).unwrap());
        assert!(equivalent(&s, &s.reflected()).unwrap());
        assert!(!equivalent(&s, &t).unwrap());
        let short = Scenery::from_digits(0, "1234").unwrap();
        assert!(matches!(equivalent(&s, &short), Err(Error::LengthMismatch { .. })));
    }

    /// Brute force: b must coincide with a shifted copy of a, or of its mirror
    /// image, on every cell of b's domain.
    fn equivalent_by_shifts(a: &Scenery, b: &Scenery) -> bool {
        let candidates = [a.clone(), a.reflected()];
        let span = (a.len() + b.len()) as i64 + 2;
        candidates.iter().any(|c| {
            (-span - (b.lo() - c.lo()).abs()..=span + (b.lo() - c.lo()).abs()).any(|shift| {
                (b.lo()..=b.hi()).all(|z| c.get(z - shift) == b.get(z))
            })
        })
    }

    #[test]
    fn equivalence_matches_shift_enumeration() {
        let s = Scenery::from_digits(0, "12345").unwrap();
        let t = Scenery::from_digits(0, "13245").unwrap();
        assert!(!equivalent_by_shifts(&s, &t));
        for seed in 0..200 {
            let a = IidScenery::new(seed).window(-2, 2);
            let b = IidScenery::new(seed / 3).window(10, 14);
            assert_eq!(equivalent(&a, &b).unwrap(), equivalent_by_shifts(&a, &b));
            assert!(equivalent_by_shifts(&a, &a.reflected()));
        }
    }

    fn arb_scenery(len: usize) -> impl Strategy<Value = Scenery> {
        (-20i64..20, proptest::collection::vec(1u8..=5, len)).prop_map(|(o, v)| {
            Scenery::new(o, v.into_iter().map(|c| Color::new(c).unwrap()).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn equivalence_is_symmetric_and_reflection_invariant(
            a in arb_scenery(7), b in arb_scenery(7)
        ) {
            let ab = equivalent(&a, &b).unwrap();
            prop_assert_eq!(ab, equivalent(&b, &a).unwrap());
            prop_assert_eq!(ab, equivalent(&a.reflected(), &b).unwrap());
            prop_assert_eq!(ab, equivalent(&a, &b.reflected()).unwrap());
            prop_assert!(equivalent(&a, &a).unwrap());
        }

        #[test]
        fn window_length(s in arb_scenery(12), i in 0usize..12, k in 0usize..12) {
            let (i, k) = (i.min(k), i.max(k));
            let a = s.lo() + i as i64;
            let b = s.lo() + k as i64;
            prop_assert_eq!(s.window(a, b).unwrap().len() as i64, b - a + 1);
        }
    }
}
