//! Derived constants of the one-point algorithm.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::paths::Delta;
use crate::scenery::{Pattern, Scenery};

/// Bases of the exponential thresholds and the horizon cap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdProfile {
    /// Horizon `T = t_base^{2n}` before capping.
    pub t_base: f64,
    /// Confinement `b_base^n` at the uncapped horizon.
    pub b_base: f64,
    /// Required oracle stops `c_base^n`.
    pub c_base: f64,
    pub horizon_cap: u64,
}

impl Default for ThresholdProfile {
    fn default() -> Self {
        ThresholdProfile {
            t_base: 2.4,
            b_base: 2.45,
            c_base: 1.1,
            horizon_cap: 1_000_000,
        }
    }
}

impl ThresholdProfile {
    /// `T = min(ceil(t_base^{2n}), horizon_cap)`, and whether the cap bit.
    pub fn horizon(&self, n: usize) -> (u64, bool) {
        let raw = self.t_base.powi(2 * n as i32).ceil();
        if !raw.is_finite() || raw >= self.horizon_cap as f64 {
            (self.horizon_cap, raw > self.horizon_cap as f64)
        } else {
            (raw as u64, false)
        }
    }

    /// Confinement radius for event B.
    ///
    /// `b_base^n` scaled by the same factor as the horizon's square root, so
    /// the ratio `bound / sqrt(T)` stays `(b_base / t_base)^n` under capping.
    pub fn b_bound(&self, n: usize) -> u64 {
        let (t, _) = self.horizon(n);
        ((self.b_base / self.t_base).powi(n as i32) * (t as f64).sqrt()).floor() as u64
    }

    pub fn c_threshold(&self, n: usize) -> f64 {
        self.c_base.powi(n as i32)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionParams {
    pub n: usize,
    pub delta: Delta,
    pub n_star: i64,
    pub interval_i: Interval,
    pub interval_k: Interval,
    pub interval_j: Interval,
    pub interval_j_minus: Interval,
    pub pattern_w: Pattern,
    pub offset_r: usize,
    pub horizon_t: u64,
    pub horizon_capped: bool,
}

/// `round(k δ n)`, halves away from zero.
pub fn rounded_multiple(k: i64, delta: Delta, n: usize) -> i64 {
    (delta * k * n as i64).round().to_integer()
}

/// Checks `0 < δ` and `63 δ < 1` exactly.
pub fn check_delta(delta: Delta) -> Result<()> {
    if delta <= Ratio::from_integer(0) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    if delta * 63 >= Ratio::from_integer(1) {
        return Err(Error::DeltaTooLarge {
            delta: delta.to_string(),
        });
    }
    Ok(())
}

/// Parses `"1/64"` or a decimal such as `"0.015"` into an exact fraction.
pub fn parse_delta(s: &str) -> Result<Delta> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("cannot parse delta {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let a: i64 = a.trim().parse().map_err(|_| bad())?;
        let b: i64 = b.trim().parse().map_err(|_| bad())?;
        if b == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(a, b));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 15 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let scale = 10i64.pow(frac.len() as u32);
    let int: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let frac_v: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    Ok(Ratio::new(int * scale + frac_v, scale))
}

impl ReconstructionParams {
    /// Intervals and offsets only; the pattern is read from `window`.
    pub fn derive(n: usize, delta: Delta, window: &Scenery, profile: &ThresholdProfile) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        check_delta(delta)?;
        let ni = n as i64;
        if !window.covers(-ni, ni) {
            return Err(Error::InvalidArgument(format!(
                "known window [{}, {}] does not cover [-{n}, {n}]",
                window.lo(),
                window.hi()
            )));
        }
        let dn = rounded_multiple(1, delta, n);
        let d21 = rounded_multiple(21, delta, n);
        let n_star = ni - rounded_multiple(61, delta, n);
        let offset_r = rounded_multiple(90, delta, n);
        if offset_r < 1 {
            return Err(Error::InvalidArgument(format!(
                "offset r = round(90 * {delta} * {n}) is zero"
            )));
        }
        let interval_k = Interval::new(n_star - ni, n_star);
        let (horizon_t, horizon_capped) = profile.horizon(n);
        Ok(ReconstructionParams {
            n,
            delta,
            n_star,
            interval_i: Interval::symmetric(ni),
            interval_k,
            interval_j: Interval::new(n_star - d21, n_star + dn),
            interval_j_minus: Interval::new(n_star - ni - dn, n_star - ni + d21),
            pattern_w: window.window(interval_k.lo, interval_k.hi)?,
            offset_r: offset_r as usize,
            horizon_t,
            horizon_capped,
        })
    }

    /// The target cell `n + 1`.
    pub fn target(&self) -> i64 {
        self.n as i64 + 1
    }

    pub fn delta_f64(&self) -> f64 {
        *self.delta.numer() as f64 / *self.delta.denom() as f64
    }
}

pub fn derive_params(
    n: usize,
    delta: Delta,
    window: &Scenery,
    profile: &ThresholdProfile,
) -> Result<ReconstructionParams> {
    ReconstructionParams::derive(n, delta, window, profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenery::IidScenery;

    #[test]
    fn worked_arithmetic_at_n_100() {
        let w = IidScenery::new(1).window(-100, 100);
        let p = derive_params(100, Ratio::new(1, 100), &w, &ThresholdProfile::default()).unwrap();
        assert_eq!(p.n_star, 39);
        assert_eq!(p.interval_k, Interval::new(-61, 39));
        assert_eq!(p.interval_j, Interval::new(18, 40));
        assert_eq!(p.interval_j_minus, Interval::new(-62, -40));
        assert_eq!(p.offset_r, 90);
        assert_eq!(p.pattern_w.len(), 101);
        assert!(p.horizon_capped);
        assert!(p.interval_i.contains_interval(&p.interval_k));
        assert!(p.interval_i.contains_interval(&p.interval_j));
    }

    #[test]
    fn desk_profile_values() {
        let w = IidScenery::new(2).window(-12, 12);
        let profile = ThresholdProfile::default();
        let p = derive_params(12, Ratio::new(1, 64), &w, &profile).unwrap();
        assert_eq!(p.n_star, 1);
        assert_eq!(p.interval_k, Interval::new(-11, 1));
        assert_eq!(p.interval_j, Interval::new(-3, 1));
        assert_eq!(p.offset_r, 17);
        assert_eq!(p.horizon_t, 1_000_000);
        assert_eq!(p.pattern_w, w.window(-11, 1).unwrap());
        assert_eq!(profile.b_bound(12), 1280);
    }

    #[test]
    fn delta_guard() {
        let w = IidScenery::new(1).window(-20, 20);
        let prof = ThresholdProfile::default();
        assert!(matches!(
            derive_params(10, Ratio::new(1, 63), &w, &prof),
            Err(Error::DeltaTooLarge { .. })
        ));
        assert!(derive_params(10, Ratio::new(1, 64), &w, &prof).is_ok());
        // 90 δ n rounds to zero
        assert!(derive_params(2, Ratio::new(1, 1000), &w, &prof).is_err());
        assert!(derive_params(30, Ratio::new(1, 100), &w, &prof).is_err());
    }

    #[test]
    fn pattern_length_is_n_plus_one() {
        let w = IidScenery::new(4).window(-40, 40);
        for n in 5..=40 {
            if let Ok(p) = derive_params(n, Ratio::new(1, 64), &w, &ThresholdProfile::default()) {
                assert_eq!(p.pattern_w.len(), n + 1);
                assert!(p.offset_r >= 1);
            }
        }
    }

    #[test]
    fn uncapped_horizon_and_bound() {
        let profile = ThresholdProfile {
            horizon_cap: u64::MAX,
            ..ThresholdProfile::default()
        };
        assert_eq!(profile.horizon(3), (192, false));
        // equals floor(2.45^n) when uncapped, up to float rounding of the square root
        let b = profile.b_bound(6);
        assert!((b as f64 - 2.45f64.powi(6)).abs() <= 1.0);
    }

    #[test]
    fn delta_parsing() {
        assert_eq!(parse_delta("1/64").unwrap(), Ratio::new(1, 64));
        assert_eq!(parse_delta("0.015").unwrap(), Ratio::new(3, 200));
        assert!(parse_delta("x").is_err());
        assert!(parse_delta("1/0").is_err());
    }
}
