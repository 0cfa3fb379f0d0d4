//! Exact small-instance checks run by `verify-oracles` and `verify-lemma2`.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::Result;
use crate::paths::{lemma2_bound, Delta, DeltaPaths, Lemma2Variant};
use crate::walk::{evolve, lazy_simple_exact, IncrementDistribution, StateDistribution};

/// The forward DP under test. Swappable so that a faulty implementation can
/// be shown to be caught.
pub trait Evolver {
    fn evolve_f64(&self, start: &StateDistribution, kernel: &[(i64, f64)], t: usize) -> StateDistribution;

    fn evolve_exact(
        &self,
        start: &StateDistribution<BigRational>,
        kernel: &[(i64, BigRational)],
        t: usize,
    ) -> StateDistribution<BigRational>;
}

pub struct ForwardEvolver;

impl Evolver for ForwardEvolver {
    fn evolve_f64(&self, start: &StateDistribution, kernel: &[(i64, f64)], t: usize) -> StateDistribution {
        evolve(start, kernel, t, None)
    }

    fn evolve_exact(
        &self,
        start: &StateDistribution<BigRational>,
        kernel: &[(i64, BigRational)],
        t: usize,
    ) -> StateDistribution<BigRational> {
        evolve(start, kernel, t, None)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleCheck {
    pub name: String,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
}

impl fmt::Display for OracleCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: expected {}, computed {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.expected,
            self.computed
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub checks: Vec<OracleCheck>,
}

impl OracleReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &OracleCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

fn rat(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

fn check(name: &str, expected: impl fmt::Display, computed: impl fmt::Display, pass: bool) -> OracleCheck {
    OracleCheck {
        name: name.into(),
        expected: expected.to_string(),
        computed: computed.to_string(),
        pass,
    }
}

/// Scenery 2 4 3 2 4 5 1 5 3 on `[-4, 4]`, simple walk, `mu` uniform on `{1, 3}`, `r = 4`.
fn worked_example_checks(ev: &dyn Evolver, out: &mut Vec<OracleCheck>) {
    let half = rat(1, 2);
    let mu = StateDistribution::from_points(&[(1, half.clone()), (3, half)]);
    let law = ev.evolve_exact(&mu, &lazy_simple_exact(&BigRational::zero()), 4);
    let target = law.mass(5);
    let escape = law.mass_outside(-4, 5);
    let margin = (target.clone() - escape.clone()) / rat(2, 1);
    out.push(check("worked example P(S_4 = 5), exact", rat(5, 32), &target, target == rat(5, 32)));
    out.push(check(
        "worked example P(S_4 not in [-4, 5]), exact",
        rat(1, 32),
        &escape,
        escape == rat(1, 32),
    ));
    out.push(check("worked example margin, exact", rat(1, 16), &margin, margin == rat(1, 16)));

    let mu = StateDistribution::from_points(&[(1, 0.5), (3, 0.5)]);
    let simple = IncrementDistribution::lazy_simple(0.0).expect("valid");
    let law = ev.evolve_f64(&mu, &simple.support(), 4);
    let target = law.mass(5);
    let escape = law.mass_outside(-4, 5);
    let margin = (target - escape) / 2.0;
    for (name, want, got) in [
        ("worked example P(S_4 = 5), float", 5.0 / 32.0, target),
        ("worked example P(S_4 not in [-4, 5]), float", 1.0 / 32.0, escape),
        ("worked example margin, float", 1.0 / 16.0, margin),
    ] {
        out.push(check(name, want, got, (want - got).abs() <= 1e-12));
    }
}

fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `P(S_t = x)` for the lazy simple walk from 0: a sum over the number `s`
/// of zero steps, with `(t - s + x) / 2` up-steps among the rest.
pub fn lazy_simple_closed_form(epsilon: f64, t: u64, x: i64) -> f64 {
    let gamma = (1.0 - epsilon) / 2.0;
    let mut total = 0.0;
    for s in 0..=t {
        let moves = (t - s) as i64;
        if x.abs() > moves || (moves + x) % 2 != 0 {
            continue;
        }
        let ups = ((moves + x) / 2) as u64;
        total += binomial(t, s) * binomial(t - s, ups) * epsilon.powi(s as i32) * gamma.powi(moves as i32);
    }
    total
}

fn closed_form_check(ev: &dyn Evolver, out: &mut Vec<OracleCheck>) {
    let mut worst: f64 = 0.0;
    for eps in [0.0, 0.1, 0.3] {
        let d = IncrementDistribution::lazy_simple(eps).expect("valid");
        for t in 0..=12u64 {
            let law = ev.evolve_f64(&StateDistribution::point(0), &d.support(), t as usize);
            for x in -(t as i64) - 1..=t as i64 + 1 {
                worst = worst.max((law.mass(x) - lazy_simple_closed_form(eps, t, x)).abs());
            }
        }
    }
    out.push(check(
        "lazy simple law vs double binomial sum, t <= 12, max abs error",
        "<= 1e-10",
        format!("{worst:.3e}"),
        worst <= 1e-10,
    ));
}

fn decay_ratio_check(ev: &dyn Evolver, out: &mut Vec<OracleCheck>) {
    let d = IncrementDistribution::lazy_simple(0.0).expect("valid");
    let mut law = StateDistribution::point(0);
    let mut worst = f64::NEG_INFINITY;
    let mut cells = 0;
    for t in 0..=40usize {
        if t > 0 {
            law = ev.evolve_f64(&law, &d.support(), 1);
        }
        for x in 0..=t as i64 {
            let den = law.mass(x);
            if den == 0.0 {
                continue;
            }
            let bound = (t as f64 - x as f64) / (t as f64 + x as f64 + 1.0);
            worst = worst.max(law.mass(x + 1) / den - bound);
            cells += 1;
        }
    }
    out.push(check(
        &format!("simple walk decay ratio P(S_t = x + 1) / P(S_t = x) <= (t - x) / (t + x + 1), {cells} cells"),
        "worst excess <= 1e-12",
        format!("{worst:.3e}"),
        worst <= 1e-12,
    ));
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma2Row {
    pub n: usize,
    pub delta: String,
    pub max_jump: i64,
    pub count: u128,
    pub enumerated: Option<u64>,
    pub bound: f64,
    pub within: bool,
}

/// Counts δ-paths on a grid and compares them with `2^{n(1 + H(δ) + 3δ)}`.
/// Exhaustive enumeration is cross-checked against the DP count when `enumerate`.
pub fn lemma2_table(ns: &[usize], deltas: &[Delta], jumps: &[i64], enumerate: bool) -> Result<Vec<Lemma2Row>> {
    let mut rows = Vec::new();
    for &n in ns {
        for &delta in deltas {
            for &max_jump in jumps {
                let paths = DeltaPaths::new(n, delta, 0, max_jump)?;
                let count = paths.count();
                let enumerated = enumerate.then(|| paths.enumerate_count());
                let bound = lemma2_bound(n, delta.to_f64().unwrap_or(f64::NAN), Lemma2Variant::Standard);
                rows.push(Lemma2Row {
                    n,
                    delta: delta.to_string(),
                    max_jump,
                    count,
                    enumerated,
                    bound,
                    within: count as f64 <= bound,
                });
            }
        }
    }
    Ok(rows)
}

fn lemma2_checks(out: &mut Vec<OracleCheck>) {
    let deltas = [Delta::new(1, 5), Delta::new(1, 4), Delta::new(1, 3)];
    let rows = lemma2_table(&[6, 8], &deltas, &[2, 3], true).expect("n within enumeration limit");
    let over: Vec<String> = rows
        .iter()
        .filter(|r| !r.within)
        .map(|r| format!("n={} delta={} jump={}", r.n, r.delta, r.max_jump))
        .collect();
    out.push(check(
        &format!("Lemma 2 count <= 2^(n(1 + H(delta) + 3 delta)), {} cells", rows.len()),
        "no cell over the bound",
        if over.is_empty() { "none".to_string() } else { over.join("; ") },
        over.is_empty(),
    ));
    let mismatched = rows.iter().filter(|r| r.enumerated != Some(r.count as u64)).count();
    out.push(check("delta-path DP count vs enumeration", 0, mismatched, mismatched == 0));
    let small = DeltaPaths::new(8, Delta::new(1, 10), 0, 3).expect("valid").count();
    out.push(check("delta-path count with delta n < 1, n = 8", 256, small, small == 256));
}

fn total_mass_check(ev: &dyn Evolver, out: &mut Vec<OracleCheck>) {
    let eps = rat(1, 5);
    let law = ev.evolve_exact(&StateDistribution::point(0), &lazy_simple_exact(&eps), 10);
    let total = law.total();
    out.push(check("lazy walk eps = 1/5 total mass at t = 10, exact", 1, &total, total.is_one()));
}

pub fn verify_oracles(ev: &dyn Evolver) -> OracleReport {
    let mut checks = Vec::new();
    worked_example_checks(ev, &mut checks);
    total_mass_check(ev, &mut checks);
    closed_form_check(ev, &mut checks);
    decay_ratio_check(ev, &mut checks);
    lemma2_checks(&mut checks);
    OracleReport { checks }
}
