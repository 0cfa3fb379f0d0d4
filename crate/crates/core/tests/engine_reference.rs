//! The streaming trial engine against a reference built from whole vectors.

use num_rational::Ratio;
use rand::Rng;
use scenery_core::engine::{run_point_trial, run_whole_trial, MuSource, Outcome, TrialConfig};
use scenery_core::events::{eval_b, eval_c, eval_d, eval_f};
use scenery_core::observe::{observe, oracle_stops, pattern_stops, positions_at};
use scenery_core::paths::{check_delta_path, PathFunction};
use scenery_core::reconstruct::params::{derive_params, ThresholdProfile};
use scenery_core::reconstruct::point::offset_counts;
use scenery_core::scenery::IidScenery;
use scenery_core::seed::aux_rng;
use scenery_core::walk::{simulate, IncrementDistribution};

fn cfg(walk: IncrementDistribution, n: usize, delta: Ratio<i64>) -> TrialConfig {
    TrialConfig::new(
        walk,
        n,
        delta,
        ThresholdProfile {
            horizon_cap: 30_000,
            ..ThresholdProfile::default()
        },
    )
}

fn compare(cfg: &TrialConfig, seed: u64) {
    let got = run_point_trial(cfg, seed).unwrap();

    let n = cfg.n as i64;
    let source = IidScenery::new(seed);
    let known = source.window(-n, n);
    let params = derive_params(cfg.n, cfg.delta, &known, &cfg.profile).unwrap();
    let horizon = params.horizon_t as usize;
    let run = simulate(&cfg.walk, 0, horizon + params.offset_r, seed);
    let reach = run.positions.iter().map(|x| x.abs()).max().unwrap() + 64;
    let truth = source.window(-reach.max(cfg.b_bound() as i64 + 64), reach.max(cfg.b_bound() as i64 + 64));
    let chi = observe(&truth, &run).unwrap();

    let tau = pattern_stops(&chi, &params.pattern_w, horizon);
    let nu = oracle_stops(&run, &chi, &params.pattern_w, cfg.n, horizon);
    assert_eq!(got.events.stops_tau, tau.len() as u64);
    assert_eq!(got.events.stops_nu, nu.len() as u64);
    assert_eq!(got.events.tau_equals_nu, tau == nu);
    assert_eq!(got.nu_end_positions, positions_at(&run, &nu));

    let counts = offset_counts(&chi, &params);
    match &got.score {
        Some(score) => {
            let total: u64 = counts.iter().sum();
            assert_eq!(score.samples, total);
            for e in 0..5 {
                assert_eq!(score.p_hat[e], counts[e] as f64 / total as f64);
            }
        }
        None => assert_eq!(counts, [0; 5]),
    }
    assert_eq!(got.truth, truth.color(n + 1).unwrap());
    assert_eq!(got.outcome == Outcome::NoData, tau.is_empty());

    let mut head = run.clone();
    head.positions.truncate(horizon + 1);
    assert_eq!(got.events.b, eval_b(&head, cfg.b_bound()));
    assert_eq!(got.events.d, eval_d(&head, cfg.n, cfg.delta));
    assert_eq!(got.events.c, eval_c(&nu, cfg.n, cfg.profile.c_base));
    let f = eval_f(&truth, &params, cfg.b_bound(), cfg.walk.max_jump()).unwrap();
    assert_eq!(got.events.f, f.holds);

    if got.events.d {
        let mut rng = aux_rng(seed);
        for _ in 0..100 {
            let s = rng.gen_range(cfg.n..=horizon);
            let p = PathFunction::from_positions(&head.positions[s - cfg.n..=s]);
            assert!(check_delta_path(&p, cfg.delta).is_delta);
        }
    }
    if got.events.b && got.events.d && got.events.f {
        assert!(got.events.tau_equals_nu, "seed {seed}");
    }
}

#[test]
fn lazy_walk_matches_reference() {
    let c = cfg(IncrementDistribution::lazy_simple(0.1).unwrap(), 5, Ratio::new(1, 64));
    for seed in 0..25 {
        compare(&c, seed);
    }
}

#[test]
fn jump_walk_matches_reference() {
    let walk = IncrementDistribution::geometric_tail(
        0.1,
        1.5,
        IncrementDistribution::min_feasible_p_zero_frac(1.5, 6),
        6,
    )
    .unwrap();
    let c = cfg(walk, 4, Ratio::new(1, 64));
    for seed in 100..115 {
        compare(&c, seed);
    }
}

#[test]
fn pinned_walk_matches_reference() {
    let c = TrialConfig::new(
        IncrementDistribution::lazy_simple(0.02).unwrap(),
        12,
        Ratio::new(1, 64),
        ThresholdProfile {
            horizon_cap: 30_000,
            ..ThresholdProfile::default()
        },
    );
    for seed in 200..210 {
        compare(&c, seed);
    }
}

#[test]
fn whole_trial_levels_repeat_point_trials_on_truth() {
    let c = cfg(IncrementDistribution::lazy_simple(0.1).unwrap(), 4, Ratio::new(1, 64));
    for seed in 0..6 {
        let whole = run_whole_trial(&c, 4, 5, seed).unwrap();
        let point = run_point_trial(&c, seed).unwrap();
        assert_eq!(whole.levels.len(), 1);
        assert_eq!(whole.levels[0].right, point);
        assert_eq!(point.mu_source, MuSource::Exact);
    }
}

#[test]
fn simple_walk_matches_reference() {
    let c = cfg(IncrementDistribution::lazy_simple(0.0).unwrap(), 5, Ratio::new(1, 64));
    for seed in 300..320 {
        compare(&c, seed);
        assert!(run_point_trial(&c, seed).unwrap().events.d);
    }
}
