//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured numbers (run with `--nocapture` to see them
//! for passing tests).
//!
//! The heavy criteria run the bundled simulation designs at a reduced but
//! fixed scale; every tolerance is pinned here, not tuned at runtime.

#![allow(clippy::type_complexity)]

use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::Instant;

use distboost_core::baselearner::{self, BaseLearnerSpec, Dataset};
use distboost_core::dist::{self, Family, PredictorVector};
use distboost_core::engine::{self, BoostConfig, Booster, Method, Mstop};
use distboost_core::simgen::{
    self, generate, ConvergenceSettings, Scenario, ScenarioId, SpeedSettings, SweepSettings,
};
use distboost_core::stabsel::{self, GivenPair, StabSelConfig};
use distboost_core::tune::{self, ResamplingKind, ResamplingPlan};
use rand::Rng;

fn pass(criterion: usize, details: &str) {
    println!("[ACCEPTANCE] criterion {criterion:2}: PASS — {details}");
}

// ---------------------------------------------------------------------------
// 1. Gradient oracle suite
// ---------------------------------------------------------------------------

fn nll_single(family: Family, y: f64, eta: &[f64]) -> f64 {
    let etas: Vec<PredictorVector> = eta
        .iter()
        .enumerate()
        .map(|(k, &v)| PredictorVector::constant(k, v, 1))
        .collect();
    dist::nll(family, &[y], &etas).unwrap()
}

#[test]
fn acceptance_01_gradient_oracle_suite() {
    let started = Instant::now();
    let mut checked = 0usize;
    for family in [Family::Normal, Family::NegBin, Family::Zinb] {
        let mut rng = distboost_core::stream_rng(101, family.n_params() as u64);
        for param in 0..family.n_params() {
            for _ in 0..100 {
                let (y, eta): (f64, Vec<f64>) = match family {
                    Family::Normal => (
                        rng.random_range(-3.0..3.0),
                        vec![rng.random_range(-3.0..3.0), rng.random_range(-1.5..1.5)],
                    ),
                    Family::NegBin => (
                        rng.random_range(0u64..=25) as f64,
                        vec![rng.random_range(-1.5..2.0), rng.random_range(-1.5..1.0)],
                    ),
                    Family::Zinb => (
                        if rng.random_bool(0.3) {
                            0.0
                        } else {
                            rng.random_range(0u64..=25) as f64
                        },
                        vec![
                            rng.random_range(-1.5..2.0),
                            rng.random_range(-1.5..1.0),
                            rng.random_range(-2.0..2.0),
                        ],
                    ),
                };
                let etas: Vec<PredictorVector> = eta
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| PredictorVector::constant(k, v, 1))
                    .collect();
                let analytic =
                    dist::negative_gradient(family, &[y], &etas, param).unwrap().values[0];

                let h = 1e-6;
                let mut up = eta.clone();
                let mut down = eta.clone();
                up[param] += h;
                down[param] -= h;
                let fd = -(nll_single(family, y, &up) - nll_single(family, y, &down))
                    / (2.0 * h);

                let abs = (analytic - fd).abs();
                let rel = abs / analytic.abs().max(fd.abs()).max(1e-300);
                assert!(
                    rel <= 1e-6 || abs <= 1e-8,
                    "{family:?} param {param}: analytic {analytic} vs fd {fd} (y={y}, eta={eta:?})"
                );
                checked += 1;
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    pass(
        1,
        &format!("{checked} gradient checks at rel <= 1e-6 in {elapsed:.2?}"),
    );
}

// ---------------------------------------------------------------------------
// 2. Convergence on the fixed-coefficient design
// ---------------------------------------------------------------------------

#[test]
fn acceptance_02_convergence_recovers_the_true_coefficients() {
    let started = Instant::now();
    let settings = ConvergenceSettings {
        n: 500,
        replications: 20,
        total_iterations: 1500,
        step_length: 0.1,
        seed: 4242,
    };
    let rows = simgen::run_convergence(&settings).unwrap();

    // mean estimate per (method, parameter, covariate)
    let mut sums: BTreeMap<(&str, usize, usize), (f64, f64, usize)> = BTreeMap::new();
    for row in &rows {
        let entry = sums
            .entry((row.method.name(), row.param_index, row.covariate_index))
            .or_insert((0.0, row.truth, 0));
        entry.0 += row.estimate;
        entry.2 += 1;
    }
    let expected_mu = [(0, 1.0), (1, 2.0), (2, 0.5), (3, -1.0)];
    let expected_sigma = [(2, 0.5), (3, 0.25), (4, -0.25), (5, -0.5)];
    let mut worst: f64 = 0.0;
    for method in ["cyclical", "inner", "outer"] {
        for (param, expected) in [(0usize, &expected_mu[..]), (1, &expected_sigma[..])] {
            for &(cov, truth) in expected {
                let (sum, recorded_truth, count) = sums[&(method, param, cov)];
                assert_eq!(recorded_truth, truth);
                let mean = sum / count as f64;
                let err = (mean - truth).abs();
                worst = worst.max(err);
                assert!(
                    err <= 0.1,
                    "{method} param {param} x{}: mean {mean:.4} vs truth {truth}",
                    cov + 1
                );
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    pass(
        2,
        &format!(
            "all 8 coefficients within ±0.1 for 3 methods (worst |error| {worst:.4}) in {elapsed:.2?}"
        ),
    );
}

// ---------------------------------------------------------------------------
// 3 & 4. Risk-trace comparisons on the 0-noise design
// ---------------------------------------------------------------------------

fn speed_traces() -> &'static Vec<simgen::SpeedRow> {
    static TRACES: OnceLock<Vec<simgen::SpeedRow>> = OnceLock::new();
    TRACES.get_or_init(|| {
        let settings = SpeedSettings {
            n: 500,
            replications: 20,
            noise_levels: vec![0],
            total_updates: 500,
            step_length: 0.1,
            seed: 777,
        };
        simgen::run_speed(&settings).unwrap()
    })
}

fn trace_of(rows: &[simgen::SpeedRow], method: Method) -> BTreeMap<usize, f64> {
    rows.iter()
        .filter(|r| r.method == method)
        .map(|r| (r.total_updates, r.mean_risk))
        .collect()
}

#[test]
fn acceptance_03_inner_and_outer_share_the_risk_profile() {
    let started = Instant::now();
    let rows = speed_traces();
    let inner = trace_of(rows, Method::NoncyclicalInner);
    let outer = trace_of(rows, Method::NoncyclicalOuter);
    assert_eq!(inner.len(), 501);
    assert_eq!(outer.len(), 501);
    let mut worst: f64 = 0.0;
    for (updates, inner_risk) in &inner {
        let outer_risk = outer[updates];
        let rel = (inner_risk - outer_risk).abs() / outer_risk.abs().max(1e-12);
        worst = worst.max(rel);
        assert!(
            rel <= 0.02,
            "at {updates} updates: inner {inner_risk:.4} vs outer {outer_risk:.4}"
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    pass(
        3,
        &format!("max relative gap {worst:.2e} over 501 trace points in {elapsed:.2?}"),
    );
}

#[test]
fn acceptance_04_noncyclical_converges_at_least_as_fast() {
    let rows = speed_traces();
    let inner = trace_of(rows, Method::NoncyclicalInner);
    let cyclical = trace_of(rows, Method::Cyclical);
    let mut checked = 0usize;
    for (updates, cyc_risk) in &cyclical {
        if *updates > 500 {
            continue;
        }
        let non_risk = inner[updates];
        assert!(
            non_risk <= cyc_risk * (1.0 + 1e-12) + 1e-9,
            "at {updates} updates: noncyclical {non_risk:.6} vs cyclical {cyc_risk:.6}"
        );
        checked += 1;
    }
    // the mean training-risk traces are non-increasing for all three methods
    for method in [Method::Cyclical, Method::NoncyclicalInner, Method::NoncyclicalOuter] {
        let trace = trace_of(rows, method);
        let risks: Vec<f64> = trace.values().copied().collect();
        for w in risks.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "{method:?} mean trace increased");
        }
    }
    pass(
        4,
        &format!("noncyclical mean risk <= cyclical at all {checked} comparable counts; all mean traces non-increasing"),
    );
}

// ---------------------------------------------------------------------------
// 5. Tuning cost asymmetry
// ---------------------------------------------------------------------------

#[test]
fn acceptance_05_tuning_cost_counters() {
    let scenario = Scenario::new(ScenarioId::S1A, 100, 0, 2024);
    let (data, _) = generate(&scenario);
    let folds = 3;
    let plan = ResamplingPlan::new(ResamplingKind::SubsampleHalf, folds, 55).unwrap();

    let base = BoostConfig {
        method: Method::NoncyclicalInner,
        step_length: 0.1,
        mstop: Mstop::Total(0),
        family: Family::Normal,
        learners: engine::linear_learners(2, data.n_columns()),
    };

    let scalar_grid = tune::make_grid(300, 10, 1).unwrap();
    let noncyc = tune::cv_risk(&base, &data, &plan, &scalar_grid).unwrap();
    assert_eq!(noncyc.cost.path_fits, folds, "one path fit per fold");

    let mut cyclical = base.clone();
    cyclical.method = Method::Cyclical;
    let grid = tune::make_grid(300, 10, 2).unwrap();
    assert_eq!(grid.len(), 100, "length-10 axis squared");
    let cyc = tune::cv_risk(&cyclical, &data, &plan, &grid).unwrap();
    assert_eq!(
        cyc.cost.grid_evaluations,
        folds * grid.len(),
        "every grid point evaluated in every fold"
    );
    assert!(cyc.cost.path_fits > noncyc.cost.path_fits);
    pass(
        5,
        &format!(
            "noncyclical {} path fits vs cyclical {} grid evaluations (B = {folds}, |grid| = {})",
            noncyc.cost.path_fits,
            cyc.cost.grid_evaluations,
            grid.len()
        ),
    );
}

// ---------------------------------------------------------------------------
// 6 & 7. Stability selection: error control and recovery
// ---------------------------------------------------------------------------

fn stabsel_replication(
    rep: u64,
    q: usize,
    pi_thr: f64,
    mstop_cap: usize,
) -> (stabsel::StabSelResult, std::collections::BTreeSet<(usize, usize)>) {
    let scenario = Scenario::new(ScenarioId::S1A, 500, 44, 9_000 + rep);
    let (data, truth) = generate(&scenario);
    let effective_p = 2 * scenario.p_total;
    let triple =
        stabsel::resolve_triple(GivenPair::QAndPiThr { q, pi_thr }, effective_p).unwrap();
    let config = StabSelConfig::new(triple, 50, mstop_cap, 31_000 + rep).unwrap();
    let boost = BoostConfig {
        method: Method::NoncyclicalInner,
        step_length: 0.1,
        mstop: Mstop::Total(0),
        family: Family::Normal,
        learners: engine::linear_learners(2, scenario.p_total),
    };
    let result = stabsel::run_stabsel(&config, &boost, &data).unwrap();
    (result, truth)
}

#[test]
fn acceptance_06_false_positives_stay_under_the_bound() {
    let started = Instant::now();
    let replications = 20;
    let bound = stabsel::pfer_bound(8, 0.9, 100);
    assert!((bound - 0.8).abs() < 1e-12);

    let mut fp_sum = 0usize;
    let mut fp_beyond = 0usize;
    for rep in 0..replications {
        let (result, truth) = stabsel_replication(rep, 8, 0.9, 1000);
        assert_eq!(result.effective_p, 100);
        let stable = result.stable_set_at(0.9);
        fp_sum += stable.difference(&truth).count();
        let tighter = result.stable_set_at(0.95);
        fp_beyond += tighter.difference(&truth).count();
        // nestedness makes FP non-increasing beyond 0.9 automatically
        assert!(tighter.is_subset(&stable));
    }
    let mean_fp = fp_sum as f64 / replications as f64;
    let mean_fp_beyond = fp_beyond as f64 / replications as f64;
    assert!(
        mean_fp <= bound,
        "mean FP {mean_fp:.3} exceeds the bound {bound}"
    );
    assert!(
        mean_fp_beyond <= 0.1,
        "mean FP at pi = 0.95 is {mean_fp_beyond:.3}, expected ~0"
    );
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1800.0, "took {elapsed:?}");
    pass(
        6,
        &format!(
            "mean FP {mean_fp:.3} <= bound {bound:.3} at pi 0.9; {mean_fp_beyond:.3} at pi 0.95 ({replications} replications, {elapsed:.2?})"
        ),
    );
}

#[test]
fn acceptance_07_true_positive_recovery() {
    let started = Instant::now();
    let replications = 20;
    let mut tp_sum = 0usize;
    for rep in 0..replications {
        let (result, truth) = stabsel_replication(100 + rep, 25, 0.55, 1500);
        let stable = result.stable_set_at(0.55);
        tp_sum += stable.intersection(&truth).count();
    }
    let mean_tp = tp_sum as f64 / replications as f64;
    assert!(
        mean_tp >= 7.0,
        "mean TP {mean_tp:.2} of 8 informative pairs"
    );
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1800.0, "took {elapsed:?}");
    pass(
        7,
        &format!("mean TP {mean_tp:.2} of 8 at q = 25, pi 0.55 ({replications} replications, {elapsed:.2?})"),
    );
}

// ---------------------------------------------------------------------------
// 8. Monotone threshold sweeps
// ---------------------------------------------------------------------------

#[test]
fn acceptance_08_sweeps_are_monotone_in_the_threshold() {
    let settings = SweepSettings {
        scenario: ScenarioId::S1A,
        methods: vec![Method::NoncyclicalInner, Method::Cyclical],
        replications: 3,
        n: 300,
        q_values: vec![8],
        p_values: vec![50],
        pi_grid: simgen::default_pi_grid(),
        subsamples: 25,
        mstop_cap: 600,
        step_length: 0.1,
        seed: 6060,
    };
    let rows = simgen::run_stabsel_sweep(&settings).unwrap();
    assert_eq!(rows.len(), 3 * 2 * 45);

    let mut cells: BTreeMap<(usize, &str), Vec<(f64, usize, usize)>> = BTreeMap::new();
    for row in &rows {
        cells
            .entry((row.replication, row.method.name()))
            .or_default()
            .push((row.pi_thr, row.tp, row.fp));
    }
    for ((rep, method), mut cell) in cells {
        cell.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in cell.windows(2) {
            assert!(
                w[1].1 <= w[0].1 && w[1].2 <= w[0].2,
                "rep {rep} {method}: TP/FP increased from pi {} to {}",
                w[0].0,
                w[1].0
            );
        }
    }
    pass(8, "TP and FP non-increasing over all 45 thresholds, 3 reps x 2 methods");
}

// ---------------------------------------------------------------------------
// 9. PFER arithmetic
// ---------------------------------------------------------------------------

#[test]
fn acceptance_09_pfer_arithmetic() {
    let t = stabsel::resolve_triple(GivenPair::QAndPfer { q: 20, pfer: 5.0 }, 100).unwrap();
    assert!((t.pi_thr - 0.9).abs() < 1e-12);

    let t = stabsel::resolve_triple(GivenPair::QAndPiThr { q: 8, pi_thr: 0.9 }, 100).unwrap();
    assert!((t.pfer - 0.8).abs() < 1e-12);

    assert!(matches!(
        stabsel::resolve_triple(GivenPair::QAndPfer { q: 35, pfer: 6.0 }, 96),
        Err(stabsel::StabSelError::InfeasiblePiThr { .. })
    ));
    assert!(matches!(
        stabsel::resolve_triple(GivenPair::QAndPiThr { q: 5, pi_thr: 0.5 }, 100),
        Err(stabsel::StabSelError::InvalidPiThr { .. })
    ));
    pass(9, "triple resolution and infeasibility checks exact");
}

// ---------------------------------------------------------------------------
// 10. Brute-force selection oracle
// ---------------------------------------------------------------------------

fn tiny_count_data(seed: u64) -> Dataset {
    let scenario = Scenario::new(ScenarioId::S3A, 20, 0, seed);
    let (full, _) = generate(&scenario);
    // keep three covariates
    let columns: Vec<Vec<f64>> = (0..3).map(|j| full.column(j).to_vec()).collect();
    let names: Vec<String> = (1..=3).map(|j| format!("x{j}")).collect();
    Dataset::new(columns, names, full.response().to_vec()).unwrap()
}

#[test]
fn acceptance_10_brute_force_selection_oracle() {
    // Outer-loss selection: every executed update must equal the exhaustive
    // minimum of post-update risk over all (parameter, learner) pairs.
    let data = tiny_count_data(31415);
    let family = Family::Zinb;
    let config = BoostConfig {
        method: Method::NoncyclicalOuter,
        step_length: 0.1,
        mstop: Mstop::Total(15),
        family,
        learners: engine::linear_learners(3, 3),
    };
    let mut booster = Booster::new(config, &data).unwrap();
    let mut outer_checked = 0usize;
    while !booster.is_finished() {
        let mut best: Option<(f64, usize, usize)> = None;
        for k in 0..family.n_params() {
            let u =
                dist::negative_gradient(family, data.response(), &booster.state().etas, k)
                    .unwrap();
            for j in 0..3 {
                let fitted = baselearner::fit(BaseLearnerSpec::linear(j), &data, &u).unwrap();
                let mut etas = booster.state().etas.clone();
                let x = data.column(j);
                for (e, &xi) in etas[k].values.iter_mut().zip(x) {
                    *e += 0.1 * (fitted.intercept + fitted.slope * xi);
                }
                let risk = dist::nll(family, data.response(), &etas).unwrap();
                let improves = match best {
                    None => true,
                    Some((br, bk, bj)) => {
                        risk < br || (risk == br && (k, j) < (bk, bj))
                    }
                };
                if improves {
                    best = Some((risk, k, j));
                }
            }
        }
        booster.step().unwrap();
        let record = *booster.state().selection_log.last().unwrap();
        let (_, bk, bj) = best.unwrap();
        assert_eq!(
            (record.param_index, record.covariate_index),
            (bk, bj),
            "outer update at iteration {}",
            record.iteration
        );
        outer_checked += 1;
    }
    assert_eq!(outer_checked, 15);

    // Cyclical selection: every per-parameter pick must equal the exhaustive
    // RSS minimum; the replay tracks the within-iteration predictor updates.
    let data = tiny_count_data(2718);
    let family = Family::Zinb;
    let config = BoostConfig {
        method: Method::Cyclical,
        step_length: 0.1,
        mstop: Mstop::PerParameter(vec![6, 6, 6]),
        family,
        learners: engine::linear_learners(3, 3),
    };
    let state = engine::fit_cyclical(config, &data).unwrap();
    assert_eq!(state.selection_log.len(), 18);

    let offsets = dist::offsets(family, data.response()).unwrap();
    let mut etas: Vec<PredictorVector> = offsets
        .iter()
        .enumerate()
        .map(|(k, &v)| PredictorVector::constant(k, v, data.n_rows()))
        .collect();
    for record in &state.selection_log {
        let k = record.param_index;
        let u = dist::negative_gradient(family, data.response(), &etas, k).unwrap();
        let mut best: Option<(f64, usize)> = None;
        for j in 0..3 {
            let fitted = baselearner::fit(BaseLearnerSpec::linear(j), &data, &u).unwrap();
            let improves = match best {
                None => true,
                Some((brss, bj)) => fitted.rss < brss || (fitted.rss == brss && j < bj),
            };
            if improves {
                best = Some((fitted.rss, j));
            }
        }
        assert_eq!(
            best.unwrap().1,
            record.covariate_index,
            "cyclical pick at iteration {} parameter {k}",
            record.iteration
        );
        // replay the engine's own update to stay on its state sequence
        let x = data.column(record.covariate_index);
        for (e, &xi) in etas[k].values.iter_mut().zip(x) {
            *e += state.step_length * (record.intercept + record.slope * xi);
        }
    }
    pass(
        10,
        "15 outer updates and 18 cyclical picks match exhaustive minimization exactly",
    );
}
