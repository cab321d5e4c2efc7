//! Simulation designs with known truth, plus the experiment drivers that
//! produce long-format result tables.
//!
//! Six variable-selection scenarios pair the three families with a balanced
//! (A) or unbalanced (B) split of six informative covariates, and the `Conv`
//! design carries the fixed coefficients used by the convergence and
//! convergence-speed experiments. Covariates are i.i.d. uniform on (−1, 1);
//! informative ones are always the first six columns.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::{Distribution as _, Gamma, Normal as NormalDist, Poisson};

use crate::baselearner::{BaseLearnerError, Dataset};
use crate::dist::{Family, Link};
use crate::engine::{
    self, BoostConfig, EngineError, Method, Mstop,
};
use crate::stabsel::{
    self, GivenPair, StabSelConfig, StabSelError,
};
use crate::tune::{self, ResamplingKind, ResamplingPlan, TuneError};
use crate::{math, par, rng};

pub const ALL_METHODS: [Method; 3] = [
    Method::Cyclical,
    Method::NoncyclicalInner,
    Method::NoncyclicalOuter,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioId {
    /// Fixed-coefficient normal design of the convergence experiments.
    Conv,
    S1A,
    S1B,
    S2A,
    S2B,
    S3A,
    S3B,
}

impl ScenarioId {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioId::Conv => "conv",
            ScenarioId::S1A => "1a",
            ScenarioId::S1B => "1b",
            ScenarioId::S2A => "2a",
            ScenarioId::S2B => "2b",
            ScenarioId::S3A => "3a",
            ScenarioId::S3B => "3b",
        }
    }

    pub fn family(self) -> Family {
        match self {
            ScenarioId::Conv | ScenarioId::S1A | ScenarioId::S1B => Family::Normal,
            ScenarioId::S2A | ScenarioId::S2B => Family::NegBin,
            ScenarioId::S3A | ScenarioId::S3B => Family::Zinb,
        }
    }

    /// 1-based informative covariates per distribution parameter.
    fn supports(self) -> Vec<Vec<usize>> {
        match self {
            ScenarioId::Conv | ScenarioId::S1A | ScenarioId::S2A => {
                alloc::vec![alloc::vec![1, 2, 3, 4], alloc::vec![3, 4, 5, 6]]
            }
            ScenarioId::S1B | ScenarioId::S2B => {
                alloc::vec![alloc::vec![1, 2, 3, 4, 5], alloc::vec![6]]
            }
            ScenarioId::S3A => alloc::vec![
                alloc::vec![1, 2, 3],
                alloc::vec![3, 4, 5],
                alloc::vec![1, 5, 6]
            ],
            ScenarioId::S3B => alloc::vec![
                alloc::vec![1, 2, 3, 4, 5],
                alloc::vec![5, 6],
                alloc::vec![6]
            ],
        }
    }
}

/// A named simulation design: family, per-parameter coefficients over the
/// informative covariates, sample size and total covariate count.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: ScenarioId,
    pub family: Family,
    /// Per-parameter map from 0-based covariate index to coefficient.
    pub coefficients: Vec<BTreeMap<usize, f64>>,
    pub n: usize,
    /// Informative plus noise covariates.
    pub p_total: usize,
    pub seed: u64,
}

impl Scenario {
    /// Builds the design with its default coefficients and `p_noise`
    /// additional noise covariates.
    ///
    /// `Conv` uses the fixed values (1, 2, 0.5, −1) for the mean and
    /// (0.5, 0.25, −0.25, −0.5) for the log scale. The other designs only
    /// pin the support, so coefficients default to magnitudes alternating
    /// 0.5/0.3 with the second half of each list negated — small enough to
    /// keep count-family means stable, and freely rescalable without
    /// changing the truth.
    pub fn new(id: ScenarioId, n: usize, p_noise: usize, seed: u64) -> Scenario {
        let coefficients = if id == ScenarioId::Conv {
            alloc::vec![
                BTreeMap::from([(0, 1.0), (1, 2.0), (2, 0.5), (3, -1.0)]),
                BTreeMap::from([(2, 0.5), (3, 0.25), (4, -0.25), (5, -0.5)]),
            ]
        } else {
            id.supports()
                .into_iter()
                .map(|support| {
                    let len = support.len();
                    support
                        .into_iter()
                        .enumerate()
                        .map(|(pos, cov)| {
                            let magnitude = if pos % 2 == 0 { 0.5 } else { 0.3 };
                            let sign = if pos < len.div_ceil(2) { 1.0 } else { -1.0 };
                            (cov - 1, sign * magnitude)
                        })
                        .collect()
                })
                .collect()
        };
        Scenario {
            id,
            family: id.family(),
            coefficients,
            n,
            p_total: 6 + p_noise,
            seed,
        }
    }

    /// The informative (parameter, covariate) pairs.
    pub fn truth_support(&self) -> BTreeSet<(usize, usize)> {
        self.coefficients
            .iter()
            .enumerate()
            .flat_map(|(k, m)| m.keys().map(move |&j| (k, j)))
            .collect()
    }

    /// Rescales every coefficient; the truth support is unchanged.
    pub fn scale_coefficients(&mut self, factor: f64) {
        for m in &mut self.coefficients {
            for v in m.values_mut() {
                *v *= factor;
            }
        }
    }

    /// Link used to turn the linear predictor into the parameter when
    /// drawing responses. The normal-mean predictors of `Conv` and `S1A`
    /// are written on the identity scale; `S1B` keeps its log(mu) equation
    /// verbatim even though the family is normal.
    fn generation_link(&self, param: usize) -> Link {
        match (self.id, param) {
            (ScenarioId::Conv | ScenarioId::S1A, 0) => Link::Identity,
            (ScenarioId::S1B, 0) => Link::Log,
            _ => self.family.links()[param],
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("p = {p} is below the {informative} informative covariates of the design")]
    TooFewCovariates { p: usize, informative: usize },
    #[error("at least one replication is required")]
    NoReplications,
    #[error("total iterations must be positive")]
    NoIterations,
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Tune(#[from] TuneError),
    #[error(transparent)]
    StabSel(#[from] StabSelError),
    #[error(transparent)]
    Data(#[from] BaseLearnerError),
}

/// Draws a dataset from the scenario and returns it with the truth support.
pub fn generate(scenario: &Scenario) -> (Dataset, BTreeSet<(usize, usize)>) {
    let mut rng = rng::stream_rng(scenario.seed, 0);
    let n = scenario.n;
    let p = scenario.p_total;
    let columns: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();

    let k = scenario.family.n_params();
    let mut y = Vec::with_capacity(n);
    let mut params = alloc::vec![0.0f64; k];
    #[allow(clippy::needless_range_loop)] // row index reads several columns
    for i in 0..n {
        for (kk, param) in params.iter_mut().enumerate() {
            let eta: f64 = scenario.coefficients[kk]
                .iter()
                .map(|(&j, &beta)| beta * columns[j][i])
                .sum();
            *param = scenario.generation_link(kk).invert(eta);
        }
        y.push(draw_response(scenario.family, &params, &mut rng));
    }

    let names: Vec<String> = (1..=p).map(|j| alloc::format!("x{j}")).collect();
    let data = Dataset::new(columns, names, y).expect("generated data is finite by construction");
    (data, scenario.truth_support())
}

fn draw_response(family: Family, params: &[f64], rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    match family {
        Family::Normal => NormalDist::new(params[0], params[1])
            .expect("positive sigma")
            .sample(rng),
        Family::NegBin => draw_negbin(params[0], params[1], rng),
        Family::Zinb => {
            if rng.random_bool(params[2]) {
                0.0
            } else {
                draw_negbin(params[0], params[1], rng)
            }
        }
    }
}

/// NB(mu, sigma) draw via the gamma–Poisson mixture:
/// lambda ~ Gamma(shape 1/sigma, scale sigma·mu), y ~ Poisson(lambda).
fn draw_negbin(mu: f64, sigma: f64, rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    let shape = 1.0 / sigma;
    let scale = sigma * mu;
    let lambda = Gamma::new(shape, scale).expect("positive gamma parameters").sample(rng);
    if lambda < 1e-12 {
        return 0.0;
    }
    Poisson::new(lambda).expect("positive rate").sample(rng)
}

fn derive_seed(seed: u64, index: u64) -> u64 {
    rng::stream_rng(seed, index).random()
}

fn fit_method(
    method: Method,
    family: Family,
    data: &Dataset,
    total_iterations: usize,
    step_length: f64,
) -> Result<engine::FitState, EngineError> {
    let k = family.n_params();
    let config = BoostConfig {
        method,
        step_length,
        mstop: match method {
            Method::Cyclical => Mstop::PerParameter(alloc::vec![total_iterations / k; k]),
            _ => Mstop::Total(total_iterations),
        },
        family,
        learners: engine::linear_learners(k, data.n_columns()),
    };
    engine::Booster::new(config, data)?.run()
}

// ---------------------------------------------------------------------------
// Convergence experiment
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ConvergenceSettings {
    pub n: usize,
    pub replications: usize,
    /// Total base-learner updates per fit; the cyclical method splits them
    /// evenly across parameters.
    pub total_iterations: usize,
    pub step_length: f64,
    pub seed: u64,
}

impl Default for ConvergenceSettings {
    fn default() -> Self {
        ConvergenceSettings {
            n: 500,
            replications: 20,
            total_iterations: 1500,
            step_length: 0.1,
            seed: 20150520,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientRow {
    pub replication: usize,
    pub method: Method,
    pub param_index: usize,
    pub covariate_index: usize,
    pub estimate: f64,
    pub truth: f64,
}

/// Fits all three methods on fresh `Conv` draws and reports the accumulated
/// slope of every (parameter, covariate) pair.
pub fn run_convergence(settings: &ConvergenceSettings) -> Result<Vec<CoefficientRow>, SimError> {
    if settings.replications == 0 {
        return Err(SimError::NoReplications);
    }
    if settings.total_iterations == 0 {
        return Err(SimError::NoIterations);
    }
    let per_rep: Vec<Result<Vec<CoefficientRow>, SimError>> =
        par::map_indexed(settings.replications, |rep| {
            let scenario = Scenario::new(
                ScenarioId::Conv,
                settings.n,
                0,
                derive_seed(settings.seed, rep as u64),
            );
            let (data, _) = generate(&scenario);
            let mut rows = Vec::new();
            for method in ALL_METHODS {
                let state = fit_method(
                    method,
                    scenario.family,
                    &data,
                    settings.total_iterations,
                    settings.step_length,
                )?;
                for k in 0..scenario.family.n_params() {
                    for j in 0..scenario.p_total {
                        let estimate = state
                            .coefficients
                            .get(&(k, j))
                            .map(|c| c.slope)
                            .unwrap_or(0.0);
                        let truth =
                            scenario.coefficients[k].get(&j).copied().unwrap_or(0.0);
                        rows.push(CoefficientRow {
                            replication: rep,
                            method,
                            param_index: k,
                            covariate_index: j,
                            estimate,
                            truth,
                        });
                    }
                }
            }
            Ok(rows)
        });
    let mut rows = Vec::new();
    for r in per_rep {
        rows.extend(r?);
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Convergence-speed experiment
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SpeedSettings {
    pub n: usize,
    pub replications: usize,
    /// Noise-covariate counts to sweep.
    pub noise_levels: Vec<usize>,
    pub total_updates: usize,
    pub step_length: f64,
    pub seed: u64,
}

impl Default for SpeedSettings {
    fn default() -> Self {
        SpeedSettings {
            n: 500,
            replications: 20,
            noise_levels: alloc::vec![0, 50],
            total_updates: 1000,
            step_length: 0.1,
            seed: 7041776,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedRow {
    pub method: Method,
    pub p_noise: usize,
    /// Base-learner updates spent so far; the cyclical method advances by
    /// one whole iteration (one update per parameter) at a time.
    pub total_updates: usize,
    pub mean_risk: f64,
}

/// Mean training-risk traces against the number of base-learner updates.
pub fn run_speed(settings: &SpeedSettings) -> Result<Vec<SpeedRow>, SimError> {
    if settings.replications == 0 {
        return Err(SimError::NoReplications);
    }
    if settings.total_updates == 0 {
        return Err(SimError::NoIterations);
    }
    // one combo per (noise level, replication); the index doubles as the
    // seed stream
    let combos: Vec<usize> = settings
        .noise_levels
        .iter()
        .flat_map(|&p_noise| core::iter::repeat(p_noise).take(settings.replications))
        .collect();

    type Trace = Vec<(usize, usize, usize, f64)>; // (method idx, p_noise, updates, risk)
    let per_combo: Vec<Result<Trace, SimError>> = par::map_indexed(combos.len(), |ci| {
        let p_noise = combos[ci];
        let scenario = Scenario::new(
            ScenarioId::Conv,
            settings.n,
            p_noise,
            derive_seed(settings.seed, ci as u64),
        );
        let (data, _) = generate(&scenario);
        let k = scenario.family.n_params();
        let mut out = Vec::new();
        for (mi, method) in ALL_METHODS.iter().enumerate() {
            let state = fit_method(
                *method,
                scenario.family,
                &data,
                settings.total_updates,
                settings.step_length,
            )?;
            let stride = if method.is_cyclical() { k } else { 1 };
            for (m, &risk) in state.risk_trace.iter().enumerate() {
                out.push((mi, p_noise, m * stride, risk));
            }
        }
        Ok(out)
    });

    let mut sums: BTreeMap<(usize, usize, usize), (f64, usize)> = BTreeMap::new();
    for traces in per_combo {
        for (mi, p_noise, updates, risk) in traces? {
            let entry = sums.entry((mi, p_noise, updates)).or_insert((0.0, 0));
            entry.0 += risk;
            entry.1 += 1;
        }
    }
    Ok(sums
        .into_iter()
        .map(|((mi, p_noise, updates), (sum, count))| SpeedRow {
            method: ALL_METHODS[mi],
            p_noise,
            total_updates: updates,
            mean_risk: sum / count as f64,
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Stability-selection sweep
// ---------------------------------------------------------------------------

/// Thresholds 0.55, 0.56, …, 0.99. Values are snapped to a 1e-10 lattice so
/// the accumulated step carries no representation dust into result tables.
pub fn default_pi_grid() -> Vec<f64> {
    pi_grid(0.55, 0.99, 0.01)
}

/// Inclusive threshold grid from `from` to `to` in steps of `step`.
pub fn pi_grid(from: f64, to: f64, step: f64) -> Vec<f64> {
    let mut grid = Vec::new();
    let mut i = 0usize;
    loop {
        let v = from + step * i as f64;
        if v > to + 1e-9 {
            break;
        }
        grid.push(math::round(v * 1e10) / 1e10);
        i += 1;
    }
    grid
}

#[derive(Debug, Clone)]
pub struct SweepSettings {
    pub scenario: ScenarioId,
    pub methods: Vec<Method>,
    pub replications: usize,
    pub n: usize,
    pub q_values: Vec<usize>,
    /// Total covariate counts (informative plus noise).
    pub p_values: Vec<usize>,
    pub pi_grid: Vec<f64>,
    pub subsamples: usize,
    pub mstop_cap: usize,
    pub step_length: f64,
    pub seed: u64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            scenario: ScenarioId::S1A,
            methods: alloc::vec![Method::NoncyclicalInner, Method::Cyclical],
            replications: 10,
            n: 500,
            q_values: alloc::vec![8, 15, 25, 50],
            p_values: alloc::vec![50],
            pi_grid: default_pi_grid(),
            subsamples: 50,
            mstop_cap: 1500,
            step_length: 0.1,
            seed: 18130203,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub replication: usize,
    pub scenario: ScenarioId,
    pub method: Method,
    pub p: usize,
    pub q: usize,
    pub pi_thr: f64,
    pub tp: usize,
    pub fp: usize,
    pub pfer_bound: f64,
}

/// True/false positives over the threshold grid. Each (replication, p, q,
/// method) cell runs stability selection once; varying the threshold only
/// re-cuts the stored selection frequencies.
pub fn run_stabsel_sweep(settings: &SweepSettings) -> Result<Vec<SweepRow>, SimError> {
    if settings.replications == 0 {
        return Err(SimError::NoReplications);
    }
    for &p in &settings.p_values {
        if p < 6 {
            return Err(SimError::TooFewCovariates { p, informative: 6 });
        }
    }
    let pi_min = settings
        .pi_grid
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);

    let mut combos = Vec::new();
    for rep in 0..settings.replications {
        for &p in &settings.p_values {
            for &q in &settings.q_values {
                for &method in &settings.methods {
                    combos.push((rep, p, q, method));
                }
            }
        }
    }

    let per_combo: Vec<Result<Vec<SweepRow>, SimError>> =
        par::map_indexed(combos.len(), |ci| {
            let (rep, p, q, method) = combos[ci];
            // one dataset per (replication, p): q and method sweeps see the
            // same draw
            let data_stream = (rep * settings.p_values.len()
                + settings.p_values.iter().position(|&v| v == p).unwrap())
                as u64;
            let scenario = Scenario::new(
                settings.scenario,
                settings.n,
                p - 6,
                derive_seed(settings.seed, data_stream),
            );
            let (data, truth) = generate(&scenario);
            let family = scenario.family;
            let k = family.n_params();
            let effective_p = k * p;

            let triple = stabsel::resolve_triple(
                GivenPair::QAndPiThr {
                    q,
                    pi_thr: pi_min.clamp(0.51, 1.0),
                },
                effective_p,
            )?;
            let config = StabSelConfig::new(
                triple,
                settings.subsamples,
                settings.mstop_cap,
                derive_seed(settings.seed, data_stream),
            )?;
            let boost = BoostConfig {
                method,
                step_length: settings.step_length,
                mstop: Mstop::Total(0),
                family,
                learners: engine::linear_learners(k, p),
            };
            let result = stabsel::run_stabsel(&config, &boost, &data)?;

            let rows = settings
                .pi_grid
                .iter()
                .map(|&pi_thr| {
                    let stable = result.stable_set_at(pi_thr);
                    let tp = stable.intersection(&truth).count();
                    let fp = stable.len() - tp;
                    SweepRow {
                        replication: rep,
                        scenario: settings.scenario,
                        method,
                        p,
                        q,
                        pi_thr,
                        tp,
                        fp,
                        pfer_bound: stabsel::pfer_bound(q, pi_thr, effective_p),
                    }
                })
                .collect();
            Ok(rows)
        });

    let mut rows = Vec::new();
    for r in per_combo {
        rows.extend(r?);
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Tuning-cost benchmark
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct RuntimeSettings {
    /// Benchmarked designs; the paper's pair is a two-parameter (1A) and a
    /// three-parameter (3A) distribution.
    pub scenarios: Vec<ScenarioId>,
    pub n: usize,
    pub folds: usize,
    pub resampling: ResamplingKind,
    /// Per-parameter grid maximum for the cyclical method; the noncyclical
    /// methods get a scalar grid up to `n_params × grid_max`.
    pub grid_max: usize,
    pub grid_length: usize,
    pub step_length: f64,
    pub seed: u64,
}

impl Default for RuntimeSettings {
    fn default() -> Self {
        RuntimeSettings {
            scenarios: alloc::vec![ScenarioId::S1A, ScenarioId::S3A],
            n: 500,
            folds: 25,
            resampling: ResamplingKind::Bootstrap,
            grid_max: 300,
            grid_length: 10,
            step_length: 0.1,
            seed: 1202107,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeRow {
    pub scenario: ScenarioId,
    pub method: Method,
    pub n_params: usize,
    pub grid_points: usize,
    pub path_fits: usize,
    pub grid_evaluations: usize,
    pub best_mstop: Vec<usize>,
    pub best_risk: f64,
}

/// Cross-validation cost accounting for all three methods: the cyclical grid
/// pays per point, the noncyclical methods pay one path per fold.
pub fn run_runtime_benchmark(settings: &RuntimeSettings) -> Result<Vec<RuntimeRow>, SimError> {
    let mut rows = Vec::new();
    for (si, &id) in settings.scenarios.iter().enumerate() {
        let scenario = Scenario::new(id, settings.n, 0, derive_seed(settings.seed, si as u64));
        let (data, _) = generate(&scenario);
        let family = scenario.family;
        let k = family.n_params();
        let plan = ResamplingPlan::new(
            settings.resampling,
            settings.folds,
            derive_seed(settings.seed, 1000 + si as u64),
        )?;
        for method in ALL_METHODS {
            let grid = if method.is_cyclical() {
                tune::make_grid(settings.grid_max, settings.grid_length, k)?
            } else {
                tune::make_grid(k * settings.grid_max, settings.grid_length, 1)?
            };
            let config = BoostConfig {
                method,
                step_length: settings.step_length,
                mstop: Mstop::Total(0),
                family,
                learners: engine::linear_learners(k, scenario.p_total),
            };
            let report = tune::cv_risk(&config, &data, &plan, &grid)?;
            rows.push(RuntimeRow {
                scenario: id,
                method,
                n_params: k,
                grid_points: grid.len(),
                path_fits: report.cost.path_fits,
                grid_evaluations: report.cost.grid_evaluations,
                best_mstop: report.best_point().to_vec(),
                best_risk: report.best_risk(),
            });
        }
    }
    Ok(rows)
}
