//! Out-of-bag search for the stopping iteration.
//!
//! The noncyclical methods have a scalar stopping value, so one boosting path
//! per fold is fitted to the largest grid point and out-of-bag risk is
//! snapshotted as the path passes each grid value — the grid length adds no
//! boosting work. The cyclical method needs a tuple of stopping values per
//! parameter; only the uniform tuples lie on the path of a single run, every
//! other tuple is fitted separately, which is exactly the multi-dimensional
//! cost the noncyclical variants avoid. [`CvCost`] reports both counters.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::baselearner::Dataset;
use crate::dist::{self, PredictorVector};
use crate::engine::{self, BoostConfig, Booster, EngineError, Method, Mstop, SelectionRecord};
use crate::{math, par, rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResamplingKind {
    /// ⌊n/2⌋ rows drawn without replacement per fold.
    SubsampleHalf,
    /// n rows drawn with replacement per fold.
    Bootstrap,
}

#[derive(Debug, Clone)]
pub struct ResamplingPlan {
    pub kind: ResamplingKind,
    pub folds: usize,
    pub seed: u64,
}

impl ResamplingPlan {
    pub fn new(kind: ResamplingKind, folds: usize, seed: u64) -> Result<Self, TuneError> {
        if folds < 2 {
            return Err(TuneError::TooFewFolds { folds });
        }
        Ok(ResamplingPlan { kind, folds, seed })
    }

    /// In-bag and out-of-bag row indices for one fold. The index sets are
    /// disjoint by construction; out-of-bag rows are never drawn.
    pub fn indices(&self, fold: usize, n: usize) -> (Vec<usize>, Vec<usize>) {
        let mut rng = rng::stream_rng(self.seed, fold as u64);
        match self.kind {
            ResamplingKind::SubsampleHalf => {
                let m = n / 2;
                let mut all: Vec<usize> = (0..n).collect();
                for i in 0..m {
                    let j = rng.random_range(i..n);
                    all.swap(i, j);
                }
                let mut in_bag = all[..m].to_vec();
                let mut oob = all[m..].to_vec();
                in_bag.sort_unstable();
                oob.sort_unstable();
                (in_bag, oob)
            }
            ResamplingKind::Bootstrap => {
                let mut drawn = alloc::vec![false; n];
                let mut in_bag: Vec<usize> = (0..n)
                    .map(|_| {
                        let i = rng.random_range(0..n);
                        drawn[i] = true;
                        i
                    })
                    .collect();
                in_bag.sort_unstable();
                let oob: Vec<usize> =
                    (0..n).filter(|&i| !drawn[i]).collect();
                (in_bag, oob)
            }
        }
    }
}

/// Candidate stopping values: tuples (one entry per parameter) for the
/// cyclical method, singletons for the noncyclical methods.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MstopGrid {
    pub points: Vec<Vec<usize>>,
    pub max_per_param: usize,
}

impl MstopGrid {
    /// Builds a grid from explicit points; they must share one arity and be
    /// sorted and unique.
    pub fn from_points(points: Vec<Vec<usize>>) -> Result<Self, TuneError> {
        if points.is_empty() || points[0].is_empty() {
            return Err(TuneError::InvalidGridPoints);
        }
        let arity = points[0].len();
        let consistent = points.iter().all(|p| p.len() == arity);
        let sorted_unique = points.windows(2).all(|w| w[0] < w[1]);
        if !consistent || !sorted_unique {
            return Err(TuneError::InvalidGridPoints);
        }
        let max_per_param = points
            .iter()
            .flat_map(|p| p.iter().copied())
            .max()
            .unwrap_or(0);
        Ok(MstopGrid {
            points,
            max_per_param,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.points.first().map(|p| p.len()).unwrap_or(0)
    }
}

/// Log-spaced stopping-value grid from 1 to `max_per_param`, rounded and
/// deduplicated, expanded to the full Cartesian product across parameters.
/// A maximum below the requested length simply collapses to fewer points.
pub fn make_grid(
    max_per_param: usize,
    length: usize,
    n_params: usize,
) -> Result<MstopGrid, TuneError> {
    if length < 2 || n_params == 0 {
        return Err(TuneError::GridLength { length });
    }
    if max_per_param == 0 {
        return Err(TuneError::GridMaxTooSmall {
            max: max_per_param,
            length,
        });
    }
    let lmax = math::ln(max_per_param as f64);
    let mut axis: Vec<usize> = (0..length)
        .map(|i| math::round(math::exp(lmax * i as f64 / (length - 1) as f64)) as usize)
        .collect();
    *axis.last_mut().expect("length >= 2") = max_per_param;
    axis.dedup();

    let mut points = Vec::with_capacity(axis.len().pow(n_params as u32));
    let mut odometer = alloc::vec![0usize; n_params];
    loop {
        points.push(odometer.iter().map(|&i| axis[i]).collect());
        let mut pos = n_params;
        loop {
            if pos == 0 {
                return MstopGrid::from_points(points);
            }
            pos -= 1;
            odometer[pos] += 1;
            if odometer[pos] < axis.len() {
                break;
            }
            odometer[pos] = 0;
        }
    }
}

/// Boosting work spent by a cross-validation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CvCost {
    /// Boosting paths fitted from the offset state.
    pub path_fits: usize,
    /// Grid points at which out-of-bag risk was evaluated.
    pub grid_evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct CvReport {
    pub grid: MstopGrid,
    /// Mean out-of-bag risk per observation, parallel to `grid.points`.
    pub mean_risks: Vec<f64>,
    /// Index of the risk-minimizing grid point (first on ties).
    pub best_index: usize,
    pub cost: CvCost,
    /// Folds dropped because their in-bag response was degenerate.
    pub dropped_folds: Vec<usize>,
    pub effective_folds: usize,
}

impl CvReport {
    pub fn best_point(&self) -> &[usize] {
        &self.grid.points[self.best_index]
    }

    pub fn best_risk(&self) -> f64 {
        self.mean_risks[self.best_index]
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TuneError {
    #[error("grid needs length >= 2 and at least one parameter, got length {length}")]
    GridLength { length: usize },
    #[error("grid maximum must be positive, got {max} (requested length {length})")]
    GridMaxTooSmall { max: usize, length: usize },
    #[error("grid points must be non-empty, equal-arity, sorted and unique")]
    InvalidGridPoints,
    #[error("grid arity {got} does not fit {method:?} (expected {expected})")]
    GridArity {
        method: Method,
        expected: usize,
        got: usize,
    },
    #[error("resampling needs at least 2 folds, got {folds}")]
    TooFewFolds { folds: usize },
    #[error("all {folds} folds had a degenerate in-bag response")]
    AllFoldsDegenerate { folds: usize },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

enum FoldOutcome {
    Degenerate,
    Evaluated { risks: Vec<f64>, path_fits: usize },
}

/// Mean out-of-bag risk at every grid point plus the risk-minimizing point.
///
/// The `mstop` field of `config` is ignored; the grid decides how far each
/// path runs. Folds whose in-bag response is degenerate are dropped with a
/// warning entry in the report.
pub fn cv_risk(
    config: &BoostConfig,
    data: &Dataset,
    plan: &ResamplingPlan,
    grid: &MstopGrid,
) -> Result<CvReport, TuneError> {
    if plan.folds < 2 {
        return Err(TuneError::TooFewFolds { folds: plan.folds });
    }
    if grid.is_empty() {
        return Err(TuneError::InvalidGridPoints);
    }
    let expected_arity = match config.method {
        Method::Cyclical => config.family.n_params(),
        _ => 1,
    };
    if grid.arity() != expected_arity {
        return Err(TuneError::GridArity {
            method: config.method,
            expected: expected_arity,
            got: grid.arity(),
        });
    }

    let n = data.n_rows();
    let outcomes: Vec<Result<FoldOutcome, TuneError>> = par::map_indexed(plan.folds, |fold| {
        let (in_bag, oob) = plan.indices(fold, n);
        let in_data = data.select_rows(&in_bag).map_err(EngineError::from)?;
        let oob_data = data.select_rows(&oob).map_err(EngineError::from)?;
        if dist::degenerate_response(config.family, in_data.response()) {
            return Ok(FoldOutcome::Degenerate);
        }
        match config.method {
            Method::Cyclical => cyclical_fold(config, &in_data, &oob_data, grid),
            _ => noncyclical_fold(config, &in_data, &oob_data, grid),
        }
    });

    let mut sums = alloc::vec![0.0f64; grid.len()];
    let mut cost = CvCost::default();
    let mut dropped = Vec::new();
    let mut kept = 0usize;
    for (fold, outcome) in outcomes.into_iter().enumerate() {
        match outcome? {
            FoldOutcome::Degenerate => dropped.push(fold),
            FoldOutcome::Evaluated { risks, path_fits } => {
                for (s, r) in sums.iter_mut().zip(&risks) {
                    *s += r;
                }
                cost.path_fits += path_fits;
                cost.grid_evaluations += risks.len();
                kept += 1;
            }
        }
    }
    if kept == 0 {
        return Err(TuneError::AllFoldsDegenerate { folds: plan.folds });
    }
    let mean_risks: Vec<f64> = sums.into_iter().map(|s| s / kept as f64).collect();
    let best_index = mean_risks
        .iter()
        .enumerate()
        .fold(0usize, |best, (i, &r)| {
            if r < mean_risks[best] {
                i
            } else {
                best
            }
        });
    Ok(CvReport {
        grid: grid.clone(),
        mean_risks,
        best_index,
        cost,
        dropped_folds: dropped,
        effective_folds: kept,
    })
}

struct OobTracker<'a> {
    oob: &'a Dataset,
    etas: Vec<PredictorVector>,
    applied: usize,
    step_length: f64,
}

impl<'a> OobTracker<'a> {
    fn new(booster: &Booster<'_>, oob: &'a Dataset) -> Self {
        let state = booster.state();
        let etas = state
            .offsets
            .iter()
            .enumerate()
            .map(|(k, &o)| PredictorVector::constant(k, o, oob.n_rows()))
            .collect();
        OobTracker {
            oob,
            etas,
            applied: 0,
            step_length: state.step_length,
        }
    }

    /// Replays selection records the in-bag path has added since last call.
    fn catch_up(&mut self, log: &[SelectionRecord]) {
        for rec in &log[self.applied..] {
            let x = self.oob.column(rec.covariate_index);
            for (e, &xi) in self.etas[rec.param_index].values.iter_mut().zip(x) {
                *e += self.step_length * (rec.intercept + rec.slope * xi);
            }
        }
        self.applied = log.len();
    }

    fn mean_risk(&self, booster: &Booster<'_>) -> Result<f64, TuneError> {
        let total = dist::nll(
            booster.state().family,
            self.oob.response(),
            &self.etas,
        )
        .map_err(EngineError::from)?;
        Ok(total / self.oob.n_rows() as f64)
    }
}

fn noncyclical_fold(
    config: &BoostConfig,
    in_data: &Dataset,
    oob: &Dataset,
    grid: &MstopGrid,
) -> Result<FoldOutcome, TuneError> {
    let mut cfg = config.clone();
    cfg.mstop = Mstop::Total(grid.max_per_param);
    let mut booster = Booster::new(cfg, in_data)?;
    let mut tracker = OobTracker::new(&booster, oob);

    let mut risks = alloc::vec![f64::NAN; grid.len()];
    let mut next = 0;
    while next < grid.len() && grid.points[next][0] == 0 {
        risks[next] = tracker.mean_risk(&booster)?;
        next += 1;
    }
    while booster.step()? {
        tracker.catch_up(&booster.state().selection_log);
        while next < grid.len() && grid.points[next][0] == booster.iteration() {
            risks[next] = tracker.mean_risk(&booster)?;
            next += 1;
        }
    }
    debug_assert_eq!(next, grid.len());
    Ok(FoldOutcome::Evaluated {
        risks,
        path_fits: 1,
    })
}

fn cyclical_fold(
    config: &BoostConfig,
    in_data: &Dataset,
    oob: &Dataset,
    grid: &MstopGrid,
) -> Result<FoldOutcome, TuneError> {
    let k = config.family.n_params();
    // Uniform tuples (m, ..., m) are prefixes of one run to the axis maximum;
    // everything else needs its own fit.
    let uniform: BTreeMap<usize, usize> = grid
        .points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.iter().all(|&c| c == p[0]))
        .map(|(i, p)| (p[0], i))
        .collect();

    let mut risks = alloc::vec![f64::NAN; grid.len()];
    let mut path_fits = 0usize;

    let mut cfg = config.clone();
    cfg.mstop = Mstop::PerParameter(alloc::vec![grid.max_per_param; k]);
    let mut booster = Booster::new(cfg, in_data)?;
    path_fits += 1;
    let mut tracker = OobTracker::new(&booster, oob);
    if let Some(&idx) = uniform.get(&0) {
        risks[idx] = tracker.mean_risk(&booster)?;
    }
    while booster.step()? {
        tracker.catch_up(&booster.state().selection_log);
        if let Some(&idx) = uniform.get(&booster.iteration()) {
            risks[idx] = tracker.mean_risk(&booster)?;
        }
    }

    for (i, point) in grid.points.iter().enumerate() {
        if !risks[i].is_nan() {
            continue;
        }
        let mut cfg = config.clone();
        cfg.mstop = Mstop::PerParameter(point.clone());
        let state = Booster::new(cfg, in_data)?.run()?;
        path_fits += 1;
        risks[i] = engine::mean_nll_on(&state, oob)?;
    }
    Ok(FoldOutcome::Evaluated { risks, path_fits })
}
