//! The boosting loop.
//!
//! [`fit_cyclical`] updates every distribution parameter in every iteration,
//! each with its own stopping value. [`fit_noncyclical`] evaluates a champion
//! base-learner for every parameter and applies only the single update with
//! the lowest post-update empirical risk, so one scalar stopping value
//! controls the whole fit. The noncyclical variants differ only in how the
//! per-parameter champion is chosen: by residual sum of squares against the
//! negative gradient (*inner* loss) or by the post-update negative
//! log-likelihood itself (*outer* loss).
//!
//! [`Booster`] exposes the loop one iteration at a time; the tuning and
//! stability-selection code drive it directly to snapshot states along the
//! path or to halt once enough distinct base-learners have been selected.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::baselearner::{self, BaseLearnerError, BaseLearnerSpec, Dataset, FittedBaseLearner};
use crate::dist::{self, DistError, Family, GradientVector, PredictorVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Cyclical,
    NoncyclicalInner,
    NoncyclicalOuter,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Cyclical => "cyclical",
            Method::NoncyclicalInner => "inner",
            Method::NoncyclicalOuter => "outer",
        }
    }

    pub fn is_cyclical(self) -> bool {
        matches!(self, Method::Cyclical)
    }
}

/// Stopping iterations: one value per parameter for the cyclical method, a
/// single total for the noncyclical methods.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mstop {
    PerParameter(Vec<usize>),
    Total(usize),
}

#[derive(Debug, Clone)]
pub struct BoostConfig {
    pub method: Method,
    /// Shrinkage applied to every accepted base-learner, in (0, 1).
    pub step_length: f64,
    pub mstop: Mstop,
    pub family: Family,
    /// Candidate base-learners, one list per distribution parameter.
    pub learners: Vec<Vec<BaseLearnerSpec>>,
}

impl BoostConfig {
    fn validate(&self, data: &Dataset) -> Result<(), EngineError> {
        if !(self.step_length > 0.0 && self.step_length < 1.0) {
            return Err(EngineError::InvalidStepLength {
                step_length: self.step_length,
            });
        }
        let k = self.family.n_params();
        match (&self.mstop, self.method) {
            (Mstop::PerParameter(v), Method::Cyclical) => {
                if v.len() != k {
                    return Err(EngineError::MstopShape {
                        method: self.method,
                        expected: k,
                        got: v.len(),
                    });
                }
            }
            (Mstop::Total(_), Method::NoncyclicalInner | Method::NoncyclicalOuter) => {}
            _ => {
                return Err(EngineError::MstopKind {
                    method: self.method,
                });
            }
        }
        if self.learners.len() != k {
            return Err(EngineError::LearnerListCount {
                expected: k,
                got: self.learners.len(),
            });
        }
        for (param_index, list) in self.learners.iter().enumerate() {
            if list.is_empty() {
                return Err(EngineError::EmptyLearnerSet { param_index });
            }
            for spec in list {
                if spec.covariate_index >= data.n_columns() {
                    return Err(EngineError::BaseLearner(
                        BaseLearnerError::CovariateOutOfRange {
                            covariate_index: spec.covariate_index,
                            n_columns: data.n_columns(),
                        },
                    ));
                }
            }
        }
        Ok(())
    }
}

/// One accepted base-learner: which parameter and covariate it updated and
/// the unscaled affine fit (the step length is applied when the update lands
/// in the predictor and the coefficient table).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionRecord {
    /// 1-based boosting iteration the update happened in.
    pub iteration: usize,
    pub param_index: usize,
    pub covariate_index: usize,
    pub intercept: f64,
    pub slope: f64,
}

/// Accumulated, step-length-scaled affine contribution of one
/// (parameter, covariate) pair.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Coefficient {
    pub intercept: f64,
    pub slope: f64,
}

/// One parameter's champion in a noncyclical iteration: the fitted learner
/// and the empirical risk the model would have after applying it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateCandidate {
    pub param_index: usize,
    pub fitted: FittedBaseLearner,
    /// Post-update risk; candidates that cannot be evaluated to a finite
    /// value never become one of these.
    pub delta_rho: f64,
}

/// Everything a finished (or in-progress) fit knows about itself.
#[derive(Debug, Clone)]
pub struct FitState {
    pub family: Family,
    pub step_length: f64,
    /// Number of covariate columns the fit was trained on.
    pub n_columns: usize,
    /// Constant starting value of each additive predictor.
    pub offsets: Vec<f64>,
    /// Current additive predictors on the training data.
    pub etas: Vec<PredictorVector>,
    /// (param_index, covariate_index) -> accumulated contribution.
    pub coefficients: BTreeMap<(usize, usize), Coefficient>,
    pub selection_log: Vec<SelectionRecord>,
    /// Empirical risk after each iteration; entry 0 is the offset risk.
    pub risk_trace: Vec<f64>,
}

impl FitState {
    /// Distinct (parameter, covariate) pairs selected so far.
    pub fn distinct_pairs(&self) -> BTreeSet<(usize, usize)> {
        self.selection_log
            .iter()
            .map(|r| (r.param_index, r.covariate_index))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("step length {step_length} is outside (0, 1)")]
    InvalidStepLength { step_length: f64 },
    #[error("{method:?} needs {expected} per-parameter stopping values, got {got}")]
    MstopShape {
        method: Method,
        expected: usize,
        got: usize,
    },
    #[error("{method:?} was given the wrong stopping-value kind (scalar vs per-parameter)")]
    MstopKind { method: Method },
    #[error("expected one learner list per parameter ({expected}), got {got}")]
    LearnerListCount { expected: usize, got: usize },
    #[error("no base-learners specified for parameter {param_index}")]
    EmptyLearnerSet { param_index: usize },
    #[error("risk became non-finite in iteration {iteration} after updating parameter {param_index}")]
    NonFiniteRisk {
        iteration: usize,
        param_index: usize,
    },
    #[error("no candidate update with finite risk in iteration {iteration}")]
    NoFiniteCandidate { iteration: usize },
    #[error("new data has {got} columns, the fit was trained on {expected}")]
    ColumnCountMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    BaseLearner(#[from] BaseLearnerError),
}

/// Step-wise driver for both fitting algorithms.
#[derive(Debug)]
pub struct Booster<'d> {
    config: BoostConfig,
    data: &'d Dataset,
    state: FitState,
    iteration: usize,
    halted: bool,
    /// Stop as soon as this many distinct (parameter, covariate) pairs have
    /// been selected; used by stability selection.
    distinct_limit: Option<usize>,
    distinct: BTreeSet<(usize, usize)>,
    scratch: Vec<f64>,
}

impl<'d> Booster<'d> {
    pub fn new(config: BoostConfig, data: &'d Dataset) -> Result<Self, EngineError> {
        config.validate(data)?;
        let family = config.family;
        let offsets = dist::offsets(family, data.response())?;
        let n = data.n_rows();
        let etas: Vec<PredictorVector> = offsets
            .iter()
            .enumerate()
            .map(|(k, &v)| PredictorVector::constant(k, v, n))
            .collect();
        let offset_risk = dist::nll(family, data.response(), &etas)?;
        if !offset_risk.is_finite() {
            return Err(EngineError::NonFiniteRisk {
                iteration: 0,
                param_index: 0,
            });
        }
        let state = FitState {
            family,
            step_length: config.step_length,
            n_columns: data.n_columns(),
            offsets,
            etas,
            coefficients: BTreeMap::new(),
            selection_log: Vec::new(),
            risk_trace: alloc::vec![offset_risk],
        };
        Ok(Booster {
            config,
            data,
            state,
            iteration: 0,
            halted: false,
            distinct_limit: None,
            distinct: BTreeSet::new(),
            scratch: alloc::vec![0.0; n],
        })
    }

    pub fn with_distinct_limit(mut self, limit: usize) -> Self {
        self.distinct_limit = Some(limit);
        self
    }

    pub fn state(&self) -> &FitState {
        &self.state
    }

    pub fn into_state(self) -> FitState {
        self.state
    }

    /// Completed iterations.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn max_iterations(&self) -> usize {
        match &self.config.mstop {
            Mstop::Total(m) => *m,
            Mstop::PerParameter(v) => v.iter().copied().max().unwrap_or(0),
        }
    }

    pub fn distinct_pair_count(&self) -> usize {
        self.distinct.len()
    }

    /// True once the iteration budget is exhausted or the distinct-pair limit
    /// was reached.
    pub fn is_finished(&self) -> bool {
        self.halted || self.iteration >= self.max_iterations()
    }

    /// Runs one boosting iteration. Returns `false` when already finished.
    pub fn step(&mut self) -> Result<bool, EngineError> {
        if self.is_finished() {
            return Ok(false);
        }
        let m = self.iteration + 1;
        match self.config.method {
            Method::Cyclical => self.step_cyclical(m)?,
            Method::NoncyclicalInner | Method::NoncyclicalOuter => self.step_noncyclical(m)?,
        }
        self.iteration = m;
        Ok(true)
    }

    pub fn run(mut self) -> Result<FitState, EngineError> {
        while self.step()? {}
        Ok(self.into_state())
    }

    fn mstop_for(&self, param_index: usize) -> usize {
        match &self.config.mstop {
            Mstop::Total(m) => *m,
            Mstop::PerParameter(v) => v[param_index],
        }
    }

    fn limit_reached(&self) -> bool {
        self.distinct_limit
            .is_some_and(|q| self.distinct.len() >= q)
    }

    fn step_cyclical(&mut self, m: usize) -> Result<(), EngineError> {
        let k_count = self.config.family.n_params();
        let mut last_updated = 0;
        for k in 0..k_count {
            if m > self.mstop_for(k) {
                continue;
            }
            let u = dist::negative_gradient(
                self.config.family,
                self.data.response(),
                &self.state.etas,
                k,
            )?;
            let champion = self.champion_by_rss(k, &u)?;
            self.apply_update(m, k, &champion)?;
            last_updated = k;
            if self.limit_reached() {
                self.halted = true;
                break;
            }
        }
        let risk = dist::nll(self.config.family, self.data.response(), &self.state.etas)?;
        if !risk.is_finite() {
            return Err(EngineError::NonFiniteRisk {
                iteration: m,
                param_index: last_updated,
            });
        }
        self.state.risk_trace.push(risk);
        Ok(())
    }

    fn step_noncyclical(&mut self, m: usize) -> Result<(), EngineError> {
        let k_count = self.config.family.n_params();
        let outer = self.config.method == Method::NoncyclicalOuter;
        // tie-breaking on (risk, parameter, covariate) keeps selection
        // deterministic
        let mut best: Option<UpdateCandidate> = None;
        for k in 0..k_count {
            let u = dist::negative_gradient(
                self.config.family,
                self.data.response(),
                &self.state.etas,
                k,
            )?;
            let (fitted, delta_rho) = if outer {
                self.champion_by_outer(k, &u)?
            } else {
                let champion = self.champion_by_rss(k, &u)?;
                let delta = self.candidate_risk(k, &champion);
                (champion, delta)
            };
            if !delta_rho.is_finite() {
                continue;
            }
            let improves = match &best {
                None => true,
                Some(b) => delta_rho < b.delta_rho,
            };
            if improves {
                best = Some(UpdateCandidate {
                    param_index: k,
                    fitted,
                    delta_rho,
                });
            }
        }
        let winner = best.ok_or(EngineError::NoFiniteCandidate { iteration: m })?;
        self.apply_update(m, winner.param_index, &winner.fitted)?;
        self.state.risk_trace.push(winner.delta_rho);
        if self.limit_reached() {
            self.halted = true;
        }
        Ok(())
    }

    /// Best learner for one parameter by residual sum of squares against the
    /// negative gradient; ties go to the lowest covariate index.
    fn champion_by_rss(
        &self,
        k: usize,
        u: &GradientVector,
    ) -> Result<FittedBaseLearner, EngineError> {
        let mut best: Option<FittedBaseLearner> = None;
        for spec in &self.config.learners[k] {
            let fitted = baselearner::fit(*spec, self.data, u)?;
            let improves = match &best {
                None => true,
                Some(b) => {
                    fitted.rss < b.rss
                        || (fitted.rss == b.rss
                            && fitted.spec.covariate_index < b.spec.covariate_index)
                }
            };
            if improves {
                best = Some(fitted);
            }
        }
        best.ok_or(EngineError::EmptyLearnerSet { param_index: k })
    }

    /// Best learner for one parameter by post-update empirical risk.
    fn champion_by_outer(
        &mut self,
        k: usize,
        u: &GradientVector,
    ) -> Result<(FittedBaseLearner, f64), EngineError> {
        let mut best: Option<(FittedBaseLearner, f64)> = None;
        for idx in 0..self.config.learners[k].len() {
            let spec = self.config.learners[k][idx];
            let fitted = baselearner::fit(spec, self.data, u)?;
            let delta = self.candidate_risk(k, &fitted);
            let improves = match &best {
                None => true,
                Some((b, best_delta)) => {
                    delta < *best_delta
                        || (delta == *best_delta
                            && fitted.spec.covariate_index < b.spec.covariate_index)
                }
            };
            if improves {
                best = Some((fitted, delta));
            }
        }
        best.ok_or(EngineError::EmptyLearnerSet { param_index: k })
    }

    /// Empirical risk after hypothetically applying `fitted` to parameter
    /// `k`; non-evaluable candidates come back as +inf and are never chosen.
    fn candidate_risk(&mut self, k: usize, fitted: &FittedBaseLearner) -> f64 {
        let nu = self.config.step_length;
        let x = self.data.column(fitted.spec.covariate_index);
        let eta = &self.state.etas[k].values;
        for i in 0..eta.len() {
            self.scratch[i] = eta[i] + nu * (fitted.intercept + fitted.slope * x[i]);
        }
        core::mem::swap(&mut self.state.etas[k].values, &mut self.scratch);
        let risk = dist::nll(self.config.family, self.data.response(), &self.state.etas);
        core::mem::swap(&mut self.state.etas[k].values, &mut self.scratch);
        match risk {
            Ok(r) if r.is_finite() => r,
            _ => f64::INFINITY,
        }
    }

    fn apply_update(
        &mut self,
        iteration: usize,
        k: usize,
        fitted: &FittedBaseLearner,
    ) -> Result<(), EngineError> {
        let nu = self.config.step_length;
        let j = fitted.spec.covariate_index;
        let x = self.data.column(j);
        let eta = &mut self.state.etas[k].values;
        for (e, &xi) in eta.iter_mut().zip(x) {
            *e += nu * (fitted.intercept + fitted.slope * xi);
        }
        if eta.iter().any(|v| !v.is_finite()) {
            return Err(EngineError::NonFiniteRisk {
                iteration,
                param_index: k,
            });
        }
        let entry = self.state.coefficients.entry((k, j)).or_default();
        entry.intercept += nu * fitted.intercept;
        entry.slope += nu * fitted.slope;
        self.state.selection_log.push(SelectionRecord {
            iteration,
            param_index: k,
            covariate_index: j,
            intercept: fitted.intercept,
            slope: fitted.slope,
        });
        self.distinct.insert((k, j));
        Ok(())
    }
}

/// Runs the cyclical algorithm to completion.
pub fn fit_cyclical(config: BoostConfig, data: &Dataset) -> Result<FitState, EngineError> {
    if config.method != Method::Cyclical {
        return Err(EngineError::MstopKind {
            method: config.method,
        });
    }
    Booster::new(config, data)?.run()
}

/// Runs a noncyclical variant to completion.
pub fn fit_noncyclical(config: BoostConfig, data: &Dataset) -> Result<FitState, EngineError> {
    if config.method == Method::Cyclical {
        return Err(EngineError::MstopKind {
            method: config.method,
        });
    }
    Booster::new(config, data)?.run()
}

/// Final empirical risk of a fit.
pub fn risk(state: &FitState) -> f64 {
    *state
        .risk_trace
        .last()
        .expect("risk trace always holds the offset entry")
}

/// Additive predictors of a fit evaluated on new data.
pub fn predictors_on(
    state: &FitState,
    newdata: &Dataset,
) -> Result<Vec<PredictorVector>, EngineError> {
    if newdata.n_columns() != state.n_columns {
        return Err(EngineError::ColumnCountMismatch {
            expected: state.n_columns,
            got: newdata.n_columns(),
        });
    }
    let n = newdata.n_rows();
    let mut out: Vec<PredictorVector> = state
        .offsets
        .iter()
        .enumerate()
        .map(|(k, &o)| PredictorVector::constant(k, o, n))
        .collect();
    for (&(k, j), coef) in &state.coefficients {
        let x = newdata.column(j);
        for (e, &xi) in out[k].values.iter_mut().zip(x) {
            *e += coef.intercept + coef.slope * xi;
        }
    }
    Ok(out)
}

/// Distribution parameters (inverse-linked additive predictors) for new data.
pub fn predict_params(state: &FitState, newdata: &Dataset) -> Result<Vec<Vec<f64>>, EngineError> {
    let etas = predictors_on(state, newdata)?;
    let links = state.family.links();
    Ok(etas
        .into_iter()
        .enumerate()
        .map(|(k, eta)| {
            eta.values
                .into_iter()
                .map(|v| links[k].invert(v))
                .collect()
        })
        .collect())
}

/// Per-observation empirical risk of a fit on held-out data.
pub fn mean_nll_on(state: &FitState, newdata: &Dataset) -> Result<f64, EngineError> {
    let etas = predictors_on(state, newdata)?;
    let total = dist::nll(state.family, newdata.response(), &etas)?;
    Ok(total / newdata.n_rows() as f64)
}

/// One plain linear learner per covariate for every parameter.
pub fn linear_learners(n_params: usize, n_columns: usize) -> Vec<Vec<BaseLearnerSpec>> {
    (0..n_params)
        .map(|_| (0..n_columns).map(BaseLearnerSpec::linear).collect())
        .collect()
}

/// One ridge learner per covariate for every parameter.
pub fn ridge_learners(
    n_params: usize,
    n_columns: usize,
    penalty: f64,
) -> Result<Vec<Vec<BaseLearnerSpec>>, BaseLearnerError> {
    let one: Result<Vec<BaseLearnerSpec>, BaseLearnerError> = (0..n_columns)
        .map(|j| BaseLearnerSpec::ridge(j, penalty))
        .collect();
    let one = one?;
    Ok((0..n_params).map(|_| one.clone()).collect())
}
