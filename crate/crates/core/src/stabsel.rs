//! Stability selection over (parameter, covariate) pairs.
//!
//! The model is refitted on `B` half-sized subsamples, each fit halting once
//! `q` distinct base-learners have been selected (or at the iteration cap,
//! which is recorded as a warning). Pairs whose selection frequency reaches
//! the threshold form the stable set, and the expected number of false
//! positives is bounded by `q² / ((2·pi_thr − 1)·p)` where `p` counts all
//! candidate pairs. A covariate offered to two distribution parameters
//! contributes two candidates: frequencies are always keyed by the pair,
//! never by the bare covariate.
//!
//! Only two of (`q`, `pi_thr`, `PFER`) are free; [`resolve_triple`] derives
//! the third from the bound at equality.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use rand::Rng as _;

use crate::baselearner::Dataset;
use crate::dist;
use crate::engine::{BoostConfig, Booster, EngineError, Method, Mstop};
use crate::{math, par, rng};

/// The two user-supplied members of the (q, pi_thr, PFER) triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GivenPair {
    QAndPiThr { q: usize, pi_thr: f64 },
    QAndPfer { q: usize, pfer: f64 },
    PiThrAndPfer { pi_thr: f64, pfer: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Given {
    QAndPiThr,
    QAndPfer,
    PiThrAndPfer,
}

/// A fully determined (q, pi_thr, PFER) triple; the member not in `given`
/// was derived from the error bound at equality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedTriple {
    pub q: usize,
    pub pi_thr: f64,
    pub pfer: f64,
    pub given: Given,
}

/// Upper bound on the expected number of falsely selected pairs:
/// `q² / ((2·pi_thr − 1)·effective_p)`.
pub fn pfer_bound(q: usize, pi_thr: f64, effective_p: usize) -> f64 {
    (q * q) as f64 / ((2.0 * pi_thr - 1.0) * effective_p as f64)
}

/// Completes the (q, pi_thr, PFER) triple from the two supplied members.
pub fn resolve_triple(
    given: GivenPair,
    effective_p: usize,
) -> Result<ResolvedTriple, StabSelError> {
    let p = effective_p as f64;
    match given {
        GivenPair::QAndPiThr { q, pi_thr } => {
            check_q(q, effective_p)?;
            check_pi(pi_thr)?;
            Ok(ResolvedTriple {
                q,
                pi_thr,
                pfer: pfer_bound(q, pi_thr, effective_p),
                given: Given::QAndPiThr,
            })
        }
        GivenPair::QAndPfer { q, pfer } => {
            check_q(q, effective_p)?;
            check_pfer(pfer)?;
            let derived = ((q * q) as f64 / (pfer * p) + 1.0) / 2.0;
            // absorb representation dust at the upper boundary
            let pi_thr = if derived > 1.0 && derived <= 1.0 + 1e-12 {
                1.0
            } else {
                derived
            };
            if !(pi_thr > 0.5 && pi_thr <= 1.0) {
                return Err(StabSelError::InfeasiblePiThr {
                    derived,
                    q,
                    pfer,
                    effective_p,
                });
            }
            Ok(ResolvedTriple {
                q,
                pi_thr,
                pfer,
                given: Given::QAndPfer,
            })
        }
        GivenPair::PiThrAndPfer { pi_thr, pfer } => {
            check_pi(pi_thr)?;
            check_pfer(pfer)?;
            let raw = math::floor(math::sqrt(pfer * (2.0 * pi_thr - 1.0) * p)) as usize;
            let q = raw.max(1).min(effective_p);
            Ok(ResolvedTriple {
                q,
                pi_thr,
                pfer,
                given: Given::PiThrAndPfer,
            })
        }
    }
}

fn check_q(q: usize, effective_p: usize) -> Result<(), StabSelError> {
    if q == 0 {
        return Err(StabSelError::QTooSmall);
    }
    if q > effective_p {
        return Err(StabSelError::QTooLarge { q, effective_p });
    }
    Ok(())
}

fn check_pi(pi_thr: f64) -> Result<(), StabSelError> {
    if !(pi_thr > 0.5 && pi_thr <= 1.0) {
        return Err(StabSelError::InvalidPiThr { pi_thr });
    }
    Ok(())
}

fn check_pfer(pfer: f64) -> Result<(), StabSelError> {
    if !(pfer > 0.0 && pfer.is_finite()) {
        return Err(StabSelError::InvalidPfer { pfer });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabSelConfig {
    pub q: usize,
    pub pi_thr: f64,
    pub pfer: f64,
    pub given: Given,
    /// Number of subsamples B.
    pub b: usize,
    /// Iteration budget per subsample fit when `q` is never reached.
    pub mstop_cap: usize,
    pub seed: u64,
}

impl StabSelConfig {
    pub fn new(
        triple: ResolvedTriple,
        b: usize,
        mstop_cap: usize,
        seed: u64,
    ) -> Result<Self, StabSelError> {
        if b < 2 {
            return Err(StabSelError::TooFewSubsamples { b });
        }
        if mstop_cap == 0 {
            return Err(StabSelError::ZeroMstopCap);
        }
        Ok(StabSelConfig {
            q: triple.q,
            pi_thr: triple.pi_thr,
            pfer: triple.pfer,
            given: triple.given,
            b,
            mstop_cap,
            seed,
        })
    }
}

#[derive(Debug, Clone)]
pub struct StabSelResult {
    /// Selection frequency of every candidate pair (pairs never selected
    /// report 0).
    pub frequencies: BTreeMap<(usize, usize), f64>,
    /// Raw selection counts with denominator `subsamples`.
    pub selection_counts: BTreeMap<(usize, usize), usize>,
    /// Pairs with frequency >= pi_thr.
    pub stable_set: BTreeSet<(usize, usize)>,
    /// Distinct pairs selected in each subsample fit.
    pub per_subsample_sets: Vec<BTreeSet<(usize, usize)>>,
    /// Total number of candidate pairs.
    pub effective_p: usize,
    /// Error bound at the configured (q, pi_thr).
    pub pfer_bound: f64,
    pub subsamples: usize,
    /// Subsamples whose fit hit the iteration cap before selecting q
    /// distinct pairs.
    pub cap_warnings: Vec<usize>,
}

impl StabSelResult {
    /// Stable set at an arbitrary threshold, reusing the stored counts; no
    /// refit is needed to vary the threshold.
    pub fn stable_set_at(&self, pi_thr: f64) -> BTreeSet<(usize, usize)> {
        let threshold = count_threshold(pi_thr, self.subsamples);
        self.selection_counts
            .iter()
            .filter(|(_, &c)| c >= threshold)
            .map(|(&pair, _)| pair)
            .collect()
    }
}

/// Smallest selection count whose frequency reaches `pi_thr`; counts dodge
/// the representation dust of comparing `count/B` against decimal thresholds.
fn count_threshold(pi_thr: f64, b: usize) -> usize {
    math::ceil(pi_thr * b as f64 - 1e-9) as usize
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StabSelError {
    #[error("q must be at least 1")]
    QTooSmall,
    #[error("q = {q} exceeds the {effective_p} candidate (parameter, covariate) pairs")]
    QTooLarge { q: usize, effective_p: usize },
    #[error("pi_thr = {pi_thr} is outside (0.5, 1]")]
    InvalidPiThr { pi_thr: f64 },
    #[error("PFER must be positive and finite, got {pfer}")]
    InvalidPfer { pfer: f64 },
    #[error(
        "infeasible configuration: q = {q} and PFER = {pfer} with p = {effective_p} derive \
         pi_thr = {derived}, violating the bound pi_thr <= 1; lower q or raise the PFER"
    )]
    InfeasiblePiThr {
        derived: f64,
        q: usize,
        pfer: f64,
        effective_p: usize,
    },
    #[error("stability selection needs at least 2 subsamples, got {b}")]
    TooFewSubsamples { b: usize },
    #[error("the per-fit iteration cap must be positive")]
    ZeroMstopCap,
    #[error("subsample {subsample} drew a degenerate response twice")]
    DegenerateSubsample { subsample: usize },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Runs Algorithm-style stability selection: B half subsamples, each fitted
/// until `q` distinct pairs are selected or `mstop_cap` iterations elapse.
pub fn run_stabsel(
    config: &StabSelConfig,
    boost: &BoostConfig,
    data: &Dataset,
) -> Result<StabSelResult, StabSelError> {
    let candidates: BTreeSet<(usize, usize)> = boost
        .learners
        .iter()
        .enumerate()
        .flat_map(|(k, list)| list.iter().map(move |s| (k, s.covariate_index)))
        .collect();
    let effective_p: usize = boost.learners.iter().map(|l| l.len()).sum();
    check_q(config.q, effective_p)?;

    let n = data.n_rows();
    let half = n / 2;
    let family = boost.family;
    let outcomes: Vec<Result<SubsampleOutcome, StabSelError>> =
        par::map_indexed(config.b, |b| {
            let subsample = draw_subsample(config, family, data, b, half)?;
            fit_subsample(config, boost, &subsample)
        });

    let mut per_subsample_sets = Vec::with_capacity(config.b);
    let mut cap_warnings = Vec::new();
    for (b, outcome) in outcomes.into_iter().enumerate() {
        let (set, reached_q) = outcome?;
        if !reached_q {
            cap_warnings.push(b);
        }
        per_subsample_sets.push(set);
    }

    let mut selection_counts: BTreeMap<(usize, usize), usize> =
        candidates.iter().map(|&pair| (pair, 0)).collect();
    for set in &per_subsample_sets {
        for pair in set {
            if let Some(c) = selection_counts.get_mut(pair) {
                *c += 1;
            }
        }
    }
    let frequencies: BTreeMap<(usize, usize), f64> = selection_counts
        .iter()
        .map(|(&pair, &c)| (pair, c as f64 / config.b as f64))
        .collect();
    let threshold = count_threshold(config.pi_thr, config.b);
    let stable_set = selection_counts
        .iter()
        .filter(|(_, &c)| c >= threshold)
        .map(|(&pair, _)| pair)
        .collect();

    Ok(StabSelResult {
        frequencies,
        selection_counts,
        stable_set,
        per_subsample_sets,
        effective_p,
        pfer_bound: pfer_bound(config.q, config.pi_thr, effective_p),
        subsamples: config.b,
        cap_warnings,
    })
}

fn draw_subsample(
    config: &StabSelConfig,
    family: crate::dist::Family,
    data: &Dataset,
    b: usize,
    half: usize,
) -> Result<Dataset, StabSelError> {
    // one redraw on a different stream is allowed before giving up
    for attempt in 0..2u64 {
        let stream = b as u64 + attempt * config.b as u64;
        let mut rng = rng::stream_rng(config.seed, stream);
        let n = data.n_rows();
        let mut all: Vec<usize> = (0..n).collect();
        for i in 0..half {
            let j = rng.random_range(i..n);
            all.swap(i, j);
        }
        let mut rows = all[..half].to_vec();
        rows.sort_unstable();
        let subsample = data.select_rows(&rows).map_err(EngineError::from)?;
        if !dist::degenerate_response(family, subsample.response()) {
            return Ok(subsample);
        }
    }
    Err(StabSelError::DegenerateSubsample { subsample: b })
}

/// Distinct pairs selected by one subsample fit plus whether it reached `q`.
type SubsampleOutcome = (BTreeSet<(usize, usize)>, bool);

fn fit_subsample(
    config: &StabSelConfig,
    boost: &BoostConfig,
    subsample: &Dataset,
) -> Result<SubsampleOutcome, StabSelError> {
    let mut cfg = boost.clone();
    cfg.mstop = match boost.method {
        Method::Cyclical => {
            Mstop::PerParameter(alloc::vec![config.mstop_cap; boost.family.n_params()])
        }
        _ => Mstop::Total(config.mstop_cap),
    };
    let state = Booster::new(cfg, subsample)?
        .with_distinct_limit(config.q)
        .run()?;
    let set = state.distinct_pairs();
    let reached_q = set.len() >= config.q;
    Ok((set, reached_q))
}

/// True and false positive counts of the stable set against a known support.
pub fn tp_fp(result: &StabSelResult, truth: &BTreeSet<(usize, usize)>) -> (usize, usize) {
    let tp = result.stable_set.intersection(truth).count();
    let fp = result.stable_set.len() - tp;
    (tp, fp)
}
