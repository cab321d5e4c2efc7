//! Response distributions for multi-parameter boosting.
//!
//! Each family couples every distribution parameter to an additive predictor
//! through a link function. The boosting engine only needs three things from
//! a family: the negative log-likelihood summed over the data ([`nll`]), the
//! negative partial derivative of that loss with respect to each predictor
//! ([`negative_gradient`]), and constant starting values for the predictors
//! ([`offsets`]).
//!
//! Parameterizations:
//!
//! * `Normal(mu, sigma)` — identity link for `mu`, log link for `sigma`.
//! * `NegBin(mu, sigma)` — mean/dispersion form with `Var(Y) = mu + sigma·mu²`,
//!   log links for both parameters.
//! * `Zinb(mu, sigma, nu)` — zero-inflated negative binomial,
//!   `P(Y=0) = nu + (1−nu)·P_NB(0)` and `P(Y=y) = (1−nu)·P_NB(y)` for `y > 0`,
//!   with a logit link for the inflation probability `nu`.

use alloc::vec::Vec;

use crate::math;

/// Floor applied to inverse-log outputs and inverse-logit outputs before any
/// density evaluation. Keeps the risk finite when boosting pushes a predictor
/// into saturation.
pub const MIN_POSITIVE: f64 = 1e-10;

/// Cap on the argument of `exp` inside inverse links so that products of two
/// inverse-log outputs cannot overflow to infinity.
const MAX_EXP_ARG: f64 = 350.0;

/// Link function attached to one distribution parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    Identity,
    Log,
    Logit,
}

impl Link {
    /// Maps a parameter value to the predictor scale.
    pub fn apply(self, value: f64) -> f64 {
        match self {
            Link::Identity => value,
            Link::Log => math::ln(value.max(MIN_POSITIVE)),
            Link::Logit => {
                let p = value.clamp(MIN_POSITIVE, 1.0 - MIN_POSITIVE);
                math::ln(p / (1.0 - p))
            }
        }
    }

    /// Maps a predictor value back to the parameter scale, clamped away from
    /// the boundary of the parameter space.
    pub fn invert(self, eta: f64) -> f64 {
        match self {
            Link::Identity => eta,
            Link::Log => math::exp(eta.min(MAX_EXP_ARG)).max(MIN_POSITIVE),
            Link::Logit => {
                let p = if eta >= 0.0 {
                    1.0 / (1.0 + math::exp(-eta.min(MAX_EXP_ARG)))
                } else {
                    let e = math::exp(eta.max(-MAX_EXP_ARG));
                    e / (1.0 + e)
                };
                p.clamp(MIN_POSITIVE, 1.0 - MIN_POSITIVE)
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Link::Identity => "identity",
            Link::Log => "log",
            Link::Logit => "logit",
        }
    }
}

/// Response distribution family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Normal,
    NegBin,
    Zinb,
}

impl Family {
    /// Number of distribution parameters (and additive predictors).
    pub fn n_params(self) -> usize {
        match self {
            Family::Normal | Family::NegBin => 2,
            Family::Zinb => 3,
        }
    }

    pub fn links(self) -> &'static [Link] {
        match self {
            Family::Normal => &[Link::Identity, Link::Log],
            Family::NegBin => &[Link::Log, Link::Log],
            Family::Zinb => &[Link::Log, Link::Log, Link::Logit],
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Family::Normal | Family::NegBin => &["mu", "sigma"],
            Family::Zinb => &["mu", "sigma", "nu"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::NegBin => "negbin",
            Family::Zinb => "zinb",
        }
    }

    /// True for the count families whose support is the non-negative integers.
    pub fn is_count(self) -> bool {
        matches!(self, Family::NegBin | Family::Zinb)
    }

    fn check_response(self, y: &[f64]) -> Result<(), DistError> {
        if y.is_empty() {
            return Err(DistError::EmptyResponse);
        }
        for (row, &v) in y.iter().enumerate() {
            let ok = if self.is_count() {
                v.is_finite() && v >= 0.0 && v == math::floor(v)
            } else {
                v.is_finite()
            };
            if !ok {
                return Err(DistError::ResponseOutOfSupport {
                    family: self,
                    value: v,
                    row,
                });
            }
        }
        Ok(())
    }
}

/// One additive predictor evaluated at every observation.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorVector {
    /// Zero-based index of the distribution parameter this predictor drives.
    pub param_index: usize,
    pub values: Vec<f64>,
}

impl PredictorVector {
    pub fn constant(param_index: usize, value: f64, n: usize) -> Self {
        PredictorVector {
            param_index,
            values: alloc::vec![value; n],
        }
    }
}

/// Negative gradient of the empirical risk with respect to one predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientVector {
    pub param_index: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DistError {
    #[error("predictor '{param}' has a non-finite entry at row {row}")]
    NonFinitePredictor { param: &'static str, row: usize },
    #[error("response value {value} at row {row} is outside the support of the {family:?} family")]
    ResponseOutOfSupport { family: Family, value: f64, row: usize },
    #[error("expected {expected} predictor vectors, got {got}")]
    PredictorCountMismatch { expected: usize, got: usize },
    #[error("predictor '{param}' has length {got}, expected {expected}")]
    PredictorLengthMismatch {
        param: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("predictor at position {position} is labeled for parameter {got}")]
    PredictorIndexMismatch { position: usize, got: usize },
    #[error("parameter index {index} out of range for a {n_params}-parameter family")]
    ParamIndexOutOfRange { index: usize, n_params: usize },
    #[error("response must not be empty")]
    EmptyResponse,
}

fn validate(family: Family, y: &[f64], etas: &[PredictorVector]) -> Result<(), DistError> {
    family.check_response(y)?;
    let k = family.n_params();
    if etas.len() != k {
        return Err(DistError::PredictorCountMismatch {
            expected: k,
            got: etas.len(),
        });
    }
    for (pos, eta) in etas.iter().enumerate() {
        if eta.param_index != pos {
            return Err(DistError::PredictorIndexMismatch {
                position: pos,
                got: eta.param_index,
            });
        }
        let name = family.param_names()[pos];
        if eta.values.len() != y.len() {
            return Err(DistError::PredictorLengthMismatch {
                param: name,
                expected: y.len(),
                got: eta.values.len(),
            });
        }
        for (row, v) in eta.values.iter().enumerate() {
            if !v.is_finite() {
                return Err(DistError::NonFinitePredictor { param: name, row });
            }
        }
    }
    Ok(())
}

/// Negative log-likelihood of one observation given its predictor values.
fn nll_obs(family: Family, y: f64, eta: &[f64]) -> f64 {
    match family {
        Family::Normal => {
            let mu = eta[0];
            let sigma = Link::Log.invert(eta[1]);
            let z = (y - mu) / sigma;
            0.5 * math::LN_2PI + math::ln(sigma) + 0.5 * z * z
        }
        Family::NegBin => {
            let mu = Link::Log.invert(eta[0]);
            let sigma = Link::Log.invert(eta[1]);
            negbin_nll_obs(y, mu, sigma)
        }
        Family::Zinb => {
            let mu = Link::Log.invert(eta[0]);
            let sigma = Link::Log.invert(eta[1]);
            let nu = Link::Logit.invert(eta[2]);
            if y == 0.0 {
                let log_q = -math::ln_1p(sigma * mu) / sigma;
                -math::ln(nu + (1.0 - nu) * math::exp(log_q))
            } else {
                -math::ln_1p(-nu) + negbin_nll_obs(y, mu, sigma)
            }
        }
    }
}

/// Negative binomial NLL in the mean/dispersion parameterization,
/// `Var(Y) = mu + sigma·mu²`, written with log-gamma terms:
/// `-ln P(y) = -[lnΓ(y+r) − lnΓ(r) − lnΓ(y+1) + y·ln(σμ) − (y+r)·ln(1+σμ)]`
/// with `r = 1/σ`.
fn negbin_nll_obs(y: f64, mu: f64, sigma: f64) -> f64 {
    let r = 1.0 / sigma;
    let sm = sigma * mu;
    let log_pmf = math::ln_gamma(y + r) - math::ln_gamma(r) - math::ln_gamma(y + 1.0)
        + y * math::ln(sm)
        - (y + r) * math::ln_1p(sm);
    -log_pmf
}

/// Negative gradient of the NB loss for one observation, on the predictor
/// scale of `param_index` (0 = mu, 1 = sigma, both log-linked).
fn negbin_gradient_obs(y: f64, mu: f64, sigma: f64, param_index: usize) -> f64 {
    let sm = sigma * mu;
    match param_index {
        0 => (y - mu) / (1.0 + sm),
        1 => {
            let r = 1.0 / sigma;
            let psi_diff = math::digamma(y + r) - math::digamma(r);
            -r * (psi_diff - math::ln_1p(sm)) + (y - mu) / (1.0 + sm)
        }
        _ => unreachable!(),
    }
}

fn gradient_obs(family: Family, y: f64, eta: &[f64], param_index: usize) -> f64 {
    match family {
        Family::Normal => {
            let mu = eta[0];
            let sigma = Link::Log.invert(eta[1]);
            let z = (y - mu) / sigma;
            match param_index {
                0 => z / sigma,
                1 => z * z - 1.0,
                _ => unreachable!(),
            }
        }
        Family::NegBin => {
            let mu = Link::Log.invert(eta[0]);
            let sigma = Link::Log.invert(eta[1]);
            negbin_gradient_obs(y, mu, sigma, param_index)
        }
        Family::Zinb => {
            let mu = Link::Log.invert(eta[0]);
            let sigma = Link::Log.invert(eta[1]);
            let nu = Link::Logit.invert(eta[2]);
            if y > 0.0 {
                match param_index {
                    0 | 1 => negbin_gradient_obs(y, mu, sigma, param_index),
                    2 => -nu,
                    _ => unreachable!(),
                }
            } else {
                let sm = sigma * mu;
                let r = 1.0 / sigma;
                // q = P_NB(0), p0 = P_ZINB(0); the NB score at zero is damped
                // by the posterior weight of the count component.
                let q = math::exp(-r * math::ln_1p(sm));
                let p0 = nu + (1.0 - nu) * q;
                let w = (1.0 - nu) * q / p0;
                match param_index {
                    0 => w * (-mu / (1.0 + sm)),
                    1 => w * (r * math::ln_1p(sm) - mu / (1.0 + sm)),
                    2 => nu * (1.0 - nu) * (1.0 - q) / p0,
                    _ => unreachable!(),
                }
            }
        }
    }
}

fn gather(etas: &[PredictorVector], row: usize, buf: &mut [f64; 3]) -> usize {
    for (k, eta) in etas.iter().enumerate() {
        buf[k] = eta.values[row];
    }
    etas.len()
}

/// Empirical risk: the family's negative log-likelihood summed over all
/// observations, with each predictor passed through its inverse link.
pub fn nll(family: Family, y: &[f64], etas: &[PredictorVector]) -> Result<f64, DistError> {
    validate(family, y, etas)?;
    let mut buf = [0.0f64; 3];
    let mut total = 0.0;
    for (row, &yi) in y.iter().enumerate() {
        let k = gather(etas, row, &mut buf);
        total += nll_obs(family, yi, &buf[..k]);
    }
    Ok(total)
}

/// Negative partial derivative of the empirical risk with respect to the
/// predictor of `param_index`, evaluated at the current predictors.
pub fn negative_gradient(
    family: Family,
    y: &[f64],
    etas: &[PredictorVector],
    param_index: usize,
) -> Result<GradientVector, DistError> {
    validate(family, y, etas)?;
    let k = family.n_params();
    if param_index >= k {
        return Err(DistError::ParamIndexOutOfRange {
            index: param_index,
            n_params: k,
        });
    }
    let mut buf = [0.0f64; 3];
    let mut values = Vec::with_capacity(y.len());
    for (row, &yi) in y.iter().enumerate() {
        let used = gather(etas, row, &mut buf);
        values.push(gradient_obs(family, yi, &buf[..used], param_index));
    }
    Ok(GradientVector {
        param_index,
        values,
    })
}

/// Constant starting values for the additive predictors, one per parameter.
///
/// Moment matching on the predictor scale:
///
/// * Normal — `(mean(y), ln(sd(y)))`; a zero-variance response falls back to
///   `sd = 1`.
/// * NegBin — `(ln(mean + 1e-10), ln(max((s² − m)/m², 0.01)))`; an all-zero
///   response lands on the clamp floors.
/// * Zinb — NegBin offsets computed from the positive counts (full-sample
///   moments when there are none), plus `logit` of the zero fraction clamped
///   to `[0.01, 0.99]`.
pub fn offsets(family: Family, y: &[f64]) -> Result<Vec<f64>, DistError> {
    family.check_response(y)?;
    let out = match family {
        Family::Normal => {
            let m = math::mean(y);
            let sd = math::sqrt(math::sample_variance(y));
            let sd = if sd > 0.0 { sd } else { 1.0 };
            alloc::vec![m, math::ln(sd)]
        }
        Family::NegBin => count_offsets(y),
        Family::Zinb => {
            let zero_frac = y.iter().filter(|&&v| v == 0.0).count() as f64 / y.len() as f64;
            let positives: Vec<f64> = y.iter().copied().filter(|&v| v > 0.0).collect();
            let base = if positives.is_empty() {
                count_offsets(y)
            } else {
                count_offsets(&positives)
            };
            let eta_nu = Link::Logit.apply(zero_frac.clamp(0.01, 0.99));
            alloc::vec![base[0], base[1], eta_nu]
        }
    };
    Ok(out)
}

/// A response no fit can learn from: constant for the normal family, all
/// zeros for the count families. Resampling code drops or redraws such folds.
pub fn degenerate_response(family: Family, y: &[f64]) -> bool {
    match family {
        Family::Normal => y.windows(2).all(|w| w[0] == w[1]),
        Family::NegBin | Family::Zinb => y.iter().all(|&v| v == 0.0),
    }
}

fn count_offsets(y: &[f64]) -> Vec<f64> {
    let m = math::mean(y);
    let s2 = math::sample_variance(y);
    let disp = if m > 0.0 { (s2 - m) / (m * m) } else { 0.0 };
    alloc::vec![math::ln(m + MIN_POSITIVE), math::ln(disp.max(0.01))]
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use statrs::distribution::{Discrete, NegativeBinomial as StatrsNegBin};

    fn preds(etas: &[&[f64]]) -> Vec<PredictorVector> {
        etas.iter()
            .enumerate()
            .map(|(k, v)| PredictorVector {
                param_index: k,
                values: v.to_vec(),
            })
            .collect()
    }

    fn nll1(family: Family, y: f64, eta: &[f64]) -> f64 {
        let etas: Vec<PredictorVector> = eta
            .iter()
            .enumerate()
            .map(|(k, &v)| PredictorVector::constant(k, v, 1))
            .collect();
        nll(family, &[y], &etas).unwrap()
    }

    fn grad1(family: Family, y: f64, eta: &[f64], k: usize) -> f64 {
        let etas: Vec<PredictorVector> = eta
            .iter()
            .enumerate()
            .map(|(j, &v)| PredictorVector::constant(j, v, 1))
            .collect();
        negative_gradient(family, &[y], &etas, k).unwrap().values[0]
    }

    /// Central finite differences of the loss on the predictor scale; the
    /// independent oracle for every analytic gradient in this module.
    fn fd_grad1(family: Family, y: f64, eta: &[f64], k: usize) -> f64 {
        let h = 1e-6;
        let mut up = eta.to_vec();
        let mut down = eta.to_vec();
        up[k] += h;
        down[k] -= h;
        -(nll1(family, y, &up) - nll1(family, y, &down)) / (2.0 * h)
    }

    #[test]
    fn normal_nll_at_standard_mode() {
        let etas = preds(&[&[0.0], &[0.0]]);
        let risk = nll(Family::Normal, &[0.0], &etas).unwrap();
        assert_abs_diff_eq!(risk, 0.5 * (2.0 * core::f64::consts::PI).ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(risk, 0.9189385332046727, epsilon = 1e-12);
    }

    #[test]
    fn normal_gradients_at_unit_point() {
        assert_abs_diff_eq!(grad1(Family::Normal, 1.0, &[0.0, 0.0], 0), 1.0, epsilon = 0.0);
        assert_abs_diff_eq!(grad1(Family::Normal, 1.0, &[0.0, 0.0], 1), 0.0, epsilon = 0.0);
    }

    #[test]
    fn negbin_nll_matches_independent_pmf() {
        // y = 3, mu = 2, sigma = 0.5 -> r = 2, p = 1/(1 + sigma*mu) = 0.5.
        let eta = [2.0f64.ln(), 0.5f64.ln()];
        let ours = nll1(Family::NegBin, 3.0, &eta);
        let oracle = -StatrsNegBin::new(2.0, 0.5).unwrap().ln_pmf(3);
        assert_abs_diff_eq!(ours, oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(ours, 8.0f64.ln(), epsilon = 1e-12);

        let mut rng = crate::rng::stream_rng(11, 0);
        for _ in 0..50 {
            let mu: f64 = rng.random_range(0.2..8.0);
            let sigma: f64 = rng.random_range(0.1..3.0);
            let y = rng.random_range(0u64..30) as f64;
            let ours = nll1(Family::NegBin, y, &[mu.ln(), sigma.ln()]);
            let r = 1.0 / sigma;
            let p = 1.0 / (1.0 + sigma * mu);
            let oracle = -StatrsNegBin::new(r, p).unwrap().ln_pmf(y as u64);
            assert_abs_diff_eq!(ours, oracle, epsilon = 1e-9);
        }
    }

    #[test]
    fn zinb_with_vanishing_inflation_reduces_to_negbin() {
        let y = [0.0, 1.0, 3.0, 7.0, 0.0, 2.0];
        let eta_mu = vec![0.5; 6];
        let eta_sigma = vec![-0.3; 6];
        let nb = preds(&[&eta_mu, &eta_sigma]);
        let zinb = preds(&[&eta_mu, &eta_sigma, &[-30.0; 6]]);

        let nb_risk = nll(Family::NegBin, &y, &nb).unwrap();
        let zinb_risk = nll(Family::Zinb, &y, &zinb).unwrap();
        assert_abs_diff_eq!(nb_risk, zinb_risk, epsilon = 1e-6);

        for k in 0..2 {
            let g_nb = negative_gradient(Family::NegBin, &y, &nb, k).unwrap();
            let g_z = negative_gradient(Family::Zinb, &y, &zinb, k).unwrap();
            for (a, b) in g_nb.values.iter().zip(&g_z.values) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-6);
            }
        }
    }

    fn random_point(family: Family, rng: &mut impl Rng) -> (f64, Vec<f64>) {
        match family {
            Family::Normal => {
                let y = rng.random_range(-3.0..3.0);
                (y, vec![rng.random_range(-3.0..3.0), rng.random_range(-1.5..1.5)])
            }
            Family::NegBin => {
                let y = rng.random_range(0u64..=25) as f64;
                (y, vec![rng.random_range(-1.5..2.0), rng.random_range(-1.5..1.0)])
            }
            Family::Zinb => {
                let y = if rng.random_bool(0.3) {
                    0.0
                } else {
                    rng.random_range(0u64..=25) as f64
                };
                (
                    y,
                    vec![
                        rng.random_range(-1.5..2.0),
                        rng.random_range(-1.5..1.0),
                        rng.random_range(-2.0..2.0),
                    ],
                )
            }
        }
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        for family in [Family::Normal, Family::NegBin, Family::Zinb] {
            let mut rng = crate::rng::stream_rng(42, family.n_params() as u64);
            for k in 0..family.n_params() {
                for _ in 0..100 {
                    let (y, eta) = random_point(family, &mut rng);
                    let analytic = grad1(family, y, &eta, k);
                    let fd = fd_grad1(family, y, &eta, k);
                    let abs = (analytic - fd).abs();
                    let rel = abs / analytic.abs().max(fd.abs()).max(1e-12);
                    assert!(
                        rel <= 1e-6 || abs <= 1e-8,
                        "{family:?} param {k}: analytic {analytic} vs fd {fd} at y={y}, eta={eta:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn offsets_match_moment_formulas() {
        let normal = offsets(Family::Normal, &[1.0, 1.0, 1.0, 3.0, 3.0, 3.0]).unwrap();
        assert_abs_diff_eq!(normal[0], 2.0, epsilon = 0.0);
        assert_abs_diff_eq!(normal[1], 1.2f64.sqrt().ln(), epsilon = 1e-14);

        let nb = offsets(Family::NegBin, &[1.0, 2.0, 3.0, 0.0, 4.0, 2.0]).unwrap();
        assert_abs_diff_eq!(nb[0], 2.0f64.ln(), epsilon = 1e-9);
        // variance equals the mean here, so dispersion hits the 0.01 floor
        assert_abs_diff_eq!(nb[1], 0.01f64.ln(), epsilon = 1e-12);

        let nb2 = offsets(Family::NegBin, &[0.0, 1.0, 5.0, 10.0]).unwrap();
        assert_abs_diff_eq!(nb2[1], 1.0416666666666667f64.ln(), epsilon = 1e-12);

        let zinb = offsets(Family::Zinb, &[0.0, 0.0, 0.0, 1.0, 2.0, 9.0]).unwrap();
        // positive-count moments: mean 4, s² 19 -> dispersion 15/16
        assert_abs_diff_eq!(zinb[0], 4.0f64.ln(), epsilon = 1e-9);
        assert_abs_diff_eq!(zinb[1], 0.9375f64.ln(), epsilon = 1e-12);
        // zero fraction 1/2 -> logit 0
        assert_abs_diff_eq!(zinb[2], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn offsets_survive_degenerate_responses() {
        let flat = offsets(Family::Normal, &[5.0, 5.0, 5.0]).unwrap();
        assert_abs_diff_eq!(flat[1], 0.0, epsilon = 0.0);

        let zeros = offsets(Family::NegBin, &[0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(zeros[1], 0.01f64.ln(), epsilon = 1e-12);

        let all_zero_zinb = offsets(Family::Zinb, &[0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(all_zero_zinb[2], Link::Logit.apply(0.99), epsilon = 1e-12);

        for (family, y) in [
            (Family::Normal, vec![5.0, 5.0, 5.0]),
            (Family::NegBin, vec![0.0, 0.0, 0.0, 0.0]),
            (Family::Zinb, vec![0.0, 0.0, 0.0, 0.0]),
        ] {
            let off = offsets(family, &y).unwrap();
            let etas: Vec<PredictorVector> = off
                .iter()
                .enumerate()
                .map(|(k, &v)| PredictorVector::constant(k, v, y.len()))
                .collect();
            assert!(nll(family, &y, &etas).unwrap().is_finite());
        }
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let y = [1.0, 2.0];
        let good = preds(&[&[0.0, 0.0], &[0.0, 0.0]]);

        let err = nll(Family::NegBin, &[1.5, 2.0], &good).unwrap_err();
        assert!(matches!(err, DistError::ResponseOutOfSupport { row: 0, .. }));

        let err = nll(Family::NegBin, &[-1.0, 2.0], &good).unwrap_err();
        assert!(matches!(err, DistError::ResponseOutOfSupport { .. }));

        let bad_eta = preds(&[&[0.0, f64::NAN], &[0.0, 0.0]]);
        let err = nll(Family::NegBin, &y, &bad_eta).unwrap_err();
        assert!(matches!(
            err,
            DistError::NonFinitePredictor { param: "mu", row: 1 }
        ));

        let short = preds(&[&[0.0, 0.0]]);
        let err = nll(Family::Normal, &y, &short).unwrap_err();
        assert!(matches!(err, DistError::PredictorCountMismatch { expected: 2, got: 1 }));

        let err = negative_gradient(Family::Normal, &y, &good, 2).unwrap_err();
        assert!(matches!(err, DistError::ParamIndexOutOfRange { index: 2, n_params: 2 }));

        assert!(matches!(
            offsets(Family::Normal, &[]).unwrap_err(),
            DistError::EmptyResponse
        ));
    }

    #[test]
    fn family_shapes_are_consistent() {
        for family in [Family::Normal, Family::NegBin, Family::Zinb] {
            assert_eq!(family.links().len(), family.n_params());
            assert_eq!(family.param_names().len(), family.n_params());
        }
        assert_eq!(Family::Normal.links()[0], Link::Identity);
        assert_eq!(Family::Zinb.links()[2], Link::Logit);
    }

    proptest! {
        #[test]
        fn link_then_inverse_is_identity(v in 1e-6f64..1e4, p in 1e-8f64..0.99999999) {
            for (link, value) in [(Link::Identity, v), (Link::Log, v), (Link::Logit, p)] {
                let rt = link.invert(link.apply(value));
                prop_assert!((rt - value).abs() <= 1e-12 * value.abs().max(1.0));
            }
        }

        #[test]
        fn nll_is_permutation_invariant(
            rows in proptest::collection::vec((0u8..20, -1.0f64..1.5, -1.0f64..0.8, -1.5f64..1.5), 2..40),
            rotate in 0usize..40,
        ) {
            let y: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
            let etas = preds(&[
                &rows.iter().map(|r| r.1).collect::<Vec<_>>(),
                &rows.iter().map(|r| r.2).collect::<Vec<_>>(),
                &rows.iter().map(|r| r.3).collect::<Vec<_>>(),
            ]);
            let base = nll(Family::Zinb, &y, &etas).unwrap();

            let mut shuffled = rows.clone();
            shuffled.rotate_left(rotate % rows.len());
            let y2: Vec<f64> = shuffled.iter().map(|r| r.0 as f64).collect();
            let etas2 = preds(&[
                &shuffled.iter().map(|r| r.1).collect::<Vec<_>>(),
                &shuffled.iter().map(|r| r.2).collect::<Vec<_>>(),
                &shuffled.iter().map(|r| r.3).collect::<Vec<_>>(),
            ]);
            let permuted = nll(Family::Zinb, &y2, &etas2).unwrap();
            prop_assert!((base - permuted).abs() <= 1e-9 * base.abs().max(1.0));
        }
    }
}
