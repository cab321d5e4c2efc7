//! One-covariate weak learners fitted to negative gradient vectors.
//!
//! Two kinds are provided: plain least squares and ridge-penalized least
//! squares where only the slope is shrunk. Both carry their own intercept, so
//! every boosting update is self-contained; the model-level intercept is the
//! offset plus the accumulated intercepts of all selected learners.

use alloc::string::String;
use alloc::vec::Vec;

use crate::dist::GradientVector;

/// Observations shared by every learner: covariate columns plus the response.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Vec<f64>>,
    column_names: Vec<String>,
    response: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset from covariate columns (column-major), their names
    /// and the response vector.
    pub fn new(
        columns: Vec<Vec<f64>>,
        column_names: Vec<String>,
        response: Vec<f64>,
    ) -> Result<Self, BaseLearnerError> {
        let n = response.len();
        if n < 2 {
            return Err(BaseLearnerError::TooFewRows { rows: n });
        }
        if columns.len() != column_names.len() {
            return Err(BaseLearnerError::ColumnNameCount {
                columns: columns.len(),
                names: column_names.len(),
            });
        }
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(BaseLearnerError::ColumnLength {
                    column: j,
                    expected: n,
                    got: col.len(),
                });
            }
            if let Some(row) = col.iter().position(|v| !v.is_finite()) {
                return Err(BaseLearnerError::NonFiniteValue { column: j, row });
            }
        }
        Ok(Dataset {
            columns,
            column_names,
            response,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.response.len()
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, index: usize) -> &[f64] {
        &self.columns[index]
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn response(&self) -> &[f64] {
        self.response.as_slice()
    }

    /// New dataset holding the given rows (duplicates allowed, so this covers
    /// both subsampling and bootstrap resampling).
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self, BaseLearnerError> {
        let columns = self
            .columns
            .iter()
            .map(|col| rows.iter().map(|&i| col[i]).collect())
            .collect();
        let response = rows.iter().map(|&i| self.response[i]).collect();
        Dataset::new(columns, self.column_names.clone(), response)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LearnerKind {
    Linear,
    Ridge,
}

/// Specification of one base-learner: which covariate it reads and how the
/// slope is penalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseLearnerSpec {
    pub covariate_index: usize,
    pub kind: LearnerKind,
    /// L2 penalty on the slope; zero exactly when `kind` is `Linear`.
    pub penalty: f64,
    pub include_intercept: bool,
}

impl BaseLearnerSpec {
    pub fn linear(covariate_index: usize) -> Self {
        BaseLearnerSpec {
            covariate_index,
            kind: LearnerKind::Linear,
            penalty: 0.0,
            include_intercept: true,
        }
    }

    pub fn ridge(covariate_index: usize, penalty: f64) -> Result<Self, BaseLearnerError> {
        if !penalty.is_finite() || penalty <= 0.0 {
            return Err(BaseLearnerError::InvalidPenalty { penalty });
        }
        Ok(BaseLearnerSpec {
            covariate_index,
            kind: LearnerKind::Ridge,
            penalty,
            include_intercept: true,
        })
    }

    fn validate(&self, data: &Dataset) -> Result<(), BaseLearnerError> {
        if self.covariate_index >= data.n_columns() {
            return Err(BaseLearnerError::CovariateOutOfRange {
                covariate_index: self.covariate_index,
                n_columns: data.n_columns(),
            });
        }
        let penalty_ok = match self.kind {
            LearnerKind::Linear => self.penalty == 0.0,
            LearnerKind::Ridge => self.penalty > 0.0 && self.penalty.is_finite(),
        };
        if !penalty_ok {
            return Err(BaseLearnerError::InvalidPenalty {
                penalty: self.penalty,
            });
        }
        Ok(())
    }
}

/// A fitted learner: affine contribution `intercept + slope·x` and the
/// unpenalized residual sum of squares at the optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedBaseLearner {
    pub spec: BaseLearnerSpec,
    pub intercept: f64,
    pub slope: f64,
    pub rss: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BaseLearnerError {
    #[error("dataset needs at least 2 rows, got {rows}")]
    TooFewRows { rows: usize },
    #[error("{columns} columns but {names} column names")]
    ColumnNameCount { columns: usize, names: usize },
    #[error("column {column} has length {got}, expected {expected}")]
    ColumnLength {
        column: usize,
        expected: usize,
        got: usize,
    },
    #[error("non-finite value in column {column} at row {row}")]
    NonFiniteValue { column: usize, row: usize },
    #[error("covariate index {covariate_index} out of range for {n_columns} columns")]
    CovariateOutOfRange {
        covariate_index: usize,
        n_columns: usize,
    },
    #[error("invalid slope penalty {penalty}")]
    InvalidPenalty { penalty: f64 },
    #[error("gradient vector has length {got}, expected {expected}")]
    GradientLength { expected: usize, got: usize },
}

/// Fits the learner to a gradient vector by (penalized) least squares.
///
/// With an intercept the slope is computed on centered data,
/// `slope = Sxy / (Sxx + penalty)`, and the intercept back-transformed as
/// `mean(u) − slope·mean(x)`, so only the slope is shrunk. A constant
/// covariate is not an error: the slope is zero and the intercept is the
/// gradient mean.
pub fn fit(
    spec: BaseLearnerSpec,
    data: &Dataset,
    u: &GradientVector,
) -> Result<FittedBaseLearner, BaseLearnerError> {
    spec.validate(data)?;
    let n = data.n_rows();
    if u.values.len() != n {
        return Err(BaseLearnerError::GradientLength {
            expected: n,
            got: u.values.len(),
        });
    }
    let x = data.column(spec.covariate_index);
    let uv = &u.values;

    let (intercept, slope) = if spec.include_intercept {
        let x_mean = x.iter().sum::<f64>() / n as f64;
        let u_mean = uv.iter().sum::<f64>() / n as f64;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        for i in 0..n {
            let dx = x[i] - x_mean;
            sxx += dx * dx;
            sxy += dx * (uv[i] - u_mean);
        }
        let denom = sxx + spec.penalty;
        let slope = if denom > 0.0 { sxy / denom } else { 0.0 };
        let slope = if slope.is_finite() { slope } else { 0.0 };
        (u_mean - slope * x_mean, slope)
    } else {
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        for i in 0..n {
            sxx += x[i] * x[i];
            sxy += x[i] * uv[i];
        }
        let denom = sxx + spec.penalty;
        let slope = if denom > 0.0 { sxy / denom } else { 0.0 };
        let slope = if slope.is_finite() { slope } else { 0.0 };
        (0.0, slope)
    };

    let mut rss = 0.0;
    for i in 0..n {
        let r = uv[i] - intercept - slope * x[i];
        rss += r * r;
    }
    Ok(FittedBaseLearner {
        spec,
        intercept,
        slope,
        rss,
    })
}

/// Evaluates the fitted contribution on every row of `data`.
pub fn predict(fit: &FittedBaseLearner, data: &Dataset) -> Result<Vec<f64>, BaseLearnerError> {
    let mut out = alloc::vec![0.0; data.n_rows()];
    predict_into(fit, data, &mut out)?;
    Ok(out)
}

pub(crate) fn predict_into(
    fit: &FittedBaseLearner,
    data: &Dataset,
    out: &mut [f64],
) -> Result<(), BaseLearnerError> {
    if fit.spec.covariate_index >= data.n_columns() {
        return Err(BaseLearnerError::CovariateOutOfRange {
            covariate_index: fit.spec.covariate_index,
            n_columns: data.n_columns(),
        });
    }
    let x = data.column(fit.spec.covariate_index);
    for (o, &xi) in out.iter_mut().zip(x) {
        *o = fit.intercept + fit.slope * xi;
    }
    Ok(())
}
