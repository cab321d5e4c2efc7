//! The model file: versioned JSON keyed by column names, so predictions
//! survive column reordering.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use distboost_core::engine::FitState;
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub family: String,
    pub method: String,
    pub step_length: f64,
    pub mstop: Vec<usize>,
    pub response_column: String,
    pub parameters: Vec<ParameterBlock>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParameterBlock {
    pub name: String,
    pub link: String,
    pub offset: f64,
    /// Accumulated affine contribution per covariate column.
    pub coefficients: BTreeMap<String, CoefficientEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub intercept: f64,
    pub slope: f64,
}

pub fn from_state(
    state: &FitState,
    column_names: &[String],
    response_column: &str,
    method: &str,
    mstop: &[usize],
) -> ModelFile {
    let family = state.family;
    let parameters = family
        .param_names()
        .iter()
        .zip(family.links())
        .enumerate()
        .map(|(k, (&name, link))| {
            let coefficients = state
                .coefficients
                .iter()
                .filter(|(&(param, _), _)| param == k)
                .map(|(&(_, j), coef)| {
                    (
                        column_names[j].clone(),
                        CoefficientEntry {
                            intercept: coef.intercept,
                            slope: coef.slope,
                        },
                    )
                })
                .collect();
            ParameterBlock {
                name: name.to_string(),
                link: link.name().to_string(),
                offset: state.offsets[k],
                coefficients,
            }
        })
        .collect();
    ModelFile {
        format_version: FORMAT_VERSION,
        family: family.name().to_string(),
        method: method.to_string(),
        step_length: state.step_length,
        mstop: mstop.to_vec(),
        response_column: response_column.to_string(),
        parameters,
    }
}

pub fn write(path: &Path, model: &ModelFile) -> Result<()> {
    let json = serde_json::to_string_pretty(model)?;
    std::fs::write(path, json + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read(path: &Path) -> Result<ModelFile> {
    let bytes =
        std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_slice(&bytes)?)
}
