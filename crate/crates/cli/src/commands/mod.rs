//! Subcommand implementations.

pub mod cv;
pub mod fit;
pub mod reproduce;
pub mod stabsel;

use std::path::Path;

use anyhow::{bail, Context, Result};
use distboost_core::baselearner::Dataset;
use distboost_core::engine::{self, BoostConfig, Method, Mstop};
use rand::Rng as _;

use crate::args::{CommonArgs, InputArgs, LearnerArg};

/// Resolves the master seed: the flag wins, otherwise one is generated and
/// recorded in the manifest.
pub fn resolve_seed(common: &CommonArgs) -> u64 {
    common.seed.unwrap_or_else(|| rand::rng().random())
}

/// Configures the global worker pool from --threads or DISTBOOST_THREADS.
pub fn init_threads(common: &CommonArgs) {
    let requested = common.threads.or_else(|| {
        std::env::var("DISTBOOST_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = requested {
        // a second initialization in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

pub fn ensure_out_dir(common: &CommonArgs) -> Result<()> {
    std::fs::create_dir_all(&common.out_dir)
        .with_context(|| format!("creating {}", common.out_dir.display()))?;
    Ok(())
}

/// Builds the boosting configuration for a parsed dataset: one learner per
/// covariate and parameter, of the requested kind.
pub fn boost_config(
    input: &InputArgs,
    data: &Dataset,
    mstop: Mstop,
) -> Result<BoostConfig> {
    let family = input.family.to_family();
    let method = input.method.to_method();
    let k = family.n_params();
    let learners = match input.learner {
        LearnerArg::Linear => {
            if input.penalty.is_some() {
                bail!("--penalty only applies to --learner ridge");
            }
            engine::linear_learners(k, data.n_columns())
        }
        LearnerArg::Ridge => {
            let Some(penalty) = input.penalty else {
                bail!("--learner ridge requires --penalty");
            };
            engine::ridge_learners(k, data.n_columns(), penalty)?
        }
    };
    Ok(BoostConfig {
        method,
        step_length: input.nu,
        mstop,
        family,
        learners,
    })
}

/// Expands the --mstop list for the method: the noncyclical methods take one
/// scalar, the cyclical method one value per parameter (a scalar is applied
/// to every parameter).
pub fn resolve_mstop(method: Method, values: &[usize], n_params: usize) -> Result<Mstop> {
    match method {
        Method::Cyclical => {
            if values.len() == 1 {
                Ok(Mstop::PerParameter(vec![values[0]; n_params]))
            } else if values.len() == n_params {
                Ok(Mstop::PerParameter(values.to_vec()))
            } else {
                bail!(
                    "--mstop for the cyclical method needs 1 or {n_params} values, got {}",
                    values.len()
                );
            }
        }
        _ => {
            if values.len() != 1 {
                bail!(
                    "--mstop for the noncyclical methods is a single value, got {}",
                    values.len()
                );
            }
            Ok(Mstop::Total(values[0]))
        }
    }
}

pub fn read_input(input: &InputArgs) -> Result<(crate::csvio::CsvData, String)> {
    let bytes = std::fs::read(&input.input)
        .with_context(|| format!("reading {}", input.input.display()))?;
    let digest = crate::manifest::sha256_hex(&bytes);
    let data = crate::csvio::read_dataset(&bytes, &input.response)?;
    Ok((data, digest))
}

pub fn out_path(common: &CommonArgs, name: &str) -> std::path::PathBuf {
    common.out_dir.join(name)
}

pub fn print_written(dir: &Path, outputs: &[String]) {
    for name in outputs {
        println!("wrote {}", dir.join(name).display());
    }
}
