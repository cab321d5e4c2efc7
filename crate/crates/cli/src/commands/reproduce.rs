use std::time::Instant;

use anyhow::Result;
use distboost_core::simgen::{
    self, ConvergenceSettings, RuntimeSettings, SpeedSettings, SweepSettings,
};
use distboost_core::tune::ResamplingKind;
use serde_json::json;

use crate::args::{ExperimentArg, MethodArg, ReproduceArgs};
use crate::commands::{ensure_out_dir, init_threads, out_path, print_written, resolve_seed};
use crate::csvio::{fmt, write_csv};
use crate::manifest::{self, RunManifest};

pub fn run(args: &ReproduceArgs) -> Result<()> {
    let started = Instant::now();
    init_threads(&args.common);
    let seed = resolve_seed(&args.common);
    ensure_out_dir(&args.common)?;

    let (name, config) = match args.experiment {
        ExperimentArg::Convergence => convergence(args, seed)?,
        ExperimentArg::Speed => speed(args, seed)?,
        ExperimentArg::Runtime => runtime(args, seed)?,
        ExperimentArg::Stabsweep => stabsweep(args, seed)?,
    };

    let outputs = vec![format!("{name}.csv")];
    manifest::write(
        &args.common.out_dir,
        &RunManifest {
            command: "reproduce",
            version: env!("CARGO_PKG_VERSION"),
            seed,
            input_digest: manifest::sha256_hex(config.to_string().as_bytes()),
            config,
            outputs: outputs.clone(),
            duration_ms: started.elapsed().as_millis(),
        },
    )?;
    print_written(&args.common.out_dir, &outputs);
    Ok(())
}

fn convergence(args: &ReproduceArgs, seed: u64) -> Result<(&'static str, serde_json::Value)> {
    let settings = ConvergenceSettings {
        n: args.n,
        replications: args.reps.unwrap_or(20),
        total_iterations: args.iterations.unwrap_or(1500),
        step_length: args.nu,
        seed,
    };
    let rows = simgen::run_convergence(&settings)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.replication.to_string(),
                r.method.name().to_string(),
                param_name(r.param_index),
                format!("x{}", r.covariate_index + 1),
                fmt(r.estimate),
                fmt(r.truth),
            ]
        })
        .collect();
    write_csv(
        &out_path(&args.common, "convergence.csv"),
        &["replication", "method", "parameter", "covariate", "estimate", "truth"],
        &table,
    )?;
    println!("convergence: {} rows", table.len());
    Ok((
        "convergence",
        json!({
            "experiment": "convergence",
            "n": settings.n,
            "replications": settings.replications,
            "total_iterations": settings.total_iterations,
            "nu": settings.step_length,
        }),
    ))
}

fn speed(args: &ReproduceArgs, seed: u64) -> Result<(&'static str, serde_json::Value)> {
    let settings = SpeedSettings {
        n: args.n,
        replications: args.reps.unwrap_or(20),
        noise_levels: args.noise_levels.clone().unwrap_or_else(|| vec![0, 50]),
        total_updates: args.iterations.unwrap_or(1000),
        step_length: args.nu,
        seed,
    };
    let rows = simgen::run_speed(&settings)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.method.name().to_string(),
                r.p_noise.to_string(),
                r.total_updates.to_string(),
                fmt(r.mean_risk),
            ]
        })
        .collect();
    write_csv(
        &out_path(&args.common, "speed.csv"),
        &["method", "p_noise", "total_updates", "mean_risk"],
        &table,
    )?;
    println!("speed: {} rows", table.len());
    Ok((
        "speed",
        json!({
            "experiment": "speed",
            "n": settings.n,
            "replications": settings.replications,
            "noise_levels": settings.noise_levels,
            "total_updates": settings.total_updates,
            "nu": settings.step_length,
        }),
    ))
}

fn runtime(args: &ReproduceArgs, seed: u64) -> Result<(&'static str, serde_json::Value)> {
    let settings = RuntimeSettings {
        scenarios: vec![
            distboost_core::simgen::ScenarioId::S1A,
            distboost_core::simgen::ScenarioId::S3A,
        ],
        n: args.n,
        folds: args.folds,
        resampling: ResamplingKind::Bootstrap,
        grid_max: args.grid_max,
        grid_length: args.grid_length,
        step_length: args.nu,
        seed,
    };
    let rows = simgen::run_runtime_benchmark(&settings)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.scenario.name().to_string(),
                r.method.name().to_string(),
                r.n_params.to_string(),
                r.grid_points.to_string(),
                r.path_fits.to_string(),
                r.grid_evaluations.to_string(),
                r.best_mstop
                    .iter()
                    .map(|m| m.to_string())
                    .collect::<Vec<_>>()
                    .join("/"),
                fmt(r.best_risk),
            ]
        })
        .collect();
    write_csv(
        &out_path(&args.common, "runtime.csv"),
        &[
            "scenario",
            "method",
            "n_params",
            "grid_points",
            "path_fits",
            "grid_evaluations",
            "best_mstop",
            "best_oob_risk",
        ],
        &table,
    )?;
    println!("runtime: {} rows", table.len());
    Ok((
        "runtime",
        json!({
            "experiment": "runtime",
            "n": settings.n,
            "folds": settings.folds,
            "grid_max": settings.grid_max,
            "grid_length": settings.grid_length,
            "nu": settings.step_length,
        }),
    ))
}

fn stabsweep(args: &ReproduceArgs, seed: u64) -> Result<(&'static str, serde_json::Value)> {
    let methods: Vec<_> = args
        .methods
        .clone()
        .unwrap_or_else(|| vec![MethodArg::Inner, MethodArg::Cyclical])
        .into_iter()
        .map(MethodArg::to_method)
        .collect();
    let pi_grid = simgen::pi_grid(args.pi_from, args.pi_to, args.pi_step);
    let settings = SweepSettings {
        scenario: args.scenario.to_id(),
        methods,
        replications: args.reps.unwrap_or(10),
        n: args.n,
        q_values: args.q_values.clone().unwrap_or_else(|| vec![8, 15, 25, 50]),
        p_values: args.p_values.clone().unwrap_or_else(|| vec![50]),
        pi_grid: pi_grid.clone(),
        subsamples: args.subsamples,
        mstop_cap: args.mstop_cap,
        step_length: args.nu,
        seed,
    };
    let rows = simgen::run_stabsel_sweep(&settings)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.replication.to_string(),
                r.scenario.name().to_string(),
                r.method.name().to_string(),
                r.p.to_string(),
                r.q.to_string(),
                fmt(r.pi_thr),
                r.tp.to_string(),
                r.fp.to_string(),
                fmt(r.pfer_bound),
            ]
        })
        .collect();
    write_csv(
        &out_path(&args.common, "stabsweep.csv"),
        &["replication", "scenario", "method", "p", "q", "pi_thr", "tp", "fp", "pfer_bound"],
        &table,
    )?;
    println!("stabsweep: {} rows", table.len());
    Ok((
        "stabsweep",
        json!({
            "experiment": "stabsweep",
            "scenario": settings.scenario.name(),
            "methods": settings.methods.iter().map(|m| m.name()).collect::<Vec<_>>(),
            "replications": settings.replications,
            "n": settings.n,
            "q_values": settings.q_values,
            "p_values": settings.p_values,
            "pi_grid_len": pi_grid.len(),
            "subsamples": settings.subsamples,
            "mstop_cap": settings.mstop_cap,
            "nu": settings.step_length,
        }),
    ))
}

fn param_name(k: usize) -> String {
    ["mu", "sigma", "nu"][k].to_string()
}
