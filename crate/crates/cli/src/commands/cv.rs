use std::time::Instant;

use anyhow::Result;
use distboost_core::engine::{Method, Mstop};
use distboost_core::tune::{self, ResamplingPlan};
use serde_json::json;

use crate::args::CvArgs;
use crate::commands::{
    boost_config, ensure_out_dir, init_threads, out_path, print_written, read_input,
    resolve_seed,
};
use crate::csvio::{fmt, write_csv};
use crate::manifest::{self, RunManifest};

pub fn run(args: &CvArgs) -> Result<()> {
    let started = Instant::now();
    init_threads(&args.common);
    let seed = resolve_seed(&args.common);

    let (csv_data, digest) = read_input(&args.input)?;
    let data = &csv_data.dataset;
    let family = args.input.family.to_family();
    let method = args.input.method.to_method();
    let k = family.n_params();

    let grid_params = if method == Method::Cyclical { k } else { 1 };
    let grid = tune::make_grid(args.grid_max, args.grid_length, grid_params)?;
    let plan = ResamplingPlan::new(args.plan.to_kind(), args.folds, seed)?;
    // the grid governs how far each path runs
    let config = boost_config(&args.input, data, Mstop::Total(0))?;
    let report = tune::cv_risk(&config, data, &plan, &grid)?;

    ensure_out_dir(&args.common)?;
    let mut header: Vec<&str> = Vec::new();
    let param_names = family.param_names();
    let mut header_owned: Vec<String> = Vec::new();
    if method == Method::Cyclical {
        for name in param_names {
            header_owned.push(format!("mstop_{name}"));
        }
    } else {
        header_owned.push("mstop".to_string());
    }
    header.extend(header_owned.iter().map(|s| s.as_str()));
    header.push("mean_oob_risk");
    header.push("selected");

    let rows: Vec<Vec<String>> = report
        .grid
        .points
        .iter()
        .enumerate()
        .map(|(i, point)| {
            let mut row: Vec<String> = point.iter().map(|m| m.to_string()).collect();
            row.push(fmt(report.mean_risks[i]));
            row.push(if i == report.best_index { "1" } else { "0" }.to_string());
            row
        })
        .collect();
    write_csv(&out_path(&args.common, "grid_risk.csv"), &header, &rows)?;

    let outputs = vec!["grid_risk.csv".to_string()];
    manifest::write(
        &args.common.out_dir,
        &RunManifest {
            command: "cv",
            version: env!("CARGO_PKG_VERSION"),
            seed,
            config: json!({
                "input": args.input.input.display().to_string(),
                "response": csv_data.response_column,
                "family": family.name(),
                "method": method.name(),
                "folds": args.folds,
                "plan": format!("{:?}", args.plan).to_lowercase(),
                "grid_max": args.grid_max,
                "grid_length": args.grid_length,
                "nu": args.input.nu,
                "chosen_mstop": report.best_point(),
                "best_mean_oob_risk": report.best_risk(),
                "path_fits": report.cost.path_fits,
                "grid_evaluations": report.cost.grid_evaluations,
                "dropped_folds": report.dropped_folds,
                "effective_folds": report.effective_folds,
            }),
            input_digest: digest,
            outputs: outputs.clone(),
            duration_ms: started.elapsed().as_millis(),
        },
    )?;

    println!(
        "cv: chosen mstop {:?} with mean out-of-bag risk {:.6} ({} path fits, {} grid evaluations)",
        report.best_point(),
        report.best_risk(),
        report.cost.path_fits,
        report.cost.grid_evaluations
    );
    if !report.dropped_folds.is_empty() {
        eprintln!(
            "warning: dropped {} degenerate fold(s): {:?}",
            report.dropped_folds.len(),
            report.dropped_folds
        );
    }
    print_written(&args.common.out_dir, &outputs);
    Ok(())
}
