use std::time::Instant;

use anyhow::Result;
use distboost_core::engine::{self, Method, Mstop};
use serde_json::json;

use crate::args::FitArgs;
use crate::commands::{
    boost_config, ensure_out_dir, init_threads, out_path, print_written, read_input,
    resolve_mstop, resolve_seed,
};
use crate::csvio::{fmt, write_csv};
use crate::manifest::{self, RunManifest};
use crate::model;

pub fn run(args: &FitArgs) -> Result<()> {
    let started = Instant::now();
    init_threads(&args.common);
    let seed = resolve_seed(&args.common);

    let (csv_data, digest) = read_input(&args.input)?;
    let data = &csv_data.dataset;
    let family = args.input.family.to_family();
    let method = args.input.method.to_method();
    let mstop = resolve_mstop(method, &args.mstop, family.n_params())?;
    let config = boost_config(&args.input, data, mstop.clone())?;

    let state = match method {
        Method::Cyclical => engine::fit_cyclical(config, data)?,
        _ => engine::fit_noncyclical(config, data)?,
    };

    ensure_out_dir(&args.common)?;
    let mstop_list: Vec<usize> = match &mstop {
        Mstop::PerParameter(v) => v.clone(),
        Mstop::Total(m) => vec![*m],
    };
    let model_file = model::from_state(
        &state,
        data.column_names(),
        &csv_data.response_column,
        method.name(),
        &mstop_list,
    );
    model::write(&out_path(&args.common, "model.json"), &model_file)?;

    let rows: Vec<Vec<String>> = state
        .risk_trace
        .iter()
        .enumerate()
        .map(|(m, &risk)| {
            let updates = match &mstop {
                Mstop::PerParameter(v) => v.iter().map(|&cap| cap.min(m)).sum::<usize>(),
                Mstop::Total(_) => m,
            };
            vec![m.to_string(), updates.to_string(), fmt(risk)]
        })
        .collect();
    write_csv(
        &out_path(&args.common, "risk_trace.csv"),
        &["iteration", "total_updates", "risk"],
        &rows,
    )?;

    let outputs = vec!["model.json".to_string(), "risk_trace.csv".to_string()];
    manifest::write(
        &args.common.out_dir,
        &RunManifest {
            command: "fit",
            version: env!("CARGO_PKG_VERSION"),
            seed,
            config: json!({
                "input": args.input.input.display().to_string(),
                "response": csv_data.response_column,
                "family": family.name(),
                "method": method.name(),
                "mstop": mstop_list,
                "nu": args.input.nu,
                "learner": format!("{:?}", args.input.learner).to_lowercase(),
                "penalty": args.input.penalty,
            }),
            input_digest: digest,
            outputs: outputs.clone(),
            duration_ms: started.elapsed().as_millis(),
        },
    )?;

    println!(
        "fit: {} iterations, final risk {:.6}, {} selected pairs",
        state.risk_trace.len() - 1,
        engine::risk(&state),
        state.distinct_pairs().len()
    );
    print_written(&args.common.out_dir, &outputs);
    Ok(())
}
