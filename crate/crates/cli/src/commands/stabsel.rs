use std::time::Instant;

use anyhow::{bail, Result};
use distboost_core::engine::Mstop;
use distboost_core::stabsel::{self, GivenPair, StabSelConfig};
use serde_json::json;

use crate::args::StabselArgs;
use crate::commands::{
    boost_config, ensure_out_dir, init_threads, out_path, print_written, read_input,
    resolve_seed,
};
use crate::csvio::{fmt, write_csv};
use crate::manifest::{self, RunManifest};

pub fn run(args: &StabselArgs) -> Result<()> {
    let started = Instant::now();
    init_threads(&args.common);
    let seed = resolve_seed(&args.common);

    let (csv_data, digest) = read_input(&args.input)?;
    let data = &csv_data.dataset;
    let family = args.input.family.to_family();
    let method = args.input.method.to_method();
    let k = family.n_params();
    let effective_p = k * data.n_columns();

    let given = match (args.q, args.pi_thr, args.pfer) {
        (Some(q), Some(pi_thr), None) => GivenPair::QAndPiThr { q, pi_thr },
        (Some(q), None, Some(pfer)) => GivenPair::QAndPfer { q, pfer },
        (None, Some(pi_thr), Some(pfer)) => GivenPair::PiThrAndPfer { pi_thr, pfer },
        _ => bail!("exactly two of --q, --pi-thr and --pfer must be given"),
    };
    let triple = stabsel::resolve_triple(given, effective_p)?;
    let config = StabSelConfig::new(triple, args.subsamples, args.mstop_cap, seed)?;
    let boost = boost_config(&args.input, data, Mstop::Total(0))?;
    let result = stabsel::run_stabsel(&config, &boost, data)?;

    ensure_out_dir(&args.common)?;
    // frequency table sorted by frequency (descending), then pair
    let mut pairs: Vec<(&(usize, usize), &f64)> = result.frequencies.iter().collect();
    pairs.sort_by(|a, b| b.1.total_cmp(a.1).then(a.0.cmp(b.0)));
    let param_names = family.param_names();
    let rows: Vec<Vec<String>> = pairs
        .iter()
        .map(|(&(param, cov), &freq)| {
            vec![
                param_names[param].to_string(),
                data.column_names()[cov].clone(),
                fmt(freq),
                if result.stable_set.contains(&(param, cov)) {
                    "1"
                } else {
                    "0"
                }
                .to_string(),
            ]
        })
        .collect();
    write_csv(
        &out_path(&args.common, "frequencies.csv"),
        &["parameter", "covariate", "frequency", "stable"],
        &rows,
    )?;

    let stable: Vec<serde_json::Value> = result
        .stable_set
        .iter()
        .map(|&(param, cov)| {
            json!({
                "parameter": param_names[param],
                "covariate": data.column_names()[cov],
                "frequency": result.frequencies[&(param, cov)],
            })
        })
        .collect();
    let report = json!({
        "q": config.q,
        "pi_thr": config.pi_thr,
        "pfer": config.pfer,
        "pfer_bound": result.pfer_bound,
        "given": match triple.given {
            stabsel::Given::QAndPiThr => "q+pi_thr",
            stabsel::Given::QAndPfer => "q+pfer",
            stabsel::Given::PiThrAndPfer => "pi_thr+pfer",
        },
        "effective_p": result.effective_p,
        "subsamples": result.subsamples,
        "mstop_cap": args.mstop_cap,
        "stable_set": stable,
        "cap_warnings": result.cap_warnings,
    });
    std::fs::write(
        out_path(&args.common, "report.json"),
        serde_json::to_string_pretty(&report)? + "\n",
    )?;

    let outputs = vec!["frequencies.csv".to_string(), "report.json".to_string()];
    manifest::write(
        &args.common.out_dir,
        &RunManifest {
            command: "stabsel",
            version: env!("CARGO_PKG_VERSION"),
            seed,
            config: json!({
                "input": args.input.input.display().to_string(),
                "response": csv_data.response_column,
                "family": family.name(),
                "method": method.name(),
                "q": config.q,
                "pi_thr": config.pi_thr,
                "pfer": config.pfer,
                "subsamples": args.subsamples,
                "mstop_cap": args.mstop_cap,
                "nu": args.input.nu,
            }),
            input_digest: digest,
            outputs: outputs.clone(),
            duration_ms: started.elapsed().as_millis(),
        },
    )?;

    println!(
        "stability selection: q = {}, pi_thr = {:.3}, PFER bound {:.4} over {} candidate pairs",
        config.q, config.pi_thr, result.pfer_bound, result.effective_p
    );
    println!("stable set ({} pairs):", result.stable_set.len());
    for (&(param, cov), &freq) in pairs.iter().take(20) {
        let marker = if result.stable_set.contains(&(param, cov)) {
            "*"
        } else {
            " "
        };
        println!(
            " {marker} {:<6} {:<16} {:.3}",
            param_names[param],
            data.column_names()[cov],
            freq
        );
    }
    if !result.cap_warnings.is_empty() {
        eprintln!(
            "warning: {} subsample fit(s) hit the iteration cap before selecting q pairs",
            result.cap_warnings.len()
        );
    }
    print_written(&args.common.out_dir, &outputs);
    Ok(())
}
