use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use lrcp_core::io::write_report;
use lrcp_core::{
    stability_random_dropout, stability_under_pruning, CompressionConfig, StabilityReport,
    TokenMatrix,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{StabilityArgs, StabilityModeArg};
use crate::inputs::load_layers;

#[derive(Serialize)]
struct LayerStability {
    name: String,
    n_tokens: usize,
    reports: Vec<StabilityReport>,
}

#[derive(Serialize)]
struct Report<'a> {
    config: &'a StabilityArgs,
    layers: Vec<LayerStability>,
}

fn pruned(x: &TokenMatrix, args: &StabilityArgs) -> Result<StabilityReport> {
    let n = x.n_tokens();
    let mut drops = args.drop.clone();
    drops.sort_by(f64::total_cmp);
    drops.dedup();
    let mut keeps = Vec::with_capacity(drops.len());
    for &p in &drops {
        if !(0.0..1.0).contains(&p) {
            bail!("invalid drop ratio {p}: must lie in [0, 1)");
        }
        keeps.push(((1.0 - p) * n as f64 + 1e-9).floor() as usize);
    }
    let cfg = CompressionConfig::new(args.rank, 1).with_seed(args.seed);
    Ok(stability_under_pruning(x, &cfg, &keeps)?)
}

pub fn run(args: &StabilityArgs) -> Result<ExitCode> {
    if args.drop.is_empty() {
        bail!("--drop needs at least one ratio");
    }
    let layers = load_layers(&args.input)?;
    let results = layers
        .par_iter()
        .map(|layer| {
            let x = &layer.matrix;
            let reports = match args.mode {
                StabilityModeArg::Random => args
                    .drop
                    .iter()
                    .map(|&p| stability_random_dropout(x, args.rank, p, args.trials, args.seed))
                    .collect::<lrcp_core::Result<Vec<_>>>()
                    .map_err(anyhow::Error::from),
                StabilityModeArg::Pruned => pruned(x, args).map(|r| vec![r]),
            }
            .with_context(|| format!("layer {}", layer.name))?;
            Ok(LayerStability {
                name: layer.name.clone(),
                n_tokens: x.n_tokens(),
                reports,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    for layer in &results {
        for rep in &layer.reports {
            match args.mode {
                StabilityModeArg::Random => println!(
                    "{}: drop {} mean {:.6} min {:.6}",
                    layer.name, rep.drop_ratio, rep.mean_similarity, rep.min_similarity
                ),
                StabilityModeArg::Pruned => {
                    for (keep, s) in rep.stage_keeps.iter().zip(&rep.similarities) {
                        println!("{}: keep {} similarity {:.6}", layer.name, keep, s);
                    }
                }
            }
        }
    }
    write_report(
        &Report {
            config: args,
            layers: results,
        },
        &args.out,
    )?;
    Ok(ExitCode::SUCCESS)
}
