use std::process::ExitCode;

use anyhow::{Context, Result};
use lrcp_core::io::{write_csv, write_report};
use lrcp_core::linalg::EXACT_SVD_MAX_DIM;
use lrcp_core::{explained_variance_spectrum, SpectrumReport, TokenMatrix};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::SpectrumArgs;
use crate::inputs::load_layers;

/// Components computed when the randomized path is needed and none were requested.
const DEFAULT_RANDOMIZED_COMPONENTS: usize = 64;

#[derive(Serialize)]
struct LayerSpectrum {
    name: String,
    n_tokens: usize,
    dim: usize,
    spectrum: SpectrumReport,
}

#[derive(Serialize)]
struct Report<'a> {
    config: &'a SpectrumArgs,
    layers: Vec<LayerSpectrum>,
}

#[derive(Serialize)]
struct Row<'a> {
    layer: &'a str,
    component: usize,
    explained: f64,
    cumulative: f64,
}

fn default_components(x: &TokenMatrix) -> usize {
    let limit = x.n_tokens().min(x.dim());
    if limit <= EXACT_SVD_MAX_DIM {
        limit
    } else {
        DEFAULT_RANDOMIZED_COMPONENTS.min(limit - 1)
    }
}

pub fn run(args: &SpectrumArgs) -> Result<ExitCode> {
    let layers = load_layers(&args.input)?;
    let results = layers
        .par_iter()
        .map(|layer| {
            let components = args
                .components
                .unwrap_or_else(|| default_components(&layer.matrix));
            let spectrum = explained_variance_spectrum(&layer.matrix, components)
                .and_then(|s| s.with_rank_at(&args.variance))
                .with_context(|| format!("layer {}", layer.name))?;
            Ok(LayerSpectrum {
                name: layer.name.clone(),
                n_tokens: layer.matrix.n_tokens(),
                dim: layer.matrix.dim(),
                spectrum,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    for layer in &results {
        let ranks: Vec<String> = layer
            .spectrum
            .rank_at
            .iter()
            .map(|(v, r)| format!("Rank@{v}={r}"))
            .collect();
        println!("{}: {}", layer.name, ranks.join(" "));
    }
    if let Some(csv) = &args.csv {
        let mut rows = Vec::new();
        for layer in &results {
            let cumulative = layer.spectrum.cumulative();
            for (j, (&e, &c)) in layer.spectrum.explained.iter().zip(&cumulative).enumerate() {
                rows.push(Row {
                    layer: &layer.name,
                    component: j + 1,
                    explained: e,
                    cumulative: c,
                });
            }
        }
        write_csv(&rows, csv)?;
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
