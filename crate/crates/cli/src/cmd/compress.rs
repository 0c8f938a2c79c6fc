use std::fs;
use std::process::ExitCode;

use anyhow::{Context, Result};
use lrcp_core::io::{save_matrix, token_rows, write_csv, write_report, CompressionReport, Dtype};
use lrcp_core::{compress, CompressionConfig};
use serde::Serialize;

use crate::args::{CompressArgs, OutputDtype};
use crate::inputs::load_single;

#[derive(Serialize)]
struct Report<'a> {
    config: &'a CompressArgs,
    result: CompressionReport,
}

pub fn run(args: &CompressArgs) -> Result<ExitCode> {
    let x = load_single(&args.input)?;
    let cfg = CompressionConfig::new(args.rank, args.budget)
        .with_scoring(args.scoring)
        .with_merge(!args.no_merge)
        .with_centering(args.center)
        .with_subspace_method(args.subspace)
        .with_seed(args.seed);
    let result = compress(&x, &cfg)?;

    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating output directory {}", args.out.display()))?;
    let dtype = match args.dtype {
        OutputDtype::F32 => Dtype::F32,
        OutputDtype::F64 => Dtype::F64,
    };
    save_matrix(&result.output, args.out.join("compressed.npy"), dtype)?;
    let report = Report {
        config: args,
        result: CompressionReport::from(&result),
    };
    write_report(&report, args.out.join("report.json"))?;
    write_csv(&token_rows(&result), args.out.join("tokens.csv"))?;

    println!(
        "kept {} of {} tokens (D = {}, r = {}), surrogate loss {:.6e}",
        result.retained_indices.len(),
        x.n_tokens(),
        x.dim(),
        args.rank,
        result.surrogate_loss
    );
    Ok(ExitCode::SUCCESS)
}
