use std::process::ExitCode;

use anyhow::Result;
use lrcp_core::io::write_report;
use lrcp_core::synth::binomial;
use lrcp_core::{brute_force_best_subset, compress, CompressionConfig};
use serde::Serialize;

use crate::args::OracleArgs;
use crate::inputs::load_single;

/// Exit status when LRCP's selection is not a minimizer.
pub const MISMATCH: u8 = 2;

#[derive(Serialize)]
struct Report<'a> {
    config: &'a OracleArgs,
    n_tokens: usize,
    subsets: u128,
    lrcp_indices: Vec<usize>,
    lrcp_loss: f64,
    oracle_indices: Vec<usize>,
    oracle_loss: f64,
    optimal: bool,
}

pub fn run(args: &OracleArgs) -> Result<ExitCode> {
    let x = load_single(&args.input)?;
    let cfg = CompressionConfig::new(args.rank, args.budget)
        .with_merge(false)
        .with_seed(args.seed);
    let result = compress(&x, &cfg)?;
    let (oracle_indices, oracle_loss) = brute_force_best_subset(&x, &result.subspace, args.budget)?;
    let optimal = result.surrogate_loss <= oracle_loss;
    let report = Report {
        config: args,
        n_tokens: x.n_tokens(),
        subsets: binomial(x.n_tokens(), args.budget),
        lrcp_indices: result.retained_indices,
        lrcp_loss: result.surrogate_loss,
        oracle_indices,
        oracle_loss,
        optimal,
    };
    if let Some(out) = &args.out {
        write_report(&report, out)?;
    }
    println!(
        "LRCP loss {:.17e}, minimum over {} subsets {:.17e}: {}",
        report.lrcp_loss,
        report.subsets,
        report.oracle_loss,
        if optimal { "optimal" } else { "MISMATCH" }
    );
    if optimal {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "error: LRCP selection {:?} is not a minimizer; oracle chose {:?}",
            report.lrcp_indices, report.oracle_indices
        );
        Ok(ExitCode::from(MISMATCH))
    }
}
