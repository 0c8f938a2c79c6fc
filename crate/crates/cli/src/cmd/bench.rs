use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Result};
use lrcp_core::io::write_csv;
use lrcp_core::rng::{gaussian_matrix, stream};
use lrcp_core::{compress, CompressionConfig, TokenMatrix};
use serde::Serialize;

use crate::args::BenchArgs;

#[derive(Debug, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub d: usize,
    pub rank: usize,
    pub budget: usize,
    pub repeat: usize,
    pub median_seconds: f64,
}

/// Least-squares slope of `ln t` against `ln n`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(n, t)| (n.ln(), t.ln())).collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

pub fn run(args: &BenchArgs) -> Result<ExitCode> {
    if args.sizes.is_empty() || args.repeat == 0 {
        bail!("--sizes and --repeat must be non-empty and positive");
    }
    let cfg = CompressionConfig::new(args.rank, args.budget).with_seed(args.seed);
    let mut rows = Vec::with_capacity(args.sizes.len());
    for &n in &args.sizes {
        let x = TokenMatrix::new(gaussian_matrix(
            n,
            args.dim,
            &mut stream(args.seed, n as u64),
        ))?;
        cfg.validate(n, args.dim)?;
        let times = (0..args.repeat)
            .map(|_| {
                let start = Instant::now();
                compress(&x, &cfg).map(|_| start.elapsed().as_secs_f64())
            })
            .collect::<lrcp_core::Result<Vec<_>>>()?;
        let row = BenchRow {
            n,
            d: args.dim,
            rank: args.rank,
            budget: args.budget,
            repeat: args.repeat,
            median_seconds: median(times),
        };
        println!("N = {:>6}: {:.4} s", row.n, row.median_seconds);
        rows.push(row);
    }
    write_csv(&rows, &args.out)?;
    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.n as f64, r.median_seconds))
        .collect();
    if let Some(slope) = loglog_slope(&points) {
        println!("log-log slope in N: {slope:.3}");
    }
    Ok(ExitCode::SUCCESS)
}
