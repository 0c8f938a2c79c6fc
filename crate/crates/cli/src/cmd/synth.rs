use std::process::ExitCode;

use anyhow::Result;
use lrcp_core::io::{save_matrix, write_report, Dtype};
use lrcp_core::synth::sigma_for_relative_noise;
use lrcp_core::{gen_background_outliers, gen_low_rank_noise_with, NoiseKind, PlantedInstance};
use serde::Serialize;

use crate::args::{LowRankArgs, NoiseArg, OutlierArgs, SynthCommand};

#[derive(Serialize)]
struct Truth<'a, C: Serialize> {
    config: &'a C,
    n_tokens: usize,
    dim: usize,
    noise_sigma: f64,
    outlier_indices: &'a [usize],
    /// Planted subspace explained fractions.
    explained: &'a [f64],
    /// Planted basis, one row per ambient coordinate.
    basis: Vec<Vec<f64>>,
}

fn write<C: Serialize>(
    instance: &PlantedInstance,
    config: &C,
    out: &std::path::Path,
) -> Result<()> {
    save_matrix(&instance.matrix, out, Dtype::F64)?;
    let basis = instance.true_subspace.basis();
    let truth = Truth {
        config,
        n_tokens: instance.matrix.n_tokens(),
        dim: instance.matrix.dim(),
        noise_sigma: instance.noise_sigma,
        outlier_indices: &instance.outlier_indices,
        explained: instance.true_subspace.explained(),
        basis: basis.rows().into_iter().map(|r| r.to_vec()).collect(),
    };
    write_report(&truth, out.with_extension("json"))?;
    println!(
        "wrote {} x {} matrix to {}",
        instance.matrix.n_tokens(),
        instance.matrix.dim(),
        out.display()
    );
    Ok(())
}

pub fn run(cmd: &SynthCommand) -> Result<ExitCode> {
    match cmd {
        SynthCommand::LowRank(args) => low_rank(args),
        SynthCommand::Outliers(args) => outliers(args),
    }?;
    Ok(ExitCode::SUCCESS)
}

fn low_rank(args: &LowRankArgs) -> Result<()> {
    let sigma = match (args.sigma, args.relative_noise) {
        (Some(s), _) => s,
        (None, Some(rel)) => sigma_for_relative_noise(&args.spectrum, args.n, args.d, rel),
        (None, None) => 0.0,
    };
    let noise = match args.noise {
        NoiseArg::Gaussian => NoiseKind::Gaussian,
        NoiseArg::StudentT => NoiseKind::StudentT { dof: args.dof },
    };
    let instance = gen_low_rank_noise_with(
        args.n,
        args.d,
        args.spectrum.len(),
        &args.spectrum,
        sigma,
        noise,
        args.seed,
    )?;
    write(&instance, args, &args.out)
}

fn outliers(args: &OutlierArgs) -> Result<()> {
    let instance =
        gen_background_outliers(args.background, args.outliers, args.d, args.rank, args.seed)?;
    write(&instance, args, &args.out)
}
