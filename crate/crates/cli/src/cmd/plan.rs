use std::process::ExitCode;

use anyhow::{bail, Result};
use lrcp_core::io::write_report;
use lrcp_core::{make_staged_plan_at, StagedPlan};
use serde::Serialize;

use crate::args::PlanArgs;

#[derive(Serialize)]
struct Report<'a> {
    config: &'a PlanArgs,
    plan: StagedPlan,
}

pub fn run(args: &PlanArgs) -> Result<ExitCode> {
    let at: &[usize] = match args.ratios.len() {
        1 => &[],
        k if args.at.len() == k - 1 => &args.at,
        k => bail!(
            "{k} stages need {} --at layers, got {}",
            k - 1,
            args.at.len()
        ),
    };
    let plan = make_staged_plan_at(args.tokens, &args.ratios, args.layers, at)?;
    for stage in &plan.stages {
        println!(
            "{:<16} ratio {:.4}  keep {:>6}",
            stage.label,
            stage.retain_ratio.value(),
            stage.absolute_keep
        );
    }
    println!(
        "final keep {} ({:.1}%), average retain {:.1}% (nominal final {:.1}%, nominal average {:.1}%)",
        plan.final_keep,
        100.0 * plan.final_keep as f64 / plan.total_tokens as f64,
        100.0 * plan.average_retention,
        100.0 * plan.final_retention,
        100.0 * plan.nominal_average_retention
    );
    if let Some(out) = &args.out {
        write_report(&Report { config: args, plan }, out)?;
    }
    Ok(ExitCode::SUCCESS)
}
