//! Multi-stage retention plans and their execution.
//!
//! A plan compresses once at the vision encoder output and again at chosen
//! LLM layers. Stage `t` keeps `floor(N₀ · Π_{s≤t} ratio_s)` tokens, so the
//! nominal ratio product and the integer keeps stay consistent. The average
//! retention weights each stage's keep by the number of LLM layers that see
//! it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::compress::{compress, CompressionResult};
use super::config::CompressionConfig;
use crate::error::{LrcpError, Result};
use crate::matrix::TokenMatrix;

/// Absorbs representation error in ratio products such as `576 · (1/6) · (1/3)`.
const KEEP_EPS: f64 = 1e-9;

/// A retention fraction in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct RetainRatio(f64);

impl RetainRatio {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 && value <= 1.0 {
            Ok(Self(value))
        } else {
            Err(LrcpError::InvalidRatio(value))
        }
    }

    pub fn fraction(numerator: u32, denominator: u32) -> Result<Self> {
        Self::new(numerator as f64 / denominator as f64)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for RetainRatio {
    type Error = LrcpError;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<RetainRatio> for f64 {
    fn from(r: RetainRatio) -> f64 {
        r.0
    }
}

impl fmt::Display for RetainRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Accepts `0.333`, `1/3` or `33.3%`.
impl FromStr for RetainRatio {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        let value = if let Some(pct) = s.strip_suffix('%') {
            pct.trim().parse::<f64>().map(|v| v / 100.0)
        } else if let Some((num, den)) = s.split_once('/') {
            match (num.trim().parse::<f64>(), den.trim().parse::<f64>()) {
                (Ok(n), Ok(d)) => Ok(n / d),
                (Err(e), _) | (_, Err(e)) => Err(e),
            }
        } else {
            s.parse::<f64>()
        }
        .map_err(|e| format!("invalid ratio '{s}': {e}"))?;
        RetainRatio::new(value).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStage {
    pub label: String,
    pub retain_ratio: RetainRatio,
    pub absolute_keep: usize,
    /// First LLM layer that sees this stage's tokens.
    pub start_layer: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StagedPlan {
    pub total_tokens: usize,
    pub llm_layers: usize,
    pub stages: Vec<PlanStage>,
    pub final_keep: usize,
    /// Product of the stage ratios.
    pub final_retention: f64,
    /// `Σ_t keep_t · layers_t / (L · N₀)` from the integer keeps.
    pub average_retention: f64,
    /// Same average computed from the ratio products instead of the keeps.
    pub nominal_average_retention: f64,
}

impl StagedPlan {
    pub fn keeps(&self) -> Vec<usize> {
        self.stages.iter().map(|s| s.absolute_keep).collect()
    }
}

/// Plan with an encoder-output stage and, for two ratios, one more stage at
/// LLM layer `compress_layer`.
pub fn make_staged_plan(
    n_tokens: usize,
    stage_ratios: &[RetainRatio],
    llm_layers: usize,
    compress_layer: usize,
) -> Result<StagedPlan> {
    if stage_ratios.len() > 2 {
        return Err(LrcpError::DimensionMismatch {
            expected: 2,
            actual: stage_ratios.len(),
        });
    }
    if compress_layer >= llm_layers {
        return Err(LrcpError::InvalidLayer {
            layer: compress_layer,
            layers: llm_layers,
        });
    }
    let layers: &[usize] = if stage_ratios.len() == 2 {
        &[compress_layer]
    } else {
        &[]
    };
    make_staged_plan_at(n_tokens, stage_ratios, llm_layers, layers)
}

/// General plan: stage 0 at the encoder output, stage `t ≥ 1` at LLM layer
/// `compress_layers[t - 1]` (strictly increasing, below `llm_layers`).
pub fn make_staged_plan_at(
    n_tokens: usize,
    stage_ratios: &[RetainRatio],
    llm_layers: usize,
    compress_layers: &[usize],
) -> Result<StagedPlan> {
    if n_tokens == 0 {
        return Err(LrcpError::EmptyInput("plan has zero tokens".into()));
    }
    if stage_ratios.is_empty() {
        return Err(LrcpError::EmptyInput("plan has no stages".into()));
    }
    if compress_layers.len() + 1 != stage_ratios.len() {
        return Err(LrcpError::DimensionMismatch {
            expected: stage_ratios.len().saturating_sub(1),
            actual: compress_layers.len(),
        });
    }
    if llm_layers == 0 {
        return Err(LrcpError::InvalidLayer {
            layer: 0,
            layers: 0,
        });
    }
    for (i, &layer) in compress_layers.iter().enumerate() {
        if layer >= llm_layers || (i > 0 && layer <= compress_layers[i - 1]) {
            return Err(LrcpError::InvalidLayer {
                layer,
                layers: llm_layers,
            });
        }
    }

    let mut starts = vec![0usize];
    starts.extend_from_slice(compress_layers);
    let mut product = 1.0;
    let mut stages = Vec::with_capacity(stage_ratios.len());
    let mut weighted_keep = 0.0;
    let mut weighted_nominal = 0.0;
    for (t, ratio) in stage_ratios.iter().enumerate() {
        product *= ratio.value();
        let keep = (n_tokens as f64 * product + KEEP_EPS).floor() as usize;
        if keep == 0 {
            return Err(LrcpError::ZeroKeep { stage: t });
        }
        let start = starts[t];
        let end = starts.get(t + 1).copied().unwrap_or(llm_layers);
        let span = (end - start) as f64;
        weighted_keep += keep as f64 * span;
        weighted_nominal += product * span;
        stages.push(PlanStage {
            label: if t == 0 {
                "vision_encoder".to_string()
            } else {
                format!("llm_layer_{start}")
            },
            retain_ratio: *ratio,
            absolute_keep: keep,
            start_layer: start,
        });
    }
    let final_keep = stages.last().expect("at least one stage").absolute_keep;
    Ok(StagedPlan {
        total_tokens: n_tokens,
        llm_layers,
        stages,
        final_keep,
        final_retention: product,
        average_retention: weighted_keep / (llm_layers as f64 * n_tokens as f64),
        nominal_average_retention: weighted_nominal / llm_layers as f64,
    })
}

/// Where stage inputs after the first come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageMode {
    /// Each stage compresses the previous stage's output.
    Simulation,
    /// Each stage compresses an externally supplied matrix whose row count
    /// must equal the previous stage's keep.
    Replay,
}

/// Runs [`compress`] once per plan stage with `K = absolute_keep`.
///
/// Stage `t` uses seed `cfg.seed + t`.
pub fn compress_staged(
    stage_inputs: &[TokenMatrix],
    plan: &StagedPlan,
    cfg: &CompressionConfig,
    mode: StageMode,
) -> Result<Vec<CompressionResult>> {
    let first = stage_inputs
        .first()
        .ok_or_else(|| LrcpError::EmptyInput("no stage inputs".into()))?;
    if mode == StageMode::Replay && stage_inputs.len() != plan.stages.len() {
        return Err(LrcpError::DimensionMismatch {
            expected: plan.stages.len(),
            actual: stage_inputs.len(),
        });
    }
    let mut results: Vec<CompressionResult> = Vec::with_capacity(plan.stages.len());
    let mut expected_rows = plan.total_tokens;
    for (t, stage) in plan.stages.iter().enumerate() {
        let input = match (mode, results.last()) {
            (_, None) => first,
            (StageMode::Simulation, Some(prev)) => &prev.output,
            (StageMode::Replay, Some(_)) => &stage_inputs[t],
        };
        if input.n_tokens() != expected_rows {
            return Err(LrcpError::StageShapeMismatch {
                stage: t,
                expected: expected_rows,
                actual: input.n_tokens(),
            });
        }
        let stage_cfg = cfg
            .clone()
            .with_budget(stage.absolute_keep)
            .with_seed(cfg.seed.wrapping_add(t as u64));
        results.push(compress(input, &stage_cfg)?);
        expected_rows = stage.absolute_keep;
    }
    Ok(results)
}
