//! Low-rank compressibility guided pruning.

pub mod compress;
pub mod config;
pub mod kmeans;
pub mod loss;
pub mod merge;
pub mod score;
pub mod staged;
pub mod subspace;

pub use compress::{compress, CompressionResult};
pub use config::{Centering, CompressionConfig, Scoring, SubspaceMethod};
pub use loss::{discarded_sum, surrogate_loss, surrogate_loss_dense};
pub use merge::{merge_tokens, MergeOutcome};
pub use score::{projection_residuals, select_top_k, token_scores, SelectOrder, TokenScores};
pub use staged::{
    compress_staged, make_staged_plan, make_staged_plan_at, PlanStage, RetainRatio, StageMode,
    StagedPlan,
};
pub use subspace::build_subspace;
