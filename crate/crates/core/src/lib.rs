//! Low-rank compressibility guided pruning (LRCP) of visual tokens.
//!
//! A token matrix `X` (`N x D`) is summarized by its dominant `r`-dimensional
//! right singular subspace. Tokens whose features lie farthest from that
//! subspace carry the most information the subspace misses; LRCP keeps the
//! `K` highest-residual tokens and merges every other token into its most
//! similar survivor.
//!
//! ```
//! use lrcp_core::{compress, CompressionConfig, TokenMatrix};
//!
//! let x = TokenMatrix::from_rows(&[
//!     [1.0, 0.0, 0.0],
//!     [0.0, 1.0, 0.0],
//!     [0.9, 0.1, 0.0],
//!     [0.0, 0.0, 2.0],
//! ])
//! .unwrap();
//! let result = compress(&x, &CompressionConfig::new(1, 2)).unwrap();
//! assert_eq!(result.output.n_tokens(), 2);
//! ```

pub mod error;
pub mod io;
pub mod linalg;
pub mod lrcp;
pub mod matrix;
pub mod rng;
pub mod spectrum;
pub mod synth;

pub use error::{LrcpError, Result};
pub use linalg::{
    exact_svd, principal_angle_cosines, principal_angle_similarity,
    principal_angle_similarity_with, qr_orthonormalize, randomized_truncated_svd, AngleAggregate,
    Svd,
};
pub use lrcp::{
    build_subspace, compress, compress_staged, make_staged_plan, make_staged_plan_at, merge_tokens,
    projection_residuals, select_top_k, surrogate_loss, surrogate_loss_dense, token_scores,
    Centering, CompressionConfig, CompressionResult, MergeOutcome, PlanStage, RetainRatio, Scoring,
    StageMode, StagedPlan, SubspaceMethod,
};
pub use matrix::{orthonormality_error, Subspace, TokenMatrix};
pub use spectrum::{
    explained_variance_spectrum, rank_at_variance, stability_random_dropout,
    stability_under_pruning, SpectrumReport, StabilityMode, StabilityReport,
};
pub use synth::{
    brute_force_best_subset, gen_background_outliers, gen_low_rank_noise, gen_low_rank_noise_with,
    NoiseKind, PlantedInstance,
};
