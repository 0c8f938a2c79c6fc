use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LrcpError, Result};

/// Which per-token quantity ranks tokens for retention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scoring {
    /// Keep the largest projection residuals.
    #[default]
    ResidualDescending,
    /// Keep the largest in-subspace energies `‖x_i U_r‖²`.
    ProjectionNormDescending,
    /// Keep the smallest projection residuals.
    ResidualAscending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    #[default]
    None,
    MeanCenter,
}

/// How the dominant subspace is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubspaceMethod {
    #[default]
    Pca,
    RandomDirections,
    CoordinateVariance,
    ClusterCenters,
}

macro_rules! str_enum {
    ($ty:ty { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub const ALL: &'static [Self] = &[$(Self::$variant),+];
            pub const NAMES: &'static [&'static str] = &[$($name),+];

            pub fn as_str(&self) -> &'static str {
                match self { $(Self::$variant => $name),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
                let normalized = s.trim().to_ascii_lowercase().replace('-', "_");
                match normalized.as_str() {
                    $($name => Ok(Self::$variant),)+
                    _ => Err(format!(
                        "unknown value '{s}', expected one of: {}",
                        Self::NAMES.join(", ")
                    )),
                }
            }
        }
    };
}

str_enum!(Scoring {
    ResidualDescending => "residual_descending",
    ProjectionNormDescending => "projection_norm_descending",
    ResidualAscending => "residual_ascending",
});

str_enum!(Centering {
    None => "none",
    MeanCenter => "mean_center",
});

str_enum!(SubspaceMethod {
    Pca => "pca",
    RandomDirections => "random_directions",
    CoordinateVariance => "coordinate_variance",
    ClusterCenters => "cluster_centers",
});

/// Parameters of one compression pass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressionConfig {
    /// Subspace dimension `r`.
    pub rank: usize,
    /// Retention budget `K`.
    pub budget: usize,
    pub scoring: Scoring,
    pub merge: bool,
    pub centering: Centering,
    pub subspace_method: SubspaceMethod,
    pub seed: u64,
}

impl CompressionConfig {
    pub fn new(rank: usize, budget: usize) -> Self {
        Self {
            rank,
            budget,
            scoring: Scoring::default(),
            merge: true,
            centering: Centering::default(),
            subspace_method: SubspaceMethod::default(),
            seed: 0,
        }
    }

    pub fn with_scoring(mut self, scoring: Scoring) -> Self {
        self.scoring = scoring;
        self
    }

    pub fn with_merge(mut self, merge: bool) -> Self {
        self.merge = merge;
        self
    }

    pub fn with_centering(mut self, centering: Centering) -> Self {
        self.centering = centering;
        self
    }

    pub fn with_subspace_method(mut self, method: SubspaceMethod) -> Self {
        self.subspace_method = method;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    /// Checks `1 ≤ r < min(N, D)` and `1 ≤ K ≤ N`.
    pub fn validate(&self, n_tokens: usize, dim: usize) -> Result<()> {
        validate_rank(self.rank, n_tokens, dim)?;
        if self.budget == 0 || self.budget > n_tokens {
            return Err(LrcpError::BudgetExceedsTokens {
                budget: self.budget,
                n_tokens,
            });
        }
        Ok(())
    }
}

pub(crate) fn validate_rank(rank: usize, n_tokens: usize, dim: usize) -> Result<()> {
    let limit = n_tokens.min(dim);
    if rank == 0 || rank >= limit {
        return Err(LrcpError::InvalidRank { rank, limit });
    }
    Ok(())
}
