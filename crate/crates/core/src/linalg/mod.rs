//! Dense factorizations and subspace comparison.

pub mod angles;
pub(crate) mod product;
pub mod qr;
pub mod svd;

pub use angles::{
    principal_angle_cosines, principal_angle_similarity, principal_angle_similarity_with,
    AngleAggregate,
};
pub use qr::qr_orthonormalize;
pub use svd::{
    exact_svd, randomized_right_svd, randomized_truncated_svd, RsvdParams, Svd, TruncatedSvd,
    EXACT_SVD_MAX_DIM,
};
