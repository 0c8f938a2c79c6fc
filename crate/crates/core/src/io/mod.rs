//! File formats: NPY arrays in, NPY/JSON/CSV out.

pub mod npy;
pub mod report;

pub use npy::{
    load_matrix, read_npy, save_matrix, save_stack, write_npy, Dtype, LoadedMatrix, NpyArray,
};
pub use report::{
    read_report, to_canonical_json, token_rows, write_csv, write_report, CompressionReport,
    SubspaceSummary, TokenRow,
};
