use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use lrcp_core::io::{load_matrix, LoadedMatrix};
use lrcp_core::TokenMatrix;
use rayon::prelude::*;

/// One named input matrix.
pub struct Layer {
    pub name: String,
    pub matrix: TokenMatrix,
}

pub fn load_single(path: &Path) -> Result<TokenMatrix> {
    let loaded = load_matrix(path).with_context(|| format!("loading {}", path.display()))?;
    match loaded {
        LoadedMatrix::Single(m) => Ok(m),
        LoadedMatrix::Layers(ls) => bail!(
            "{} holds a stack of {} layers; this command takes one (N, D) matrix",
            path.display(),
            ls.len()
        ),
    }
}

/// Layers from a file (2-D, or 3-D split along the first axis) or from every
/// `.npy` file of a directory in lexicographic filename order.
pub fn load_layers(path: &Path) -> Result<Vec<Layer>> {
    if path.is_dir() {
        let mut files: Vec<_> = fs::read_dir(path)
            .with_context(|| format!("reading directory {}", path.display()))?
            .map(|entry| entry.map(|e| e.path()))
            .collect::<std::io::Result<_>>()?;
        files.retain(|p| p.is_file() && p.extension().is_some_and(|e| e == "npy"));
        files.sort();
        if files.is_empty() {
            bail!("no .npy files in {}", path.display());
        }
        let loaded: Vec<Vec<Layer>> = files
            .par_iter()
            .map(|f| from_file(f))
            .collect::<Result<_>>()?;
        Ok(loaded.into_iter().flatten().collect())
    } else {
        from_file(path)
    }
}

fn from_file(path: &Path) -> Result<Vec<Layer>> {
    let stem = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let loaded = load_matrix(path).with_context(|| format!("loading {}", path.display()))?;
    Ok(match loaded {
        LoadedMatrix::Single(matrix) => vec![Layer { name: stem, matrix }],
        LoadedMatrix::Layers(ls) => ls
            .into_iter()
            .enumerate()
            .map(|(i, matrix)| Layer {
                name: format!("{stem}[{i}]"),
                matrix,
            })
            .collect(),
    })
}
