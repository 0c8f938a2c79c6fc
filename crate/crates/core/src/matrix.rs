//! Token matrices and orthonormal subspaces.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{LrcpError, Result};
use crate::linalg::qr::dot;

/// Maximum tolerated deviation of `BᵀB` from the identity for a stored basis.
pub const ORTHONORMAL_TOL: f64 = 1e-8;

/// An `N x D` matrix of token features, one token per row.
///
/// Every entry is finite and both dimensions are at least one. Squared row
/// norms are computed once, during the validation pass.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenMatrix {
    data: Array2<f64>,
    row_sq: Vec<f64>,
}

impl TokenMatrix {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        let (n, d) = data.dim();
        if n == 0 || d == 0 {
            return Err(LrcpError::EmptyInput(format!("token matrix is {n}x{d}")));
        }
        // Standard (row-major) layout keeps row slices contiguous.
        let data = if data.is_standard_layout() {
            data
        } else {
            data.as_standard_layout().into_owned()
        };
        let mut row_sq = Vec::with_capacity(n);
        for (row, values) in data.rows().into_iter().enumerate() {
            let values = values
                .to_slice()
                .expect("standard layout rows are contiguous");
            if let Some(col) = values.iter().position(|v| !v.is_finite()) {
                return Err(LrcpError::NonFiniteEntry {
                    row,
                    col,
                    value: values[col],
                });
            }
            row_sq.push(dot(values, values));
        }
        Ok(Self { data, row_sq })
    }

    pub fn from_shape_vec(n_tokens: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_tokens * dim {
            return Err(LrcpError::ShapeMismatch {
                rows: n_tokens,
                cols: dim,
                len: values.len(),
            });
        }
        let data =
            Array2::from_shape_vec((n_tokens, dim), values).expect("length checked against shape");
        Self::new(data)
    }

    /// Builds a matrix from row vectors; all rows must have equal length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(n * d);
        for row in rows {
            let row = row.as_ref();
            if row.len() != d {
                return Err(LrcpError::DimensionMismatch {
                    expected: d,
                    actual: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::from_shape_vec(n, d, values)
    }

    pub fn n_tokens(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn into_array(self) -> Array2<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.data.row(i)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.rows().into_iter().map(|r| r.to_vec()).collect()
    }

    /// `‖x_i‖²` for every row.
    pub fn row_sq_norms(&self) -> &[f64] {
        &self.row_sq
    }

    /// Squared Frobenius norm `‖X‖_F²`.
    pub fn frobenius_sq(&self) -> f64 {
        self.row_sq.iter().sum()
    }

    pub fn column_mean(&self) -> Array1<f64> {
        self.data
            .mean_axis(Axis(0))
            .expect("token matrix has at least one row")
    }

    /// Copy of the rows at `indices`, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<TokenMatrix> {
        let n = self.n_tokens();
        if let Some(&index) = indices.iter().find(|&&i| i >= n) {
            return Err(LrcpError::IndexOutOfRange { index, n_tokens: n });
        }
        TokenMatrix::new(self.data.select(Axis(0), indices))
    }

    /// `X - 1·meanᵀ`.
    pub(crate) fn centered(&self, mean: &Array1<f64>) -> Array2<f64> {
        &self.data - &mean.view().insert_axis(Axis(0))
    }
}

/// An orthonormal `D x r` basis of a dominant subspace.
///
/// `explained[j]` is the fraction of total energy carried by column `j`,
/// non-increasing in `j`. When the subspace was estimated from mean-centered
/// data, `center` holds the column mean that must be subtracted before
/// projecting tokens onto it.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: Array2<f64>,
    explained: Vec<f64>,
    center: Option<Array1<f64>>,
}

impl Subspace {
    /// Wraps an orthonormal basis, checking `‖BᵀB − I‖_max ≤ 1e-8`.
    pub fn new(basis: Array2<f64>, explained: Vec<f64>) -> Result<Self> {
        let (d, r) = basis.dim();
        if d == 0 || r == 0 {
            return Err(LrcpError::EmptyInput(format!("basis is {d}x{r}")));
        }
        if explained.len() != r {
            return Err(LrcpError::DimensionMismatch {
                expected: r,
                actual: explained.len(),
            });
        }
        let dev = orthonormality_error(&basis.view());
        if dev.is_nan() || dev > ORTHONORMAL_TOL {
            return Err(LrcpError::NotOrthonormal(dev));
        }
        Ok(Self {
            basis,
            explained,
            center: None,
        })
    }

    pub(crate) fn from_parts(
        basis: Array2<f64>,
        explained: Vec<f64>,
        center: Option<Array1<f64>>,
    ) -> Self {
        debug_assert_eq!(basis.ncols(), explained.len());
        Self {
            basis,
            explained,
            center,
        }
    }

    pub(crate) fn into_parts(self) -> (Array2<f64>, Vec<f64>, Option<Array1<f64>>) {
        (self.basis, self.explained, self.center)
    }

    pub fn with_center(mut self, center: Array1<f64>) -> Result<Self> {
        if center.len() != self.ambient_dim() {
            return Err(LrcpError::DimensionMismatch {
                expected: self.ambient_dim(),
                actual: center.len(),
            });
        }
        self.center = Some(center);
        Ok(self)
    }

    pub fn basis(&self) -> ArrayView2<'_, f64> {
        self.basis.view()
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn explained(&self) -> &[f64] {
        &self.explained
    }

    pub fn center(&self) -> Option<&Array1<f64>> {
        self.center.as_ref()
    }
}

/// `max |BᵀB − I|` over all entries.
pub fn orthonormality_error(basis: &ArrayView2<'_, f64>) -> f64 {
    let gram = basis.t().dot(basis);
    gram.indexed_iter()
        .map(|((i, j), &v)| (v - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max)
}
