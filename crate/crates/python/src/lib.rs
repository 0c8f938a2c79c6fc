//! Python bindings. Matrices cross the boundary as lists of rows; any
//! sequence of float sequences (including a 2-D numpy array) is accepted.

use std::collections::BTreeMap;

use lrcp_core::io::{load_matrix, save_matrix, Dtype};
use lrcp_core::lrcp::SelectOrder;
use lrcp_core::{self as core, CompressionConfig, RetainRatio};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

create_exception!(lrcp, LrcpError, PyValueError);

fn err(e: core::LrcpError) -> PyErr {
    LrcpError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr<Err = String>>(value: &str) -> PyResult<T> {
    value.parse().map_err(PyValueError::new_err)
}

/// Dense `N x D` token matrix, one row per token.
#[pyclass(frozen, skip_from_py_object, module = "lrcp")]
#[derive(Clone)]
struct TokenMatrix {
    inner: core::TokenMatrix,
}

#[pymethods]
impl TokenMatrix {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = core::TokenMatrix::from_rows(&rows).map_err(err)?;
        Ok(Self { inner })
    }

    /// Reads a 2-D `.npy` file.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let inner = load_matrix(path)
            .map_err(err)?
            .into_single()
            .ok_or_else(|| LrcpError::new_err(format!("{path} holds a stack of layers")))?;
        Ok(Self { inner })
    }

    #[pyo3(signature = (path, dtype = "f64"))]
    fn save(&self, path: &str, dtype: &str) -> PyResult<()> {
        let dtype: Dtype = dtype.parse().map_err(PyValueError::new_err)?;
        save_matrix(&self.inner, path, dtype).map_err(err)
    }

    #[getter]
    fn n_tokens(&self) -> usize {
        self.inner.n_tokens()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.n_tokens(), self.inner.dim())
    }

    fn to_list(&self) -> Vec<Vec<f64>> {
        self.inner.to_rows()
    }

    fn __len__(&self) -> usize {
        self.inner.n_tokens()
    }

    fn __repr__(&self) -> String {
        format!(
            "TokenMatrix({} x {})",
            self.inner.n_tokens(),
            self.inner.dim()
        )
    }
}

/// Orthonormal `D x r` basis with explained-variance fractions.
#[pyclass(frozen, skip_from_py_object, module = "lrcp")]
#[derive(Clone)]
struct Subspace {
    inner: core::Subspace,
}

#[pymethods]
impl Subspace {
    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    #[getter]
    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }

    #[getter]
    fn explained(&self) -> Vec<f64> {
        self.inner.explained().to_vec()
    }

    /// Basis rows, one per ambient coordinate.
    #[getter]
    fn basis(&self) -> Vec<Vec<f64>> {
        self.inner
            .basis()
            .rows()
            .into_iter()
            .map(|r| r.to_vec())
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Subspace(rank={}, dim={})",
            self.inner.rank(),
            self.inner.ambient_dim()
        )
    }
}

#[pyclass(frozen, get_all, module = "lrcp")]
struct CompressionResult {
    retained_indices: Vec<usize>,
    scores: Vec<f64>,
    output: TokenMatrix,
    surrogate_loss: f64,
    assignments: BTreeMap<usize, usize>,
    subspace: Subspace,
}

#[pyclass(frozen, get_all, module = "lrcp")]
struct SpectrumReport {
    explained: Vec<f64>,
    rank_at: BTreeMap<String, usize>,
    total_energy: f64,
}

#[pyclass(frozen, get_all, module = "lrcp")]
struct StabilityReport {
    rank: usize,
    drop_ratio: f64,
    similarities: Vec<f64>,
    mean_similarity: f64,
    min_similarity: f64,
    stage_keeps: Vec<usize>,
}

impl From<core::StabilityReport> for StabilityReport {
    fn from(r: core::StabilityReport) -> Self {
        Self {
            rank: r.rank,
            drop_ratio: r.drop_ratio,
            similarities: r.similarities,
            mean_similarity: r.mean_similarity,
            min_similarity: r.min_similarity,
            stage_keeps: r.stage_keeps,
        }
    }
}

#[pyclass(frozen, get_all, module = "lrcp")]
struct StagedPlan {
    total_tokens: usize,
    llm_layers: usize,
    keeps: Vec<usize>,
    final_keep: usize,
    final_retention: f64,
    average_retention: f64,
    nominal_average_retention: f64,
}

#[derive(FromPyObject)]
enum Ratio {
    Value(f64),
    Text(String),
}

impl Ratio {
    fn resolve(self) -> PyResult<RetainRatio> {
        match self {
            Ratio::Value(v) => RetainRatio::new(v).map_err(err),
            Ratio::Text(s) => parse(&s),
        }
    }
}

#[pyfunction]
#[pyo3(signature = (
    x, rank, budget, *, scoring = "residual_descending", merge = true,
    centering = "none", subspace = "pca", seed = 0
))]
#[allow(clippy::too_many_arguments)]
fn compress(
    py: Python<'_>,
    x: &TokenMatrix,
    rank: usize,
    budget: usize,
    scoring: &str,
    merge: bool,
    centering: &str,
    subspace: &str,
    seed: u64,
) -> PyResult<CompressionResult> {
    let cfg = CompressionConfig::new(rank, budget)
        .with_scoring(parse(scoring)?)
        .with_merge(merge)
        .with_centering(parse(centering)?)
        .with_subspace_method(parse(subspace)?)
        .with_seed(seed);
    let result = py.detach(|| core::compress(&x.inner, &cfg)).map_err(err)?;
    Ok(CompressionResult {
        retained_indices: result.retained_indices,
        scores: result.scores,
        output: TokenMatrix {
            inner: result.output,
        },
        surrogate_loss: result.surrogate_loss,
        assignments: result.assignments,
        subspace: Subspace {
            inner: result.subspace,
        },
    })
}

#[pyfunction]
#[pyo3(signature = (x, r, seed = 0))]
fn randomized_truncated_svd(x: &TokenMatrix, r: usize, seed: u64) -> PyResult<Subspace> {
    let inner = core::randomized_truncated_svd(&x.inner, r, seed).map_err(err)?;
    Ok(Subspace { inner })
}

#[pyfunction]
fn principal_angle_similarity(a: &Subspace, b: &Subspace) -> PyResult<f64> {
    core::principal_angle_similarity(&a.inner, &b.inner).map_err(err)
}

#[pyfunction]
fn projection_residuals(x: &TokenMatrix, subspace: &Subspace) -> PyResult<Vec<f64>> {
    core::projection_residuals(&x.inner, &subspace.inner).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (scores, k, descending = true))]
fn select_top_k(scores: Vec<f64>, k: usize, descending: bool) -> PyResult<Vec<usize>> {
    let order = if descending {
        SelectOrder::Descending
    } else {
        SelectOrder::Ascending
    };
    core::select_top_k(&scores, k, order).map_err(err)
}

#[pyfunction]
fn surrogate_loss(x: &TokenMatrix, subspace: &Subspace, retained: Vec<usize>) -> PyResult<f64> {
    core::surrogate_loss(&x.inner, &subspace.inner, &retained).map_err(err)
}

#[pyfunction]
fn brute_force_best_subset(
    x: &TokenMatrix,
    subspace: &Subspace,
    k: usize,
) -> PyResult<(Vec<usize>, f64)> {
    core::brute_force_best_subset(&x.inner, &subspace.inner, k).map_err(err)
}

/// Leading explained-variance fractions, with Rank@v for each `variances` entry.
#[pyfunction]
#[pyo3(signature = (x, components = None, variances = vec![90.0, 95.0]))]
fn explained_variance_spectrum(
    x: &TokenMatrix,
    components: Option<usize>,
    variances: Vec<f64>,
) -> PyResult<SpectrumReport> {
    let limit = x.inner.n_tokens().min(x.inner.dim());
    let report = core::explained_variance_spectrum(&x.inner, components.unwrap_or(limit))
        .and_then(|r| r.with_rank_at(&variances))
        .map_err(err)?;
    Ok(SpectrumReport {
        explained: report.explained,
        rank_at: report.rank_at,
        total_energy: report.total_energy,
    })
}

#[pyfunction]
#[pyo3(signature = (x, rank, drop_ratio, trials = 20, seed = 0))]
fn stability_random_dropout(
    py: Python<'_>,
    x: &TokenMatrix,
    rank: usize,
    drop_ratio: f64,
    trials: usize,
    seed: u64,
) -> PyResult<StabilityReport> {
    py.detach(|| core::stability_random_dropout(&x.inner, rank, drop_ratio, trials, seed))
        .map(Into::into)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (x, rank, keeps, seed = 0))]
fn stability_under_pruning(
    py: Python<'_>,
    x: &TokenMatrix,
    rank: usize,
    keeps: Vec<usize>,
    seed: u64,
) -> PyResult<StabilityReport> {
    let budget = keeps.first().copied().unwrap_or(1);
    let cfg = CompressionConfig::new(rank, budget).with_seed(seed);
    py.detach(|| core::stability_under_pruning(&x.inner, &cfg, &keeps))
        .map(Into::into)
        .map_err(err)
}

/// Ratios may be floats or strings such as `"1/6"` and `"33.3%"`.
#[pyfunction]
#[pyo3(signature = (n_tokens, ratios, llm_layers = 32, compress_layer = 16))]
fn make_staged_plan(
    n_tokens: usize,
    ratios: Vec<Ratio>,
    llm_layers: usize,
    compress_layer: usize,
) -> PyResult<StagedPlan> {
    let ratios = ratios
        .into_iter()
        .map(Ratio::resolve)
        .collect::<PyResult<Vec<_>>>()?;
    let plan =
        core::make_staged_plan(n_tokens, &ratios, llm_layers, compress_layer).map_err(err)?;
    Ok(StagedPlan {
        keeps: plan.keeps(),
        total_tokens: plan.total_tokens,
        llm_layers: plan.llm_layers,
        final_keep: plan.final_keep,
        final_retention: plan.final_retention,
        average_retention: plan.average_retention,
        nominal_average_retention: plan.nominal_average_retention,
    })
}

/// Planted low-rank matrix plus Gaussian noise; returns the matrix and the
/// planted subspace.
#[pyfunction]
#[pyo3(signature = (n, d, spectrum, sigma = 0.0, seed = 0))]
fn gen_low_rank_noise(
    n: usize,
    d: usize,
    spectrum: Vec<f64>,
    sigma: f64,
    seed: u64,
) -> PyResult<(TokenMatrix, Subspace)> {
    let p = core::gen_low_rank_noise(n, d, spectrum.len(), &spectrum, sigma, seed).map_err(err)?;
    Ok((
        TokenMatrix { inner: p.matrix },
        Subspace {
            inner: p.true_subspace,
        },
    ))
}

/// Low-rank background with orthogonal outliers; returns the matrix and the
/// outlier row indices.
#[pyfunction]
#[pyo3(signature = (n_background, n_outliers, d, rank, seed = 0))]
fn gen_background_outliers(
    n_background: usize,
    n_outliers: usize,
    d: usize,
    rank: usize,
    seed: u64,
) -> PyResult<(TokenMatrix, Vec<usize>)> {
    let p = core::gen_background_outliers(n_background, n_outliers, d, rank, seed).map_err(err)?;
    Ok((TokenMatrix { inner: p.matrix }, p.outlier_indices))
}

#[pymodule]
fn lrcp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("LrcpError", m.py().get_type::<LrcpError>())?;
    m.add_class::<TokenMatrix>()?;
    m.add_class::<Subspace>()?;
    m.add_class::<CompressionResult>()?;
    m.add_class::<SpectrumReport>()?;
    m.add_class::<StabilityReport>()?;
    m.add_class::<StagedPlan>()?;
    m.add_function(wrap_pyfunction!(compress, m)?)?;
    m.add_function(wrap_pyfunction!(randomized_truncated_svd, m)?)?;
    m.add_function(wrap_pyfunction!(principal_angle_similarity, m)?)?;
    m.add_function(wrap_pyfunction!(projection_residuals, m)?)?;
    m.add_function(wrap_pyfunction!(select_top_k, m)?)?;
    m.add_function(wrap_pyfunction!(surrogate_loss, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_best_subset, m)?)?;
    m.add_function(wrap_pyfunction!(explained_variance_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(stability_random_dropout, m)?)?;
    m.add_function(wrap_pyfunction!(stability_under_pruning, m)?)?;
    m.add_function(wrap_pyfunction!(make_staged_plan, m)?)?;
    m.add_function(wrap_pyfunction!(gen_low_rank_noise, m)?)?;
    m.add_function(wrap_pyfunction!(gen_background_outliers, m)?)?;
    Ok(())
}
