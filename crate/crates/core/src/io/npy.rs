//! NPY array files (format version 1.0 on write; 1.0, 2.0 and 3.0 on read).
//!
//! Matrices are written little-endian in C order with the header padded so
//! the payload starts on a 64-byte boundary, matching what numpy emits.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{LrcpError, Result};
use crate::matrix::TokenMatrix;

const MAGIC: &[u8; 6] = b"\x93NUMPY";
const ALIGN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dtype {
    F32,
    #[default]
    F64,
}

impl Dtype {
    fn descr(self) -> &'static str {
        match self {
            Dtype::F32 => "<f4",
            Dtype::F64 => "<f8",
        }
    }

    fn size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

impl std::str::FromStr for Dtype {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "f32" | "float32" => Ok(Dtype::F32),
            "f64" | "float64" => Ok(Dtype::F64),
            _ => Err(format!("unknown dtype '{s}', expected f32 or f64")),
        }
    }
}

/// A raw array read from an NPY file, in C order.
#[derive(Debug, Clone, PartialEq)]
pub struct NpyArray {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

/// A loaded token matrix file: one matrix, or an `(L, N, D)` stack split
/// into per-layer matrices.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedMatrix {
    Single(TokenMatrix),
    Layers(Vec<TokenMatrix>),
}

impl LoadedMatrix {
    pub fn into_layers(self) -> Vec<TokenMatrix> {
        match self {
            LoadedMatrix::Single(m) => vec![m],
            LoadedMatrix::Layers(ls) => ls,
        }
    }

    pub fn into_single(self) -> Option<TokenMatrix> {
        match self {
            LoadedMatrix::Single(m) => Some(m),
            LoadedMatrix::Layers(mut ls) if ls.len() == 1 => ls.pop(),
            LoadedMatrix::Layers(_) => None,
        }
    }
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<LoadedMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| LrcpError::io(path, e))?;
    let array = read_npy(&mut BufReader::new(file), path)?;
    let values = array.data;
    match array.shape.as_slice() {
        &[n, d] => {
            check_finite(&values, &[n, d], path)?;
            Ok(LoadedMatrix::Single(TokenMatrix::from_shape_vec(
                n, d, values,
            )?))
        }
        &[l, n, d] => {
            check_finite(&values, &[l, n, d], path)?;
            if l == 0 {
                return Err(LrcpError::MalformedHeader("stack has zero layers".into()));
            }
            let layers = values
                .chunks(n * d.max(1))
                .take(l)
                .map(|chunk| TokenMatrix::from_shape_vec(n, d, chunk.to_vec()))
                .collect::<Result<Vec<_>>>()?;
            Ok(LoadedMatrix::Layers(layers))
        }
        other => Err(LrcpError::MalformedHeader(format!(
            "expected a 2-D (N, D) or 3-D (L, N, D) array, got shape {other:?}"
        ))),
    }
}

fn check_finite(values: &[f64], shape: &[usize], path: &Path) -> Result<()> {
    let Some(pos) = values.iter().position(|v| !v.is_finite()) else {
        return Ok(());
    };
    let location = match *shape {
        [_, d] => format!("row {}, column {}", pos / d, pos % d),
        [_, n, d] => format!(
            "layer {}, row {}, column {}",
            pos / (n * d),
            (pos / d) % n,
            pos % d
        ),
        _ => format!("flat index {pos}"),
    };
    Err(LrcpError::NonFiniteValue {
        path: path.to_path_buf(),
        location,
        value: values[pos],
    })
}

pub fn save_matrix(x: &TokenMatrix, path: impl AsRef<Path>, dtype: Dtype) -> Result<()> {
    let path = path.as_ref();
    let values = x
        .as_array()
        .as_slice()
        .expect("token matrices are row-major");
    write_file(path, &[x.n_tokens(), x.dim()], values, dtype)
}

/// Writes per-layer matrices of identical shape as one `(L, N, D)` array.
pub fn save_stack(layers: &[TokenMatrix], path: impl AsRef<Path>, dtype: Dtype) -> Result<()> {
    let path = path.as_ref();
    let first = layers
        .first()
        .ok_or_else(|| LrcpError::EmptyInput("empty layer stack".into()))?;
    let (n, d) = (first.n_tokens(), first.dim());
    let mut values = Vec::with_capacity(layers.len() * n * d);
    for layer in layers {
        if layer.n_tokens() != n || layer.dim() != d {
            return Err(LrcpError::ShapeMismatch {
                rows: n,
                cols: d,
                len: layer.n_tokens() * layer.dim(),
            });
        }
        values.extend(layer.as_array().iter());
    }
    write_file(path, &[layers.len(), n, d], &values, dtype)
}

fn write_file(path: &Path, shape: &[usize], values: &[f64], dtype: Dtype) -> Result<()> {
    let file = File::create(path).map_err(|e| LrcpError::io(path, e))?;
    let mut writer = BufWriter::new(file);
    write_npy(&mut writer, shape, values, dtype).map_err(|e| LrcpError::io(path, e))?;
    writer.flush().map_err(|e| LrcpError::io(path, e))
}

/// Serializes `values` (C order) as an NPY v1.0 array.
pub fn write_npy<W: Write>(
    writer: &mut W,
    shape: &[usize],
    values: &[f64],
    dtype: Dtype,
) -> std::io::Result<()> {
    debug_assert_eq!(shape.iter().product::<usize>(), values.len());
    writer.write_all(&header_bytes(shape, dtype))?;
    match dtype {
        Dtype::F64 => {
            for v in values {
                writer.write_all(&v.to_le_bytes())?;
            }
        }
        Dtype::F32 => {
            for v in values {
                writer.write_all(&(*v as f32).to_le_bytes())?;
            }
        }
    }
    Ok(())
}

fn header_bytes(shape: &[usize], dtype: Dtype) -> Vec<u8> {
    let shape_str = match shape {
        [single] => format!("({single},)"),
        _ => format!(
            "({})",
            shape
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ),
    };
    let mut dict = format!(
        "{{'descr': '{}', 'fortran_order': False, 'shape': {}, }}",
        dtype.descr(),
        shape_str
    );
    // magic (6) + version (2) + length (2) + dict + '\n'
    let unpadded = MAGIC.len() + 2 + 2 + dict.len() + 1;
    let padding = (ALIGN - unpadded % ALIGN) % ALIGN;
    dict.extend(std::iter::repeat_n(' ', padding));
    dict.push('\n');

    let mut out = Vec::with_capacity(unpadded + padding);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(dict.len() as u16).to_le_bytes());
    out.extend_from_slice(dict.as_bytes());
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Endian {
    Little,
    Big,
}

struct Header {
    endian: Endian,
    dtype: Dtype,
    fortran_order: bool,
    shape: Vec<usize>,
}

/// Reads a complete NPY stream; the payload must match the declared shape
/// byte for byte.
pub fn read_npy<R: Read>(reader: &mut R, path: &Path) -> Result<NpyArray> {
    let mut bytes = Vec::new();
    reader
        .read_to_end(&mut bytes)
        .map_err(|e| LrcpError::io(path, e))?;
    let (header, offset) = parse_header(&bytes)?;
    let count: usize = header.shape.iter().product();
    let payload = &bytes[offset..];
    let expected = count * header.dtype.size();
    if payload.len() != expected {
        return Err(LrcpError::MalformedHeader(format!(
            "payload has {} bytes, shape {:?} needs {expected}",
            payload.len(),
            header.shape
        )));
    }
    let mut data: Vec<f64> = match (header.dtype, header.endian) {
        (Dtype::F64, Endian::Little) => payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect(),
        (Dtype::F64, Endian::Big) => payload
            .chunks_exact(8)
            .map(|c| f64::from_be_bytes(c.try_into().expect("8 bytes")))
            .collect(),
        (Dtype::F32, Endian::Little) => payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
            .collect(),
        (Dtype::F32, Endian::Big) => payload
            .chunks_exact(4)
            .map(|c| f32::from_be_bytes(c.try_into().expect("4 bytes")) as f64)
            .collect(),
    };
    if header.fortran_order && header.shape.len() > 1 {
        data = fortran_to_c(&data, &header.shape);
    }
    Ok(NpyArray {
        shape: header.shape,
        data,
    })
}

fn fortran_to_c(data: &[f64], shape: &[usize]) -> Vec<f64> {
    let rank = shape.len();
    let mut out = vec![0.0; data.len()];
    let mut index = vec![0usize; rank];
    for slot in out.iter_mut() {
        let mut f_offset = 0;
        let mut stride = 1;
        for (axis, &i) in index.iter().enumerate() {
            f_offset += i * stride;
            stride *= shape[axis];
        }
        *slot = data[f_offset];
        for axis in (0..rank).rev() {
            index[axis] += 1;
            if index[axis] < shape[axis] {
                break;
            }
            index[axis] = 0;
        }
    }
    out
}

fn parse_header(bytes: &[u8]) -> Result<(Header, usize)> {
    let malformed = |msg: &str| LrcpError::MalformedHeader(msg.to_string());
    if bytes.len() < 10 || &bytes[..6] != MAGIC {
        return Err(malformed("missing NPY magic string"));
    }
    let (len, start) = match bytes[6] {
        1 => (u16::from_le_bytes([bytes[8], bytes[9]]) as usize, 10),
        2 | 3 => {
            if bytes.len() < 12 {
                return Err(malformed("truncated header length"));
            }
            (
                u32::from_le_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]) as usize,
                12,
            )
        }
        v => {
            return Err(LrcpError::MalformedHeader(format!(
                "unsupported version {v}"
            )))
        }
    };
    let end = start + len;
    if bytes.len() < end {
        return Err(malformed("truncated header"));
    }
    let text = std::str::from_utf8(&bytes[start..end])
        .map_err(|_| malformed("header is not valid text"))?;

    let descr = dict_value(text, "descr").ok_or_else(|| malformed("missing 'descr'"))?;
    let descr = descr.trim_matches(|c| c == '\'' || c == '"');
    let (endian, dtype) = match descr {
        "<f8" | "f8" => (Endian::Little, Dtype::F64),
        ">f8" => (Endian::Big, Dtype::F64),
        "<f4" | "f4" => (Endian::Little, Dtype::F32),
        ">f4" => (Endian::Big, Dtype::F32),
        other => {
            return Err(LrcpError::MalformedHeader(format!(
                "unsupported dtype '{other}' (expected float32 or float64)"
            )))
        }
    };
    let fortran_order = match dict_value(text, "fortran_order") {
        Some("True") => true,
        Some("False") => false,
        _ => return Err(malformed("missing or invalid 'fortran_order'")),
    };
    let shape_text = dict_value(text, "shape").ok_or_else(|| malformed("missing 'shape'"))?;
    let inner = shape_text
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| malformed("shape is not a tuple"))?;
    let shape = inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| malformed("shape entries must be non-negative integers"))?;
    Ok((
        Header {
            endian,
            dtype,
            fortran_order,
            shape,
        },
        end,
    ))
}

/// Raw text of the value stored under `key` in a Python dict literal.
fn dict_value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    let quoted = [format!("'{key}'"), format!("\"{key}\"")];
    let pos = quoted
        .iter()
        .find_map(|k| text.find(k.as_str()).map(|p| p + k.len()))?;
    let rest = text[pos..].trim_start().strip_prefix(':')?.trim_start();
    let end = if rest.starts_with('(') {
        rest.find(')')? + 1
    } else if let Some(q) = rest.chars().next().filter(|c| *c == '\'' || *c == '"') {
        rest[1..].find(q)? + 2
    } else {
        rest.find([',', '}'])?
    };
    Some(rest[..end].trim())
}

/// `Array2` view of a 2-D [`NpyArray`].
pub fn to_array2(array: &NpyArray) -> Option<Array2<f64>> {
    match array.shape.as_slice() {
        &[n, d] => Array2::from_shape_vec((n, d), array.data.clone()).ok(),
        _ => None,
    }
}
