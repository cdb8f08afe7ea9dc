//! Embedding matrices, their manifests, and cosine similarity.
//!
//! Matrices are read from and written to the numpy `.npy` format (little-endian
//! `float32` / `float64`, C order). Values are always held as `f64` in memory;
//! the on-disk dtype is remembered so that a written file reproduces its source
//! bit for bit.

mod dataset;
mod manifest;
mod npy;

use thiserror::Error;

pub use dataset::{load_dataset, Dataset, DatasetError};
pub use manifest::{parse_manifest, Entry, EntryKind, Manifest, ManifestError};
pub use npy::{parse_npy, read_npy, write_npy, write_npy_file, NpyError};

/// Storage type of an embedding file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DType {
    Float32,
    Float64,
}

impl DType {
    pub fn size(self) -> usize {
        match self {
            DType::Float32 => 4,
            DType::Float64 => 8,
        }
    }

    pub(crate) fn descr(self) -> &'static str {
        match self {
            DType::Float32 => "<f4",
            DType::Float64 => "<f8",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("matrix must have at least one row and one column (got {rows}x{dim})")]
    EmptyShape { rows: usize, dim: usize },
    #[error("data length {len} does not match shape {rows}x{dim}")]
    LengthMismatch { rows: usize, dim: usize, len: usize },
    #[error("non-finite value {value} at row {row}, column {col}")]
    NonFinite { row: usize, col: usize, value: f64 },
    #[error("value at row {row}, column {col} is not representable as float32")]
    NotFloat32 { row: usize, col: usize },
}

/// Dense row-major matrix of embedding vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    rows: usize,
    dim: usize,
    dtype: DType,
    data: Vec<f64>,
}

impl EmbeddingMatrix {
    /// Builds a matrix, checking shape and finiteness.
    ///
    /// For [`DType::Float32`] every value must round-trip through `f32`
    /// unchanged, otherwise writing the file would silently lose precision.
    pub fn new(rows: usize, dim: usize, dtype: DType, data: Vec<f64>) -> Result<Self, MatrixError> {
        if rows == 0 || dim == 0 {
            return Err(MatrixError::EmptyShape { rows, dim });
        }
        if rows.checked_mul(dim) != Some(data.len()) {
            return Err(MatrixError::LengthMismatch {
                rows,
                dim,
                len: data.len(),
            });
        }
        for (i, &value) in data.iter().enumerate() {
            let (row, col) = (i / dim, i % dim);
            if !value.is_finite() {
                return Err(MatrixError::NonFinite { row, col, value });
            }
            if dtype == DType::Float32 && f64::from(value as f32) != value {
                return Err(MatrixError::NotFloat32 { row, col });
            }
        }
        Ok(Self {
            rows,
            dim,
            dtype,
            data,
        })
    }

    pub fn from_f32(rows: usize, dim: usize, data: &[f32]) -> Result<Self, MatrixError> {
        Self::new(
            rows,
            dim,
            DType::Float32,
            data.iter().map(|&v| f64::from(v)).collect(),
        )
    }

    pub fn from_f64(rows: usize, dim: usize, data: Vec<f64>) -> Result<Self, MatrixError> {
        Self::new(rows, dim, DType::Float64, data)
    }

    /// Builds a float64 matrix from a list of equally sized rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, MatrixError> {
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            data.extend_from_slice(r.as_ref());
        }
        Self::new(rows.len(), dim, DType::Float64, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dtype(&self) -> DType {
        self.dtype
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Row `i` as a slice. Panics if `i` is out of range.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum CosineError {
    #[error("vector dimensions differ ({0} vs {1})")]
    DimMismatch(usize, usize),
    #[error("cosine similarity is undefined for a zero-norm vector")]
    ZeroNorm,
}

/// Cosine similarity of two vectors, clamped to `[-1, 1]`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, CosineError> {
    if u.len() != v.len() {
        return Err(CosineError::DimMismatch(u.len(), v.len()));
    }
    let (mut dot, mut uu, mut vv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        uu += a * a;
        vv += b * b;
    }
    if uu == 0.0 || vv == 0.0 {
        return Err(CosineError::ZeroNorm);
    }
    Ok((dot / (uu.sqrt() * vv.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(cosine(&[2.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        let c = cosine(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((c - 0.7071067811865475).abs() < 1e-15);
    }

    #[test]
    fn cosine_errors() {
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(CosineError::ZeroNorm));
        assert_eq!(
            cosine(&[1.0], &[1.0, 0.0]),
            Err(CosineError::DimMismatch(1, 2))
        );
    }

    #[test]
    fn matrix_rejects_bad_input() {
        assert!(matches!(
            EmbeddingMatrix::from_f64(1, 2, vec![1.0, f64::NAN]),
            Err(MatrixError::NonFinite { row: 0, col: 1, .. })
        ));
        assert!(matches!(
            EmbeddingMatrix::from_f64(0, 2, vec![]),
            Err(MatrixError::EmptyShape { .. })
        ));
        assert!(matches!(
            EmbeddingMatrix::from_f64(2, 2, vec![1.0; 3]),
            Err(MatrixError::LengthMismatch { .. })
        ));
        assert!(matches!(
            EmbeddingMatrix::new(1, 1, DType::Float32, vec![0.1]),
            Err(MatrixError::NotFloat32 { .. })
        ));
    }

    fn vec_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..16).prop_flat_map(|n| {
            (
                prop::collection::vec(-100.0f64..100.0, n),
                prop::collection::vec(-100.0f64..100.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn cosine_bounded_and_symmetric((u, v) in vec_pair()) {
            if let (Ok(a), Ok(b)) = (cosine(&u, &v), cosine(&v, &u)) {
                prop_assert!((-1.0..=1.0).contains(&a));
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn cosine_scale_invariant((u, v) in vec_pair(), c in 1e-3f64..1e3) {
            let scaled: Vec<f64> = u.iter().map(|x| x * c).collect();
            if let (Ok(a), Ok(b)) = (cosine(&u, &v), cosine(&scaled, &v)) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
