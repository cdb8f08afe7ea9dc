//! Reader and writer for the numpy `.npy` array format, versions 1.0 and 2.0.
//!
//! Only two-dimensional, C-ordered, little-endian `float32`/`float64` arrays are
//! accepted. Files written here are always version 1.0 with the preamble padded
//! to a multiple of 64 bytes.

use std::fs;
use std::path::Path;

use thiserror::Error;

use super::{DType, EmbeddingMatrix, MatrixError};

const MAGIC: &[u8; 6] = b"\x93NUMPY";
const ALIGN: usize = 64;

#[derive(Debug, Error)]
pub enum NpyError {
    #[error("not an npy file: bad magic bytes")]
    BadMagic,
    #[error("unsupported npy format version {0}.{1}")]
    UnsupportedVersion(u8, u8),
    #[error("npy preamble is truncated")]
    TruncatedHeader,
    #[error("malformed npy header: {0}")]
    MalformedHeader(String),
    #[error("unsupported dtype {0:?}: only little-endian float32 ('<f4') and float64 ('<f8') are accepted")]
    UnsupportedDtype(String),
    #[error("fortran_order arrays are not supported; re-save the array in C order")]
    FortranOrder,
    #[error("array must be 2-dimensional, got shape {0:?}")]
    NotTwoDimensional(Vec<usize>),
    #[error("truncated payload: expected {expected} bytes of data, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("{0} unexpected bytes after the array payload")]
    TrailingBytes(usize),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

struct Header {
    dtype: DType,
    fortran_order: bool,
    shape: Vec<usize>,
}

/// Parses an in-memory `.npy` file into a matrix.
pub fn parse_npy(bytes: &[u8]) -> Result<EmbeddingMatrix, NpyError> {
    if bytes.len() < 8 {
        return Err(if bytes.len() >= 6 && &bytes[..6] != MAGIC {
            NpyError::BadMagic
        } else {
            NpyError::TruncatedHeader
        });
    }
    if &bytes[..6] != MAGIC {
        return Err(NpyError::BadMagic);
    }
    let (major, minor) = (bytes[6], bytes[7]);
    let (header_len, prefix) = match major {
        1 => {
            let raw = bytes.get(8..10).ok_or(NpyError::TruncatedHeader)?;
            (u16::from_le_bytes([raw[0], raw[1]]) as usize, 10)
        }
        2 => {
            let raw = bytes.get(8..12).ok_or(NpyError::TruncatedHeader)?;
            (
                u32::from_le_bytes([raw[0], raw[1], raw[2], raw[3]]) as usize,
                12,
            )
        }
        _ => return Err(NpyError::UnsupportedVersion(major, minor)),
    };
    let header_bytes = bytes
        .get(prefix..prefix + header_len)
        .ok_or(NpyError::TruncatedHeader)?;
    let header_text = std::str::from_utf8(header_bytes)
        .map_err(|_| NpyError::MalformedHeader("header is not ASCII".into()))?;
    let header = parse_header(header_text)?;

    if header.fortran_order {
        return Err(NpyError::FortranOrder);
    }
    let (rows, dim) = match header.shape[..] {
        [r, c] => (r, c),
        _ => return Err(NpyError::NotTwoDimensional(header.shape)),
    };

    let payload = &bytes[prefix + header_len..];
    let width = header.dtype.size();
    let expected = rows
        .checked_mul(dim)
        .and_then(|n| n.checked_mul(width))
        .ok_or_else(|| NpyError::MalformedHeader("shape overflows".into()))?;
    if payload.len() < expected {
        return Err(NpyError::TruncatedPayload {
            expected,
            found: payload.len(),
        });
    }
    if payload.len() > expected {
        return Err(NpyError::TrailingBytes(payload.len() - expected));
    }

    let data: Vec<f64> = match header.dtype {
        DType::Float32 => payload
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
            .collect(),
        DType::Float64 => payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect(),
    };
    Ok(EmbeddingMatrix::new(rows, dim, header.dtype, data)?)
}

/// Serializes a matrix as a version 1.0 `.npy` file.
pub fn write_npy(matrix: &EmbeddingMatrix) -> Vec<u8> {
    let dict = format!(
        "{{'descr': '{}', 'fortran_order': False, 'shape': ({}, {}), }}",
        matrix.dtype().descr(),
        matrix.rows(),
        matrix.dim()
    );
    // magic + version + u16 length, then dict, padding and the newline
    let unpadded = MAGIC.len() + 2 + 2 + dict.len() + 1;
    let padding = (ALIGN - unpadded % ALIGN) % ALIGN;
    let header_len = dict.len() + padding + 1;

    let mut out =
        Vec::with_capacity(unpadded + padding + matrix.data().len() * matrix.dtype().size());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(header_len as u16).to_le_bytes());
    out.extend_from_slice(dict.as_bytes());
    out.extend(std::iter::repeat_n(b' ', padding));
    out.push(b'\n');
    match matrix.dtype() {
        DType::Float32 => {
            for &v in matrix.data() {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        DType::Float64 => {
            for &v in matrix.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    out
}

pub fn read_npy(path: impl AsRef<Path>) -> Result<EmbeddingMatrix, NpyError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| NpyError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_npy(&bytes)
}

pub fn write_npy_file(path: impl AsRef<Path>, matrix: &EmbeddingMatrix) -> Result<(), NpyError> {
    let path = path.as_ref();
    fs::write(path, write_npy(matrix)).map_err(|source| NpyError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_header(text: &str) -> Result<Header, NpyError> {
    let malformed =
        |msg: &str| NpyError::MalformedHeader(format!("{msg} in {:?}", text.trim_end()));
    let body = text
        .trim()
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| malformed("expected a dict literal"))?;

    let mut descr = None;
    let mut fortran_order = None;
    let mut shape = None;
    let mut rest = body.trim_start();
    while !rest.is_empty() {
        let (key, after) = take_quoted(rest).ok_or_else(|| malformed("expected quoted key"))?;
        let after = after
            .trim_start()
            .strip_prefix(':')
            .ok_or_else(|| malformed("expected ':'"))?
            .trim_start();
        let after = match key {
            "descr" => {
                let (value, after) = take_quoted(after).ok_or_else(|| malformed("bad descr"))?;
                descr = Some(value.to_string());
                after
            }
            "fortran_order" => {
                if let Some(after) = after.strip_prefix("True") {
                    fortran_order = Some(true);
                    after
                } else if let Some(after) = after.strip_prefix("False") {
                    fortran_order = Some(false);
                    after
                } else {
                    return Err(malformed("bad fortran_order"));
                }
            }
            "shape" => {
                let inner = after
                    .strip_prefix('(')
                    .ok_or_else(|| malformed("bad shape"))?;
                let close = inner
                    .find(')')
                    .ok_or_else(|| malformed("unterminated shape"))?;
                let dims = inner[..close]
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.trim_end_matches('L').parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| malformed("non-integer shape entry"))?;
                shape = Some(dims);
                &inner[close + 1..]
            }
            _ => return Err(malformed(&format!("unknown key '{key}'"))),
        };
        let after = after.trim_start();
        rest = match after.strip_prefix(',') {
            Some(r) => r.trim_start(),
            None if after.is_empty() => after,
            None => return Err(malformed("expected ','")),
        };
    }

    let descr = descr.ok_or_else(|| malformed("missing descr"))?;
    let dtype = match descr.as_str() {
        "<f4" => DType::Float32,
        "<f8" => DType::Float64,
        _ => return Err(NpyError::UnsupportedDtype(descr)),
    };
    Ok(Header {
        dtype,
        fortran_order: fortran_order.ok_or_else(|| malformed("missing fortran_order"))?,
        shape: shape.ok_or_else(|| malformed("missing shape"))?,
    })
}

/// Splits a leading `'...'` or `"..."` literal off `s`.
fn take_quoted(s: &str) -> Option<(&str, &str)> {
    let quote = s.chars().next().filter(|c| *c == '\'' || *c == '"')?;
    let inner = &s[1..];
    let end = inner.find(quote)?;
    Some((&inner[..end], &inner[end + 1..]))
}
