use std::fs;
use std::path::Path;

use thiserror::Error;

use super::manifest::{parse_manifest, Entry, EntryKind, Manifest, ManifestError};
use super::npy::{read_npy, NpyError};
use super::EmbeddingMatrix;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("embedding file: {0}")]
    Npy(#[from] NpyError),
    #[error("manifest: {0}")]
    Manifest(#[from] ManifestError),
    #[error("cannot read manifest {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(
        "entry {id:?} (manifest line {line}) points at row {row}, but the matrix has {rows} rows"
    )]
    RowOutOfRange {
        id: String,
        line: usize,
        row: usize,
        rows: usize,
    },
}

/// A validated matrix together with the manifest that labels its rows.
#[derive(Debug, Clone)]
pub struct Dataset {
    matrix: EmbeddingMatrix,
    manifest: Manifest,
}

impl Dataset {
    pub fn new(matrix: EmbeddingMatrix, manifest: Manifest) -> Result<Self, DatasetError> {
        for (i, e) in manifest.entries().iter().enumerate() {
            if e.row >= matrix.rows() {
                return Err(DatasetError::RowOutOfRange {
                    id: e.id.clone(),
                    line: manifest.line_of(i),
                    row: e.row,
                    rows: matrix.rows(),
                });
            }
        }
        Ok(Self { matrix, manifest })
    }

    pub fn matrix(&self) -> &EmbeddingMatrix {
        &self.matrix
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn vector(&self, entry: &Entry) -> &[f64] {
        self.matrix.row(entry.row)
    }

    /// Entries tagged `tag`, in manifest order.
    pub fn group(&self, tag: &str) -> Vec<&Entry> {
        self.manifest.group(tag).collect()
    }

    /// The text entry whose source string equals `text`, if any.
    pub fn find_text(&self, text: &str) -> Option<&Entry> {
        self.manifest
            .entries()
            .iter()
            .find(|e| e.kind == EntryKind::Text && e.text.as_deref() == Some(text))
    }
}

/// Loads an `.npy` matrix and a JSONL manifest and joins them.
pub fn load_dataset(
    matrix_path: impl AsRef<Path>,
    manifest_path: impl AsRef<Path>,
) -> Result<Dataset, DatasetError> {
    let matrix = read_npy(matrix_path)?;
    let manifest_path = manifest_path.as_ref();
    let text = fs::read_to_string(manifest_path).map_err(|source| DatasetError::Io {
        path: manifest_path.display().to_string(),
        source,
    })?;
    Dataset::new(matrix, parse_manifest(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding_io::{write_npy_file, DType};

    fn manifest_text(rows: &[usize]) -> String {
        rows.iter()
            .enumerate()
            .map(|(i, r)| {
                format!(
                    r#"{{"id":"e{i}","group":"g{}","row":{r},"kind":"image"}}"#,
                    i % 2
                )
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    #[test]
    fn loads_four_rows() {
        let dir = tempfile::tempdir().unwrap();
        let m = EmbeddingMatrix::new(
            4,
            2,
            DType::Float32,
            vec![1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.5, 0.25],
        )
        .unwrap();
        write_npy_file(dir.path().join("m.npy"), &m).unwrap();
        fs::write(dir.path().join("m.jsonl"), manifest_text(&[0, 1, 2, 3])).unwrap();
        let ds = load_dataset(dir.path().join("m.npy"), dir.path().join("m.jsonl")).unwrap();
        assert_eq!(ds.manifest().len(), 4);
        assert_eq!(ds.group("g1").len(), 2);
        assert_eq!(ds.vector(ds.group("g1")[1]), &[0.5, 0.25]);
    }

    #[test]
    fn row_out_of_range_names_id() {
        let m = EmbeddingMatrix::from_f64(4, 1, vec![1.0; 4]).unwrap();
        let manifest = parse_manifest(&manifest_text(&[0, 1, 7, 3])).unwrap();
        let err = Dataset::new(m, manifest).unwrap_err();
        assert!(
            matches!(&err, DatasetError::RowOutOfRange { id, row: 7, rows: 4, .. } if id == "e2")
        );
        assert!(err.to_string().contains("\"e2\""));
    }

    #[test]
    fn missing_files_reported() {
        let dir = tempfile::tempdir().unwrap();
        let err =
            load_dataset(dir.path().join("nope.npy"), dir.path().join("nope.jsonl")).unwrap_err();
        assert!(matches!(err, DatasetError::Npy(NpyError::Io { .. })));
    }
}
