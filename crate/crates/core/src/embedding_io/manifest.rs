use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryKind {
    Image,
    Text,
}

/// One manifest line: binds a matrix row to a labeled stimulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub id: String,
    pub group: String,
    pub row: usize,
    pub kind: EntryKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, String>,
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("manifest line {line}: malformed JSON: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("duplicate id {id:?} on lines {first} and {second}")]
    DuplicateId {
        id: String,
        first: usize,
        second: usize,
    },
    #[error("ids {first:?} and {second:?} both map to row {row}")]
    SharedRow {
        row: usize,
        first: String,
        second: String,
    },
    #[error("entry {id:?} has an empty group tag")]
    EmptyGroup { id: String },
    #[error("manifest has no entries")]
    Empty,
}

/// Ordered list of manifest entries. Line numbers are 1-based and kept for
/// diagnostics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    entries: Vec<Entry>,
    lines: Vec<usize>,
}

impl Manifest {
    /// Builds a manifest from entries, checking id and row uniqueness.
    pub fn new(entries: Vec<Entry>) -> Result<Self, ManifestError> {
        let lines = (1..=entries.len()).collect();
        Self::with_lines(entries, lines)
    }

    fn with_lines(entries: Vec<Entry>, lines: Vec<usize>) -> Result<Self, ManifestError> {
        if entries.is_empty() {
            return Err(ManifestError::Empty);
        }
        let mut ids: HashMap<&str, usize> = HashMap::new();
        let mut rows: HashMap<usize, &str> = HashMap::new();
        for (entry, &line) in entries.iter().zip(&lines) {
            if let Some(&first) = ids.get(entry.id.as_str()) {
                return Err(ManifestError::DuplicateId {
                    id: entry.id.clone(),
                    first,
                    second: line,
                });
            }
            ids.insert(&entry.id, line);
            if let Some(&first) = rows.get(&entry.row) {
                return Err(ManifestError::SharedRow {
                    row: entry.row,
                    first: first.to_string(),
                    second: entry.id.clone(),
                });
            }
            rows.insert(entry.row, &entry.id);
            if entry.group.trim().is_empty() {
                return Err(ManifestError::EmptyGroup {
                    id: entry.id.clone(),
                });
            }
        }
        Ok(Self { entries, lines })
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub(crate) fn line_of(&self, index: usize) -> usize {
        self.lines[index]
    }

    /// Entries carrying the given group tag, in manifest order.
    pub fn group(&self, tag: &str) -> impl Iterator<Item = &Entry> + '_ {
        let tag = tag.to_owned();
        self.entries.iter().filter(move |e| e.group == tag)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("entry serializes"));
            out.push('\n');
        }
        out
    }
}

/// Parses JSONL manifest text. Blank lines are skipped; unknown fields are ignored.
pub fn parse_manifest(text: &str) -> Result<Manifest, ManifestError> {
    let mut entries = Vec::new();
    let mut lines = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: Entry = serde_json::from_str(line).map_err(|source| ManifestError::Json {
            line: i + 1,
            source,
        })?;
        entries.push(entry);
        lines.push(i + 1);
    }
    Manifest::with_lines(entries, lines)
}
