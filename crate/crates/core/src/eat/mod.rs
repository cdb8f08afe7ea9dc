//! Embedding association test.
//!
//! For a target vector `w` the association with attribute sets `A` and `B` is
//! `s(w, A, B) = mean_a cos(w, a) - mean_b cos(w, b)`. The effect size is
//! `(mean_X s - mean_Y s) / std_{X ∪ Y} s`, and significance comes from a
//! one-sided partition test on `Σ_X s - Σ_Y s`.
//!
//! The association of every target is computed once; permutations only
//! re-sum those values.

mod permutation;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding_io::{cosine, CosineError, Dataset, Entry};

pub use permutation::{
    partition_count, permutation_p, permutation_p_from_scores, Method, PermutationMode,
    PermutationOutcome, PermutationPlan, DEFAULT_EXACT_THRESHOLD, DEFAULT_SAMPLES,
    MONTE_CARLO_CHUNK,
};

/// Standard deviations below this are treated as zero.
pub const ZERO_STD_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum EatError {
    #[error("group {0} is empty")]
    EmptyGroup(&'static str),
    #[error("target groups must be the same size (|X| = {x}, |Y| = {y})")]
    UnequalTargets { x: usize, y: usize },
    #[error("vector in group {group} has dimension {found}, expected {expected}")]
    DimMismatch {
        group: &'static str,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Cosine(#[from] CosineError),
    #[error("effect size undefined: associations of all targets are identical (std = {0:e})")]
    ZeroStd(f64),
    #[error("invalid permutation plan: {0}")]
    InvalidPlan(String),
    #[error("group tag {0:?} not found in manifest")]
    MissingGroup(String),
    #[error("manifest id {0:?} not found")]
    UnknownId(String),
    #[error("no text entry in the manifest for prompt {0:?}")]
    MissingPrompt(String),
    #[error("entry {id:?} (row {row}) appears in both target groups")]
    OverlappingTargets { id: String, row: usize },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StdDev {
    /// Divide by N. Bounds |d| by 2 for balanced groups.
    #[default]
    Population,
    /// Divide by N - 1.
    Sample,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupLabels {
    pub x: String,
    pub y: String,
    pub a: String,
    pub b: String,
}

/// Target groups X, Y and attribute groups A, B as raw vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EatInput {
    x: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    pub labels: GroupLabels,
    pub std_dev: StdDev,
}

impl EatInput {
    pub fn new(
        x: Vec<Vec<f64>>,
        y: Vec<Vec<f64>>,
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
    ) -> Result<Self, EatError> {
        for (name, group) in [("X", &x), ("Y", &y), ("A", &a), ("B", &b)] {
            if group.is_empty() {
                return Err(EatError::EmptyGroup(name));
            }
        }
        if x.len() != y.len() {
            return Err(EatError::UnequalTargets {
                x: x.len(),
                y: y.len(),
            });
        }
        let expected = x[0].len();
        for (name, group) in [("X", &x), ("Y", &y), ("A", &a), ("B", &b)] {
            if let Some(v) = group.iter().find(|v| v.len() != expected) {
                return Err(EatError::DimMismatch {
                    group: name,
                    expected,
                    found: v.len(),
                });
            }
        }
        Ok(Self {
            x,
            y,
            a,
            b,
            labels: GroupLabels::default(),
            std_dev: StdDev::default(),
        })
    }

    pub fn with_labels(mut self, labels: GroupLabels) -> Self {
        self.labels = labels;
        self
    }

    pub fn with_std_dev(mut self, std_dev: StdDev) -> Self {
        self.std_dev = std_dev;
        self
    }

    pub fn x(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn y(&self) -> &[Vec<f64>] {
        &self.y
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn b(&self) -> &[Vec<f64>] {
        &self.b
    }

    /// Same input with X and Y exchanged.
    pub fn swap_targets(&self) -> Self {
        let mut out = self.clone();
        std::mem::swap(&mut out.x, &mut out.y);
        std::mem::swap(&mut out.labels.x, &mut out.labels.y);
        out
    }

    /// Same input with A and B exchanged.
    pub fn swap_attributes(&self) -> Self {
        let mut out = self.clone();
        std::mem::swap(&mut out.a, &mut out.b);
        std::mem::swap(&mut out.labels.a, &mut out.labels.b);
        out
    }
}

/// Association of one vector with A relative to B.
pub fn association<V: AsRef<[f64]>>(w: &[f64], a: &[V], b: &[V]) -> Result<f64, EatError> {
    if a.is_empty() {
        return Err(EatError::EmptyGroup("A"));
    }
    if b.is_empty() {
        return Err(EatError::EmptyGroup("B"));
    }
    Ok(mean_cosine(w, a)? - mean_cosine(w, b)?)
}

fn mean_cosine<V: AsRef<[f64]>>(w: &[f64], group: &[V]) -> Result<f64, CosineError> {
    let mut sum = 0.0;
    for v in group {
        sum += cosine(w, v.as_ref())?;
    }
    Ok(sum / group.len() as f64)
}

/// Per-target associations, X and Y kept apart.
#[derive(Debug, Clone, PartialEq)]
pub struct Associations {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Associations {
    pub fn compute(input: &EatInput) -> Result<Self, EatError> {
        let s = |w: &Vec<f64>| association(w, &input.a, &input.b);
        Ok(Self {
            x: input.x.iter().map(s).collect::<Result<_, _>>()?,
            y: input.y.iter().map(s).collect::<Result<_, _>>()?,
        })
    }

    pub fn statistic(&self) -> f64 {
        self.x.iter().sum::<f64>() - self.y.iter().sum::<f64>()
    }

    pub fn effect_size(&self, flavor: StdDev) -> Result<f64, EatError> {
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let all: Vec<f64> = self.x.iter().chain(&self.y).copied().collect();
        let n = all.len() as f64;
        let centre = mean(&all);
        let ss: f64 = all.iter().map(|s| (s - centre).powi(2)).sum();
        let divisor = match flavor {
            StdDev::Population => n,
            StdDev::Sample => n - 1.0,
        };
        let std = (ss / divisor).sqrt();
        // NaN lands here too
        if std.is_nan() || std <= ZERO_STD_TOLERANCE {
            return Err(EatError::ZeroStd(std));
        }
        let d = (mean(&self.x) - mean(&self.y)) / std;
        Ok(match flavor {
            // |d| <= 2 holds exactly; clamp only absorbs rounding
            StdDev::Population if self.x.len() == self.y.len() => d.clamp(-2.0, 2.0),
            _ => d,
        })
    }

    pub fn all(&self) -> Vec<f64> {
        self.x.iter().chain(&self.y).copied().collect()
    }
}

/// Effect size `d` using the input's standard-deviation flavor.
pub fn effect_size(input: &EatInput) -> Result<f64, EatError> {
    Associations::compute(input)?.effect_size(input.std_dev)
}

/// `Σ_X s - Σ_Y s`.
pub fn test_statistic(input: &EatInput) -> Result<f64, EatError> {
    Ok(Associations::compute(input)?.statistic())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EatResult {
    pub d: f64,
    pub p: f64,
    pub statistic: f64,
    /// s(w, A, B) for X then Y.
    pub per_target_s: Vec<f64>,
    pub method: Method,
    pub n_permutations: u64,
    pub seed: u64,
    pub std_dev: StdDev,
    pub labels: GroupLabels,
    pub n_targets: usize,
    pub n_attributes: [usize; 2],
}

/// Runs the full test on an in-memory input.
pub fn evaluate(input: &EatInput, plan: &PermutationPlan) -> Result<EatResult, EatError> {
    let assoc = Associations::compute(input)?;
    let d = assoc.effect_size(input.std_dev)?;
    let outcome = permutation_p_from_scores(&assoc.x, &assoc.y, plan)?;
    Ok(EatResult {
        d,
        p: outcome.p,
        statistic: assoc.statistic(),
        per_target_s: assoc.all(),
        method: outcome.method,
        n_permutations: outcome.n_permutations,
        seed: plan.seed,
        std_dev: input.std_dev,
        labels: input.labels.clone(),
        n_targets: input.x.len(),
        n_attributes: [input.a.len(), input.b.len()],
    })
}

/// How one of the four groups is picked out of a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selector {
    /// All entries carrying this group tag.
    Group(String),
    /// Entries with these ids, in order.
    Ids(Vec<String>),
    /// Text entries whose source string matches each prompt, in order.
    Texts(Vec<String>),
}

impl Selector {
    fn label(&self) -> String {
        match self {
            Selector::Group(tag) => tag.clone(),
            Selector::Ids(ids) => format!("{} ids", ids.len()),
            Selector::Texts(t) => format!("{} prompts", t.len()),
        }
    }

    fn resolve<'d>(
        &self,
        dataset: &'d Dataset,
        name: &'static str,
    ) -> Result<Vec<&'d Entry>, EatError> {
        let entries = match self {
            Selector::Group(tag) => {
                let found = dataset.group(tag);
                if found.is_empty() {
                    return Err(EatError::MissingGroup(tag.clone()));
                }
                found
            }
            Selector::Ids(ids) => ids
                .iter()
                .map(|id| {
                    dataset
                        .manifest()
                        .entries()
                        .iter()
                        .find(|e| &e.id == id)
                        .ok_or_else(|| EatError::UnknownId(id.clone()))
                })
                .collect::<Result<_, _>>()?,
            Selector::Texts(texts) => texts
                .iter()
                .map(|t| {
                    dataset
                        .find_text(t)
                        .ok_or_else(|| EatError::MissingPrompt(t.clone()))
                })
                .collect::<Result<_, _>>()?,
        };
        if entries.is_empty() {
            return Err(EatError::EmptyGroup(name));
        }
        Ok(entries)
    }
}

/// Which dataset entries play X, Y, A and B.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub x: Selector,
    pub y: Selector,
    pub a: Selector,
    pub b: Selector,
}

impl GroupSpec {
    pub fn from_tags(x: &str, y: &str, a: &str, b: &str) -> Self {
        Self {
            x: Selector::Group(x.into()),
            y: Selector::Group(y.into()),
            a: Selector::Group(a.into()),
            b: Selector::Group(b.into()),
        }
    }

    /// Resolves the spec against a dataset into an [`EatInput`].
    pub fn resolve(&self, dataset: &Dataset) -> Result<EatInput, EatError> {
        let x = self.x.resolve(dataset, "X")?;
        let y = self.y.resolve(dataset, "Y")?;
        if let Some(e) = x.iter().find(|e| y.iter().any(|o| o.row == e.row)) {
            return Err(EatError::OverlappingTargets {
                id: e.id.clone(),
                row: e.row,
            });
        }
        let a = self.a.resolve(dataset, "A")?;
        let b = self.b.resolve(dataset, "B")?;
        let vectors =
            |entries: &[&Entry]| entries.iter().map(|e| dataset.vector(e).to_vec()).collect();
        let input = EatInput::new(vectors(&x), vectors(&y), vectors(&a), vectors(&b))?;
        Ok(input.with_labels(GroupLabels {
            x: self.x.label(),
            y: self.y.label(),
            a: self.a.label(),
            b: self.b.label(),
        }))
    }
}

/// Resolves `spec` against `dataset` and runs the test.
pub fn run_eat(
    dataset: &Dataset,
    spec: &GroupSpec,
    plan: &PermutationPlan,
    std_dev: StdDev,
) -> Result<EatResult, EatError> {
    let input = spec.resolve(dataset)?.with_std_dev(std_dev);
    evaluate(&input, plan)
}
