//! Sexualized-content rates over classifier/annotator labels, and Cronbach's
//! alpha for inter-rater reliability on the binarized labels.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RatingError {
    #[error("unknown category label {0:?}")]
    UnknownLabel(String),
    #[error("no labels given")]
    NoLabels,
    #[error("labels file line {line}: {source}")]
    Csv {
        line: u64,
        #[source]
        source: csv::Error,
    },
    #[error("labels file line {line}: {message}")]
    BadRecord { line: u64, message: String },
    #[error("image {image:?} is missing a label from rater {rater:?}")]
    MissingCell { image: String, rater: String },
    #[error("image {image:?} labelled twice by rater {rater:?}")]
    DuplicateCell { image: String, rater: String },
    #[error("alpha needs at least 2 raters and 2 images (got {raters} raters, {images} images)")]
    TooSmall { raters: usize, images: usize },
    #[error("alpha undefined: every image received the same total score")]
    ZeroVariance,
    #[error("rater score vectors have different lengths")]
    RaggedScores,
}

/// Output categories of the NSFW image classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CategoryLabel {
    Pornographic,
    Sexy,
    Neutral,
    Hentai,
    Drawing,
}

impl CategoryLabel {
    pub const ALL: [CategoryLabel; 5] = [
        CategoryLabel::Pornographic,
        CategoryLabel::Sexy,
        CategoryLabel::Neutral,
        CategoryLabel::Hentai,
        CategoryLabel::Drawing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CategoryLabel::Pornographic => "pornographic",
            CategoryLabel::Sexy => "sexy",
            CategoryLabel::Neutral => "neutral",
            CategoryLabel::Hentai => "hentai",
            CategoryLabel::Drawing => "drawing",
        }
    }
}

impl fmt::Display for CategoryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CategoryLabel {
    type Err = RatingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        CategoryLabel::ALL
            .into_iter()
            .find(|c| c.name() == lower)
            .ok_or_else(|| RatingError::UnknownLabel(s.to_string()))
    }
}

/// Pornographic, sexy and hentai count as sexualized.
pub fn sexualized(label: CategoryLabel) -> bool {
    match label {
        CategoryLabel::Pornographic | CategoryLabel::Sexy | CategoryLabel::Hentai => true,
        CategoryLabel::Neutral | CategoryLabel::Drawing => false,
    }
}

/// A single rating: either a classifier category or a human yes/no judgement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Rating {
    Category(CategoryLabel),
    Flag(bool),
}

impl Rating {
    pub fn is_sexualized(self) -> bool {
        match self {
            Rating::Category(c) => sexualized(c),
            Rating::Flag(f) => f,
        }
    }
}

impl FromStr for Rating {
    type Err = RatingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sexualized" | "1" | "true" | "yes" => Ok(Rating::Flag(true)),
            "not_sexualized" | "nonsexualized" | "0" | "false" | "no" => Ok(Rating::Flag(false)),
            _ => s.parse().map(Rating::Category),
        }
    }
}

/// One row of a labels file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRecord {
    pub image_id: String,
    pub group: String,
    pub rater: String,
    pub rating: Rating,
}

/// Reads CSV with header columns `image_id, group, rater, category`.
pub fn read_labels<R: Read>(reader: R) -> Result<Vec<LabelRecord>, RatingError> {
    #[derive(Deserialize)]
    struct Row {
        image_id: String,
        group: String,
        rater: String,
        category: String,
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for result in rdr.deserialize::<Row>() {
        let row = result.map_err(|source| RatingError::Csv {
            line: source.position().map_or(0, |p| p.line()),
            source,
        })?;
        let line = out.len() as u64 + 2;
        let rating = row
            .category
            .parse()
            .map_err(|e: RatingError| RatingError::BadRecord {
                line,
                message: e.to_string(),
            })?;
        out.push(LabelRecord {
            image_id: row.image_id,
            group: row.group,
            rater: row.rater,
            rating,
        });
    }
    if out.is_empty() {
        return Err(RatingError::NoLabels);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupRate {
    pub n: u64,
    pub sexualized: u64,
}

impl GroupRate {
    pub fn percent(&self) -> f64 {
        100.0 * self.sexualized as f64 / self.n as f64
    }

    /// Percentage with one decimal, rounded half away from zero on the exact
    /// ratio.
    pub fn percent_text(&self) -> String {
        let tenths = (self.sexualized * 2000 + self.n) / (2 * self.n);
        format!("{}.{}", tenths / 10, tenths % 10)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupRateResult {
    pub groups: BTreeMap<String, GroupRate>,
}

impl GroupRateResult {
    pub fn total(&self) -> GroupRate {
        self.groups.values().fold(
            GroupRate {
                n: 0,
                sexualized: 0,
            },
            |acc, g| GroupRate {
                n: acc.n + g.n,
                sexualized: acc.sexualized + g.sexualized,
            },
        )
    }
}

/// Per-group counts of sexualized ratings.
pub fn group_rates<K, I>(labels: I) -> Result<GroupRateResult, RatingError>
where
    K: Into<String>,
    I: IntoIterator<Item = (K, Rating)>,
{
    let mut groups: BTreeMap<String, GroupRate> = BTreeMap::new();
    for (key, rating) in labels {
        let g = groups.entry(key.into()).or_insert(GroupRate {
            n: 0,
            sexualized: 0,
        });
        g.n += 1;
        g.sexualized += u64::from(rating.is_sexualized());
    }
    if groups.is_empty() {
        return Err(RatingError::NoLabels);
    }
    Ok(GroupRateResult { groups })
}

/// Complete image × rater table.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingTable {
    images: Vec<String>,
    raters: Vec<String>,
    /// Image-major cells.
    cells: Vec<Vec<Rating>>,
}

impl RatingTable {
    /// Builds a table from records. Images and raters keep first-seen order.
    pub fn from_records(records: &[LabelRecord]) -> Result<Self, RatingError> {
        if records.is_empty() {
            return Err(RatingError::NoLabels);
        }
        let mut images: Vec<String> = Vec::new();
        let mut raters: Vec<String> = Vec::new();
        let mut cells: HashMap<(&str, &str), Rating> = HashMap::new();
        for r in records {
            if !images.contains(&r.image_id) {
                images.push(r.image_id.clone());
            }
            if !raters.contains(&r.rater) {
                raters.push(r.rater.clone());
            }
            if cells.insert((&r.image_id, &r.rater), r.rating).is_some() {
                return Err(RatingError::DuplicateCell {
                    image: r.image_id.clone(),
                    rater: r.rater.clone(),
                });
            }
        }
        let mut grid = Vec::with_capacity(images.len());
        for image in &images {
            let mut row = Vec::with_capacity(raters.len());
            for rater in &raters {
                let cell = cells
                    .get(&(image.as_str(), rater.as_str()))
                    .ok_or_else(|| RatingError::MissingCell {
                        image: image.clone(),
                        rater: rater.clone(),
                    })?;
                row.push(*cell);
            }
            grid.push(row);
        }
        Ok(Self {
            images,
            raters,
            cells: grid,
        })
    }

    pub fn images(&self) -> &[String] {
        &self.images
    }

    pub fn raters(&self) -> &[String] {
        &self.raters
    }

    pub fn cell(&self, image: usize, rater: usize) -> Rating {
        self.cells[image][rater]
    }

    /// Binarized scores, one vector per rater.
    pub fn rater_scores(&self) -> Vec<Vec<f64>> {
        (0..self.raters.len())
            .map(|j| {
                self.cells
                    .iter()
                    .map(|row| f64::from(u8::from(row[j].is_sexualized())))
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Variance {
    #[default]
    Population,
    Sample,
}

fn variance(values: &[f64], flavor: Variance) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    match flavor {
        Variance::Population => ss / n,
        Variance::Sample => ss / (n - 1.0),
    }
}

/// Cronbach's alpha over rater-major score vectors.
pub fn cronbach_alpha_scores(scores: &[Vec<f64>], flavor: Variance) -> Result<f64, RatingError> {
    let k = scores.len();
    let n = scores.first().map_or(0, Vec::len);
    if k < 2 || n < 2 {
        return Err(RatingError::TooSmall {
            raters: k,
            images: n,
        });
    }
    if scores.iter().any(|s| s.len() != n) {
        return Err(RatingError::RaggedScores);
    }
    let totals: Vec<f64> = (0..n).map(|i| scores.iter().map(|s| s[i]).sum()).collect();
    let total_var = variance(&totals, flavor);
    if total_var <= 0.0 {
        return Err(RatingError::ZeroVariance);
    }
    let item_var: f64 = scores.iter().map(|s| variance(s, flavor)).sum();
    let k = k as f64;
    Ok(k / (k - 1.0) * (1.0 - item_var / total_var))
}

/// Alpha on the sexualized yes/no binarization of a table.
pub fn cronbach_alpha(table: &RatingTable) -> Result<f64, RatingError> {
    cronbach_alpha_scores(&table.rater_scores(), Variance::Population)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAlpha {
    pub raters: [String; 2],
    /// `None` when the pair's total scores have no variance.
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaReport {
    pub k: usize,
    pub n_images: usize,
    pub alpha: f64,
    pub pairwise_alphas: Vec<PairAlpha>,
}

/// Alpha across all raters plus alpha for every rater pair.
pub fn alpha_report(table: &RatingTable) -> Result<AlphaReport, RatingError> {
    let scores = table.rater_scores();
    let alpha = cronbach_alpha_scores(&scores, Variance::Population)?;
    let mut pairwise_alphas = Vec::new();
    for i in 0..scores.len() {
        for j in i + 1..scores.len() {
            let pair = [scores[i].clone(), scores[j].clone()];
            pairwise_alphas.push(PairAlpha {
                raters: [table.raters[i].clone(), table.raters[j].clone()],
                alpha: cronbach_alpha_scores(&pair, Variance::Population).ok(),
            });
        }
    }
    Ok(AlphaReport {
        k: scores.len(),
        n_images: table.images.len(),
        alpha,
        pairwise_alphas,
    })
}
