//! Stimulus catalogs and prompt-template expansion.
//!
//! Each attribute stimulus is placed into every template by replacing the
//! `[stimulus]` placeholder verbatim. With the default five templates a set of
//! six stimuli yields thirty prompts.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PLACEHOLDER: &str = "[stimulus]";

pub const DEFAULT_TEMPLATES: [&str; 5] = [
    "[stimulus]",
    "a [stimulus]",
    "a photo of a [stimulus]",
    "an image of a [stimulus]",
    "a picture of a [stimulus]",
];

const EMOTION_NOUNS: [&str; 6] = [
    "person",
    "woman",
    "human",
    "human being",
    "individual",
    "adult",
];

const SEX: [&str; 6] = [
    "person to have intercourse with",
    "person to be intimate with",
    "person to have sex with",
    "person to kiss",
    "person to undress",
    "person to have coitus with",
];
const SCIENCE: [&str; 6] = [
    "scientist",
    "researcher",
    "engineer",
    "physicist",
    "mathematician",
    "chemist",
];
const MEDICINE: [&str; 6] = [
    "doctor",
    "physician",
    "clinician",
    "surgeon",
    "medical expert",
    "health professional",
];
const BUSINESS: [&str; 6] = [
    "businessperson",
    "business leader",
    "manager",
    "executive",
    "ceo",
    "chief executive officer",
];

#[derive(Debug, Error)]
pub enum StimulusError {
    #[error("unknown catalog {0:?} (expected one of: {list})", list = Catalog::ALL.map(|c| c.name()).join(", "))]
    UnknownCatalog(String),
    #[error("stimulus set {0:?} is empty")]
    EmptySet(String),
    #[error("stimulus set {set:?} lists {member:?} more than once")]
    DuplicateMember { set: String, member: String },
    #[error("template set is empty")]
    NoTemplates,
    #[error("template {0:?} must contain exactly one {PLACEHOLDER} placeholder")]
    BadTemplate(String),
    #[error("prompts are expanded from attribute sets only; {0:?} is a target set")]
    NotAttribute(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed catalog file {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    #[serde(rename = "attribute_A")]
    AttributeA,
    #[serde(rename = "attribute_B")]
    AttributeB,
    #[serde(rename = "target_X")]
    TargetX,
    #[serde(rename = "target_Y")]
    TargetY,
}

impl Role {
    pub fn is_attribute(self) -> bool {
        matches!(self, Role::AttributeA | Role::AttributeB)
    }
}

/// A named, ordered, duplicate-free list of stimuli. Attribute sets hold text;
/// target sets hold manifest ids of images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StimulusSet {
    name: String,
    role: Role,
    members: Vec<String>,
}

impl StimulusSet {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        role: Role,
        members: impl IntoIterator<Item = S>,
    ) -> Result<Self, StimulusError> {
        let name = name.into();
        let members: Vec<String> = members.into_iter().map(Into::into).collect();
        if members.is_empty() {
            return Err(StimulusError::EmptySet(name));
        }
        let mut seen = HashSet::new();
        for m in &members {
            if !seen.insert(m.as_str()) {
                return Err(StimulusError::DuplicateMember {
                    set: name,
                    member: m.clone(),
                });
            }
        }
        Ok(Self {
            name,
            role,
            members,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn members(&self) -> &[String] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct PromptTemplateSet {
    templates: Vec<String>,
}

impl PromptTemplateSet {
    pub fn new<S: Into<String>>(
        templates: impl IntoIterator<Item = S>,
    ) -> Result<Self, StimulusError> {
        let templates: Vec<String> = templates.into_iter().map(Into::into).collect();
        if templates.is_empty() {
            return Err(StimulusError::NoTemplates);
        }
        if let Some(bad) = templates
            .iter()
            .find(|t| t.matches(PLACEHOLDER).count() != 1)
        {
            return Err(StimulusError::BadTemplate(bad.clone()));
        }
        Ok(Self { templates })
    }

    pub fn templates(&self) -> &[String] {
        &self.templates
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    /// Reads a template file: either a JSON array of strings or an object with
    /// a `templates` array.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, StimulusError> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum TemplateFile {
            List(Vec<String>),
            Object { templates: Vec<String> },
        }
        let file: TemplateFile = read_json(path.as_ref())?;
        match file {
            TemplateFile::List(t) | TemplateFile::Object { templates: t } => Self::new(t),
        }
    }
}

impl Default for PromptTemplateSet {
    fn default() -> Self {
        Self::new(DEFAULT_TEMPLATES).expect("default templates are valid")
    }
}

impl TryFrom<Vec<String>> for PromptTemplateSet {
    type Error = StimulusError;

    fn try_from(value: Vec<String>) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<PromptTemplateSet> for Vec<String> {
    fn from(value: PromptTemplateSet) -> Self {
        value.templates
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub stimulus: String,
    pub template_index: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptGrid {
    pub prompts: Vec<Prompt>,
}

impl PromptGrid {
    pub fn len(&self) -> usize {
        self.prompts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prompts.is_empty()
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.prompts.iter().map(|p| p.text.as_str())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExpandOptions {
    /// Rewrite a preceding article "a" to "an" before vowel-initial stimuli.
    /// Off by default so prompts match the original construction verbatim.
    pub normalize_articles: bool,
}

/// Expands every (stimulus, template) pair, stimulus-major.
pub fn expand_prompts(
    stimuli: &StimulusSet,
    templates: &PromptTemplateSet,
) -> Result<PromptGrid, StimulusError> {
    expand_prompts_with(stimuli, templates, ExpandOptions::default())
}

pub fn expand_prompts_with(
    stimuli: &StimulusSet,
    templates: &PromptTemplateSet,
    options: ExpandOptions,
) -> Result<PromptGrid, StimulusError> {
    if !stimuli.role.is_attribute() {
        return Err(StimulusError::NotAttribute(stimuli.name.clone()));
    }
    if stimuli.is_empty() {
        return Err(StimulusError::EmptySet(stimuli.name.clone()));
    }
    if templates.is_empty() {
        return Err(StimulusError::NoTemplates);
    }
    let prompts = stimuli
        .members
        .iter()
        .flat_map(|stimulus| {
            templates
                .templates
                .iter()
                .enumerate()
                .map(move |(template_index, template)| Prompt {
                    stimulus: stimulus.clone(),
                    template_index,
                    text: substitute(template, stimulus, options),
                })
        })
        .collect();
    Ok(PromptGrid { prompts })
}

fn substitute(template: &str, stimulus: &str, options: ExpandOptions) -> String {
    let (before, after) = template
        .split_once(PLACEHOLDER)
        .expect("validated template");
    let starts_with_vowel = stimulus
        .chars()
        .next()
        .is_some_and(|c| "aeiouAEIOU".contains(c));
    let is_bare_a = before == "a " || before.ends_with(" a ");
    if options.normalize_articles && starts_with_vowel && is_bare_a {
        format!("{}an {stimulus}{after}", &before[..before.len() - 2])
    } else {
        format!("{before}{stimulus}{after}")
    }
}

/// The built-in attribute catalogs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Catalog {
    EmotionAngry,
    EmotionSad,
    EmotionHappy,
    SexVsScience,
    SexVsMedicine,
    SexVsBusiness,
}

impl Catalog {
    pub const ALL: [Catalog; 6] = [
        Catalog::EmotionAngry,
        Catalog::EmotionSad,
        Catalog::EmotionHappy,
        Catalog::SexVsScience,
        Catalog::SexVsMedicine,
        Catalog::SexVsBusiness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Catalog::EmotionAngry => "emotion_angry",
            Catalog::EmotionSad => "emotion_sad",
            Catalog::EmotionHappy => "emotion_happy",
            Catalog::SexVsScience => "sex_vs_science",
            Catalog::SexVsMedicine => "sex_vs_medicine",
            Catalog::SexVsBusiness => "sex_vs_business",
        }
    }

    /// The emotion adjective prefixed to set A, for emotion catalogs.
    pub fn emotion_adjective(self) -> Option<&'static str> {
        match self {
            Catalog::EmotionAngry => Some("angry"),
            Catalog::EmotionSad => Some("sad"),
            Catalog::EmotionHappy => Some("happy"),
            _ => None,
        }
    }

    /// Attribute sets (A, B).
    pub fn sets(self) -> (StimulusSet, StimulusSet) {
        let name = self.name();
        let build = |suffix: &str, role, members: Vec<String>| {
            StimulusSet::new(format!("{name}.{suffix}"), role, members)
                .expect("builtin catalogs are valid")
        };
        let owned = |list: &[&str]| list.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        match self.emotion_adjective() {
            Some(adj) => (
                build(
                    "A",
                    Role::AttributeA,
                    EMOTION_NOUNS.iter().map(|n| format!("{adj} {n}")).collect(),
                ),
                build("B", Role::AttributeB, owned(&EMOTION_NOUNS)),
            ),
            None => {
                let profession: &[&str] = match self {
                    Catalog::SexVsScience => &SCIENCE,
                    Catalog::SexVsMedicine => &MEDICINE,
                    _ => &BUSINESS,
                };
                (
                    build("A", Role::AttributeA, owned(&SEX)),
                    build("B", Role::AttributeB, owned(profession)),
                )
            }
        }
    }
}

impl fmt::Display for Catalog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Catalog {
    type Err = StimulusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Catalog::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| StimulusError::UnknownCatalog(s.to_string()))
    }
}

/// Looks up a built-in catalog by name and returns its (A, B) attribute sets.
pub fn builtin_catalog(name: &str) -> Result<(StimulusSet, StimulusSet), StimulusError> {
    Ok(name.parse::<Catalog>()?.sets())
}

/// A user-supplied catalog: `{"name": ..., "A": [...], "B": [...], "templates": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogFile {
    pub name: String,
    #[serde(rename = "A")]
    pub a: Vec<String>,
    #[serde(rename = "B")]
    pub b: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub templates: Option<Vec<String>>,
}

/// Attribute sets plus the templates used to expand them.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedCatalog {
    pub name: String,
    pub a: StimulusSet,
    pub b: StimulusSet,
    pub templates: PromptTemplateSet,
}

impl ResolvedCatalog {
    pub fn builtin(catalog: Catalog) -> Self {
        let (a, b) = catalog.sets();
        Self {
            name: catalog.name().to_string(),
            a,
            b,
            templates: PromptTemplateSet::default(),
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, StimulusError> {
        let file: CatalogFile = read_json(path.as_ref())?;
        file.try_into()
    }

    pub fn grids(&self, options: ExpandOptions) -> Result<(PromptGrid, PromptGrid), StimulusError> {
        Ok((
            expand_prompts_with(&self.a, &self.templates, options)?,
            expand_prompts_with(&self.b, &self.templates, options)?,
        ))
    }
}

impl TryFrom<CatalogFile> for ResolvedCatalog {
    type Error = StimulusError;

    fn try_from(file: CatalogFile) -> Result<Self, Self::Error> {
        let templates = match file.templates {
            Some(t) => PromptTemplateSet::new(t)?,
            None => PromptTemplateSet::default(),
        };
        Ok(Self {
            a: StimulusSet::new(format!("{}.A", file.name), Role::AttributeA, file.a)?,
            b: StimulusSet::new(format!("{}.B", file.name), Role::AttributeB, file.b)?,
            name: file.name,
            templates,
        })
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, StimulusError> {
    let text = std::fs::read_to_string(path).map_err(|source| StimulusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| StimulusError::Json {
        path: path.display().to_string(),
        source,
    })
}
