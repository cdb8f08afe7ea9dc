//! The `eat-audit` command line.
//!
//! Every subcommand reads an optional JSON config (`--config`) and lets flags
//! override its fields. Relative paths inside a config file are resolved
//! against the file's directory. Data goes to `--out` or stdout; diagnostics
//! go to stderr.
//!
//! Exit codes: 0 success, 1 output failure, 2 configuration error, 3 data
//! error, 4 statistical degeneracy (zero variance).

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use thiserror::Error;

use crate::captions::{emotion_rates, CaptionCorpus, Lexicon, DEFAULT_MIN_COUNT};
use crate::eat::{
    run_eat, EatError, EatResult, GroupSpec, PermutationMode, PermutationPlan, Selector, StdDev,
};
use crate::embedding_io::{load_dataset, DatasetError};
use crate::ratings::{alpha_report, group_rates, read_labels, RatingError, RatingTable};
use crate::report::{
    fixed, render_eat_table, render_rate_series, EatTable, Format, RateSeries, ReportCell,
    ReportError,
};
use crate::stimuli::{
    Catalog, ExpandOptions, PromptGrid, PromptTemplateSet, ResolvedCatalog, StimulusError,
};

pub const THREADS_ENV: &str = "EAT_AUDIT_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("statistical degeneracy: {0}")]
    Degenerate(String),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Output(_) => 1,
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Degenerate(_) => 4,
        }
    }
}

impl From<EatError> for CliError {
    fn from(e: EatError) -> Self {
        match e {
            EatError::ZeroStd(_) => CliError::Degenerate(e.to_string()),
            EatError::InvalidPlan(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<StimulusError> for CliError {
    fn from(e: StimulusError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<RatingError> for CliError {
    fn from(e: RatingError) -> Self {
        match e {
            RatingError::ZeroVariance => CliError::Degenerate(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::UnknownFormat(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "eat-audit",
    version,
    about = "Embedding association tests and related bias audits"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON config file; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Monte-Carlo permutation samples.
    #[arg(long, global = true)]
    pub samples: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Markdown,
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Markdown => Format::Markdown,
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Auto,
    Exact,
    #[value(name = "monte_carlo", alias = "monte-carlo")]
    MonteCarlo,
}

impl From<ModeArg> for PermutationMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Auto => PermutationMode::Auto,
            ModeArg::Exact => PermutationMode::Exact,
            ModeArg::MonteCarlo => PermutationMode::MonteCarlo,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StdDevArg {
    Population,
    Sample,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expand a stimulus catalog into its prompt grid.
    Prompts(PromptsArgs),
    /// Run an embedding association test.
    Eat(EatArgs),
    /// Emotion-word rates per 1,000 captions.
    Captions(CaptionsArgs),
    /// Sexualized-label rates per group.
    Rates(RatesArgs),
    /// Cronbach's alpha across raters.
    Alpha(AlphaArgs),
    /// Render saved test results as a model × condition table.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct PromptsArgs {
    #[arg(long)]
    pub catalog: Option<String>,
    /// Catalog override file ({name, A, B, templates}).
    #[arg(long)]
    pub catalog_file: Option<PathBuf>,
    /// Template file (JSON list of strings, or {templates: [...]}).
    #[arg(long)]
    pub templates: Option<PathBuf>,
    #[arg(long)]
    pub normalize_articles: bool,
}

#[derive(Debug, Args)]
pub struct EatArgs {
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Group tag of target set X.
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long)]
    pub y: Option<String>,
    /// Group tag of attribute set A (overrides --catalog for A).
    #[arg(long)]
    pub a: Option<String>,
    #[arg(long)]
    pub b: Option<String>,
    /// Resolve A and B by matching the catalog's prompts to manifest text.
    #[arg(long)]
    pub catalog: Option<String>,
    #[arg(long)]
    pub catalog_file: Option<PathBuf>,
    #[arg(long)]
    pub templates: Option<PathBuf>,
    #[arg(long)]
    pub normalize_articles: bool,
    #[arg(long)]
    pub exact_threshold: Option<u64>,
    #[arg(long, value_enum)]
    pub std_dev: Option<StdDevArg>,
}

#[derive(Debug, Args)]
pub struct CaptionsArgs {
    /// Captions JSONL ({group, caption} per line).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Lexicon JSON file; repeatable. Defaults to the built-in emotion lexicons.
    #[arg(long = "lexicon")]
    pub lexicons: Vec<PathBuf>,
    #[arg(long)]
    pub min_count: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    /// Labels CSV (image_id, group, rater, category).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Only use this rater's labels.
    #[arg(long)]
    pub rater: Option<String>,
}

#[derive(Debug, Args)]
pub struct AlphaArgs {
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Restrict to images in these groups; repeatable.
    #[arg(long = "group")]
    pub groups: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Significance level for the star marker.
    #[arg(long)]
    pub significance: Option<f64>,
}

/// A group given either as a bare tag or as an explicit selector object.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum SelectorConfig {
    Tag(String),
    Explicit(Selector),
}

impl From<SelectorConfig> for Selector {
    fn from(s: SelectorConfig) -> Self {
        match s {
            SelectorConfig::Tag(t) => Selector::Group(t),
            SelectorConfig::Explicit(s) => s,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanConfig {
    mode: Option<PermutationMode>,
    samples: Option<u64>,
    seed: Option<u64>,
    exact_threshold: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
struct ReportCellConfig {
    row: String,
    column: String,
    #[serde(default)]
    result: Option<PathBuf>,
    #[serde(default)]
    absent: bool,
}

/// Fields of the JSON config document. Every field is optional; each
/// subcommand reads the ones it needs.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AuditConfig {
    matrix: Option<PathBuf>,
    manifest: Option<PathBuf>,
    x: Option<SelectorConfig>,
    y: Option<SelectorConfig>,
    a: Option<SelectorConfig>,
    b: Option<SelectorConfig>,
    catalog: Option<String>,
    catalog_file: Option<PathBuf>,
    templates: Option<PathBuf>,
    #[serde(default)]
    normalize_articles: bool,
    #[serde(default)]
    plan: PlanConfig,
    seed: Option<u64>,
    std_dev: Option<StdDev>,
    corpus: Option<PathBuf>,
    #[serde(default)]
    lexicons: Vec<PathBuf>,
    min_count: Option<u64>,
    labels: Option<PathBuf>,
    rater: Option<String>,
    #[serde(default)]
    groups: Vec<String>,
    row_header: Option<String>,
    significance: Option<f64>,
    #[serde(default)]
    cells: Vec<ReportCellConfig>,
    format: Option<Format>,
    out: Option<PathBuf>,
}

impl AuditConfig {
    fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: AuditConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("malformed config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(inner) = p.as_mut() {
                if inner.is_relative() {
                    *inner = base.join(&*inner);
                }
            }
        };
        for p in [
            &mut config.matrix,
            &mut config.manifest,
            &mut config.catalog_file,
            &mut config.templates,
            &mut config.corpus,
            &mut config.labels,
            &mut config.out,
        ] {
            fix(p);
        }
        for p in config.lexicons.iter_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        for c in config.cells.iter_mut() {
            fix(&mut c.result);
        }
        Ok(config)
    }
}

fn required<T>(value: Option<T>, name: &str) -> Result<T, CliError> {
    value.ok_or_else(|| {
        CliError::Config(format!(
            "missing required setting `{name}` (flag --{name} or config field)"
        ))
    })
}

/// Parses arguments and runs the command, writing data to `stdout` and
/// diagnostics to `stderr`. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli) {
        Ok((text, out)) => match out {
            Some(path) => match fs::write(&path, text) {
                Ok(()) => 0,
                Err(e) => report(
                    stderr,
                    &CliError::Output(format!("cannot write {}: {e}", path.display())),
                ),
            },
            None => match stdout.write_all(text.as_bytes()) {
                Ok(()) => 0,
                Err(e) => report(stderr, &CliError::Output(e.to_string())),
            },
        },
        Err(e) => report(stderr, &e),
    }
}

fn report(stderr: &mut dyn Write, err: &CliError) -> i32 {
    let _ = writeln!(stderr, "eat-audit: {err}");
    err.exit_code()
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn thread_count() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(None),
    }
}

fn execute(cli: &Cli) -> Result<(String, Option<PathBuf>), CliError> {
    let config = match &cli.global.config {
        Some(path) => AuditConfig::load(path)?,
        None => AuditConfig::default(),
    };
    let out = cli.global.out.clone().or_else(|| config.out.clone());
    let format = cli.global.format.map(Format::from).or(config.format);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    let text = pool.install(|| match &cli.command {
        Command::Prompts(args) => cmd_prompts(args, &config, format),
        Command::Eat(args) => cmd_eat(args, &cli.global, &config, format),
        Command::Captions(args) => cmd_captions(args, &config, format),
        Command::Rates(args) => cmd_rates(args, &config, format),
        Command::Alpha(args) => cmd_alpha(args, &config, format),
        Command::Report(args) => cmd_report(args, &config, format),
    })?;
    Ok((text, out))
}

fn resolve_catalog(
    name: Option<&str>,
    file: Option<&Path>,
    templates: Option<&Path>,
) -> Result<Option<ResolvedCatalog>, CliError> {
    let mut catalog = match (file, name) {
        (Some(path), _) => ResolvedCatalog::from_file(path)?,
        (None, Some(name)) => ResolvedCatalog::builtin(name.parse::<Catalog>()?),
        (None, None) => return Ok(None),
    };
    if let Some(path) = templates {
        catalog.templates = PromptTemplateSet::from_file(path)?;
    }
    Ok(Some(catalog))
}

fn cmd_prompts(
    args: &PromptsArgs,
    config: &AuditConfig,
    format: Option<Format>,
) -> Result<String, CliError> {
    let catalog = resolve_catalog(
        args.catalog.as_deref().or(config.catalog.as_deref()),
        args.catalog_file
            .as_deref()
            .or(config.catalog_file.as_deref()),
        args.templates.as_deref().or(config.templates.as_deref()),
    )?
    .ok_or_else(|| {
        CliError::Config("missing required setting `catalog` (or `catalog_file`)".into())
    })?;
    let options = ExpandOptions {
        normalize_articles: args.normalize_articles || config.normalize_articles,
    };
    let (a, b) = catalog.grids(options)?;
    let sets: [(&str, &PromptGrid); 2] = [("A", &a), ("B", &b)];
    Ok(match format {
        None => {
            let mut out = String::new();
            for (set, grid) in sets {
                for text in grid.texts() {
                    out.push_str(&format!("{set}\t{text}\n"));
                }
            }
            out
        }
        Some(Format::Json) => {
            let doc = serde_json::json!({ "catalog": catalog.name, "A": a, "B": b });
            serde_json::to_string_pretty(&doc).expect("json value") + "\n"
        }
        Some(Format::Csv) => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let csv_err = |e: csv::Error| CliError::Output(e.to_string());
            w.write_record(["set", "stimulus", "template_index", "text"])
                .map_err(csv_err)?;
            for (set, grid) in sets {
                for p in &grid.prompts {
                    w.write_record([set, &p.stimulus, &p.template_index.to_string(), &p.text])
                        .map_err(csv_err)?;
                }
            }
            String::from_utf8(
                w.into_inner()
                    .map_err(|e| CliError::Output(e.to_string()))?,
            )
            .expect("utf-8")
        }
        Some(Format::Markdown) => {
            let mut out =
                String::from("| set | stimulus | template | prompt |\n| --- | --- | --- | --- |\n");
            for (set, grid) in sets {
                for p in &grid.prompts {
                    out.push_str(&format!(
                        "| {set} | {} | {} | {} |\n",
                        p.stimulus, p.template_index, p.text
                    ));
                }
            }
            out
        }
    })
}

fn eat_plan(global: &GlobalArgs, args: &EatArgs, config: &AuditConfig) -> PermutationPlan {
    let defaults = PermutationPlan::default();
    PermutationPlan {
        mode: global
            .mode
            .map(Into::into)
            .or(config.plan.mode)
            .unwrap_or(defaults.mode),
        samples: global
            .samples
            .or(config.plan.samples)
            .unwrap_or(defaults.samples),
        seed: global
            .seed
            .or(config.plan.seed)
            .or(config.seed)
            .unwrap_or(defaults.seed),
        exact_threshold: args
            .exact_threshold
            .or(config.plan.exact_threshold)
            .unwrap_or(defaults.exact_threshold),
    }
}

fn cmd_eat(
    args: &EatArgs,
    global: &GlobalArgs,
    config: &AuditConfig,
    format: Option<Format>,
) -> Result<String, CliError> {
    let plan = eat_plan(global, args, config);
    plan.validate()?;
    let std_dev = match args.std_dev {
        Some(StdDevArg::Population) => StdDev::Population,
        Some(StdDevArg::Sample) => StdDev::Sample,
        None => config.std_dev.unwrap_or_default(),
    };
    let pick = |flag: &Option<String>, conf: &Option<SelectorConfig>| -> Option<Selector> {
        flag.clone()
            .map(Selector::Group)
            .or_else(|| conf.clone().map(Into::into))
    };
    let x = required(pick(&args.x, &config.x), "x")?;
    let y = required(pick(&args.y, &config.y), "y")?;
    let mut a = pick(&args.a, &config.a);
    let mut b = pick(&args.b, &config.b);
    if a.is_none() || b.is_none() {
        let catalog = resolve_catalog(
            args.catalog.as_deref().or(config.catalog.as_deref()),
            args.catalog_file
                .as_deref()
                .or(config.catalog_file.as_deref()),
            args.templates.as_deref().or(config.templates.as_deref()),
        )?
        .ok_or_else(|| {
            CliError::Config("attribute sets need --a/--b group tags or a catalog".into())
        })?;
        let options = ExpandOptions {
            normalize_articles: args.normalize_articles || config.normalize_articles,
        };
        let (ga, gb) = catalog.grids(options)?;
        let texts = |g: &PromptGrid| Selector::Texts(g.texts().map(String::from).collect());
        a.get_or_insert_with(|| texts(&ga));
        b.get_or_insert_with(|| texts(&gb));
    }
    let spec = GroupSpec {
        x,
        y,
        a: a.expect("set above"),
        b: b.expect("set above"),
    };

    let matrix = required(args.matrix.clone().or(config.matrix.clone()), "matrix")?;
    let manifest = required(
        args.manifest.clone().or(config.manifest.clone()),
        "manifest",
    )?;
    let dataset = load_dataset(&matrix, &manifest)?;
    let result = run_eat(&dataset, &spec, &plan, std_dev)?;
    render_eat_result(&result, format.unwrap_or(Format::Json))
}

fn render_eat_result(result: &EatResult, format: Format) -> Result<String, CliError> {
    if format == Format::Json {
        return Ok(serde_json::to_string_pretty(result).expect("result serializes") + "\n");
    }
    let cell = ReportCell::new(result.d, result.p);
    let method = serde_json::to_value(result.method).expect("method serializes");
    let rows = [
        ("d", result.d.to_string()),
        ("p", result.p.to_string()),
        ("statistic", result.statistic.to_string()),
        ("cell", cell.text()),
        ("band", format!("{:?}", cell.band).to_lowercase()),
        ("method", method.as_str().unwrap_or_default().to_string()),
        ("n_permutations", result.n_permutations.to_string()),
        ("seed", result.seed.to_string()),
        ("x", result.labels.x.clone()),
        ("y", result.labels.y.clone()),
        ("a", result.labels.a.clone()),
        ("b", result.labels.b.clone()),
    ];
    Ok(match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let err = |e: csv::Error| CliError::Output(e.to_string());
            w.write_record(["field", "value"]).map_err(err)?;
            for (k, v) in &rows {
                w.write_record([*k, v.as_str()]).map_err(err)?;
            }
            String::from_utf8(
                w.into_inner()
                    .map_err(|e| CliError::Output(e.to_string()))?,
            )
            .expect("utf-8")
        }
        _ => {
            let mut out = String::from("| field | value |\n| --- | --- |\n");
            for (k, v) in &rows {
                out.push_str(&format!("| {k} | {} |\n", v.replace('|', "\\|")));
            }
            out
        }
    })
}

fn cmd_captions(
    args: &CaptionsArgs,
    config: &AuditConfig,
    format: Option<Format>,
) -> Result<String, CliError> {
    let path = required(args.corpus.clone().or(config.corpus.clone()), "corpus")?;
    let file = File::open(&path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
    let corpus = CaptionCorpus::from_jsonl(BufReader::new(file))
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let lexicon_paths = if args.lexicons.is_empty() {
        &config.lexicons
    } else {
        &args.lexicons
    };
    let lexicons = if lexicon_paths.is_empty() {
        Lexicon::builtins()
    } else {
        lexicon_paths
            .iter()
            .map(|p| load_lexicon(p))
            .collect::<Result<_, _>>()?
    };
    let min_count = args
        .min_count
        .or(config.min_count)
        .unwrap_or(DEFAULT_MIN_COUNT);
    let report = emotion_rates(&corpus, &lexicons, min_count);
    Ok(render_rate_series(
        RateSeries::Emotions(&report),
        format.unwrap_or(Format::Csv),
    )?)
}

fn load_lexicon(path: &Path) -> Result<Lexicon, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read lexicon {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e: serde_json::Error| {
        CliError::Config(format!("lexicon {}: {e}", path.display()))
    })
}

fn load_labels(path: &Path) -> Result<Vec<crate::ratings::LabelRecord>, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
    read_labels(file).map_err(|e| match e {
        RatingError::ZeroVariance => CliError::Degenerate(e.to_string()),
        _ => CliError::Data(format!("{}: {e}", path.display())),
    })
}

fn cmd_rates(
    args: &RatesArgs,
    config: &AuditConfig,
    format: Option<Format>,
) -> Result<String, CliError> {
    let path = required(args.labels.clone().or(config.labels.clone()), "labels")?;
    let records = load_labels(&path)?;
    let rater = args.rater.as_ref().or(config.rater.as_ref());
    let mut raters: Vec<&str> = Vec::new();
    for r in &records {
        if !raters.contains(&r.rater.as_str()) {
            raters.push(&r.rater);
        }
    }
    let multi = rater.is_none() && raters.len() > 1;
    let selected = records
        .iter()
        .filter(|r| rater.is_none_or(|want| &r.rater == want))
        .map(|r| {
            let key = if multi {
                format!("{}/{}", r.group, r.rater)
            } else {
                r.group.clone()
            };
            (key, r.rating)
        });
    let rates = group_rates(selected).map_err(|e| match e {
        RatingError::NoLabels => CliError::Data(format!(
            "no labels for rater {:?}",
            rater.map_or("", |s| s.as_str())
        )),
        other => other.into(),
    })?;
    Ok(render_rate_series(
        RateSeries::Groups(&rates),
        format.unwrap_or(Format::Csv),
    )?)
}

fn cmd_alpha(
    args: &AlphaArgs,
    config: &AuditConfig,
    format: Option<Format>,
) -> Result<String, CliError> {
    let path = required(args.labels.clone().or(config.labels.clone()), "labels")?;
    let mut records = load_labels(&path)?;
    let groups = if args.groups.is_empty() {
        &config.groups
    } else {
        &args.groups
    };
    if !groups.is_empty() {
        records.retain(|r| groups.contains(&r.group));
    }
    let table = RatingTable::from_records(&records)?;
    let report = alpha_report(&table)?;
    Ok(match format.unwrap_or(Format::Json) {
        Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
        other => {
            let mut rows = vec![vec!["all".to_string(), fixed(report.alpha, 4)]];
            for pair in &report.pairwise_alphas {
                let alpha = pair
                    .alpha
                    .map_or_else(|| "n/a".to_string(), |a| fixed(a, 4));
                rows.push(vec![
                    format!("{}+{}", pair.raters[0], pair.raters[1]),
                    alpha,
                ]);
            }
            if other == Format::Csv {
                let mut out = String::from("raters,alpha\n");
                for r in rows {
                    out.push_str(&format!("{},{}\n", csv_field(&r[0]), r[1]));
                }
                out
            } else {
                let mut out = String::from("| raters | alpha |\n| --- | --- |\n");
                for r in rows {
                    out.push_str(&format!("| {} | {} |\n", r[0], r[1]));
                }
                out
            }
        }
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cmd_report(
    args: &ReportArgs,
    config: &AuditConfig,
    format: Option<Format>,
) -> Result<String, CliError> {
    if config.cells.is_empty() {
        return Err(CliError::Config(
            "report needs a --config file with a non-empty `cells` list".into(),
        ));
    }
    let level = args
        .significance
        .or(config.significance)
        .unwrap_or(crate::report::DEFAULT_SIGNIFICANCE);
    let mut table = EatTable::new(config.row_header.clone().unwrap_or_else(|| "model".into()));
    for cell in &config.cells {
        let placed = match (&cell.result, cell.absent) {
            (_, true) => table.mark_absent(&cell.row, &cell.column),
            (Some(path), false) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    CliError::Data(format!("cannot read result {}: {e}", path.display()))
                })?;
                let result: EatResult = serde_json::from_str(&text).map_err(|e| {
                    CliError::Data(format!("malformed result {}: {e}", path.display()))
                })?;
                table.insert(
                    &cell.row,
                    &cell.column,
                    ReportCell::from_result(&result, level),
                )
            }
            (None, false) => {
                return Err(CliError::Config(format!(
                    "cell ({}, {}) needs a `result` path or `absent: true`",
                    cell.row, cell.column
                )))
            }
        };
        placed.map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(render_eat_table(
        &table,
        format.unwrap_or(Format::Markdown),
    )?)
}
