// SPDX-License-Identifier: Apache-2.0

//! The `szz` command line.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 backend or
//! provider failure. Every JSON artifact carries the hash of the
//! configuration that produced it and the root seed.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::blame::{blame_lines, read_skip_list, resolve_skip_list, BlameOptions, LineClass};
use crate::commitset::{AggregatedCandidates, Dataset, SetId};
use crate::error::{Error, ErrorClass, Result};
use crate::eval::{
    evaluate, overlap, render_filtered_table, render_table, write_csv, EvalReport, FilteredReport, OverlapKind,
    PerspectiveId,
};
use crate::history::{load_history, CommitId, LoadOptions, RepositoryHistory, TimestampKind};
use crate::ingest::{
    adapt_commit_links, read_links_csv, AdaptOptions, HttpProvider, RecordedProvider, RecordingProvider,
};
use crate::linker::{
    cross_validate, diagnostics, feature_rows, features::write_feature_csv, label_commits, make_input_filter, train,
    ClassMetrics, CvKind, CvSpec, FeatureRow, LabelScheme, LinkerLabel, ModelKind, RowKey, SamplerKind, SamplerSpec,
    TrainSpec, TrainedModel, TrainingSet, FEATURE_NAMES,
};
use crate::pipeline::{aggregate_dataset, linkability_map, provenance, with_parallelism};
use crate::variants::{VariantConfig, VariantId};

#[derive(Debug, Parser)]
#[command(name = "szz", version, about = "SZZ variants at commit-set granularity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the origin commit of every line a fixing commit removes or changes.
    Blame(BlameArgs),
    /// Run SZZ variants over a link dataset and score them.
    Run(RunArgs),
    /// Label fixing commits and fit a good-linker classifier.
    Train(TrainArgs),
    /// Score fixing commits with a trained model and write a filter file.
    Predict(PredictArgs),
    /// Lift commit-level links to commit-set links through a pull-request provider.
    Adapt(AdaptArgs),
    /// Pairwise overlap of true positives, false positives and false negatives.
    Overlap(OverlapArgs),
}

#[derive(Debug, Args)]
struct HistoryArgs {
    /// Git working tree, or a JSON history fixture.
    repo: PathBuf,
    /// Follow only the first parent when loading from git.
    #[arg(long)]
    first_parent: bool,
}

impl HistoryArgs {
    fn load(&self) -> Result<RepositoryHistory> {
        load_history(
            &self.repo,
            LoadOptions {
                first_parent_only: self.first_parent,
            },
        )
    }
}

#[derive(Debug, Args)]
struct SzzArgs {
    /// Revisions ignored by the X variant (one per line, '#' comments).
    #[arg(long)]
    skip_file: Option<PathBuf>,
    /// Changed-line count above which a file change counts as a refactoring.
    #[arg(long, default_value_t = crate::blame::DEFAULT_REFACTORING_THRESHOLD)]
    threshold: usize,
}

impl SzzArgs {
    fn config(&self, history: &RepositoryHistory) -> Result<VariantConfig> {
        let skip = match &self.skip_file {
            Some(p) => resolve_skip_list(history, &read_skip_list(p)?),
            None => BTreeSet::new(),
        };
        Ok(VariantConfig {
            skip_list: skip,
            refactoring_threshold: self.threshold,
            ..VariantConfig::default()
        })
    }
}

#[derive(Debug, Args)]
struct DatasetArgs {
    #[command(flatten)]
    history: HistoryArgs,
    /// Link dataset, one JSON record per line.
    dataset: PathBuf,
    /// Extra commit-sets (JSON lines) used to resolve candidates.
    #[arg(long)]
    sets: Option<PathBuf>,
}

impl DatasetArgs {
    fn load(&self) -> Result<(RepositoryHistory, Dataset)> {
        let history = self.history.load()?;
        let mut dataset = Dataset::read_jsonl(&self.dataset)?;
        if let Some(p) = &self.sets {
            let f = std::fs::File::open(p).map_err(|e| Error::unreadable(p, e))?;
            dataset.extend_sets(BufReader::new(f))?;
        }
        Ok((history, dataset))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum BlameModeArg {
    Plain,
    Skip,
    Graph,
}

#[derive(Debug, Args)]
struct BlameArgs {
    #[command(flatten)]
    history: HistoryArgs,
    commit: String,
    #[arg(long, value_enum, default_value_t = BlameModeArg::Plain)]
    mode: BlameModeArg,
    #[command(flatten)]
    szz: SzzArgs,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Comma-separated variants (B, AG, L, R, X).
    #[arg(long, value_delimiter = ',', default_values_t = VariantId::ALL.to_vec())]
    variants: Vec<VariantId>,
    #[arg(long, default_value_t = PerspectiveId::P1AllSets)]
    perspective: PerspectiveId,
    /// Drop ghost fixes, extrinsic bugs and links without shared files.
    #[arg(long)]
    exclude_unlinkable: bool,
    /// Trained model used as input filter.
    #[arg(long, conflicts_with = "filter_file")]
    filter_model: Option<PathBuf>,
    /// Filter file written by `predict`; only accepted commits are fed to SZZ.
    #[arg(long)]
    filter_file: Option<PathBuf>,
    #[command(flatten)]
    szz: SzzArgs,
    #[arg(long, default_value = "szz-out")]
    out: PathBuf,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    parallelism: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct LabelArgs {
    /// Labeling scheme: `all` or `single:<variant>`.
    #[arg(long, default_value_t = LabelScheme::AllVariants)]
    label_scheme: LabelScheme,
    /// Label CSV (bug_id, commit, label) used instead of computing labels.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[command(flatten)]
    labels: LabelArgs,
    #[arg(long, default_value_t = ModelKind::RandomForest)]
    model: ModelKind,
    #[arg(long, default_value_t = SamplerKind::None)]
    sampler: SamplerKind,
    /// Weight classes by N / (2 * N_class).
    #[arg(long)]
    cost_sensitive: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Decision threshold on the good-linker score.
    #[arg(long, default_value_t = crate::linker::models::DEFAULT_THRESHOLD)]
    decision_threshold: f64,
    #[command(flatten)]
    szz: SzzArgs,
    /// Model output path.
    #[arg(long, default_value = "model.json")]
    out: PathBuf,
    /// Also cross-validate with this scheme (k_fold, repeated_k_fold, shuffle_split).
    #[arg(long)]
    cv: Option<CvKind>,
    #[arg(long, default_value_t = 5)]
    splits: usize,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// Write cross-validation metrics here.
    #[arg(long)]
    cv_report: Option<PathBuf>,
    /// Write Spearman and PCA diagnostics here.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
    /// Write the labeled feature table here.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Write the label CSV here.
    #[arg(long)]
    labels_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[arg(long)]
    model: PathBuf,
    /// Label CSV; when given, a confusion matrix is reported.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, default_value = "filter.json")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AdaptArgs {
    /// CSV with columns repository, fixing_commit, inducing_commit.
    links: PathBuf,
    /// Recorded provider responses (JSON map keyed by owner/name@commit).
    #[arg(long, conflicts_with = "endpoint")]
    responses: Option<PathBuf>,
    /// Live GraphQL endpoint; the token is read from SZZ_PROVIDER_TOKEN.
    #[arg(long)]
    endpoint: Option<String>,
    /// Save every live response to this file.
    #[arg(long, requires = "endpoint")]
    record: Option<PathBuf>,
    #[arg(long, default_value = "adapted")]
    out: PathBuf,
    #[arg(long, default_value_t = 8)]
    max_in_flight: usize,
}

#[derive(Debug, Args)]
struct OverlapArgs {
    /// Report files written by `run`.
    #[arg(required = true, num_args = 2..)]
    reports: Vec<PathBuf>,
    /// Use the filtered ground-truth scores instead of the unfiltered ones.
    #[arg(long)]
    filtered: bool,
    #[arg(long, default_value = "overlap")]
    out: PathBuf,
}

/// Everything that determines a `run`'s output.
#[derive(Debug, Serialize)]
pub struct RunConfig {
    pub history: String,
    pub dataset: String,
    pub sets: Option<String>,
    pub variants: Vec<VariantId>,
    pub perspective: PerspectiveId,
    pub skip_list: Vec<CommitId>,
    pub refactoring_threshold: usize,
    pub exclude_unlinkable: bool,
    pub filter: Option<String>,
    pub seed: u64,
}

/// Per-variant output of `run`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportArtifact {
    pub config_hash: String,
    pub seed: u64,
    pub report: EvalReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filtered: Option<FilteredReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterRow {
    pub bug_id: String,
    pub fixing_set: String,
    pub commit: CommitId,
    pub score: f64,
    pub accepted: bool,
}

/// Output of `predict`, consumed by `run --filter-file`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterFile {
    pub config_hash: String,
    pub seed: u64,
    pub model: ModelKind,
    pub threshold: f64,
    pub rows: Vec<FilterRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<ClassMetrics>,
}

impl FilterFile {
    pub fn load(path: &Path) -> Result<FilterFile> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::unreadable(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::unreadable(path, e))
    }

    pub fn accepted(&self) -> BTreeSet<CommitId> {
        self.rows
            .iter()
            .filter(|r| r.accepted)
            .map(|r| r.commit.clone())
            .collect()
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 of the canonical JSON form of `config`.
pub fn config_hash(config: &impl Serialize) -> Result<String> {
    // Round-trip through Value so map keys come out sorted.
    let value = serde_json::to_value(config)?;
    Ok(hex(&Sha256::digest(serde_json::to_vec(&value)?)))
}

fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::unreadable(path, e))?;
    Ok(hex(&Sha256::digest(bytes)))
}

/// Content identity of a history: its commits in topological order.
fn history_digest(history: &RepositoryHistory) -> String {
    let mut h = Sha256::new();
    for id in history.topological_order() {
        h.update(id.as_str().as_bytes());
        h.update(b"\n");
    }
    hex(&h.finalize())
}

fn optional_digest(path: &Option<PathBuf>) -> Result<Option<String>> {
    path.as_deref().map(file_digest).transpose()
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e.class() {
                ErrorClass::Usage => 2,
                ErrorClass::Data => 3,
                ErrorClass::Backend => 4,
            }
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Blame(a) => cmd_blame(a, out),
        Command::Run(a) => cmd_run(a, out),
        Command::Train(a) => cmd_train(a, out),
        Command::Predict(a) => cmd_predict(a, out),
        Command::Adapt(a) => cmd_adapt(a, out),
        Command::Overlap(a) => cmd_overlap(a, out),
    }
}

fn cmd_blame(a: BlameArgs, out: &mut dyn Write) -> Result<()> {
    let history = a.history.load()?;
    let config = a.szz.config(&history)?;
    let options = match a.mode {
        BlameModeArg::Plain => BlameOptions::plain(),
        BlameModeArg::Skip => BlameOptions::skip(config.skip_list),
        BlameModeArg::Graph => BlameOptions::graph(),
    }
    .with_threshold(config.refactoring_threshold);
    let result = blame_lines(&history, &CommitId::new(a.commit), &options)?;
    for e in &result.entries {
        let origin = match (&e.origin, e.class) {
            (Some(c), _) => c.to_string(),
            (None, LineClass::Code) => "untraceable".to_owned(),
            (None, _) => "ignored".to_owned(),
        };
        writeln!(out, "{}:{} {} → {}", e.line.path, e.line.line_no, e.line.text, origin)?;
    }
    Ok(())
}

fn load_filter_set(path: &Path) -> Result<BTreeSet<CommitId>> {
    Ok(FilterFile::load(path)?.accepted())
}

fn cmd_run(a: RunArgs, out: &mut dyn Write) -> Result<()> {
    let (history, dataset) = a.data.load()?;
    let dataset = a.perspective.select(&dataset);
    let config = a.szz.config(&history)?;
    let filter_path = a.filter_model.as_ref().or(a.filter_file.as_ref());
    let run_config = RunConfig {
        history: history_digest(&history),
        dataset: file_digest(&a.data.dataset)?,
        sets: optional_digest(&a.data.sets)?,
        variants: a.variants.clone(),
        perspective: a.perspective,
        skip_list: config.skip_list.iter().cloned().collect(),
        refactoring_threshold: config.refactoring_threshold,
        exclude_unlinkable: a.exclude_unlinkable,
        filter: filter_path.map(|p| file_digest(p)).transpose()?,
        seed: a.seed,
    };
    let hash = config_hash(&run_config)?;
    log::info!("run {hash}: {} links", dataset.links.len());

    let model = a.filter_model.as_deref().map(TrainedModel::load).transpose()?;
    let accepted = a.filter_file.as_deref().map(load_filter_set).transpose()?;

    let artifacts = with_parallelism(a.parallelism, || -> Result<Vec<ReportArtifact>> {
        let flags = a
            .exclude_unlinkable
            .then(|| linkability_map(&history, &dataset))
            .transpose()?;
        let model_filter = model.map(make_input_filter);
        let set_filter = accepted.map(|set| move |c: &CommitId| set.contains(c));
        let mut artifacts = Vec::new();
        for &variant in &a.variants {
            let outputs = aggregate_dataset(&history, &dataset, variant, &config, None)?;
            let report = evaluate(&dataset, &outputs, a.perspective, flags.as_ref())?;
            let filtered_outputs: Option<BTreeMap<SetId, AggregatedCandidates>> = match (&model_filter, &set_filter) {
                (Some(f), _) => Some(aggregate_dataset(&history, &dataset, variant, &config, Some(f))?),
                (None, Some(f)) => Some(aggregate_dataset(&history, &dataset, variant, &config, Some(f))?),
                (None, None) => None,
            };
            let filtered = filtered_outputs
                .map(|o| evaluate(&dataset, &o, a.perspective, flags.as_ref()).map(FilteredReport::new))
                .transpose()?;
            artifacts.push(ReportArtifact {
                config_hash: hash.clone(),
                seed: a.seed,
                report,
                filtered,
            });
        }
        Ok(artifacts)
    })??;

    std::fs::create_dir_all(&a.out)?;
    for art in &artifacts {
        write_json(&a.out.join(format!("report_{}.json", art.report.variant.as_str())), art)?;
    }
    let reports: Vec<EvalReport> = artifacts.iter().map(|r| r.report.clone()).collect();
    write_csv(&reports, std::fs::File::create(a.out.join("reports.csv"))?)?;

    let scored = reports.first().map_or(0, |r| r.n_links);
    writeln!(out, "{scored} links, perspective {}", a.perspective.as_str())?;
    out.write_all(render_table(&reports).as_bytes())?;
    let filtered: Vec<FilteredReport> = artifacts.iter().filter_map(|r| r.filtered.clone()).collect();
    if !filtered.is_empty() {
        writeln!(out)?;
        writeln!(out, "With input filter (ground truth / without bad linkers):")?;
        out.write_all(render_filtered_table(&filtered).as_bytes())?;
    }
    writeln!(out, "config {hash}")?;
    Ok(())
}

pub fn read_label_file(path: &Path) -> Result<BTreeMap<RowKey, LinkerLabel>> {
    #[derive(Deserialize)]
    struct Row {
        bug_id: String,
        commit: String,
        label: String,
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::unreadable(path, e))?;
    let mut labels = BTreeMap::new();
    for row in reader.deserialize::<Row>() {
        let row = row.map_err(|e| Error::unreadable(path, e))?;
        let label = match row.label.to_ascii_lowercase().as_str() {
            "good" | "1" | "true" => LinkerLabel::Good,
            "bad" | "0" | "false" => LinkerLabel::Bad,
            "excluded" => LinkerLabel::Excluded,
            other => return Err(Error::unreadable(path, format!("unknown label {other:?}"))),
        };
        labels.insert(
            RowKey {
                bug_id: row.bug_id,
                commit: CommitId::new(row.commit),
            },
            label,
        );
    }
    Ok(labels)
}

pub fn write_label_file(path: &Path, labels: &BTreeMap<RowKey, LinkerLabel>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::unreadable(path, e))?;
    w.write_record(["bug_id", "commit", "label"])?;
    for (k, v) in labels {
        w.write_record([k.bug_id.as_str(), k.commit.as_str(), v.as_str()])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_train(a: TrainArgs, out: &mut dyn Write) -> Result<()> {
    let (history, dataset) = a.data.load()?;
    let config = a.szz.config(&history)?;
    let labels = match &a.labels.labels {
        Some(p) => read_label_file(p)?,
        None => {
            let prov = provenance(&history, &dataset, &a.labels.label_scheme.variants(), &config)?;
            label_commits(&dataset, &prov, a.labels.label_scheme)?
        }
    };
    let rows = feature_rows(&history, &dataset, TimestampKind::Committer)?;
    let set = TrainingSet::new(&rows, &labels);
    let good = set.y.iter().filter(|g| **g).count();
    writeln!(
        out,
        "{} labeled commits: {} good, {} bad",
        set.len(),
        good,
        set.len() - good
    )?;

    let spec = TrainSpec {
        model: a.model,
        sampler: SamplerSpec::new(a.sampler, a.seed),
        cost_sensitive: a.cost_sensitive,
        seed: a.seed,
        threshold: a.decision_threshold,
    };
    #[derive(Serialize)]
    struct TrainConfig<'a> {
        history: String,
        dataset: String,
        sets: Option<String>,
        labels: String,
        skip_list: Vec<CommitId>,
        refactoring_threshold: usize,
        spec: &'a TrainSpec,
    }
    let hash = config_hash(&TrainConfig {
        history: history_digest(&history),
        dataset: file_digest(&a.data.dataset)?,
        sets: optional_digest(&a.data.sets)?,
        labels: match &a.labels.labels {
            Some(p) => file_digest(p)?,
            None => a.labels.label_scheme.to_string(),
        },
        skip_list: config.skip_list.iter().cloned().collect(),
        refactoring_threshold: config.refactoring_threshold,
        spec: &spec,
    })?;

    let mut model = train(&set.x, &set.y, &spec, &FEATURE_NAMES)?;
    model.config_hash = Some(hash.clone());
    model.save(&a.out)?;
    writeln!(out, "model {} written to {}", model.kind, a.out.display())?;
    if let Some(imp) = &model.importance {
        for (name, v) in FEATURE_NAMES.iter().zip(imp) {
            writeln!(out, "  {name:<16} {v:.4}")?;
        }
    }

    if let Some(kind) = a.cv {
        let cv = CvSpec {
            kind,
            splits: a.splits,
            repeats: a.repeats,
            seed: a.seed,
        };
        let report = cross_validate(&set.x, &set.y, &spec, &cv)?;
        let m = &report.mean;
        writeln!(
            out,
            "{kind}: precision {:.2}  recall {:.2}  F1 {:.2}  accuracy {:.2}  AUC {}",
            m.precision,
            m.recall,
            m.f1,
            m.accuracy,
            m.auc.map_or("n/a".to_owned(), |v| format!("{v:.2}"))
        )?;
        if let Some(p) = &a.cv_report {
            write_json(
                p,
                &serde_json::json!({"config_hash": hash, "seed": a.seed, "cv": report}),
            )?;
        }
    }
    if let Some(p) = &a.diagnostics {
        let d = diagnostics(&set.x)?;
        write_json(
            p,
            &serde_json::json!({"config_hash": hash, "seed": a.seed, "features": FEATURE_NAMES, "diagnostics": d}),
        )?;
    }
    if let Some(p) = &a.features {
        let label_of = |k: &RowKey| labels.get(k).map(|l| l.as_str().to_owned());
        let f = std::fs::File::create(p)?;
        write_feature_csv(&rows, Some(&label_of), f)?;
    }
    if let Some(p) = &a.labels_out {
        write_label_file(p, &labels)?;
    }
    Ok(())
}

fn cmd_predict(a: PredictArgs, out: &mut dyn Write) -> Result<()> {
    let (history, dataset) = a.data.load()?;
    let model = TrainedModel::load(&a.model)?;
    let rows: Vec<FeatureRow> = feature_rows(&history, &dataset, TimestampKind::Committer)?;
    let filter_rows: Vec<FilterRow> = rows
        .iter()
        .map(|r| {
            let score = model.score(&r.features.to_array());
            FilterRow {
                bug_id: r.key.bug_id.clone(),
                fixing_set: r.fixing_set.clone(),
                commit: r.key.commit.clone(),
                score,
                accepted: score >= model.threshold,
            }
        })
        .collect();

    let metrics = match &a.labels {
        Some(p) => {
            let labels = read_label_file(p)?;
            let (mut scores, mut predicted, mut actual) = (Vec::new(), Vec::new(), Vec::new());
            for (row, fr) in rows.iter().zip(&filter_rows) {
                let good = match labels.get(&row.key) {
                    Some(LinkerLabel::Good) => true,
                    Some(LinkerLabel::Bad) => false,
                    _ => continue,
                };
                scores.push(fr.score);
                predicted.push(fr.accepted);
                actual.push(good);
            }
            Some(ClassMetrics::compute(&scores, &predicted, &actual))
        }
        None => None,
    };

    #[derive(Serialize)]
    struct PredictConfig {
        history: String,
        dataset: String,
        sets: Option<String>,
        model: String,
        labels: Option<String>,
    }
    let hash = config_hash(&PredictConfig {
        history: history_digest(&history),
        dataset: file_digest(&a.data.dataset)?,
        sets: optional_digest(&a.data.sets)?,
        model: file_digest(&a.model)?,
        labels: optional_digest(&a.labels)?,
    })?;
    let accepted = filter_rows.iter().filter(|r| r.accepted).count();
    let file = FilterFile {
        config_hash: hash,
        seed: model.seed,
        model: model.kind,
        threshold: model.threshold,
        rows: filter_rows,
        metrics,
    };
    write_json(&a.out, &file)?;
    writeln!(out, "{accepted} of {} commits accepted", file.rows.len())?;
    if let Some(m) = &file.metrics {
        let c = &m.confusion;
        writeln!(out, "               predicted good  predicted bad")?;
        writeln!(out, "actual good    {:>14}  {:>13}", c.tp, c.fn_)?;
        writeln!(out, "actual bad     {:>14}  {:>13}", c.fp, c.tn)?;
        writeln!(
            out,
            "precision {:.2}  recall {:.2}  F1 {:.2}  accuracy {:.2}  AUC {}",
            m.precision,
            m.recall,
            m.f1,
            m.accuracy,
            m.auc.map_or("n/a".to_owned(), |v| format!("{v:.2}"))
        )?;
    }
    Ok(())
}

fn cmd_adapt(a: AdaptArgs, out: &mut dyn Write) -> Result<()> {
    let links = read_links_csv(&a.links)?;
    let options = AdaptOptions {
        max_in_flight: a.max_in_flight.max(1),
        ..AdaptOptions::default()
    };
    let (adaptation, source) = match (&a.responses, &a.endpoint) {
        (Some(p), _) => {
            let provider = RecordedProvider::load(p)?;
            (adapt_commit_links(&links, &provider, &options)?, file_digest(p)?)
        }
        (None, Some(url)) => {
            let provider = RecordingProvider::new(HttpProvider::new(url.clone()));
            let result = adapt_commit_links(&links, &provider, &options)?;
            if let Some(p) = &a.record {
                provider.save(p)?;
            }
            (result, url.clone())
        }
        (None, None) => {
            return Err(Error::InvalidArgument(
                "either --responses or --endpoint is required".into(),
            ));
        }
    };

    #[derive(Serialize)]
    struct AdaptConfig {
        links: String,
        source: String,
    }
    let hash = config_hash(&AdaptConfig {
        links: file_digest(&a.links)?,
        source,
    })?;
    std::fs::create_dir_all(&a.out)?;
    adaptation
        .dataset
        .write_jsonl(std::io::BufWriter::new(std::fs::File::create(
            a.out.join("dataset.jsonl"),
        )?))?;
    let summary = serde_json::json!({
        "config_hash": hash,
        "seed": 0,
        "input_links": links.len(),
        "surviving_links": adaptation.dataset.links.len(),
        "discarded": adaptation.tally,
        "outcomes": adaptation.outcomes,
    });
    write_json(&a.out.join("summary.json"), &summary)?;
    let tally = serde_json::json!({
        "discarded": adaptation.tally,
        "surviving_links": adaptation.dataset.links.len(),
    });
    writeln!(out, "{}", serde_json::to_string(&tally)?)?;
    Ok(())
}

fn cmd_overlap(a: OverlapArgs, out: &mut dyn Write) -> Result<()> {
    let mut reports = Vec::new();
    let mut hashes = Vec::new();
    for p in &a.reports {
        let text = std::fs::read_to_string(p).map_err(|e| Error::unreadable(p, e))?;
        let art: ReportArtifact = serde_json::from_str(&text).map_err(|e| Error::unreadable(p, e))?;
        hashes.push(art.config_hash.clone());
        reports.push(if a.filtered {
            art.filtered
                .map(|f| f.ground_truth)
                .ok_or_else(|| Error::unreadable(p, "report has no filtered scores"))?
        } else {
            art.report
        });
    }
    let hash = config_hash(&serde_json::json!({"reports": hashes, "filtered": a.filtered}))?;
    std::fs::create_dir_all(&a.out)?;
    let mut matrices = Vec::new();
    for kind in OverlapKind::ALL {
        let m = overlap(&reports, kind)?;
        std::fs::write(a.out.join(format!("overlap_{}.csv", kind.as_str())), m.to_csv())?;
        writeln!(out, "{}:", kind.as_str())?;
        out.write_all(m.to_csv().as_bytes())?;
        matrices.push(m);
    }
    write_json(
        &a.out.join("overlap.json"),
        &serde_json::json!({"config_hash": hash, "seed": 0, "matrices": matrices}),
    )?;
    Ok(())
}
