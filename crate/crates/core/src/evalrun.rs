//! Per-label scoring, cross-validated experiments, ablations and report
//! rendering.
//!
//! Predictions from all test folds are pooled before scoring, so every
//! label's F1 is computed once from the pooled confusion counts.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::boost::{train_adaboost_m1, BoostModel, DEFAULT_ROUNDS};
use crate::corpus::{load_corpus, relax_to_single_label, stratified_folds, Corpus, RelaxPolicy, Sentence};
use crate::error::{Error, Result};
use crate::featurize::{
    extract_features, fit_vectorizer, groups_to_string, load_lexicons, parse_groups, vectorize,
    FeatureGroup, LexiconSet, PruneMode, RawFeatures, Vectorizer,
};
use crate::fsutil;
use crate::linear::LinearHyper;
use crate::multiclass::{train_ovr, OvRModel};
use crate::multilabel::{train_br, train_cc, train_ecc, BRModel, ChainModel, ChainOrderPolicy, EccParams, EnsembleModel};
use crate::sparse::SparseVector;
use crate::NO_EVENT;

pub const DEFAULT_FOLDS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelScore {
    pub label: String,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl LabelScore {
    pub fn from_counts(label: impl Into<String>, tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        LabelScore {
            label: label.into(),
            tp,
            fp,
            fn_,
            precision,
            recall,
            f1,
        }
    }
}

/// Scores the virtual [`NO_EVENT`] label (an empty set) first, then every
/// vocabulary label in order.
pub fn score_labels(
    gold: &[Vec<String>],
    pred: &[Vec<String>],
    vocabulary: &[String],
) -> Result<Vec<LabelScore>> {
    if gold.len() != pred.len() {
        return Err(Error::invalid(format!(
            "{} gold label sets but {} predictions",
            gold.len(),
            pred.len()
        )));
    }
    let count = |has: &dyn Fn(&[String]) -> bool| {
        let (mut tp, mut fp, mut fn_) = (0, 0, 0);
        for (g, p) in gold.iter().zip(pred) {
            match (has(g), has(p)) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => {}
            }
        }
        (tp, fp, fn_)
    };
    let mut rows = Vec::with_capacity(vocabulary.len() + 1);
    let (tp, fp, fn_) = count(&|s| s.is_empty());
    rows.push(LabelScore::from_counts(NO_EVENT, tp, fp, fn_));
    for label in vocabulary {
        let (tp, fp, fn_) = count(&|s| s.iter().any(|l| l == label));
        rows.push(LabelScore::from_counts(label.clone(), tp, fp, fn_));
    }
    Ok(rows)
}

pub fn macro_f1(scores: &[LabelScore]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::invalid("macro F1 of zero labels"));
    }
    Ok(scores.iter().map(|s| s.f1).sum::<f64>() / scores.len() as f64)
}

/// `new / old − 1`.
pub fn relative_delta(new: f64, old: f64) -> Result<f64> {
    if old.is_nan() || old <= 0.0 {
        return Err(Error::invalid(format!("relative change against {old}")));
    }
    Ok(new / old - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    #[default]
    Single,
    Multi,
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Task::Single),
            "multi" => Ok(Task::Multi),
            other => Err(Error::config("task", format!("unknown task {other:?}"))),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Single => "single",
            Task::Multi => "multi",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Svm,
    AdaSvm,
    Br,
    Cc,
    Ecc,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Svm => "svm",
            Method::AdaSvm => "ada-svm",
            Method::Br => "br",
            Method::Cc => "cc",
            Method::Ecc => "ecc",
        }
    }

    /// Column heading used in report tables.
    pub fn heading(self) -> &'static str {
        match self {
            Method::Svm => "SVM",
            Method::AdaSvm => "Ada.SVM",
            Method::Br => "BR",
            Method::Cc => "CC",
            Method::Ecc => "ECC",
        }
    }

    pub fn task(self) -> Task {
        match self {
            Method::Svm | Method::AdaSvm => Task::Single,
            Method::Br | Method::Cc | Method::Ecc => Task::Multi,
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svm" => Ok(Method::Svm),
            "ada-svm" => Ok(Method::AdaSvm),
            "br" => Ok(Method::Br),
            "cc" => Ok(Method::Cc),
            "ecc" => Ok(Method::Ecc),
            other => Err(Error::config("method", format!("unknown method {other:?}"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Experiment settings, read from `key = value` lines.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub corpus: Option<PathBuf>,
    pub lexicons: Option<PathBuf>,
    pub task: Task,
    pub method: Method,
    pub groups: BTreeSet<FeatureGroup>,
    pub folds: usize,
    pub seed: u64,
    pub relax: RelaxPolicy,
    pub prune: PruneMode,
    pub hyper: LinearHyper,
    pub rounds: usize,
    pub ecc: EccParams,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            corpus: None,
            lexicons: None,
            task: Task::Single,
            method: Method::Svm,
            groups: FeatureGroup::all(),
            folds: DEFAULT_FOLDS,
            seed: 0,
            relax: RelaxPolicy::default(),
            prune: PruneMode::default(),
            hyper: LinearHyper::default(),
            rounds: DEFAULT_ROUNDS,
            ecc: EccParams::default(),
            output: None,
        }
    }
}

pub const CONFIG_KEYS: &[&str] = &[
    "corpus",
    "lexicons",
    "task",
    "method",
    "groups",
    "folds",
    "seed",
    "relax",
    "prune",
    "c",
    "epochs",
    "eta0",
    "rounds",
    "ecc_m",
    "ecc_fraction",
    "ecc_threshold",
    "ecc_order",
    "output",
];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse {value:?}")))
}

impl ExperimentConfig {
    /// Sets one key. Unknown keys are errors.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "corpus" => self.corpus = Some(PathBuf::from(value)),
            "lexicons" => self.lexicons = (!value.is_empty()).then(|| PathBuf::from(value)),
            "task" => self.task = value.parse()?,
            "method" => self.method = value.parse()?,
            "groups" => self.groups = parse_groups(value)?,
            "folds" => self.folds = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "relax" => self.relax = value.parse()?,
            "prune" => self.prune = value.parse()?,
            "c" => self.hyper.c = parse_num(key, value)?,
            "epochs" => self.hyper.epochs = parse_num(key, value)?,
            "eta0" => self.hyper.eta0 = parse_num(key, value)?,
            "rounds" => self.rounds = parse_num(key, value)?,
            "ecc_m" => self.ecc.m = parse_num(key, value)?,
            "ecc_fraction" => self.ecc.sample_fraction = parse_num(key, value)?,
            "ecc_threshold" => self.ecc.vote_threshold = parse_num(key, value)?,
            "ecc_order" => {
                self.ecc.order_policy = match value {
                    "random" => ChainOrderPolicy::Random,
                    "canonical" => ChainOrderPolicy::Canonical,
                    other => return Err(Error::config(key, format!("unknown order {other:?}"))),
                }
            }
            "output" => self.output = Some(PathBuf::from(value)),
            other => return Err(Error::config(other, "unknown key")),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment. Relative paths are
    /// resolved against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut config = ExperimentConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Record {
                file: "config".into(),
                line: n + 1,
                field: line.into(),
                message: "expected key = value".into(),
            })?;
            let key = key.trim();
            config.apply(key, value)?;
            if matches!(key, "corpus" | "lexicons" | "output") {
                let slot = match key {
                    "corpus" => &mut config.corpus,
                    "lexicons" => &mut config.lexicons,
                    _ => &mut config.output,
                };
                if let Some(p) = slot.as_mut().filter(|p| p.is_relative()) {
                    *p = base_dir.join(&*p);
                }
            }
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fsutil::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.method.task() != self.task {
            return Err(Error::config(
                "method",
                format!("{} is not a {} method", self.method, self.task),
            ));
        }
        if self.folds < 2 {
            return Err(Error::config("folds", "need at least 2 folds"));
        }
        if self.rounds == 0 {
            return Err(Error::config("rounds", "must be at least 1"));
        }
        self.hyper.validate()?;
        self.ecc.validate()
    }

    /// The settings that determine results, one `key=value` per line in
    /// [`CONFIG_KEYS`] order. `output` is left out.
    pub fn canonical(&self) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let order = match self.ecc.order_policy {
            ChainOrderPolicy::Random => "random",
            ChainOrderPolicy::Canonical => "canonical",
        };
        let values = [
            ("corpus", path(&self.corpus)),
            ("lexicons", path(&self.lexicons)),
            ("task", self.task.to_string()),
            ("method", self.method.to_string()),
            ("groups", groups_to_string(&self.groups)),
            ("folds", self.folds.to_string()),
            ("seed", self.seed.to_string()),
            ("relax", self.relax.to_string()),
            ("prune", self.prune.to_string()),
            ("c", self.hyper.c.to_string()),
            ("epochs", self.hyper.epochs.to_string()),
            ("eta0", self.hyper.eta0.to_string()),
            ("rounds", self.rounds.to_string()),
            ("ecc_m", self.ecc.m.to_string()),
            ("ecc_fraction", self.ecc.sample_fraction.to_string()),
            ("ecc_threshold", self.ecc.vote_threshold.to_string()),
            ("ecc_order", order.to_string()),
        ];
        values.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// First 16 hex digits of the SHA-256 of [`canonical`](Self::canonical).
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Hyperparameters with the experiment seed applied.
    pub fn seeded_hyper(&self) -> LinearHyper {
        self.hyper.with_seed(self.seed)
    }

    pub fn seeded_ecc(&self) -> EccParams {
        EccParams {
            seed: self.seed,
            ..self.ecc
        }
    }
}

/// A model of any supported method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", content = "model", rename_all = "kebab-case")]
pub enum TrainedModel {
    Svm(OvRModel),
    AdaSvm(BoostModel),
    Br(BRModel),
    Cc(ChainModel),
    Ecc(EnsembleModel),
}

impl TrainedModel {
    pub fn method(&self) -> Method {
        match self {
            TrainedModel::Svm(_) => Method::Svm,
            TrainedModel::AdaSvm(_) => Method::AdaSvm,
            TrainedModel::Br(_) => Method::Br,
            TrainedModel::Cc(_) => Method::Cc,
            TrainedModel::Ecc(_) => Method::Ecc,
        }
    }

    /// Predicted label set in canonical order; empty means no event.
    pub fn predict(&self, x: &SparseVector) -> Result<Vec<String>> {
        let single = |class: &str| {
            if class == NO_EVENT {
                Vec::new()
            } else {
                vec![class.to_string()]
            }
        };
        match self {
            TrainedModel::Svm(m) => Ok(single(m.predict(x)?)),
            TrainedModel::AdaSvm(m) => Ok(single(m.predict(x)?)),
            TrainedModel::Br(m) => m.predict(x),
            TrainedModel::Cc(m) => m.predict(x),
            TrainedModel::Ecc(m) => m.predict(x),
        }
    }
}

/// Trains `config.method` on vectorized instances. For single-label methods
/// the corpus must already be relaxed.
pub fn train_method(
    config: &ExperimentConfig,
    xs: &[SparseVector],
    corpus: &Corpus,
) -> Result<TrainedModel> {
    let vocabulary = corpus.label_vocabulary();
    let hyper = config.seeded_hyper();
    let classes: Vec<&str> = corpus.sentences().iter().map(|s| s.class_name()).collect();
    let sets: Vec<Vec<String>> = corpus.sentences().iter().map(|s| s.labels.clone()).collect();
    Ok(match config.method {
        Method::Svm => TrainedModel::Svm(train_ovr(xs, &classes, vocabulary, &hyper)?),
        Method::AdaSvm => TrainedModel::AdaSvm(train_adaboost_m1(
            xs,
            &classes,
            vocabulary,
            config.rounds,
            &hyper,
            config.seed,
        )?),
        Method::Br => TrainedModel::Br(train_br(xs, &sets, vocabulary, &hyper)?),
        Method::Cc => TrainedModel::Cc(train_cc(xs, &sets, vocabulary, vocabulary, &hyper)?),
        Method::Ecc => TrainedModel::Ecc(train_ecc(xs, &sets, vocabulary, &config.seeded_ecc(), &hyper)?),
    })
}

/// The corpus the task is evaluated on: relaxed for single-label methods.
pub fn task_corpus(config: &ExperimentConfig, corpus: &Corpus) -> Corpus {
    match config.task {
        Task::Single => relax_to_single_label(corpus, config.relax),
        Task::Multi => corpus.clone(),
    }
}

/// Everything needed to predict on new sentences: the fitted vectorizer,
/// the model, and the lexicons it was trained with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub config_fingerprint: String,
    pub task: Task,
    pub groups: BTreeSet<FeatureGroup>,
    pub lexicons: Option<PathBuf>,
    pub lexicon_fingerprint: String,
    pub label_vocabulary: Vec<String>,
    pub vectorizer: Vectorizer,
    pub model: TrainedModel,
}

impl ModelBundle {
    /// Trains on the whole corpus.
    pub fn train(config: &ExperimentConfig, corpus: &Corpus, lexicons: &LexiconSet) -> Result<Self> {
        config.validate()?;
        let corpus = task_corpus(config, corpus);
        let raw: Vec<RawFeatures> = corpus
            .sentences()
            .iter()
            .map(|s| extract_features(s, lexicons, &config.groups))
            .collect();
        let classes: Vec<&str> = corpus.sentences().iter().map(|s| s.class_name()).collect();
        let vectorizer = fit_vectorizer(&raw, &classes, config.prune)?;
        let xs: Vec<SparseVector> = raw.iter().map(|r| vectorize(r, &vectorizer)).collect();
        let model = train_method(config, &xs, &corpus)?;
        Ok(ModelBundle {
            config_fingerprint: config.fingerprint(),
            task: config.task,
            groups: config.groups.clone(),
            lexicons: config.lexicons.clone(),
            lexicon_fingerprint: lexicons.fingerprint(),
            label_vocabulary: corpus.label_vocabulary().to_vec(),
            vectorizer,
            model,
        })
    }

    /// Errors when `lexicons` differ from the ones used in training.
    pub fn check_lexicons(&self, lexicons: &LexiconSet) -> Result<()> {
        let found = lexicons.fingerprint();
        if found != self.lexicon_fingerprint {
            return Err(Error::invalid(format!(
                "lexicon fingerprint {found} does not match the model's {}",
                self.lexicon_fingerprint
            )));
        }
        Ok(())
    }

    pub fn predict(&self, sentence: &Sentence, lexicons: &LexiconSet) -> Result<Vec<String>> {
        let raw = extract_features(sentence, lexicons, &self.groups);
        self.model.predict(&vectorize(&raw, &self.vectorizer))
    }

    pub fn predict_corpus(&self, corpus: &Corpus, lexicons: &LexiconSet) -> Result<Vec<Vec<String>>> {
        self.check_lexicons(lexicons)?;
        corpus.sentences().iter().map(|s| self.predict(s, lexicons)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: Method,
    pub task: Task,
    /// [`NO_EVENT`] first, then canonical label order.
    pub rows: Vec<LabelScore>,
    pub macro_f1: f64,
    pub config_fingerprint: String,
    pub feature_groups_enabled: BTreeSet<FeatureGroup>,
    /// Mean over folds of the share of observed features removed by pruning.
    pub pruned_fraction: f64,
    pub n_instances: usize,
    pub folds: usize,
    /// False when the folds fell back to a plain shuffled split.
    pub stratified: bool,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<EvalReport> {
    config.validate()?;
    let path = config
        .corpus
        .as_ref()
        .ok_or_else(|| Error::config("corpus", "no corpus given"))?;
    let corpus = load_corpus(path)?;
    let lexicons = match &config.lexicons {
        Some(dir) => load_lexicons(dir)?,
        None => LexiconSet::default(),
    };
    run_on_corpus(config, &corpus, &lexicons)
}

/// [`run_experiment`] on an in-memory corpus; `config.corpus` and
/// `config.lexicons` are only used for the fingerprint.
pub fn run_on_corpus(config: &ExperimentConfig, corpus: &Corpus, lexicons: &LexiconSet) -> Result<EvalReport> {
    config.validate()?;
    let corpus = task_corpus(config, corpus);
    let folds = stratified_folds(&corpus, config.folds, config.seed)?;
    let raw: Vec<RawFeatures> = corpus
        .sentences()
        .iter()
        .map(|s| extract_features(s, lexicons, &config.groups))
        .collect();
    let classes: Vec<&str> = corpus.sentences().iter().map(|s| s.class_name()).collect();

    let outcomes = folds
        .folds
        .par_iter()
        .map(|fold| {
            let train_raw: Vec<RawFeatures> = fold.train.iter().map(|&i| raw[i].clone()).collect();
            let train_classes: Vec<&str> = fold.train.iter().map(|&i| classes[i]).collect();
            let vectorizer = fit_vectorizer(&train_raw, &train_classes, config.prune)?;
            let xs: Vec<SparseVector> = train_raw.iter().map(|r| vectorize(r, &vectorizer)).collect();
            let model = train_method(config, &xs, &corpus.subset(&fold.train))?;
            let predictions = fold
                .test
                .iter()
                .map(|&i| Ok((i, model.predict(&vectorize(&raw[i], &vectorizer))?)))
                .collect::<Result<Vec<_>>>()?;
            Ok((vectorizer.pruned_fraction(), predictions))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut predicted = vec![Vec::new(); corpus.len()];
    let mut pruned_total = 0.0;
    for (pruned, predictions) in &outcomes {
        pruned_total += pruned;
        for (i, labels) in predictions {
            predicted[*i] = labels.clone();
        }
    }
    let gold: Vec<Vec<String>> = corpus.sentences().iter().map(|s| s.labels.clone()).collect();
    let rows = score_labels(&gold, &predicted, corpus.label_vocabulary())?;
    Ok(EvalReport {
        method: config.method,
        task: config.task,
        macro_f1: macro_f1(&rows)?,
        rows,
        config_fingerprint: config.fingerprint(),
        feature_groups_enabled: config.groups.clone(),
        pruned_fraction: pruned_total / outcomes.len() as f64,
        n_instances: corpus.len(),
        folds: config.folds,
        stratified: folds.stratified,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ablation {
    pub held_out: FeatureGroup,
    pub full: EvalReport,
    pub without: EvalReport,
    /// `full.macro_f1 / without.macro_f1 − 1`.
    pub delta: f64,
}

fn without_group(config: &ExperimentConfig, group: FeatureGroup) -> ExperimentConfig {
    let mut reduced = config.clone();
    reduced.groups.remove(&group);
    reduced
}

fn assemble(group: FeatureGroup, full: EvalReport, without: EvalReport) -> Result<Ablation> {
    let delta = if full.macro_f1 == without.macro_f1 {
        0.0
    } else {
        relative_delta(full.macro_f1, without.macro_f1)?
    };
    Ok(Ablation {
        held_out: group,
        full,
        without,
        delta,
    })
}

/// Runs the configured groups and the same groups minus `group`.
pub fn ablation(config: &ExperimentConfig, group: &str) -> Result<Ablation> {
    let group: FeatureGroup = group.parse()?;
    let full = run_experiment(config)?;
    let without = run_experiment(&without_group(config, group))?;
    assemble(group, full, without)
}

pub fn ablation_on_corpus(
    config: &ExperimentConfig,
    group: &str,
    corpus: &Corpus,
    lexicons: &LexiconSet,
) -> Result<Ablation> {
    let group: FeatureGroup = group.parse()?;
    let full = run_on_corpus(config, corpus, lexicons)?;
    let without = run_on_corpus(&without_group(config, group), corpus, lexicons)?;
    assemble(group, full, without)
}

/// Three decimals, truncated.
pub fn truncate3(x: f64) -> String {
    format!("{:.3}", ((x * 1000.0) + 1e-9).floor() / 1000.0)
}

/// Label rows against one column per report, closed by an `Avg.` row. All
/// reports must share the same row labels.
pub fn render_tsv(columns: &[(String, &EvalReport)]) -> Result<String> {
    let first = columns
        .first()
        .ok_or_else(|| Error::invalid("a table needs at least one column"))?
        .1;
    for (_, report) in columns {
        let same = report.rows.len() == first.rows.len()
            && report.rows.iter().zip(&first.rows).all(|(a, b)| a.label == b.label);
        if !same {
            return Err(Error::invalid("reports cover different labels"));
        }
    }
    let mut out = String::from("Labels");
    for (heading, _) in columns {
        out.push('\t');
        out.push_str(heading);
    }
    out.push('\n');
    for (i, row) in first.rows.iter().enumerate() {
        out.push_str(&row.label);
        for (_, report) in columns {
            out.push('\t');
            out.push_str(&truncate3(report.rows[i].f1));
        }
        out.push('\n');
    }
    out.push_str("Avg.");
    for (_, report) in columns {
        out.push('\t');
        out.push_str(&truncate3(report.macro_f1));
    }
    out.push('\n');
    Ok(out)
}

pub fn report_tsv(report: &EvalReport) -> Result<String> {
    render_tsv(&[(format!("{} (all f.)", report.method.heading()), report)])
}

pub fn ablation_tsv(ablation: &Ablation) -> Result<String> {
    let heading = ablation.full.method.heading();
    render_tsv(&[
        (format!("{heading} (all f.)"), &ablation.full),
        (format!("{heading} (no {})", ablation.held_out), &ablation.without),
    ])
}

/// Writes `<prefix>.tsv` and `<prefix>.json`.
pub fn write_report_files<T: Serialize>(prefix: &Path, tsv: &str, json: &T) -> Result<()> {
    let with_ext = |ext: &str| {
        let mut name = prefix.as_os_str().to_owned();
        name.push(ext);
        PathBuf::from(name)
    };
    fsutil::write_atomic(&with_ext(".tsv"), tsv.as_bytes())?;
    let mut text = serde_json::to_string_pretty(json)?;
    text.push('\n');
    fsutil::write_atomic(&with_ext(".json"), text.as_bytes())
}
