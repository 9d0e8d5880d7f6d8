use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use sentev::corpus::{corpus_stats, load_corpus};
use sentev::evalrun::{
    ablation, ablation_tsv, report_tsv, run_experiment, write_report_files, ExperimentConfig, ModelBundle,
};
use sentev::featurize::{load_lexicons, LexiconSet};
use sentev::fsutil::write_atomic;
use sentev::syngen::{load_spec, write_synthetic};
use sentev::NO_EVENT;

#[derive(Parser, Debug)]
#[command(name = "sentev", version, about = "Sentence-level event classification")]
struct Cli {
    /// Seed for folds, shuffling and ensembles; overrides the config file
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Maximum number of worker threads
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Print JSON instead of text
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print corpus statistics
    Stats { corpus: PathBuf },
    /// Train on a whole corpus and write a model file
    Train(Experiment),
    /// Predict label sets for every sentence of a corpus
    Predict {
        model: PathBuf,
        corpus: PathBuf,
        /// Lexicon directory; defaults to the one recorded in the model
        #[arg(long)]
        lexicons: Option<PathBuf>,
    },
    /// Cross-validate and write a report
    Eval(Experiment),
    /// Compare all feature groups against all but one
    Ablate {
        /// Feature group to hold out
        group: String,
        #[command(flatten)]
        experiment: Experiment,
    },
    /// Generate a synthetic corpus and its lexicons from a spec file
    Gen {
        spec: PathBuf,
        /// Output directory
        #[arg(long, short)]
        out: PathBuf,
    },
}

/// Config file plus per-key overrides. Flags win over the file.
#[derive(Args, Debug)]
struct Experiment {
    /// key = value config file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<String>,
    #[arg(long)]
    lexicons: Option<String>,
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    method: Option<String>,
    /// "all" or a comma-separated list of feature groups
    #[arg(long)]
    groups: Option<String>,
    #[arg(long)]
    folds: Option<String>,
    #[arg(long)]
    relax: Option<String>,
    #[arg(long)]
    prune: Option<String>,
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    epochs: Option<String>,
    #[arg(long)]
    eta0: Option<String>,
    #[arg(long)]
    rounds: Option<String>,
    #[arg(long)]
    ecc_m: Option<String>,
    #[arg(long)]
    ecc_fraction: Option<String>,
    #[arg(long)]
    ecc_threshold: Option<String>,
    #[arg(long)]
    ecc_order: Option<String>,
    /// Model file for `train`, report prefix for `eval` and `ablate`
    #[arg(long, short)]
    output: Option<String>,
}

impl Experiment {
    fn resolve(&self, seed: Option<u64>) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let overrides = [
            ("corpus", &self.corpus),
            ("lexicons", &self.lexicons),
            ("task", &self.task),
            ("method", &self.method),
            ("groups", &self.groups),
            ("folds", &self.folds),
            ("relax", &self.relax),
            ("prune", &self.prune),
            ("c", &self.c),
            ("epochs", &self.epochs),
            ("eta0", &self.eta0),
            ("rounds", &self.rounds),
            ("ecc_m", &self.ecc_m),
            ("ecc_fraction", &self.ecc_fraction),
            ("ecc_threshold", &self.ecc_threshold),
            ("ecc_order", &self.ecc_order),
            ("output", &self.output),
        ];
        for (key, value) in overrides {
            if let Some(value) = value {
                config.apply(key, value)?;
            }
        }
        if let Some(seed) = seed {
            config.seed = seed;
        }
        // a method flag alone picks its task
        if self.method.is_some() && self.task.is_none() {
            config.task = config.method.task();
        }
        config.validate()?;
        Ok(config)
    }
}

/// A problem with how the command was invoked.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(message: impl Into<String>) -> anyhow::Error {
    Usage(message.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match err.downcast_ref::<sentev::Error>() {
        Some(e) if e.is_input_error() => 2,
        _ => 1,
    }
}

fn lexicons_of(config: &ExperimentConfig) -> Result<LexiconSet> {
    Ok(match &config.lexicons {
        Some(dir) => load_lexicons(dir)?,
        None => LexiconSet::default(),
    })
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn stats(path: &Path, json: bool) -> Result<()> {
    let corpus = load_corpus(path)?;
    let stats = corpus_stats(&corpus);
    if json {
        return print_json(&stats);
    }
    let mut out = io::stdout().lock();
    let rows = [
        ("sentences", stats.n_sentences.to_string()),
        ("event sentences", stats.n_event_sentences.to_string()),
        ("multi-event sentences", stats.n_multievent_sentences.to_string()),
        ("event fraction", format!("{:.4}", stats.event_fraction)),
        ("multi-event fraction of events", format!("{:.4}", stats.multievent_fraction_of_event)),
        ("multi-event fraction of corpus", format!("{:.4}", stats.multievent_fraction_of_corpus)),
    ];
    for (name, value) in rows {
        writeln!(out, "{name:<32}{value:>8}")?;
    }
    writeln!(out, "label counts:")?;
    for (label, count) in &stats.per_label_counts {
        writeln!(out, "  {label:<30}{count:>8}")?;
    }
    Ok(())
}

fn train(experiment: &Experiment, seed: Option<u64>) -> Result<()> {
    let config = experiment.resolve(seed)?;
    let output = config
        .output
        .clone()
        .ok_or_else(|| usage("train needs an output path (--output or `output` in the config)"))?;
    let corpus_path = config.corpus.as_ref().ok_or_else(|| usage("no corpus given"))?;
    let corpus = load_corpus(corpus_path)?;
    let bundle = ModelBundle::train(&config, &corpus, &lexicons_of(&config)?)?;
    let mut text = serde_json::to_string(&bundle)?;
    text.push('\n');
    write_atomic(&output, text.as_bytes())?;
    eprintln!("wrote {} model to {}", bundle.model.method(), output.display());
    Ok(())
}

#[derive(Serialize)]
struct Prediction<'a> {
    sentence_id: &'a str,
    labels: Vec<String>,
}

fn predict(model: &Path, corpus: &Path, lexicons: Option<&Path>, json: bool) -> Result<()> {
    let text = sentev::fsutil::read_to_string(model)?;
    let bundle: ModelBundle = serde_json::from_str(&text)
        .map_err(sentev::Error::from)
        .with_context(|| format!("reading model {}", model.display()))?;
    let lexicons = match lexicons.or(bundle.lexicons.as_deref()) {
        Some(dir) => load_lexicons(dir)?,
        None => LexiconSet::default(),
    };
    let corpus = load_corpus(corpus)?;
    let predicted = bundle.predict_corpus(&corpus, &lexicons)?;
    if json {
        let rows: Vec<Prediction> = corpus
            .sentences()
            .iter()
            .zip(predicted)
            .map(|(s, labels)| Prediction {
                sentence_id: &s.sentence_id,
                labels,
            })
            .collect();
        return print_json(&rows);
    }
    let mut out = io::BufWriter::new(io::stdout().lock());
    for (s, labels) in corpus.sentences().iter().zip(predicted) {
        let joined = if labels.is_empty() {
            NO_EVENT.to_string()
        } else {
            labels.join(";")
        };
        writeln!(out, "{}\t{joined}", s.sentence_id)?;
    }
    out.flush()?;
    Ok(())
}

fn eval(experiment: &Experiment, seed: Option<u64>, json: bool) -> Result<()> {
    let config = experiment.resolve(seed)?;
    let report = run_experiment(&config)?;
    let tsv = report_tsv(&report)?;
    if let Some(prefix) = &config.output {
        write_report_files(prefix, &tsv, &report)?;
    }
    if json {
        print_json(&report)
    } else {
        print!("{tsv}");
        Ok(())
    }
}

fn ablate(group: &str, experiment: &Experiment, seed: Option<u64>, json: bool) -> Result<()> {
    let config = experiment.resolve(seed)?;
    let result = ablation(&config, group)?;
    let tsv = ablation_tsv(&result)?;
    if let Some(prefix) = &config.output {
        write_report_files(prefix, &tsv, &result)?;
    }
    if json {
        print_json(&result)
    } else {
        print!("{tsv}");
        println!("relative delta without {}: {:+.3}", result.held_out, result.delta);
        Ok(())
    }
}

fn gen(spec: &Path, out: &Path, seed: Option<u64>, json: bool) -> Result<()> {
    let spec = load_spec(spec)?;
    let corpus = write_synthetic(&spec, seed.unwrap_or(0), out)?;
    let stats = corpus_stats(&corpus);
    if json {
        print_json(&stats)
    } else {
        println!(
            "wrote {} sentences ({} with events) to {}",
            stats.n_sentences,
            stats.n_event_sentences,
            out.display()
        );
        Ok(())
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match &cli.command {
        Command::Stats { corpus } => stats(corpus, cli.json),
        Command::Train(experiment) => train(experiment, cli.seed),
        Command::Predict {
            model,
            corpus,
            lexicons,
        } => predict(model, corpus, lexicons.as_deref(), cli.json),
        Command::Eval(experiment) => eval(experiment, cli.seed, cli.json),
        Command::Ablate { group, experiment } => ablate(group, experiment, cli.seed, cli.json),
        Command::Gen { spec, out } => gen(spec, out, cli.seed, cli.json),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
