//! Seeded synthetic corpora with controllable label priors, label
//! correlation and trigger noise.
//!
//! Every labeled sentence renders one template per label; each template
//! contains at least one of the label's trigger tokens. Triggers are emitted
//! as the verb list of a matching lexicon, so with zero noise and disjoint
//! trigger vocabularies each label is perfectly predicted by its trigger
//! counts.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{corpus_to_jsonl, Annotations, Corpus, Date, Sentence};
use crate::error::{Error, Result};
use crate::featurize::LexiconSet;
use crate::fsutil;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelPrior {
    pub name: String,
    pub prior: f64,
}

/// When `if_label` is present, add `then_label` with `probability`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRule {
    pub if_label: String,
    pub then_label: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynSpec {
    pub n_sentences: usize,
    pub labels: Vec<LabelPrior>,
    #[serde(default)]
    pub correlation_rules: Vec<CorrelationRule>,
    /// Probability that a sentence lacking a label still receives one of that
    /// label's triggers.
    pub noise: f64,
    /// Per-label override of `noise`.
    #[serde(default)]
    pub label_noise: BTreeMap<String, f64>,
    pub triggers: BTreeMap<String, Vec<String>>,
    /// Space-separated token templates per label.
    pub templates: BTreeMap<String, Vec<String>>,
    pub filler: Vec<String>,
    pub sources: Vec<String>,
    pub date_range: (Date, Date),
}

impl SynSpec {
    /// A ready-made spec: each label gets three triggers and three templates,
    /// all trigger vocabularies disjoint.
    pub fn with_labels(n_sentences: usize, labels: &[(&str, f64)], noise: f64) -> Self {
        let mut triggers = BTreeMap::new();
        let mut templates = BTreeMap::new();
        for (name, _) in labels {
            let slug = name.to_lowercase();
            let t: Vec<String> = (0..3).map(|k| format!("{slug}-trig{k}")).collect();
            templates.insert(
                name.to_string(),
                vec![
                    format!("witnesses saw {} near the square", t[0]),
                    format!("{} was reported by officials", t[1]),
                    format!("police said the {} happened overnight", t[2]),
                ],
            );
            triggers.insert(name.to_string(), t);
        }
        SynSpec {
            n_sentences,
            labels: labels
                .iter()
                .map(|&(name, prior)| LabelPrior {
                    name: name.to_string(),
                    prior,
                })
                .collect(),
            correlation_rules: Vec::new(),
            noise,
            label_noise: BTreeMap::new(),
            triggers,
            templates,
            filler: [
                "the", "city", "council", "met", "on", "monday", "to", "discuss", "budget",
                "weather", "remained", "mild", "markets", "closed", "higher", "today",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
            sources: vec!["wire".into(), "bbc".into(), "cnn".into()],
            date_range: (Date::new(2003, 1, 1).unwrap(), Date::new(2003, 6, 28).unwrap()),
        }
    }

    pub fn label_names(&self) -> Vec<String> {
        self.labels.iter().map(|l| l.name.clone()).collect()
    }

    fn noise_for(&self, label: &str) -> f64 {
        self.label_noise.get(label).copied().unwrap_or(self.noise)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |what: String, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::invalid(format!("{what} = {p} outside [0, 1]")))
            }
        };
        if self.n_sentences == 0 {
            return Err(Error::invalid("n_sentences must be positive"));
        }
        let names: BTreeSet<&str> = self.labels.iter().map(|l| l.name.as_str()).collect();
        if names.len() != self.labels.len() {
            return Err(Error::invalid("label names must be distinct"));
        }
        for l in &self.labels {
            unit(format!("prior of {}", l.name), l.prior)?;
        }
        unit("noise".into(), self.noise)?;
        for (label, &p) in &self.label_noise {
            if !names.contains(label.as_str()) {
                return Err(Error::invalid(format!("label_noise names unknown label {label:?}")));
            }
            unit(format!("noise of {label}"), p)?;
        }
        for rule in &self.correlation_rules {
            for l in [&rule.if_label, &rule.then_label] {
                if !names.contains(l.as_str()) {
                    return Err(Error::invalid(format!("correlation rule names unknown label {l:?}")));
                }
            }
            unit(format!("probability of {} -> {}", rule.if_label, rule.then_label), rule.probability)?;
        }
        for name in &names {
            let triggers = self.triggers.get(*name).filter(|t| !t.is_empty()).ok_or_else(|| {
                Error::invalid(format!("label {name:?} has no trigger tokens"))
            })?;
            let templates = self.templates.get(*name).filter(|t| !t.is_empty()).ok_or_else(|| {
                Error::invalid(format!("label {name:?} has no templates"))
            })?;
            for template in templates {
                if !template.split_whitespace().any(|tok| triggers.iter().any(|t| t == tok)) {
                    return Err(Error::invalid(format!(
                        "template {template:?} of {name:?} mentions none of its triggers"
                    )));
                }
            }
        }
        if self.filler.is_empty() || self.sources.is_empty() {
            return Err(Error::invalid("filler and sources must be non-empty"));
        }
        let all_triggers: BTreeSet<&String> = self.triggers.values().flatten().collect();
        if let Some(f) = self.filler.iter().find(|f| all_triggers.contains(f)) {
            return Err(Error::invalid(format!("filler token {f:?} is also a trigger")));
        }
        let (start, end) = self.date_range;
        if start.day == 0 || end.day == 0 || start > end {
            return Err(Error::invalid("date_range must be two full dates, start <= end"));
        }
        Ok(())
    }

    /// Lexicons matching the corpus: every trigger is a verb.
    pub fn lexicons(&self) -> LexiconSet {
        LexiconSet {
            verbs: self
                .triggers
                .values()
                .flatten()
                .map(|t| t.to_lowercase())
                .collect(),
            ..LexiconSet::default()
        }
    }

    fn months(&self) -> Vec<(u16, u8)> {
        let (start, end) = self.date_range;
        let mut months = Vec::new();
        let (mut y, mut m) = (start.year, start.month);
        while (y, m) <= (end.year, end.month) {
            months.push((y, m));
            if m == 12 {
                y += 1;
                m = 1;
            } else {
                m += 1;
            }
        }
        months
    }
}

fn tokens_of(template: &str) -> Vec<String> {
    template.split_whitespace().map(String::from).collect()
}

pub fn generate_corpus(spec: &SynSpec, seed: u64) -> Result<Corpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let months = spec.months();
    let vocabulary = spec.label_names();

    let mut sentences = Vec::with_capacity(spec.n_sentences);
    for i in 0..spec.n_sentences {
        let mut labels: Vec<String> = spec
            .labels
            .iter()
            .filter(|l| rng.gen_bool(l.prior))
            .map(|l| l.name.clone())
            .collect();
        for rule in &spec.correlation_rules {
            let fire = rng.gen_bool(rule.probability);
            if fire && labels.contains(&rule.if_label) && !labels.contains(&rule.then_label) {
                labels.push(rule.then_label.clone());
            }
        }
        labels.sort_by_key(|l| vocabulary.iter().position(|v| v == l));

        let mut tokens = Vec::new();
        if labels.is_empty() {
            let len = rng.gen_range(4..=8);
            tokens.extend((0..len).map(|_| spec.filler.choose(&mut rng).unwrap().clone()));
        } else {
            for label in &labels {
                let template = spec.templates[label].choose(&mut rng).unwrap();
                tokens.extend(tokens_of(template));
            }
            let extra = rng.gen_range(0..=3);
            for _ in 0..extra {
                let pos = rng.gen_range(0..=tokens.len());
                tokens.insert(pos, spec.filler.choose(&mut rng).unwrap().clone());
            }
        }

        for label in &vocabulary {
            let hit = rng.gen_bool(spec.noise_for(label));
            if hit && !labels.contains(label) {
                let trigger = spec.triggers[label].choose(&mut rng).unwrap().clone();
                let pos = rng.gen_range(0..=tokens.len());
                tokens.insert(pos, trigger);
            }
        }

        let (year, month) = months[i % months.len()];
        let day = 1 + ((i / months.len()) % 28) as u8;
        sentences.push(Sentence {
            doc_id: format!("doc{:05}", i / 10),
            sentence_id: format!("s{i:06}"),
            source_id: spec.sources[i % spec.sources.len()].clone(),
            date: Date::new(year, month, day)?,
            tokens,
            labels,
            annotations: Annotations::new(),
        });
    }
    Corpus::new(sentences, vocabulary)
}

/// Writes `corpus.jsonl` and `lexicons/verbs.txt` under `dir`.
pub fn write_synthetic(spec: &SynSpec, seed: u64, dir: &Path) -> Result<Corpus> {
    let corpus = generate_corpus(spec, seed)?;
    fsutil::write_atomic(&dir.join("corpus.jsonl"), corpus_to_jsonl(&corpus)?.as_bytes())?;
    let mut verbs = String::from("# trigger tokens of the synthetic labels\n");
    for verb in &spec.lexicons().verbs {
        verbs.push_str(verb);
        verbs.push('\n');
    }
    fsutil::write_atomic(&dir.join("lexicons").join("verbs.txt"), verbs.as_bytes())?;
    Ok(corpus)
}

pub fn load_spec(path: &Path) -> Result<SynSpec> {
    let spec: SynSpec = serde_json::from_str(&fsutil::read_to_string(path)?)?;
    spec.validate()?;
    Ok(spec)
}
