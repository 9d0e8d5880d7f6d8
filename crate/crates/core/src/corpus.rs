//! Sentence records, corpus statistics, single-label relaxation and
//! stratified cross-validation folds.
//!
//! A corpus file is JSON lines: an optional header object
//! `{"label_vocabulary": [...]}` followed by one sentence record per line.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fsutil;
use crate::NO_EVENT;

/// Calendar date of a sentence's source document. `day == 0` marks an
/// unknown day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Date {
    pub year: u16,
    pub month: u8,
    pub day: u8,
}

impl Date {
    pub fn new(year: u16, month: u8, day: u8) -> Result<Self> {
        if year > 9999 {
            return Err(Error::invalid(format!("year {year} out of range")));
        }
        if !(1..=12).contains(&month) {
            return Err(Error::invalid(format!("month {month} out of range")));
        }
        if day > 31 {
            return Err(Error::invalid(format!("day {day} out of range")));
        }
        Ok(Date { year, month, day })
    }
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}-{:02}", self.year, self.month, self.day)
    }
}

impl FromStr for Date {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("expected YYYY-MM-DD, got {s:?}"));
        let parts: Vec<&str> = s.split('-').collect();
        if parts.len() != 3
            || parts[0].len() != 4
            || parts[1].len() != 2
            || parts[2].len() != 2
            || !parts.iter().all(|p| p.bytes().all(|b| b.is_ascii_digit()))
        {
            return Err(bad());
        }
        let year = parts[0].parse().map_err(|_| bad())?;
        let month = parts[1].parse().map_err(|_| bad())?;
        let day = parts[2].parse().map_err(|_| bad())?;
        Date::new(year, month, day)
    }
}

impl Serialize for Date {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Date {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Precomputed per-sentence counts, keyed by annotation group then term.
pub type Annotations = BTreeMap<String, BTreeMap<String, u64>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub doc_id: String,
    pub sentence_id: String,
    pub source_id: String,
    pub date: Date,
    pub tokens: Vec<String>,
    /// Event labels in canonical vocabulary order; empty means no event.
    pub labels: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub annotations: Annotations,
}

impl Sentence {
    pub fn is_event(&self) -> bool {
        !self.labels.is_empty()
    }

    pub fn is_multievent(&self) -> bool {
        self.labels.len() >= 2
    }

    /// The single-label class of this sentence: its first label in canonical
    /// order, or [`NO_EVENT`].
    pub fn class_name(&self) -> &str {
        self.labels.first().map(String::as_str).unwrap_or(NO_EVENT)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    sentences: Vec<Sentence>,
    label_vocabulary: Vec<String>,
}

impl Corpus {
    /// Validates the sentences against the vocabulary and puts every label
    /// set into canonical order.
    pub fn new(mut sentences: Vec<Sentence>, label_vocabulary: Vec<String>) -> Result<Self> {
        let mut seen = HashSet::new();
        for label in &label_vocabulary {
            check_label_name(label)?;
            if !seen.insert(label.as_str()) {
                return Err(Error::invalid(format!(
                    "label {label:?} declared twice in the vocabulary"
                )));
            }
        }
        let rank: BTreeMap<&str, usize> = label_vocabulary
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        for sentence in &mut sentences {
            validate_sentence(sentence).map_err(|(field, message)| {
                Error::invalid(format!(
                    "sentence {:?}: field `{field}`: {message}",
                    sentence.sentence_id
                ))
            })?;
            for label in &sentence.labels {
                if !rank.contains_key(label.as_str()) {
                    return Err(Error::invalid(format!(
                        "sentence {:?}: label {label:?} is not in the vocabulary",
                        sentence.sentence_id
                    )));
                }
            }
            sentence.labels.sort_by_key(|l| rank[l.as_str()]);
        }
        Ok(Corpus {
            sentences,
            label_vocabulary,
        })
    }

    /// Builds a corpus whose vocabulary is the labels in first-appearance
    /// order.
    pub fn from_sentences(sentences: Vec<Sentence>) -> Result<Self> {
        let vocabulary = first_appearance_order(&sentences);
        Corpus::new(sentences, vocabulary)
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn label_vocabulary(&self) -> &[String] {
        &self.label_vocabulary
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Restricts the corpus to the given sentence indices, keeping the
    /// vocabulary.
    pub fn subset(&self, indices: &[usize]) -> Corpus {
        Corpus {
            sentences: indices.iter().map(|&i| self.sentences[i].clone()).collect(),
            label_vocabulary: self.label_vocabulary.clone(),
        }
    }

    /// Single-label classes in report order: [`NO_EVENT`] first, then the
    /// vocabulary.
    pub fn class_order(&self) -> Vec<String> {
        std::iter::once(NO_EVENT.to_string())
            .chain(self.label_vocabulary.iter().cloned())
            .collect()
    }
}

fn check_label_name(label: &str) -> Result<()> {
    if label.is_empty() {
        return Err(Error::invalid("empty label name"));
    }
    if label == NO_EVENT {
        return Err(Error::invalid(format!(
            "label name {NO_EVENT:?} is reserved for sentences without events"
        )));
    }
    Ok(())
}

fn validate_sentence(sentence: &Sentence) -> std::result::Result<(), (&'static str, String)> {
    if sentence.tokens.is_empty() {
        return Err(("tokens", "must contain at least one token".into()));
    }
    let mut seen = HashSet::new();
    for label in &sentence.labels {
        check_label_name(label).map_err(|e| ("labels", e.to_string()))?;
        if !seen.insert(label.as_str()) {
            return Err(("labels", format!("duplicate label {label:?}")));
        }
    }
    Ok(())
}

fn first_appearance_order(sentences: &[Sentence]) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut vocabulary = Vec::new();
    for label in sentences.iter().flat_map(|s| &s.labels) {
        if seen.insert(label.clone()) {
            vocabulary.push(label.clone());
        }
    }
    vocabulary
}

#[derive(Serialize, Deserialize)]
struct Header {
    label_vocabulary: Vec<String>,
}

fn field<T: DeserializeOwned>(
    object: &serde_json::Map<String, Value>,
    name: &'static str,
    required: bool,
) -> std::result::Result<Option<T>, (&'static str, String)> {
    match object.get(name) {
        None if required => Err((name, "missing".into())),
        None => Ok(None),
        Some(value) => serde_json::from_value(value.clone())
            .map(Some)
            .map_err(|e| (name, e.to_string())),
    }
}

fn parse_record(line: &str) -> std::result::Result<Sentence, (&'static str, String)> {
    let value: Value = serde_json::from_str(line).map_err(|e| ("<record>", e.to_string()))?;
    let object = value
        .as_object()
        .ok_or(("<record>", "expected a JSON object".to_string()))?;
    let sentence = Sentence {
        doc_id: field(object, "doc_id", true)?.unwrap(),
        sentence_id: field(object, "sentence_id", true)?.unwrap(),
        source_id: field(object, "source_id", true)?.unwrap(),
        date: field(object, "date", true)?.unwrap(),
        tokens: field(object, "tokens", true)?.unwrap(),
        labels: field(object, "labels", true)?.unwrap(),
        annotations: field(object, "annotations", false)?.unwrap_or_default(),
    };
    validate_sentence(&sentence)?;
    Ok(sentence)
}

/// Parses corpus JSONL text. `origin` names the source in error messages.
pub fn parse_corpus(text: &str, origin: &str) -> Result<Corpus> {
    let record_error = |line: usize, (field, message): (&str, String)| Error::Record {
        file: origin.to_string(),
        line,
        field: field.to_string(),
        message,
    };

    let mut declared: Option<Vec<String>> = None;
    let mut sentences = Vec::new();
    let mut first = true;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if first {
            first = false;
            let value: Value = serde_json::from_str(line)
                .map_err(|e| record_error(line_no, ("<record>", e.to_string())))?;
            if value.get("label_vocabulary").is_some() && value.get("tokens").is_none() {
                let header: Header = serde_json::from_value(value)
                    .map_err(|e| record_error(line_no, ("label_vocabulary", e.to_string())))?;
                let mut seen = HashSet::new();
                for label in &header.label_vocabulary {
                    check_label_name(label)
                        .map_err(|e| record_error(line_no, ("label_vocabulary", e.to_string())))?;
                    if !seen.insert(label.as_str()) {
                        return Err(record_error(
                            line_no,
                            ("label_vocabulary", format!("duplicate label {label:?}")),
                        ));
                    }
                }
                declared = Some(header.label_vocabulary);
                continue;
            }
        }
        let sentence = parse_record(line).map_err(|e| record_error(line_no, e))?;
        if let Some(vocabulary) = &declared {
            if let Some(unknown) = sentence.labels.iter().find(|l| !vocabulary.contains(l)) {
                return Err(record_error(
                    line_no,
                    ("labels", format!("label {unknown:?} is not in the declared vocabulary")),
                ));
            }
        }
        sentences.push(sentence);
    }
    if sentences.is_empty() {
        return Err(Error::invalid(format!("{origin}: corpus contains no sentences")));
    }
    let vocabulary = declared.unwrap_or_else(|| first_appearance_order(&sentences));
    Corpus::new(sentences, vocabulary)
}

pub fn load_corpus(path: &Path) -> Result<Corpus> {
    let text = fsutil::read_to_string(path)?;
    parse_corpus(&text, &path.display().to_string())
}

/// Serializes the corpus as JSONL, always with a vocabulary header so that
/// the canonical label order survives a round trip.
pub fn corpus_to_jsonl(corpus: &Corpus) -> Result<String> {
    let mut out = serde_json::to_string(&Header {
        label_vocabulary: corpus.label_vocabulary.clone(),
    })?;
    out.push('\n');
    for sentence in &corpus.sentences {
        out.push_str(&serde_json::to_string(sentence)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_corpus(corpus: &Corpus, path: &Path) -> Result<()> {
    fsutil::write_atomic(path, corpus_to_jsonl(corpus)?.as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub n_sentences: usize,
    pub n_event_sentences: usize,
    pub n_multievent_sentences: usize,
    pub event_fraction: f64,
    pub multievent_fraction_of_event: f64,
    pub multievent_fraction_of_corpus: f64,
    /// Sentences carrying each label, in canonical order.
    pub per_label_counts: IndexMap<String, usize>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn label_counts(corpus: &Corpus) -> IndexMap<String, usize> {
    let mut counts: IndexMap<String, usize> = corpus
        .label_vocabulary
        .iter()
        .map(|l| (l.clone(), 0))
        .collect();
    for label in corpus.sentences.iter().flat_map(|s| &s.labels) {
        counts[label.as_str()] += 1;
    }
    counts
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let n_sentences = corpus.len();
    let n_event_sentences = corpus.sentences.iter().filter(|s| s.is_event()).count();
    let n_multievent_sentences = corpus.sentences.iter().filter(|s| s.is_multievent()).count();
    CorpusStats {
        n_sentences,
        n_event_sentences,
        n_multievent_sentences,
        event_fraction: ratio(n_event_sentences, n_sentences),
        multievent_fraction_of_event: ratio(n_multievent_sentences, n_event_sentences),
        multievent_fraction_of_corpus: ratio(n_multievent_sentences, n_sentences),
        per_label_counts: label_counts(corpus),
    }
}

/// How multi-event sentences are collapsed for single-label experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelaxPolicy {
    /// Keep the label that comes first in the canonical order.
    #[default]
    FirstInCanonicalOrder,
    /// Keep the label with the fewest sentences in the input corpus.
    RarestLabel,
    /// Remove multi-event sentences.
    DropMultievent,
}

impl RelaxPolicy {
    pub fn name(self) -> &'static str {
        match self {
            RelaxPolicy::FirstInCanonicalOrder => "first-in-canonical-order",
            RelaxPolicy::RarestLabel => "rarest-label",
            RelaxPolicy::DropMultievent => "drop-multievent",
        }
    }
}

impl fmt::Display for RelaxPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RelaxPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first-in-canonical-order" | "first" => Ok(RelaxPolicy::FirstInCanonicalOrder),
            "rarest-label" | "rarest" => Ok(RelaxPolicy::RarestLabel),
            "drop-multievent" | "drop" => Ok(RelaxPolicy::DropMultievent),
            other => Err(Error::config("relax", format!("unknown policy {other:?}"))),
        }
    }
}

/// Reduces every sentence to at most one label.
pub fn relax_to_single_label(corpus: &Corpus, policy: RelaxPolicy) -> Corpus {
    let counts = label_counts(corpus);
    let sentences = corpus
        .sentences
        .iter()
        .filter_map(|s| {
            if !s.is_multievent() {
                return Some(s.clone());
            }
            let keep = match policy {
                RelaxPolicy::DropMultievent => return None,
                RelaxPolicy::FirstInCanonicalOrder => s.labels[0].clone(),
                // labels are in canonical order, so min_by_key's first-minimum
                // rule breaks ties canonically
                RelaxPolicy::RarestLabel => s
                    .labels
                    .iter()
                    .min_by_key(|l| counts[l.as_str()])
                    .cloned()
                    .expect("multi-event sentence has labels"),
            };
            Some(Sentence {
                labels: vec![keep],
                ..s.clone()
            })
        })
        .collect();
    Corpus {
        sentences,
        label_vocabulary: corpus.label_vocabulary.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Folds {
    pub folds: Vec<Fold>,
    /// False when some class had fewer than `k` members and the folds fell
    /// back to a plain shuffled split.
    pub stratified: bool,
}

/// Deals sentence indices into `k` folds, stratified by single-label class
/// (first canonical label, or no-event). Deterministic for a fixed seed.
pub fn stratified_folds(corpus: &Corpus, k: usize, seed: u64) -> Result<Folds> {
    if k < 2 {
        return Err(Error::config("folds", format!("need at least 2 folds, got {k}")));
    }
    let n = corpus.len();
    if n < k {
        return Err(Error::config(
            "folds",
            format!("{k} folds requested for {n} sentences"),
        ));
    }

    let order = corpus.class_order();
    let mut strata: IndexMap<&str, Vec<usize>> =
        order.iter().map(|c| (c.as_str(), Vec::new())).collect();
    for (i, s) in corpus.sentences.iter().enumerate() {
        strata[s.class_name()].push(i);
    }
    strata.retain(|_, members| !members.is_empty());
    let smallest = strata.values().map(Vec::len).min().unwrap_or(0);
    let stratified = smallest >= k;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups: Vec<Vec<usize>> = if stratified {
        strata.into_values().collect()
    } else {
        vec![(0..n).collect()]
    };

    let mut tests = vec![Vec::new(); k];
    let mut next = 0usize;
    for mut group in groups {
        group.shuffle(&mut rng);
        for idx in group {
            tests[next % k].push(idx);
            next += 1;
        }
    }

    let folds = tests
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            let mut in_test = vec![false; n];
            for &i in &test {
                in_test[i] = true;
            }
            let train = (0..n).filter(|&i| !in_test[i]).collect();
            Fold { train, test }
        })
        .collect();
    Ok(Folds { folds, stratified })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sentence(id: &str, labels: &[&str]) -> Sentence {
        Sentence {
            doc_id: "d1".into(),
            sentence_id: id.into(),
            source_id: "src".into(),
            date: Date::new(2003, 4, 0).unwrap(),
            tokens: vec!["tok".into()],
            labels: labels.iter().map(|s| s.to_string()).collect(),
            annotations: Annotations::new(),
        }
    }

    fn vocab(labels: &[&str]) -> Vec<String> {
        labels.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn date_round_trip_and_unknown_day() {
        let d: Date = "2003-04-00".parse().unwrap();
        assert_eq!(d, Date { year: 2003, month: 4, day: 0 });
        assert_eq!(d.to_string(), "2003-04-00");
        assert!("2003-13-01".parse::<Date>().is_err());
        assert!("2003-4-01".parse::<Date>().is_err());
        assert!("03-04-01".parse::<Date>().is_err());
    }

    #[test]
    fn minimal_file_parses() {
        let text = r#"{"doc_id":"d","sentence_id":"s1","source_id":"bbc","date":"2003-04-01","tokens":["x"],"labels":["Die"]}
{"doc_id":"d","sentence_id":"s2","source_id":"bbc","date":"2003-04-01","tokens":["y"],"labels":[]}
"#;
        let corpus = parse_corpus(text, "mem").unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.label_vocabulary(), &["Die".to_string()]);
    }

    #[test]
    fn duplicate_label_names_line() {
        let text = r#"{"doc_id":"d","sentence_id":"s1","source_id":"bbc","date":"2003-04-01","tokens":["x"],"labels":[]}
{"doc_id":"d","sentence_id":"s2","source_id":"bbc","date":"2003-04-01","tokens":["y"],"labels":["Die","Die"]}
"#;
        match parse_corpus(text, "mem").unwrap_err() {
            Error::Record { line, field, .. } => {
                assert_eq!(line, 2);
                assert_eq!(field, "labels");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn malformed_field_is_named() {
        let text = r#"{"doc_id":"d","sentence_id":"s1","source_id":"bbc","date":"2003-4-01","tokens":["x"],"labels":[]}"#;
        match parse_corpus(text, "mem").unwrap_err() {
            Error::Record { line, field, .. } => assert_eq!((line, field.as_str()), (1, "date")),
            other => panic!("unexpected error {other}"),
        }
        let text = r#"{"doc_id":"d","sentence_id":"s1","source_id":"bbc","date":"2003-04-01","labels":[]}"#;
        match parse_corpus(text, "mem").unwrap_err() {
            Error::Record { field, .. } => assert_eq!(field, "tokens"),
            other => panic!("unexpected error {other}"),
        }
        let text = r#"{"doc_id":"d","sentence_id":"s1","source_id":"bbc","date":"2003-04-01","tokens":[],"labels":[]}"#;
        match parse_corpus(text, "mem").unwrap_err() {
            Error::Record { field, .. } => assert_eq!(field, "tokens"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn header_declares_order_and_rejects_unknown_labels() {
        let text = r#"{"label_vocabulary":["Attack","Die"]}
{"doc_id":"d","sentence_id":"s1","source_id":"bbc","date":"2003-04-01","tokens":["x"],"labels":["Die","Attack"]}
"#;
        let corpus = parse_corpus(text, "mem").unwrap();
        assert_eq!(corpus.label_vocabulary(), &vocab(&["Attack", "Die"]));
        assert_eq!(corpus.sentences()[0].labels, vocab(&["Attack", "Die"]));

        let text = r#"{"label_vocabulary":["Attack"]}
{"doc_id":"d","sentence_id":"s1","source_id":"bbc","date":"2003-04-01","tokens":["x"],"labels":["Die"]}
"#;
        match parse_corpus(text, "mem").unwrap_err() {
            Error::Record { line, field, .. } => assert_eq!((line, field.as_str()), (2, "labels")),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn empty_file_is_rejected() {
        assert!(parse_corpus("", "mem").is_err());
        assert!(parse_corpus("{\"label_vocabulary\":[\"A\"]}\n", "mem").is_err());
    }

    #[test]
    fn reserved_no_event_label_is_rejected() {
        let s = sentence("s1", &["N"]);
        assert!(Corpus::from_sentences(vec![s]).is_err());
    }

    #[test]
    fn stats_on_three_sentences() {
        let corpus = Corpus::from_sentences(vec![
            sentence("s1", &[]),
            sentence("s2", &["A"]),
            sentence("s3", &["A", "B"]),
        ])
        .unwrap();
        let stats = corpus_stats(&corpus);
        assert_eq!(stats.n_sentences, 3);
        assert!((stats.event_fraction - 2.0 / 3.0).abs() < 1e-15);
        assert!((stats.multievent_fraction_of_event - 0.5).abs() < 1e-15);
        assert!((stats.multievent_fraction_of_corpus - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(stats.per_label_counts["A"], 2);
        assert_eq!(stats.per_label_counts["B"], 1);
    }

    #[test]
    fn stats_reproduce_corpus_fractions() {
        // 16 event sentences in 100; build 2.5% multi-event as 5 in 200.
        let mut sentences: Vec<Sentence> = (0..100)
            .map(|i| {
                let labels: &[&str] = if i < 16 { &["Die"] } else { &[] };
                sentence(&format!("s{i}"), labels)
            })
            .collect();
        let stats = corpus_stats(&Corpus::from_sentences(sentences.clone()).unwrap());
        assert!((stats.event_fraction - 0.16).abs() < 1e-12);

        sentences.extend((100..200).map(|i| sentence(&format!("s{i}"), &[])));
        for s in sentences.iter_mut().take(5) {
            s.labels = vocab(&["Die", "Attack"]);
        }
        let stats = corpus_stats(&Corpus::from_sentences(sentences).unwrap());
        assert!((stats.multievent_fraction_of_corpus - 0.025).abs() < 1e-12);
    }

    #[test]
    fn no_event_corpus_has_zero_multievent_ratio() {
        let corpus = Corpus::from_sentences(vec![sentence("s1", &[])]).unwrap();
        let stats = corpus_stats(&corpus);
        assert_eq!(stats.multievent_fraction_of_event, 0.0);
    }

    #[test]
    fn relax_policies() {
        let corpus = Corpus::new(
            vec![sentence("s1", &["Attack", "Die"]), sentence("s2", &[])],
            vocab(&["Die", "Attack"]),
        )
        .unwrap();
        let first = relax_to_single_label(&corpus, RelaxPolicy::FirstInCanonicalOrder);
        assert_eq!(first.sentences()[0].labels, vocab(&["Die"]));
        assert_eq!(first.sentences()[1].labels, Vec::<String>::new());

        let dropped = relax_to_single_label(&corpus, RelaxPolicy::DropMultievent);
        assert_eq!(dropped.len(), 1);
        assert_eq!(dropped.sentences()[0].sentence_id, "s2");
    }

    #[test]
    fn relax_rarest_uses_input_counts() {
        let mut sentences: Vec<Sentence> =
            (0..49).map(|i| sentence(&format!("d{i}"), &["Die"])).collect();
        sentences.extend((0..4).map(|i| sentence(&format!("i{i}"), &["Injure"])));
        sentences.push(sentence("both", &["Die", "Injure"]));
        let corpus = Corpus::from_sentences(sentences).unwrap();
        let counts = label_counts(&corpus);
        assert_eq!((counts["Die"], counts["Injure"]), (50, 5));
        let relaxed = relax_to_single_label(&corpus, RelaxPolicy::RarestLabel);
        let both = relaxed
            .sentences()
            .iter()
            .find(|s| s.sentence_id == "both")
            .unwrap();
        assert_eq!(both.labels, vocab(&["Injure"]));
    }

    #[test]
    fn relax_rarest_breaks_ties_canonically() {
        let corpus = Corpus::new(
            vec![sentence("s1", &["B", "A"])],
            vocab(&["B", "A"]),
        )
        .unwrap();
        let relaxed = relax_to_single_label(&corpus, RelaxPolicy::RarestLabel);
        assert_eq!(relaxed.sentences()[0].labels, vocab(&["B"]));
    }

    #[test]
    fn folds_exact_divisibility() {
        let sentences: Vec<Sentence> = (0..10)
            .map(|i| sentence(&format!("s{i}"), if i % 2 == 0 { &["A"] } else { &[] }))
            .collect();
        let corpus = Corpus::from_sentences(sentences).unwrap();
        let folds = stratified_folds(&corpus, 5, 7).unwrap();
        assert!(folds.stratified);
        for fold in &folds.folds {
            assert_eq!(fold.test.len(), 2);
            let a = fold.test.iter().filter(|&&i| i % 2 == 0).count();
            assert_eq!(a, 1);
            assert_eq!(fold.train.len(), 8);
        }
        assert_eq!(folds, stratified_folds(&corpus, 5, 7).unwrap());
    }

    #[test]
    fn folds_degrade_when_a_class_is_too_small() {
        let mut sentences: Vec<Sentence> =
            (0..9).map(|i| sentence(&format!("s{i}"), &[])).collect();
        sentences.push(sentence("rare", &["A"]));
        let corpus = Corpus::from_sentences(sentences).unwrap();
        let folds = stratified_folds(&corpus, 3, 1).unwrap();
        assert!(!folds.stratified);
        let mut all: Vec<usize> = folds.folds.iter().flat_map(|f| f.test.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn folds_reject_bad_k() {
        let corpus = Corpus::from_sentences(vec![sentence("a", &[]), sentence("b", &[])]).unwrap();
        assert!(stratified_folds(&corpus, 1, 0).is_err());
        assert!(stratified_folds(&corpus, 3, 0).is_err());
    }
}
