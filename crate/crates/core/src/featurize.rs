//! Sentence featurization.
//!
//! Features are counts keyed by namespaced names (`V:attack`,
//! `K:suicide bombing`, `SENT:neg`, `DOM:src:bbc`, ...). A [`Vectorizer`]
//! fitted on training features assigns columns and drops features that
//! carry no information.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;
use crate::error::{Error, Result};
use crate::sparse::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureGroup {
    /// Key phrases, verbs, entities, modals and negation terms.
    BaseLexical,
    /// Source id plus publication year and month.
    DomainId,
    Sentiment,
    Rhetorical,
    /// Precomputed annotation counts (dependency-parse features).
    DepParse,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 5] = [
        FeatureGroup::BaseLexical,
        FeatureGroup::DomainId,
        FeatureGroup::Sentiment,
        FeatureGroup::Rhetorical,
        FeatureGroup::DepParse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureGroup::BaseLexical => "base-lexical",
            FeatureGroup::DomainId => "domain-id",
            FeatureGroup::Sentiment => "sentiment",
            FeatureGroup::Rhetorical => "rhetorical",
            FeatureGroup::DepParse => "dep-parse",
        }
    }

    pub fn all() -> BTreeSet<FeatureGroup> {
        Self::ALL.into_iter().collect()
    }

    /// Group owning a namespaced feature name, if the prefix is known.
    pub fn of_feature(name: &str) -> Option<FeatureGroup> {
        let prefix = name.split(':').next()?;
        match prefix {
            "K" | "V" | "E" | "M" | "NEG" => Some(FeatureGroup::BaseLexical),
            "DOM" => Some(FeatureGroup::DomainId),
            "SENT" => Some(FeatureGroup::Sentiment),
            "RHET" => Some(FeatureGroup::Rhetorical),
            "ANN" => Some(FeatureGroup::DepParse),
            _ => None,
        }
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureGroup::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::config("groups", format!("unknown feature group {s:?}")))
    }
}

/// Parses a comma-separated list of group names; `all` selects every group.
pub fn parse_groups(spec: &str) -> Result<BTreeSet<FeatureGroup>> {
    let spec = spec.trim();
    if spec == "all" {
        return Ok(FeatureGroup::all());
    }
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

pub fn groups_to_string(groups: &BTreeSet<FeatureGroup>) -> String {
    groups.iter().map(|g| g.name()).collect::<Vec<_>>().join(",")
}

/// Multi-token entries with their values, matched longest-first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhraseTable<V> {
    entries: BTreeMap<Vec<String>, V>,
    max_len: usize,
}

impl<V> PhraseTable<V> {
    pub fn new() -> Self {
        PhraseTable {
            entries: BTreeMap::new(),
            max_len: 0,
        }
    }

    pub fn insert(&mut self, phrase: Vec<String>, value: V) {
        if phrase.is_empty() {
            return;
        }
        self.max_len = self.max_len.max(phrase.len());
        self.entries.insert(phrase, value);
    }

    pub fn contains(&self, phrase: &[String]) -> bool {
        self.entries.contains_key(phrase)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<String>, &V)> {
        self.entries.iter()
    }

    /// Greedy left-to-right scan taking the longest entry at each position;
    /// matched tokens are consumed.
    pub fn scan<'a>(&'a self, tokens: &[String]) -> Vec<(&'a Vec<String>, &'a V)> {
        let mut found = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let longest = (1..=self.max_len.min(tokens.len() - i))
                .rev()
                .find_map(|len| self.entries.get_key_value(&tokens[i..i + len]));
            match longest {
                Some((phrase, value)) => {
                    found.push((phrase, value));
                    i += phrase.len();
                }
                None => i += 1,
            }
        }
        found
    }
}

impl<V: Serialize> Serialize for PhraseTable<V> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_map(self.entries.iter().map(|(k, v)| (k.join(" "), v)))
    }
}

impl<'de, V: Deserialize<'de>> Deserialize<'de> for PhraseTable<V> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let map = BTreeMap::<String, V>::deserialize(d)?;
        let mut table = PhraseTable::new();
        for (k, v) in map {
            table.insert(split_entry(&k), v);
        }
        Ok(table)
    }
}

pub type PhraseSet = PhraseTable<()>;

impl PhraseSet {
    pub fn from_phrases<I, S>(phrases: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = PhraseSet::new();
        for p in phrases {
            set.insert(split_entry(p.as_ref()), ());
        }
        set
    }
}

fn split_entry(entry: &str) -> Vec<String> {
    entry.split_whitespace().map(str::to_lowercase).collect()
}

/// The lexical resources consumed by featurization. All entries are
/// lowercase.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LexiconSet {
    pub keyphrases: PhraseSet,
    pub verbs: BTreeSet<String>,
    pub entities: PhraseSet,
    pub modals: BTreeSet<String>,
    pub negations: BTreeSet<String>,
    pub synonym_expansions: BTreeMap<String, BTreeSet<String>>,
    /// Strength in `[-5, -1] ∪ [1, 5]`.
    pub sentiment_lexicon: BTreeMap<String, i8>,
    pub rhetorical_cues: PhraseTable<String>,
}

impl LexiconSet {
    /// Adds the synonyms of every key phrase and verb to its own list. The
    /// expansion is one hop; multi-token synonyms are only added to the key
    /// phrases.
    pub fn expand_synonyms(&mut self) {
        let mut new_verbs = Vec::new();
        for verb in &self.verbs {
            if let Some(syns) = self.synonym_expansions.get(verb) {
                new_verbs.extend(syns.iter().filter(|s| !s.contains(' ')).cloned());
            }
        }
        self.verbs.extend(new_verbs);

        let mut new_phrases = Vec::new();
        for (phrase, _) in self.keyphrases.iter() {
            if let Some(syns) = self.synonym_expansions.get(&phrase.join(" ")) {
                new_phrases.extend(syns.iter().map(|s| split_entry(s)));
            }
        }
        for phrase in new_phrases {
            self.keyphrases.insert(phrase, ());
        }
    }

    /// Stable digest of the resources, stored with trained models.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_vec(self).expect("lexicons serialize");
        let digest = Sha256::digest(&json);
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

struct ResourceLine {
    number: usize,
    text: String,
}

fn read_resource(dir: &Path, name: &str) -> Result<Option<(String, Vec<ResourceLine>)>> {
    let path = dir.join(name);
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, l)| ResourceLine {
            number: i + 1,
            text: l.trim().to_string(),
        })
        .collect();
    Ok(Some((path.display().to_string(), lines)))
}

fn resource_error(file: &str, line: usize, field: &str, message: impl Into<String>) -> Error {
    Error::Record {
        file: file.to_string(),
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

fn load_phrases(dir: &Path, name: &str) -> Result<PhraseSet> {
    let mut set = PhraseSet::new();
    if let Some((_, lines)) = read_resource(dir, name)? {
        for line in lines {
            set.insert(split_entry(&line.text), ());
        }
    }
    Ok(set)
}

fn load_tokens(dir: &Path, name: &str) -> Result<BTreeSet<String>> {
    let mut set = BTreeSet::new();
    if let Some((file, lines)) = read_resource(dir, name)? {
        for line in lines {
            let tokens = split_entry(&line.text);
            if tokens.len() != 1 {
                return Err(resource_error(&file, line.number, "entry", "expected a single token"));
            }
            set.extend(tokens);
        }
    }
    Ok(set)
}

fn split_tab<'a>(file: &str, line: &'a ResourceLine) -> Result<(&'a str, &'a str)> {
    line.text
        .split_once('\t')
        .map(|(a, b)| (a.trim(), b.trim()))
        .ok_or_else(|| resource_error(file, line.number, "line", "expected two TAB-separated columns"))
}

/// Loads the resource directory. Missing files yield empty lists.
pub fn load_lexicons(dir: &Path) -> Result<LexiconSet> {
    if !dir.is_dir() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "lexicon directory not found"),
        ));
    }
    let mut lexicons = LexiconSet {
        keyphrases: load_phrases(dir, "keyphrases.txt")?,
        verbs: load_tokens(dir, "verbs.txt")?,
        entities: load_phrases(dir, "entities.txt")?,
        modals: load_tokens(dir, "modals.txt")?,
        negations: load_tokens(dir, "negations.txt")?,
        ..LexiconSet::default()
    };

    if let Some((file, lines)) = read_resource(dir, "synonyms.tsv")? {
        for line in &lines {
            let (term, syns) = split_tab(&file, line)?;
            let entry = lexicons
                .synonym_expansions
                .entry(split_entry(term).join(" "))
                .or_default();
            entry.extend(
                syns.split(',')
                    .map(|s| split_entry(s).join(" "))
                    .filter(|s| !s.is_empty()),
            );
        }
    }

    if let Some((file, lines)) = read_resource(dir, "sentiment.tsv")? {
        for line in &lines {
            let (term, strength) = split_tab(&file, line)?;
            let tokens = split_entry(term);
            if tokens.len() != 1 {
                return Err(resource_error(&file, line.number, "term", "expected a single token"));
            }
            let strength: i8 = strength.parse().map_err(|_| {
                resource_error(&file, line.number, "strength", format!("not an integer: {strength:?}"))
            })?;
            if strength == 0 || strength.unsigned_abs() > 5 {
                return Err(resource_error(
                    &file,
                    line.number,
                    "strength",
                    format!("{strength} outside [-5,-1] ∪ [1,5]"),
                ));
            }
            lexicons
                .sentiment_lexicon
                .insert(tokens.into_iter().next().unwrap(), strength);
        }
    }

    if let Some((file, lines)) = read_resource(dir, "rhetorical.tsv")? {
        for line in &lines {
            let (cue, category) = split_tab(&file, line)?;
            if category.is_empty() {
                return Err(resource_error(&file, line.number, "category", "empty category"));
            }
            lexicons
                .rhetorical_cues
                .insert(split_entry(cue), category.to_string());
        }
    }

    lexicons.expand_synonyms();
    Ok(lexicons)
}

/// Named feature values of one sentence. Absent names are zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawFeatures {
    pub counts: BTreeMap<String, f64>,
}

impl RawFeatures {
    pub fn get(&self, name: &str) -> f64 {
        self.counts.get(name).copied().unwrap_or(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    fn add(&mut self, name: String, value: f64) {
        if value != 0.0 {
            *self.counts.entry(name).or_insert(0.0) += value;
        }
    }
}

fn lowercase_tokens(tokens: &[String]) -> Vec<String> {
    tokens.iter().map(|t| t.to_lowercase()).collect()
}

/// Maximum positive and maximum negative (as magnitude) sentiment strength
/// over the matched terms. A negation term in the two preceding tokens flips
/// a term's polarity.
pub fn sentiment_scores(tokens: &[String], lexicons: &LexiconSet) -> (u8, u8) {
    let tokens = lowercase_tokens(tokens);
    let mut pos = 0u8;
    let mut neg = 0u8;
    for (i, token) in tokens.iter().enumerate() {
        let Some(&strength) = lexicons.sentiment_lexicon.get(token) else {
            continue;
        };
        let negated = tokens[i.saturating_sub(2)..i]
            .iter()
            .any(|t| lexicons.negations.contains(t));
        let strength = if negated { -strength } else { strength };
        if strength > 0 {
            pos = pos.max(strength as u8);
        } else {
            neg = neg.max(strength.unsigned_abs());
        }
    }
    (pos, neg)
}

pub fn extract_features(
    sentence: &Sentence,
    lexicons: &LexiconSet,
    enabled: &BTreeSet<FeatureGroup>,
) -> RawFeatures {
    let mut features = RawFeatures::default();
    let tokens = lowercase_tokens(&sentence.tokens);

    if enabled.contains(&FeatureGroup::BaseLexical) {
        for (phrase, _) in lexicons.keyphrases.scan(&tokens) {
            features.add(format!("K:{}", phrase.join(" ")), 1.0);
        }
        for (phrase, _) in lexicons.entities.scan(&tokens) {
            features.add(format!("E:{}", phrase.join(" ")), 1.0);
        }
        for token in &tokens {
            if lexicons.verbs.contains(token) {
                features.add(format!("V:{token}"), 1.0);
            }
            if lexicons.modals.contains(token) {
                features.add(format!("M:{token}"), 1.0);
            }
            if lexicons.negations.contains(token) {
                features.add(format!("NEG:{token}"), 1.0);
            }
        }
    }

    if enabled.contains(&FeatureGroup::Sentiment) {
        let (pos, neg) = sentiment_scores(&tokens, lexicons);
        features.add("SENT:pos".into(), pos as f64);
        features.add("SENT:neg".into(), neg as f64);
    }

    if enabled.contains(&FeatureGroup::Rhetorical) {
        for (_, category) in lexicons.rhetorical_cues.scan(&tokens) {
            features.add(format!("RHET:{category}"), 1.0);
        }
    }

    if enabled.contains(&FeatureGroup::DomainId) {
        features.add(format!("DOM:src:{}", sentence.source_id), 1.0);
        features.add(format!("DOM:year:{:04}", sentence.date.year), 1.0);
        features.add(format!("DOM:month:{:02}", sentence.date.month), 1.0);
    }

    if enabled.contains(&FeatureGroup::DepParse) {
        for (group, terms) in &sentence.annotations {
            for (term, &count) in terms {
                features.add(format!("ANN:{group}:{term}"), count as f64);
            }
        }
    }

    features
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PruneMode {
    /// Drop features whose value is the same on every training instance.
    #[default]
    ZeroVariance,
    /// Additionally drop features whose per-class mean is the same for
    /// every class.
    ClassConstant,
}

impl PruneMode {
    pub fn name(self) -> &'static str {
        match self {
            PruneMode::ZeroVariance => "zero-variance",
            PruneMode::ClassConstant => "class-constant",
        }
    }
}

impl fmt::Display for PruneMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PruneMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero-variance" => Ok(PruneMode::ZeroVariance),
            "class-constant" => Ok(PruneMode::ClassConstant),
            other => Err(Error::config("prune", format!("unknown prune mode {other:?}"))),
        }
    }
}

const CLASS_MEAN_TOLERANCE: f64 = 1e-9;

/// Column assignment for retained features. Immutable once fitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vectorizer {
    index_of: BTreeMap<String, usize>,
    n_columns: usize,
    pruned: BTreeSet<String>,
    group_of: BTreeMap<String, FeatureGroup>,
}

impl Vectorizer {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index_of.get(name).copied()
    }

    pub fn n_columns(&self) -> usize {
        self.n_columns
    }

    pub fn pruned(&self) -> &BTreeSet<String> {
        &self.pruned
    }

    pub fn group_of(&self, name: &str) -> Option<FeatureGroup> {
        self.group_of.get(name).copied()
    }

    /// Retained feature names in column order.
    pub fn columns(&self) -> Vec<&str> {
        let mut columns = vec![""; self.n_columns];
        for (name, &i) in &self.index_of {
            columns[i] = name;
        }
        columns
    }

    /// Share of observed features removed by pruning.
    pub fn pruned_fraction(&self) -> f64 {
        let observed = self.pruned.len() + self.n_columns;
        if observed == 0 {
            0.0
        } else {
            self.pruned.len() as f64 / observed as f64
        }
    }
}

/// Fits the column vocabulary. Columns follow lexicographic feature-name
/// order.
pub fn fit_vectorizer<S: AsRef<str>>(
    features: &[RawFeatures],
    class_of: &[S],
    mode: PruneMode,
) -> Result<Vectorizer> {
    if features.is_empty() {
        return Err(Error::invalid("cannot fit a vectorizer on zero instances"));
    }
    if features.len() != class_of.len() {
        return Err(Error::invalid(format!(
            "{} feature rows but {} class names",
            features.len(),
            class_of.len()
        )));
    }
    let n = features.len();

    let mut class_sizes: BTreeMap<&str, usize> = BTreeMap::new();
    for c in class_of {
        *class_sizes.entry(c.as_ref()).or_default() += 1;
    }

    struct Stats<'a> {
        present: usize,
        first: f64,
        all_equal: bool,
        class_sums: BTreeMap<&'a str, f64>,
    }
    let mut stats: BTreeMap<&str, Stats> = BTreeMap::new();
    for (row, class) in features.iter().zip(class_of) {
        for (name, &value) in &row.counts {
            if value == 0.0 {
                continue;
            }
            let s = stats.entry(name.as_str()).or_insert(Stats {
                present: 0,
                first: value,
                all_equal: true,
                class_sums: BTreeMap::new(),
            });
            s.present += 1;
            s.all_equal &= value == s.first;
            *s.class_sums.entry(class.as_ref()).or_default() += value;
        }
    }

    let mut index_of = BTreeMap::new();
    let mut pruned = BTreeSet::new();
    let mut group_of = BTreeMap::new();
    for (name, s) in stats {
        let zero_variance = s.present == n && s.all_equal;
        let prune = zero_variance
            || (mode == PruneMode::ClassConstant && {
                let means: Vec<f64> = class_sizes
                    .iter()
                    .map(|(c, &size)| s.class_sums.get(c).copied().unwrap_or(0.0) / size as f64)
                    .collect();
                means
                    .iter()
                    .all(|m| (m - means[0]).abs() <= CLASS_MEAN_TOLERANCE)
            });
        if let Some(group) = FeatureGroup::of_feature(name) {
            group_of.insert(name.to_string(), group);
        }
        if prune {
            pruned.insert(name.to_string());
        } else {
            let next = index_of.len();
            index_of.insert(name.to_string(), next);
        }
    }
    let n_columns = index_of.len();
    Ok(Vectorizer {
        index_of,
        n_columns,
        pruned,
        group_of,
    })
}

pub fn vectorize(features: &RawFeatures, vectorizer: &Vectorizer) -> SparseVector {
    let pairs = features
        .counts
        .iter()
        .filter_map(|(name, &v)| vectorizer.index_of(name).map(|i| (i, v)));
    SparseVector::from_pairs(vectorizer.n_columns, pairs).expect("indices come from the vectorizer")
}
