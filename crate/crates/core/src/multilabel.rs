//! Binary relevance, classifier chains and ensembles of classifier chains.
//!
//! Label sets are `Vec<String>` in canonical vocabulary order; an empty set
//! means no event. Chains are trained with the gold values of earlier labels
//! as augmentation features and predict with their own earlier outputs.

use indexmap::IndexMap;
use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::{train_binary, uniform_weights, LinearHyper, LinearModel};
use crate::sparse::SparseVector;

fn check_training_data(
    xs: &[SparseVector],
    label_sets: &[Vec<String>],
    vocabulary: &[String],
) -> Result<()> {
    if vocabulary.is_empty() {
        return Err(Error::invalid("label vocabulary is empty"));
    }
    if xs.len() != label_sets.len() {
        return Err(Error::invalid(format!(
            "{} vectors but {} label sets",
            xs.len(),
            label_sets.len()
        )));
    }
    if let Some(unknown) = label_sets
        .iter()
        .flatten()
        .find(|l| !vocabulary.contains(l))
    {
        return Err(Error::invalid(format!("label {unknown:?} is not in the vocabulary")));
    }
    Ok(())
}

fn targets(label_sets: &[Vec<String>], label: &str) -> Vec<i8> {
    label_sets
        .iter()
        .map(|set| if set.iter().any(|l| l == label) { 1 } else { -1 })
        .collect()
}

fn indicator(set: &[String], label: &str) -> f64 {
    if set.iter().any(|l| l == label) {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BRModel {
    per_label: IndexMap<String, LinearModel>,
}

impl BRModel {
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.per_label.keys().map(String::as_str)
    }

    pub fn model_for(&self, label: &str) -> Option<&LinearModel> {
        self.per_label.get(label)
    }

    pub fn predict(&self, x: &SparseVector) -> Result<Vec<String>> {
        let mut out = Vec::new();
        for (label, model) in &self.per_label {
            if model.predict(x)? > 0 {
                out.push(label.clone());
            }
        }
        Ok(out)
    }
}

pub fn train_br(
    xs: &[SparseVector],
    label_sets: &[Vec<String>],
    vocabulary: &[String],
    hyper: &LinearHyper,
) -> Result<BRModel> {
    check_training_data(xs, label_sets, vocabulary)?;
    let weights = uniform_weights(xs.len());
    let models = vocabulary
        .par_iter()
        .map(|label| train_binary(xs, &targets(label_sets, label), &weights, hyper))
        .collect::<Result<Vec<_>>>()?;
    Ok(BRModel {
        per_label: vocabulary.iter().cloned().zip(models).collect(),
    })
}

pub fn predict_br(model: &BRModel, x: &SparseVector) -> Result<Vec<String>> {
    model.predict(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainModel {
    /// Canonical label order, used for output sets.
    labels: Vec<String>,
    order: Vec<String>,
    #[serde(rename = "models")]
    links: Vec<LinearModel>,
}

impl ChainModel {
    pub fn from_parts(labels: Vec<String>, order: Vec<String>, links: Vec<LinearModel>) -> Result<Self> {
        check_permutation(&order, &labels)?;
        if links.len() != order.len() {
            return Err(Error::invalid("one link model per label is required"));
        }
        let base = links[0].dimension();
        for (j, link) in links.iter().enumerate() {
            if link.dimension() != base + j {
                return Err(Error::DimensionMismatch {
                    expected: base + j,
                    found: link.dimension(),
                });
            }
        }
        Ok(ChainModel { labels, order, links })
    }

    pub fn order(&self) -> &[String] {
        &self.order
    }

    pub fn links(&self) -> &[LinearModel] {
        &self.links
    }

    pub fn base_dimension(&self) -> usize {
        self.links[0].dimension()
    }

    /// Per-link 0/1 outputs in chain order.
    pub fn chain_outputs(&self, x: &SparseVector) -> Result<Vec<f64>> {
        if x.dimension() != self.base_dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.base_dimension(),
                found: x.dimension(),
            });
        }
        let mut outputs = Vec::with_capacity(self.links.len());
        for link in &self.links {
            let y = link.predict(&x.extended(&outputs))?;
            outputs.push(if y > 0 { 1.0 } else { 0.0 });
        }
        Ok(outputs)
    }

    pub fn predict(&self, x: &SparseVector) -> Result<Vec<String>> {
        let outputs = self.chain_outputs(x)?;
        Ok(self
            .labels
            .iter()
            .filter(|label| {
                let j = self.order.iter().position(|o| o == *label).expect("permutation");
                outputs[j] > 0.0
            })
            .cloned()
            .collect())
    }
}

fn check_permutation(order: &[String], vocabulary: &[String]) -> Result<()> {
    let mut a: Vec<&String> = order.iter().collect();
    let mut b: Vec<&String> = vocabulary.iter().collect();
    a.sort();
    b.sort();
    if a != b || vocabulary.is_empty() {
        return Err(Error::invalid(format!(
            "chain order {order:?} is not a permutation of {vocabulary:?}"
        )));
    }
    Ok(())
}

pub fn train_cc(
    xs: &[SparseVector],
    label_sets: &[Vec<String>],
    vocabulary: &[String],
    order: &[String],
    hyper: &LinearHyper,
) -> Result<ChainModel> {
    check_training_data(xs, label_sets, vocabulary)?;
    check_permutation(order, vocabulary)?;
    let weights = uniform_weights(xs.len());
    let mut links = Vec::with_capacity(order.len());
    for (j, label) in order.iter().enumerate() {
        let augmented: Vec<SparseVector> = xs
            .iter()
            .zip(label_sets)
            .map(|(x, set)| {
                let gold: Vec<f64> = order[..j].iter().map(|prev| indicator(set, prev)).collect();
                x.extended(&gold)
            })
            .collect();
        links.push(train_binary(&augmented, &targets(label_sets, label), &weights, hyper)?);
    }
    ChainModel::from_parts(vocabulary.to_vec(), order.to_vec(), links)
}

pub fn predict_cc(model: &ChainModel, x: &SparseVector) -> Result<Vec<String>> {
    model.predict(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainOrderPolicy {
    /// Each chain draws its own random permutation.
    #[default]
    Random,
    /// Every chain uses the canonical vocabulary order.
    Canonical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EccParams {
    pub m: usize,
    pub seed: u64,
    pub sample_fraction: f64,
    pub vote_threshold: f64,
    pub order_policy: ChainOrderPolicy,
}

impl Default for EccParams {
    fn default() -> Self {
        EccParams {
            m: 10,
            seed: 0,
            sample_fraction: 0.67,
            vote_threshold: 0.5,
            order_policy: ChainOrderPolicy::Random,
        }
    }
}

impl EccParams {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::config("ecc_m", "ensemble needs at least one chain"));
        }
        if !(self.sample_fraction > 0.0 && self.sample_fraction <= 1.0) {
            return Err(Error::config(
                "ecc_fraction",
                format!("{} outside (0, 1]", self.sample_fraction),
            ));
        }
        if !(self.vote_threshold > 0.0 && self.vote_threshold <= 1.0) {
            return Err(Error::config(
                "ecc_threshold",
                format!("{} outside (0, 1]", self.vote_threshold),
            ));
        }
        Ok(())
    }

    /// `⌈fraction · n⌉`, tolerant of rounding in the product.
    pub fn sample_size(&self, n: usize) -> usize {
        ((self.sample_fraction * n as f64) - 1e-9).ceil().max(0.0) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    seed: u64,
    sample_fraction: f64,
    vote_threshold: f64,
    labels: Vec<String>,
    chains: Vec<ChainModel>,
}

impl EnsembleModel {
    pub fn from_chains(chains: Vec<ChainModel>, params: &EccParams) -> Result<Self> {
        params.validate()?;
        let first = chains
            .first()
            .ok_or_else(|| Error::invalid("an ensemble needs at least one chain"))?;
        for chain in &chains {
            if chain.labels != first.labels || chain.base_dimension() != first.base_dimension() {
                return Err(Error::invalid("chains must share labels and base dimension"));
            }
        }
        Ok(EnsembleModel {
            seed: params.seed,
            sample_fraction: params.sample_fraction,
            vote_threshold: params.vote_threshold,
            labels: first.labels.clone(),
            chains,
        })
    }

    pub fn chains(&self) -> &[ChainModel] {
        &self.chains
    }

    pub fn vote_threshold(&self) -> f64 {
        self.vote_threshold
    }

    pub fn with_vote_threshold(&self, vote_threshold: f64) -> Result<Self> {
        if !(vote_threshold > 0.0 && vote_threshold <= 1.0) {
            return Err(Error::config("ecc_threshold", format!("{vote_threshold} outside (0, 1]")));
        }
        Ok(EnsembleModel {
            vote_threshold,
            ..self.clone()
        })
    }

    /// Number of chains predicting each label, in canonical order.
    pub fn vote_counts(&self, x: &SparseVector) -> Result<Vec<usize>> {
        let mut counts = vec![0usize; self.labels.len()];
        for chain in &self.chains {
            for label in chain.predict(x)? {
                let i = self.labels.iter().position(|l| *l == label).expect("shared labels");
                counts[i] += 1;
            }
        }
        Ok(counts)
    }

    pub fn predict(&self, x: &SparseVector) -> Result<Vec<String>> {
        let m = self.chains.len() as f64;
        Ok(self
            .vote_counts(x)?
            .into_iter()
            .zip(&self.labels)
            .filter(|(count, _)| *count as f64 / m >= self.vote_threshold)
            .map(|(_, label)| label.clone())
            .collect())
    }
}

pub fn train_ecc(
    xs: &[SparseVector],
    label_sets: &[Vec<String>],
    vocabulary: &[String],
    params: &EccParams,
    hyper: &LinearHyper,
) -> Result<EnsembleModel> {
    params.validate()?;
    check_training_data(xs, label_sets, vocabulary)?;
    let n = xs.len();
    let size = params.sample_size(n);
    if size < 2 {
        return Err(Error::invalid(format!(
            "ensemble subsample of {size} instances is too small"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let plans: Vec<(Vec<String>, Vec<usize>)> = (0..params.m)
        .map(|_| {
            let mut order = vocabulary.to_vec();
            if params.order_policy == ChainOrderPolicy::Random {
                order.shuffle(&mut rng);
            }
            let mut rows = if size == n {
                (0..n).collect()
            } else {
                index::sample(&mut rng, n, size).into_vec()
            };
            rows.sort_unstable();
            (order, rows)
        })
        .collect();

    let chains = plans
        .into_par_iter()
        .map(|(order, rows)| {
            let sub_x: Vec<SparseVector> = rows.iter().map(|&i| xs[i].clone()).collect();
            let sub_y: Vec<Vec<String>> = rows.iter().map(|&i| label_sets[i].clone()).collect();
            train_cc(&sub_x, &sub_y, vocabulary, &order, hyper)
        })
        .collect::<Result<Vec<_>>>()?;
    EnsembleModel::from_chains(chains, params)
}

pub fn predict_ecc(model: &EnsembleModel, x: &SparseVector) -> Result<Vec<String>> {
    model.predict(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(values: &[f64]) -> SparseVector {
        SparseVector::from_dense(values)
    }

    fn set(labels: &[&str]) -> Vec<String> {
        labels.iter().map(|s| s.to_string()).collect()
    }

    fn two_label_data() -> (Vec<SparseVector>, Vec<Vec<String>>) {
        // feature 0 drives A, feature 1 drives B
        let xs = vec![
            v(&[1.0, 0.0]),
            v(&[0.0, 1.0]),
            v(&[1.0, 1.0]),
            v(&[0.0, 0.0]),
            v(&[2.0, 0.0]),
            v(&[0.0, 2.0]),
        ];
        let ys = vec![set(&["A"]), set(&["B"]), set(&["A", "B"]), set(&[]), set(&["A"]), set(&["B"])];
        (xs, ys)
    }

    #[test]
    fn br_learns_independent_labels() {
        let (xs, ys) = two_label_data();
        let model = train_br(&xs, &ys, &set(&["A", "B"]), &LinearHyper::default()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert_eq!(&model.predict(x).unwrap(), y);
        }
    }

    #[test]
    fn br_never_positive_label_is_degenerate() {
        let (xs, ys) = two_label_data();
        let model = train_br(&xs, &ys, &set(&["A", "B", "C"]), &LinearHyper::default()).unwrap();
        let c = model.model_for("C").unwrap();
        assert!(c.is_degenerate());
        assert_eq!(c.predict(&xs[0]).unwrap(), -1);
    }

    #[test]
    fn br_output_extremes() {
        let h = LinearHyper::default();
        let neg = LinearModel::from_parts(vec![0.0], -1.0, h).unwrap();
        let pos = LinearModel::from_parts(vec![0.0], 1.0, h).unwrap();
        let all_neg = BRModel {
            per_label: [("A".to_string(), neg.clone()), ("B".to_string(), neg)].into_iter().collect(),
        };
        assert!(all_neg.predict(&v(&[3.0])).unwrap().is_empty());
        let all_pos = BRModel {
            per_label: [("A".to_string(), pos.clone()), ("B".to_string(), pos)].into_iter().collect(),
        };
        assert_eq!(all_pos.predict(&v(&[3.0])).unwrap(), set(&["A", "B"]));
    }

    #[test]
    fn unknown_labels_are_rejected() {
        let (xs, ys) = two_label_data();
        assert!(train_br(&xs, &ys, &set(&["A"]), &LinearHyper::default()).is_err());
        assert!(train_br(&xs, &ys, &[], &LinearHyper::default()).is_err());
    }

    #[test]
    fn cc_order_must_be_a_permutation() {
        let (xs, ys) = two_label_data();
        let h = LinearHyper::default();
        assert!(train_cc(&xs, &ys, &set(&["A", "B"]), &set(&["A"]), &h).is_err());
        assert!(train_cc(&xs, &ys, &set(&["A", "B"]), &set(&["A", "A"]), &h).is_err());
    }

    #[test]
    fn cc_link_dimensions_grow() {
        let (xs, ys) = two_label_data();
        let model = train_cc(&xs, &ys, &set(&["A", "B"]), &set(&["B", "A"]), &LinearHyper::default()).unwrap();
        assert_eq!(model.links()[0].dimension(), 2);
        assert_eq!(model.links()[1].dimension(), 3);
        // output is in canonical order regardless of the chain order
        assert_eq!(model.predict(&xs[2]).unwrap(), set(&["A", "B"]));
    }

    #[test]
    fn copy_link_propagates() {
        let h = LinearHyper::default();
        let a = LinearModel::from_parts(vec![1.0], -0.5, h).unwrap();
        let b = LinearModel::from_parts(vec![0.0, 1.0], -0.5, h).unwrap();
        let chain = ChainModel::from_parts(set(&["A", "B"]), set(&["A", "B"]), vec![a, b]).unwrap();
        assert_eq!(chain.predict(&v(&[1.0])).unwrap(), set(&["A", "B"]));
        assert!(chain.predict(&v(&[0.0])).unwrap().is_empty());
        assert!(chain.predict(&v(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn ecc_threshold_is_inclusive() {
        let h = LinearHyper::default();
        let yes = LinearModel::from_parts(vec![0.0], 1.0, h).unwrap();
        let no = LinearModel::from_parts(vec![0.0], -1.0, h).unwrap();
        let chains: Vec<ChainModel> = (0..10)
            .map(|i| {
                let m = if i < 5 { yes.clone() } else { no.clone() };
                ChainModel::from_parts(set(&["A"]), set(&["A"]), vec![m]).unwrap()
            })
            .collect();
        let params = EccParams { vote_threshold: 0.5, ..Default::default() };
        let model = EnsembleModel::from_chains(chains, &params).unwrap();
        assert_eq!(model.vote_counts(&v(&[0.0])).unwrap(), vec![5]);
        assert_eq!(model.predict(&v(&[0.0])).unwrap(), set(&["A"]));
        let strict = model.with_vote_threshold(0.51).unwrap();
        assert!(strict.predict(&v(&[0.0])).unwrap().is_empty());
    }

    #[test]
    fn ecc_params_are_validated() {
        let (xs, ys) = two_label_data();
        let vocab = set(&["A", "B"]);
        let h = LinearHyper::default();
        for bad in [
            EccParams { m: 0, ..Default::default() },
            EccParams { sample_fraction: 0.0, ..Default::default() },
            EccParams { sample_fraction: 1.5, ..Default::default() },
            EccParams { vote_threshold: 0.0, ..Default::default() },
            EccParams { sample_fraction: 0.1, ..Default::default() },
        ] {
            assert!(train_ecc(&xs, &ys, &vocab, &bad, &h).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn sample_size_rounds_up() {
        let p = EccParams { sample_fraction: 0.67, ..Default::default() };
        assert_eq!(p.sample_size(100), 67);
        assert_eq!(p.sample_size(10), 7);
        assert_eq!(p.sample_size(3), 3);
    }
}
