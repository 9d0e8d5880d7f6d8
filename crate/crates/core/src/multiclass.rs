//! One-vs-rest decoding over binary linear models.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::{train_binary, uniform_weights, LinearHyper, LinearModel};
use crate::sparse::SparseVector;
use crate::NO_EVENT;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvRModel {
    /// [`NO_EVENT`] first (when present), then canonical label order.
    classes: Vec<String>,
    per_class: Vec<LinearModel>,
    dimension: usize,
}

/// Orders the classes that occur in `class_labels`: [`NO_EVENT`] first, then
/// by position in `vocabulary`.
pub fn class_order<S: AsRef<str>>(class_labels: &[S], vocabulary: &[String]) -> Result<Vec<String>> {
    let present: BTreeSet<&str> = class_labels.iter().map(AsRef::as_ref).collect();
    if let Some(unknown) = present
        .iter()
        .find(|c| **c != NO_EVENT && !vocabulary.iter().any(|v| v == *c))
    {
        return Err(Error::invalid(format!("class {unknown:?} is not in the vocabulary")));
    }
    Ok(std::iter::once(NO_EVENT)
        .chain(vocabulary.iter().map(String::as_str))
        .filter(|c| present.contains(c))
        .map(String::from)
        .collect())
}

impl OvRModel {
    pub fn from_parts(classes: Vec<String>, per_class: Vec<LinearModel>) -> Result<Self> {
        if classes.len() != per_class.len() || classes.is_empty() {
            return Err(Error::invalid("one binary model per class is required"));
        }
        let dimension = per_class[0].dimension();
        if let Some(m) = per_class.iter().find(|m| m.dimension() != dimension) {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                found: m.dimension(),
            });
        }
        Ok(OvRModel {
            classes,
            per_class,
            dimension,
        })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn model_for(&self, class: &str) -> Option<&LinearModel> {
        self.classes
            .iter()
            .position(|c| c == class)
            .map(|i| &self.per_class[i])
    }

    pub fn models(&self) -> &[LinearModel] {
        &self.per_class
    }

    pub fn decisions(&self, x: &SparseVector) -> Result<Vec<f64>> {
        self.per_class.iter().map(|m| m.decision(x)).collect()
    }

    /// Index into [`classes`](Self::classes) of the highest decision value;
    /// the earliest class wins ties.
    pub fn predict_index(&self, x: &SparseVector) -> Result<usize> {
        let decisions = self.decisions(x)?;
        let mut best = 0;
        for (i, &d) in decisions.iter().enumerate().skip(1) {
            if d > decisions[best] {
                best = i;
            }
        }
        Ok(best)
    }

    pub fn predict(&self, x: &SparseVector) -> Result<&str> {
        Ok(&self.classes[self.predict_index(x)?])
    }
}

/// Trains one binary model per class with the given sample weights.
pub fn train_ovr_weighted<S: AsRef<str> + Sync>(
    xs: &[SparseVector],
    class_labels: &[S],
    vocabulary: &[String],
    sample_weights: &[f64],
    hyper: &LinearHyper,
) -> Result<OvRModel> {
    if xs.len() != class_labels.len() {
        return Err(Error::invalid(format!(
            "{} vectors but {} class labels",
            xs.len(),
            class_labels.len()
        )));
    }
    let classes = class_order(class_labels, vocabulary)?;
    if classes.len() < 2 {
        return Err(Error::invalid(format!(
            "one-vs-rest needs at least 2 classes, found {:?}; use a constant classifier",
            classes
        )));
    }
    let per_class = classes
        .par_iter()
        .map(|class| {
            let ys: Vec<i8> = class_labels
                .iter()
                .map(|c| if c.as_ref() == class { 1 } else { -1 })
                .collect();
            train_binary(xs, &ys, sample_weights, hyper)
        })
        .collect::<Result<Vec<_>>>()?;
    OvRModel::from_parts(classes, per_class)
}

pub fn train_ovr<S: AsRef<str> + Sync>(
    xs: &[SparseVector],
    class_labels: &[S],
    vocabulary: &[String],
    hyper: &LinearHyper,
) -> Result<OvRModel> {
    train_ovr_weighted(xs, class_labels, vocabulary, &uniform_weights(xs.len()), hyper)
}

pub fn predict_ovr<'m>(model: &'m OvRModel, x: &SparseVector) -> Result<&'m str> {
    model.predict(x)
}
