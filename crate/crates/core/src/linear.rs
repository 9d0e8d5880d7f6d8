//! Sample-weighted linear SVM.
//!
//! Training minimizes
//!
//! ```text
//! (1 / 2C) ||w||² + Σ_i D_i · max(0, 1 − y_i (w·x_i + b))
//! ```
//!
//! by proximal stochastic subgradient descent: every epoch visits the
//! instances with positive weight in a seeded shuffled order, takes a hinge
//! subgradient step scaled by `n·D_i`, then applies the closed-form proximal
//! step of the L2 term. The bias is not regularized. The iterate with the
//! lowest objective at the end of any epoch is returned.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearHyper {
    /// Inverse regularization strength. The loss term is a weighted mean, so
    /// a class holding a fraction `p` of the weight is only predictable when
    /// `C` is well above `1/p`.
    pub c: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Initial learning rate; epoch `t` uses `eta0 / (1 + t / epochs)`.
    pub eta0: f64,
}

impl Default for LinearHyper {
    fn default() -> Self {
        LinearHyper {
            c: 1000.0,
            epochs: 50,
            seed: 0,
            eta0: 0.1,
        }
    }
}

impl LinearHyper {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::config("c", format!("must be positive, got {}", self.c)));
        }
        if self.epochs == 0 {
            return Err(Error::config("epochs", "must be at least 1"));
        }
        if !(self.eta0 > 0.0 && self.eta0.is_finite()) {
            return Err(Error::config("eta0", format!("must be positive, got {}", self.eta0)));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        LinearHyper { seed, ..self }
    }

    fn learning_rate(&self, epoch: usize) -> f64 {
        self.eta0 / (1.0 + epoch as f64 / self.epochs as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ModelRepr", try_from = "ModelRepr")]
pub struct LinearModel {
    weights: Vec<f64>,
    bias: f64,
    hyper: LinearHyper,
    /// Set when training saw a single class and fell back to a constant.
    degenerate: bool,
}

#[derive(Serialize, Deserialize)]
struct ModelRepr {
    dimension: usize,
    bias: f64,
    weights: Vec<(usize, f64)>,
    hyper: LinearHyper,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    degenerate: bool,
}

/// Weights with magnitude at or below this are omitted when serialized.
const SERIALIZE_EPSILON: f64 = 1e-12;

impl From<LinearModel> for ModelRepr {
    fn from(m: LinearModel) -> Self {
        ModelRepr {
            dimension: m.weights.len(),
            bias: m.bias,
            weights: m
                .weights
                .iter()
                .enumerate()
                .filter(|(_, w)| w.abs() > SERIALIZE_EPSILON)
                .map(|(i, &w)| (i, w))
                .collect(),
            hyper: m.hyper,
            degenerate: m.degenerate,
        }
    }
}

impl TryFrom<ModelRepr> for LinearModel {
    type Error = Error;

    fn try_from(r: ModelRepr) -> Result<Self> {
        let mut weights = vec![0.0; r.dimension];
        for (i, w) in r.weights {
            *weights
                .get_mut(i)
                .ok_or_else(|| Error::invalid(format!("weight index {i} >= dimension {}", r.dimension)))? = w;
        }
        LinearModel::from_parts(weights, r.bias, r.hyper).map(|m| LinearModel {
            degenerate: r.degenerate,
            ..m
        })
    }
}

impl LinearModel {
    pub fn from_parts(weights: Vec<f64>, bias: f64, hyper: LinearHyper) -> Result<Self> {
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("linear model parameters must be finite"));
        }
        Ok(LinearModel {
            weights,
            bias,
            hyper,
            degenerate: false,
        })
    }

    /// A model that ignores its input and always answers `sign`.
    pub fn constant(dimension: usize, sign: i8, hyper: LinearHyper) -> Self {
        LinearModel {
            weights: vec![0.0; dimension],
            bias: if sign >= 0 { 1.0 } else { -1.0 },
            hyper,
            degenerate: true,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn hyper(&self) -> &LinearHyper {
        &self.hyper
    }

    pub fn dimension(&self) -> usize {
        self.weights.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Shifts the bias; used to test decoding invariances.
    pub fn with_bias(&self, bias: f64) -> Self {
        LinearModel {
            bias,
            ..self.clone()
        }
    }

    /// `w·x + b`.
    pub fn decision(&self, x: &SparseVector) -> Result<f64> {
        if x.dimension() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: x.dimension(),
            });
        }
        Ok(x.dot(&self.weights)? + self.bias)
    }

    /// Sign of the decision value; zero maps to `+1`.
    pub fn predict(&self, x: &SparseVector) -> Result<i8> {
        Ok(if self.decision(x)? >= 0.0 { 1 } else { -1 })
    }
}

pub fn decision(model: &LinearModel, x: &SparseVector) -> Result<f64> {
    model.decision(x)
}

pub fn predict_binary(model: &LinearModel, x: &SparseVector) -> Result<i8> {
    model.predict(x)
}

pub fn uniform_weights(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

fn check_inputs(xs: &[SparseVector], ys: &[i8], sample_weights: &[f64]) -> Result<usize> {
    if xs.len() != ys.len() || xs.len() != sample_weights.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} vectors, {} targets, {} weights",
            xs.len(),
            ys.len(),
            sample_weights.len()
        )));
    }
    let dimension = xs.first().map(SparseVector::dimension).unwrap_or(0);
    if let Some(x) = xs.iter().find(|x| x.dimension() != dimension) {
        return Err(Error::DimensionMismatch {
            expected: dimension,
            found: x.dimension(),
        });
    }
    if let Some(y) = ys.iter().find(|&&y| y != 1 && y != -1) {
        return Err(Error::invalid(format!("targets must be -1 or +1, got {y}")));
    }
    if sample_weights.iter().any(|&d| !(d >= 0.0 && d.is_finite())) {
        return Err(Error::invalid("sample weights must be finite and non-negative"));
    }
    let total: f64 = sample_weights.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::invalid(format!("sample weights sum to {total}, expected 1")));
    }
    Ok(dimension)
}

fn raw_objective(
    weights: &[f64],
    bias: f64,
    c: f64,
    xs: &[SparseVector],
    ys: &[i8],
    sample_weights: &[f64],
) -> f64 {
    let reg: f64 = weights.iter().map(|w| w * w).sum::<f64>() / (2.0 * c);
    let loss: f64 = xs
        .iter()
        .zip(ys)
        .zip(sample_weights)
        .filter(|(_, &d)| d > 0.0)
        .map(|((x, &y), &d)| {
            let margin = y as f64 * (x.dot(weights).expect("checked dimension") + bias);
            d * (1.0 - margin).max(0.0)
        })
        .sum();
    reg + loss
}

/// Weighted hinge objective of `model` on the given data, using the model's
/// own regularization constant.
pub fn objective(
    model: &LinearModel,
    xs: &[SparseVector],
    ys: &[i8],
    sample_weights: &[f64],
) -> Result<f64> {
    let dimension = check_inputs(xs, ys, sample_weights)?;
    if !xs.is_empty() && dimension != model.dimension() {
        return Err(Error::DimensionMismatch {
            expected: model.dimension(),
            found: dimension,
        });
    }
    Ok(raw_objective(
        &model.weights,
        model.bias,
        model.hyper.c,
        xs,
        ys,
        sample_weights,
    ))
}

/// Weighted training hinge loss alone (no regularizer).
pub fn hinge_loss(
    model: &LinearModel,
    xs: &[SparseVector],
    ys: &[i8],
    sample_weights: &[f64],
) -> Result<f64> {
    let reg = model.weights.iter().map(|w| w * w).sum::<f64>() / (2.0 * model.hyper.c);
    Ok(objective(model, xs, ys, sample_weights)? - reg)
}

/// `w` kept as `scale · v` so the proximal shrink is O(1).
struct ScaledWeights {
    v: Vec<f64>,
    scale: f64,
}

impl ScaledWeights {
    fn dot(&self, x: &SparseVector) -> f64 {
        self.scale * x.entries().iter().map(|&(i, val)| val * self.v[i]).sum::<f64>()
    }

    fn add_scaled(&mut self, x: &SparseVector, amount: f64) {
        let step = amount / self.scale;
        for &(i, val) in x.entries() {
            self.v[i] += step * val;
        }
    }

    fn shrink(&mut self, factor: f64) {
        self.scale *= factor;
        if self.scale < 1e-9 {
            self.materialize_in_place();
        }
    }

    fn materialize_in_place(&mut self) {
        for w in &mut self.v {
            *w *= self.scale;
        }
        self.scale = 1.0;
    }

    fn to_vec(&self) -> Vec<f64> {
        self.v.iter().map(|w| w * self.scale).collect()
    }
}

/// Trains a binary model on `ys ∈ {-1, +1}` with per-instance weights that
/// sum to one. Instances with zero weight are ignored entirely.
pub fn train_binary(
    xs: &[SparseVector],
    ys: &[i8],
    sample_weights: &[f64],
    hyper: &LinearHyper,
) -> Result<LinearModel> {
    hyper.validate()?;
    let dimension = check_inputs(xs, ys, sample_weights)?;
    if xs.len() < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 training instances, got {}",
            xs.len()
        )));
    }

    let active: Vec<usize> = (0..xs.len()).filter(|&i| sample_weights[i] > 0.0).collect();
    let has_pos = active.iter().any(|&i| ys[i] > 0);
    let has_neg = active.iter().any(|&i| ys[i] < 0);
    if !(has_pos && has_neg) {
        return Ok(LinearModel::constant(
            dimension,
            if has_pos { 1 } else { -1 },
            *hyper,
        ));
    }

    let n_active = active.len() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut w = ScaledWeights {
        v: vec![0.0; dimension],
        scale: 1.0,
    };
    let mut bias = 0.0;
    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    let mut order: Vec<usize> = (0..active.len()).collect();

    for epoch in 0..hyper.epochs {
        let eta = hyper.learning_rate(epoch);
        let shrink = 1.0 / (1.0 + eta / hyper.c);
        order.shuffle(&mut rng);
        for &pos in &order {
            let i = active[pos];
            let x = &xs[i];
            let y = ys[i] as f64;
            let margin = y * (w.dot(x) + bias);
            if margin < 1.0 {
                let step = eta * n_active * sample_weights[i] * y;
                w.add_scaled(x, step);
                bias += step;
            }
            w.shrink(shrink);
        }

        let current = w.to_vec();
        let value = raw_objective(&current, bias, hyper.c, xs, ys, sample_weights);
        if best.as_ref().is_none_or(|(b, _, _)| value < *b) {
            best = Some((value, current, bias));
        }
    }

    let (_, weights, bias) = best.expect("at least one epoch");
    LinearModel::from_parts(weights, bias, *hyper)
}
