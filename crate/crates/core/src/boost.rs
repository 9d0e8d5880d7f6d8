//! AdaBoost.M1 with the one-vs-rest SVM as base learner.
//!
//! Round `t` trains the base learner under the instance distribution `D_t`,
//! measures its weighted training error `ε_t`, and multiplies the weight of
//! every correctly classified instance by `β_t = ε_t / (1 − ε_t)` before
//! renormalizing. Prediction is a vote weighted by `ln(1/β_t)`.
//!
//! Termination: `ε_t ≥ 0.5` discards the round (the first round is kept with
//! `β = 0.5` so the ensemble is never empty); `ε_t = 0` keeps the round with
//! `β` clamped to [`PERFECT_ROUND_BETA`] and stops.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::{uniform_weights, LinearHyper};
use crate::multiclass::{train_ovr_weighted, OvRModel};
use crate::sparse::SparseVector;

pub const PERFECT_ROUND_BETA: f64 = 1e-10;
pub const FALLBACK_BETA: f64 = 0.5;
pub const DEFAULT_ROUNDS: usize = 10;

/// `ε / (1 − ε)` for `ε ∈ (0, 0.5)`.
pub fn compute_beta(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::invalid(format!(
            "weighted error {epsilon} outside (0, 0.5)"
        )));
    }
    Ok(epsilon / (1.0 - epsilon))
}

/// Total weight of the misclassified instances.
pub fn weighted_error(distribution: &[f64], correct: &[bool]) -> f64 {
    distribution
        .iter()
        .zip(correct)
        .filter(|(_, &ok)| !ok)
        .map(|(&d, _)| d)
        .sum()
}

/// Scales correct instances by `beta` and renormalizes to sum one.
pub fn reweight(distribution: &[f64], correct: &[bool], beta: f64) -> Vec<f64> {
    let scaled: Vec<f64> = distribution
        .iter()
        .zip(correct)
        .map(|(&d, &ok)| if ok { d * beta } else { d })
        .collect();
    let total: f64 = scaled.iter().sum();
    scaled.into_iter().map(|d| d / total).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostRound {
    pub beta: f64,
    pub base: OvRModel,
}

impl BoostRound {
    pub fn vote_weight(&self) -> f64 {
        (1.0 / self.beta).ln()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostModel {
    classes: Vec<String>,
    t_requested: usize,
    rounds: Vec<BoostRound>,
}

impl BoostModel {
    pub fn from_rounds(rounds: Vec<BoostRound>, t_requested: usize) -> Result<Self> {
        let first = rounds
            .first()
            .ok_or_else(|| Error::invalid("a boosted model needs at least one round"))?;
        let classes = first.base.classes().to_vec();
        for round in &rounds {
            if !(round.beta > 0.0 && round.beta < 1.0) {
                return Err(Error::invalid(format!("beta {} outside (0, 1)", round.beta)));
            }
            if round.base.classes() != classes.as_slice() {
                return Err(Error::invalid("every round must share the class order"));
            }
            if round.base.dimension() != first.base.dimension() {
                return Err(Error::DimensionMismatch {
                    expected: first.base.dimension(),
                    found: round.base.dimension(),
                });
            }
        }
        if rounds.len() > t_requested {
            return Err(Error::invalid("more rounds than requested"));
        }
        Ok(BoostModel {
            classes,
            t_requested,
            rounds,
        })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn rounds(&self) -> &[BoostRound] {
        &self.rounds
    }

    pub fn t_requested(&self) -> usize {
        self.t_requested
    }

    pub fn t_effective(&self) -> usize {
        self.rounds.len()
    }

    pub fn dimension(&self) -> usize {
        self.rounds[0].base.dimension()
    }

    /// Accumulated vote weight per class.
    pub fn votes(&self, x: &SparseVector) -> Result<Vec<f64>> {
        let mut votes = vec![0.0; self.classes.len()];
        for round in &self.rounds {
            votes[round.base.predict_index(x)?] += round.vote_weight();
        }
        Ok(votes)
    }

    pub fn predict(&self, x: &SparseVector) -> Result<&str> {
        let votes = self.votes(x)?;
        let mut best = 0;
        for (i, &v) in votes.iter().enumerate().skip(1) {
            if v > votes[best] {
                best = i;
            }
        }
        Ok(&self.classes[best])
    }
}

pub fn predict_boost<'m>(model: &'m BoostModel, x: &SparseVector) -> Result<&'m str> {
    model.predict(x)
}

/// What happened in one boosting round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrace {
    pub epsilon: f64,
    /// `D_t`, the distribution the round was trained under.
    pub distribution: Vec<f64>,
    pub correct: Vec<bool>,
    /// `D_{t+1}`, present when training continued past this round.
    pub next_distribution: Option<Vec<f64>>,
    /// Whether the round is part of the final ensemble.
    pub kept: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoostTrace {
    pub rounds: Vec<RoundTrace>,
}

impl BoostTrace {
    /// Running products `Π_{s≤t} 2√(ε_s(1−ε_s))` over the kept rounds.
    pub fn error_bounds(&self) -> Vec<f64> {
        let mut product = 1.0;
        self.rounds
            .iter()
            .filter(|r| r.kept)
            .map(|r| {
                product *= 2.0 * (r.epsilon * (1.0 - r.epsilon)).sqrt();
                product
            })
            .collect()
    }
}

pub fn train_adaboost_m1<S: AsRef<str> + Sync>(
    xs: &[SparseVector],
    class_labels: &[S],
    vocabulary: &[String],
    rounds: usize,
    base_hyper: &LinearHyper,
    seed: u64,
) -> Result<BoostModel> {
    train_adaboost_m1_traced(xs, class_labels, vocabulary, rounds, base_hyper, seed).map(|(m, _)| m)
}

/// Like [`train_adaboost_m1`], also returning the per-round distributions.
/// Round `t` (0-based) trains its base learner with seed `seed + t`.
pub fn train_adaboost_m1_traced<S: AsRef<str> + Sync>(
    xs: &[SparseVector],
    class_labels: &[S],
    vocabulary: &[String],
    rounds: usize,
    base_hyper: &LinearHyper,
    seed: u64,
) -> Result<(BoostModel, BoostTrace)> {
    if rounds == 0 {
        return Err(Error::config("rounds", "must be at least 1"));
    }
    let mut distribution = uniform_weights(xs.len());
    let mut kept = Vec::new();
    let mut trace = BoostTrace::default();

    for t in 0..rounds {
        let hyper = base_hyper.with_seed(seed.wrapping_add(t as u64));
        let base = train_ovr_weighted(xs, class_labels, vocabulary, &distribution, &hyper)?;
        let correct = xs
            .iter()
            .zip(class_labels)
            .map(|(x, label)| Ok(base.predict(x)? == label.as_ref()))
            .collect::<Result<Vec<bool>>>()?;
        let epsilon = weighted_error(&distribution, &correct);
        let mut record = RoundTrace {
            epsilon,
            distribution: distribution.clone(),
            correct: correct.clone(),
            next_distribution: None,
            kept: false,
        };

        if epsilon >= 0.5 {
            if t == 0 {
                kept.push(BoostRound {
                    beta: FALLBACK_BETA,
                    base,
                });
                record.kept = true;
            }
            trace.rounds.push(record);
            break;
        }
        if epsilon == 0.0 {
            kept.push(BoostRound {
                beta: PERFECT_ROUND_BETA,
                base,
            });
            record.kept = true;
            trace.rounds.push(record);
            break;
        }

        let beta = compute_beta(epsilon)?;
        kept.push(BoostRound { beta, base });
        distribution = reweight(&distribution, &correct, beta);
        record.kept = true;
        record.next_distribution = Some(distribution.clone());
        trace.rounds.push(record);
    }

    Ok((BoostModel::from_rounds(kept, rounds)?, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::LinearModel;

    fn v(values: &[f64]) -> SparseVector {
        SparseVector::from_dense(values)
    }

    /// A one-feature OvR model whose prediction is fixed by its biases.
    fn voter(winner: usize) -> OvRModel {
        let h = LinearHyper::default();
        let models = (0..2)
            .map(|i| LinearModel::from_parts(vec![0.0], if i == winner { 1.0 } else { 0.0 }, h).unwrap())
            .collect();
        OvRModel::from_parts(vec!["A".into(), "B".into()], models).unwrap()
    }

    #[test]
    fn beta_formula() {
        assert!((compute_beta(0.25).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((compute_beta(0.1).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert!(compute_beta(0.4999).unwrap() > 0.999);
        assert!(compute_beta(0.5).is_err());
        assert!(compute_beta(0.0).is_err());
    }

    #[test]
    fn reweight_example() {
        let d = reweight(&[0.25; 4], &[true, true, true, false], compute_beta(0.25).unwrap());
        let want = [1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 0.5];
        for (a, b) in d.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn heavier_vote_wins() {
        let model = BoostModel::from_rounds(
            vec![
                BoostRound { beta: 1.0 / 3.0, base: voter(0) },
                BoostRound { beta: 1.0 / 9.0, base: voter(1) },
            ],
            2,
        )
        .unwrap();
        assert_eq!(model.predict(&v(&[0.0])).unwrap(), "B");
    }

    #[test]
    fn equal_votes_break_by_class_order() {
        let model = BoostModel::from_rounds(
            vec![
                BoostRound { beta: 0.25, base: voter(1) },
                BoostRound { beta: 0.25, base: voter(0) },
            ],
            2,
        )
        .unwrap();
        assert_eq!(model.predict(&v(&[0.0])).unwrap(), "A");
    }

    #[test]
    fn perfect_first_round_stops() {
        let xs = [v(&[1.0]), v(&[2.0]), v(&[-1.0]), v(&[-2.0])];
        let labels = ["A", "A", "N", "N"];
        let vocab = vec!["A".to_string()];
        let model = train_adaboost_m1(&xs, &labels, &vocab, 5, &LinearHyper::default(), 0).unwrap();
        assert_eq!(model.t_effective(), 1);
        assert_eq!(model.t_requested(), 5);
        assert_eq!(model.rounds()[0].beta, PERFECT_ROUND_BETA);
        for x in &xs {
            assert_eq!(model.predict(x).unwrap(), model.rounds()[0].base.predict(x).unwrap());
        }
    }

    #[test]
    fn invalid_models_are_rejected() {
        assert!(BoostModel::from_rounds(vec![], 1).is_err());
        assert!(BoostModel::from_rounds(vec![BoostRound { beta: 1.0, base: voter(0) }], 1).is_err());
        assert!(BoostModel::from_rounds(
            vec![BoostRound { beta: 0.5, base: voter(0) }, BoostRound { beta: 0.5, base: voter(0) }],
            1
        )
        .is_err());
    }

    #[test]
    fn zero_rounds_is_an_error() {
        let xs = [v(&[1.0]), v(&[-1.0])];
        let vocab = vec!["A".to_string()];
        assert!(train_adaboost_m1(&xs, &["A", "N"], &vocab, 0, &LinearHyper::default(), 0).is_err());
    }
}
