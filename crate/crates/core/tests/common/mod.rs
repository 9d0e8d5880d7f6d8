//! Oracles shared by the integration tests. They compute their answers
//! without going through the library.

#![allow(dead_code)]

use sentev::sparse::SparseVector;

/// Eight integer points in the plane; not linearly separable.
pub const GRID_POINTS: [([f64; 2], i8); 8] = [
    ([2.0, 2.0], 1),
    ([1.0, 3.0], 1),
    ([3.0, 1.0], 1),
    ([0.0, 1.0], 1),
    ([-1.0, -1.0], -1),
    ([-2.0, 0.0], -1),
    ([0.0, -2.0], -1),
    ([1.0, 1.0], -1),
];

pub fn grid_dataset() -> (Vec<SparseVector>, Vec<i8>) {
    let xs = GRID_POINTS.iter().map(|(p, _)| SparseVector::from_dense(p)).collect();
    let ys = GRID_POINTS.iter().map(|&(_, y)| y).collect();
    (xs, ys)
}

/// `‖w‖²/(2C) + mean hinge` over [`GRID_POINTS`].
pub fn direct_objective(w: [f64; 2], b: f64, c: f64) -> f64 {
    let n = GRID_POINTS.len() as f64;
    let reg = (w[0] * w[0] + w[1] * w[1]) / (2.0 * c);
    let loss: f64 = GRID_POINTS
        .iter()
        .map(|(p, y)| (1.0 - *y as f64 * (w[0] * p[0] + w[1] * p[1] + b)).max(0.0) / n)
        .sum();
    reg + loss
}

/// Minimum of [`direct_objective`] over `(w1, w2, b) ∈ [−3, 3]³` at step 0.05.
pub fn grid_minimum(c: f64) -> f64 {
    let at = |k: i32| -3.0 + 0.05 * k as f64;
    let mut best = f64::INFINITY;
    for i in 0..=120 {
        for j in 0..=120 {
            for k in 0..=120 {
                best = best.min(direct_objective([at(i), at(j)], at(k), c));
            }
        }
    }
    best
}
