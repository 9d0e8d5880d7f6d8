use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sparse feature vector: sorted `(column, value)` pairs with no stored
/// zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
    dimension: usize,
}

impl SparseVector {
    pub fn zeros(dimension: usize) -> Self {
        SparseVector {
            entries: Vec::new(),
            dimension,
        }
    }

    /// Builds a vector from arbitrary `(index, value)` pairs. Zeros are
    /// dropped; duplicate indices are summed.
    pub fn from_pairs(
        dimension: usize,
        pairs: impl IntoIterator<Item = (usize, f64)>,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, f64)> = pairs.into_iter().collect();
        if let Some(&(i, _)) = entries.iter().find(|(i, _)| *i >= dimension) {
            return Err(Error::invalid(format!(
                "index {i} out of range for dimension {dimension}"
            )));
        }
        entries.sort_by_key(|&(i, _)| i);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            match merged.last_mut() {
                Some((j, acc)) if *j == i => *acc += v,
                _ => merged.push((i, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        Ok(SparseVector {
            entries: merged,
            dimension,
        })
    }

    pub fn from_dense(values: &[f64]) -> Self {
        SparseVector {
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(i, &v)| (i, v))
                .collect(),
            dimension: values.len(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map(|pos| self.entries[pos].1)
            .unwrap_or(0.0)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.dimension];
        for &(i, v) in &self.entries {
            dense[i] = v;
        }
        dense
    }

    pub fn dot(&self, dense: &[f64]) -> Result<f64> {
        if dense.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: dense.len(),
                found: self.dimension,
            });
        }
        Ok(self.entries.iter().map(|&(i, v)| v * dense[i]).sum())
    }

    pub fn squared_norm(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum()
    }

    /// Appends `extra` as new trailing columns.
    pub fn extended(&self, extra: &[f64]) -> SparseVector {
        let mut entries = self.entries.clone();
        entries.extend(
            extra
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(j, &v)| (self.dimension + j, v)),
        );
        SparseVector {
            entries,
            dimension: self.dimension + extra.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_pairs_sorts_merges_and_drops_zeros() {
        let v = SparseVector::from_pairs(5, [(3, 1.0), (1, 2.0), (3, 1.5), (4, 0.0)]).unwrap();
        assert_eq!(v.entries(), &[(1, 2.0), (3, 2.5)]);
        assert_eq!(v.get(3), 2.5);
        assert_eq!(v.get(0), 0.0);
        assert!(SparseVector::from_pairs(2, [(2, 1.0)]).is_err());
    }

    #[test]
    fn extended_appends_trailing_columns() {
        let v = SparseVector::from_pairs(3, [(0, 1.0)]).unwrap();
        let e = v.extended(&[1.0, 0.0, 1.0]);
        assert_eq!(e.dimension(), 6);
        assert_eq!(e.entries(), &[(0, 1.0), (3, 1.0), (5, 1.0)]);
    }

    #[test]
    fn dot_checks_dimension() {
        let v = SparseVector::from_dense(&[1.0, 0.0, 2.0]);
        assert_eq!(v.dot(&[3.0, 5.0, 0.5]).unwrap(), 4.0);
        assert!(v.dot(&[1.0]).is_err());
    }
}
