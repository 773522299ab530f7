//! Dense and sparse feature rows shared by every model.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A sparse row: sorted unique `indices`, matching `values`, width `dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    pub dim: usize,
}

impl SparseVector {
    pub fn zeros(dim: usize) -> Self {
        SparseVector {
            indices: Vec::new(),
            values: Vec::new(),
            dim,
        }
    }

    /// Builds from `(index, value)` pairs; duplicates are summed and zeros
    /// dropped.
    pub fn from_pairs(dim: usize, mut pairs: Vec<(usize, f64)>) -> Result<Self> {
        pairs.sort_by_key(|p| p.0);
        let mut indices: Vec<usize> = Vec::with_capacity(pairs.len());
        let mut values: Vec<f64> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            if i >= dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: i + 1,
                });
            }
            if indices.last() == Some(&i) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(i);
                values.push(v);
            }
        }
        let mut out = SparseVector { indices, values, dim };
        out.retain_nonzero();
        Ok(out)
    }

    fn retain_nonzero(&mut self) {
        let mut k = 0;
        for j in 0..self.indices.len() {
            if self.values[j] != 0.0 {
                self.indices[k] = self.indices[j];
                self.values[k] = self.values[j];
                k += 1;
            }
        }
        self.indices.truncate(k);
        self.values.truncate(k);
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.indices.binary_search(&index) {
            Ok(k) => self.values[k],
            Err(_) => 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }
}

/// Borrowed view of one feature row.
#[derive(Debug, Clone, Copy)]
pub enum RowRef<'a> {
    Dense(&'a [f64]),
    Sparse(&'a SparseVector),
}

impl<'a> RowRef<'a> {
    pub fn dim(&self) -> usize {
        match self {
            RowRef::Dense(v) => v.len(),
            RowRef::Sparse(s) => s.dim,
        }
    }

    pub fn dot(&self, weights: &[f64]) -> f64 {
        match self {
            RowRef::Dense(v) => v.iter().zip(weights).map(|(a, b)| a * b).sum(),
            RowRef::Sparse(s) => s.iter().map(|(i, v)| v * weights[i]).sum(),
        }
    }

    /// `target += alpha * self`.
    pub fn axpy_into(&self, alpha: f64, target: &mut [f64]) {
        match self {
            RowRef::Dense(v) => {
                for (t, x) in target.iter_mut().zip(v.iter()) {
                    *t += alpha * x;
                }
            }
            RowRef::Sparse(s) => {
                for (i, x) in s.iter() {
                    target[i] += alpha * x;
                }
            }
        }
    }

    pub fn get(&self, index: usize) -> f64 {
        match self {
            RowRef::Dense(v) => v[index],
            RowRef::Sparse(s) => s.get(index),
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            RowRef::Dense(v) => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            RowRef::Sparse(s) => s.norm(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            RowRef::Dense(v) => v.iter().all(|x| x.is_finite()),
            RowRef::Sparse(s) => s.values.iter().all(|x| x.is_finite()),
        }
    }

    pub fn to_row(&self) -> Row {
        match self {
            RowRef::Dense(v) => Row::Dense(v.to_vec()),
            RowRef::Sparse(s) => Row::Sparse((*s).clone()),
        }
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                got: self.dim(),
            })
        }
    }
}

/// Owned feature row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Row {
    Dense(Vec<f64>),
    Sparse(SparseVector),
}

impl Row {
    pub fn as_ref(&self) -> RowRef<'_> {
        match self {
            Row::Dense(v) => RowRef::Dense(v),
            Row::Sparse(s) => RowRef::Sparse(s),
        }
    }

    pub fn dim(&self) -> usize {
        self.as_ref().dim()
    }
}

impl From<Vec<f64>> for Row {
    fn from(v: Vec<f64>) -> Self {
        Row::Dense(v)
    }
}

impl From<SparseVector> for Row {
    fn from(v: SparseVector) -> Self {
        Row::Sparse(v)
    }
}

/// A row-major feature matrix; all rows share one width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeatureMatrix {
    Dense { rows: Vec<Vec<f64>>, dim: usize },
    Sparse { rows: Vec<SparseVector>, dim: usize },
}

impl FeatureMatrix {
    pub fn dense(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        Ok(FeatureMatrix::Dense { rows, dim })
    }

    pub fn sparse(rows: Vec<SparseVector>, dim: usize) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.dim != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.dim,
            });
        }
        Ok(FeatureMatrix::Sparse { rows, dim })
    }

    /// Collects owned rows; they must all be dense or all sparse.
    pub fn from_rows(rows: Vec<Row>) -> Result<Self> {
        match rows.first() {
            None => Ok(FeatureMatrix::Dense {
                rows: Vec::new(),
                dim: 0,
            }),
            Some(Row::Dense(_)) => {
                let dense = rows
                    .into_iter()
                    .map(|r| match r {
                        Row::Dense(v) => Ok(v),
                        Row::Sparse(s) => Ok(s.to_dense()),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::dense(dense)
            }
            Some(Row::Sparse(first)) => {
                let dim = first.dim;
                let sparse = rows
                    .into_iter()
                    .map(|r| match r {
                        Row::Sparse(s) => Ok(s),
                        Row::Dense(v) => SparseVector::from_pairs(v.len(), v.into_iter().enumerate().collect()),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::sparse(sparse, dim)
            }
        }
    }

    pub fn n_rows(&self) -> usize {
        match self {
            FeatureMatrix::Dense { rows, .. } => rows.len(),
            FeatureMatrix::Sparse { rows, .. } => rows.len(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            FeatureMatrix::Dense { dim, .. } | FeatureMatrix::Sparse { dim, .. } => *dim,
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, FeatureMatrix::Sparse { .. })
    }

    pub fn row(&self, i: usize) -> RowRef<'_> {
        match self {
            FeatureMatrix::Dense { rows, .. } => RowRef::Dense(&rows[i]),
            FeatureMatrix::Sparse { rows, .. } => RowRef::Sparse(&rows[i]),
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = RowRef<'_>> + '_ {
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> FeatureMatrix {
        match self {
            FeatureMatrix::Dense { rows, dim } => FeatureMatrix::Dense {
                rows: indices.iter().map(|&i| rows[i].clone()).collect(),
                dim: *dim,
            },
            FeatureMatrix::Sparse { rows, dim } => FeatureMatrix::Sparse {
                rows: indices.iter().map(|&i| rows[i].clone()).collect(),
                dim: *dim,
            },
        }
    }

    pub fn all_finite(&self) -> bool {
        self.rows().all(|r| r.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_from_pairs_sorts_and_merges() {
        let v = SparseVector::from_pairs(5, vec![(3, 1.0), (1, 2.0), (3, 0.5), (4, 0.0)]).unwrap();
        assert_eq!(v.indices, vec![1, 3]);
        assert_eq!(v.values, vec![2.0, 1.5]);
        assert_eq!(v.get(3), 1.5);
        assert_eq!(v.get(0), 0.0);
        assert!(SparseVector::from_pairs(2, vec![(2, 1.0)]).is_err());
    }

    #[test]
    fn row_ops_agree_between_layouts() {
        let dense = vec![0.0, 2.0, 0.0, -1.0];
        let sparse = SparseVector::from_pairs(4, vec![(1, 2.0), (3, -1.0)]).unwrap();
        let w = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(RowRef::Dense(&dense).dot(&w), RowRef::Sparse(&sparse).dot(&w));
        let mut a = vec![0.0; 4];
        let mut b = vec![0.0; 4];
        RowRef::Dense(&dense).axpy_into(0.5, &mut a);
        RowRef::Sparse(&sparse).axpy_into(0.5, &mut b);
        assert_eq!(a, b);
        assert_eq!(sparse.to_dense(), dense);
    }

    #[test]
    fn ragged_dense_rejected() {
        assert!(FeatureMatrix::dense(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
