//! k-nearest neighbours with Euclidean or cosine distance.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{Classifier, Dataset};
use crate::dataset::BinaryLabel;
use crate::matrix::{FeatureMatrix, RowRef};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Cosine for sparse (TFIDF) rows, Euclidean for dense rows.
    #[default]
    Auto,
    Euclidean,
    Cosine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnConfig {
    pub k: usize,
    pub metric: Metric,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig {
            k: 5,
            metric: Metric::Auto,
        }
    }
}

/// Stored training set. The score is the fraction of the `k` nearest rows
/// labelled TRUE; equal distances go to the lower training index.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    /// Resolved metric, never `Auto`.
    pub metric: Metric,
    pub train: FeatureMatrix,
    pub labels: Vec<BinaryLabel>,
    #[serde(skip)]
    index: OnceLock<SparseIndex>,
}

impl PartialEq for KnnModel {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.metric == other.metric && self.train == other.train && self.labels == other.labels
    }
}

/// Column postings and row norms of a sparse training matrix.
#[derive(Debug, Clone, Default)]
struct SparseIndex {
    postings: Vec<Vec<(u32, f64)>>,
    norms: Vec<f64>,
}

impl SparseIndex {
    fn build(train: &FeatureMatrix) -> Self {
        let mut postings = vec![Vec::new(); train.dim()];
        let mut norms = Vec::with_capacity(train.n_rows());
        for (r, row) in train.rows().enumerate() {
            if let RowRef::Sparse(s) = row {
                for (j, v) in s.iter() {
                    postings[j].push((r as u32, v));
                }
            }
            norms.push(row.norm());
        }
        SparseIndex { postings, norms }
    }
}

pub fn knn_fit(data: &Dataset, config: &KnnConfig) -> Result<KnnModel> {
    if config.k < 1 || config.k > data.len() {
        return Err(Error::InvalidK {
            k: config.k,
            n: data.len(),
        });
    }
    data.check(false)?;
    let metric = match config.metric {
        Metric::Auto if data.x.is_sparse() => Metric::Cosine,
        Metric::Auto => Metric::Euclidean,
        m => m,
    };
    Ok(KnnModel {
        k: config.k,
        metric,
        train: data.x.clone(),
        labels: data.y.clone(),
        index: OnceLock::new(),
    })
}

fn cosine_distance(dot: f64, na: f64, nb: f64) -> f64 {
    if na == 0.0 || nb == 0.0 {
        1.0
    } else {
        1.0 - dot / (na * nb)
    }
}

impl KnnModel {
    fn index(&self) -> &SparseIndex {
        self.index.get_or_init(|| SparseIndex::build(&self.train))
    }

    /// Distance from `x` to every training row. Euclidean distances are
    /// squared, which preserves their order.
    pub fn distances(&self, x: RowRef<'_>) -> Result<Vec<f64>> {
        x.check_dim(self.train.dim())?;
        let n = self.train.n_rows();
        let qn = x.norm();
        Ok(match (self.metric, x, self.train.is_sparse()) {
            (Metric::Cosine, RowRef::Sparse(q), true) => {
                let idx = self.index();
                let mut dots = vec![0.0; n];
                for (j, v) in q.iter() {
                    for &(r, w) in &idx.postings[j] {
                        dots[r as usize] += v * w;
                    }
                }
                dots.iter()
                    .zip(&idx.norms)
                    .map(|(&d, &rn)| cosine_distance(d, qn, rn))
                    .collect()
            }
            (Metric::Cosine, _, _) => {
                let dense = dense_query(x);
                self.train
                    .rows()
                    .map(|r| cosine_distance(r.dot(&dense), qn, r.norm()))
                    .collect()
            }
            _ => {
                let dense = dense_query(x);
                self.train
                    .rows()
                    .map(|r| {
                        let rn = r.norm();
                        match r {
                            RowRef::Dense(v) => v.iter().zip(&dense).map(|(a, b)| (a - b) * (a - b)).sum(),
                            RowRef::Sparse(_) => (qn * qn + rn * rn - 2.0 * r.dot(&dense)).max(0.0),
                        }
                    })
                    .collect()
            }
        })
    }

    /// Indices of the `k` nearest training rows, nearest first.
    pub fn neighbors(&self, x: RowRef<'_>) -> Result<Vec<usize>> {
        let dist = self.distances(x)?;
        let cmp = |&a: &usize, &b: &usize| dist[a].total_cmp(&dist[b]).then(a.cmp(&b));
        let mut idx: Vec<usize> = (0..dist.len()).collect();
        if self.k < idx.len() {
            idx.select_nth_unstable_by(self.k - 1, cmp);
            idx.truncate(self.k);
        }
        idx.sort_unstable_by(cmp);
        Ok(idx)
    }
}

fn dense_query(x: RowRef<'_>) -> Vec<f64> {
    match x {
        RowRef::Dense(v) => v.to_vec(),
        RowRef::Sparse(s) => s.to_dense(),
    }
}

impl Classifier for KnnModel {
    fn input_dim(&self) -> usize {
        self.train.dim()
    }

    fn score(&self, x: RowRef<'_>) -> Result<f64> {
        let nn = self.neighbors(x)?;
        let pos = nn.iter().filter(|&&i| self.labels[i] == BinaryLabel::True).count();
        Ok(pos as f64 / self.k as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::tests::dense_data;
    use crate::matrix::SparseVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn k1_returns_own_label() {
        let data = dense_data(vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![5.0, 5.0]], &[0, 1, 0]);
        let m = knn_fit(
            &data,
            &KnnConfig {
                k: 1,
                ..KnnConfig::default()
            },
        )
        .unwrap();
        assert_eq!(m.predict(RowRef::Dense(&[1.0, 1.0])).unwrap(), BinaryLabel::True);
        assert_eq!(m.predict(RowRef::Dense(&[5.0, 5.0])).unwrap(), BinaryLabel::Fake);
    }

    #[test]
    fn fraction_score() {
        let data = dense_data(
            vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0], vec![100.0]],
            &[1, 1, 1, 0, 0],
        );
        let m = knn_fit(
            &data,
            &KnnConfig {
                k: 4,
                ..KnnConfig::default()
            },
        )
        .unwrap();
        assert_eq!(m.score(RowRef::Dense(&[1.5])).unwrap(), 0.75);
        assert_eq!(m.predict(RowRef::Dense(&[1.5])).unwrap(), BinaryLabel::True);
    }

    #[test]
    fn invalid_k() {
        let data = dense_data(vec![vec![0.0], vec![1.0]], &[0, 1]);
        assert!(matches!(
            knn_fit(
                &data,
                &KnnConfig {
                    k: 0,
                    ..KnnConfig::default()
                }
            ),
            Err(Error::InvalidK { .. })
        ));
        assert!(matches!(
            knn_fit(
                &data,
                &KnnConfig {
                    k: 3,
                    ..KnnConfig::default()
                }
            ),
            Err(Error::InvalidK { .. })
        ));
    }

    #[test]
    fn planar_ranking_matches_brute_force() {
        // Hand-computed squared distances from (0, 0):
        // (1,0)->1, (0,2)->4, (-1,-1)->2, (3,3)->18
        let data = dense_data(
            vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![-1.0, -1.0], vec![3.0, 3.0]],
            &[1, 0, 1, 0],
        );
        let m = knn_fit(
            &data,
            &KnnConfig {
                k: 3,
                ..KnnConfig::default()
            },
        )
        .unwrap();
        assert_eq!(m.neighbors(RowRef::Dense(&[0.0, 0.0])).unwrap(), vec![0, 2, 1]);
        assert!((m.score(RowRef::Dense(&[0.0, 0.0])).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ties_go_to_lower_index() {
        let data = dense_data(vec![vec![1.0], vec![-1.0], vec![1.0]], &[0, 1, 1]);
        let m = knn_fit(
            &data,
            &KnnConfig {
                k: 2,
                ..KnnConfig::default()
            },
        )
        .unwrap();
        assert_eq!(m.neighbors(RowRef::Dense(&[0.0])).unwrap(), vec![0, 1]);
    }

    #[test]
    fn k_equals_n_predicts_majority() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rows: Vec<Vec<f64>> = (0..9).map(|_| vec![rng.gen_range(-5.0..5.0)]).collect();
        let data = dense_data(rows, &[1, 1, 1, 1, 1, 0, 0, 0, 0]);
        let m = knn_fit(
            &data,
            &KnnConfig {
                k: 9,
                ..KnnConfig::default()
            },
        )
        .unwrap();
        for _ in 0..50 {
            let q = [rng.gen_range(-10.0..10.0)];
            assert_eq!(m.predict(RowRef::Dense(&q)).unwrap(), BinaryLabel::True);
        }
    }

    #[test]
    fn sparse_cosine_matches_dense_cosine() {
        let rows = vec![
            SparseVector::from_pairs(4, vec![(0, 1.0), (2, 1.0)]).unwrap(),
            SparseVector::from_pairs(4, vec![(1, 1.0)]).unwrap(),
            SparseVector::from_pairs(4, vec![(0, 0.5), (3, 2.0)]).unwrap(),
            SparseVector::zeros(4),
        ];
        let dense: Vec<Vec<f64>> = rows.iter().map(SparseVector::to_dense).collect();
        let labels = vec![
            BinaryLabel::True,
            BinaryLabel::Fake,
            BinaryLabel::True,
            BinaryLabel::Fake,
        ];
        let sparse_data = Dataset::new(FeatureMatrix::sparse(rows, 4).unwrap(), labels.clone()).unwrap();
        let dense_data = Dataset::new(FeatureMatrix::dense(dense).unwrap(), labels).unwrap();
        let cfg = KnnConfig {
            k: 2,
            metric: Metric::Cosine,
        };
        let a = knn_fit(
            &sparse_data,
            &KnnConfig {
                k: 2,
                metric: Metric::Auto,
            },
        )
        .unwrap();
        assert_eq!(a.metric, Metric::Cosine);
        let b = knn_fit(&dense_data, &cfg).unwrap();
        let q = SparseVector::from_pairs(4, vec![(0, 1.0), (3, 1.0)]).unwrap();
        let qd = q.to_dense();
        let da = a.distances(RowRef::Sparse(&q)).unwrap();
        let db = b.distances(RowRef::Dense(&qd)).unwrap();
        for (x, y) in da.iter().zip(&db) {
            assert!((x - y).abs() < 1e-12);
        }
        assert_eq!(da[3], 1.0);
        assert_eq!(
            a.neighbors(RowRef::Sparse(&q)).unwrap(),
            b.neighbors(RowRef::Dense(&qd)).unwrap()
        );
    }
}
