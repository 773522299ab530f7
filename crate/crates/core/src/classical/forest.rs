//! Random forest of CART trees with Gini splits.
//!
//! Each tree is grown on a bootstrap sample (n draws with replacement) and
//! considers `mtry` randomly chosen features per node. Tree `t` draws from a
//! generator seeded with `seed + t`, so trees can be grown in parallel and
//! the forest is still reproducible.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Classifier, Dataset};
use crate::dataset::BinaryLabel;
use crate::matrix::{FeatureMatrix, RowRef};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features tried per node; `None` means `ceil(sqrt(p))`.
    pub mtry: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: 12,
            min_leaf: 2,
            mtry: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        vote: BinaryLabel,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    /// Flattened nodes; index 0 is the root.
    pub nodes: Vec<TreeNode>,
}

impl DecisionTree {
    pub fn vote(&self, x: RowRef<'_>) -> BinaryLabel {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { vote } => return *vote,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x.get(*feature) <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], at: usize) -> usize {
            match &nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
    pub dim: usize,
}

impl Classifier for RandomForest {
    fn input_dim(&self) -> usize {
        self.dim
    }

    /// Fraction of trees voting TRUE.
    fn score(&self, x: RowRef<'_>) -> Result<f64> {
        x.check_dim(self.dim)?;
        let votes = self.trees.iter().filter(|t| t.vote(x) == BinaryLabel::True).count();
        Ok(votes as f64 / self.trees.len() as f64)
    }
}

pub fn rf_fit(data: &Dataset, config: &ForestConfig) -> Result<RandomForest> {
    if config.n_trees < 1 || config.min_leaf < 1 {
        return Err(Error::InvalidConfig(
            "forest needs n_trees >= 1 and min_leaf >= 1".into(),
        ));
    }
    if config.mtry == Some(0) {
        return Err(Error::InvalidConfig("forest mtry must be >= 1".into()));
    }
    data.check(true)?;
    let p = data.dim();
    let mtry = config
        .mtry
        .unwrap_or_else(|| (p as f64).sqrt().ceil() as usize)
        .clamp(1, p.max(1));
    let labels: Vec<u8> = data.y.iter().map(|l| l.index() as u8).collect();

    let trees = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(t as u64));
            let rows: Vec<usize> = if config.bootstrap {
                (0..data.len()).map(|_| rng.gen_range(0..data.len())).collect()
            } else {
                (0..data.len()).collect()
            };
            let grower = TreeGrower {
                x: &data.x,
                labels: &labels,
                max_depth: config.max_depth,
                min_leaf: config.min_leaf,
                mtry,
            };
            grower.grow(rows, &mut rng)
        })
        .collect();
    Ok(RandomForest { trees, dim: p })
}

fn gini(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p0 = counts[0] as f64 / n;
    let p1 = counts[1] as f64 / n;
    1.0 - p0 * p0 - p1 * p1
}

fn majority(counts: [usize; 2]) -> BinaryLabel {
    BinaryLabel::from_bool(counts[1] >= counts[0])
}

#[derive(Debug, Clone, Copy)]
struct SplitChoice {
    feature: usize,
    threshold: f64,
    gain: f64,
}

pub(crate) struct TreeGrower<'a> {
    pub x: &'a FeatureMatrix,
    pub labels: &'a [u8],
    pub max_depth: usize,
    pub min_leaf: usize,
    pub mtry: usize,
}

impl TreeGrower<'_> {
    pub(crate) fn grow(&self, rows: Vec<usize>, rng: &mut ChaCha8Rng) -> DecisionTree {
        let mut nodes = Vec::new();
        let mut slot = vec![u32::MAX; self.x.dim()];
        self.grow_node(rows, 0, rng, &mut nodes, &mut slot);
        DecisionTree { nodes }
    }

    fn counts(&self, rows: &[usize]) -> [usize; 2] {
        let mut c = [0usize; 2];
        for &r in rows {
            c[self.labels[r] as usize] += 1;
        }
        c
    }

    fn grow_node(
        &self,
        rows: Vec<usize>,
        depth: usize,
        rng: &mut ChaCha8Rng,
        nodes: &mut Vec<TreeNode>,
        slot: &mut [u32],
    ) -> usize {
        let id = nodes.len();
        let counts = self.counts(&rows);
        nodes.push(TreeNode::Leaf { vote: majority(counts) });

        let pure = counts[0] == 0 || counts[1] == 0;
        if pure || depth >= self.max_depth || rows.len() < 2 * self.min_leaf {
            return id;
        }
        let Some(best) = self.best_split(&rows, counts, rng, slot) else {
            return id;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| self.x.row(r).get(best.feature) <= best.threshold);
        let left = self.grow_node(left_rows, depth + 1, rng, nodes, slot);
        let right = self.grow_node(right_rows, depth + 1, rng, nodes, slot);
        nodes[id] = TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }

    fn candidate_features(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let p = self.x.dim();
        let mut feats = if self.mtry >= p {
            (0..p).collect()
        } else {
            sample(rng, p, self.mtry).into_vec()
        };
        feats.sort_unstable();
        feats
    }

    /// Best Gini split over the candidate features. Features are visited in
    /// ascending order and thresholds from low to high; only a strictly
    /// larger gain replaces the incumbent.
    fn best_split(
        &self,
        rows: &[usize],
        counts: [usize; 2],
        rng: &mut ChaCha8Rng,
        slot: &mut [u32],
    ) -> Option<SplitChoice> {
        let feats = self.candidate_features(rng);
        let parent = gini(counts);
        let mut best: Option<SplitChoice> = None;

        // Per-feature (value, label) lists. Dense rows list every value; sparse
        // rows list non-zeros only and the remainder is an implicit block of
        // zeros.
        let mut buckets: Vec<Vec<(f64, u8)>> = vec![Vec::new(); feats.len()];
        match self.x {
            FeatureMatrix::Dense { rows: data, .. } => {
                for (b, &f) in feats.iter().enumerate() {
                    buckets[b].extend(rows.iter().map(|&r| (data[r][f], self.labels[r])));
                }
            }
            FeatureMatrix::Sparse { rows: data, .. } => {
                for (b, &f) in feats.iter().enumerate() {
                    slot[f] = b as u32;
                }
                for &r in rows {
                    for (f, v) in data[r].iter() {
                        let b = slot[f];
                        if b != u32::MAX {
                            buckets[b as usize].push((v, self.labels[r]));
                        }
                    }
                }
                for &f in &feats {
                    slot[f] = u32::MAX;
                }
            }
        }

        for (bucket, &f) in buckets.iter_mut().zip(&feats) {
            bucket.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut zero = counts;
            for &(_, l) in bucket.iter() {
                zero[l as usize] -= 1;
            }
            if let Some((threshold, gain)) = self.scan(bucket, zero, counts, parent) {
                if best.map_or(true, |b| gain > b.gain) {
                    best = Some(SplitChoice {
                        feature: f,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best.filter(|b| b.gain > 1e-12)
    }

    /// Scans sorted explicit values, with `zeros` implicit zero-valued rows
    /// merged in at their sorted position, for the best threshold.
    fn scan(&self, sorted: &[(f64, u8)], zeros: [usize; 2], total: [usize; 2], parent: f64) -> Option<(f64, f64)> {
        let n = (total[0] + total[1]) as f64;
        let n_zero = zeros[0] + zeros[1];
        // Merge the zero block as a run of identical values.
        let mut groups: Vec<(f64, [usize; 2])> = Vec::new();
        let mut zero_done = n_zero == 0;
        let push = |v: f64, c: [usize; 2], groups: &mut Vec<(f64, [usize; 2])>| match groups.last_mut() {
            Some(last) if last.0 == v => {
                last.1[0] += c[0];
                last.1[1] += c[1];
            }
            _ => groups.push((v, c)),
        };
        for &(v, l) in sorted {
            if !zero_done && v >= 0.0 {
                push(0.0, zeros, &mut groups);
                zero_done = true;
            }
            let mut c = [0, 0];
            c[l as usize] = 1;
            push(v, c, &mut groups);
        }
        if !zero_done {
            push(0.0, zeros, &mut groups);
        }

        let mut left = [0usize; 2];
        let mut best: Option<(f64, f64)> = None;
        for w in groups.windows(2) {
            left[0] += w[0].1[0];
            left[1] += w[0].1[1];
            let right = [total[0] - left[0], total[1] - left[1]];
            let nl = left[0] + left[1];
            let nr = right[0] + right[1];
            if nl < self.min_leaf || nr < self.min_leaf {
                continue;
            }
            let gain = parent - (nl as f64 / n) * gini(left) - (nr as f64 / n) * gini(right);
            if best.map_or(true, |b| gain > b.1) {
                let (a, b) = (w[0].0, w[1].0);
                let mut threshold = a + (b - a) / 2.0;
                if threshold >= b {
                    threshold = a;
                }
                best = Some((threshold, gain));
            }
        }
        best
    }
}
