use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::TokenSeq;
use crate::matrix::SparseVector;
use crate::{Error, Result};

/// Fitted TFIDF transform.
///
/// Raw term counts, smoothed idf `ln((1 + N) / (1 + df)) + 1`, L2-normalised
/// output. The vocabulary is every term seen at fit time, indexed in
/// lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfModel {
    pub vocabulary: BTreeMap<String, usize>,
    pub idf: Vec<f64>,
    pub n_docs: usize,
}

impl TfidfModel {
    pub fn dim(&self) -> usize {
        self.idf.len()
    }

    pub fn transform(&self, doc: &TokenSeq) -> SparseVector {
        tfidf_transform(self, doc)
    }
}

pub fn tfidf_fit(corpus: &[TokenSeq]) -> Result<TfidfModel> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in corpus {
        let distinct: BTreeSet<&str> = doc.iter().collect();
        for t in distinct {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    let n = corpus.len() as f64;
    let mut vocabulary = BTreeMap::new();
    let mut idf = Vec::with_capacity(df.len());
    for (i, (term, count)) in df.into_iter().enumerate() {
        vocabulary.insert(term.to_string(), i);
        idf.push(((1.0 + n) / (1.0 + count as f64)).ln() + 1.0);
    }
    Ok(TfidfModel {
        vocabulary,
        idf,
        n_docs: corpus.len(),
    })
}

/// Out-of-vocabulary terms are ignored; a document with no known term maps
/// to the zero vector.
pub fn tfidf_transform(model: &TfidfModel, doc: &TokenSeq) -> SparseVector {
    let mut counts: HashMap<usize, f64> = HashMap::new();
    for t in doc.iter() {
        if let Some(&i) = model.vocabulary.get(t) {
            *counts.entry(i).or_insert(0.0) += 1.0;
        }
    }
    let mut pairs: Vec<(usize, f64)> = counts.into_iter().map(|(i, tf)| (i, tf * model.idf[i])).collect();
    pairs.sort_by_key(|p| p.0);
    let norm = pairs.iter().map(|p| p.1 * p.1).sum::<f64>().sqrt();
    if norm > 0.0 {
        for p in &mut pairs {
            p.1 /= norm;
        }
    }
    let (indices, values) = pairs.into_iter().unzip();
    SparseVector {
        indices,
        values,
        dim: model.dim(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectorize::tokenize;
    use proptest::prelude::*;

    fn seq(tokens: &[&str]) -> TokenSeq {
        tokens.iter().copied().collect()
    }

    #[test]
    fn smoothed_idf() {
        let m = tfidf_fit(&[seq(&["a", "b"]), seq(&["a", "c"])]).unwrap();
        assert_eq!(m.vocabulary.get("a"), Some(&0));
        assert_eq!(m.vocabulary.get("c"), Some(&2));
        assert!((m.idf[0] - 1.0).abs() < 1e-15);
        assert!((m.idf[1] - ((1.5f64).ln() + 1.0)).abs() < 1e-15);
        assert!((m.idf[1] - 1.4055).abs() < 5e-5);
        assert_eq!(m.idf[1], m.idf[2]);

        let single = tfidf_fit(&[seq(&["a"])]).unwrap();
        assert_eq!(single.idf, vec![1.0]);
        assert!(matches!(tfidf_fit(&[]), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn transform_example() {
        let m = tfidf_fit(&[seq(&["a", "b"]), seq(&["a", "c"])]).unwrap();
        let v = m.transform(&seq(&["a", "b"]));
        assert_eq!(v.indices, vec![0, 1]);
        assert!((v.values[0] - 0.5797).abs() < 5e-5);
        assert!((v.values[1] - 0.8148).abs() < 5e-5);
        assert_eq!(m.transform(&seq(&[])).nnz(), 0);
        assert_eq!(m.transform(&seq(&["zzz"])).nnz(), 0);
    }

    proptest! {
        #[test]
        fn unit_norm_or_zero(docs in proptest::collection::vec("[a-e ]{0,20}", 1..6), query in "[a-h ]{0,20}") {
            let corpus: Vec<TokenSeq> = docs.iter().map(|d| tokenize(d)).collect();
            let m = tfidf_fit(&corpus).unwrap();
            let v = m.transform(&tokenize(&query));
            let has_known = tokenize(&query).iter().any(|t| m.vocabulary.contains_key(t));
            if has_known {
                prop_assert!((v.norm() - 1.0).abs() < 1e-9);
            } else {
                prop_assert_eq!(v.norm(), 0.0);
            }
        }

        #[test]
        fn idf_positive_and_monotone(docs in proptest::collection::vec("[a-f ]{0,20}", 1..8)) {
            let corpus: Vec<TokenSeq> = docs.iter().map(|d| tokenize(d)).collect();
            let m = tfidf_fit(&corpus).unwrap();
            let df = |t: &str| corpus.iter().filter(|d| d.iter().any(|x| x == t)).count();
            for (a, &ia) in &m.vocabulary {
                prop_assert!(m.idf[ia] > 0.0);
                for (b, &ib) in &m.vocabulary {
                    if df(a) <= df(b) {
                        prop_assert!(m.idf[ia] >= m.idf[ib]);
                    }
                }
            }
        }
    }
}
