//! Text to vectors: tokenizer, TFIDF and PV-DM paragraph vectors.

mod doc2vec;
mod tfidf;
mod tokenize;

pub use doc2vec::{d2v_infer, d2v_train, negative_sampling_step, Doc2VecConfig, Doc2VecModel, PvDmLoss};
pub use tfidf::{tfidf_fit, tfidf_transform, TfidfModel};
pub use tokenize::{tokenize, TokenSeq};
