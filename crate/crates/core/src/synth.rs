//! Deterministic synthetic statements in LIAR layout.
//!
//! Used by tests, benches and the demo pipeline when the real corpus is not
//! at hand. Labels are signalled by weakly label-correlated cue words and by
//! exclamation marks, so text features beat the majority baseline without
//! making the task trivial.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{RawLabel, SplitSet, Statement};
use crate::{Error, Result};

const NEUTRAL: &[&str] = &[
    "the",
    "state",
    "budget",
    "tax",
    "plan",
    "jobs",
    "county",
    "school",
    "health",
    "care",
    "bill",
    "senate",
    "governor",
    "voters",
    "city",
    "percent",
    "million",
    "year",
    "law",
    "federal",
    "workers",
    "families",
    "program",
    "spending",
    "energy",
    "border",
    "debt",
    "economy",
    "wages",
    "police",
    "crime",
    "water",
    "roads",
    "housing",
    "veterans",
    "students",
    "immigration",
    "trade",
    "medicare",
    "election",
    "in",
    "of",
    "and",
    "for",
    "on",
    "has",
    "was",
    "will",
    "than",
    "more",
];

const FAKE_CUES: &[&str] = &[
    "never",
    "always",
    "every",
    "destroy",
    "secret",
    "banned",
    "invented",
    "hoax",
    "socialist",
    "disaster",
    "illegal",
    "worst",
    "billions",
    "nobody",
    "totally",
    "scheme",
    "plot",
    "confiscate",
    "abolish",
    "record",
];

const TRUE_CUES: &[&str] = &[
    "increased",
    "reduced",
    "average",
    "according",
    "report",
    "since",
    "roughly",
    "about",
    "rate",
    "data",
    "survey",
    "census",
    "fiscal",
    "estimated",
    "compared",
    "nearly",
    "median",
    "analysis",
    "decline",
    "grew",
];

/// Fraction of statements labelled TRUE.
pub const TRUE_FRACTION: f64 = 0.56;

fn sentence(rng: &mut ChaCha8Rng, truthful: bool) -> String {
    let len = rng.gen_range(8..=24);
    let (own, other) = if truthful {
        (TRUE_CUES, FAKE_CUES)
    } else {
        (FAKE_CUES, TRUE_CUES)
    };
    let mut words: Vec<&str> = Vec::with_capacity(len + 1);
    if rng.gen_bool(0.3) {
        words.push("Says");
    }
    for _ in 0..len {
        let w = if rng.gen_bool(0.22) {
            let pool = if rng.gen_bool(0.7) { own } else { other };
            pool.choose(rng).expect("non-empty pool")
        } else {
            NEUTRAL.choose(rng).expect("non-empty pool")
        };
        words.push(w);
    }
    let mut text = String::new();
    for (i, w) in words.iter().enumerate() {
        if i > 0 {
            text.push_str(if rng.gen_bool(0.08) { ", " } else { " " });
        }
        text.push_str(w);
    }
    if rng.gen_bool(0.4) {
        let _ = write!(text, " {}", rng.gen_range(2..=99));
        text.push_str(if rng.gen_bool(0.5) { " percent" } else { " million" });
    }
    let bang = if truthful { 0.05 } else { 0.25 };
    text.push(if rng.gen_bool(bang) { '!' } else { '.' });
    let mut chars = text.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => text,
    }
}

/// `n` statements with distinct texts. Same `(n, seed)` gives the same
/// corpus.
pub fn corpus(n: usize, seed: u64) -> Vec<Statement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let truthful = rng.gen_bool(TRUE_FRACTION);
        let text = sentence(&mut rng, truthful);
        if !seen.insert(text.clone()) {
            continue;
        }
        let side = if truthful {
            [RawLabel::HalfTrue, RawLabel::MostlyTrue, RawLabel::True]
        } else {
            [RawLabel::PantsFire, RawLabel::False, RawLabel::BarelyTrue]
        };
        let raw = *side.choose(&mut rng).expect("three labels");
        out.push(Statement::new(format!("{}-{}.json", seed, out.len()), raw, text));
    }
    out
}

/// Renders statements as LIAR TSV rows, padded to the 14 public columns.
pub fn liar_tsv(statements: &[Statement]) -> String {
    let mut s = String::new();
    for st in statements {
        let _ = write!(s, "{}\t{}\t{}", st.id, st.raw_label.as_str(), st.text);
        s.push_str("\tsubject\tspeaker\tjob\tstate\tparty\t0\t0\t0\t0\t0\tcontext\n");
    }
    s
}

fn split_seeds(seed: u64) -> [u64; 3] {
    [seed, seed.wrapping_add(1_000_003), seed.wrapping_add(2_000_006)]
}

/// In-memory counterpart of [`write_liar_dir`]: the same statements,
/// without the round trip through TSV files.
pub fn splits(n_train: usize, n_test: usize, n_valid: usize, seed: u64) -> SplitSet {
    let [a, b, c] = split_seeds(seed);
    SplitSet {
        train: corpus(n_train, a),
        test: corpus(n_test, b),
        validation: corpus(n_valid, c),
    }
}

/// Writes `train.tsv`, `test.tsv` and `valid.tsv` under `dir`. The three
/// files use different seeds derived from `seed`.
pub fn write_liar_dir(dir: impl AsRef<Path>, n_train: usize, n_test: usize, n_valid: usize, seed: u64) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let [a, b, c] = split_seeds(seed);
    for (name, n, s) in [
        ("train.tsv", n_train, a),
        ("test.tsv", n_test, b),
        ("valid.tsv", n_valid, c),
    ] {
        let path = dir.join(name);
        fs::write(&path, liar_tsv(&corpus(n, s))).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{load_liar_dir, parse_liar_str, BinaryLabel};

    #[test]
    fn deterministic_and_distinct() {
        let a = corpus(300, 1);
        assert_eq!(a, corpus(300, 1));
        let texts: HashSet<_> = a.iter().map(|s| &s.text).collect();
        assert_eq!(texts.len(), 300);
        let t = a.iter().filter(|s| s.binary_label == BinaryLabel::True).count();
        assert!((120..=210).contains(&t));
    }

    #[test]
    fn round_trips_through_the_parser() {
        let a = corpus(50, 2);
        assert_eq!(parse_liar_str(&liar_tsv(&a), "synthetic").unwrap(), a);
    }

    #[test]
    fn writes_a_loadable_directory() {
        let dir = tempfile::tempdir().unwrap();
        write_liar_dir(dir.path(), 30, 10, 12, 3).unwrap();
        let s = load_liar_dir(dir.path()).unwrap();
        assert_eq!((s.train.len(), s.test.len(), s.validation.len()), (30, 10, 12));
        let mem = splits(30, 10, 12, 3);
        assert_eq!((s.train, s.test, s.validation), (mem.train, mem.test, mem.validation));
    }
}
