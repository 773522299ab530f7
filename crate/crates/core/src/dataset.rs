//! LIAR-format ingestion, binary label collapse and the stacking split.
//!
//! A LIAR file is UTF-8, tab separated and has no header. Only the first
//! three columns (id, label, statement) are read; speaker, party, venue and
//! credit-history columns are ignored.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The six LIAR truthfulness ratings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RawLabel {
    PantsFire,
    False,
    BarelyTrue,
    HalfTrue,
    MostlyTrue,
    True,
}

impl RawLabel {
    pub const ALL: [RawLabel; 6] = [
        RawLabel::PantsFire,
        RawLabel::False,
        RawLabel::BarelyTrue,
        RawLabel::HalfTrue,
        RawLabel::MostlyTrue,
        RawLabel::True,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RawLabel::PantsFire => "pants-fire",
            RawLabel::False => "false",
            RawLabel::BarelyTrue => "barely-true",
            RawLabel::HalfTrue => "half-true",
            RawLabel::MostlyTrue => "mostly-true",
            RawLabel::True => "true",
        }
    }
}

impl fmt::Display for RawLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RawLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        RawLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == lower)
            .ok_or_else(|| format!("unknown label {s:?}"))
    }
}

/// Binary target after collapsing the six ratings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BinaryLabel {
    Fake,
    True,
}

impl BinaryLabel {
    /// `0` for FAKE, `1` for TRUE.
    pub fn index(self) -> usize {
        match self {
            BinaryLabel::Fake => 0,
            BinaryLabel::True => 1,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.index() as f64
    }

    pub fn from_bool(positive: bool) -> Self {
        if positive {
            BinaryLabel::True
        } else {
            BinaryLabel::Fake
        }
    }

    /// Thresholds a positive-class score; a score of exactly 0.5 maps to TRUE.
    pub fn from_score(score: f64) -> Self {
        Self::from_bool(score >= 0.5)
    }
}

impl fmt::Display for BinaryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BinaryLabel::Fake => "FAKE",
            BinaryLabel::True => "TRUE",
        })
    }
}

/// {half-true, mostly-true, true} are TRUE, the rest FAKE.
pub fn collapse_label(raw: RawLabel) -> BinaryLabel {
    match raw {
        RawLabel::PantsFire | RawLabel::False | RawLabel::BarelyTrue => BinaryLabel::Fake,
        RawLabel::HalfTrue | RawLabel::MostlyTrue | RawLabel::True => BinaryLabel::True,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statement {
    pub id: String,
    pub raw_label: RawLabel,
    pub binary_label: BinaryLabel,
    pub text: String,
}

impl Statement {
    pub fn new(id: impl Into<String>, raw_label: RawLabel, text: impl Into<String>) -> Self {
        Statement {
            id: id.into(),
            raw_label,
            binary_label: collapse_label(raw_label),
            text: text.into(),
        }
    }
}

/// Reads one LIAR TSV file.
pub fn parse_liar_tsv(path: impl AsRef<Path>) -> Result<Vec<Statement>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes)
        .map_err(|e| Error::io(path, std::io::Error::new(std::io::ErrorKind::InvalidData, e)))?;
    parse_liar_str(&text, &path.display().to_string())
}

/// Parses LIAR rows from memory. `source` is only used in error messages.
///
/// Rows whose statement is blank are dropped (and counted in the log); an
/// unknown label is a hard error.
pub fn parse_liar_str(contents: &str, source: &str) -> Result<Vec<Statement>> {
    let mut out = Vec::new();
    let mut dropped = 0usize;
    for (i, line) in contents.lines().enumerate() {
        let line_no = i + 1;
        let mut cols = line.split('\t');
        let (id, label, text) = match (cols.next(), cols.next(), cols.next()) {
            (Some(id), Some(label), Some(text)) => (id, label, text),
            _ => {
                return Err(Error::MalformedRow {
                    path: source.to_string(),
                    line: line_no,
                    reason: format!(
                        "expected at least 3 tab-separated columns, found {}",
                        line.split('\t').count()
                    ),
                })
            }
        };
        let raw_label = label.parse::<RawLabel>().map_err(|reason| Error::MalformedRow {
            path: source.to_string(),
            line: line_no,
            reason,
        })?;
        if text.trim().is_empty() {
            dropped += 1;
            continue;
        }
        out.push(Statement::new(id, raw_label, text));
    }
    if dropped > 0 {
        log::warn!("{source}: dropped {dropped} row(s) with empty statement text");
    }
    Ok(out)
}

/// Train, test and validation statements, each in source-file order.
#[derive(Debug, Clone, Default)]
pub struct SplitSet {
    pub train: Vec<Statement>,
    pub test: Vec<Statement>,
    pub validation: Vec<Statement>,
}

pub fn load_splits(
    train_path: impl AsRef<Path>,
    test_path: impl AsRef<Path>,
    valid_path: impl AsRef<Path>,
) -> Result<SplitSet> {
    Ok(SplitSet {
        train: parse_liar_tsv(train_path)?,
        test: parse_liar_tsv(test_path)?,
        validation: parse_liar_tsv(valid_path)?,
    })
}

/// Loads `train.tsv`, `test.tsv` and `valid.tsv` from a LIAR directory.
pub fn load_liar_dir(dir: impl AsRef<Path>) -> Result<SplitSet> {
    let dir = dir.as_ref();
    load_splits(dir.join("train.tsv"), dir.join("test.tsv"), dir.join("valid.tsv"))
}

/// Base (first-level) and meta (hold-out) portions of a training set.
#[derive(Debug, Clone)]
pub struct StackSplit {
    pub base_portion: Vec<Statement>,
    pub meta_portion: Vec<Statement>,
    pub seed: u64,
}

pub const DEFAULT_STACK_RATIO: f64 = 0.6;

/// Stratified, seeded hold-out split.
///
/// The base portion has `round(ratio * n)` rows (round half up). That total
/// is distributed over the two classes by largest remainder, so each class
/// lands as close to `ratio` as rounding allows. Both portions keep the
/// source order of `train`.
pub fn stack_split(train: &[Statement], ratio: f64, seed: u64) -> Result<StackSplit> {
    let n = train.len();
    if n < 2 {
        return Err(Error::DegenerateSplit(format!("need at least 2 statements, got {n}")));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::DegenerateSplit(format!("ratio {ratio} is outside (0, 1)")));
    }

    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, s) in train.iter().enumerate() {
        by_class[s.binary_label.index()].push(i);
    }

    let total_base = round_half_up(ratio * n as f64);
    let quotas = [ratio * by_class[0].len() as f64, ratio * by_class[1].len() as f64];
    let mut take = [quotas[0].floor() as usize, quotas[1].floor() as usize];
    let mut remaining = total_base.saturating_sub(take[0] + take[1]);
    // Largest remainder first; FAKE wins ties.
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for c in order {
        if remaining > 0 && take[c] < by_class[c].len() {
            take[c] += 1;
            remaining -= 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_base = vec![false; n];
    for (class, idx) in by_class.iter_mut().enumerate() {
        idx.shuffle(&mut rng);
        for &i in idx.iter().take(take[class]) {
            in_base[i] = true;
        }
    }

    let (base, meta): (Vec<_>, Vec<_>) = train.iter().zip(&in_base).partition(|(_, &b)| b);
    let base_portion: Vec<Statement> = base.into_iter().map(|(s, _)| s.clone()).collect();
    let meta_portion: Vec<Statement> = meta.into_iter().map(|(s, _)| s.clone()).collect();

    for (name, part) in [("base", &base_portion), ("meta", &meta_portion)] {
        if part.is_empty() {
            return Err(Error::DegenerateSplit(format!("{name} portion would be empty")));
        }
        if !has_both_classes(part) {
            return Err(Error::DegenerateSplit(format!(
                "{name} portion lacks one of the classes"
            )));
        }
    }

    Ok(StackSplit {
        base_portion,
        meta_portion,
        seed,
    })
}

pub(crate) fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor().max(0.0) as usize
}

pub(crate) fn has_both_classes(statements: &[Statement]) -> bool {
    let mut seen = [false; 2];
    for s in statements {
        seen[s.binary_label.index()] = true;
    }
    seen[0] && seen[1]
}

/// Per-class counts `[FAKE, TRUE]`.
pub fn class_counts(statements: &[Statement]) -> [usize; 2] {
    let mut counts = [0; 2];
    for s in statements {
        counts[s.binary_label.index()] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    const FIRST_LIAR_ROW: &str = "2635.json\tfalse\tSays the Annies List political group supports third-trimester abortions on demand.\tabortion\tdwayne-bohac\tState representative\tTexas\trepublican\t0\t1\t0\t0\t0\ta mailer";

    fn labelled(fake: usize, truth: usize) -> Vec<Statement> {
        let mut v = Vec::new();
        for i in 0..fake {
            v.push(Statement::new(format!("f{i}"), RawLabel::False, "x"));
        }
        for i in 0..truth {
            v.push(Statement::new(format!("t{i}"), RawLabel::True, "x"));
        }
        v
    }

    #[test]
    fn parses_first_public_row() {
        let rows = parse_liar_str(FIRST_LIAR_ROW, "train.tsv").unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].id, "2635.json");
        assert_eq!(rows[0].raw_label, RawLabel::False);
        assert_eq!(rows[0].binary_label, BinaryLabel::Fake);
        assert_eq!(
            rows[0].text,
            "Says the Annies List political group supports third-trimester abortions on demand."
        );
    }

    #[test]
    fn label_parse_is_case_insensitive() {
        let rows = parse_liar_str("1\tTRUE\tx\n2\tHalf-True\ty", "t").unwrap();
        assert_eq!(rows[0].raw_label, RawLabel::True);
        assert_eq!(rows[1].raw_label, RawLabel::HalfTrue);
    }

    #[test]
    fn unknown_label_reports_line() {
        let err = parse_liar_str("1\ttrue\tok\n2\tmostly-false\tbad", "t").unwrap_err();
        match err {
            Error::MalformedRow { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn short_row_is_malformed() {
        assert!(matches!(
            parse_liar_str("1\ttrue", "t"),
            Err(Error::MalformedRow { line: 1, .. })
        ));
    }

    #[test]
    fn empty_statements_are_dropped() {
        let rows = parse_liar_str("1\ttrue\t   \n2\tfalse\tkept", "t").unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].id, "2");
    }

    #[test]
    fn collapse_rule() {
        assert_eq!(collapse_label(RawLabel::HalfTrue), BinaryLabel::True);
        assert_eq!(collapse_label(RawLabel::MostlyTrue), BinaryLabel::True);
        assert_eq!(collapse_label(RawLabel::True), BinaryLabel::True);
        assert_eq!(collapse_label(RawLabel::PantsFire), BinaryLabel::Fake);
        assert_eq!(collapse_label(RawLabel::False), BinaryLabel::Fake);
        assert_eq!(collapse_label(RawLabel::BarelyTrue), BinaryLabel::Fake);
    }

    #[test]
    fn missing_file_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("train.tsv"), "1\ttrue\tx\n").unwrap();
        std::fs::write(dir.path().join("valid.tsv"), "1\ttrue\tx\n").unwrap();
        assert!(matches!(load_liar_dir(dir.path()), Err(Error::Io { .. })));
    }

    #[test]
    fn three_files_load() {
        let dir = tempfile::tempdir().unwrap();
        for f in ["train.tsv", "test.tsv", "valid.tsv"] {
            std::fs::write(dir.path().join(f), "1\ttrue\tx\n2\tfalse\ty\n").unwrap();
        }
        let s = load_liar_dir(dir.path()).unwrap();
        assert_eq!((s.train.len(), s.test.len(), s.validation.len()), (2, 2, 2));
    }

    #[test]
    fn ten_rows_split_six_four() {
        let data = labelled(5, 5);
        let s = stack_split(&data, 0.6, 1).unwrap();
        assert_eq!(s.base_portion.len(), 6);
        assert_eq!(s.meta_portion.len(), 4);
    }

    #[test]
    fn per_class_rounding() {
        let data = labelled(6, 4);
        let s = stack_split(&data, 0.6, 9).unwrap();
        assert_eq!(class_counts(&s.base_portion), [4, 2]);
        assert_eq!(class_counts(&s.meta_portion), [2, 2]);
    }

    #[test]
    fn same_seed_same_partition() {
        let data = labelled(30, 20);
        let a = stack_split(&data, 0.6, 42).unwrap();
        let b = stack_split(&data, 0.6, 42).unwrap();
        assert_eq!(a.base_portion, b.base_portion);
        assert_eq!(a.meta_portion, b.meta_portion);
    }

    #[test]
    fn degenerate_splits() {
        assert!(matches!(
            stack_split(&labelled(1, 0), 0.6, 0),
            Err(Error::DegenerateSplit(_))
        ));
        // 2 rows: the meta portion cannot hold both classes.
        assert!(matches!(
            stack_split(&labelled(1, 1), 0.6, 0),
            Err(Error::DegenerateSplit(_))
        ));
        assert!(matches!(
            stack_split(&labelled(5, 0), 0.6, 0),
            Err(Error::DegenerateSplit(_))
        ));
        assert!(matches!(
            stack_split(&labelled(5, 5), 1.0, 0),
            Err(Error::DegenerateSplit(_))
        ));
    }

    proptest! {
        #[test]
        fn split_is_a_partition(fake in 5usize..40, truth in 5usize..40, seed in any::<u64>(), ratio in 0.3f64..0.7) {
            let data = labelled(fake, truth);
            let s = stack_split(&data, ratio, seed).unwrap();
            let base: HashSet<_> = s.base_portion.iter().map(|s| s.id.clone()).collect();
            let meta: HashSet<_> = s.meta_portion.iter().map(|s| s.id.clone()).collect();
            prop_assert!(base.is_disjoint(&meta));
            prop_assert_eq!(base.len() + meta.len(), data.len());
            prop_assert_eq!(base.len(), round_half_up(ratio * data.len() as f64));
            // source order preserved
            let pos = |id: &str| data.iter().position(|d| d.id == id).unwrap();
            prop_assert!(s.base_portion.windows(2).all(|w| pos(&w[0].id) < pos(&w[1].id)));
            prop_assert!(s.meta_portion.windows(2).all(|w| pos(&w[0].id) < pos(&w[1].id)));
        }
    }
}
