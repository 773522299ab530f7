//! The four domain-agnostic linguistic features and their scaler.
//!
//! Feature order is fixed: `[readability, count_punc, sentiment_score,
//! count_word]`.

use std::collections::HashMap;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// ASCII punctuation, the same 32 characters as Python's `string.punctuation`.
pub const PUNCTUATION: &str = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

const SENTENCE_TERMINATORS: [char; 3] = ['.', '!', '?'];

/// Normalisation constant of the compound sentiment score.
pub const SENTIMENT_ALPHA: f64 = 15.0;

/// Factor applied to the lexicon hit that follows a negation token.
pub const NEGATION_FACTOR: f64 = -0.8;

pub const LEXICON_SCHEMA_VERSION: u32 = 1;

static BUNDLED_LEXICON_TSV: &str = include_str!("../data/sentiment_lexicon.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinguisticFeatures {
    pub readability: f64,
    pub count_punc: u32,
    pub sentiment_score: f64,
    pub count_word: u32,
}

impl LinguisticFeatures {
    pub const NAMES: [&'static str; 4] = ["readability", "count_punc", "sentiment_score", "count_word"];

    pub fn to_array(&self) -> [f64; 4] {
        [
            self.readability,
            f64::from(self.count_punc),
            self.sentiment_score,
            f64::from(self.count_word),
        ]
    }
}

/// Number of maximal non-whitespace runs.
pub fn count_word(text: &str) -> u32 {
    text.split_whitespace().count() as u32
}

pub fn count_punc(text: &str) -> u32 {
    text.chars().filter(|c| PUNCTUATION.contains(*c)).count() as u32
}

/// Number of maximal runs of `.`, `!` or `?`, at least 1.
pub fn sentence_count(text: &str) -> u32 {
    let mut runs = 0;
    let mut in_run = false;
    for c in text.chars() {
        let term = SENTENCE_TERMINATORS.contains(&c);
        if term && !in_run {
            runs += 1;
        }
        in_run = term;
    }
    runs.max(1)
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Vowel-group syllable estimate for one whitespace-delimited word.
///
/// Non-letters are ignored. A trailing silent `e` is dropped for words longer
/// than three letters, except in a consonant + `le` ending ("table"). Never
/// less than 1.
pub fn syllable_count(word: &str) -> u32 {
    let letters: Vec<char> = word
        .chars()
        .filter(|c| c.is_alphabetic())
        .flat_map(char::to_lowercase)
        .collect();
    let mut groups = 0u32;
    let mut prev_vowel = false;
    for &c in &letters {
        let v = is_vowel(c);
        if v && !prev_vowel {
            groups += 1;
        }
        prev_vowel = v;
    }
    let n = letters.len();
    if n > 3 && letters[n - 1] == 'e' {
        let consonant_le = letters[n - 2] == 'l' && !is_vowel(letters[n - 3]);
        if !consonant_le && !is_vowel(letters[n - 2]) {
            groups = groups.saturating_sub(1);
        }
    }
    groups.max(1)
}

/// Flesch Reading Ease. Not clamped; fails on text without words.
pub fn readability(text: &str) -> Result<f64> {
    let words = count_word(text);
    if words == 0 {
        return Err(Error::EmptyText);
    }
    let sentences = sentence_count(text);
    let syllables: u32 = text.split_whitespace().map(syllable_count).sum();
    let words = f64::from(words);
    Ok(206.835 - 1.015 * (words / f64::from(sentences)) - 84.6 * (f64::from(syllables) / words))
}

/// Token → valence table.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    valences: HashMap<String, f64>,
}

impl Lexicon {
    /// Parses the lexicon format: a `schema_version<TAB>N` header line, then
    /// one `token<TAB>valence` entry per line. Lines starting with `#` and
    /// blank lines are skipped; extra columns are ignored.
    pub fn parse(contents: &str) -> Result<Self> {
        let mut lines = contents.lines().enumerate();
        let header = lines
            .next()
            .map(|(_, l)| l)
            .ok_or_else(|| Error::Lexicon("missing schema header".into()))?;
        let version = header
            .strip_prefix("schema_version\t")
            .and_then(|v| v.trim().parse::<u32>().ok())
            .ok_or_else(|| Error::Lexicon(format!("bad schema header {header:?}")))?;
        if version != LEXICON_SCHEMA_VERSION {
            return Err(Error::Lexicon(format!("unsupported schema version {version}")));
        }
        let mut valences = HashMap::new();
        for (i, line) in lines {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            let (token, value) = match (cols.next(), cols.next()) {
                (Some(t), Some(v)) => (t, v),
                _ => return Err(Error::Lexicon(format!("line {}: expected token<TAB>valence", i + 1))),
            };
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Lexicon(format!("line {}: bad valence {value:?}", i + 1)))?;
            if !value.is_finite() {
                return Err(Error::Lexicon(format!("line {}: non-finite valence", i + 1)));
            }
            valences.insert(token.to_lowercase(), value);
        }
        Ok(Lexicon { valences })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// The lexicon shipped with the crate.
    pub fn bundled() -> &'static Lexicon {
        static LEXICON: OnceLock<Lexicon> = OnceLock::new();
        LEXICON.get_or_init(|| Lexicon::parse(BUNDLED_LEXICON_TSV).expect("bundled lexicon is valid"))
    }

    pub fn valence(&self, token: &str) -> Option<f64> {
        self.valences.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.valences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valences.is_empty()
    }

    /// Compound score in [-1, 1].
    ///
    /// Tokens are whitespace runs, lowercased. A token is looked up as-is
    /// (emoticons) and then with surrounding punctuation stripped. `not`,
    /// `no`, `never` and `n't` contractions are negators, never lexicon hits;
    /// one pending negation scales the next hit by [`NEGATION_FACTOR`].
    pub fn compound(&self, text: &str) -> f64 {
        let mut sum = 0.0;
        let mut negate = false;
        for raw in text.split_whitespace() {
            let lower = raw.to_lowercase();
            let stripped = lower.trim_matches(|c: char| PUNCTUATION.contains(c) || c == '\u{2019}');
            if is_negator(stripped) {
                negate = true;
                continue;
            }
            let hit = self.valence(&lower).or_else(|| self.valence(stripped));
            if let Some(v) = hit {
                sum += if negate { NEGATION_FACTOR * v } else { v };
                negate = false;
            }
        }
        normalize_compound(sum)
    }
}

fn is_negator(token: &str) -> bool {
    matches!(token, "not" | "no" | "never") || token.ends_with("n't") || token.ends_with("n\u{2019}t")
}

/// `s / sqrt(s^2 + 15)`, clamped into [-1, 1].
pub fn normalize_compound(sum: f64) -> f64 {
    if sum == 0.0 {
        return 0.0;
    }
    (sum / (sum * sum + SENTIMENT_ALPHA).sqrt()).clamp(-1.0, 1.0)
}

/// Compound sentiment using the bundled lexicon.
pub fn sentiment_score(text: &str) -> f64 {
    Lexicon::bundled().compound(text)
}

/// All four features. Total: readability of wordless text is 0.
pub fn extract(text: &str) -> LinguisticFeatures {
    LinguisticFeatures {
        readability: readability(text).unwrap_or(0.0),
        count_punc: count_punc(text),
        sentiment_score: sentiment_score(text),
        count_word: count_word(text),
    }
}

/// Per-column standardisation fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub means: Vec<f64>,
    pub stddevs: Vec<f64>,
}

impl FeatureScaler {
    /// Population mean and standard deviation per column; a zero deviation
    /// is replaced by 1.
    pub fn fit<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: rows.len(),
            });
        }
        let width = rows[0].as_ref().len();
        let n = rows.len() as f64;
        let mut means = vec![0.0; width];
        for r in rows {
            let r = r.as_ref();
            if r.len() != width {
                return Err(Error::DimensionMismatch {
                    expected: width,
                    got: r.len(),
                });
            }
            for (m, x) in means.iter_mut().zip(r) {
                *m += x;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut vars = vec![0.0; width];
        for r in rows {
            for ((v, x), m) in vars.iter_mut().zip(r.as_ref()).zip(&means) {
                *v += (x - m) * (x - m);
            }
        }
        // A constant column can still pick up a rounding-level deviation from
        // its mean; treat anything at that level as zero.
        let stddevs = vars
            .into_iter()
            .zip(&means)
            .map(|(v, m)| {
                let sd = (v / n).sqrt();
                if sd > 1e-12 * m.abs().max(1.0) && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(FeatureScaler { means, stddevs })
    }

    pub fn width(&self) -> usize {
        self.means.len()
    }

    pub fn apply(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.width() {
            return Err(Error::DimensionMismatch {
                expected: self.width(),
                got: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(self.means.iter().zip(&self.stddevs))
            .map(|(x, (m, s))| (x - m) / s)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn word_counts() {
        assert_eq!(count_word("Hello world"), 2);
        assert_eq!(count_word(""), 0);
        assert_eq!(count_word("a  b\tc"), 3);
    }

    #[test]
    fn punctuation_counts() {
        assert_eq!(PUNCTUATION.chars().count(), 32);
        assert_eq!(count_punc("Hello, world!"), 2);
        assert_eq!(count_punc(""), 0);
        assert_eq!(
            count_punc("Says the Annies List political group supports third-trimester abortions on demand."),
            2
        );
    }

    #[test]
    fn syllables() {
        assert_eq!(syllable_count("The"), 1);
        assert_eq!(syllable_count("cat"), 1);
        assert_eq!(syllable_count("make"), 1);
        assert_eq!(syllable_count("table"), 2);
        assert_eq!(syllable_count("Unbelievable."), 5);
        assert_eq!(syllable_count("2020"), 1);
        assert_eq!(syllable_count("rhythm"), 1);
    }

    #[test]
    fn sentences() {
        assert_eq!(sentence_count("No terminator"), 1);
        assert_eq!(sentence_count("One. Two! Three?"), 3);
        assert_eq!(sentence_count("Wait... what?!"), 2);
    }

    #[test]
    fn flesch_reading_ease() {
        // 1 sentence, 3 words, 3 syllables
        assert!(close(readability("The cat sat.").unwrap(), 119.19, 1e-9));
        // 1 sentence, 1 word, 5 syllables: 206.835 - 1.015 - 423
        assert!(close(readability("Unbelievable.").unwrap(), -217.18, 1e-9));
        assert!(matches!(readability(""), Err(Error::EmptyText)));
        assert!(matches!(readability(" \t"), Err(Error::EmptyText)));
    }

    #[test]
    fn sentiment_examples() {
        assert_eq!(sentiment_score(""), 0.0);
        assert_eq!(Lexicon::bundled().valence("good"), Some(1.9));
        let good = 1.9 / (1.9f64 * 1.9 + 15.0).sqrt();
        assert!(close(sentiment_score("good"), good, 1e-12));
        assert!(close(good, 0.4404, 5e-5));
        let negated = -0.8 * 1.9 / ((0.8f64 * 1.9).powi(2) + 15.0).sqrt();
        assert!(close(sentiment_score("not good"), negated, 1e-12));
        assert!(close(negated, -0.36533, 5e-6));
        assert!(close(sentiment_score("isn't good"), negated, 1e-12));
    }

    #[test]
    fn negation_waits_for_next_hit() {
        assert_eq!(sentiment_score("not the"), 0.0);
        assert!(close(
            sentiment_score("never the good"),
            sentiment_score("not good"),
            1e-12
        ));
    }

    #[test]
    fn lexicon_parse_errors() {
        assert!(Lexicon::parse("").is_err());
        assert!(Lexicon::parse("schema_version\t2\n").is_err());
        assert!(Lexicon::parse("schema_version\t1\nword\n").is_err());
        let l = Lexicon::parse("schema_version\t1\n# c\nYay\t2.5\n").unwrap();
        assert_eq!(l.valence("yay"), Some(2.5));
    }

    #[test]
    fn extract_degenerate() {
        let f = extract("");
        assert_eq!(f.to_array(), [0.0, 0.0, 0.0, 0.0]);
        let f = extract("Hello, world!");
        assert_eq!(f.count_punc, 2);
        assert_eq!(f.count_word, 2);
        assert_eq!(f.readability, readability("Hello, world!").unwrap());
    }

    #[test]
    fn scaler_examples() {
        let rows = vec![vec![0.0, 0.0, 0.0, 0.0], vec![2.0, 2.0, 0.0, 2.0]];
        let s = FeatureScaler::fit(&rows).unwrap();
        assert_eq!(s.means, vec![1.0, 1.0, 0.0, 1.0]);
        assert_eq!(s.stddevs, vec![1.0, 1.0, 1.0, 1.0]);
        assert_eq!(s.apply(&[1.0, 1.0, 0.0, 1.0]).unwrap(), vec![0.0; 4]);
        // constant column
        let c = FeatureScaler::fit(&[vec![3.0], vec![3.0], vec![3.0]]).unwrap();
        assert_eq!(c.apply(&[3.0]).unwrap(), vec![0.0]);
        assert!(matches!(
            FeatureScaler::fit(&[vec![1.0]]),
            Err(Error::InsufficientData { needed: 2, got: 1 })
        ));
        assert!(s.apply(&[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn extract_is_total_and_finite(text in "\\PC*") {
            let f = extract(&text);
            prop_assert!(f.to_array().iter().all(|x| x.is_finite()));
            prop_assert!((-1.0..=1.0).contains(&f.sentiment_score));
        }

        #[test]
        fn sentiment_bounded(words in proptest::collection::vec("(good|bad|great|not|terrible|love|hate|the|no)", 0..60)) {
            let s = sentiment_score(&words.join(" "));
            prop_assert!((-1.0..=1.0).contains(&s));
        }

        #[test]
        fn counts_ignore_outer_whitespace(text in "[a-z,.! ]{0,40}", pad in "[ \t\n]{0,5}") {
            let padded = format!("{pad}{text}{pad}");
            prop_assert_eq!(count_word(&padded), count_word(&text));
            prop_assert_eq!(count_punc(&padded), count_punc(&text));
        }

        #[test]
        fn readability_ignores_word_order(mut words in proptest::collection::vec("[a-z]{1,10}", 1..15), seed in any::<u64>()) {
            let a = format!("{}.", words.join(" "));
            let k = (seed as usize) % words.len();
            words.rotate_left(k);
            let b = format!("{}.", words.join(" "));
            prop_assert!((readability(&a).unwrap() - readability(&b).unwrap()).abs() < 1e-9);
        }

        #[test]
        fn scaled_columns_standardized(rows in proptest::collection::vec(proptest::collection::vec(-100.0f64..100.0, 4), 2..30)) {
            let s = FeatureScaler::fit(&rows).unwrap();
            let scaled: Vec<Vec<f64>> = rows.iter().map(|r| s.apply(r).unwrap()).collect();
            let n = rows.len() as f64;
            for c in 0..4 {
                let mean: f64 = scaled.iter().map(|r| r[c]).sum::<f64>() / n;
                prop_assert!(mean.abs() < 1e-9);
                if s.stddevs[c] != 1.0 || rows.iter().any(|r| r[c] != rows[0][c]) {
                    let var: f64 = scaled.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / n;
                    prop_assert!((var.sqrt() - 1.0).abs() < 1e-9);
                }
            }
        }
    }
}
