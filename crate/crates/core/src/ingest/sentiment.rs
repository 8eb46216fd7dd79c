//! Lexicon-based sentiment: valence sum with negation dampening, squashed
//! into [-1, 1].

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUNDLED_LEXICON: &str = include_str!("../../data/lexicon.tsv");

/// Multiplier applied to a valence preceded by a negation word.
pub const NEGATION_SCALAR: f64 = -0.74;
/// How many preceding tokens are searched for a negation word.
pub const NEGATION_WINDOW: usize = 3;
pub const NORMALIZATION_ALPHA: f64 = 15.0;
pub const LABEL_THRESHOLD: f64 = 0.05;

/// Negation words as they appear after preprocessing. Contractions are
/// split at the apostrophe, so "isn't" arrives as "isn", "t".
pub const NEGATION_WORDS: &[&str] = &[
    "not", "no", "never", "none", "nobody", "nothing", "neither", "nor", "nowhere", "cannot", "without", "nope",
    "rarely", "seldom", "despite", "isn", "aren", "wasn", "weren", "doesn", "didn", "don", "hasn", "haven", "hadn",
    "couldn", "shouldn", "wouldn", "mustn", "shan", "ain", "isnt", "arent", "wasnt", "werent", "doesnt", "didnt",
    "dont", "hasnt", "havent", "hadnt", "couldnt", "shouldnt", "wouldnt", "cant", "wont", "aint",
];

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("lexicon line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("I/O failure reading lexicon: {0}")]
    Io(#[from] std::io::Error),
}

/// Term → valence table, valences in [-4, 4].
#[derive(Clone, Debug, PartialEq)]
pub struct Lexicon {
    valences: HashMap<String, f64>,
}

impl Lexicon {
    /// The lexicon shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_LEXICON).expect("bundled lexicon is well formed")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Parses `term<TAB>valence` lines. Blank lines and `#` comments are
    /// ignored; terms are lowercased.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut valences = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |message: String| LexiconError::Malformed { line: i + 1, message };
            let (term, valence) = line.split_once('\t').ok_or_else(|| malformed("expected term<TAB>valence".into()))?;
            let valence: f64 = valence.trim().parse().map_err(|_| malformed(format!("bad valence {valence:?}")))?;
            if !(-4.0..=4.0).contains(&valence) {
                return Err(malformed(format!("valence {valence} outside [-4, 4]")));
            }
            valences.insert(term.trim().to_lowercase(), valence);
        }
        Ok(Lexicon { valences })
    }

    pub fn valence(&self, term: &str) -> f64 {
        self.valences.get(term).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.valences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valences.is_empty()
    }

    /// The same lexicon with every valence negated.
    pub fn inverted(&self) -> Self {
        Lexicon { valences: self.valences.iter().map(|(k, v)| (k.clone(), -v)).collect() }
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        Lexicon { valences: pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Positive,
    Neutral,
    Negative,
}

impl SentimentLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            SentimentLabel::Positive => "positive",
            SentimentLabel::Neutral => "neutral",
            SentimentLabel::Negative => "negative",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "positive" => Some(SentimentLabel::Positive),
            "neutral" => Some(SentimentLabel::Neutral),
            "negative" => Some(SentimentLabel::Negative),
            _ => None,
        }
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SentimentScore {
    pub compound: f64,
    pub label: SentimentLabel,
}

pub fn label_for(compound: f64) -> SentimentLabel {
    if compound >= LABEL_THRESHOLD {
        SentimentLabel::Positive
    } else if compound <= -LABEL_THRESHOLD {
        SentimentLabel::Negative
    } else {
        SentimentLabel::Neutral
    }
}

/// `s / sqrt(s^2 + alpha)`, clamped to [-1, 1].
pub fn compound_from_sum(sum: f64) -> f64 {
    (sum / (sum * sum + NORMALIZATION_ALPHA).sqrt()).clamp(-1.0, 1.0)
}

pub fn score_sentiment<S: AsRef<str>>(tokens: &[S], lexicon: &Lexicon) -> SentimentScore {
    let mut sum = 0.0;
    for (i, token) in tokens.iter().enumerate() {
        let valence = lexicon.valence(token.as_ref());
        if valence == 0.0 {
            continue;
        }
        let negated = tokens[i.saturating_sub(NEGATION_WINDOW)..i]
            .iter()
            .any(|t| NEGATION_WORDS.contains(&t.as_ref()));
        sum += if negated { valence * NEGATION_SCALAR } else { valence };
    }
    let compound = compound_from_sum(sum);
    SentimentScore { compound, label: label_for(compound) }
}
