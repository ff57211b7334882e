//! Core phonological data model: segments, words, and utterances.
//!
//! A [`Segment`] is either a phoneme (carrying its symbol) or a prosodic
//! marker (stress or syllable boundary). Words group segments; utterances
//! group words and may carry per-phoneme durations. Prosodic markers never
//! carry durations — duration vectors are indexed by phoneme position only.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One unit of a phonological transcription.
///
/// Only `Phoneme` carries a symbol; the marker variants are pure position
/// holders. Equality and hashing are structural.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Segment {
    Phoneme { symbol: String },
    PrimaryStress,
    SecondaryStress,
    SyllableBoundary,
}

impl Segment {
    /// Convenience constructor for a phoneme segment.
    pub fn phoneme(symbol: impl Into<String>) -> Self {
        Segment::Phoneme {
            symbol: symbol.into(),
        }
    }

    /// The phoneme symbol, if this segment is a phoneme.
    pub fn symbol(&self) -> Option<&str> {
        match self {
            Segment::Phoneme { symbol } => Some(symbol),
            _ => None,
        }
    }

    /// True for `Phoneme` segments.
    pub fn is_phoneme(&self) -> bool {
        matches!(self, Segment::Phoneme { .. })
    }
}

/// Errors raised by [`Word`] and [`Utterance`] constructors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum UtteranceError {
    #[error("word must contain at least one segment")]
    EmptyWord,
    #[error("word must contain at least one phoneme")]
    NoPhoneme,
    #[error("word must not end with a syllable boundary")]
    TrailingBoundary,
    #[error("duration count {actual} does not match phoneme count {expected}")]
    DurationCount { expected: usize, actual: usize },
    #[error("duration at phoneme index {index} is negative")]
    NegativeDuration { index: usize },
}

/// A word: a non-empty segment sequence containing at least one phoneme.
///
/// Out-of-vocabulary words (spellings that could not be transcribed) are a
/// special case: they carry the original spelling instead of segments, render
/// as `⟨spelling⟩`, and are exempt from rule application.
///
/// A trailing syllable boundary is rejected because the textual form could
/// not round-trip: a word-final `.` reads back as punctuation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word {
    segments: Vec<Segment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    oov: Option<String>,
}

impl Word {
    /// Builds a word from segments, validating the word invariants.
    pub fn new(segments: Vec<Segment>) -> Result<Self, UtteranceError> {
        if segments.is_empty() {
            return Err(UtteranceError::EmptyWord);
        }
        if !segments.iter().any(Segment::is_phoneme) {
            return Err(UtteranceError::NoPhoneme);
        }
        if matches!(segments.last(), Some(Segment::SyllableBoundary)) {
            return Err(UtteranceError::TrailingBoundary);
        }
        Ok(Word {
            segments,
            oov: None,
        })
    }

    /// Builds an out-of-vocabulary marker word for the given spelling.
    pub fn oov(spelling: impl Into<String>) -> Self {
        Word {
            segments: Vec::new(),
            oov: Some(spelling.into()),
        }
    }

    /// The segment sequence (empty for OOV marker words).
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// True if this word is an out-of-vocabulary marker.
    pub fn is_oov(&self) -> bool {
        self.oov.is_some()
    }

    /// The original spelling, for OOV marker words.
    pub fn oov_spelling(&self) -> Option<&str> {
        self.oov.as_deref()
    }

    /// Iterator over phoneme symbols, skipping prosodic markers.
    pub fn phonemes(&self) -> impl Iterator<Item = &str> {
        self.segments.iter().filter_map(Segment::symbol)
    }

    /// Number of phoneme segments.
    pub fn phoneme_count(&self) -> usize {
        self.segments.iter().filter(|s| s.is_phoneme()).count()
    }
}

/// A sequence of words with optional per-phoneme durations in seconds.
///
/// When durations are present, the vector length equals the total phoneme
/// count across all words (prosodic markers and OOV words contribute no
/// entries), and every entry is non-negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    words: Vec<Word>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    durations: Option<Vec<f64>>,
}

impl Utterance {
    /// Builds an utterance without durations. An empty word list is allowed
    /// (e.g. the result of transcribing an empty text).
    pub fn new(words: Vec<Word>) -> Self {
        Utterance {
            words,
            durations: None,
        }
    }

    /// Builds an utterance with per-phoneme durations, validating length and
    /// non-negativity.
    pub fn with_durations(words: Vec<Word>, durations: Vec<f64>) -> Result<Self, UtteranceError> {
        let expected: usize = words.iter().map(Word::phoneme_count).sum();
        if durations.len() != expected {
            return Err(UtteranceError::DurationCount {
                expected,
                actual: durations.len(),
            });
        }
        if let Some(index) = durations.iter().position(|d| *d < 0.0 || d.is_nan()) {
            return Err(UtteranceError::NegativeDuration { index });
        }
        Ok(Utterance {
            words,
            durations: Some(durations),
        })
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn durations(&self) -> Option<&[f64]> {
        self.durations.as_deref()
    }

    /// Total phoneme count across all words.
    pub fn phoneme_count(&self) -> usize {
        self.words.iter().map(Word::phoneme_count).sum()
    }

    /// Iterator over all phoneme symbols in reading order.
    pub fn phonemes(&self) -> impl Iterator<Item = &str> {
        self.words.iter().flat_map(Word::phonemes)
    }

    /// Returns a copy with durations removed.
    pub fn without_durations(&self) -> Utterance {
        Utterance {
            words: self.words.clone(),
            durations: None,
        }
    }
}
