//! IPA tokenization and rendering.
//!
//! [`tokenize`] converts an IPA transcription string into an [`Utterance`]
//! against a phoneme [`Inventory`]; [`Utterance::render`] is its inverse.
//!
//! The input is NFC-normalized first, whitespace separates words, `ˈ`/`ˌ`
//! mark stress, a mid-word `.` marks a syllable boundary, and word-final `.`
//! is punctuation and dropped. Phonemes are matched greedily: at each
//! position the longest inventory symbol wins, so multi-codepoint symbols
//! (`tʃ`, `eɪ`, `t̪`) are never split into their parts. Out-of-vocabulary
//! marker words render as `⟨spelling⟩` and read back as OOV markers.

use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::inventory::Inventory;
use crate::segment::{Segment, Utterance, Word};

/// Opening delimiter of an out-of-vocabulary marker word.
pub const OOV_OPEN: char = '⟨';
/// Closing delimiter of an out-of-vocabulary marker word.
pub const OOV_CLOSE: char = '⟩';

/// Errors raised by [`tokenize`]. Positions are codepoint offsets into the
/// NFC-normalized input.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TokenizeError {
    #[error("input is empty")]
    EmptyInput,
    #[error("position {position}: `{codepoint}` does not start any inventory symbol")]
    UnknownSymbol { position: usize, codepoint: char },
    #[error("word {word_index} contains no phonemes")]
    EmptyWord { word_index: usize },
}

/// Tokenizes an IPA string into an utterance over `inventory`.
///
/// The result never carries durations; callers attach them separately. The
/// parse is deterministic: for a fixed inventory there is exactly one greedy
/// longest-match segmentation, regardless of symbol declaration order.
pub fn tokenize(text: &str, inventory: &Inventory) -> Result<Utterance, TokenizeError> {
    let chars: Vec<char> = text.nfc().collect();
    if chars.iter().all(|c| c.is_whitespace()) {
        return Err(TokenizeError::EmptyInput);
    }

    let mut words = Vec::new();
    let mut pos = 0;
    while pos < chars.len() {
        if chars[pos].is_whitespace() {
            pos += 1;
            continue;
        }
        let start = pos;
        while pos < chars.len() && !chars[pos].is_whitespace() {
            pos += 1;
        }
        words.push(parse_word(&chars, start, pos, words.len(), inventory)?);
    }
    Ok(Utterance::new(words))
}

/// Parses one whitespace-delimited token spanning `chars[start..end]`.
fn parse_word(
    chars: &[char],
    start: usize,
    mut end: usize,
    word_index: usize,
    inventory: &Inventory,
) -> Result<Word, TokenizeError> {
    // Word-final `.` is punctuation, not a syllable boundary.
    while end > start && chars[end - 1] == '.' {
        end -= 1;
    }

    if chars[start..end].first() == Some(&OOV_OPEN) {
        return parse_oov(chars, start, end, word_index);
    }

    let mut segments = Vec::new();
    let mut pos = start;
    while pos < end {
        match chars[pos] {
            'ˈ' => {
                segments.push(Segment::PrimaryStress);
                pos += 1;
            }
            'ˌ' => {
                segments.push(Segment::SecondaryStress);
                pos += 1;
            }
            '.' => {
                segments.push(Segment::SyllableBoundary);
                pos += 1;
            }
            c => {
                let longest = longest_symbol_match(&chars[pos..end], inventory);
                match longest {
                    Some(len) => {
                        let symbol: String = chars[pos..pos + len].iter().collect();
                        segments.push(Segment::phoneme(symbol));
                        pos += len;
                    }
                    None => {
                        return Err(TokenizeError::UnknownSymbol {
                            position: pos,
                            codepoint: c,
                        })
                    }
                }
            }
        }
    }

    Word::new(segments).map_err(|_| TokenizeError::EmptyWord { word_index })
}

/// Parses an `⟨spelling⟩` token into an OOV marker word.
fn parse_oov(
    chars: &[char],
    start: usize,
    end: usize,
    word_index: usize,
) -> Result<Word, TokenizeError> {
    let inner = &chars[start + 1..end];
    if inner.last() != Some(&OOV_CLOSE) {
        return Err(TokenizeError::UnknownSymbol {
            position: start,
            codepoint: OOV_OPEN,
        });
    }
    let spelling: String = inner[..inner.len() - 1].iter().collect();
    if spelling.is_empty() || spelling.contains(OOV_OPEN) || spelling.contains(OOV_CLOSE) {
        return Err(TokenizeError::EmptyWord { word_index });
    }
    Ok(Word::oov(spelling))
}

/// Returns the codepoint length of the longest inventory symbol that prefixes
/// `chars`, if any.
fn longest_symbol_match(chars: &[char], inventory: &Inventory) -> Option<usize> {
    let upper = inventory.max_symbol_chars().min(chars.len());
    for len in (1..=upper).rev() {
        let candidate: String = chars[..len].iter().collect();
        if inventory.contains(&candidate) {
            return Some(len);
        }
    }
    None
}

impl Word {
    /// Renders this word back to its textual form.
    pub fn render(&self) -> String {
        if let Some(spelling) = self.oov_spelling() {
            return format!("{OOV_OPEN}{spelling}{OOV_CLOSE}");
        }
        let mut out = String::new();
        for segment in self.segments() {
            match segment {
                Segment::Phoneme { symbol } => out.push_str(symbol),
                Segment::PrimaryStress => out.push('ˈ'),
                Segment::SecondaryStress => out.push('ˌ'),
                Segment::SyllableBoundary => out.push('.'),
            }
        }
        out
    }
}

impl Utterance {
    /// Renders the utterance as text, words joined by single spaces.
    ///
    /// For any utterance built from inventory symbols,
    /// `tokenize(&u.render(), inv) == u` (dropping durations, which rendering
    /// does not encode).
    pub fn render(&self) -> String {
        self.words()
            .iter()
            .map(Word::render)
            .collect::<Vec<_>>()
            .join(" ")
    }
}
