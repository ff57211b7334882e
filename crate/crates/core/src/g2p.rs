//! Grapheme-to-phoneme conversion through a pronunciation lexicon.
//!
//! A [`Lexicon`] is loaded from CMU-dictionary-format text (`WORD  DH IH1 S`,
//! `;;;` comments, `WORD(2)` variants) and maps case-folded headwords to
//! ordered ARPAbet pronunciations. [`g2p`] looks up whitespace-separated,
//! punctuation-stripped words, converts the first pronunciation variant to
//! IPA segments, and handles out-of-vocabulary words per [`OovPolicy`]. No
//! letter-to-sound fallback is attempted: corpora with genuine OOVs should
//! use `Passthrough`, which carries the spelling through untransformed.

use std::collections::HashMap;

use once_cell::sync::Lazy;
use thiserror::Error;

use crate::segment::{Segment, Utterance, Word};

/// Errors raised while loading a lexicon file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconError {
    #[error("malformed lexicon line {line}")]
    MalformedLine { line: usize },
    #[error("unknown ARPAbet token `{token}` on lexicon line {line}")]
    UnknownArpabetToken { line: usize, token: String },
}

/// Errors raised during conversion.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum G2pError {
    #[error("unknown ARPAbet token `{token}`")]
    UnknownArpabetToken { token: String },
    #[error("word `{word}` is not in the lexicon")]
    OovWord { word: String },
}

/// What to do with a word the lexicon does not know.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OovPolicy {
    /// Fail the whole conversion.
    #[default]
    Error,
    /// Drop the word from the utterance.
    Skip,
    /// Emit the word as an out-of-vocabulary marker (rendered `⟨spelling⟩`)
    /// that rule application leaves untouched.
    Passthrough,
}

/// A pronunciation dictionary: case-folded headword → ordered ARPAbet
/// pronunciation variants.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: HashMap<String, Vec<Vec<String>>>,
}

impl Lexicon {
    /// Parses CMU-dictionary-format text.
    ///
    /// Each non-comment line is `HEADWORD  TOKEN TOKEN ...`; `;;;` starts a
    /// comment line; `HEADWORD(2)` etc. add pronunciation variants, merged
    /// under the base headword in file order.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut entries: HashMap<String, Vec<Vec<String>>> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with(";;;") {
                continue;
            }
            let mut fields = line.split_whitespace();
            let headword = fields.next().ok_or(LexiconError::MalformedLine { line: line_no })?;
            let tokens: Vec<String> = fields.map(str::to_string).collect();
            if tokens.is_empty() {
                return Err(LexiconError::MalformedLine { line: line_no });
            }
            for token in &tokens {
                if split_phone(token).is_none() {
                    return Err(LexiconError::UnknownArpabetToken {
                        line: line_no,
                        token: token.clone(),
                    });
                }
            }
            let base = strip_variant(headword)
                .ok_or(LexiconError::MalformedLine { line: line_no })?;
            entries.entry(base.to_lowercase()).or_default().push(tokens);
        }
        Ok(Lexicon { entries })
    }

    /// All pronunciation variants for a word (case-insensitive), file order.
    pub fn lookup(&self, word: &str) -> Option<&[Vec<String>]> {
        self.entries.get(&word.to_lowercase()).map(Vec::as_slice)
    }

    /// Number of distinct headwords.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Strips a `(n)` variant suffix from a headword, rejecting stray parens.
fn strip_variant(headword: &str) -> Option<&str> {
    match headword.split_once('(') {
        None => (!headword.is_empty()).then_some(headword),
        Some((base, rest)) => {
            let number = rest.strip_suffix(')')?;
            (!base.is_empty()
                && !number.is_empty()
                && number.bytes().all(|b| b.is_ascii_digit()))
            .then_some(base)
        }
    }
}

/// Splits an ARPAbet token into its base phone and optional stress digit,
/// returning `None` for anything outside the 39-phone set or a digit on a
/// non-vowel.
fn split_phone(token: &str) -> Option<(&str, Option<u8>)> {
    let (base, stress) = match token.bytes().last() {
        Some(d @ b'0'..=b'2') => (&token[..token.len() - 1], Some(d - b'0')),
        Some(d) if d.is_ascii_digit() => return None,
        _ => (token, None),
    };
    let is_vowel = matches!(
        base,
        "AA" | "AE" | "AH" | "AO" | "AW" | "AY" | "EH" | "ER" | "EY" | "IH" | "IY" | "OW"
            | "OY" | "UH" | "UW"
    );
    let is_consonant = matches!(
        base,
        "B" | "CH" | "D" | "DH" | "F" | "G" | "HH" | "JH" | "K" | "L" | "M" | "N" | "NG"
            | "P" | "R" | "S" | "SH" | "T" | "TH" | "V" | "W" | "Y" | "Z" | "ZH"
    );
    if is_vowel || (is_consonant && stress.is_none()) {
        Some((base, stress))
    } else {
        None
    }
}

/// IPA symbol for a base phone. `AH` depends on its stress digit: a written
/// `0` is the reduced vowel ə, anything else the full vowel ʌ.
fn phone_symbol(base: &str, stress: Option<u8>) -> &'static str {
    match base {
        "AA" => "ɑ",
        "AE" => "æ",
        "AH" => {
            if stress == Some(0) {
                "ə"
            } else {
                "ʌ"
            }
        }
        "AO" => "ɔ",
        "AW" => "aʊ",
        "AY" => "aɪ",
        "B" => "b",
        "CH" => "tʃ",
        "D" => "d",
        "DH" => "ð",
        "EH" => "ɛ",
        "ER" => "ɜ",
        "EY" => "eɪ",
        "F" => "f",
        "G" => "g",
        "HH" => "h",
        "IH" => "ɪ",
        "IY" => "i",
        "JH" => "dʒ",
        "K" => "k",
        "L" => "l",
        "M" => "m",
        "N" => "n",
        "NG" => "ŋ",
        "OW" => "oʊ",
        "OY" => "ɔɪ",
        "P" => "p",
        "R" => "ɹ",
        "S" => "s",
        "SH" => "ʃ",
        "T" => "t",
        "TH" => "θ",
        "UH" => "ʊ",
        "UW" => "u",
        "V" => "v",
        "W" => "w",
        "Y" => "j",
        "Z" => "z",
        "ZH" => "ʒ",
        _ => unreachable!("split_phone admits only the closed phone set"),
    }
}

/// Converts an ARPAbet token sequence to IPA segments.
///
/// Stress digit 1 places a primary-stress mark directly before the vowel,
/// digit 2 a secondary-stress mark; digit 0 or no digit adds nothing.
pub fn arpabet_to_ipa<T: AsRef<str>>(tokens: &[T]) -> Result<Vec<Segment>, G2pError> {
    let mut segments = Vec::with_capacity(tokens.len());
    for token in tokens {
        let token = token.as_ref();
        let (base, stress) = split_phone(token).ok_or_else(|| G2pError::UnknownArpabetToken {
            token: token.to_string(),
        })?;
        match stress {
            Some(1) => segments.push(Segment::PrimaryStress),
            Some(2) => segments.push(Segment::SecondaryStress),
            _ => {}
        }
        segments.push(Segment::phoneme(phone_symbol(base, stress)));
    }
    Ok(segments)
}

/// Converts orthographic text to an IPA utterance.
///
/// Words are split on whitespace; leading and trailing characters other than
/// letters, digits, and apostrophes are stripped before the case-insensitive
/// lookup, and tokens that are pure punctuation are dropped. The first
/// pronunciation variant wins.
pub fn g2p(text: &str, lexicon: &Lexicon, policy: OovPolicy) -> Result<Utterance, G2pError> {
    let mut words = Vec::new();
    for raw in text.split_whitespace() {
        let spelling =
            raw.trim_matches(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '’'));
        if spelling.is_empty() {
            continue;
        }
        match lexicon.lookup(spelling) {
            Some(variants) => {
                let segments = arpabet_to_ipa(&variants[0])?;
                words.push(Word::new(segments).expect("pronunciations are non-empty"));
            }
            None => match policy {
                OovPolicy::Error => {
                    return Err(G2pError::OovWord {
                        word: spelling.to_string(),
                    })
                }
                OovPolicy::Skip => {}
                OovPolicy::Passthrough => words.push(Word::oov(spelling)),
            },
        }
    }
    Ok(Utterance::new(words))
}

/// Raw text of the bundled fixture lexicon.
pub const FIXTURE_LEXICON_TEXT: &str =
    include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/fixture_lexicon.dict"));

/// The bundled fixture lexicon, parsed once.
pub fn fixture_lexicon() -> &'static Lexicon {
    static LEXICON: Lazy<Lexicon> = Lazy::new(|| {
        Lexicon::parse(FIXTURE_LEXICON_TEXT).expect("bundled fixture lexicon is valid")
    });
    &LEXICON
}
