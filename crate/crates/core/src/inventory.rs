//! Phoneme inventories: the closed symbol set a transcription may use.
//!
//! An inventory is an ordered set of phoneme symbols, each tagged with
//! phonological classes. Symbols are stored NFC-normalized, so multi-codepoint
//! symbols (diphthongs, affricates, diacritic-bearing consonants) compare
//! reliably. Tokenization (see [`crate::tokenize`]) matches greedily against
//! the longest symbol in the inventory, which makes the parse independent of
//! the order symbols were declared in.
//!
//! # File format
//!
//! UTF-8 text, one phoneme per line: `symbol<TAB>tag,tag,...`. Lines starting
//! with `#` are comments; the optional metadata comment
//! `# inventory: <name>@<version>` names the inventory (defaults to
//! `unnamed@0` when absent).

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

/// Phonological class tags an inventory may assign to a symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhonemeClass {
    Vowel,
    Consonant,
    Diphthong,
    Voiced,
    Voiceless,
    Stop,
    Fricative,
    Affricate,
}

impl PhonemeClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            PhonemeClass::Vowel => "vowel",
            PhonemeClass::Consonant => "consonant",
            PhonemeClass::Diphthong => "diphthong",
            PhonemeClass::Voiced => "voiced",
            PhonemeClass::Voiceless => "voiceless",
            PhonemeClass::Stop => "stop",
            PhonemeClass::Fricative => "fricative",
            PhonemeClass::Affricate => "affricate",
        }
    }
}

impl fmt::Display for PhonemeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PhonemeClass {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "vowel" => PhonemeClass::Vowel,
            "consonant" => PhonemeClass::Consonant,
            "diphthong" => PhonemeClass::Diphthong,
            "voiced" => PhonemeClass::Voiced,
            "voiceless" => PhonemeClass::Voiceless,
            "stop" => PhonemeClass::Stop,
            "fricative" => PhonemeClass::Fricative,
            "affricate" => PhonemeClass::Affricate,
            _ => return Err(()),
        })
    }
}

/// Errors raised while building or parsing an inventory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum InventoryError {
    #[error("line {line}: malformed inventory line (expected `symbol<TAB>tag,tag,...`)")]
    MalformedLine { line: usize },
    #[error("line {line}: unknown class tag `{tag}`")]
    UnknownTag { line: usize, tag: String },
    #[error("line {line}: duplicate symbol `{symbol}`")]
    DuplicateSymbol { line: usize, symbol: String },
    #[error("line {line}: symbol `{symbol}` must be tagged vowel or consonant")]
    MissingMajorClass { line: usize, symbol: String },
    #[error("inventory contains no symbols")]
    Empty,
}

/// Reference to an inventory by name and version, e.g. `default@1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InventoryRef {
    pub name: String,
    pub version: String,
}

impl fmt::Display for InventoryRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.name, self.version)
    }
}

impl InventoryRef {
    pub fn new(name: impl Into<String>, version: impl Into<String>) -> Self {
        InventoryRef {
            name: name.into(),
            version: version.into(),
        }
    }

    /// Parses `name@version`; a missing `@version` defaults to version `0`.
    pub fn parse(s: &str) -> Self {
        match s.split_once('@') {
            Some((name, version)) => InventoryRef::new(name, version),
            None => InventoryRef::new(s, "0"),
        }
    }
}

/// An ordered set of phoneme symbols with class tags.
#[derive(Debug, Clone, PartialEq)]
pub struct Inventory {
    reference: InventoryRef,
    /// Symbols in declaration order, NFC-normalized.
    symbols: Vec<String>,
    classes: HashMap<String, Vec<PhonemeClass>>,
    /// Longest symbol length in codepoints; bounds the tokenizer lookahead.
    max_symbol_chars: usize,
}

impl Inventory {
    /// Builds an inventory from `(symbol, classes)` pairs.
    ///
    /// Symbols are NFC-normalized; duplicates (post-normalization) are
    /// rejected, as is any symbol lacking a `vowel` or `consonant` tag.
    pub fn new(
        reference: InventoryRef,
        entries: Vec<(String, Vec<PhonemeClass>)>,
    ) -> Result<Self, InventoryError> {
        let mut symbols = Vec::with_capacity(entries.len());
        let mut classes = HashMap::with_capacity(entries.len());
        let mut max_symbol_chars = 0;
        for (line, (raw, tags)) in entries.into_iter().enumerate() {
            let line = line + 1;
            let symbol: String = raw.nfc().collect();
            if symbol.is_empty() || symbol.chars().any(char::is_whitespace) {
                return Err(InventoryError::MalformedLine { line });
            }
            if classes.contains_key(&symbol) {
                return Err(InventoryError::DuplicateSymbol { line, symbol });
            }
            let major = tags
                .iter()
                .any(|t| matches!(t, PhonemeClass::Vowel | PhonemeClass::Consonant));
            if !major {
                return Err(InventoryError::MissingMajorClass { line, symbol });
            }
            max_symbol_chars = max_symbol_chars.max(symbol.chars().count());
            symbols.push(symbol.clone());
            classes.insert(symbol, tags);
        }
        if symbols.is_empty() {
            return Err(InventoryError::Empty);
        }
        Ok(Inventory {
            reference,
            symbols,
            classes,
            max_symbol_chars,
        })
    }

    /// Parses the one-phoneme-per-line file format.
    pub fn parse(text: &str) -> Result<Self, InventoryError> {
        let mut reference = InventoryRef::new("unnamed", "0");
        let mut entries = Vec::new();
        let mut entry_lines = Vec::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(meta) = comment.trim().strip_prefix("inventory:") {
                    reference = InventoryRef::parse(meta.trim());
                }
                continue;
            }
            let (symbol, tags) = line
                .split_once('\t')
                .ok_or(InventoryError::MalformedLine { line: line_no })?;
            let symbol = symbol.trim();
            if symbol.is_empty() {
                return Err(InventoryError::MalformedLine { line: line_no });
            }
            let mut parsed = Vec::new();
            for tag in tags.split(',') {
                let tag = tag.trim();
                if tag.is_empty() {
                    continue;
                }
                let class = tag
                    .parse::<PhonemeClass>()
                    .map_err(|_| InventoryError::UnknownTag {
                        line: line_no,
                        tag: tag.to_string(),
                    })?;
                parsed.push(class);
            }
            entries.push((symbol.to_string(), parsed));
            entry_lines.push(line_no);
        }
        // Re-map constructor line numbers (entry order) back to file lines.
        Inventory::new(reference, entries).map_err(|e| match e {
            InventoryError::MalformedLine { line } => InventoryError::MalformedLine {
                line: entry_lines[line - 1],
            },
            InventoryError::DuplicateSymbol { line, symbol } => InventoryError::DuplicateSymbol {
                line: entry_lines[line - 1],
                symbol,
            },
            InventoryError::MissingMajorClass { line, symbol } => {
                InventoryError::MissingMajorClass {
                    line: entry_lines[line - 1],
                    symbol,
                }
            }
            other => other,
        })
    }

    /// The inventory's `name@version` reference.
    pub fn reference(&self) -> &InventoryRef {
        &self.reference
    }

    /// Symbols in declaration order.
    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    /// True if `symbol` (compared NFC-normalized in the caller) is a member.
    pub fn contains(&self, symbol: &str) -> bool {
        self.classes.contains_key(symbol)
    }

    /// Class tags for `symbol`, if present.
    pub fn classes(&self, symbol: &str) -> Option<&[PhonemeClass]> {
        self.classes.get(symbol).map(Vec::as_slice)
    }

    /// Longest symbol length in codepoints.
    pub fn max_symbol_chars(&self) -> usize {
        self.max_symbol_chars
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Text of the bundled default inventory (General-American phonemes plus the
/// substitution targets used by the built-in accent rule sets).
pub const DEFAULT_INVENTORY_TEXT: &str =
    include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/default.inv"));

static DEFAULT_INVENTORY: Lazy<Inventory> = Lazy::new(|| {
    Inventory::parse(DEFAULT_INVENTORY_TEXT).expect("bundled default inventory must parse")
});

/// The bundled default inventory (`default@1`).
pub fn default_inventory() -> &'static Inventory {
    &DEFAULT_INVENTORY
}
