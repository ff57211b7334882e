//! Text format for authoring rule sets (`.accentrules` files).
//!
//! The format is line-oriented and mirrors one rule per block:
//!
//! ```text
//! ruleset "spanish-accent" inventory "default@1"
//!
//! rule "sp3" "initial s-cluster epenthesis" {
//!   context: word-initial;
//!   s t -> e s t;
//!   s k -> e s k;
//! }
//! ```
//!
//! `#` starts a comment, `∅` denotes an empty target (deletion), and phoneme
//! symbols are whitespace-separated and validated against the inventory while
//! parsing. Parsing is all-or-nothing: the first hard error aborts with a
//! line/column position and no rule set is produced. [`serialize_ruleset`]
//! emits the canonical form (two-space indent, one mapping per line, NFC
//! symbols), which golden files and `rules fmt` rely on being bit-exact.

use std::fmt;

use sha2::{Digest, Sha256};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::inventory::{Inventory, InventoryRef};
use crate::rules::{RuleContext, RuleEntry, RuleError, RuleSet, RewriteRule};

/// Symbol used for an empty mapping target.
pub const EMPTY_TARGET: &str = "∅";

/// Parse failures, all positioned where applicable (1-based line and column,
/// counted in characters).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("syntax error at line {line}, column {col}: expected {expected}")]
    Syntax {
        line: usize,
        col: usize,
        expected: String,
    },
    #[error("unknown phoneme `{symbol}` at line {line}, column {col}")]
    UnknownPhoneme {
        line: usize,
        col: usize,
        symbol: String,
    },
    #[error("duplicate rule id `{id}`")]
    DuplicateRuleId { id: String },
    #[error("invalid rule at line {line}: {message}")]
    InvalidRule { line: usize, message: String },
}

impl DslError {
    /// Position of the error, when it has one.
    pub fn line_col(&self) -> Option<(usize, usize)> {
        match self {
            DslError::Syntax { line, col, .. } | DslError::UnknownPhoneme { line, col, .. } => {
                Some((*line, *col))
            }
            DslError::InvalidRule { line, .. } => Some((*line, 1)),
            DslError::DuplicateRuleId { .. } => None,
        }
    }
}

/// Severity of a [`Diagnostic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => write!(f, "error"),
        }
    }
}

/// A positioned message about a rule set document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl Diagnostic {
    pub fn from_error(err: &DslError) -> Self {
        let (line, col) = err.line_col().unwrap_or((1, 1));
        Diagnostic {
            severity: Severity::Error,
            line,
            col,
            message: err.to_string(),
        }
    }
}

/// A successfully parsed rule set together with its source text.
///
/// Parsing is all-or-nothing, so a document always holds a valid rule set;
/// `diagnostics` is reserved for non-fatal findings and is empty today.
#[derive(Debug, Clone)]
pub struct RuleSetDocument {
    source_text: String,
    parsed: RuleSet,
    diagnostics: Vec<Diagnostic>,
}

impl RuleSetDocument {
    pub fn parse(text: &str, inventory: &Inventory) -> Result<Self, DslError> {
        let parsed = parse_ruleset(text, inventory)?;
        Ok(RuleSetDocument {
            source_text: text.to_string(),
            parsed,
            diagnostics: Vec::new(),
        })
    }

    pub fn source_text(&self) -> &str {
        &self.source_text
    }

    pub fn ruleset(&self) -> &RuleSet {
        &self.parsed
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Quoted(String),
    Arrow,
    LBrace,
    RBrace,
    Semi,
    Colon,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Quoted(s) => format!("\"{s}\""),
            Tok::Arrow => "`->`".to_string(),
            Tok::LBrace => "`{`".to_string(),
            Tok::RBrace => "`}`".to_string(),
            Tok::Semi => "`;`".to_string(),
            Tok::Colon => "`:`".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

/// Splits the input into tokens. Strings must close on their own line;
/// comments run to end of line and may not start inside a string.
fn lex(text: &str) -> Result<Vec<Spanned>, DslError> {
    let mut tokens = Vec::new();
    for (line_idx, line) in text.lines().enumerate() {
        let line_no = line_idx + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            match c {
                _ if c.is_whitespace() => i += 1,
                '#' => break,
                '"' => {
                    let start = i + 1;
                    let mut j = start;
                    while j < chars.len() && chars[j] != '"' {
                        j += 1;
                    }
                    if j == chars.len() {
                        return Err(DslError::Syntax {
                            line: line_no,
                            col,
                            expected: "closing `\"` on the same line".to_string(),
                        });
                    }
                    tokens.push(Spanned {
                        tok: Tok::Quoted(chars[start..j].iter().collect()),
                        line: line_no,
                        col,
                    });
                    i = j + 1;
                }
                '{' | '}' | ';' | ':' => {
                    let tok = match c {
                        '{' => Tok::LBrace,
                        '}' => Tok::RBrace,
                        ';' => Tok::Semi,
                        _ => Tok::Colon,
                    };
                    tokens.push(Spanned {
                        tok,
                        line: line_no,
                        col,
                    });
                    i += 1;
                }
                '-' if chars.get(i + 1) == Some(&'>') => {
                    tokens.push(Spanned {
                        tok: Tok::Arrow,
                        line: line_no,
                        col,
                    });
                    i += 2;
                }
                _ => {
                    let start = i;
                    while i < chars.len() {
                        let c = chars[i];
                        if c.is_whitespace()
                            || matches!(c, '{' | '}' | ';' | ':' | '"' | '#')
                            || (c == '-' && chars.get(i + 1) == Some(&'>'))
                        {
                            break;
                        }
                        i += 1;
                    }
                    tokens.push(Spanned {
                        tok: Tok::Word(chars[start..i].iter().collect()),
                        line: line_no,
                        col,
                    });
                }
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<Spanned>,
    pos: usize,
    eof: (usize, usize),
    inventory: &'a Inventory,
}

impl<'a> Parser<'a> {
    fn new(text: &str, inventory: &'a Inventory) -> Result<Self, DslError> {
        let tokens = lex(text)?;
        let eof_line = text.lines().count().max(1);
        Ok(Parser {
            tokens,
            pos: 0,
            eof: (eof_line, 1),
            inventory,
        })
    }

    fn peek(&self) -> Option<&Spanned> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map_or(self.eof, |t| (t.line, t.col))
    }

    fn err(&self, expected: impl Into<String>) -> DslError {
        let (line, col) = self.here();
        DslError::Syntax {
            line,
            col,
            expected: expected.into(),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), DslError> {
        match self.next() {
            Some(Spanned {
                tok: Tok::Word(w), ..
            }) if w == kw => Ok(()),
            Some(_) => {
                self.pos -= 1;
                Err(self.err(format!("keyword `{kw}`")))
            }
            None => Err(self.err(format!("keyword `{kw}`"))),
        }
    }

    fn expect_quoted(&mut self, what: &str) -> Result<String, DslError> {
        match self.next() {
            Some(Spanned {
                tok: Tok::Quoted(s),
                ..
            }) => Ok(s),
            Some(_) => {
                self.pos -= 1;
                Err(self.err(format!("quoted {what}")))
            }
            None => Err(self.err(format!("quoted {what}"))),
        }
    }

    fn expect_tok(&mut self, tok: Tok) -> Result<(), DslError> {
        match self.next() {
            Some(t) if t.tok == tok => Ok(()),
            Some(_) => {
                self.pos -= 1;
                Err(self.err(tok.describe()))
            }
            None => Err(self.err(tok.describe())),
        }
    }

    /// Reads one phoneme symbol, NFC-normalized and inventory-checked.
    fn expect_symbol(&mut self) -> Result<String, DslError> {
        let (line, col) = self.here();
        match self.next() {
            Some(Spanned {
                tok: Tok::Word(w), ..
            }) => {
                let symbol: String = w.nfc().collect();
                if self.inventory.contains(&symbol) {
                    Ok(symbol)
                } else {
                    Err(DslError::UnknownPhoneme { line, col, symbol })
                }
            }
            Some(_) => {
                self.pos -= 1;
                Err(self.err("phoneme symbol"))
            }
            None => Err(self.err("phoneme symbol")),
        }
    }

    fn parse_document(&mut self) -> Result<RuleSet, DslError> {
        let mut name = String::new();
        let mut inv_ref = self.inventory.reference().clone();
        if matches!(self.peek(), Some(Spanned { tok: Tok::Word(w), .. }) if w == "ruleset") {
            self.next();
            name = self.expect_quoted("ruleset name")?;
            self.expect_keyword("inventory")?;
            inv_ref = InventoryRef::parse(&self.expect_quoted("inventory reference")?);
        }

        let mut rules = Vec::new();
        while self.peek().is_some() {
            rules.push(self.parse_rule()?);
        }
        RuleSet::new(name, inv_ref, rules).map_err(|e| match e {
            RuleError::DuplicateRuleId { id } => DslError::DuplicateRuleId { id },
            other => DslError::InvalidRule {
                line: self.eof.0,
                message: other.to_string(),
            },
        })
    }

    fn parse_rule(&mut self) -> Result<RewriteRule, DslError> {
        self.expect_keyword("rule")?;
        let rule_line = self.tokens[self.pos - 1].line;
        let id = self.expect_quoted("rule id")?;
        let label = self.expect_quoted("rule label")?;
        self.expect_tok(Tok::LBrace)?;

        self.expect_keyword("context")?;
        self.expect_tok(Tok::Colon)?;
        let (ctx_line, ctx_col) = self.here();
        let context = match self.next() {
            Some(Spanned {
                tok: Tok::Word(w), ..
            }) => match w.as_str() {
                "word-initial" => RuleContext::WordInitial,
                "word-final" => RuleContext::WordFinal,
                "anywhere" => RuleContext::Anywhere,
                _ => {
                    return Err(DslError::Syntax {
                        line: ctx_line,
                        col: ctx_col,
                        expected: "`word-initial`, `word-final`, or `anywhere`".to_string(),
                    })
                }
            },
            Some(_) => {
                self.pos -= 1;
                return Err(self.err("`word-initial`, `word-final`, or `anywhere`"));
            }
            None => return Err(self.err("`word-initial`, `word-final`, or `anywhere`")),
        };
        self.expect_tok(Tok::Semi)?;

        let mut entries = Vec::new();
        loop {
            match self.peek() {
                Some(Spanned {
                    tok: Tok::RBrace, ..
                }) => {
                    self.next();
                    break;
                }
                Some(_) => entries.push(self.parse_mapping()?),
                None => return Err(self.err("mapping or `}`")),
            }
        }

        RewriteRule::new(id, label, context, entries).map_err(|e| DslError::InvalidRule {
            line: rule_line,
            message: e.to_string(),
        })
    }

    fn parse_mapping(&mut self) -> Result<RuleEntry, DslError> {
        let mut source = vec![self.expect_symbol()?];
        while !matches!(self.peek(), Some(Spanned { tok: Tok::Arrow, .. })) {
            match self.peek() {
                Some(Spanned {
                    tok: Tok::Word(_), ..
                }) => source.push(self.expect_symbol()?),
                _ => return Err(self.err("phoneme symbol or `->`")),
            }
        }
        self.expect_tok(Tok::Arrow)?;

        let mut target = Vec::new();
        if matches!(self.peek(), Some(Spanned { tok: Tok::Word(w), .. }) if w == EMPTY_TARGET) {
            self.next();
        } else {
            target.push(self.expect_symbol_or(&format!("phoneme symbol or `{EMPTY_TARGET}`"))?);
            while !matches!(self.peek(), Some(Spanned { tok: Tok::Semi, .. })) {
                match self.peek() {
                    Some(Spanned {
                        tok: Tok::Word(_), ..
                    }) => target.push(self.expect_symbol()?),
                    _ => return Err(self.err("phoneme symbol or `;`")),
                }
            }
        }
        self.expect_tok(Tok::Semi)?;

        // `∅` is only valid alone; sources are plain symbol lists, so the
        // entry constructor's checks cannot fire here beyond that guarantee.
        RuleEntry::new(source, target).map_err(|e| DslError::InvalidRule {
            line: self.tokens[self.pos - 1].line,
            message: e.to_string(),
        })
    }

    fn expect_symbol_or(&mut self, expected: &str) -> Result<String, DslError> {
        match self.peek() {
            Some(Spanned {
                tok: Tok::Word(_), ..
            }) => self.expect_symbol(),
            _ => Err(self.err(expected)),
        }
    }
}

/// Parses a rule set document, validating every symbol against `inventory`.
///
/// A missing `ruleset` header yields an empty name and the given inventory's
/// own reference; an empty document is a rule set with zero rules.
pub fn parse_ruleset(text: &str, inventory: &Inventory) -> Result<RuleSet, DslError> {
    Parser::new(text, inventory)?.parse_document()
}

/// Renders a rule set in canonical form: header line, one blank line before
/// each rule block, two-space indent, one mapping per line.
///
/// `parse_ruleset(serialize_ruleset(rs), inv)` is structurally equal to `rs`
/// whenever the ids, names, and labels contain no `"` or newline characters.
pub fn serialize_ruleset(rs: &RuleSet) -> String {
    let mut out = format!(
        "ruleset \"{}\" inventory \"{}\"\n",
        rs.name(),
        rs.inventory_ref()
    );
    for rule in rs.rules() {
        out.push('\n');
        out.push_str(&format!("rule \"{}\" \"{}\" {{\n", rule.id(), rule.name()));
        out.push_str(&format!("  context: {};\n", rule.context().as_str()));
        for entry in rule.entries() {
            let target = if entry.target().is_empty() {
                EMPTY_TARGET.to_string()
            } else {
                entry.target().join(" ")
            };
            out.push_str(&format!("  {} -> {};\n", entry.source().join(" "), target));
        }
        out.push_str("}\n");
    }
    out
}

/// A stable identifier for a rule set's exact content: the set's name plus
/// the first eight hex digits of the SHA-256 of its canonical serialization.
///
/// Two structurally equal rule sets always share a version string; any change
/// to a rule, entry, or ordering changes it.
pub fn ruleset_version(rs: &RuleSet) -> String {
    let hex = sha256_hex(serialize_ruleset(rs).as_bytes());
    format!("{}@{}", rs.name(), &hex[..8])
}

/// Lowercase hex SHA-256 of `data`.
pub(crate) fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
