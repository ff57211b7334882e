//! Ordered, context-sensitive phoneme rewrite rules.
//!
//! A [`RewriteRule`] maps source phoneme sequences to target sequences under
//! a word-position context. A [`RuleSet`] applies its rules in declaration
//! order: each rule makes a single left-to-right pass over every word, the
//! longest matching source entry fires at each position, and scanning resumes
//! after the replaced span, so a rule never rewrites its own output. Later
//! rules do see earlier rules' output (feeding is deliberate).
//!
//! Stress and syllable-boundary markers are transparent: rules match across
//! them as if only phonemes were present, and markers are re-anchored to the
//! phoneme that follows them in the output (see [`TransformTrace::replay`]).
//!
//! Application can be made stochastic per rule: each candidate match site
//! fires independently with probability `p`, decided by a deterministic
//! generator keyed on `(seed, rule id, word index, match position)`, so a
//! fixed seed reproduces byte-identical output across runs and platforms.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::inventory::{Inventory, InventoryRef};
use crate::segment::{Utterance, Word};
use crate::trace::{EditOp, TraceError, TransformTrace};

/// Word-position predicate restricting where a rule's entries may match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleContext {
    /// Matches must begin at the word's first phoneme.
    WordInitial,
    /// Matches must end at the word's last phoneme.
    WordFinal,
    /// Matches anywhere in the word.
    Anywhere,
}

impl RuleContext {
    pub fn as_str(&self) -> &'static str {
        match self {
            RuleContext::WordInitial => "word-initial",
            RuleContext::WordFinal => "word-final",
            RuleContext::Anywhere => "anywhere",
        }
    }
}

/// One `source → target` mapping inside a rule. The source is a non-empty
/// phoneme sequence; an empty target deletes the matched span.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleEntry {
    source: Vec<String>,
    target: Vec<String>,
}

impl RuleEntry {
    pub fn new(
        source: Vec<impl Into<String>>,
        target: Vec<impl Into<String>>,
    ) -> Result<Self, RuleError> {
        let norm = |v: Vec<String>| -> Vec<String> {
            v.into_iter().map(|s| s.nfc().collect()).collect()
        };
        let source = norm(source.into_iter().map(Into::into).collect());
        let target = norm(target.into_iter().map(Into::into).collect());
        if source.is_empty() || source.iter().any(String::is_empty) {
            return Err(RuleError::EmptySource);
        }
        if target.iter().any(String::is_empty) {
            return Err(RuleError::EmptyTargetSymbol);
        }
        Ok(RuleEntry { source, target })
    }

    pub fn source(&self) -> &[String] {
        &self.source
    }

    pub fn target(&self) -> &[String] {
        &self.target
    }
}

/// Errors raised when constructing rules and rule sets.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuleError {
    #[error("rule id must be non-empty")]
    EmptyId,
    #[error("rule entry source must be a non-empty phoneme sequence")]
    EmptySource,
    #[error("rule entry target contains an empty symbol")]
    EmptyTargetSymbol,
    #[error("rule `{rule}` has a duplicate source sequence `{sequence}`")]
    DuplicateSource { rule: String, sequence: String },
    #[error("rule must define at least one entry")]
    NoEntries,
    #[error("duplicate rule id `{id}`")]
    DuplicateRuleId { id: String },
}

/// Errors raised during rule application.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ApplyError {
    #[error("rule `{rule_id}` uses symbol `{symbol}` absent from inventory `{inventory}`")]
    InventoryMismatch {
        rule_id: String,
        symbol: String,
        inventory: String,
    },
    #[error("utterance uses symbol `{symbol}` absent from inventory `{inventory}`")]
    UtteranceSymbol { symbol: String, inventory: String },
    #[error("options reference unknown rule id `{id}`")]
    UnknownRuleId { id: String },
    #[error("probability {value} for rule `{rule_id}` is outside [0, 1]")]
    InvalidProbability { rule_id: String, value: f64 },
    #[error("rule application emptied the word")]
    EmptiedWord,
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// A named rewrite rule: ordered `source → target` entries under one context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewriteRule {
    id: String,
    name: String,
    context: RuleContext,
    entries: Vec<RuleEntry>,
}

impl RewriteRule {
    /// Builds a rule, rejecting duplicate source sequences: with longest-match
    ///-first selection, a duplicated source could never fire a second entry.
    pub fn new(
        id: impl Into<String>,
        name: impl Into<String>,
        context: RuleContext,
        entries: Vec<RuleEntry>,
    ) -> Result<Self, RuleError> {
        let id = id.into();
        if id.is_empty() {
            return Err(RuleError::EmptyId);
        }
        if entries.is_empty() {
            return Err(RuleError::NoEntries);
        }
        let mut seen: HashSet<&[String]> = HashSet::new();
        for entry in &entries {
            if !seen.insert(entry.source()) {
                return Err(RuleError::DuplicateSource {
                    rule: id,
                    sequence: entry.source().join(" "),
                });
            }
        }
        Ok(RewriteRule {
            id,
            name: name.into(),
            context,
            entries,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn context(&self) -> RuleContext {
        self.context
    }

    pub fn entries(&self) -> &[RuleEntry] {
        &self.entries
    }

    /// Every symbol this rule mentions (sources and targets).
    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.entries
            .iter()
            .flat_map(|e| e.source().iter().chain(e.target().iter()))
            .map(String::as_str)
    }

    /// Applies this rule once to a single word at full strength.
    ///
    /// Returns the rewritten word and a trace whose indexes are word-local.
    /// Fails with [`ApplyError::EmptiedWord`] if every phoneme is deleted.
    pub fn apply(&self, word: &Word, inventory: &Inventory) -> Result<(Word, TransformTrace), ApplyError> {
        validate_rule_symbols(self, inventory)?;
        validate_word_symbols(word, inventory)?;
        if word.is_oov() {
            return Ok((word.clone(), TransformTrace::new(Vec::new())?));
        }
        let phonemes: Vec<String> = word.phonemes().map(str::to_string).collect();
        let order = entry_order(self);
        let (_, ops) = rewrite_word(self, &order, &phonemes, 0, 0, 0, |_| true);
        let trace = TransformTrace::new(ops)?;
        let source = Utterance::new(vec![word.clone()]);
        let replayed = trace.replay(&source)?;
        match replayed.words().first() {
            Some(w) => Ok((w.clone(), trace)),
            None => Err(ApplyError::EmptiedWord),
        }
    }
}

/// Options controlling [`RuleSet::apply`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ApplyOptions {
    /// When `Some`, only rules whose ids are in the set run (an empty set
    /// disables every rule). `None` runs all rules.
    pub enabled_rule_ids: Option<BTreeSet<String>>,
    /// Per-rule firing probability in `[0, 1]`; missing ids default to 1.
    pub per_rule_probability: BTreeMap<String, f64>,
    /// Seed for the deterministic per-site firing decisions.
    pub seed: u64,
}

impl ApplyOptions {
    /// Restricts application to the given rule ids.
    pub fn with_rules<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ApplyOptions {
            enabled_rule_ids: Some(ids.into_iter().map(Into::into).collect()),
            ..ApplyOptions::default()
        }
    }
}

/// An ordered collection of rewrite rules targeting one inventory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSet {
    name: String,
    inventory_ref: InventoryRef,
    rules: Vec<RewriteRule>,
}

impl RuleSet {
    pub fn new(
        name: impl Into<String>,
        inventory_ref: InventoryRef,
        rules: Vec<RewriteRule>,
    ) -> Result<Self, RuleError> {
        let mut ids = HashSet::new();
        for rule in &rules {
            if !ids.insert(rule.id()) {
                return Err(RuleError::DuplicateRuleId {
                    id: rule.id().to_string(),
                });
            }
        }
        Ok(RuleSet {
            name: name.into(),
            inventory_ref,
            rules,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn inventory_ref(&self) -> &InventoryRef {
        &self.inventory_ref
    }

    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }

    pub fn rule(&self, id: &str) -> Option<&RewriteRule> {
        self.rules.iter().find(|r| r.id() == id)
    }

    /// Checks every rule symbol against `inventory`.
    pub fn validate_against(&self, inventory: &Inventory) -> Result<(), ApplyError> {
        for rule in &self.rules {
            validate_rule_symbols(rule, inventory)?;
        }
        Ok(())
    }

    /// Applies the rule set to an utterance.
    ///
    /// Rules run in declaration order over the full previous output. The
    /// returned trace maps the source utterance directly to the output
    /// (per-rule traces are composed), and the output never carries
    /// durations — rewrites change the phoneme count, so callers re-derive
    /// durations via alignment instead.
    pub fn apply(
        &self,
        utterance: &Utterance,
        inventory: &Inventory,
        options: &ApplyOptions,
    ) -> Result<(Utterance, TransformTrace), ApplyError> {
        self.validate_against(inventory)?;
        for word in utterance.words() {
            validate_word_symbols(word, inventory)?;
        }
        let known: HashSet<&str> = self.rules.iter().map(RewriteRule::id).collect();
        if let Some(enabled) = &options.enabled_rule_ids {
            for id in enabled {
                if !known.contains(id.as_str()) {
                    return Err(ApplyError::UnknownRuleId { id: id.clone() });
                }
            }
        }
        for (id, p) in &options.per_rule_probability {
            if !known.contains(id.as_str()) {
                return Err(ApplyError::UnknownRuleId { id: id.clone() });
            }
            if !(0.0..=1.0).contains(p) {
                return Err(ApplyError::InvalidProbability {
                    rule_id: id.clone(),
                    value: *p,
                });
            }
        }

        // Working state: per-word phoneme sequences (None for OOV words,
        // which are exempt from rule application). Emptied words are kept as
        // placeholders so word indexes stay stable across rule passes; the
        // final replay drops them.
        let mut working: Vec<Option<Vec<String>>> = utterance
            .words()
            .iter()
            .map(|w| {
                (!w.is_oov()).then(|| w.phonemes().map(str::to_string).collect::<Vec<_>>())
            })
            .collect();

        let mut cumulative = TransformTrace::identity_for(utterance);
        for rule in &self.rules {
            if let Some(enabled) = &options.enabled_rule_ids {
                if !enabled.contains(rule.id()) {
                    continue;
                }
            }
            let p = options
                .per_rule_probability
                .get(rule.id())
                .copied()
                .unwrap_or(1.0);
            if p <= 0.0 {
                continue; // no site can fire
            }
            let order = entry_order(rule);
            let mut ops: Vec<EditOp> = Vec::new();
            let mut src_offset = 0;
            let mut out_offset = 0;
            for (word_index, slot) in working.iter_mut().enumerate() {
                let Some(phonemes) = slot else { continue };
                let (out_syms, word_ops) = rewrite_word(
                    rule,
                    &order,
                    phonemes,
                    src_offset,
                    out_offset,
                    word_index,
                    |pos| p >= 1.0 || site_roll(options.seed, rule.id(), word_index, pos) < p,
                );
                src_offset += phonemes.len();
                out_offset += out_syms.len();
                ops.extend(word_ops);
                *slot = Some(out_syms);
            }
            let rule_trace = TransformTrace::new(ops)?;
            cumulative = cumulative.compose(&rule_trace)?;
        }

        let output = cumulative.replay(utterance)?;
        Ok((output, cumulative))
    }
}

/// Entry indexes sorted longest-source-first; declaration order breaks ties
/// (two distinct equal-length sources can never match the same span anyway).
fn entry_order(rule: &RewriteRule) -> Vec<usize> {
    let mut order: Vec<usize> = (0..rule.entries.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(rule.entries[i].source().len()));
    order
}

fn validate_rule_symbols(rule: &RewriteRule, inventory: &Inventory) -> Result<(), ApplyError> {
    for symbol in rule.symbols() {
        if !inventory.contains(symbol) {
            return Err(ApplyError::InventoryMismatch {
                rule_id: rule.id().to_string(),
                symbol: symbol.to_string(),
                inventory: inventory.reference().to_string(),
            });
        }
    }
    Ok(())
}

fn validate_word_symbols(word: &Word, inventory: &Inventory) -> Result<(), ApplyError> {
    for symbol in word.phonemes() {
        if !inventory.contains(symbol) {
            return Err(ApplyError::UtteranceSymbol {
                symbol: symbol.to_string(),
                inventory: inventory.reference().to_string(),
            });
        }
    }
    Ok(())
}

/// One left-to-right pass of `rule` over a word's phoneme sequence.
///
/// `gate` decides whether a candidate match site fires; it is consulted once
/// per site where the longest entry matches under the rule's context. Ops are
/// emitted with global indexes starting at the given offsets, tagged with
/// `word_index`.
fn rewrite_word(
    rule: &RewriteRule,
    order: &[usize],
    phonemes: &[String],
    src_offset: usize,
    out_offset: usize,
    word_index: usize,
    mut gate: impl FnMut(usize) -> bool,
) -> (Vec<String>, Vec<EditOp>) {
    let n = phonemes.len();
    let mut out: Vec<String> = Vec::with_capacity(n);
    let mut ops: Vec<EditOp> = Vec::new();
    let mut i = 0;
    while i < n {
        let candidate = order.iter().map(|&e| &rule.entries[e]).find(|entry| {
            let len = entry.source().len();
            i + len <= n
                && entry.source() == &phonemes[i..i + len]
                && match rule.context {
                    RuleContext::WordInitial => i == 0,
                    RuleContext::WordFinal => i + len == n,
                    RuleContext::Anywhere => true,
                }
        });
        match candidate {
            Some(entry) if gate(i) => {
                emit_entry(
                    entry,
                    i,
                    src_offset,
                    out_offset,
                    word_index,
                    rule.id(),
                    &mut out,
                    &mut ops,
                );
                i += entry.source().len();
            }
            _ => {
                ops.push(EditOp::Keep {
                    src: src_offset + i,
                    out: out_offset + out.len(),
                    word: word_index,
                });
                out.push(phonemes[i].clone());
                i += 1;
            }
        }
    }
    (out, ops)
}

/// Emits the ops for one fired entry, factoring out the common affixes so the
/// trace reflects what actually changed: shared prefix/suffix phonemes are
/// `Keep`s, a pure addition is an `Insert` (epenthesis), a pure removal a
/// `Delete`, and the remaining core a single n:m `Substitute`.
#[allow(clippy::too_many_arguments)]
fn emit_entry(
    entry: &RuleEntry,
    at: usize,
    src_offset: usize,
    out_offset: usize,
    word_index: usize,
    rule_id: &str,
    out: &mut Vec<String>,
    ops: &mut Vec<EditOp>,
) {
    let source = entry.source();
    let target = entry.target();
    let prefix = source
        .iter()
        .zip(target.iter())
        .take_while(|(s, t)| s == t)
        .count();
    let suffix = source[prefix..]
        .iter()
        .rev()
        .zip(target[prefix..].iter().rev())
        .take_while(|(s, t)| s == t)
        .count();

    for j in 0..prefix {
        ops.push(EditOp::Keep {
            src: src_offset + at + j,
            out: out_offset + out.len(),
            word: word_index,
        });
        out.push(source[j].clone());
    }

    let mid_src = &source[prefix..source.len() - suffix];
    let mid_tgt = &target[prefix..target.len() - suffix];
    if mid_src.is_empty() {
        for symbol in mid_tgt {
            ops.push(EditOp::Insert {
                out: out_offset + out.len(),
                symbol: symbol.clone(),
                rule: rule_id.to_string(),
                word: word_index,
            });
            out.push(symbol.clone());
        }
    } else if mid_tgt.is_empty() {
        for k in 0..mid_src.len() {
            ops.push(EditOp::Delete {
                src: src_offset + at + prefix + k,
                rule: rule_id.to_string(),
                word: word_index,
            });
        }
    } else {
        let src_start = src_offset + at + prefix;
        let out_start = out_offset + out.len();
        ops.push(EditOp::Substitute {
            src: src_start..src_start + mid_src.len(),
            out: out_start..out_start + mid_tgt.len(),
            symbols: mid_tgt.to_vec(),
            rule: rule_id.to_string(),
            word: word_index,
        });
        out.extend(mid_tgt.iter().cloned());
    }

    for (k, symbol) in source[source.len() - suffix..].iter().enumerate() {
        ops.push(EditOp::Keep {
            src: src_offset + at + source.len() - suffix + k,
            out: out_offset + out.len(),
            word: word_index,
        });
        out.push(symbol.clone());
    }
}

/// Deterministic per-site roll in `[0, 1)`, stable across platforms and
/// releases: FNV-1a over the site key, finished with a SplitMix64 mix.
fn site_roll(seed: u64, rule_id: &str, word_index: usize, position: usize) -> f64 {
    const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = FNV_OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h = (h ^ u64::from(b)).wrapping_mul(FNV_PRIME);
        }
        h = (h ^ 0xff).wrapping_mul(FNV_PRIME); // field separator
    };
    eat(&seed.to_le_bytes());
    eat(rule_id.as_bytes());
    eat(&(word_index as u64).to_le_bytes());
    eat(&(position as u64).to_le_bytes());

    let mut z = h.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}
