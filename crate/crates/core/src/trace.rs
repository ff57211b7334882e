//! Edit traces: exact records of how a transformation rewrote an utterance.
//!
//! A [`TransformTrace`] is an ordered edit script over phoneme positions.
//! Indexes count phoneme segments in reading order across the utterance;
//! prosodic markers (stress, syllable boundaries) are not indexed — they ride
//! along, anchored to the phoneme that follows them. Every op carries the
//! index of the word it belongs to, which keeps utterance-level replay and
//! duration alignment well-defined even when words are inserted into or
//! emptied out.
//!
//! Invariants, checked on construction:
//! * source indexes `0..source_len` are covered exactly once, in increasing
//!   order, by `Keep`/`Substitute`/`Delete` ops;
//! * output indexes `0..output_len` are covered exactly once, in increasing
//!   order, by `Keep`/`Substitute`/`Insert` ops;
//! * word indexes never decrease along the script.

use std::collections::BTreeSet;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::segment::{Segment, Utterance, Word};

/// One edit operation over phoneme positions.
///
/// `Substitute` and `Insert` carry the symbols they produce, which makes a
/// trace self-contained: replaying it against the source reconstructs the
/// output without consulting the rules that generated it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EditOp {
    /// Source phoneme `src` survives unchanged as output phoneme `out`.
    Keep { src: usize, out: usize, word: usize },
    /// Source span `src` was rewritten to output span `out` by `rule`.
    Substitute {
        src: Range<usize>,
        out: Range<usize>,
        symbols: Vec<String>,
        rule: String,
        word: usize,
    },
    /// `rule` inserted `symbol` at output position `out`.
    Insert {
        out: usize,
        symbol: String,
        rule: String,
        word: usize,
    },
    /// `rule` deleted source phoneme `src`.
    Delete {
        src: usize,
        rule: String,
        word: usize,
    },
}

impl EditOp {
    /// Word index this op belongs to.
    pub fn word(&self) -> usize {
        match self {
            EditOp::Keep { word, .. }
            | EditOp::Substitute { word, .. }
            | EditOp::Insert { word, .. }
            | EditOp::Delete { word, .. } => *word,
        }
    }

    /// Rule id responsible for this op (`None` for `Keep`).
    pub fn rule(&self) -> Option<&str> {
        match self {
            EditOp::Keep { .. } => None,
            EditOp::Substitute { rule, .. }
            | EditOp::Insert { rule, .. }
            | EditOp::Delete { rule, .. } => Some(rule),
        }
    }
}

/// Errors raised by trace construction, composition, and replay.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("op {index}: expected source index {expected}, found {found}")]
    SourceCoverage {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("op {index}: expected output index {expected}, found {found}")]
    OutputCoverage {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("op {index}: substitute ranges must be non-empty")]
    EmptyRange { index: usize },
    #[error("op {index}: substitute carries {symbols} symbols for an output span of {span}")]
    SymbolCount {
        index: usize,
        symbols: usize,
        span: usize,
    },
    #[error("op {index}: word index decreased")]
    WordOrder { index: usize },
    #[error("trace lengths do not line up: expected {expected}, found {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("op {index}: word index {word} is out of range for the utterance")]
    WordRange { index: usize, word: usize },
    #[error("traces are inconsistent: {0}")]
    Inconsistent(String),
}

/// A validated edit script mapping a source utterance to an output utterance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformTrace {
    ops: Vec<EditOp>,
    source_len: usize,
    output_len: usize,
}

impl TransformTrace {
    /// Validates and wraps an op list.
    pub fn new(ops: Vec<EditOp>) -> Result<Self, TraceError> {
        let mut next_src = 0usize;
        let mut next_out = 0usize;
        let mut last_word = 0usize;
        for (index, op) in ops.iter().enumerate() {
            if op.word() < last_word {
                return Err(TraceError::WordOrder { index });
            }
            last_word = op.word();
            match op {
                EditOp::Keep { src, out, .. } => {
                    if *src != next_src {
                        return Err(TraceError::SourceCoverage {
                            index,
                            expected: next_src,
                            found: *src,
                        });
                    }
                    if *out != next_out {
                        return Err(TraceError::OutputCoverage {
                            index,
                            expected: next_out,
                            found: *out,
                        });
                    }
                    next_src += 1;
                    next_out += 1;
                }
                EditOp::Substitute {
                    src, out, symbols, ..
                } => {
                    if src.is_empty() || out.is_empty() {
                        return Err(TraceError::EmptyRange { index });
                    }
                    if src.start != next_src {
                        return Err(TraceError::SourceCoverage {
                            index,
                            expected: next_src,
                            found: src.start,
                        });
                    }
                    if out.start != next_out {
                        return Err(TraceError::OutputCoverage {
                            index,
                            expected: next_out,
                            found: out.start,
                        });
                    }
                    if symbols.len() != out.len() {
                        return Err(TraceError::SymbolCount {
                            index,
                            symbols: symbols.len(),
                            span: out.len(),
                        });
                    }
                    next_src = src.end;
                    next_out = out.end;
                }
                EditOp::Insert { out, .. } => {
                    if *out != next_out {
                        return Err(TraceError::OutputCoverage {
                            index,
                            expected: next_out,
                            found: *out,
                        });
                    }
                    next_out += 1;
                }
                EditOp::Delete { src, .. } => {
                    if *src != next_src {
                        return Err(TraceError::SourceCoverage {
                            index,
                            expected: next_src,
                            found: *src,
                        });
                    }
                    next_src += 1;
                }
            }
        }
        Ok(TransformTrace {
            ops,
            source_len: next_src,
            output_len: next_out,
        })
    }

    /// The identity trace for `utterance`: every phoneme kept in place.
    pub fn identity_for(utterance: &Utterance) -> Self {
        let mut ops = Vec::with_capacity(utterance.phoneme_count());
        let mut idx = 0;
        for (word, w) in utterance.words().iter().enumerate() {
            for _ in 0..w.phoneme_count() {
                ops.push(EditOp::Keep {
                    src: idx,
                    out: idx,
                    word,
                });
                idx += 1;
            }
        }
        TransformTrace {
            ops,
            source_len: idx,
            output_len: idx,
        }
    }

    pub fn ops(&self) -> &[EditOp] {
        &self.ops
    }

    /// Number of source phonemes covered.
    pub fn source_len(&self) -> usize {
        self.source_len
    }

    /// Number of output phonemes covered.
    pub fn output_len(&self) -> usize {
        self.output_len
    }

    /// True if every op is a `Keep`.
    pub fn is_identity(&self) -> bool {
        self.ops.iter().all(|op| matches!(op, EditOp::Keep { .. }))
    }

    /// Source phoneme indexes altered (substituted or deleted) by the trace.
    pub fn altered_source_indexes(&self) -> BTreeSet<usize> {
        let mut altered = BTreeSet::new();
        for op in &self.ops {
            match op {
                EditOp::Substitute { src, .. } => altered.extend(src.clone()),
                EditOp::Delete { src, .. } => {
                    altered.insert(*src);
                }
                _ => {}
            }
        }
        altered
    }

    /// Composes `self` (applied first) with `later` (applied to `self`'s
    /// output), producing a single trace from `self`'s source to `later`'s
    /// output.
    ///
    /// `Keep∘Keep` stays `Keep`; any pairing involving a rewrite degrades to
    /// the appropriate non-`Keep` op, tagged with the later contributing rule
    /// id. An insertion that is subsequently deleted vanishes entirely.
    pub fn compose(&self, later: &TransformTrace) -> Result<TransformTrace, TraceError> {
        if self.output_len != later.source_len {
            return Err(TraceError::LengthMismatch {
                expected: self.output_len,
                actual: later.source_len,
            });
        }

        let a = &self.ops;
        let b = &later.ops;
        let mut ops: Vec<EditOp> = Vec::with_capacity(a.len().max(b.len()));
        let mut ai = 0;
        let mut bi = 0;
        let mut next_src = 0usize;
        let mut next_out = 0usize;

        loop {
            // Standalone ops that touch no intermediate position come first:
            // deletions from the earlier trace, then insertions from the
            // later one.
            if let Some(EditOp::Delete { rule, word, .. }) = a.get(ai) {
                ops.push(EditOp::Delete {
                    src: next_src,
                    rule: rule.clone(),
                    word: *word,
                });
                next_src += 1;
                ai += 1;
                continue;
            }
            if let Some(EditOp::Insert { symbol, rule, word, .. }) = b.get(bi) {
                ops.push(EditOp::Insert {
                    out: next_out,
                    symbol: symbol.clone(),
                    rule: rule.clone(),
                    word: *word,
                });
                next_out += 1;
                bi += 1;
                continue;
            }
            let (Some(_), Some(_)) = (a.get(ai), b.get(bi)) else {
                if ai == a.len() && bi == b.len() {
                    break;
                }
                return Err(TraceError::Inconsistent(
                    "op streams ended at different intermediate positions".into(),
                ));
            };

            // Grow a connected component until both sides cover the same
            // span of intermediate positions.
            let mut a_ops: Vec<&EditOp> = Vec::new();
            let mut b_ops: Vec<&EditOp> = Vec::new();
            let mut a_mid = 0usize; // intermediate positions produced
            let mut b_mid = 0usize; // intermediate positions consumed
            let mut src_count = 0usize;
            let mut out_count = 0usize;
            // Symbols of intermediate positions, where the earlier trace
            // recorded them (None for positions produced by Keep).
            let mut mid_symbols: Vec<Option<&str>> = Vec::new();

            loop {
                if a_mid <= b_mid || a_ops.is_empty() {
                    let Some(op) = a.get(ai) else {
                        return Err(TraceError::Inconsistent(
                            "earlier trace exhausted mid-component".into(),
                        ));
                    };
                    ai += 1;
                    match op {
                        EditOp::Keep { .. } => {
                            a_mid += 1;
                            src_count += 1;
                            mid_symbols.push(None);
                        }
                        EditOp::Substitute { src, symbols, .. } => {
                            a_mid += symbols.len();
                            src_count += src.len();
                            mid_symbols.extend(symbols.iter().map(|s| Some(s.as_str())));
                        }
                        EditOp::Insert { symbol, .. } => {
                            a_mid += 1;
                            mid_symbols.push(Some(symbol));
                        }
                        EditOp::Delete { .. } => {
                            src_count += 1;
                        }
                    }
                    a_ops.push(op);
                } else {
                    let Some(op) = b.get(bi) else {
                        return Err(TraceError::Inconsistent(
                            "later trace exhausted mid-component".into(),
                        ));
                    };
                    bi += 1;
                    match op {
                        EditOp::Keep { .. } => {
                            b_mid += 1;
                            out_count += 1;
                        }
                        EditOp::Substitute { src, out, .. } => {
                            b_mid += src.len();
                            out_count += out.len();
                        }
                        EditOp::Insert { .. } => {
                            out_count += 1;
                        }
                        EditOp::Delete { .. } => {
                            b_mid += 1;
                        }
                    }
                    b_ops.push(op);
                }
                if a_mid == b_mid && !b_ops.is_empty() {
                    break;
                }
            }

            // Trailing zero-width ops bind to the next component instead
            // (handled by the standalone arms above), so the component here
            // is minimal and connected.
            let rule = b_ops
                .iter()
                .find_map(|op| op.rule())
                .or_else(|| a_ops.iter().find_map(|op| op.rule()))
                .map(str::to_string);
            let word = b_ops
                .first()
                .map(|op| op.word())
                .or_else(|| a_ops.first().map(|op| op.word()))
                .unwrap_or(0);

            if src_count == 0 && out_count == 0 {
                continue; // an insertion later deleted: net no-op
            }
            if out_count == 0 {
                let rule = rule.ok_or_else(|| {
                    TraceError::Inconsistent("deleting component without a rule".into())
                })?;
                for _ in 0..src_count {
                    ops.push(EditOp::Delete {
                        src: next_src,
                        rule: rule.clone(),
                        word,
                    });
                    next_src += 1;
                }
                continue;
            }

            // Output symbols for the component, drawn from the later trace
            // where it rewrote, and from the earlier trace's recorded symbols
            // where the later trace kept.
            let mut symbols: Vec<String> = Vec::with_capacity(out_count);
            let mut mid_cursor = 0usize;
            let mut all_keep = true;
            for op in &b_ops {
                match op {
                    EditOp::Keep { .. } => {
                        if let Some(sym) = mid_symbols[mid_cursor] {
                            symbols.push(sym.to_string());
                            all_keep = false;
                        } else {
                            symbols.push(String::new()); // placeholder; keep column
                        }
                        mid_cursor += 1;
                    }
                    EditOp::Substitute { src, symbols: s, .. } => {
                        symbols.extend(s.iter().cloned());
                        mid_cursor += src.len();
                        all_keep = false;
                    }
                    EditOp::Insert { symbol, .. } => {
                        symbols.push(symbol.clone());
                        all_keep = false;
                    }
                    EditOp::Delete { .. } => {
                        mid_cursor += 1;
                        all_keep = false;
                    }
                }
            }
            let a_all_keep = a_ops.iter().all(|op| matches!(op, EditOp::Keep { .. }));

            if src_count == 0 {
                let rule = rule.ok_or_else(|| {
                    TraceError::Inconsistent("inserting component without a rule".into())
                })?;
                for symbol in symbols {
                    ops.push(EditOp::Insert {
                        out: next_out,
                        symbol,
                        rule: rule.clone(),
                        word,
                    });
                    next_out += 1;
                }
                continue;
            }

            if src_count == 1 && out_count == 1 && all_keep && a_all_keep {
                ops.push(EditOp::Keep {
                    src: next_src,
                    out: next_out,
                    word,
                });
                next_src += 1;
                next_out += 1;
                continue;
            }

            // A kept column inside a rewriting component can only come from
            // the earlier trace (the later one kept it), so its symbol is
            // recorded there — except over a Keep∘Keep column, which is
            // impossible inside a connected multi-op component.
            if symbols.iter().any(String::is_empty) {
                return Err(TraceError::Inconsistent(
                    "kept column without a recorded symbol inside a rewrite".into(),
                ));
            }
            let rule = rule.ok_or_else(|| {
                TraceError::Inconsistent("rewriting component without a rule".into())
            })?;
            ops.push(EditOp::Substitute {
                src: next_src..next_src + src_count,
                out: next_out..next_out + out_count,
                symbols,
                rule,
                word,
            });
            next_src += src_count;
            next_out += out_count;
        }

        TransformTrace::new(ops)
    }

    /// Replays the trace against `source`, reconstructing the output
    /// utterance exactly.
    ///
    /// Prosodic markers are anchored to the phoneme that follows them: a
    /// marker moves with its anchor's output position, clamps to the end of a
    /// substituted span, chains past deletions, and stays word-final when it
    /// has no following phoneme. Words whose phonemes are all deleted vanish
    /// from the output. The result carries no durations.
    pub fn replay(&self, source: &Utterance) -> Result<Utterance, TraceError> {
        if self.source_len != source.phoneme_count() {
            return Err(TraceError::LengthMismatch {
                expected: source.phoneme_count(),
                actual: self.source_len,
            });
        }
        for (index, op) in self.ops.iter().enumerate() {
            if op.word() >= source.words().len() {
                return Err(TraceError::WordRange {
                    index,
                    word: op.word(),
                });
            }
        }

        // Bucket ops per word.
        let mut per_word: Vec<Vec<&EditOp>> = vec![Vec::new(); source.words().len()];
        for op in &self.ops {
            per_word[op.word()].push(op);
        }

        let mut out_words = Vec::with_capacity(source.words().len());
        for (word_idx, word) in source.words().iter().enumerate() {
            if word.is_oov() {
                if !per_word[word_idx].is_empty() {
                    return Err(TraceError::Inconsistent(format!(
                        "ops recorded against OOV word {word_idx}"
                    )));
                }
                out_words.push(word.clone());
                continue;
            }
            if let Some(rebuilt) = replay_word(word, &per_word[word_idx])? {
                out_words.push(rebuilt);
            }
        }
        Ok(Utterance::new(out_words))
    }
}

/// Rebuilds a single word from its ops; `None` if the word was emptied.
fn replay_word(word: &Word, ops: &[&EditOp]) -> Result<Option<Word>, TraceError> {
    // Split the word into phoneme symbols and the markers preceding each
    // phoneme (index n = trailing markers).
    let mut phonemes: Vec<&str> = Vec::new();
    let mut marks_before: Vec<Vec<&Segment>> = vec![Vec::new()];
    for segment in word.segments() {
        if let Some(sym) = segment.symbol() {
            phonemes.push(sym);
            marks_before.push(Vec::new());
        } else {
            marks_before.last_mut().unwrap().push(segment);
        }
    }
    let n = phonemes.len();

    // Local (word-relative) offsets of the trace's global indexes.
    let src_base = ops
        .iter()
        .find_map(|op| match op {
            EditOp::Keep { src, .. } | EditOp::Delete { src, .. } => Some(*src),
            EditOp::Substitute { src, .. } => Some(src.start),
            EditOp::Insert { .. } => None,
        })
        .ok_or_else(|| TraceError::Inconsistent("word has no source-covering ops".into()))?;

    // Output symbols and, per source phoneme, its anchor among the outputs.
    let mut out_symbols: Vec<String> = Vec::new();
    let mut anchor: Vec<Option<usize>> = vec![None; n + 1]; // None = chain right
    for op in ops {
        match op {
            EditOp::Keep { src, .. } => {
                anchor[src - src_base] = Some(out_symbols.len());
                out_symbols.push(phonemes[src - src_base].to_string());
            }
            EditOp::Substitute { src, out, symbols, .. } => {
                let start = out_symbols.len();
                for k in src.clone() {
                    anchor[k - src_base] = Some(start + (k - src.start).min(out.len()));
                }
                out_symbols.extend(symbols.iter().cloned());
            }
            EditOp::Insert { symbol, .. } => {
                out_symbols.push(symbol.clone());
            }
            EditOp::Delete { .. } => {} // chains to the next anchor
        }
    }
    let out_len = out_symbols.len();
    anchor[n] = Some(out_len);

    // Resolve deletion chains right-to-left.
    let mut resolved = vec![0usize; n + 1];
    let mut next = out_len;
    for k in (0..=n).rev() {
        if let Some(a) = anchor[k] {
            next = a;
        }
        resolved[k] = next;
    }

    if out_len == 0 {
        return Ok(None);
    }

    // Assemble: markers go before their resolved output position.
    let mut marks_at: Vec<Vec<&Segment>> = vec![Vec::new(); out_len + 1];
    for (k, marks) in marks_before.iter().enumerate() {
        marks_at[resolved[k].min(out_len)].extend(marks.iter().copied());
    }
    let mut segments: Vec<Segment> = Vec::with_capacity(out_len + 2);
    for (q, symbol) in out_symbols.into_iter().enumerate() {
        segments.extend(marks_at[q].iter().map(|s| (*s).clone()));
        segments.push(Segment::Phoneme { symbol });
    }
    // Trailing markers; a trailing syllable boundary cannot survive (the
    // word invariant forbids it), so it is dropped like word-final
    // punctuation.
    segments.extend(
        marks_at[out_len]
            .iter()
            .map(|s| (*s).clone())
            .filter(|s| !matches!(s, Segment::SyllableBoundary)),
    );
    while matches!(segments.last(), Some(Segment::SyllableBoundary)) {
        segments.pop();
    }
    Word::new(segments)
        .map(Some)
        .map_err(|e| TraceError::Inconsistent(format!("replayed word is invalid: {e}")))
}
