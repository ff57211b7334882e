//! Projects per-phoneme durations through a transformation trace.
//!
//! When a rewrite changes the phoneme count, the source durations no longer
//! line up one-to-one. [`alignment_from_trace`] turns a [`TransformTrace`]
//! into an [`AlignmentMap`] that says, for every output phoneme, which source
//! phonemes' time it inherits and in what proportion; [`project_durations`]
//! then produces the output timing. Shares are exact rationals internally so
//! the conservation invariant — total duration in equals total duration
//! out — holds exactly, with floating error introduced only at the final
//! conversion to seconds.
//!
//! "Without alignment" needs no machinery here: a pipeline that wants the
//! synthesizer's own timing simply emits the transformed sequence with no
//! durations at all.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::trace::{EditOp, TransformTrace};

/// How an inserted phoneme acquires time, and how a deleted phoneme's time
/// is reassigned. The borrow fraction `f` applies to insertions only and
/// must lie strictly between 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InsertionPolicy {
    /// Insertions borrow `f` of the following phoneme's time; deletions give
    /// their time to the nearest surviving phoneme on the right.
    BorrowFollowing { fraction: f64 },
    /// Mirror image: borrow from / reassign to the left.
    BorrowPreceding { fraction: f64 },
    /// Insertions borrow `f/2` from each side; deletions split their time
    /// between both neighbors. A missing side falls back to the other.
    BorrowSplit { fraction: f64 },
}

impl Default for InsertionPolicy {
    fn default() -> Self {
        InsertionPolicy::BorrowFollowing { fraction: 0.5 }
    }
}

impl InsertionPolicy {
    pub fn fraction(&self) -> f64 {
        match self {
            InsertionPolicy::BorrowFollowing { fraction }
            | InsertionPolicy::BorrowPreceding { fraction }
            | InsertionPolicy::BorrowSplit { fraction } => *fraction,
        }
    }

    fn validate(&self) -> Result<BigRational, AlignError> {
        let f = self.fraction();
        if f.is_finite() && 0.0 < f && f < 1.0 {
            Ok(BigRational::from_float(f).expect("finite float"))
        } else {
            Err(AlignError::InvalidFraction { fraction: f })
        }
    }
}

/// Alignment failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlignError {
    #[error("word {word} was entirely deleted; no surviving phoneme can absorb its time")]
    DegenerateTrace { word: usize },
    #[error("duration count {actual} does not match the map's source size {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("borrow fraction {fraction} is outside the open interval (0, 1)")]
    InvalidFraction { fraction: f64 },
    #[error("duration at index {index} is not a finite number")]
    InvalidDuration { index: usize },
}

/// For each output phoneme, the source phonemes whose time it inherits and
/// the exact share of each.
///
/// Invariant (checked by [`AlignmentMap::validate`], guaranteed by
/// construction): every source index's shares across all targets sum to
/// exactly 1, so projection conserves total duration.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentMap {
    supports: Vec<Vec<(usize, BigRational)>>,
    n_source: usize,
}

impl AlignmentMap {
    /// Number of source phonemes the map distributes.
    pub fn n_source(&self) -> usize {
        self.n_source
    }

    /// Number of output phonemes the map covers.
    pub fn n_target(&self) -> usize {
        self.supports.len()
    }

    /// The `(source index, share)` supports of one output phoneme.
    pub fn supports(&self, target: usize) -> &[(usize, BigRational)] {
        &self.supports[target]
    }

    /// Checks the exact-share invariants: every target is supported, every
    /// share lies in (0, 1], and each source's shares sum to exactly 1.
    pub fn validate(&self) -> Result<(), String> {
        let mut per_source = vec![BigRational::zero(); self.n_source];
        for (t, supports) in self.supports.iter().enumerate() {
            if supports.is_empty() {
                return Err(format!("target {t} has no source support"));
            }
            for (s, share) in supports {
                if *share <= BigRational::zero() || *share > BigRational::one() {
                    return Err(format!("share {share} for pair ({s}, {t}) outside (0, 1]"));
                }
                per_source[*s] += share;
            }
        }
        for (s, total) in per_source.iter().enumerate() {
            if !total.is_one() {
                return Err(format!("source {s} shares sum to {total}, not 1"));
            }
        }
        Ok(())
    }
}

/// Derives the duration-share map implied by a trace.
///
/// Keeps and 1:1 substitutions pass their source's full share through; an
/// n:m substitution spreads each source's share uniformly over its m output
/// phonemes; deletions hand their share to the nearest surviving output on
/// the policy side; insertions borrow a fraction of a neighbor's shares,
/// leaving the neighbor the rest. All redistribution stays within the word
/// the edit belongs to. Fails with [`AlignError::DegenerateTrace`] when a
/// word's phonemes were all deleted, leaving its time nowhere to go.
pub fn alignment_from_trace(
    trace: &TransformTrace,
    policy: InsertionPolicy,
) -> Result<AlignmentMap, AlignError> {
    let fraction = policy.validate()?;
    let mut supports: Vec<Vec<(usize, BigRational)>> = vec![Vec::new(); trace.output_len()];

    let words: Vec<usize> = trace.ops().iter().map(EditOp::word).collect();
    let mut start = 0;
    while start < trace.ops().len() {
        let mut end = start;
        while end < trace.ops().len() && words[end] == words[start] {
            end += 1;
        }
        align_word(
            &trace.ops()[start..end],
            words[start],
            policy,
            &fraction,
            &mut supports,
        )?;
        start = end;
    }

    Ok(AlignmentMap {
        supports,
        n_source: trace.source_len(),
    })
}

fn align_word(
    ops: &[EditOp],
    word: usize,
    policy: InsertionPolicy,
    fraction: &BigRational,
    supports: &mut [Vec<(usize, BigRational)>],
) -> Result<(), AlignError> {
    // Pass 1: shares carried directly by kept and substituted phonemes.
    // `anchored` are the output positions that own source time outright;
    // `src_targets` lets the deletion pass find a source's neighbors.
    let mut anchored: Vec<usize> = Vec::new();
    let mut src_targets: Vec<(usize, usize)> = Vec::new(); // (src, first target)
    for op in ops {
        match op {
            EditOp::Keep { src, out, .. } => {
                supports[*out].push((*src, BigRational::one()));
                anchored.push(*out);
                src_targets.push((*src, *out));
            }
            EditOp::Substitute { src, out, .. } => {
                let m = BigInt::from(out.len());
                let share = BigRational::new(BigInt::one(), m);
                for t in out.clone() {
                    for s in src.clone() {
                        supports[t].push((s, share.clone()));
                    }
                    anchored.push(t);
                }
                for s in src.clone() {
                    src_targets.push((s, out.start));
                }
            }
            EditOp::Insert { .. } | EditOp::Delete { .. } => {}
        }
    }
    anchored.sort_unstable();
    src_targets.sort_unstable();

    // Pass 2: deleted phonemes hand their whole share to the nearest
    // surviving neighbor on the policy side (both halves for BorrowSplit);
    // if that side has no survivor the other side takes it all.
    for op in ops {
        let EditOp::Delete { src, .. } = op else { continue };
        let following = src_targets
            .iter()
            .find(|(s, _)| s > src)
            .map(|&(_, t)| t);
        let preceding = src_targets
            .iter()
            .rev()
            .find(|(s, _)| s < src)
            .map(|&(_, t)| t);
        let one = BigRational::one();
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let grants: Vec<(usize, BigRational)> = match (policy, following, preceding) {
            (_, None, None) => return Err(AlignError::DegenerateTrace { word }),
            (InsertionPolicy::BorrowSplit { .. }, Some(f), Some(p)) => {
                vec![(f, half.clone()), (p, half)]
            }
            (InsertionPolicy::BorrowFollowing { .. }, Some(f), _) => vec![(f, one)],
            (InsertionPolicy::BorrowPreceding { .. }, _, Some(p)) => vec![(p, one)],
            (_, Some(f), None) => vec![(f, one)],
            (_, None, Some(p)) => vec![(p, one)],
        };
        for (t, share) in grants {
            supports[t].push((*src, share));
        }
    }

    // Pass 3: insertions borrow from the nearest anchored neighbor, in
    // output order so stacked insertions drain a shared neighbor fairly.
    for op in ops {
        let EditOp::Insert { out, .. } = op else { continue };
        let following = anchored.iter().find(|&&t| t > *out).copied();
        let preceding = anchored.iter().rev().find(|&&t| t < *out).copied();
        let half = fraction / BigRational::from_integer(BigInt::from(2));
        let borrows: Vec<(usize, BigRational)> = match (policy, following, preceding) {
            (_, None, None) => return Err(AlignError::DegenerateTrace { word }),
            (InsertionPolicy::BorrowSplit { .. }, Some(f), Some(p)) => {
                vec![(f, half.clone()), (p, half)]
            }
            (InsertionPolicy::BorrowFollowing { .. }, Some(f), _) => vec![(f, fraction.clone())],
            (InsertionPolicy::BorrowPreceding { .. }, _, Some(p)) => vec![(p, fraction.clone())],
            (_, Some(f), None) => vec![(f, fraction.clone())],
            (_, None, Some(p)) => vec![(p, fraction.clone())],
        };
        for (neighbor, factor) in borrows {
            let keep = BigRational::one() - &factor;
            let taken: Vec<(usize, BigRational)> = supports[neighbor]
                .iter()
                .map(|(s, w)| (*s, w * &factor))
                .collect();
            for (_, w) in supports[neighbor].iter_mut() {
                *w *= &keep;
            }
            supports[*out].extend(taken);
        }
    }
    Ok(())
}

/// Applies an alignment map to source durations, in seconds.
///
/// Each output duration is the share-weighted sum of its supports. The
/// arithmetic is exact until the final conversion, so the output total
/// matches the input total to well under 1e-9 relative error.
pub fn project_durations(
    source_durations: &[f64],
    map: &AlignmentMap,
) -> Result<Vec<f64>, AlignError> {
    if source_durations.len() != map.n_source {
        return Err(AlignError::LengthMismatch {
            expected: map.n_source,
            actual: source_durations.len(),
        });
    }
    let exact: Vec<BigRational> = source_durations
        .iter()
        .enumerate()
        .map(|(index, d)| {
            BigRational::from_float(*d).ok_or(AlignError::InvalidDuration { index })
        })
        .collect::<Result<_, _>>()?;
    Ok(map
        .supports
        .iter()
        .map(|row| {
            row.iter()
                .map(|(s, share)| share * &exact[*s])
                .sum::<BigRational>()
                .to_f64()
                .expect("finite rational")
        })
        .collect())
}
