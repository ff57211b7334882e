//! Word and character error rates between reference and hypothesis
//! transcripts.
//!
//! Both metrics are uniform-cost (1 each for substitution, insertion,
//! deletion) minimal edit distance, reported with an operation breakdown.
//! When several minimal edit scripts exist, the reported counts prefer
//! substitution over insertion over deletion, so they are deterministic
//! and symmetric (swapping the inputs swaps insertions with deletions).
//! Normalization is the caller's responsibility;
//! [`normalize_transcript`] implements the standard one (lowercase, strip
//! non-alphanumerics except apostrophes, collapse whitespace).

use serde::{Deserialize, Serialize};

/// Edit-operation breakdown and rate for one comparison.
///
/// `rate` is `(S+I+D) / reference_length`. Comparing an empty reference to
/// an empty hypothesis is 0 by convention; against a non-empty hypothesis
/// the rate is undefined and reported as the `+∞` sentinel, which serializes
/// to JSON `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRateReport {
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
    pub reference_length: usize,
    #[serde(
        serialize_with = "serialize_rate",
        deserialize_with = "deserialize_rate"
    )]
    pub rate: f64,
}

fn serialize_rate<S: serde::Serializer>(rate: &f64, s: S) -> Result<S::Ok, S::Error> {
    if rate.is_finite() {
        s.serialize_some(rate)
    } else {
        s.serialize_none()
    }
}

fn deserialize_rate<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

impl ErrorRateReport {
    fn from_counts(substitutions: usize, insertions: usize, deletions: usize, reference_length: usize) -> Self {
        let edits = substitutions + insertions + deletions;
        let rate = if reference_length > 0 {
            edits as f64 / reference_length as f64
        } else if edits == 0 {
            0.0
        } else {
            f64::INFINITY
        };
        ErrorRateReport {
            substitutions,
            insertions,
            deletions,
            reference_length,
            rate,
        }
    }

    /// Total edit operations.
    pub fn edits(&self) -> usize {
        self.substitutions + self.insertions + self.deletions
    }

    /// Pools several reports into a corpus-level one: counts are summed and
    /// the rate recomputed as total edits over total reference length.
    pub fn aggregate<'a>(reports: impl IntoIterator<Item = &'a ErrorRateReport>) -> ErrorRateReport {
        let (mut s, mut i, mut d, mut n) = (0, 0, 0, 0);
        for r in reports {
            s += r.substitutions;
            i += r.insertions;
            d += r.deletions;
            n += r.reference_length;
        }
        ErrorRateReport::from_counts(s, i, d, n)
    }
}

/// Minimal edit distance with deterministic operation counts.
///
/// Returns `(substitutions, insertions, deletions)`, where insertions are
/// tokens present only in the hypothesis and deletions tokens present only
/// in the reference.
///
/// Minimal edit scripts are not unique; the counts reported here are those
/// of the minimal script with the most substitutions. That choice is
/// canonical: a script with `g` aligned (match or substitute) pairs has
/// exactly `hyp_len - g` insertions and `ref_len - g` deletions, so
/// maximizing substitutions pins all three counts, and swapping the inputs
/// swaps insertions with deletions.
fn edit_counts<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> (usize, usize, usize) {
    let r = reference.len();
    let h = hypothesis.len();
    // dist[i][j]: edits turning reference[..i] into hypothesis[..j].
    // pairs[i][j]: most aligned pairs on any such minimal-cost script.
    let mut dist = vec![vec![0usize; h + 1]; r + 1];
    let mut pairs = vec![vec![0usize; h + 1]; r + 1];
    for (i, row) in dist.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=h {
        dist[0][j] = j;
    }
    for i in 1..=r {
        for j in 1..=h {
            let same = reference[i - 1] == hypothesis[j - 1];
            let align = dist[i - 1][j - 1] + usize::from(!same);
            let ins = dist[i][j - 1] + 1;
            let del = dist[i - 1][j] + 1;
            let best = align.min(ins).min(del);
            let mut most = 0;
            if align == best {
                most = pairs[i - 1][j - 1] + 1;
            }
            if ins == best {
                most = most.max(pairs[i][j - 1]);
            }
            if del == best {
                most = most.max(pairs[i - 1][j]);
            }
            dist[i][j] = best;
            pairs[i][j] = most;
        }
    }
    let edits = dist[r][h];
    let aligned = pairs[r][h];
    let insertions = h - aligned;
    let deletions = r - aligned;
    (edits - insertions - deletions, insertions, deletions)
}

/// Word error rate over pre-tokenized transcripts.
pub fn wer<R: AsRef<str>, H: AsRef<str>>(reference: &[R], hypothesis: &[H]) -> ErrorRateReport {
    let reference: Vec<&str> = reference.iter().map(AsRef::as_ref).collect();
    let hypothesis: Vec<&str> = hypothesis.iter().map(AsRef::as_ref).collect();
    let (s, i, d) = edit_counts(&reference, &hypothesis);
    ErrorRateReport::from_counts(s, i, d, reference.len())
}

/// Character error rate over Unicode scalar values (spaces count).
pub fn cer(reference: &str, hypothesis: &str) -> ErrorRateReport {
    let reference: Vec<char> = reference.chars().collect();
    let hypothesis: Vec<char> = hypothesis.chars().collect();
    let (s, i, d) = edit_counts(&reference, &hypothesis);
    ErrorRateReport::from_counts(s, i, d, reference.len())
}

/// Standard transcript normalization: lowercase, drop every character that
/// is not alphanumeric or an apostrophe, collapse runs of whitespace to one
/// space, trim the ends.
pub fn normalize_transcript(text: &str) -> String {
    let lowered = text.to_lowercase();
    let kept: String = lowered
        .chars()
        .map(|c| {
            if c.is_alphanumeric() || c == '\'' || c == '’' {
                c
            } else if c.is_whitespace() {
                ' '
            } else {
                '\u{0}' // dropped below
            }
        })
        .filter(|c| *c != '\u{0}')
        .collect();
    kept.split_whitespace().collect::<Vec<_>>().join(" ")
}
