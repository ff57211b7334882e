//! JSONL record schemas shared by the batch subcommands.
//!
//! Field names are part of the tool's interface contract and must not
//! change without a version bump. Optional fields are omitted from the
//! serialized form rather than emitted as `null`.

use accent_forge_core::metrics::ErrorRateReport;
use accent_forge_core::presets::AccentId;
use accent_forge_core::trace::EditOp;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Accent selector carried on requests: a built-in preset or none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
#[clap(rename_all = "lower")]
pub enum Accent {
    Sp,
    In,
    None,
}

impl Accent {
    pub fn preset(self) -> Option<AccentId> {
        match self {
            Accent::Sp => Some(AccentId::Sp),
            Accent::In => Some(AccentId::In),
            Accent::None => None,
        }
    }

    /// Default synthesis voice for this accent.
    pub fn default_speaker(self) -> &'static str {
        match self {
            Accent::Sp => "ef_dora",
            Accent::In => "hf_alpha",
            Accent::None => "bm_fable",
        }
    }
}

impl fmt::Display for Accent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Accent::Sp => "sp",
            Accent::In => "in",
            Accent::None => "none",
        })
    }
}

/// One input utterance for `transform` batch mode.
///
/// Exactly one of `text` (orthography, converted through the lexicon) and
/// `ipa` (pre-transcribed) must be present; `durations` are per-phoneme
/// seconds for the source pronunciation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchRecord {
    pub utterance_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ipa: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub durations: Option<Vec<f64>>,
}

impl BatchRecord {
    /// Enforces the exactly-one-of-text/ipa invariant.
    pub fn validate(&self) -> Result<(), String> {
        match (&self.text, &self.ipa) {
            (Some(_), Some(_)) => Err("record has both \"text\" and \"ipa\"".into()),
            (None, None) => Err("record has neither \"text\" nor \"ipa\"".into()),
            _ => Ok(()),
        }
    }
}

/// One synthesis request, produced by `transform` and consumed by `submit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TtsRequest {
    pub utterance_id: String,
    /// Rendered IPA for the full utterance, words separated by spaces.
    pub phonemes: String,
    pub speaker_id: String,
    /// Per-phoneme durations in seconds, aligned to `phonemes`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub durations: Option<Vec<f64>>,
    pub accent: Accent,
    /// `name@hash` of the rule set that produced `phonemes` ("none" when no
    /// rules were applied).
    pub ruleset_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Per-rule firing probabilities that were in effect.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength: Option<BTreeMap<String, f64>>,
    /// Edit operations from source to output; emitted with `--emit-trace`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<EditOp>>,
}

/// Inline per-record failure emitted into the output stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub utterance_id: String,
    pub error: ErrorBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    /// Stable machine-readable failure class (e.g. "tokenize", "apply").
    pub kind: String,
    pub message: String,
}

impl ErrorRecord {
    pub fn new(utterance_id: impl Into<String>, kind: &str, message: impl fmt::Display) -> Self {
        ErrorRecord {
            utterance_id: utterance_id.into(),
            error: ErrorBody {
                kind: kind.to_string(),
                message: message.to_string(),
            },
        }
    }
}

/// One transcript line for `score` input files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranscriptRecord {
    pub utterance_id: String,
    pub text: String,
}

/// Full `score` output document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub unit: String,
    pub utterances: Vec<UtteranceScore>,
    /// Total edits over total reference length — not the mean of rates.
    pub aggregate: ErrorRateReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceScore {
    pub utterance_id: String,
    #[serde(flatten)]
    pub report: ErrorRateReport,
}

/// Final `submit` accounting, printed as one JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitSummary {
    pub submitted: usize,
    pub ok: usize,
    pub failed: usize,
    pub failures: Vec<SubmitFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitFailure {
    pub utterance_id: String,
    pub error: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_record_requires_exactly_one_source() {
        let both: BatchRecord =
            serde_json::from_str(r#"{"utterance_id":"u1","text":"hi","ipa":"haɪ"}"#).unwrap();
        assert!(both.validate().is_err());
        let neither: BatchRecord = serde_json::from_str(r#"{"utterance_id":"u1"}"#).unwrap();
        assert!(neither.validate().is_err());
        let one: BatchRecord =
            serde_json::from_str(r#"{"utterance_id":"u1","ipa":"haɪ"}"#).unwrap();
        assert!(one.validate().is_ok());
    }

    #[test]
    fn batch_record_rejects_unknown_fields() {
        let err = serde_json::from_str::<BatchRecord>(r#"{"utterance_id":"u1","ipa":"a","x":1}"#);
        assert!(err.is_err());
    }

    #[test]
    fn tts_request_omits_absent_optionals() {
        let request = TtsRequest {
            utterance_id: "u1".into(),
            phonemes: "sɹi".into(),
            speaker_id: "ef_dora".into(),
            durations: None,
            accent: Accent::Sp,
            ruleset_version: "spanish-accent@0f5090fa".into(),
            seed: None,
            strength: None,
            trace: None,
        };
        let json = serde_json::to_string(&request).unwrap();
        assert!(!json.contains("durations"));
        assert!(!json.contains("seed"));
        assert!(!json.contains("strength"));
        assert!(!json.contains("trace"));
        assert!(json.contains("\"accent\":\"sp\""));
        let back: TtsRequest = serde_json::from_str(&json).unwrap();
        assert_eq!(back, request);
    }

    #[test]
    fn accent_serde_round_trip() {
        for accent in [Accent::Sp, Accent::In, Accent::None] {
            let json = serde_json::to_string(&accent).unwrap();
            assert_eq!(json, format!("\"{accent}\""));
            assert_eq!(serde_json::from_str::<Accent>(&json).unwrap(), accent);
        }
    }

    #[test]
    fn error_record_shape() {
        let record = ErrorRecord::new("u9", "tokenize", "unknown symbol");
        let json = serde_json::to_string(&record).unwrap();
        assert_eq!(
            json,
            r#"{"utterance_id":"u9","error":{"kind":"tokenize","message":"unknown symbol"}}"#
        );
    }

    #[test]
    fn default_speakers() {
        assert_eq!(Accent::Sp.default_speaker(), "ef_dora");
        assert_eq!(Accent::In.default_speaker(), "hf_alpha");
        assert_eq!(Accent::None.default_speaker(), "bm_fable");
    }
}
