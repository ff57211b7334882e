//! The `score` subcommand: word or character error rates between two JSONL
//! transcript files keyed by utterance id.
//!
//! Both files must carry exactly the same id set; per-utterance reports are
//! emitted in reference-file order, and the aggregate is total edits over
//! total reference length (not the mean of the per-utterance rates).

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use accent_forge_core::metrics::{cer, normalize_transcript, wer, ErrorRateReport};
use anyhow::{bail, Context, Result};

use crate::records::{ScoreReport, TranscriptRecord, UtteranceScore};

#[derive(Debug, clap::Args)]
pub struct ScoreArgs {
    /// Reference transcript JSONL ({"utterance_id", "text"} per line).
    #[arg(long = "ref")]
    pub reference: PathBuf,

    /// Hypothesis transcript JSONL, same schema.
    #[arg(long)]
    pub hyp: PathBuf,

    /// Error unit: whole words or single characters.
    #[arg(long, value_enum, default_value_t = Unit::Word)]
    pub unit: Unit,

    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Unit {
    Word,
    Char,
}

fn load_transcripts(path: &Path) -> Result<Vec<TranscriptRecord>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading transcripts {}", path.display()))?;
    let mut records = Vec::new();
    let mut seen = HashMap::new();
    for (index, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: TranscriptRecord = serde_json::from_str(line).map_err(|e| {
            anyhow::anyhow!("{}: line {}: malformed record: {e}", path.display(), index + 1)
        })?;
        if let Some(first) = seen.insert(record.utterance_id.clone(), index + 1) {
            bail!(
                "{}: line {}: duplicate utterance_id \"{}\" (first on line {first})",
                path.display(),
                index + 1,
                record.utterance_id
            );
        }
        records.push(record);
    }
    Ok(records)
}

pub fn run(args: &ScoreArgs) -> Result<ExitCode> {
    let references = load_transcripts(&args.reference)?;
    let mut hypotheses: HashMap<String, String> = load_transcripts(&args.hyp)?
        .into_iter()
        .map(|r| (r.utterance_id, r.text))
        .collect();

    let mut utterances = Vec::with_capacity(references.len());
    for reference in &references {
        let Some(hypothesis) = hypotheses.remove(&reference.utterance_id) else {
            bail!(
                "missing utterance_id \"{}\" in hypothesis file {}",
                reference.utterance_id,
                args.hyp.display()
            );
        };
        let ref_text = normalize_transcript(&reference.text);
        let hyp_text = normalize_transcript(&hypothesis);
        let report = match args.unit {
            Unit::Word => wer(
                &ref_text.split_whitespace().collect::<Vec<_>>(),
                &hyp_text.split_whitespace().collect::<Vec<_>>(),
            ),
            Unit::Char => cer(&ref_text, &hyp_text),
        };
        utterances.push(UtteranceScore {
            utterance_id: reference.utterance_id.clone(),
            report,
        });
    }
    if let Some(extra) = hypotheses.keys().min() {
        bail!(
            "utterance_id \"{extra}\" in hypothesis file is missing from reference file {}",
            args.reference.display()
        );
    }

    let aggregate = ErrorRateReport::aggregate(utterances.iter().map(|u| &u.report));
    let report = ScoreReport {
        unit: match args.unit {
            Unit::Word => "word".to_string(),
            Unit::Char => "char".to_string(),
        },
        utterances,
        aggregate,
    };
    let rendered = serde_json::to_string_pretty(&report)?;
    match &args.output {
        Some(path) => std::fs::write(path, format!("{rendered}\n"))
            .with_context(|| format!("writing report {}", path.display()))?,
        None => println!("{rendered}"),
    }
    Ok(ExitCode::SUCCESS)
}
