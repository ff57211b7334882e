//! The `transform` subcommand: apply an accent rule set to IPA input,
//! orthographic text, or a JSONL batch of records.
//!
//! Plain mode (positional input) prints the transformed IPA string. Batch
//! mode streams `BatchRecord` lines in and `TtsRequest` lines out,
//! preserving input order and bounding memory by the largest single record.
//! Per-record failures become inline error records and turn the exit code
//! to 2; a line that is not valid JSON aborts the whole run.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use accent_forge_core::align::{alignment_from_trace, project_durations, InsertionPolicy};
use accent_forge_core::dsl::{parse_ruleset, ruleset_version};
use accent_forge_core::g2p::{fixture_lexicon, g2p, Lexicon, OovPolicy};
use accent_forge_core::inventory::{default_inventory, Inventory};
use accent_forge_core::presets::{builtin_ruleset, spanish_without_stop_voicing};
use accent_forge_core::rules::{ApplyError, ApplyOptions, RuleSet};
use accent_forge_core::segment::Utterance;
use accent_forge_core::tokenize::tokenize;
use accent_forge_core::trace::TransformTrace;
use anyhow::{bail, Context, Result};

use crate::records::{Accent, BatchRecord, ErrorRecord, TtsRequest};

#[derive(Debug, clap::Args)]
pub struct TransformArgs {
    /// IPA input, or orthographic text with --g2p. Omit to run in batch
    /// mode, reading JSONL records from --batch or stdin.
    #[arg(conflicts_with = "batch")]
    pub input: Option<String>,

    /// Built-in accent preset to apply.
    #[arg(long, value_enum, default_value_t = Accent::None)]
    pub accent: Accent,

    /// Custom rule set file (.accentrules). Emitted requests carry accent
    /// "none" plus this rule set's version.
    #[arg(long, conflicts_with = "accent")]
    pub ruleset: Option<PathBuf>,

    /// Comma-separated rule ids to enable; an empty value disables every
    /// rule. Omit to run the full rule set.
    #[arg(long)]
    pub rules: Option<String>,

    /// Per-rule firing probabilities as id=p pairs (repeat or
    /// comma-separate), e.g. --strength sp1=0.5,sp4=0.25.
    #[arg(long, value_delimiter = ',')]
    pub strength: Vec<String>,

    /// Seed for the deterministic per-site firing decisions (default 0).
    #[arg(long)]
    pub seed: Option<u64>,

    /// Treat the input as orthographic text and convert it through the
    /// pronunciation lexicon first.
    #[arg(long)]
    pub g2p: bool,

    /// Pronunciation lexicon file (CMU dictionary format); defaults to the
    /// small bundled lexicon.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,

    /// What to do with words missing from the lexicon.
    #[arg(long, value_enum, default_value_t)]
    pub oov: OovChoice,

    /// Project source durations onto the transformed phonemes (default).
    #[arg(long, overrides_with = "no_align")]
    pub align: bool,

    /// Omit durations from the output entirely.
    #[arg(long, overrides_with = "align")]
    pub no_align: bool,

    /// Include the source-to-output edit trace in the output.
    #[arg(long)]
    pub emit_trace: bool,

    /// Batch JSONL file of input records ("-" for stdin).
    #[arg(long)]
    pub batch: Option<PathBuf>,

    /// Write batch output here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Speaker id for emitted requests; defaults per accent (sp: ef_dora,
    /// in: hf_alpha, none: bm_fable).
    #[arg(long)]
    pub speaker: Option<String>,

    /// With --accent sp, drop the word-initial stop voicing mappings
    /// (p t k → b d g) from the substitution rule.
    #[arg(long)]
    pub no_stop_voicing: bool,

    /// Phoneme inventory file; defaults to the built-in inventory.
    #[arg(long)]
    pub inventory: Option<PathBuf>,
}

/// OOV handling choices exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OovChoice {
    /// Fail on the first word missing from the lexicon.
    #[default]
    Error,
    /// Drop missing words from the utterance.
    Skip,
    /// Keep missing words as rule-exempt ⟨spelling⟩ placeholders.
    Passthrough,
}

impl OovChoice {
    pub fn policy(self) -> OovPolicy {
        match self {
            OovChoice::Error => OovPolicy::Error,
            OovChoice::Skip => OovPolicy::Skip,
            OovChoice::Passthrough => OovPolicy::Passthrough,
        }
    }
}

/// Loads the inventory named on the command line, or the built-in default.
pub fn load_inventory(path: Option<&Path>) -> Result<Cow<'static, Inventory>> {
    match path {
        None => Ok(Cow::Borrowed(default_inventory())),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading inventory {}", path.display()))?;
            let inventory = Inventory::parse(&text)
                .with_context(|| format!("parsing inventory {}", path.display()))?;
            Ok(Cow::Owned(inventory))
        }
    }
}

/// Loads the lexicon named on the command line, or the bundled fixture.
pub fn load_lexicon(path: Option<&Path>) -> Result<Cow<'static, Lexicon>> {
    match path {
        None => Ok(Cow::Borrowed(fixture_lexicon())),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading lexicon {}", path.display()))?;
            let lexicon = Lexicon::parse(&text)
                .with_context(|| format!("parsing lexicon {}", path.display()))?;
            Ok(Cow::Owned(lexicon))
        }
    }
}

/// Everything derived from the flags once, before any record is processed.
struct TransformPlan {
    ruleset: Option<RuleSet>,
    options: ApplyOptions,
    version: String,
    accent: Accent,
    speaker: String,
    strength: Option<BTreeMap<String, f64>>,
    align: bool,
    emit_trace: bool,
    seed: Option<u64>,
}

impl TransformPlan {
    fn from_args(args: &TransformArgs, inventory: &Inventory) -> Result<Self> {
        if args.no_stop_voicing && (args.accent != Accent::Sp || args.ruleset.is_some()) {
            bail!("--no-stop-voicing only applies to --accent sp");
        }
        let ruleset: Option<RuleSet> = match (&args.ruleset, args.accent) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading rule set {}", path.display()))?;
                Some(
                    parse_ruleset(&text, inventory)
                        .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?,
                )
            }
            (None, Accent::Sp) if args.no_stop_voicing => {
                Some(spanish_without_stop_voicing().clone())
            }
            (None, accent) => accent.preset().map(|id| builtin_ruleset(id).clone()),
        };

        let enabled = match &args.rules {
            None => None,
            Some(list) => {
                let ids: BTreeSet<String> = list
                    .split(',')
                    .map(str::trim)
                    .filter(|id| !id.is_empty())
                    .map(String::from)
                    .collect();
                Some(ids)
            }
        };
        let strength = parse_strength(&args.strength)?;
        if ruleset.is_none() && (enabled.is_some() || !strength.is_empty()) {
            bail!("--rules and --strength require an accent preset or --ruleset");
        }
        if let Some(ruleset) = &ruleset {
            for id in enabled.iter().flatten().chain(strength.keys()) {
                if ruleset.rule(id).is_none() {
                    bail!("unknown rule id \"{id}\" for rule set {}", ruleset.name());
                }
            }
        }

        let version = match &ruleset {
            None => "none".to_string(),
            Some(ruleset) => effective_version(ruleset, enabled.as_ref())?,
        };
        let accent = if args.ruleset.is_some() {
            Accent::None
        } else {
            args.accent
        };
        let speaker = args
            .speaker
            .clone()
            .unwrap_or_else(|| accent.default_speaker().to_string());
        Ok(TransformPlan {
            ruleset,
            options: ApplyOptions {
                enabled_rule_ids: enabled,
                per_rule_probability: strength.clone(),
                seed: args.seed.unwrap_or(0),
            },
            version,
            accent,
            speaker,
            strength: (!strength.is_empty()).then_some(strength),
            align: !args.no_align,
            emit_trace: args.emit_trace,
            seed: args.seed,
        })
    }

    fn apply(
        &self,
        utterance: &Utterance,
        inventory: &Inventory,
    ) -> Result<(Utterance, TransformTrace), ApplyError> {
        match &self.ruleset {
            Some(ruleset) => ruleset.apply(utterance, inventory, &self.options),
            None => Ok((
                utterance.without_durations(),
                TransformTrace::identity_for(utterance),
            )),
        }
    }
}

fn parse_strength(pairs: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut map = BTreeMap::new();
    for pair in pairs {
        let Some((id, value)) = pair.split_once('=') else {
            bail!("--strength expects id=probability pairs, got \"{pair}\"");
        };
        let p: f64 = value
            .trim()
            .parse()
            .with_context(|| format!("--strength {pair}: not a number"))?;
        if !(0.0..=1.0).contains(&p) {
            bail!("--strength {pair}: probability must be in [0, 1]");
        }
        map.insert(id.trim().to_string(), p);
    }
    Ok(map)
}

/// Version string of the rule set actually in effect: with a subset, the
/// version of the filtered rule set, so equal version strings always mean
/// equal behavior.
fn effective_version(ruleset: &RuleSet, enabled: Option<&BTreeSet<String>>) -> Result<String> {
    match enabled {
        None => Ok(ruleset_version(ruleset)),
        Some(ids) => {
            let rules = ruleset
                .rules()
                .iter()
                .filter(|rule| ids.contains(rule.id()))
                .cloned()
                .collect();
            let filtered = RuleSet::new(ruleset.name(), ruleset.inventory_ref().clone(), rules)?;
            Ok(ruleset_version(&filtered))
        }
    }
}

pub fn run(args: &TransformArgs) -> Result<ExitCode> {
    let inventory = load_inventory(args.inventory.as_deref())?;
    let plan = TransformPlan::from_args(args, &inventory)?;
    match &args.input {
        Some(input) => run_plain(args, input, &inventory, &plan),
        None => run_batch(args, &inventory, &plan),
    }
}

fn run_plain(
    args: &TransformArgs,
    input: &str,
    inventory: &Inventory,
    plan: &TransformPlan,
) -> Result<ExitCode> {
    let source = if args.g2p {
        let lexicon = load_lexicon(args.lexicon.as_deref())?;
        g2p(input, &lexicon, args.oov.policy())?
    } else {
        tokenize(input, inventory)?
    };
    let (output, trace) = plan.apply(&source, inventory)?;
    if plan.emit_trace {
        let line = serde_json::json!({
            "phonemes": output.render(),
            "trace": trace.ops(),
        });
        println!("{line}");
    } else {
        println!("{}", output.render());
    }
    Ok(ExitCode::SUCCESS)
}

fn run_batch(
    args: &TransformArgs,
    inventory: &Inventory,
    plan: &TransformPlan,
) -> Result<ExitCode> {
    let lexicon = load_lexicon(args.lexicon.as_deref())?;
    let reader: Box<dyn BufRead> = match &args.batch {
        Some(path) if path.as_os_str() != "-" => Box::new(BufReader::new(
            File::open(path).with_context(|| format!("opening batch {}", path.display()))?,
        )),
        _ => Box::new(BufReader::new(io::stdin())),
    };
    let mut writer: Box<dyn Write> = match &args.output {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating output {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    };

    let mut partial = false;
    for (index, line) in reader.lines().enumerate() {
        let line = line.with_context(|| format!("reading batch line {}", index + 1))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: BatchRecord = serde_json::from_str(&line)
            .map_err(|e| anyhow::anyhow!("line {}: malformed record: {e}", index + 1))?;
        match process_record(&record, plan, inventory, &lexicon, args.oov.policy()) {
            Ok(request) => {
                writeln!(writer, "{}", serde_json::to_string(&request)?)?;
            }
            Err(error) => {
                partial = true;
                writeln!(writer, "{}", serde_json::to_string(&error)?)?;
            }
        }
    }
    writer.flush()?;
    Ok(if partial {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn process_record(
    record: &BatchRecord,
    plan: &TransformPlan,
    inventory: &Inventory,
    lexicon: &Lexicon,
    oov: OovPolicy,
) -> Result<TtsRequest, Box<ErrorRecord>> {
    let id = &record.utterance_id;
    let fail = |kind: &str, message: &dyn std::fmt::Display| {
        Box::new(ErrorRecord::new(id.clone(), kind, message))
    };
    record
        .validate()
        .map_err(|msg| fail("invalid-record", &msg))?;

    let source = match (&record.text, &record.ipa) {
        (Some(text), _) => g2p(text, lexicon, oov).map_err(|e| fail("g2p", &e))?,
        (_, Some(ipa)) => tokenize(ipa, inventory).map_err(|e| fail("tokenize", &e))?,
        _ => unreachable!("validate() enforces exactly one source"),
    };

    if let Some(durations) = &record.durations {
        let expected = source.phoneme_count();
        if durations.len() != expected {
            return Err(fail(
                "durations",
                &format!("{} durations for {expected} phonemes", durations.len()),
            ));
        }
        if let Some(at) = durations.iter().position(|d| !d.is_finite() || *d < 0.0) {
            return Err(fail(
                "durations",
                &format!("duration at index {at} is not a non-negative number"),
            ));
        }
    }

    let (output, trace) = plan
        .apply(&source, inventory)
        .map_err(|e| fail("apply", &e))?;
    let durations = match (&record.durations, plan.align) {
        (Some(source_durations), true) => {
            let map = alignment_from_trace(&trace, InsertionPolicy::default())
                .map_err(|e| fail("align", &e))?;
            Some(project_durations(source_durations, &map).map_err(|e| fail("align", &e))?)
        }
        _ => None,
    };

    Ok(TtsRequest {
        utterance_id: id.clone(),
        phonemes: output.render(),
        speaker_id: plan.speaker.clone(),
        durations,
        accent: plan.accent,
        ruleset_version: plan.version.clone(),
        seed: plan.seed,
        strength: plan.strength.clone(),
        trace: plan.emit_trace.then(|| trace.ops().to_vec()),
    })
}
