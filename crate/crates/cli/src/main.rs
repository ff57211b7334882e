//! Command-line frontend for the accent transformation toolkit.
//!
//! Subcommands cover the full pipeline: `tokenize` and `g2p` get text into
//! phonemes, `transform` applies accent rule sets (plain strings or JSONL
//! batches), `rules` manages rule set files, `score` computes WER/CER, and
//! `submit` sends synthesis requests to an external TTS endpoint.

mod records;
mod rules_cmd;
mod score;
mod submit;
mod transform;

use std::path::PathBuf;
use std::process::ExitCode;

use accent_forge_core::dsl::ruleset_version;
use accent_forge_core::g2p::g2p;
use accent_forge_core::inventory::default_inventory;
use accent_forge_core::presets::{builtin_ruleset, spanish_without_stop_voicing, AccentId};
use accent_forge_core::segment::Segment;
use accent_forge_core::tokenize::tokenize;
use anyhow::Result;
use clap::Parser;
use once_cell::sync::Lazy;

use transform::{load_inventory, load_lexicon, OovChoice};

fn long_version() -> &'static str {
    static VERSION: Lazy<String> = Lazy::new(|| {
        format!(
            "{}\ninventory {}\npreset {}\npreset {}\npreset {} (stop voicing disabled)",
            env!("CARGO_PKG_VERSION"),
            default_inventory().reference(),
            ruleset_version(builtin_ruleset(AccentId::Sp)),
            ruleset_version(builtin_ruleset(AccentId::In)),
            ruleset_version(spanish_without_stop_voicing()),
        )
    });
    &VERSION
}

#[derive(Parser)]
#[command(
    name = "accent-forge",
    version,
    long_version = long_version(),
    about = "Accent transformation pipeline: tokenize, G2P, rewrite, align, score, submit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Subcommand)]
enum Command {
    /// Apply an accent rule set to IPA input, text, or a JSONL batch.
    Transform(transform::TransformArgs),
    /// Inspect, validate, and format rule set files.
    Rules(rules_cmd::RulesArgs),
    /// Convert orthographic text to IPA with a pronunciation lexicon.
    G2p(G2pArgs),
    /// Compare reference and hypothesis transcripts (WER/CER).
    Score(score::ScoreArgs),
    /// Send TtsRequest JSONL to a synthesis endpoint, saving WAV replies.
    Submit(submit::SubmitArgs),
    /// Split IPA text into inventory phonemes and marks.
    Tokenize(TokenizeArgs),
}

#[derive(Debug, clap::Args)]
struct G2pArgs {
    /// Text to convert; omit to read lines from stdin.
    text: Option<String>,

    /// Pronunciation lexicon file (CMU dictionary format); defaults to the
    /// small bundled lexicon.
    #[arg(long)]
    lexicon: Option<PathBuf>,

    /// What to do with words missing from the lexicon.
    #[arg(long, value_enum, default_value_t)]
    oov: OovChoice,
}

#[derive(Debug, clap::Args)]
struct TokenizeArgs {
    /// IPA text to split; omit to read lines from stdin.
    text: Option<String>,

    /// Phoneme inventory file; defaults to the built-in inventory.
    #[arg(long)]
    inventory: Option<PathBuf>,
}

/// Runs `handle` on the positional argument, or on each stdin line.
fn for_each_input_line(text: &Option<String>, mut handle: impl FnMut(&str) -> Result<()>) -> Result<()> {
    match text {
        Some(text) => handle(text),
        None => {
            for line in std::io::stdin().lines() {
                handle(&line?)?;
            }
            Ok(())
        }
    }
}

fn run_g2p(args: &G2pArgs) -> Result<ExitCode> {
    let lexicon = load_lexicon(args.lexicon.as_deref())?;
    for_each_input_line(&args.text, |line| {
        let utterance = g2p(line, &lexicon, args.oov.policy())?;
        println!("{}", utterance.render());
        Ok(())
    })?;
    Ok(ExitCode::SUCCESS)
}

fn run_tokenize(args: &TokenizeArgs) -> Result<ExitCode> {
    let inventory = load_inventory(args.inventory.as_deref())?;
    for_each_input_line(&args.text, |line| {
        let utterance = tokenize(line, &inventory)?;
        for word in utterance.words() {
            let rendered: Vec<String> = word
                .segments()
                .iter()
                .map(|segment| match segment {
                    Segment::Phoneme { symbol } => symbol.clone(),
                    Segment::PrimaryStress => "ˈ".to_string(),
                    Segment::SecondaryStress => "ˌ".to_string(),
                    Segment::SyllableBoundary => ".".to_string(),
                })
                .collect();
            println!("{}", rendered.join(" "));
        }
        Ok(())
    })?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Transform(args) => transform::run(args),
        Command::Rules(args) => rules_cmd::run(args),
        Command::G2p(args) => run_g2p(args),
        Command::Score(args) => score::run(args),
        Command::Submit(args) => submit::run(args),
        Command::Tokenize(args) => run_tokenize(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::FAILURE
        }
    }
}
