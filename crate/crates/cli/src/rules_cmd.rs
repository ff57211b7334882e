//! The `rules` subcommand: list, validate, and canonically format rule
//! sets, either built-in presets (by accent id) or `.accentrules` files.

use std::path::PathBuf;
use std::process::ExitCode;

use accent_forge_core::dsl::{parse_ruleset, ruleset_version, serialize_ruleset};
use accent_forge_core::presets::builtin_ruleset;
use accent_forge_core::rules::RuleSet;
use anyhow::{Context, Result};

use crate::records::Accent;
use crate::transform::load_inventory;

#[derive(Debug, clap::Args)]
pub struct RulesArgs {
    #[command(subcommand)]
    pub action: RulesAction,
}

#[derive(Debug, clap::Subcommand)]
pub enum RulesAction {
    /// Print the rules of a rule set with ids, contexts, and mapping counts.
    List {
        /// Built-in accent id (sp, in) or path to a .accentrules file.
        target: String,
        /// Phoneme inventory file; defaults to the built-in inventory.
        #[arg(long)]
        inventory: Option<PathBuf>,
    },
    /// Validate a rule set against a phoneme inventory (exit 0 when valid).
    Check {
        /// Built-in accent id (sp, in) or path to a .accentrules file.
        target: String,
        /// Phoneme inventory file; defaults to the built-in inventory.
        #[arg(long)]
        inventory: Option<PathBuf>,
    },
    /// Rewrite a rule set file in canonical form.
    Fmt {
        /// Path to a .accentrules file.
        path: PathBuf,
        /// Rewrite the file in place instead of printing to stdout.
        #[arg(long)]
        write: bool,
        /// Phoneme inventory file; defaults to the built-in inventory.
        #[arg(long)]
        inventory: Option<PathBuf>,
    },
}

/// Resolves "sp"/"in" to the shipped presets, anything else to a file.
fn resolve(target: &str, inventory: Option<&PathBuf>) -> Result<RuleSet> {
    match target {
        "sp" => Ok(builtin_ruleset(Accent::Sp.preset().unwrap()).clone()),
        "in" => Ok(builtin_ruleset(Accent::In.preset().unwrap()).clone()),
        path => {
            let inventory = load_inventory(inventory.map(PathBuf::as_path))?;
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading rule set {path}"))?;
            parse_ruleset(&text, &inventory).map_err(|e| anyhow::anyhow!("{path}: {e}"))
        }
    }
}

pub fn run(args: &RulesArgs) -> Result<ExitCode> {
    match &args.action {
        RulesAction::List { target, inventory } => {
            let ruleset = resolve(target, inventory.as_ref())?;
            println!(
                "{} ({} rules, inventory {})",
                ruleset_version(&ruleset),
                ruleset.rules().len(),
                ruleset.inventory_ref()
            );
            for rule in ruleset.rules() {
                println!(
                    "{}\t{}\t{}\t{} mappings",
                    rule.id(),
                    rule.name(),
                    rule.context().as_str(),
                    rule.entries().len()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        RulesAction::Check { target, inventory } => {
            let ruleset = resolve(target, inventory.as_ref())?;
            println!(
                "OK: {} ({} rules, inventory {})",
                ruleset_version(&ruleset),
                ruleset.rules().len(),
                ruleset.inventory_ref()
            );
            Ok(ExitCode::SUCCESS)
        }
        RulesAction::Fmt {
            path,
            write,
            inventory,
        } => {
            let inventory = load_inventory(inventory.as_deref())?;
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading rule set {}", path.display()))?;
            let ruleset = parse_ruleset(&text, &inventory)
                .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
            let canonical = serialize_ruleset(&ruleset);
            if *write {
                std::fs::write(path, &canonical)
                    .with_context(|| format!("writing {}", path.display()))?;
            } else {
                print!("{canonical}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
