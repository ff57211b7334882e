//! Built-in Spanish- and Indian-accent rule sets.
//!
//! The presets ship as `.accentrules` data files (embedded at compile time)
//! rather than code constants, so they go through the same parser and
//! formatting as user-authored rule sets. Each file is verified against a
//! compiled-in SHA-256 checksum at first load, and the test suite checks the
//! parsed result against an independent programmatic definition.

use std::fmt;
use std::str::FromStr;

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use crate::dsl::parse_ruleset;
use crate::inventory::default_inventory;
use crate::rules::{RewriteRule, RuleContext, RuleEntry, RuleSet};

/// A built-in accent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccentId {
    /// Spanish-accented English.
    Sp,
    /// Indian-accented English.
    In,
}

impl AccentId {
    pub fn as_str(&self) -> &'static str {
        match self {
            AccentId::Sp => "sp",
            AccentId::In => "in",
        }
    }
}

impl fmt::Display for AccentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AccentId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sp" => Ok(AccentId::Sp),
            "in" => Ok(AccentId::In),
            other => Err(format!("unknown accent `{other}` (expected `sp` or `in`)")),
        }
    }
}

/// SHA-256 of the shipped Spanish preset file.
pub const SPANISH_RULES_SHA256: &str =
    "0f5090fabfba06a9d88e6cabb59fe4366640388e15131becc9579965db1f623b";
/// SHA-256 of the shipped Indian preset file.
pub const INDIAN_RULES_SHA256: &str =
    "27238e2e9d367afe866b2d9f9feb4450b4f18f5ff0bf421db54ca794639450f7";

const SPANISH_RULES_TEXT: &str =
    include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../presets/sp.accentrules"));
const INDIAN_RULES_TEXT: &str =
    include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../presets/in.accentrules"));

static SPANISH_RULESET: Lazy<RuleSet> =
    Lazy::new(|| load_shipped(SPANISH_RULES_TEXT, SPANISH_RULES_SHA256, "sp"));
static INDIAN_RULESET: Lazy<RuleSet> =
    Lazy::new(|| load_shipped(INDIAN_RULES_TEXT, INDIAN_RULES_SHA256, "in"));

/// The Spanish preset with the word-initial stop-voicing entries
/// (p→b, t→d, k→g) removed from its first rule.
static SPANISH_STRICT_RULESET: Lazy<RuleSet> = Lazy::new(|| {
    let full = builtin_ruleset(AccentId::Sp);
    let rules = full
        .rules()
        .iter()
        .map(|rule| {
            if rule.id() != "sp1" {
                return rule.clone();
            }
            let entries = rule
                .entries()
                .iter()
                .filter(|e| !matches!(e.source(), [s] if matches!(s.as_str(), "p" | "t" | "k")))
                .cloned()
                .collect();
            RewriteRule::new(rule.id(), rule.name(), rule.context(), entries)
                .expect("filtered sp1 remains valid")
        })
        .collect();
    RuleSet::new(full.name(), full.inventory_ref().clone(), rules)
        .expect("strict variant remains valid")
});

fn load_shipped(text: &str, expected_sha256: &str, accent: &str) -> RuleSet {
    let digest = crate::dsl::sha256_hex(text.as_bytes());
    assert_eq!(
        digest, expected_sha256,
        "shipped `{accent}` preset failed its checksum; the data file was modified \
         without updating the compiled-in constant"
    );
    parse_ruleset(text, default_inventory())
        .unwrap_or_else(|e| panic!("shipped `{accent}` preset does not parse: {e}"))
}

/// The built-in rule set for an accent, loaded from its shipped file.
pub fn builtin_ruleset(accent: AccentId) -> &'static RuleSet {
    match accent {
        AccentId::Sp => &SPANISH_RULESET,
        AccentId::In => &INDIAN_RULESET,
    }
}

/// The embedded source text of an accent's shipped `.accentrules` file.
pub fn shipped_source(accent: AccentId) -> &'static str {
    match accent {
        AccentId::Sp => SPANISH_RULES_TEXT,
        AccentId::In => INDIAN_RULES_TEXT,
    }
}

/// The Spanish preset without word-initial stop voicing: `sp1` maps only the
/// fricatives and affricate (v, θ, ð, z, dʒ), leaving p/t/k untouched.
pub fn spanish_without_stop_voicing() -> &'static RuleSet {
    &SPANISH_STRICT_RULESET
}

/// Reference definition of each preset, built directly in code.
///
/// This exists so tests can cross-check the shipped data files against an
/// independent construction; use [`builtin_ruleset`] everywhere else.
pub fn programmatic_ruleset(accent: AccentId) -> RuleSet {
    match accent {
        AccentId::Sp => build_ruleset(
            "spanish-accent",
            &[
                (
                    "sp1",
                    "Initial Consonant Substitution",
                    RuleContext::WordInitial,
                    &[
                        (&["v"], &["b"]),
                        (&["θ"], &["s"]),
                        (&["ð"], &["d"]),
                        (&["z"], &["s"]),
                        (&["dʒ"], &["j"]),
                        (&["p"], &["b"]),
                        (&["t"], &["d"]),
                        (&["k"], &["g"]),
                    ],
                ),
                ("sp2", "Rhoticity", RuleContext::Anywhere, &[(&["ɹ"], &["ɾ"])]),
                (
                    "sp3",
                    "Epenthesis",
                    RuleContext::WordInitial,
                    &[
                        (&["s", "p"], &["e", "s", "p"]),
                        (&["s", "t"], &["e", "s", "t"]),
                        (&["s", "k"], &["e", "s", "k"]),
                    ],
                ),
                (
                    "sp4",
                    "Final Devoicing",
                    RuleContext::WordFinal,
                    &[
                        (&["b"], &["p"]),
                        (&["d"], &["t"]),
                        (&["g"], &["k"]),
                        (&["z"], &["s"]),
                        (&["dʒ"], &["tʃ"]),
                    ],
                ),
                (
                    "sp5",
                    "Vowel Simplification",
                    RuleContext::Anywhere,
                    &[
                        (&["ɪ"], &["i"]),
                        (&["ʊ"], &["u"]),
                        (&["ə"], &["a"]),
                        (&["ɑ"], &["a"]),
                        (&["ʌ"], &["a"]),
                        (&["ɛ"], &["e"]),
                        (&["ɜ"], &["e"]),
                        (&["ɔ"], &["o"]),
                    ],
                ),
                (
                    "sp6",
                    "Monophthongization",
                    RuleContext::Anywhere,
                    &[(&["eɪ"], &["e"]), (&["oʊ"], &["o"])],
                ),
            ],
        ),
        AccentId::In => build_ruleset(
            "indian-accent",
            &[
                (
                    "in1",
                    "Retroflexion",
                    RuleContext::Anywhere,
                    &[(&["t"], &["ʈ"]), (&["d"], &["ɖ"]), (&["ɹ"], &["ɽ"])],
                ),
                (
                    "in2",
                    "Dentalization",
                    RuleContext::Anywhere,
                    &[(&["θ"], &["t̪"]), (&["ð"], &["d̪"]), (&["ɫ"], &["l"])],
                ),
                (
                    "in3",
                    "Consonant Substitutions",
                    RuleContext::Anywhere,
                    &[(&["v"], &["w"]), (&["ʒ"], &["z"])],
                ),
                (
                    "in4",
                    "Vowel Simplification",
                    RuleContext::Anywhere,
                    &[
                        (&["ɪ"], &["i"]),
                        (&["ʊ"], &["u"]),
                        (&["æ"], &["a"]),
                        (&["ʌ"], &["ə"]),
                        (&["ɒ"], &["a"]),
                        (&["ɛ"], &["e"]),
                        (&["ɜ"], &["e"]),
                        (&["ɔ"], &["o"]),
                    ],
                ),
                (
                    "in5",
                    "Monophthongization",
                    RuleContext::Anywhere,
                    &[(&["eɪ"], &["e"]), (&["oʊ"], &["o"]), (&["ə"], &["a"])],
                ),
            ],
        ),
    }
}

type RuleSpec<'a> = (
    &'a str,
    &'a str,
    RuleContext,
    &'a [(&'a [&'a str], &'a [&'a str])],
);

fn build_ruleset(name: &str, rules: &[RuleSpec<'_>]) -> RuleSet {
    let rules = rules
        .iter()
        .map(|(id, label, context, pairs)| {
            let entries = pairs
                .iter()
                .map(|(src, tgt)| RuleEntry::new(src.to_vec(), tgt.to_vec()).expect("valid entry"))
                .collect();
            RewriteRule::new(*id, *label, *context, entries).expect("valid rule")
        })
        .collect();
    RuleSet::new(name, default_inventory().reference().clone(), rules).expect("valid rule set")
}
