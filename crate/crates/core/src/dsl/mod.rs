//! The scenario language: vocabularies, cast, exchanges, goal rules and
//! trigger rules, written as `.social` text files.
//!
//! [`parse`] reads and validates a file, [`serialize`] writes the canonical
//! form. Declarations are printed grouped by kind and sorted by symbol; rule
//! lists keep their authored order because order changes volition.

mod diagnostic;
mod format;
mod lexer;
mod parser;
mod validate;

use std::collections::BTreeMap;

pub use diagnostic::{Diagnostic, DiagnosticCode, Severity, Span};

use crate::exchange::{ExchangeDef, TriggerRule};
use crate::model::{CharacterId, MapKind, ScoreRange};
use crate::volition::InfluenceRule;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkDecl {
    pub range: ScoreRange,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatusDecl {
    pub targeted: bool,
    /// Ticks until expiry; 0 is permanent.
    pub duration: u32,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterDecl {
    pub name: Option<String>,
    pub gender: String,
    pub race: String,
    pub orientation: String,
    pub location: String,
    pub player: bool,
    pub traits: BTreeMap<String, Span>,
    pub likes: BTreeMap<String, Span>,
    pub dislikes: BTreeMap<String, Span>,
    pub scores: BTreeMap<(MapKind, String, CharacterId), (i64, Span)>,
    pub statuses: BTreeMap<(String, Option<CharacterId>), Span>,
    pub relationships: BTreeMap<(String, CharacterId), Span>,
    pub span: Span,
}

impl CharacterDecl {
    pub(crate) fn new(span: Span) -> Self {
        CharacterDecl {
            name: None,
            gender: "unspecified".to_string(),
            race: "unspecified".to_string(),
            orientation: "straight".to_string(),
            location: String::new(),
            player: false,
            traits: BTreeMap::new(),
            likes: BTreeMap::new(),
            dislikes: BTreeMap::new(),
            scores: BTreeMap::new(),
            statuses: BTreeMap::new(),
            relationships: BTreeMap::new(),
            span,
        }
    }
}

/// Goal-formation rules for one network; `initiator` is the goal owner and
/// `target` the character the goal is about.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoalBlock {
    pub rules: Vec<InfluenceRule>,
    pub span: Span,
}

/// A parsed scenario. Maps are keyed by symbol, so iteration order is the
/// canonical order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScenarioDoc {
    pub networks: BTreeMap<String, NetworkDecl>,
    pub traits: BTreeMap<String, Span>,
    pub statuses: BTreeMap<String, StatusDecl>,
    pub relationships: BTreeMap<String, Span>,
    pub locations: BTreeMap<String, Span>,
    pub characters: BTreeMap<String, CharacterDecl>,
    pub exchanges: BTreeMap<String, ExchangeDef>,
    pub goal_blocks: BTreeMap<String, GoalBlock>,
    pub triggers: Vec<TriggerRule>,
}

impl ScenarioDoc {
    pub fn player_id(&self) -> Option<CharacterId> {
        self.characters
            .iter()
            .find(|(_, c)| c.player)
            .map(|(id, _)| CharacterId::new(id.clone()))
    }

    /// Canonical text of this document.
    pub fn to_canonical(&self) -> String {
        serialize(self)
    }
}

/// Parses and validates. Succeeds only when no error diagnostics remain;
/// warnings are dropped.
pub fn parse(text: &str) -> Result<ScenarioDoc, Vec<Diagnostic>> {
    let (doc, diags) = parse_with_diagnostics(text);
    match doc {
        Some(doc) if !diags.iter().any(Diagnostic::is_error) => Ok(doc),
        _ => Err(diags),
    }
}

/// Parses and validates, returning every diagnostic (errors and warnings).
/// The document is `None` only when the text could not be read at all.
pub fn parse_with_diagnostics(text: &str) -> (Option<ScenarioDoc>, Vec<Diagnostic>) {
    let (tokens, mut diags) = lexer::lex(text);
    let (doc, syntax) = parser::parse_tokens(&tokens);
    diags.extend(syntax);
    if diags.is_empty() {
        diags.extend(validate::validate(&doc));
    }
    diagnostic::sort_diagnostics(&mut diags);
    (Some(doc), diags)
}

/// Like [`parse_with_diagnostics`] for raw bytes; non UTF-8 input is
/// reported at the first bad byte.
pub fn parse_bytes(bytes: &[u8]) -> (Option<ScenarioDoc>, Vec<Diagnostic>) {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_with_diagnostics(text),
        Err(e) => {
            let valid = &bytes[..e.valid_up_to()];
            let line = valid.iter().filter(|b| **b == b'\n').count() as u32 + 1;
            let last_line = valid.rsplit(|b| *b == b'\n').next().unwrap_or(&[]);
            let column = String::from_utf8_lossy(last_line).chars().count() as u32 + 1;
            let d = Diagnostic::new(DiagnosticCode::InvalidUtf8, Span::new(line, column), "file is not valid UTF-8");
            (None, vec![d])
        }
    }
}

/// Semantic checks over a parsed document.
pub fn validate(doc: &ScenarioDoc) -> Vec<Diagnostic> {
    let mut d = validate::validate(doc);
    diagnostic::sort_diagnostics(&mut d);
    d
}

/// Canonical text form; `parse(serialize(doc))` equals `doc`.
pub fn serialize(doc: &ScenarioDoc) -> String {
    format::serialize(doc)
}

/// A condition literal as it would be written in a scenario file.
pub fn literal_text(l: &crate::volition::Literal) -> String {
    format::literal(l)
}

/// A condition as it would be written in a scenario file.
pub fn condition_text(c: &crate::volition::Condition) -> String {
    format::condition(c)
}

/// Reserved words that cannot name a declared symbol.
pub const RESERVED: &[&str] = &[
    "network",
    "trait",
    "status",
    "relationship",
    "location",
    "character",
    "exchange",
    "goals",
    "trigger",
    "rule",
    "weight",
    "per",
    "when",
    "then",
    "and",
    "not",
    "true",
    "false",
    "any",
    "initiator",
    "target",
    "subject",
    "volition",
];
