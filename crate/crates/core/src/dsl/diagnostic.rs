//! Positioned diagnostics produced while reading scenario files.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A 1-based source position.
///
/// Spans ride along inside the document so the validator can point at the
/// offending line, but they never take part in structural equality: two
/// documents that differ only in layout compare equal.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct Span {
    pub line: u32,
    pub column: u32,
}

impl Span {
    pub fn new(line: u32, column: u32) -> Self {
        Self { line, column }
    }
}

impl PartialEq for Span {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

impl std::hash::Hash for Span {
    fn hash<H: std::hash::Hasher>(&self, _state: &mut H) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

macro_rules! diagnostic_codes {
    ($($variant:ident => $text:literal,)*) => {
        /// Stable identifiers for every diagnostic the reader can emit.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum DiagnosticCode {
            $($variant,)*
        }

        impl DiagnosticCode {
            pub const ALL: &'static [DiagnosticCode] = &[$(DiagnosticCode::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(DiagnosticCode::$variant => $text,)*
                }
            }
        }
    };
}

diagnostic_codes! {
    InvalidUtf8 => "invalid_utf8",
    UnexpectedChar => "unexpected_char",
    UnterminatedString => "unterminated_string",
    IntOverflow => "int_overflow",
    UnexpectedToken => "unexpected_token",
    UnexpectedEof => "unexpected_eof",
    ReservedWord => "reserved_word",
    DuplicateSymbol => "duplicate_symbol",
    UndeclaredNetwork => "undeclared_network",
    UndeclaredTrait => "undeclared_trait",
    UndeclaredStatus => "undeclared_status",
    UndeclaredRelationship => "undeclared_relationship",
    UndeclaredLocation => "undeclared_location",
    UndeclaredCharacter => "undeclared_character",
    UndeclaredExchange => "undeclared_exchange",
    UnknownOrientation => "unknown_orientation",
    LikesDislikesOverlap => "likes_dislikes_overlap",
    MissingEffects => "missing_effects",
    MissingScene => "missing_scene",
    PlayerCount => "player_count",
    ValueOutOfRange => "value_out_of_range",
    StatusTarget => "status_target",
    SelfReference => "self_reference",
    RoleUnavailable => "role_unavailable",
    MisplacedVolition => "misplaced_volition",
    MisplacedChance => "misplaced_chance",
    UnknownPlaceholder => "unknown_placeholder",
    UnsatisfiableCondition => "unsatisfiable_condition",
}

impl DiagnosticCode {
    pub fn severity(self) -> Severity {
        match self {
            DiagnosticCode::UnsatisfiableCondition => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: u32,
    pub column: u32,
    pub code: DiagnosticCode,
    pub message: String,
}

impl Diagnostic {
    pub fn new(code: DiagnosticCode, span: Span, message: impl Into<String>) -> Self {
        Self {
            severity: code.severity(),
            line: span.line,
            column: span.column,
            code,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{} {} {}", self.line, self.column, self.code, self.message)
    }
}

/// Orders diagnostics by position, then code, so output is stable.
pub(crate) fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| {
        (a.line, a.column, a.code, &a.message).cmp(&(b.line, b.column, b.code, &b.message))
    });
}
