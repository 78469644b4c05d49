//! Source locations and coded findings shared by the parser and the validator.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::Identifier;

/// A location in a `.sym` source file. Lines and columns are 1-based; the
/// column counts characters, not bytes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub file: String,
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

impl SourceSpan {
    pub fn new(file: impl Into<String>, line: u32, column: u32, length: u32) -> Self {
        Self {
            file: file.into(),
            line: line.max(1),
            column: column.max(1),
            length,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// A stable diagnostic code: `P` for parser findings, `V` for validator rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Code {
    family: char,
    number: u16,
}

impl Code {
    pub const fn parser(number: u16) -> Self {
        Self {
            family: 'P',
            number,
        }
    }

    pub const fn validator(number: u16) -> Self {
        Self {
            family: 'V',
            number,
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        let mut chars = text.chars();
        let family = chars.next().filter(|c| *c == 'P' || *c == 'V')?;
        let digits = chars.as_str();
        if digits.len() != 3 || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        Some(Self {
            family,
            number: digits.parse().ok()?,
        })
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:03}", self.family, self.number)
    }
}

impl Serialize for Code {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Code {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Code::parse(&text).ok_or_else(|| serde::de::Error::custom(format!("bad code {text:?}")))
    }
}

pub mod codes {
    use super::Code;

    pub const UNEXPECTED_TOKEN: Code = Code::parser(1);
    pub const UNTERMINATED_STRING: Code = Code::parser(2);
    pub const UNKNOWN_BLOCK: Code = Code::parser(3);
    pub const DUPLICATE_FIELD: Code = Code::parser(4);
    pub const MALFORMED_INTERVAL: Code = Code::parser(5);
    pub const INCLUDE_CYCLE: Code = Code::parser(6);
    pub const INCLUDE_UNREADABLE: Code = Code::parser(7);

    pub const DUPLICATE_ID: Code = Code::validator(1);
    pub const UNRESOLVED_REFERENCE: Code = Code::validator(2);
    pub const REFINES_STRUCTURE: Code = Code::validator(3);
    pub const UNMEASURED_LEAF: Code = Code::validator(4);
    pub const GOAL_WITHOUT_QUESTION: Code = Code::validator(5);
    pub const QUESTION_STATUS: Code = Code::validator(6);
    pub const UNDECLARED_BASE: Code = Code::validator(7);
    pub const BAND_PARTITION: Code = Code::validator(8);
    pub const SCOPE_COVERAGE: Code = Code::validator(9);
    pub const REQUIRED_FIELD: Code = Code::validator(10);
    pub const NO_STAKEHOLDERS: Code = Code::validator(11);
    pub const FOREIGN_QUESTION: Code = Code::validator(12);
    pub const UNRECIPROCATED_AFFECTS: Code = Code::validator(13);
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: Code,
    pub severity: Severity,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub span: Option<SourceSpan>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub node: Option<Identifier>,
    /// Other locations involved in the finding, e.g. the first declaration of
    /// a duplicated identifier.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub related: Vec<SourceSpan>,
}

impl Diagnostic {
    pub fn error(code: Code, message: impl Into<String>) -> Self {
        Self::new(code, Severity::Error, message)
    }

    pub fn warning(code: Code, message: impl Into<String>) -> Self {
        Self::new(code, Severity::Warning, message)
    }

    fn new(code: Code, severity: Severity, message: impl Into<String>) -> Self {
        Self {
            code,
            severity,
            message: message.into(),
            span: None,
            node: None,
            related: Vec::new(),
        }
    }

    pub fn with_span(mut self, span: Option<SourceSpan>) -> Self {
        self.span = span;
        self
    }

    pub fn with_node(mut self, node: &Identifier) -> Self {
        self.node = Some(node.clone());
        self
    }

    pub fn with_related(mut self, span: Option<SourceSpan>) -> Self {
        self.related.extend(span);
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// `CODE severity file:line:col node message`; absent parts print as `-`.
impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} ", self.code, self.severity)?;
        match &self.span {
            Some(span) => write!(f, "{span}")?,
            None => f.write_str("-")?,
        }
        match &self.node {
            Some(node) => write!(f, " {node}")?,
            None => f.write_str(" -")?,
        }
        write!(f, " {}", self.message)
    }
}

pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(Diagnostic::is_error)
}
