//! Subject languages: the programming languages being translated from and to.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Identifier of a subject language, e.g. `"python"`.
///
/// The id is matched against the toolchain registry; it carries no behaviour
/// on its own beyond display names and comment syntax for the five default
/// languages.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubjectLanguage(String);

/// Default registry ids, in the order reports list them.
pub const DEFAULT_LANGUAGES: [&str; 5] = ["c", "cpp", "go", "java", "python"];

impl SubjectLanguage {
    pub fn new(id: impl Into<String>) -> Option<Self> {
        let id = id.into();
        let id = id.trim().to_ascii_lowercase();
        if id.is_empty() {
            None
        } else {
            Some(Self(id))
        }
    }

    pub fn id(&self) -> &str {
        &self.0
    }

    /// Name used inside prompts ("C++", "Python", ...).
    pub fn display_name(&self) -> &str {
        match self.0.as_str() {
            "c" => "C",
            "cpp" => "C++",
            "go" => "Go",
            "java" => "Java",
            "python" => "Python",
            other => other,
        }
    }

    pub fn file_extension(&self) -> &str {
        match self.0.as_str() {
            "c" => "c",
            "cpp" => "cpp",
            "go" => "go",
            "java" => "java",
            "python" => "py",
            other => other,
        }
    }

    pub fn comment_syntax(&self) -> CommentSyntax {
        let c_like = CommentSyntax {
            line: "//",
            block: Some(("/*", "*/")),
            raw_backtick_strings: false,
            triple_quoted_strings: false,
        };
        match self.0.as_str() {
            "python" => CommentSyntax {
                line: "#",
                block: None,
                raw_backtick_strings: false,
                triple_quoted_strings: true,
            },
            "go" => CommentSyntax {
                raw_backtick_strings: true,
                ..c_like
            },
            // text blocks
            "java" => CommentSyntax {
                triple_quoted_strings: true,
                ..c_like
            },
            _ => c_like,
        }
    }

    /// Looks up a language from a file extension, for analyzer exports.
    pub fn from_extension(ext: &str) -> Option<Self> {
        let id = match ext.to_ascii_lowercase().as_str() {
            "c" | "h" => "c",
            "cpp" | "cc" | "cxx" | "hpp" => "cpp",
            "go" => "go",
            "java" => "java",
            "py" => "python",
            _ => return None,
        };
        Self::new(id)
    }
}

impl fmt::Display for SubjectLanguage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for SubjectLanguage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s).ok_or_else(|| "language id must be non-empty".to_string())
    }
}

/// Comment delimiters of a language family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommentSyntax {
    pub line: &'static str,
    pub block: Option<(&'static str, &'static str)>,
    /// Backtick raw strings (Go).
    pub raw_backtick_strings: bool,
    /// `'''` / `"""` strings spanning lines.
    pub triple_quoted_strings: bool,
}
