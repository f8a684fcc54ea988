//! Three-valued answers for bounded questions.

use serde::Serialize;
use std::fmt;

/// Why a question was answered positively.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Evidence {
    pub note: String,
    /// Replayable moves, when the answer came from a search.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub moves: Vec<String>,
}

/// A machine-checkable counterexample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub reason: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// Two parallel paths whose loop classes differ in the free
    /// fundamental group of a closed component.
    LoopClass {
        basepoint: String,
        generators: Vec<String>,
        left: Vec<String>,
        right: Vec<String>,
    },
    /// Two terms lying in different components.
    Component { left: String, right: String },
    /// A named instance that failed a direct check.
    Instance { name: String, detail: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Exhausted {
    pub reason: String,
    pub budget: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    Holds(Evidence),
    Fails(Witness),
    Unknown(Exhausted),
}

impl Verdict {
    pub fn holds(note: impl Into<String>) -> Self {
        Verdict::Holds(Evidence {
            note: note.into(),
            moves: Vec::new(),
        })
    }

    pub fn holds_with(note: impl Into<String>, moves: Vec<String>) -> Self {
        Verdict::Holds(Evidence {
            note: note.into(),
            moves,
        })
    }

    pub fn fails(reason: impl Into<String>) -> Self {
        Verdict::Fails(Witness {
            reason: reason.into(),
            certificate: None,
        })
    }

    pub fn fails_with(reason: impl Into<String>, certificate: Certificate) -> Self {
        Verdict::Fails(Witness {
            reason: reason.into(),
            certificate: Some(certificate),
        })
    }

    pub fn unknown(reason: impl Into<String>, budget: usize) -> Self {
        Verdict::Unknown(Exhausted {
            reason: reason.into(),
            budget,
        })
    }

    pub fn is_holds(&self) -> bool {
        matches!(self, Verdict::Holds(_))
    }

    pub fn is_fails(&self) -> bool {
        matches!(self, Verdict::Fails(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown(_))
    }

    pub fn status(&self) -> &'static str {
        match self {
            Verdict::Holds(_) => "holds",
            Verdict::Fails(_) => "fails",
            Verdict::Unknown(_) => "unknown",
        }
    }

    /// Conjunction: any failure wins, then any unknown.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (f @ Verdict::Fails(_), _) | (_, f @ Verdict::Fails(_)) => f,
            (u @ Verdict::Unknown(_), _) | (_, u @ Verdict::Unknown(_)) => u,
            (h, _) => h,
        }
    }

    pub fn all<I: IntoIterator<Item = Verdict>>(items: I, note: &str) -> Verdict {
        items
            .into_iter()
            .fold(Verdict::holds(note), Verdict::and)
    }

    /// CLI exit code: 0 holds, 1 fails, 2 unknown.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Holds(_) => 0,
            Verdict::Fails(_) => 1,
            Verdict::Unknown(_) => 2,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds(e) => write!(f, "holds ({})", e.note),
            Verdict::Fails(w) => write!(f, "fails ({})", w.reason),
            Verdict::Unknown(x) => write!(f, "unknown ({}, budget {})", x.reason, x.budget),
        }
    }
}
