use thiserror::Error;

/// Errors produced while building, querying or loading the structures in this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("position {index} out of range (valid range {lo}..={hi})")]
    Range { index: usize, lo: usize, hi: usize },

    #[error("graph contains a cycle through vertex {vertex}")]
    NotADag { vertex: usize },

    #[error("invalid partial order: {0}")]
    InvalidPoset(Violation),

    #[error("relation is not transitive: ({a},{b}) and ({b},{c}) present but ({a},{c}) missing")]
    NotTransitive { a: usize, b: usize, c: usize },

    #[error("edge set is not a transitive reduction: ({u},{v}) is implied by other edges")]
    NotAReduction { u: usize, v: usize },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("no biclique: the edge set is empty")]
    NoBiclique,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("element {0} is outside the queried structure")]
    Domain(usize),

    #[error("corrupt data: {0}")]
    Corrupt(String),

    #[error("size limit exceeded: {0}")]
    TooLarge(String),
}

/// First strict-order axiom found violated on a closure matrix, with a witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    Reflexive { a: usize },
    Antisymmetric { a: usize, b: usize },
    Transitive { a: usize, b: usize, c: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Violation::Reflexive { a } => write!(f, "element {a} precedes itself"),
            Violation::Antisymmetric { a, b } => {
                write!(f, "antisymmetry violated by ({a},{b}) and ({b},{a})")
            }
            Violation::Transitive { a, b, c } => {
                write!(f, "transitivity violated: ({a},{b}) and ({b},{c}) without ({a},{c})")
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn corrupt(msg: impl Into<String>) -> Error {
    Error::Corrupt(msg.into())
}
