use core::fmt;

use crate::model::DissimKind;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// `t = 0` with `p > 0` for a dissimilarity that divides by the leader.
    Domain {
        kind: DissimKind,
        p: f64,
        t: f64,
    },
    /// A vector does not have the length the schema prescribes.
    Arity {
        variable: usize,
        expected: usize,
        found: usize,
    },
    /// Object or leader does not have one entry per schema variable.
    VariableCount {
        expected: usize,
        found: usize,
    },
    EmptyCluster,
    /// Fewer units than requested clusters.
    Infeasible {
        units: usize,
        k: usize,
    },
    /// Every leader yields a domain error for this unit.
    NoFeasibleLeader {
        unit: usize,
    },
    TooFewItems {
        found: usize,
    },
    InvalidSchema(alloc::string::String),
    InvalidConfig(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { kind, p, t } => {
                write!(
                    f,
                    "{kind} undefined for p = {p}, t = {t} (leader component is zero)"
                )
            }
            Error::Arity {
                variable,
                expected,
                found,
            } => write!(
                f,
                "variable {variable}: expected {expected} components, found {found}"
            ),
            Error::VariableCount { expected, found } => {
                write!(f, "expected {expected} variables, found {found}")
            }
            Error::EmptyCluster => f.write_str("cluster is empty"),
            Error::Infeasible { units, k } => {
                write!(f, "cannot form {k} nonempty clusters from {units} units")
            }
            Error::NoFeasibleLeader { unit } => {
                write!(f, "unit {unit} has no leader at finite dissimilarity")
            }
            Error::TooFewItems { found } => {
                write!(f, "agglomeration needs at least 2 items, got {found}")
            }
            Error::InvalidSchema(msg) => write!(f, "invalid schema: {msg}"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
