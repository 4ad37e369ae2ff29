//! Propositional formulas, CNF conversion, and weighted MaxSAT.

pub mod cnf;
pub mod external;
pub mod formula;
pub mod maxsat;
pub mod sat;
pub mod smtlib;

pub use cnf::{to_cnf, Cnf, CnfBuilder, Lit};
pub use external::solve_external;
pub use formula::{Formula, Node, Var, VarTable};
pub use maxsat::{solve_maxsat, Model, WeightedInstance};
pub use smtlib::{emit_smtlib, parse_external_model};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SolverError {
    #[error("solver time budget exhausted")]
    Timeout,
    #[error("external solver: {0}")]
    External(String),
    #[error("preference rank overflows 64 bits")]
    Overflow,
}
