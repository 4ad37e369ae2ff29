//! Metagrammars and grammar induction.
//!
//! A metagrammar describes a set of context-free grammars through optional
//! productions, indexed nonterminals, existential variables, constraints and
//! weighted preferences. [`induction::induce`] picks the best-ranked member
//! that accepts every positive example and rejects every negative one.

pub mod solver;
pub mod surface;
pub mod concretize;
pub mod grammar;
pub mod lowering;
pub mod fixtures;
pub mod earley;
pub mod induction;
