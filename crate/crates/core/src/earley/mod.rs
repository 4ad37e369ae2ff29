//! Semiring parsing.

mod chart;
mod provenance;
mod semiring;

pub use chart::Parser;
pub use provenance::{ProvId, ProvNode, Provenance, ONE, ZERO};
pub use semiring::{Boolean, Semiring};

use crate::grammar::ConcreteGrammar;
use std::collections::HashSet;

/// Parse `input` with production weights from `weight`, indexed by position
/// in `g.productions`.
pub fn parse_semiring<S: Semiring>(g: &ConcreteGrammar, input: &str, sr: &S, weight: impl Fn(usize) -> S::Elem) -> S::Elem {
    let chars: Vec<char> = input.chars().collect();
    let pos: std::collections::HashMap<usize, usize> = g.productions.iter().enumerate().map(|(i, p)| (p.pid, i)).collect();
    Parser::new(g).parse(&chars, sr, |p| weight(pos[&p.pid]))
}

/// Provenance formula of `input`: each production contributes its indicator.
pub fn provenance(g: &ConcreteGrammar, input: &str, prov: &Provenance) -> ProvId {
    let chars: Vec<char> = input.chars().collect();
    Parser::new(g).parse(&chars, prov, |p| prov.var(p.indicator))
}

/// Whether the productions with pids in `selected` derive `input`.
pub fn recognize(g: &ConcreteGrammar, selected: &HashSet<usize>, input: &str) -> bool {
    let chars: Vec<char> = input.chars().collect();
    Parser::new(g).recognize(&chars, |p| selected.contains(&p.pid))
}
