//! The induction loop: concretize, parse every example to a provenance
//! formula, solve, and either extract a grammar or try the next depth.

use crate::concretize::{concretize, exact_depth, ConcretizeError, EmitEntry, SYNTHETIC_START};
use crate::earley::{Parser, Provenance, ONE, ZERO};
use crate::grammar::{CSym, ConcreteGrammar};
use crate::lowering::CandidateSpace;
use crate::solver::{emit_smtlib, solve_external, solve_maxsat, CnfBuilder, Formula, Model, SolverError, Var, WeightedInstance};
use std::collections::HashSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub label: String,
    pub text: String,
}

impl Example {
    pub fn new(label: impl Into<String>, text: impl Into<String>) -> Self {
        Example { label: label.into(), text: text.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverChoice {
    Builtin,
    /// Shell command reading an SMT-LIB script on stdin.
    External(String),
}

#[derive(Debug, Clone)]
pub struct EngineOptions {
    pub max_depth: Option<u64>,
    pub time_budget: Duration,
    pub solver: SolverChoice,
    /// Re-check the solution with the recognizer before returning it.
    pub verify: bool,
    /// Write the solver instance of each depth here (the last one remains).
    pub dump_formula: Option<PathBuf>,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            max_depth: None,
            time_budget: Duration::from_secs(60),
            solver: SolverChoice::Builtin,
            verify: false,
            dump_formula: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Job {
    pub space: CandidateSpace,
    pub positives: Vec<Example>,
    pub negatives: Vec<Example>,
    pub options: EngineOptions,
}

#[derive(Debug, Clone)]
pub struct Solution {
    /// Pids of the selected productions, including unreachable ones.
    pub selected: Vec<usize>,
    /// Selected productions reachable from the start symbol.
    pub grammar: ConcreteGrammar,
    pub rank: i64,
    pub emits: Vec<String>,
    pub depth: u64,
    /// The solver's model over the named variables.
    pub assignment: Vec<bool>,
    pub var_names: Vec<String>,
    /// Hard constraints of the depth the solution came from.
    pub hard: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NoGrammarReason {
    /// The same text is both a positive and a negative example.
    Overlap(Vec<String>),
    /// Every variable is bounded and the deciding depth has no solution.
    BoundedExhaustion { depth: u64 },
    /// No solution up to the configured maximum depth.
    DepthCap { max_depth: u64 },
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum InduceError {
    #[error("no grammar: {}", describe(.0))]
    NoGrammar(NoGrammarReason),
    #[error("time budget exhausted at depth {depth}")]
    Timeout { depth: u64 },
    #[error(transparent)]
    Solver(SolverError),
    #[error(transparent)]
    Concretize(ConcretizeError),
    #[error("cannot write formula dump: {0}")]
    Dump(String),
    #[error("solution failed verification: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Unverified(Vec<Violation>),
}

fn describe(r: &NoGrammarReason) -> String {
    match r {
        NoGrammarReason::Overlap(labels) => format!("examples are both positive and negative: {}", labels.join(", ")),
        NoGrammarReason::BoundedExhaustion { depth } => {
            format!("the space is bounded and has no consistent grammar (decided at depth {depth})")
        }
        NoGrammarReason::DepthCap { max_depth } => format!("no consistent grammar up to depth {max_depth}"),
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Violation {
    #[error("positive example {0} is rejected")]
    PositiveRejected(String),
    #[error("negative example {0} is accepted")]
    NegativeAccepted(String),
    #[error("the selection violates the hard constraints")]
    HardConstraintViolated,
}

/// Result of one depth.
enum Step {
    Solved(Solution),
    Unsat,
    /// The start symbol does not exist yet.
    Skip,
}

pub fn induce(job: &Job) -> Result<Solution, InduceError> {
    let started = Instant::now();
    let deadline = started + job.options.time_budget;
    let negs: HashSet<&str> = job.negatives.iter().map(|e| e.text.as_str()).collect();
    let overlap: Vec<String> = job.positives.iter().filter(|e| negs.contains(e.text.as_str())).map(|e| e.label.clone()).collect();
    if !overlap.is_empty() {
        return Err(InduceError::NoGrammar(NoGrammarReason::Overlap(overlap)));
    }

    if let Some(k) = exact_depth(&job.space) {
        let capped = job.options.max_depth.is_some_and(|m| m < k);
        let k = job.options.max_depth.map_or(k, |m| m.min(k));
        return match run_depth(job, k, deadline)? {
            Step::Solved(s) => finish(job, s),
            _ if capped => Err(InduceError::NoGrammar(NoGrammarReason::DepthCap { max_depth: k })),
            _ => Err(InduceError::NoGrammar(NoGrammarReason::BoundedExhaustion { depth: k })),
        };
    }
    let mut k = 1;
    loop {
        if Instant::now() >= deadline {
            return Err(InduceError::Timeout { depth: k });
        }
        if let Step::Solved(s) = run_depth(job, k, deadline)? {
            return finish(job, s);
        }
        if job.options.max_depth.is_some_and(|m| k >= m) {
            return Err(InduceError::NoGrammar(NoGrammarReason::DepthCap { max_depth: k }));
        }
        k += 1;
    }
}

fn finish(job: &Job, s: Solution) -> Result<Solution, InduceError> {
    if job.options.verify {
        let v = verify_solution(job, &s);
        if !v.is_empty() {
            return Err(InduceError::Unverified(v));
        }
    }
    Ok(s)
}

fn run_depth(job: &Job, k: u64, deadline: Instant) -> Result<Step, InduceError> {
    let c = match concretize(&job.space, k) {
        Ok(c) => c,
        Err(ConcretizeError::UnboundedStart { .. }) => return Ok(Step::Skip),
        Err(e) => return Err(InduceError::Concretize(e)),
    };
    let timeout = || InduceError::Timeout { depth: k };
    let parser = Parser::new(&c.grammar);
    let prov = Provenance::new();
    let mut example_formulas = Vec::new();
    for (ex, positive) in job.positives.iter().map(|e| (e, true)).chain(job.negatives.iter().map(|e| (e, false))) {
        let chars: Vec<char> = ex.text.chars().collect();
        let f = parser.parse_until(&chars, &prov, |p| prov.var(p.indicator), Some(deadline)).ok_or_else(timeout)?;
        let decided = if positive { ZERO } else { ONE };
        if f == decided {
            return Ok(Step::Unsat);
        }
        let f = prov.to_formula(f);
        example_formulas.push(if positive { f } else { Formula::not(f) });
    }

    let names = c.vars.names().to_vec();
    let mut b = CnfBuilder::new(names.len() as u32);
    for h in c.hard.iter().chain(&example_formulas) {
        b.assert(h);
    }
    let soft: Vec<(i64, _)> = c.soft.iter().map(|(w, f)| (*w, b.lit(f))).collect();
    let cnf = b.finish();
    let inst = WeightedInstance { num_vars: cnf.num_vars, hard: cnf.clauses, soft, names };
    if let Some(path) = &job.options.dump_formula {
        std::fs::write(path, emit_smtlib(&inst)).map_err(|e| InduceError::Dump(format!("{}: {e}", path.display())))?;
    }
    let solved = match &job.options.solver {
        SolverChoice::Builtin => solve_maxsat(&inst, Some(deadline)),
        SolverChoice::External(cmd) => solve_external(cmd, &inst, Some(deadline)),
    };
    let model = match solved {
        Ok(Some(m)) => m,
        Ok(None) => return Ok(Step::Unsat),
        Err(SolverError::Timeout) => return Err(timeout()),
        Err(e) => return Err(InduceError::Solver(e)),
    };
    Ok(Step::Solved(extract(&c.grammar, &c.emits, c.hard_formula(), &inst.names, &model, k)))
}

fn extract(g: &ConcreteGrammar, emits: &[EmitEntry], hard: Formula, names: &[String], model: &Model, depth: u64) -> Solution {
    let on = |v: Var| model.assignment.get(v as usize).copied().unwrap_or(false);
    let selected: Vec<usize> = g.productions.iter().filter(|p| on(p.indicator)).map(|p| p.pid).collect();
    let grammar = extract_grammar(g, &model.assignment);

    // Emits see a production as included only if it is part of the answer.
    let indicators: HashSet<Var> = g.productions.iter().map(|p| p.indicator).collect();
    let live: HashSet<Var> = grammar.productions.iter().map(|p| p.indicator).collect();
    let effective = |v: Var| if indicators.contains(&v) { live.contains(&v) } else { on(v) };
    let emits = evaluate_emits(emits, &effective);

    Solution {
        selected,
        grammar,
        rank: model.rank,
        emits,
        depth,
        assignment: model.assignment[..names.len()].to_vec(),
        var_names: names.to_vec(),
        hard,
    }
}

/// Keep the productions whose indicator is true, drop what the start symbol
/// cannot reach, and inline the synthetic start when it has one target.
pub fn extract_grammar(g: &ConcreteGrammar, assignment: &[bool]) -> ConcreteGrammar {
    let on = |v: Var| assignment.get(v as usize).copied().unwrap_or(false);
    let mut out = g.restrict(|p| on(p.indicator)).reachable();
    if out.start == SYNTHETIC_START {
        let targets: Vec<String> = out
            .productions
            .iter()
            .filter(|p| p.lhs == SYNTHETIC_START)
            .filter_map(|p| match p.rhs.as_slice() {
                [CSym::N(t)] => Some(t.clone()),
                _ => None,
            })
            .collect();
        if let [t] = targets.as_slice() {
            out.start = t.clone();
            out.productions.retain(|p| p.lhs != SYNTHETIC_START);
            out = out.reachable();
        }
    }
    out
}

/// Messages whose condition holds, in declaration order.
pub fn evaluate_emits(table: &[EmitEntry], assignment: &dyn Fn(Var) -> bool) -> Vec<String> {
    table.iter().filter(|e| e.cond.eval(assignment)).map(|e| e.message.clone()).collect()
}

/// Independent re-check of a solution against the job's examples and the
/// hard constraints.
pub fn verify_solution(job: &Job, sol: &Solution) -> Vec<Violation> {
    let parser = Parser::new(&sol.grammar);
    let mut out = Vec::new();
    for e in &job.positives {
        let chars: Vec<char> = e.text.chars().collect();
        if !parser.recognize(&chars, |_| true) {
            out.push(Violation::PositiveRejected(e.label.clone()));
        }
    }
    for e in &job.negatives {
        let chars: Vec<char> = e.text.chars().collect();
        if parser.recognize(&chars, |_| true) {
            out.push(Violation::NegativeAccepted(e.label.clone()));
        }
    }
    if !sol.hard.eval(&|v| sol.assignment.get(v as usize).copied().unwrap_or(false)) {
        out.push(Violation::HardConstraintViolated);
    }
    out
}
