//! Command-line front end: `induce`, `check`, `bench`, `fixtures` and the
//! `solve-smt` solver bridge.

pub mod bench;
pub mod examples;
pub mod grammar_text;

use examples::{ExampleSetBuilder, ReadOptions};
use metagram_core::fixtures;
use metagram_core::induction::{induce, EngineOptions, InduceError, Job, Solution, SolverChoice};
use metagram_core::lowering::{lower_program, CandidateSpace};
use metagram_core::solver::{smtlib, solve_maxsat, SolverError};
use metagram_core::surface::{load_library_dir, load_program, stdlib, Library};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

pub mod exit {
    pub const OK: i32 = 0;
    /// `check`: the input is not in the language.
    pub const REJECTED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const EXTERNAL_SOLVER: i32 = 3;
    pub const UNVERIFIED: i32 = 4;
    pub const NO_GRAMMAR: i32 = 10;
    pub const TIMEOUT: i32 = 11;
}

/// Prefix naming a bundled fixture instead of a file.
pub const FIXTURE_PREFIX: &str = "fixture:";

/// The bundled library, overridden by `<Name>.sag` files in `dir`.
pub fn library(dir: Option<&Path>) -> Result<Library, String> {
    let mut lib = stdlib();
    if let Some(d) = dir {
        lib.extend(load_library_dir(d).map_err(|e| e.to_string())?);
    }
    Ok(lib)
}

/// Read, parse, validate and lower a metagrammar file (or `fixture:NAME`).
pub fn load_space(path: &str, lib: &Library) -> Result<CandidateSpace, String> {
    let source = match path.strip_prefix(FIXTURE_PREFIX) {
        Some(name) => fixtures::get(name).ok_or_else(|| format!("no bundled fixture named {name:?}"))?.to_string(),
        None => std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?,
    };
    let prog = load_program(&source, path, lib).map_err(|e| e.to_string())?;
    Ok(lower_program(&prog))
}

pub fn exit_code(e: &InduceError) -> i32 {
    match e {
        InduceError::NoGrammar(_) => exit::NO_GRAMMAR,
        InduceError::Timeout { .. } | InduceError::Solver(SolverError::Timeout) => exit::TIMEOUT,
        InduceError::Solver(SolverError::External(_)) => exit::EXTERNAL_SOLVER,
        InduceError::Unverified(_) => exit::UNVERIFIED,
        InduceError::Solver(SolverError::Overflow) | InduceError::Concretize(_) | InduceError::Dump(_) => exit::USAGE,
    }
}

/// `builtin` or `external:<command>`. Without a flag, a non-empty
/// `METAGRAM_SMT_SOLVER` selects that external command.
pub fn solver_choice(flag: Option<&str>, env: Option<String>) -> Result<SolverChoice, String> {
    match flag {
        Some("builtin") => Ok(SolverChoice::Builtin),
        Some(s) => match s.strip_prefix("external:") {
            Some(cmd) if !cmd.trim().is_empty() => Ok(SolverChoice::External(cmd.to_string())),
            _ => Err(format!("--solver expects `builtin` or `external:<command>`, got {s:?}")),
        },
        None => Ok(match env {
            Some(cmd) if !cmd.trim().is_empty() => SolverChoice::External(cmd),
            _ => SolverChoice::Builtin,
        }),
    }
}

#[derive(Debug, Clone)]
pub struct InduceArgs {
    pub metagrammar: String,
    pub pos: Vec<PathBuf>,
    pub neg: Vec<PathBuf>,
    pub manifest: Vec<PathBuf>,
    pub max_depth: Option<u64>,
    pub timeout: f64,
    pub solver: SolverChoice,
    pub print_grammar: bool,
    pub print_emits: bool,
    pub dump_formula: Option<PathBuf>,
    pub verify: bool,
    pub read: ReadOptions,
    pub lib: Option<PathBuf>,
}

fn report_solution(sol: &Solution, args: &InduceArgs, out: &mut dyn Write) -> std::io::Result<()> {
    // with neither flag, show both
    let both = !args.print_grammar && !args.print_emits;
    if args.print_grammar || both {
        out.write_all(grammar_text::serialize(&sol.grammar).as_bytes())?;
    }
    if args.print_emits || both {
        for m in &sol.emits {
            writeln!(out, "{m}")?;
        }
    }
    Ok(())
}

pub fn run_induce(args: &InduceArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let lib = match library(args.lib.as_deref()) {
        Ok(l) => l,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit::USAGE;
        }
    };
    let space = match load_space(&args.metagrammar, &lib) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit::USAGE;
        }
    };
    let mut b = ExampleSetBuilder::new();
    let loaded = args
        .pos
        .iter()
        .try_for_each(|p| b.add_path(p, true))
        .and_then(|_| args.neg.iter().try_for_each(|p| b.add_path(p, false)))
        .and_then(|_| args.manifest.iter().try_for_each(|m| b.add_manifest(m)))
        .and_then(|_| b.build(args.read));
    let set = match loaded {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit::USAGE;
        }
    };
    if !args.timeout.is_finite() || args.timeout <= 0.0 {
        let _ = writeln!(err, "error: --timeout must be a positive number of seconds");
        return exit::USAGE;
    }
    let job = Job {
        space,
        positives: set.positives,
        negatives: set.negatives,
        options: EngineOptions {
            max_depth: args.max_depth,
            time_budget: Duration::from_secs_f64(args.timeout),
            solver: args.solver.clone(),
            verify: args.verify,
            dump_formula: args.dump_formula.clone(),
        },
    };
    match induce(&job) {
        Ok(sol) => {
            let _ = writeln!(err, "solution at depth {} with rank {}", sol.depth, sol.rank);
            if let Err(e) = report_solution(&sol, args, out) {
                let _ = writeln!(err, "error: {e}");
                return exit::USAGE;
            }
            exit::OK
        }
        Err(e) => {
            let _ = writeln!(err, "{e}");
            exit_code(&e)
        }
    }
}

/// Exit 0 if `input` is in the language of the grammar file, 1 if not, 2 if
/// either file is unreadable or the grammar is malformed.
pub fn run_check(grammar: &Path, input: &Path, read: ReadOptions, err: &mut dyn Write) -> i32 {
    let g = match std::fs::read_to_string(grammar) {
        Ok(t) => match grammar_text::parse(&t) {
            Ok(g) => g,
            Err(e) => {
                let _ = writeln!(err, "{}: {e}", grammar.display());
                return exit::USAGE;
            }
        },
        Err(e) => {
            let _ = writeln!(err, "{}: {e}", grammar.display());
            return exit::USAGE;
        }
    };
    let text = match std::fs::read(input).map(String::from_utf8) {
        Ok(Ok(t)) => examples::prepare(&t, read),
        Ok(Err(e)) => {
            let _ = writeln!(err, "{}: not UTF-8: {e}", input.display());
            return exit::USAGE;
        }
        Err(e) => {
            let _ = writeln!(err, "{}: {e}", input.display());
            return exit::USAGE;
        }
    };
    let all = g.productions.iter().map(|p| p.pid).collect();
    if metagram_core::earley::recognize(&g, &all, &text) {
        exit::OK
    } else {
        exit::REJECTED
    }
}

/// Solve a script in the dialect the external bridge writes and print the
/// reply the bridge reads back.
pub fn run_solve_smt(script: &str, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let inst = match smtlib::parse_script(script) {
        Ok(i) => i,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit::USAGE;
        }
    };
    match solve_maxsat(&inst, None) {
        Ok(m) => {
            let _ = out.write_all(smtlib::format_reply(m.as_ref()).as_bytes());
            exit::OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit::USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_flag_and_env() {
        assert_eq!(solver_choice(None, None), Ok(SolverChoice::Builtin));
        assert_eq!(solver_choice(None, Some("z3 -in".into())), Ok(SolverChoice::External("z3 -in".into())));
        assert_eq!(solver_choice(Some("builtin"), Some("z3 -in".into())), Ok(SolverChoice::Builtin));
        assert_eq!(solver_choice(Some("external:cat"), None), Ok(SolverChoice::External("cat".into())));
        assert!(solver_choice(Some("external:"), None).is_err());
        assert!(solver_choice(Some("z3"), None).is_err());
    }

    #[test]
    fn every_error_has_a_code() {
        use metagram_core::induction::NoGrammarReason;
        assert_eq!(exit_code(&InduceError::NoGrammar(NoGrammarReason::DepthCap { max_depth: 1 })), 10);
        assert_eq!(exit_code(&InduceError::Timeout { depth: 3 }), 11);
        assert_eq!(exit_code(&InduceError::Solver(SolverError::External("x".into()))), 3);
        assert_eq!(exit_code(&InduceError::Unverified(vec![])), 4);
        assert_eq!(exit_code(&InduceError::Dump("x".into())), 2);
    }
}
