use clap::{ArgAction, Parser, Subcommand};
use metagram_cli::examples::ReadOptions;
use metagram_cli::{bench, exit, run_check, run_induce, run_solve_smt, solver_choice, InduceArgs};
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

#[derive(Parser)]
#[command(name = "metagram", version, about = "Induce grammars from metagrammars and examples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ReadArgs {
    /// Remove one final newline from every example
    #[arg(long, default_value_t = true, action = ArgAction::Set, value_name = "BOOL")]
    strip_trailing_newline: bool,
    /// Keep only the first N lines of every example
    #[arg(long, value_name = "N")]
    max_lines: Option<usize>,
}

impl ReadArgs {
    fn options(&self) -> ReadOptions {
        ReadOptions { strip_trailing_newline: self.strip_trailing_newline, max_lines: self.max_lines }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Find the best grammar in a metagrammar consistent with the examples
    Induce {
        /// Metagrammar file, or fixture:NAME for a bundled one
        metagrammar: String,
        /// Positive example files or directories
        #[arg(long, num_args = 1.., value_name = "PATH")]
        pos: Vec<PathBuf>,
        /// Negative example files or directories
        #[arg(long, num_args = 1.., value_name = "PATH")]
        neg: Vec<PathBuf>,
        /// File of `+ <path>` and `- <path>` lines
        #[arg(long, value_name = "FILE")]
        manifest: Vec<PathBuf>,
        #[arg(long, value_name = "K")]
        max_depth: Option<u64>,
        /// Time budget in seconds
        #[arg(long, default_value_t = 60.0, value_name = "SECS")]
        timeout: f64,
        /// builtin or external:<command>; defaults to $METAGRAM_SMT_SOLVER if set
        #[arg(long)]
        solver: Option<String>,
        #[arg(long)]
        print_grammar: bool,
        #[arg(long)]
        print_emits: bool,
        /// Write the solver instance as an SMT-LIB script
        #[arg(long, value_name = "PATH")]
        dump_formula: Option<PathBuf>,
        /// Re-check the result with the recognizer
        #[arg(long)]
        verify: bool,
        /// Directory of extra importable metagrammars
        #[arg(long, value_name = "DIR")]
        lib: Option<PathBuf>,
        #[command(flatten)]
        read: ReadArgs,
    },
    /// Exit 0 if the input is in the grammar's language, 1 if not
    Check {
        grammar: PathBuf,
        input: PathBuf,
        #[command(flatten)]
        read: ReadArgs,
    },
    /// Run a suite of induction tasks
    Bench {
        manifest: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Per-task time budget in seconds
        #[arg(long, default_value_t = 60.0, value_name = "SECS")]
        timeout: f64,
    },
    /// List bundled metagrammars, or print one
    Fixtures { name: Option<String> },
    /// Solve an SMT-LIB MaxSAT script from standard input
    SolveSmt,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            return ExitCode::from(code as u8);
        }
    };
    let code = run(cli.command);
    ExitCode::from(code as u8)
}

fn run(command: Command) -> i32 {
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    match command {
        Command::Induce {
            metagrammar,
            pos,
            neg,
            manifest,
            max_depth,
            timeout,
            solver,
            print_grammar,
            print_emits,
            dump_formula,
            verify,
            lib,
            read,
        } => {
            let solver = match solver_choice(solver.as_deref(), std::env::var("METAGRAM_SMT_SOLVER").ok()) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return exit::USAGE;
                }
            };
            let args = InduceArgs {
                metagrammar,
                pos,
                neg,
                manifest,
                max_depth,
                timeout,
                solver,
                print_grammar,
                print_emits,
                dump_formula,
                verify,
                read: read.options(),
                lib,
            };
            run_induce(&args, &mut out, &mut err)
        }
        Command::Check { grammar, input, read } => run_check(&grammar, &input, read.options(), &mut err),
        Command::Bench { manifest, jobs, timeout } => {
            if !timeout.is_finite() || timeout <= 0.0 {
                eprintln!("error: --timeout must be a positive number of seconds");
                return exit::USAGE;
            }
            let suite = match bench::load_suite(&manifest) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return exit::USAGE;
                }
            };
            let base = manifest.parent().map(PathBuf::from).unwrap_or_default();
            let results = bench::run_suite(&suite, &base, Duration::from_secs_f64(timeout), jobs);
            print!("{}", bench::format_report(&results));
            if results.iter().any(|r| r.mismatch.is_some()) {
                1
            } else {
                exit::OK
            }
        }
        Command::Fixtures { name: None } => {
            for (name, _) in metagram_core::fixtures::ALL {
                println!("{name}");
            }
            exit::OK
        }
        Command::Fixtures { name: Some(n) } => match metagram_core::fixtures::get(&n) {
            Some(src) => {
                print!("{src}");
                exit::OK
            }
            None => {
                eprintln!("error: no bundled fixture named {n:?}");
                exit::USAGE
            }
        },
        Command::SolveSmt => {
            let mut script = String::new();
            if let Err(e) = std::io::stdin().read_to_string(&mut script) {
                eprintln!("error: {e}");
                return exit::USAGE;
            }
            run_solve_smt(&script, &mut out, &mut err)
        }
    }
}
