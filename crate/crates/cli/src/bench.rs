//! Benchmark suites: a TOML manifest of induction tasks with expected
//! verdicts.
//!
//! ```toml
//! [[task]]
//! name = "dates-1pe"
//! metagrammar = "fixture:dates"       # or a path relative to the manifest
//! positives = ["dates/us/0.txt"]
//! negatives = []
//! expect = "solution"                  # or "no-grammar"
//! expected_grammar = "dates/fig2.txt"  # optional, compared up to ordering
//! max_lines = 20                       # optional
//! max_depth = 6                        # optional
//! ```

use crate::examples::{ExampleSetBuilder, ReadOptions};
use crate::{grammar_text, library, load_space, FIXTURE_PREFIX};
use metagram_core::induction::{induce, EngineOptions, InduceError, Job};
use serde::Deserialize;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expect {
    Solution,
    NoGrammar,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Task {
    pub name: String,
    pub metagrammar: String,
    #[serde(default)]
    pub positives: Vec<String>,
    #[serde(default)]
    pub negatives: Vec<String>,
    pub expect: Expect,
    pub expected_grammar: Option<String>,
    pub max_lines: Option<usize>,
    pub max_depth: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    #[serde(default)]
    pub task: Vec<Task>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Solution { rank: i64, depth: u64 },
    NoGrammar,
    Timeout,
    Error(String),
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Solution { .. } => f.write_str("solution"),
            Verdict::NoGrammar => f.write_str("no-grammar"),
            Verdict::Timeout => f.write_str("timeout"),
            Verdict::Error(_) => f.write_str("error"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TaskResult {
    pub name: String,
    pub verdict: Verdict,
    pub elapsed: Duration,
    /// Why the task does not meet its expectation, if it does not.
    pub mismatch: Option<String>,
}

pub fn load_suite(path: &Path) -> Result<Suite, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    base.join(p)
}

pub fn run_task(task: &Task, base: &Path, timeout: Duration) -> TaskResult {
    let started = Instant::now();
    let (verdict, mismatch) = match execute(task, base, timeout) {
        Ok(r) => r,
        Err(e) => (Verdict::Error(e.clone()), Some(e)),
    };
    TaskResult { name: task.name.clone(), verdict, elapsed: started.elapsed(), mismatch }
}

fn execute(task: &Task, base: &Path, timeout: Duration) -> Result<(Verdict, Option<String>), String> {
    let lib = library(None)?;
    let mg = if task.metagrammar.starts_with(FIXTURE_PREFIX) {
        task.metagrammar.clone()
    } else {
        resolve(base, &task.metagrammar).display().to_string()
    };
    let space = load_space(&mg, &lib)?;
    let mut b = ExampleSetBuilder::new();
    for p in &task.positives {
        b.add_path(&resolve(base, p), true).map_err(|e| e.to_string())?;
    }
    for p in &task.negatives {
        b.add_path(&resolve(base, p), false).map_err(|e| e.to_string())?;
    }
    let set = b.build(ReadOptions { strip_trailing_newline: true, max_lines: task.max_lines }).map_err(|e| e.to_string())?;
    let job = Job {
        space,
        positives: set.positives,
        negatives: set.negatives,
        options: EngineOptions { max_depth: task.max_depth, time_budget: timeout, verify: true, ..Default::default() },
    };
    let outcome = induce(&job);
    let verdict = match &outcome {
        Ok(sol) => Verdict::Solution { rank: sol.rank, depth: sol.depth },
        Err(InduceError::NoGrammar(_)) => Verdict::NoGrammar,
        Err(InduceError::Timeout { .. }) => Verdict::Timeout,
        Err(e) => Verdict::Error(e.to_string()),
    };
    let mismatch = match (&outcome, task.expect) {
        (Ok(sol), Expect::Solution) => match &task.expected_grammar {
            None => None,
            Some(f) => {
                let path = resolve(base, f);
                let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
                let want = grammar_text::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
                if grammar_text::isomorphic(&want, &sol.grammar) {
                    None
                } else {
                    Some(format!("grammar differs from {f}:\n{}", grammar_text::serialize(&sol.grammar)))
                }
            }
        },
        (Err(InduceError::NoGrammar(_)), Expect::NoGrammar) => None,
        (Err(e), _) => Some(e.to_string()),
        (Ok(_), Expect::NoGrammar) => Some("expected no grammar".into()),
    };
    Ok((verdict, mismatch))
}

/// Run every task, `jobs` at a time. Results come back in suite order.
pub fn run_suite(suite: &Suite, base: &Path, timeout: Duration, jobs: usize) -> Vec<TaskResult> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<TaskResult>>> = Mutex::new(vec![None; suite.task.len()]);
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, suite.task.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(task) = suite.task.get(i) else { break };
                let r = run_task(task, base, timeout);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    results.into_inner().unwrap().into_iter().map(|r| r.expect("every task ran")).collect()
}

pub fn format_report(results: &[TaskResult]) -> String {
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
    let mut out = format!("{:<width$}  {:>9}  {:<10}  {:>5}  {:>5}  status\n", "task", "time(s)", "verdict", "rank", "depth");
    for r in results {
        let (rank, depth) = match r.verdict {
            Verdict::Solution { rank, depth } => (rank.to_string(), depth.to_string()),
            _ => ("-".into(), "-".into()),
        };
        let status = if r.mismatch.is_some() { "MISMATCH" } else { "ok" };
        out.push_str(&format!(
            "{:<width$}  {:>9.3}  {:<10}  {:>5}  {:>5}  {status}\n",
            r.name,
            r.elapsed.as_secs_f64(),
            r.verdict.to_string(),
            rank,
            depth
        ));
    }
    for r in results {
        if let Some(m) = &r.mismatch {
            out.push_str(&format!("{}: {m}\n", r.name));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_parses() {
        let s: Suite = toml::from_str(
            r#"
            [[task]]
            name = "a"
            metagrammar = "fixture:dates"
            positives = ["x.txt"]
            expect = "no-grammar"
            "#,
        )
        .unwrap();
        assert_eq!(s.task[0].expect, Expect::NoGrammar);
        assert!(s.task[0].negatives.is_empty());
        assert!(toml::from_str::<Suite>("[[task]]\nname = \"a\"\nmetagrammar = \"m\"\nexpect = \"maybe\"").is_err());
    }
}
