//! Run an external SMT solver on the text form of an instance.

use super::maxsat::{Model, WeightedInstance};
use super::smtlib::{emit_smtlib, parse_external_model};
use super::SolverError;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

/// Run `command` through `sh -c`, feeding the script on standard input and
/// reading the reply from standard output.
pub fn solve_external(command: &str, inst: &WeightedInstance, deadline: Option<Instant>) -> Result<Option<Model>, SolverError> {
    let script = emit_smtlib(inst);
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(command)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| SolverError::External(format!("cannot start `{command}`: {e}")))?;

    let mut stdin = child.stdin.take().expect("piped stdin");
    let writer = std::thread::spawn(move || {
        // the solver may exit without reading everything
        let _ = stdin.write_all(script.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let mut stderr = child.stderr.take().expect("piped stderr");
    let err_reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });

    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) => {
                if deadline.is_some_and(|d| Instant::now() >= d) {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(SolverError::Timeout);
                }
                std::thread::sleep(Duration::from_millis(5));
            }
            Err(e) => return Err(SolverError::External(format!("waiting for `{command}`: {e}"))),
        }
    };
    let _ = writer.join();
    let out = reader.join().unwrap_or_default();
    let err = err_reader.join().unwrap_or_default();
    if !status.success() {
        return Err(SolverError::External(format!("`{command}` exited with {status}: {}", err.trim())));
    }
    parse_external_model(&out, inst)
}
