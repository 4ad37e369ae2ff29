//! Loading positive and negative examples from files, directories and
//! manifests.

use metagram_core::induction::Example;
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExampleError {
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("{}:{line}: {message}", path.display())]
    Manifest { path: PathBuf, line: usize, message: String },
}

#[derive(Debug, Clone, Copy)]
pub struct ReadOptions {
    /// Remove one final `\n` or `\r\n`.
    pub strip_trailing_newline: bool,
    /// Keep only the first N lines.
    pub max_lines: Option<usize>,
}

impl Default for ReadOptions {
    fn default() -> Self {
        ReadOptions { strip_trailing_newline: true, max_lines: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExampleSet {
    pub positives: Vec<Example>,
    pub negatives: Vec<Example>,
}

/// Collects files first and assigns labels at the end, so that collisions
/// are resolved over the whole set.
#[derive(Debug, Default)]
pub struct ExampleSetBuilder {
    files: Vec<(bool, PathBuf)>,
}

impl ExampleSetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// A file, or every regular file directly inside a directory.
    pub fn add_path(&mut self, path: &Path, positive: bool) -> Result<(), ExampleError> {
        let io = |e: std::io::Error| ExampleError::Io { path: path.to_path_buf(), message: e.to_string() };
        let meta = std::fs::metadata(path).map_err(io)?;
        if meta.is_dir() {
            let mut entries: Vec<PathBuf> = Vec::new();
            for entry in std::fs::read_dir(path).map_err(io)? {
                let p = entry.map_err(io)?.path();
                if p.is_file() {
                    entries.push(p);
                }
            }
            entries.sort();
            self.files.extend(entries.into_iter().map(|p| (positive, p)));
        } else {
            self.files.push((positive, path.to_path_buf()));
        }
        Ok(())
    }

    /// Lines `+ <path>` or `- <path>`, relative to the manifest's directory.
    /// Blank lines and lines starting with `#` are ignored.
    pub fn add_manifest(&mut self, manifest: &Path) -> Result<(), ExampleError> {
        let text = std::fs::read_to_string(manifest)
            .map_err(|e| ExampleError::Io { path: manifest.to_path_buf(), message: e.to_string() })?;
        let base = manifest.parent().unwrap_or(Path::new(""));
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: String| ExampleError::Manifest { path: manifest.to_path_buf(), line: i + 1, message };
            let (positive, rest) = match line.split_at(1) {
                ("+", rest) => (true, rest),
                ("-", rest) => (false, rest),
                _ => return Err(bad(format!("expected `+ <path>` or `- <path>`, found {line:?}"))),
            };
            let rel = rest.trim();
            if rel.is_empty() {
                return Err(bad("missing path".into()));
            }
            self.add_path(&base.join(rel), positive).map_err(|e| bad(e.to_string()))?;
        }
        Ok(())
    }

    pub fn build(self, opts: ReadOptions) -> Result<ExampleSet, ExampleError> {
        let base_name = |p: &Path| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| p.display().to_string());
        let mut name_count: HashMap<String, usize> = HashMap::new();
        for (_, p) in &self.files {
            *name_count.entry(base_name(p)).or_insert(0) += 1;
        }
        let mut used: HashMap<String, usize> = HashMap::new();
        let mut set = ExampleSet::default();
        for (positive, p) in &self.files {
            let name = base_name(p);
            let mut label = if name_count[&name] > 1 { p.display().to_string() } else { name };
            let n = used.entry(label.clone()).or_insert(0);
            *n += 1;
            if *n > 1 {
                label = format!("{label}#{n}");
            }
            let bytes = std::fs::read(p).map_err(|e| ExampleError::Io { path: p.clone(), message: e.to_string() })?;
            let text = String::from_utf8(bytes)
                .map_err(|e| ExampleError::Io { path: p.clone(), message: format!("not UTF-8: {e}") })?;
            let ex = Example::new(label, prepare(&text, opts));
            if *positive {
                set.positives.push(ex);
            } else {
                set.negatives.push(ex);
            }
        }
        Ok(set)
    }
}

/// Apply the line limit, then strip one final newline.
pub fn prepare(text: &str, opts: ReadOptions) -> String {
    let mut s = match opts.max_lines {
        Some(n) => text.split_inclusive('\n').take(n).collect(),
        None => text.to_string(),
    };
    if opts.strip_trailing_newline {
        if s.ends_with("\r\n") {
            s.truncate(s.len() - 2);
        } else if s.ends_with('\n') {
            s.pop();
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prepare_strips_one_newline() {
        let o = ReadOptions::default();
        assert_eq!(prepare("a\n\n", o), "a\n");
        assert_eq!(prepare("a\r\n", o), "a");
        assert_eq!(prepare("a", o), "a");
        let keep = ReadOptions { strip_trailing_newline: false, max_lines: None };
        assert_eq!(prepare("a\n", keep), "a\n");
    }

    #[test]
    fn max_lines_truncates() {
        let o = ReadOptions { strip_trailing_newline: true, max_lines: Some(2) };
        assert_eq!(prepare("1\n2\n3\n", o), "1\n2");
        assert_eq!(prepare("1", o), "1");
    }
}
