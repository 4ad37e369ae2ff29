//! Metagrammar surface language: tokenizer, parser, import resolution,
//! validation, and pretty-printing.

pub mod ast;
mod lexer;
mod parser;
mod printer;
mod validate;

pub use ast::*;
pub use parser::parse_program;
pub use printer::{erase_spans, print_program};
pub use validate::{validate, Diagnostic, DiagnosticKind, Severity};

use std::collections::{HashMap, HashSet};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SurfaceError {
    #[error("{span}: syntax error: {message}")]
    Syntax { span: SourceSpan, message: String },
    #[error("{span}: `{name}` is already defined at {first}")]
    DuplicateName { name: String, span: SourceSpan, first: SourceSpan },
    #[error("{span}: undefined nonterminal `{name}`")]
    Name { name: String, span: SourceSpan },
    #[error("{span}: unknown import `{name}`")]
    UnknownImport { name: String, span: SourceSpan },
    #[error("{span}: `{name}` is defined both locally and by an import")]
    CollidingDefinition { name: String, span: SourceSpan },
    #[error("{0}")]
    Io(String),
}

/// Library files keyed by import name.
pub type Library = HashMap<String, SurfaceProgram>;

const STDLIB: &[(&str, &str)] = &[
    ("Number", include_str!("../../stdlib/Number.sag")),
    ("String", include_str!("../../stdlib/String.sag")),
    ("Text", include_str!("../../stdlib/Text.sag")),
    ("Whitespace", include_str!("../../stdlib/Whitespace.sag")),
];

/// The bundled standard library.
pub fn stdlib() -> Library {
    STDLIB
        .iter()
        .map(|(name, src)| {
            let prog = parse_program(src, &format!("<stdlib>/{name}.sag"))
                .unwrap_or_else(|e| panic!("bundled library {name} is malformed: {e}"));
            (name.to_string(), prog)
        })
        .collect()
}

/// Load every `<Name>.sag` in `dir` as a library entry.
pub fn load_library_dir(dir: &Path) -> Result<Library, SurfaceError> {
    let mut lib = Library::new();
    let entries = std::fs::read_dir(dir).map_err(|e| SurfaceError::Io(format!("{}: {e}", dir.display())))?;
    for entry in entries {
        let path = entry.map_err(|e| SurfaceError::Io(e.to_string()))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("sag") {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else { continue };
        let src = std::fs::read_to_string(&path).map_err(|e| SurfaceError::Io(format!("{}: {e}", path.display())))?;
        lib.insert(stem.to_string(), parse_program(&src, &path.display().to_string())?);
    }
    Ok(lib)
}

/// Splice imported definitions into `prog`.
///
/// Imported rules come first, in import order; imports of imports are followed
/// and each library is included once.
pub fn resolve_imports(prog: &SurfaceProgram, library: &Library) -> Result<SurfaceProgram, SurfaceError> {
    if prog.imports.is_empty() {
        return Ok(prog.clone());
    }
    let mut out = SurfaceProgram {
        name: prog.name.clone(),
        imports: Vec::new(),
        existentials: Vec::new(),
        rules: Vec::new(),
        directives: Vec::new(),
        start: prog.start.clone(),
    };
    let mut included = HashSet::new();
    for imp in &prog.imports {
        include(imp, library, &mut included, &mut out)?;
    }
    let local: HashSet<&str> = prog.rules.iter().map(|r| r.lhs.as_str()).collect();
    for r in &out.rules {
        if local.contains(r.lhs.as_str()) {
            let span = prog.rules.iter().find(|l| l.lhs == r.lhs).map(|l| l.span.clone()).unwrap_or_else(|| r.span.clone());
            return Err(SurfaceError::CollidingDefinition { name: r.lhs.clone(), span });
        }
    }
    out.existentials.extend(prog.existentials.iter().cloned());
    out.rules.extend(prog.rules.iter().cloned());
    out.directives.extend(prog.directives.iter().cloned());
    Ok(out)
}

fn include(imp: &Import, library: &Library, included: &mut HashSet<String>, out: &mut SurfaceProgram) -> Result<(), SurfaceError> {
    if !included.insert(imp.name.clone()) {
        return Ok(());
    }
    let lib = library.get(&imp.name).ok_or_else(|| SurfaceError::UnknownImport {
        name: imp.name.clone(),
        span: imp.span.clone(),
    })?;
    for inner in &lib.imports {
        include(inner, library, included, out)?;
    }
    for r in &lib.rules {
        if out.rules.iter().any(|o| o.lhs == r.lhs) {
            return Err(SurfaceError::CollidingDefinition { name: r.lhs.clone(), span: r.span.clone() });
        }
        out.rules.push(r.clone());
    }
    out.existentials.extend(lib.existentials.iter().cloned());
    out.directives.extend(lib.directives.iter().cloned());
    Ok(())
}

/// Parse, resolve imports against `library`, and validate. Error diagnostics
/// are returned as the `Err` value.
pub fn load_program(source: &str, name: &str, library: &Library) -> Result<SurfaceProgram, LoadError> {
    let parsed = parse_program(source, name)?;
    let resolved = resolve_imports(&parsed, library)?;
    let diags: Vec<Diagnostic> = validate(&resolved).into_iter().filter(|d| d.severity == Severity::Error).collect();
    if diags.is_empty() {
        Ok(resolved)
    } else {
        Err(LoadError::Invalid(diags))
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Diagnostic>),
}

/// Call `f` on every nonterminal reference in rule bodies (not in directives).
pub(crate) fn visit_nonterm_refs(prog: &SurfaceProgram, f: &mut impl FnMut(&NontermRef)) {
    fn prod(p: &ProdExpr, f: &mut impl FnMut(&NontermRef)) {
        for a in &p.atoms {
            match a {
                Atom::Nonterm(r) => f(r),
                Atom::Star(inner) => prod(inner, f),
                Atom::Group(alts) => alts.iter().for_each(|p| prod(p, f)),
                Atom::Guard(_, inner) => prod(inner, f),
                Atom::Terminal(_) | Atom::CharRange(..) => {}
            }
        }
    }
    for r in &prog.rules {
        for item in &r.body {
            match item {
                BodyItem::Mandatory(p, _) | BodyItem::Optional(p, _) => prod(p, f),
                BodyItem::Comprehension { template, .. } => prod(template, f),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn import_splices_library_rules_first() {
        let lib = stdlib();
        let p = parse_program("import Number\nS -> Number.\nstart S", "t").unwrap();
        let r = resolve_imports(&p, &lib).unwrap();
        assert_eq!(r.rules.first().unwrap().lhs, "Number");
        assert_eq!(r.rules.last().unwrap().lhs, "S");
        assert!(validate(&r).is_empty());
    }

    #[test]
    fn empty_import_list_is_identity() {
        let p = parse_program("S -> \"a\". start S", "t").unwrap();
        assert_eq!(resolve_imports(&p, &Library::new()).unwrap(), p);
    }

    #[test]
    fn local_redefinition_collides() {
        let p = parse_program("import String\nString -> \"a\".\nstart String", "t").unwrap();
        assert!(matches!(
            resolve_imports(&p, &stdlib()),
            Err(SurfaceError::CollidingDefinition { name, .. }) if name == "String"
        ));
    }

    #[test]
    fn unknown_import() {
        let p = parse_program("import Nope\nS -> \"a\".\nstart S", "t").unwrap();
        assert!(matches!(resolve_imports(&p, &stdlib()), Err(SurfaceError::UnknownImport { .. })));
    }
}
