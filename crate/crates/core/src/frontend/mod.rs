//! FPL front end: lexing, parsing, name checks and type checking.
//!
//! ```
//! let program = fpee::frontend::parse(
//!     "func f(x: real): real { var z: real; z = x + x; return z; }",
//! ).unwrap();
//! assert_eq!(program.functions[0].body.len(), 2);
//! ```

pub mod ast;
mod lexer;
mod parser;
mod pretty;
mod typecheck;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

pub use ast::Loc;
pub use parser::parse_expression;
pub use pretty::{expr as pretty_expr, pretty_print};
pub use typecheck::typecheck;

use ast::{ExprKind, Program, StmtKind, TypeSpec};

/// A front-end error with its location and the offending source line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub loc: Loc,
    pub message: String,
    pub excerpt: String,
}

impl Diagnostic {
    pub(crate) fn at(source: &str, loc: Loc, message: String) -> Self {
        let line = source.lines().nth(loc.line.saturating_sub(1) as usize).unwrap_or("");
        let caret = " ".repeat(loc.col.saturating_sub(1) as usize);
        Diagnostic { loc, message, excerpt: format!("{line}\n{caret}^") }
    }

    fn bare(loc: Loc, message: String) -> Self {
        Diagnostic { loc, message, excerpt: String::new() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.loc, self.message)?;
        if !self.excerpt.is_empty() {
            write!(f, "\n{}", self.excerpt)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct FrontendError {
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for FrontendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl From<Diagnostic> for FrontendError {
    fn from(d: Diagnostic) -> Self {
        FrontendError { diagnostics: vec![d] }
    }
}

/// Parses FPL source and checks program-level naming rules: unique function
/// names, every identifier bound, and an acyclic call graph.
pub fn parse(source: &str) -> Result<Program, FrontendError> {
    let program = parser::parse_program(source)?;
    let diagnostics = check_names(source, &program);
    if diagnostics.is_empty() {
        Ok(program)
    } else {
        Err(FrontendError { diagnostics })
    }
}

/// Parse and type-check in one step.
pub fn compile(source: &str) -> Result<crate::ir::TypedProgram, FrontendError> {
    let program = parse(source)?;
    typecheck(&program).map_err(|diagnostics| FrontendError { diagnostics })
}

fn check_names<'p>(source: &str, program: &'p Program) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut seen = HashSet::new();
    for f in &program.functions {
        if !seen.insert(f.name.as_str()) {
            diags.push(Diagnostic::at(source, f.loc, format!("duplicate function name `{}`", f.name)));
        }
    }
    let functions: BTreeSet<&'p str> = program.functions.iter().map(|f| f.name.as_str()).collect();
    let mut calls: BTreeMap<&'p str, Vec<(&'p str, Loc)>> = BTreeMap::new();
    for f in &program.functions {
        let mut scope: HashSet<&str> = HashSet::new();
        for p in &f.params {
            if !scope.insert(p.name.as_str()) {
                diags.push(Diagnostic::at(source, p.loc, format!("duplicate variable `{}`", p.name)));
            }
        }
        for v in &f.locals {
            if !scope.insert(v.name.as_str()) {
                diags.push(Diagnostic::at(source, v.loc, format!("duplicate variable `{}`", v.name)));
            }
        }
        let check_expr = |e: &ast::Expr, diags: &mut Vec<Diagnostic>, calls: &mut Vec<(&'p str, Loc)>| {
            let mut unknown = Vec::new();
            let mut found_calls = Vec::new();
            e.walk(&mut |n| match &n.kind {
                ExprKind::Var(name) | ExprKind::Index(name, _) if !scope.contains(name.as_str()) => {
                    unknown.push((name.clone(), n.loc));
                }
                ExprKind::Call(name, _) => {
                    if functions.contains(name.as_str()) {
                        found_calls.push((name.clone(), n.loc));
                    } else if crate::ir::Builtin::from_name(name).is_none() {
                        unknown.push((name.clone(), n.loc));
                    }
                }
                _ => {}
            });
            for (name, loc) in unknown {
                diags.push(Diagnostic::at(source, loc, format!("unknown identifier `{name}`")));
            }
            for (name, loc) in found_calls {
                let interned = *functions.get(name.as_str()).unwrap();
                calls.push((interned, loc));
            }
        };
        let mut fn_calls = Vec::new();
        for p in &f.params {
            if let TypeSpec::RealArray(len) = &p.ty {
                check_expr(len, &mut diags, &mut fn_calls);
            }
        }
        for v in &f.locals {
            if let TypeSpec::RealArray(len) = &v.ty {
                check_expr(len, &mut diags, &mut fn_calls);
            }
        }
        let mut stack: Vec<&ast::Stmt> = f.body.iter().rev().collect();
        while let Some(s) = stack.pop() {
            match &s.kind {
                StmtKind::Assign { target, value } => {
                    if !scope.contains(target.name.as_str()) {
                        diags.push(Diagnostic::at(
                            source,
                            target.loc,
                            format!("unknown identifier `{}`", target.name),
                        ));
                    }
                    if let Some(i) = &target.index {
                        check_expr(i, &mut diags, &mut fn_calls);
                    }
                    check_expr(value, &mut diags, &mut fn_calls);
                }
                StmtKind::For { index, lo, hi, body } => {
                    if !scope.contains(index.as_str()) {
                        diags.push(Diagnostic::at(source, s.loc, format!("unknown identifier `{index}`")));
                    }
                    check_expr(lo, &mut diags, &mut fn_calls);
                    check_expr(hi, &mut diags, &mut fn_calls);
                    stack.extend(body.iter().rev());
                }
                StmtKind::While { cond, body } => {
                    check_expr(cond, &mut diags, &mut fn_calls);
                    stack.extend(body.iter().rev());
                }
                StmtKind::If { cond, then_body, else_body } => {
                    check_expr(cond, &mut diags, &mut fn_calls);
                    stack.extend(else_body.iter().rev());
                    stack.extend(then_body.iter().rev());
                }
                StmtKind::Return(Some(e)) => check_expr(e, &mut diags, &mut fn_calls),
                StmtKind::Return(None) => {}
                StmtKind::Call { name, args } => {
                    if let Some(interned) = functions.get(name.as_str()) {
                        fn_calls.push((*interned, s.loc));
                    } else if crate::ir::Builtin::from_name(name).is_some() {
                        diags.push(Diagnostic::at(
                            source,
                            s.loc,
                            format!("builtin `{name}` cannot be called as a statement"),
                        ));
                    } else {
                        diags.push(Diagnostic::at(source, s.loc, format!("unknown identifier `{name}`")));
                    }
                    for a in args {
                        check_expr(a, &mut diags, &mut fn_calls);
                    }
                }
            }
        }
        calls.entry(f.name.as_str()).or_default().extend(fn_calls);
    }
    diags.extend(find_recursion(source, program, &calls));
    diags
}

/// Reports the first call edge closing each cycle, in definition order.
fn find_recursion(source: &str, program: &Program, calls: &BTreeMap<&str, Vec<(&str, Loc)>>) -> Vec<Diagnostic> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Unvisited,
        Active,
        Done,
    }
    fn dfs<'a>(
        f: &'a str,
        calls: &BTreeMap<&'a str, Vec<(&'a str, Loc)>>,
        marks: &mut BTreeMap<&'a str, Mark>,
        hits: &mut Vec<(&'a str, &'a str, Loc)>,
    ) {
        marks.insert(f, Mark::Active);
        for &(callee, loc) in calls.get(f).map(|v| v.as_slice()).unwrap_or(&[]) {
            match marks.get(callee).copied().unwrap_or(Mark::Unvisited) {
                Mark::Active => hits.push((f, callee, loc)),
                Mark::Unvisited => dfs(callee, calls, marks, hits),
                Mark::Done => {}
            }
        }
        marks.insert(f, Mark::Done);
    }
    let mut marks = BTreeMap::new();
    let mut hits = Vec::new();
    for f in &program.functions {
        if marks.get(f.name.as_str()).copied().unwrap_or(Mark::Unvisited) == Mark::Unvisited {
            dfs(f.name.as_str(), calls, &mut marks, &mut hits);
        }
    }
    hits.into_iter()
        .map(|(caller, callee, loc)| {
            let msg = if caller == callee {
                format!("recursive call to `{callee}`")
            } else {
                format!("recursive call: `{caller}` calls `{callee}`, which is already on the call stack")
            };
            Diagnostic::at(source, loc, msg)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_example_structure() {
        let p = parse("func f(x: real): real { var z: real; z = x + x; return z; }").unwrap();
        assert_eq!(p.functions.len(), 1);
        assert_eq!(p.functions[0].locals.len(), 1);
        assert_eq!(p.functions[0].body.len(), 2);
    }

    #[test]
    fn empty_input() {
        let err = parse("").unwrap_err();
        let d = &err.diagnostics[0];
        assert_eq!((d.loc.line, d.loc.col), (1, 1));
        assert!(d.message.starts_with("expected function"), "{}", d.message);
    }

    #[test]
    fn self_recursion() {
        let err = parse("func f(x: real): real { var y: real; y = f(x); return y; }").unwrap_err();
        assert!(err.diagnostics.iter().any(|d| d.message.contains("recursive call")));
    }

    #[test]
    fn mutual_recursion() {
        let src = "func a(x: real): real { return b(x); }\nfunc b(x: real): real { return a(x); }";
        let err = parse(src).unwrap_err();
        assert!(err.diagnostics.iter().any(|d| d.message.contains("recursive call")));
    }

    #[test]
    fn duplicate_function() {
        let err = parse("func f() { }\nfunc f() { }").unwrap_err();
        assert_eq!(err.diagnostics[0].message, "duplicate function name `f`");
        assert_eq!(err.diagnostics[0].loc.line, 2);
    }

    #[test]
    fn unknown_identifier_has_excerpt() {
        let err = parse("func f(x: real): real {\n  return x + q;\n}").unwrap_err();
        let d = &err.diagnostics[0];
        assert_eq!(d.message, "unknown identifier `q`");
        assert_eq!((d.loc.line, d.loc.col), (2, 14));
        assert_eq!(d.excerpt, "  return x + q;\n             ^");
    }

    #[test]
    fn diagnostics_are_deterministic() {
        let src = "func f(x: real): real { y = z + w; return f(x); }";
        assert_eq!(parse(src).unwrap_err(), parse(src).unwrap_err());
    }
}
