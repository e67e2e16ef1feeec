//! Canonical source rendering of a [`Program`].
//!
//! The output re-parses to a structurally equal tree.

use std::fmt::Write;

use super::ast::*;

pub fn pretty_print(program: &Program) -> String {
    let mut out = String::new();
    for (i, f) in program.functions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        function(&mut out, f);
    }
    out
}

fn function(out: &mut String, f: &FunctionDef) {
    let params: Vec<String> = f
        .params
        .iter()
        .map(|p| {
            let dir = if p.direction == Direction::Inout { "inout " } else { "" };
            format!("{dir}{}: {}", p.name, type_spec(&p.ty))
        })
        .collect();
    let ret = match f.return_kind {
        ReturnKind::Real => "real",
        ReturnKind::Void => "void",
    };
    let _ = writeln!(out, "func {}({}): {} {{", f.name, params.join(", "), ret);
    for v in &f.locals {
        let _ = writeln!(out, "    var {}: {};", v.name, type_spec(&v.ty));
    }
    block(out, &f.body, 1);
    out.push_str("}\n");
}

fn type_spec(t: &TypeSpec) -> String {
    match t {
        TypeSpec::Real => "real".into(),
        TypeSpec::Int => "int".into(),
        TypeSpec::Bool => "bool".into(),
        TypeSpec::RealArray(len) => format!("real[{}]", expr(len)),
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn block(out: &mut String, body: &[Stmt], depth: usize) {
    for s in body {
        stmt(out, s, depth);
    }
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    indent(out, depth);
    match &s.kind {
        StmtKind::Assign { target, value } => {
            let _ = writeln!(out, "{} = {};", lvalue(target), expr(value));
        }
        StmtKind::For { index, lo, hi, body } => {
            let _ = writeln!(out, "for {index} in {}..{} {{", expr(lo), expr(hi));
            block(out, body, depth + 1);
            indent(out, depth);
            out.push_str("}\n");
        }
        StmtKind::While { cond, body } => {
            let _ = writeln!(out, "while {} {{", expr(cond));
            block(out, body, depth + 1);
            indent(out, depth);
            out.push_str("}\n");
        }
        StmtKind::If { cond, then_body, else_body } => {
            let _ = writeln!(out, "if {} {{", expr(cond));
            block(out, then_body, depth + 1);
            indent(out, depth);
            if else_body.is_empty() {
                out.push_str("}\n");
            } else {
                out.push_str("} else {\n");
                block(out, else_body, depth + 1);
                indent(out, depth);
                out.push_str("}\n");
            }
        }
        StmtKind::Return(None) => out.push_str("return;\n"),
        StmtKind::Return(Some(e)) => {
            let _ = writeln!(out, "return {};", expr(e));
        }
        StmtKind::Call { name, args } => {
            let _ = writeln!(out, "{name}({});", args.iter().map(expr).collect::<Vec<_>>().join(", "));
        }
    }
}

fn lvalue(l: &LValue) -> String {
    match &l.index {
        Some(i) => format!("{}[{}]", l.name, expr(i)),
        None => l.name.clone(),
    }
}

pub fn expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e);
    s
}

fn write_expr(out: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::Real(v) => {
            let _ = write!(out, "{v:?}");
        }
        ExprKind::Int(v) => {
            let _ = write!(out, "{v}");
        }
        ExprKind::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        ExprKind::Var(n) => out.push_str(n),
        ExprKind::Index(n, i) => {
            out.push_str(n);
            out.push('[');
            write_expr(out, i);
            out.push(']');
        }
        ExprKind::Unary(op, inner) => {
            out.push(if *op == UnaryOp::Neg { '-' } else { '!' });
            if matches!(inner.kind, ExprKind::Binary(..)) {
                out.push('(');
                write_expr(out, inner);
                out.push(')');
            } else {
                write_expr(out, inner);
            }
        }
        ExprKind::Binary(op, a, b) => {
            let prec = op.precedence();
            let left_parens = binary_prec(a).is_some_and(|p| p < prec || (op.is_comparison() && p == prec));
            let right_parens = binary_prec(b).is_some_and(|p| p <= prec);
            paren(out, a, left_parens);
            let _ = write!(out, " {} ", op.symbol());
            paren(out, b, right_parens);
        }
        ExprKind::Call(name, args) => {
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a);
            }
            out.push(')');
        }
    }
}

fn binary_prec(e: &Expr) -> Option<u8> {
    match &e.kind {
        ExprKind::Binary(op, _, _) => Some(op.precedence()),
        _ => None,
    }
}

fn paren(out: &mut String, e: &Expr, wrap: bool) {
    if wrap {
        out.push('(');
    }
    write_expr(out, e);
    if wrap {
        out.push(')');
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::{parse_expression, parse_program};
    use super::*;

    #[test]
    fn keeps_needed_parens_only() {
        let e = parse_expression("(a - (b - c)) * ((d))").unwrap();
        assert_eq!(expr(&e), "(a - (b - c)) * d");
    }

    #[test]
    fn program_round_trip() {
        let src = "func f(x: real, inout a: real[n], n: int): real { var z: real; var i: int; \
                   for i in 0..n { a[i] = a[i] * x; } while z < 1.0 && !(x > 2.0) { z = z + 0.25; } \
                   z = -(x + 1e-5) / 3.0; return z; }";
        let p = parse_program(src).unwrap();
        let printed = pretty_print(&p);
        assert_eq!(parse_program(&printed).unwrap(), p);
        assert_eq!(pretty_print(&parse_program(&printed).unwrap()), printed);
    }
}
