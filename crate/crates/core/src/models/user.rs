//! Declarative user error models.
//!
//! A model file is TOML:
//!
//! ```toml
//! model = "my-shadow"
//! expression = "abs(adjoint * shadow_delta)"
//!
//! [map]          # optional; binds `approx_delta`
//! v = "exp"
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use super::approx::{self, ApproxFunctionMap, ApproxImpl};
use super::ModelError;
use crate::frontend::ast::{BinaryOp, Expr, ExprKind, UnaryOp};
use crate::frontend::parse_expression;
use crate::ir::{ArithOp, Builtin, RealExpr, VarId};

/// Names an expression may use, in slot order.
pub const BOUND_NAMES: [&str; 5] = ["value", "adjoint", "eps_m", "shadow_delta", "approx_delta"];

#[derive(Debug, Clone, PartialEq)]
pub struct UserModel {
    pub name: String,
    pub expression: String,
    pub compiled: RealExpr,
    pub map: Option<ApproxFunctionMap>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    model: String,
    expression: String,
    #[serde(default)]
    map: Option<BTreeMap<String, String>>,
}

pub fn load_user_model(path: &Path) -> Result<UserModel, ModelError> {
    let text = std::fs::read_to_string(path).map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))?;
    parse_user_model(&text)
}

pub fn parse_user_model(text: &str) -> Result<UserModel, ModelError> {
    let file: ModelFile = toml::from_str(text).map_err(|e| ModelError::Schema(e.message().to_string()))?;
    let compiled = compile_expression(&file.expression)?;
    let map = match file.map {
        None => None,
        Some(pairs) => {
            let mut resolved = Vec::new();
            for (var, f) in pairs {
                let f = approx::lookup(&f).map_err(|_| ModelError::Unapproximable { var: var.clone(), function: f })?;
                resolved.push((var, f));
            }
            Some(ApproxFunctionMap::new(resolved, ApproxImpl::Fast)?)
        }
    };
    Ok(UserModel { name: file.model, expression: file.expression, compiled, map })
}

/// Compiles an expression over [`BOUND_NAMES`]; `Var(k)` reads slot `k`.
pub fn compile_expression(source: &str) -> Result<RealExpr, ModelError> {
    let ast = parse_expression(source).map_err(|d| ModelError::Expression(d.to_string()))?;
    let mut unbound = Vec::new();
    ast.walk(&mut |n| {
        if let ExprKind::Var(name) = &n.kind {
            if !BOUND_NAMES.contains(&name.as_str()) && !unbound.contains(name) {
                unbound.push(name.clone());
            }
        }
    });
    if !unbound.is_empty() {
        return Err(ModelError::Unbound(unbound));
    }
    lower(&ast)
}

fn lower(e: &Expr) -> Result<RealExpr, ModelError> {
    let unsupported = |what: &str| Err(ModelError::Expression(format!("{}: {what} is not allowed in a model expression", e.loc)));
    Ok(match &e.kind {
        ExprKind::Real(v) => RealExpr::Const(*v),
        ExprKind::Int(v) => RealExpr::Const(*v as f64),
        ExprKind::Var(name) => RealExpr::Var(VarId(BOUND_NAMES.iter().position(|b| b == name).unwrap() as u32)),
        ExprKind::Unary(UnaryOp::Neg, a) => RealExpr::Neg(Box::new(lower(a)?)),
        ExprKind::Binary(op, a, b) => {
            let op = match op {
                BinaryOp::Add => ArithOp::Add,
                BinaryOp::Sub => ArithOp::Sub,
                BinaryOp::Mul => ArithOp::Mul,
                BinaryOp::Div => ArithOp::Div,
                _ => return unsupported("a comparison or logical operator"),
            };
            RealExpr::bin(op, lower(a)?, lower(b)?)
        }
        ExprKind::Call(name, args) => {
            let Some(f) = Builtin::from_name(name) else {
                return Err(ModelError::Expression(format!("{}: unknown function `{name}`", e.loc)));
            };
            if args.len() != f.arity() {
                return Err(ModelError::Expression(format!("{}: `{name}` takes {} argument(s)", e.loc, f.arity())));
            }
            RealExpr::Call(f, args.iter().map(lower).collect::<Result<_, _>>()?)
        }
        ExprKind::Bool(_) | ExprKind::Unary(UnaryOp::Not, _) => return unsupported("a boolean"),
        ExprKind::Index(..) => return unsupported("indexing"),
    })
}

/// Evaluates a compiled model expression against its slots.
pub fn eval(e: &RealExpr, slots: &[f64; 5]) -> f64 {
    match e {
        RealExpr::Const(c) => *c,
        RealExpr::Var(v) => slots[v.index()],
        RealExpr::Neg(a) => -eval(a, slots),
        RealExpr::Bin(op, a, b) => {
            let (a, b) = (eval(a, slots), eval(b, slots));
            match op {
                ArithOp::Add => a + b,
                ArithOp::Sub => a - b,
                ArithOp::Mul => a * b,
                ArithOp::Div => a / b,
            }
        }
        RealExpr::Call(f, args) => {
            let args: Vec<f64> = args.iter().map(|a| eval(a, slots)).collect();
            f.apply(&args)
        }
        _ => unreachable!("model expressions only contain slots, constants and builtins"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_name_listed() {
        let err = parse_user_model("model = \"m\"\nexpression = \"foo * adjoint + bar\"").unwrap_err();
        assert_eq!(err, ModelError::Unbound(vec!["foo".into(), "bar".into()]));
        assert!(err.to_string().contains("foo"));
    }

    #[test]
    fn schema_violation() {
        assert!(matches!(parse_user_model("model = \"m\""), Err(ModelError::Schema(_))));
        assert!(matches!(parse_user_model("model = \"m\"\nexpression = \"value\"\nextra = 1"), Err(ModelError::Schema(_))));
    }

    #[test]
    fn map_is_loaded() {
        let m = parse_user_model("model = \"m\"\nexpression = \"abs(adjoint * approx_delta)\"\n[map]\nv = \"exp\"").unwrap();
        assert_eq!(m.map.unwrap().function_for("v"), Some(Builtin::Exp));
    }

    #[test]
    fn evaluates() {
        let e = compile_expression("eps_m * abs(value) * abs(adjoint)").unwrap();
        assert_eq!(eval(&e, &[2.0, -3.0, 0.5, 0.0, 0.0]), 3.0);
    }
}
