//! Type checking and lowering of the syntax tree into [`crate::ir`].

use std::collections::HashMap;

use super::ast::{self, BinaryOp, Direction, ExprKind, Loc, ReturnKind, TypeSpec, UnaryOp};
use super::Diagnostic;
use crate::ir::*;

/// Type-checks every function. Either all functions lower cleanly or the
/// complete, source-ordered list of diagnostics is returned.
pub fn typecheck(program: &ast::Program) -> Result<TypedProgram, Vec<Diagnostic>> {
    let signatures: HashMap<&str, (FnId, &ast::FunctionDef)> = program
        .functions
        .iter()
        .enumerate()
        .map(|(i, f)| (f.name.as_str(), (FnId(i as u32), f)))
        .collect();
    let mut diags = Vec::new();
    let mut functions = Vec::new();
    for f in &program.functions {
        let mut cx = Checker { signatures: &signatures, diags: Vec::new(), vars: Vec::new(), names: HashMap::new(), loop_indices: Vec::new(), next_stmt: 0 };
        let lowered = cx.function(f);
        diags.extend(cx.diags);
        functions.push(lowered);
    }
    if diags.is_empty() {
        Ok(TypedProgram { functions })
    } else {
        diags.sort_by_key(|d| (d.loc.line, d.loc.col));
        Err(diags)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Real,
    Int,
    Bool,
    Array,
}

impl Ty {
    fn name(self) -> &'static str {
        match self {
            Ty::Real => "real",
            Ty::Int => "int",
            Ty::Bool => "bool",
            Ty::Array => "real array",
        }
    }
}

/// Marker for an error that has already been reported.
struct Reported;

type Check<T> = Result<T, Reported>;

struct Checker<'a> {
    signatures: &'a HashMap<&'a str, (FnId, &'a ast::FunctionDef)>,
    diags: Vec<Diagnostic>,
    vars: Vec<VarInfo>,
    names: HashMap<String, VarId>,
    loop_indices: Vec<VarId>,
    next_stmt: u32,
}

impl<'a> Checker<'a> {
    fn report<T>(&mut self, loc: Loc, message: String) -> Check<T> {
        self.diags.push(Diagnostic::bare(loc, message));
        Err(Reported)
    }

    fn function(&mut self, f: &ast::FunctionDef) -> Function {
        let mut params = Vec::new();
        // Declare every name first so length expressions can refer to any int param.
        for (position, p) in f.params.iter().enumerate() {
            let id = self.declare(&p.name, VarRole::Param { direction: p.direction, position }, p.loc);
            params.push(id);
        }
        for v in &f.locals {
            self.declare(&v.name, VarRole::Local, v.loc);
        }
        let decls: Vec<(&TypeSpec, Loc)> =
            f.params.iter().map(|p| (&p.ty, p.loc)).chain(f.locals.iter().map(|v| (&v.ty, v.loc))).collect();
        for (i, (ty, _)) in decls.iter().enumerate() {
            self.vars[i].kind = match ty {
                TypeSpec::Real => VarKind::Real,
                TypeSpec::Int => VarKind::Int,
                TypeSpec::Bool => VarKind::Bool,
                TypeSpec::RealArray(_) => VarKind::RealArray(IntExpr::Const(0)),
            };
        }
        for (i, (ty, _)) in decls.iter().enumerate() {
            if let TypeSpec::RealArray(len) = ty {
                if let Ok(len) = self.length_expr(len) {
                    self.vars[i].kind = VarKind::RealArray(len);
                }
            }
        }
        for p in &f.params {
            if p.direction == Direction::Inout && matches!(p.ty, TypeSpec::Int | TypeSpec::Bool) {
                let _ = self.report::<()>(p.loc, format!("`inout` is only supported for real parameters (`{}`)", p.name));
            }
        }

        let mut body = Vec::new();
        for v in &f.locals {
            if let TypeSpec::RealArray(_) = v.ty {
                let id = self.names[&v.name];
                if let VarKind::RealArray(len) = &self.vars[id.index()].kind {
                    let len = len.clone();
                    body.push(self.stmt_node(StmtKind::Alloc { var: id, len }, v.loc));
                }
            }
        }
        let n = f.body.len();
        for (i, s) in f.body.iter().enumerate() {
            if let ast::StmtKind::Return(value) = &s.kind {
                if i + 1 != n {
                    let _ = self.report::<()>(s.loc, "`return` must be the last statement of a function".into());
                    continue;
                }
                match (f.return_kind, value) {
                    (ReturnKind::Real, Some(e)) => {
                        if let Ok(e) = self.real_expr(e) {
                            body.push(self.stmt_node(StmtKind::Return(Some(e)), s.loc));
                        }
                    }
                    (ReturnKind::Real, None) => {
                        let _ = self.report::<()>(s.loc, "missing return value in function returning `real`".into());
                    }
                    (ReturnKind::Void, Some(_)) => {
                        let _ = self.report::<()>(s.loc, "`void` function cannot return a value".into());
                    }
                    (ReturnKind::Void, None) => body.push(self.stmt_node(StmtKind::Return(None), s.loc)),
                }
                continue;
            }
            if let Ok(stmt) = self.stmt(s) {
                body.push(stmt);
            }
        }
        if f.return_kind == ReturnKind::Real && !matches!(f.body.last().map(|s| &s.kind), Some(ast::StmtKind::Return(_))) {
            let _ = self.report::<()>(f.loc, format!("function `{}` returning `real` must end with `return`", f.name));
        }
        Function {
            name: f.name.clone(),
            vars: std::mem::take(&mut self.vars),
            params,
            return_kind: f.return_kind,
            body,
            loc: f.loc,
        }
    }

    fn declare(&mut self, name: &str, role: VarRole, loc: Loc) -> VarId {
        let id = VarId(self.vars.len() as u32);
        self.vars.push(VarInfo { name: name.to_string(), kind: VarKind::Real, role, loc });
        self.names.insert(name.to_string(), id);
        id
    }

    fn stmt_node(&mut self, kind: StmtKind, loc: Loc) -> Stmt {
        let id = StmtId(self.next_stmt);
        self.next_stmt += 1;
        Stmt { id, kind, loc }
    }

    /// Array lengths may only use literals and int parameters.
    fn length_expr(&mut self, e: &ast::Expr) -> Check<IntExpr> {
        let lowered = self.int_expr(e)?;
        let mut reads = Vec::new();
        lowered.reads(&mut reads);
        for v in reads {
            if !self.vars[v.index()].is_param() {
                let name = self.vars[v.index()].name.clone();
                return self.report(e.loc, format!("array length may only refer to int parameters, not `{name}`"));
            }
        }
        Ok(lowered)
    }

    fn var_of(&mut self, name: &str, loc: Loc) -> Check<VarId> {
        match self.names.get(name) {
            Some(id) => Ok(*id),
            None => self.report(loc, format!("unknown identifier `{name}`")),
        }
    }

    fn var_ty(&self, id: VarId) -> Ty {
        match self.vars[id.index()].kind {
            VarKind::Real => Ty::Real,
            VarKind::Int => Ty::Int,
            VarKind::Bool => Ty::Bool,
            VarKind::RealArray(_) => Ty::Array,
        }
    }

    fn block(&mut self, body: &[ast::Stmt]) -> Vec<Stmt> {
        let mut out = Vec::new();
        for s in body {
            if let Ok(s) = self.stmt(s) {
                out.push(s);
            }
        }
        out
    }

    fn stmt(&mut self, s: &ast::Stmt) -> Check<Stmt> {
        let id = StmtId(self.next_stmt);
        self.next_stmt += 1;
        let kind = match &s.kind {
            ast::StmtKind::Assign { target, value } => self.assign(target, value)?,
            ast::StmtKind::For { index, lo, hi, body } => {
                let index_id = self.var_of(index, s.loc)?;
                if self.var_ty(index_id) != Ty::Int {
                    let ty = self.var_ty(index_id).name();
                    return self.report(s.loc, format!("loop index `{index}` must be `int`, found `{ty}`"));
                }
                if self.loop_indices.contains(&index_id) {
                    return self.report(s.loc, format!("loop index `{index}` is already in use by an enclosing loop"));
                }
                let lo = self.int_expr(lo);
                let hi = self.int_expr(hi);
                self.loop_indices.push(index_id);
                let body = self.block(body);
                self.loop_indices.pop();
                StmtKind::For { index: index_id, lo: lo?, hi: hi?, body }
            }
            ast::StmtKind::While { cond, body } => {
                let cond = self.bool_expr(cond);
                let body = self.block(body);
                StmtKind::While { cond: cond?, body }
            }
            ast::StmtKind::If { cond, then_body, else_body } => {
                let cond = self.bool_expr(cond);
                let then_body = self.block(then_body);
                let else_body = self.block(else_body);
                StmtKind::If { cond: cond?, then_body, else_body }
            }
            ast::StmtKind::Return(_) => {
                return self.report(s.loc, "`return` must be the last statement of a function".into());
            }
            ast::StmtKind::Call { name, args } => {
                let (func, args) = self.user_call(name, args, s.loc)?;
                StmtKind::Call { func, args }
            }
        };
        Ok(Stmt { id, kind, loc: s.loc })
    }

    fn assign(&mut self, target: &ast::LValue, value: &ast::Expr) -> Check<StmtKind> {
        let var = self.var_of(&target.name, target.loc)?;
        if self.loop_indices.contains(&var) {
            return self.report(target.loc, format!("cannot assign to loop index `{}` inside its loop", target.name));
        }
        let info = &self.vars[var.index()];
        match (&target.index, self.var_ty(var)) {
            (Some(index), Ty::Array) => {
                if let VarRole::Param { direction: Direction::In, .. } = info.role {
                    return self.report(
                        target.loc,
                        format!("cannot assign to element of input array `{}`; declare it `inout`", target.name),
                    );
                }
                let index = self.index_expr(index);
                let value = self.real_expr(value);
                Ok(StmtKind::AssignReal { target: Place::Elem(var, index?), value: value? })
            }
            (Some(_), ty) => self.report(target.loc, format!("cannot index `{}` of type `{}`", target.name, ty.name())),
            (None, Ty::Real) => Ok(StmtKind::AssignReal { target: Place::Scalar(var), value: self.real_expr(value)? }),
            (None, Ty::Int) => Ok(StmtKind::AssignInt { var, value: self.int_expr(value)? }),
            (None, Ty::Bool) => Ok(StmtKind::AssignBool { var, value: self.bool_expr(value)? }),
            (None, Ty::Array) => {
                self.report(target.loc, format!("cannot assign to whole array `{}`; assign elements", target.name))
            }
        }
    }

    /// Infers the type of an expression without lowering it.
    fn infer(&mut self, e: &ast::Expr) -> Check<Ty> {
        Ok(match &e.kind {
            ExprKind::Real(_) => Ty::Real,
            ExprKind::Int(_) => Ty::Int,
            ExprKind::Bool(_) => Ty::Bool,
            ExprKind::Var(name) => {
                let v = self.var_of(name, e.loc)?;
                self.var_ty(v)
            }
            ExprKind::Index(..) => Ty::Real,
            ExprKind::Unary(UnaryOp::Not, _) => Ty::Bool,
            ExprKind::Unary(UnaryOp::Neg, inner) => match self.infer(inner)? {
                Ty::Int => Ty::Int,
                _ => Ty::Real,
            },
            ExprKind::Binary(op, a, b) => {
                if op.is_comparison() || matches!(op, BinaryOp::And | BinaryOp::Or) {
                    Ty::Bool
                } else {
                    let (ta, tb) = (self.infer(a)?, self.infer(b)?);
                    if ta == Ty::Int && tb == Ty::Int {
                        Ty::Int
                    } else {
                        Ty::Real
                    }
                }
            }
            ExprKind::Call(..) => Ty::Real,
        })
    }

    fn real_expr(&mut self, e: &ast::Expr) -> Check<RealExpr> {
        Ok(match &e.kind {
            ExprKind::Real(v) => RealExpr::Const(*v),
            ExprKind::Int(_) => RealExpr::FromInt(Box::new(self.int_expr(e)?)),
            ExprKind::Bool(_) => return self.report(e.loc, "boolean used in arithmetic position".into()),
            ExprKind::Var(name) => {
                let v = self.var_of(name, e.loc)?;
                match self.var_ty(v) {
                    Ty::Real => RealExpr::Var(v),
                    Ty::Int => RealExpr::FromInt(Box::new(IntExpr::Var(v))),
                    Ty::Bool => return self.report(e.loc, format!("boolean `{name}` used in arithmetic position")),
                    Ty::Array => return self.report(e.loc, format!("array `{name}` used as a scalar; index it")),
                }
            }
            ExprKind::Index(name, index) => {
                let v = self.var_of(name, e.loc)?;
                if self.var_ty(v) != Ty::Array {
                    let ty = self.var_ty(v).name();
                    return self.report(e.loc, format!("cannot index `{name}` of type `{ty}`"));
                }
                RealExpr::Elem(v, Box::new(self.index_expr(index)?))
            }
            ExprKind::Unary(UnaryOp::Neg, inner) => match self.infer(inner)? {
                Ty::Int => RealExpr::FromInt(Box::new(self.int_expr(e)?)),
                _ => RealExpr::Neg(Box::new(self.real_expr(inner)?)),
            },
            ExprKind::Unary(UnaryOp::Not, _) => {
                return self.report(e.loc, "boolean used in arithmetic position".into());
            }
            ExprKind::Binary(op, a, b) => {
                let arith = match op {
                    BinaryOp::Add => ArithOp::Add,
                    BinaryOp::Sub => ArithOp::Sub,
                    BinaryOp::Mul => ArithOp::Mul,
                    BinaryOp::Div => ArithOp::Div,
                    _ => return self.report(e.loc, "boolean used in arithmetic position".into()),
                };
                if self.infer(e)? == Ty::Int {
                    RealExpr::FromInt(Box::new(self.int_expr(e)?))
                } else {
                    let a = self.real_expr(a);
                    let b = self.real_expr(b);
                    RealExpr::bin(arith, a?, b?)
                }
            }
            ExprKind::Call(name, args) => {
                if let Some(b) = Builtin::from_name(name) {
                    if args.len() != b.arity() {
                        return self.report(
                            e.loc,
                            format!("`{name}` takes {} argument(s), found {}", b.arity(), args.len()),
                        );
                    }
                    let lowered: Vec<Check<RealExpr>> = args.iter().map(|a| self.real_expr(a)).collect();
                    RealExpr::Call(b, lowered.into_iter().collect::<Check<Vec<_>>>()?)
                } else {
                    let (func, args) = self.user_call(name, args, e.loc)?;
                    let callee = self.signatures.values().find(|(id, _)| *id == func).unwrap().1;
                    if callee.return_kind != ReturnKind::Real {
                        return self.report(e.loc, format!("`{name}` does not return a value"));
                    }
                    RealExpr::UserCall(func, args)
                }
            }
        })
    }

    fn index_expr(&mut self, e: &ast::Expr) -> Check<IntExpr> {
        match self.infer(e)? {
            Ty::Int => self.int_expr(e),
            ty => self.report(e.loc, format!("array index must be `int`, found `{}`", ty.name())),
        }
    }

    fn int_expr(&mut self, e: &ast::Expr) -> Check<IntExpr> {
        Ok(match &e.kind {
            ExprKind::Int(v) => IntExpr::Const(*v),
            ExprKind::Var(name) => {
                let v = self.var_of(name, e.loc)?;
                match self.var_ty(v) {
                    Ty::Int => IntExpr::Var(v),
                    ty => return self.report(e.loc, format!("expected `int`, found `{}` `{name}`", ty.name())),
                }
            }
            ExprKind::Unary(UnaryOp::Neg, inner) => IntExpr::Neg(Box::new(self.int_expr(inner)?)),
            ExprKind::Binary(op @ (BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div), a, b) => {
                let arith = match op {
                    BinaryOp::Add => ArithOp::Add,
                    BinaryOp::Sub => ArithOp::Sub,
                    BinaryOp::Mul => ArithOp::Mul,
                    _ => ArithOp::Div,
                };
                let a = self.int_expr(a);
                let b = self.int_expr(b);
                IntExpr::Bin(arith, Box::new(a?), Box::new(b?))
            }
            _ => {
                let ty = self.infer(e)?;
                return self.report(e.loc, format!("expected `int`, found `{}`", ty.name()));
            }
        })
    }

    fn bool_expr(&mut self, e: &ast::Expr) -> Check<BoolExpr> {
        Ok(match &e.kind {
            ExprKind::Bool(b) => BoolExpr::Const(*b),
            ExprKind::Var(name) => {
                let v = self.var_of(name, e.loc)?;
                match self.var_ty(v) {
                    Ty::Bool => BoolExpr::Var(v),
                    ty => return self.report(e.loc, format!("expected `bool`, found `{}` `{name}`", ty.name())),
                }
            }
            ExprKind::Unary(UnaryOp::Not, inner) => BoolExpr::Not(Box::new(self.bool_expr(inner)?)),
            ExprKind::Binary(BinaryOp::And, a, b) => {
                let a = self.bool_expr(a);
                let b = self.bool_expr(b);
                BoolExpr::And(Box::new(a?), Box::new(b?))
            }
            ExprKind::Binary(BinaryOp::Or, a, b) => {
                let a = self.bool_expr(a);
                let b = self.bool_expr(b);
                BoolExpr::Or(Box::new(a?), Box::new(b?))
            }
            ExprKind::Binary(op, a, b) if op.is_comparison() => {
                let cmp = match op {
                    BinaryOp::Lt => CmpOp::Lt,
                    BinaryOp::Le => CmpOp::Le,
                    BinaryOp::Gt => CmpOp::Gt,
                    BinaryOp::Ge => CmpOp::Ge,
                    BinaryOp::Eq => CmpOp::Eq,
                    _ => CmpOp::Ne,
                };
                let (ta, tb) = (self.infer(a)?, self.infer(b)?);
                if ta == Ty::Bool || tb == Ty::Bool {
                    return self.report(e.loc, "comparison operands must be numeric".into());
                }
                let mut calls = false;
                a.walk(&mut |n| calls |= matches!(&n.kind, ExprKind::Call(f, _) if Builtin::from_name(f).is_none()));
                b.walk(&mut |n| calls |= matches!(&n.kind, ExprKind::Call(f, _) if Builtin::from_name(f).is_none()));
                if calls {
                    return self.report(e.loc, "user function calls are not allowed in conditions".into());
                }
                if ta == Ty::Int && tb == Ty::Int {
                    let a = self.int_expr(a);
                    let b = self.int_expr(b);
                    BoolExpr::CmpInt(cmp, Box::new(a?), Box::new(b?))
                } else {
                    let a = self.real_expr(a);
                    let b = self.real_expr(b);
                    BoolExpr::CmpReal(cmp, Box::new(a?), Box::new(b?))
                }
            }
            _ => {
                let ty = self.infer(e)?;
                return self.report(e.loc, format!("expected `bool`, found `{}`", ty.name()));
            }
        })
    }

    fn user_call(&mut self, name: &str, args: &[ast::Expr], loc: Loc) -> Check<(FnId, Vec<Arg>)> {
        let Some(&(func, callee)) = self.signatures.get(name) else {
            return self.report(loc, format!("unknown function `{name}`"));
        };
        if args.len() != callee.params.len() {
            return self.report(
                loc,
                format!("`{name}` takes {} argument(s), found {}", callee.params.len(), args.len()),
            );
        }
        let mut lowered = Vec::new();
        let mut failed = false;
        for (param, arg) in callee.params.iter().zip(args) {
            let by_ref = matches!(param.ty, TypeSpec::RealArray(_)) || param.direction == Direction::Inout;
            let result = if by_ref {
                match &arg.kind {
                    ExprKind::Var(v) => {
                        let id = self.var_of(v, arg.loc)?;
                        let want = if matches!(param.ty, TypeSpec::RealArray(_)) { Ty::Array } else { Ty::Real };
                        let have = self.var_ty(id);
                        if have != want {
                            self.report(
                                arg.loc,
                                format!("argument `{}` of `{name}` expects `{}`, found `{}`", param.name, want.name(), have.name()),
                            )
                        } else if self.loop_indices.contains(&id) {
                            self.report(arg.loc, format!("loop index `{v}` cannot be passed by reference"))
                        } else {
                            Ok(Arg::Ref(id))
                        }
                    }
                    _ => self.report(arg.loc, format!("argument `{}` of `{name}` must be a variable", param.name)),
                }
            } else {
                match param.ty {
                    TypeSpec::Real => self.real_expr(arg).map(Arg::Real),
                    TypeSpec::Int => match self.infer(arg)? {
                        Ty::Int => self.int_expr(arg).map(Arg::Int),
                        ty => self.report(
                            arg.loc,
                            format!("argument `{}` of `{name}` expects `int`, found `{}`", param.name, ty.name()),
                        ),
                    },
                    TypeSpec::Bool => self.bool_expr(arg).map(Arg::Bool),
                    TypeSpec::RealArray(_) => unreachable!(),
                }
            };
            match result {
                Ok(a) => lowered.push(a),
                Err(Reported) => failed = true,
            }
        }
        if failed {
            Err(Reported)
        } else {
            Ok((func, lowered))
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::frontend::{compile, FrontendError};
    use crate::ir::*;

    fn errors(src: &str) -> Vec<String> {
        match compile(src) {
            Ok(_) => vec![],
            Err(FrontendError { diagnostics }) => diagnostics.into_iter().map(|d| d.message).collect(),
        }
    }

    #[test]
    fn real_plus_literal_is_well_typed() {
        assert!(errors("func f(x: real): real { var z: real; z = x + 1.0; return z; }").is_empty());
    }

    #[test]
    fn boolean_in_arithmetic() {
        let e = errors("func f(x: real): real { var z: real; var flag: bool; flag = x > 1.0; z = x + flag; return z; }");
        assert_eq!(e, vec!["boolean `flag` used in arithmetic position"]);
    }

    #[test]
    fn real_index() {
        let e = errors("func f(x: real, a: real[3]): real { return a[x]; }");
        assert_eq!(e, vec!["array index must be `int`, found `real`"]);
    }

    #[test]
    fn assignment_to_loop_index() {
        let e = errors("func f(x: real): real { var i: int; for i in 0..3 { i = 2; } return x; }");
        assert_eq!(e, vec!["cannot assign to loop index `i` inside its loop"]);
    }

    #[test]
    fn int_promotes_to_real() {
        let p = compile("func f(x: real, n: int): real { var h: real; h = x / n; return h; }").unwrap();
        let StmtKind::AssignReal { value, .. } = &p.functions[0].body[0].kind else { panic!() };
        assert!(matches!(value, RealExpr::Bin(ArithOp::Div, _, b) if matches!(**b, RealExpr::FromInt(_))));
    }

    #[test]
    fn int_arithmetic_stays_int() {
        let p = compile("func f(n: int): real { var k: int; k = n / 2; return k * 1.5; }").unwrap();
        let StmtKind::AssignInt { value, .. } = &p.functions[0].body[0].kind else { panic!() };
        assert_eq!(*value, IntExpr::Bin(ArithOp::Div, Box::new(IntExpr::Var(VarId(0))), Box::new(IntExpr::Const(2))));
    }

    #[test]
    fn real_into_int_rejected() {
        let e = errors("func f(x: real): real { var k: int; k = x; return x; }");
        assert_eq!(e, vec!["expected `int`, found `real` `x`"]);
    }

    #[test]
    fn return_must_be_last() {
        let e = errors("func f(x: real): real { return x; x = 1.0; }");
        assert!(e.iter().any(|m| m.contains("last statement")), "{e:?}");
    }

    #[test]
    fn input_arrays_are_read_only() {
        let e = errors("func f(a: real[2]): real { a[0] = 1.0; return a[0]; }");
        assert!(e[0].contains("input array"));
    }

    #[test]
    fn local_arrays_allocated_first() {
        let p = compile("func f(n: int): real { var t: real[n + 1]; t[0] = 2.0; return t[0]; }").unwrap();
        assert!(matches!(p.functions[0].body[0].kind, StmtKind::Alloc { .. }));
    }

    #[test]
    fn array_length_must_use_params() {
        let e = errors("func f(x: real): real { var k: int; var t: real[k]; return x; }");
        assert!(e[0].contains("array length"), "{e:?}");
    }

    #[test]
    fn call_argument_checks() {
        let src = "func g(a: real[n], n: int): real { return a[0]; }\n\
                   func f(x: real): real { var y: real; y = g(x, 2); return y; }";
        let e = errors(src);
        assert!(e[0].contains("expects `real array`"), "{e:?}");
    }

    #[test]
    fn void_call_in_expression() {
        let src = "func g(inout y: real) { y = 1.0; }\nfunc f(x: real): real { var y: real; y = g(y); return y; }";
        assert!(errors(src).iter().any(|m| m.contains("does not return")));
    }

    #[test]
    fn diagnostics_sorted_and_repeatable() {
        let src = "func f(x: real): real { var b: bool; var k: int; k = x; b = 1.0; return x + b; }";
        let a = errors(src);
        assert_eq!(a.len(), 3);
        assert_eq!(a, errors(src));
    }
}
