//! Deterministic text rendering of an [`AdjointFunction`].

use std::fmt::Write;

use super::adjoint::*;
use crate::ir::*;

pub fn emit(adj: &AdjointFunction) -> String {
    let mut e = Emitter { f: &adj.primal, out: String::new(), depth: 0 };
    e.header(adj);
    e.line("// forward sweep");
    for s in &adj.forward {
        e.fwd(s);
    }
    e.line("// backward sweep");
    for s in &adj.backward {
        e.bwd(s, adj);
    }
    e.depth -= 1;
    e.line("}");
    e.out
}

struct Emitter<'a> {
    f: &'a Function,
    out: String,
    depth: usize,
}

impl Emitter<'_> {
    fn line(&mut self, text: &str) {
        for _ in 0..self.depth {
            self.out.push_str("  ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn name(&self, v: VarId) -> &str {
        &self.f.var(v).name
    }

    fn header(&mut self, adj: &AdjointFunction) {
        let f = self.f;
        let mut params = Vec::new();
        for p in &f.params {
            let info = f.var(*p);
            let dir = if info.is_output() { "inout " } else { "" };
            params.push(format!("{dir}{}: {}", info.name, self.kind(&info.kind)));
        }
        for p in adj.adjoint_outputs() {
            let info = f.var(p);
            params.push(format!("inout _d_{}: {}", info.name, self.kind(&info.kind)));
        }
        params.push("inout _final_error: real".into());
        self.line(&format!("// error-estimating adjoint of `{}`, model {}", f.name, adj.model));
        self.line(&format!("func {}({}) {{", adj.name, params.join(", ")));
        self.depth += 1;
        let mut locals = Vec::new();
        for (i, v) in f.vars.iter().enumerate() {
            if !v.is_param() {
                locals.push((VarId(i as u32), v));
            }
        }
        for (_, v) in locals {
            self.line(&format!("var {}: {};", v.name, self.kind(&v.kind)));
        }
    }

    fn kind(&self, k: &VarKind) -> String {
        match k {
            VarKind::Real => "real".into(),
            VarKind::Int => "int".into(),
            VarKind::Bool => "bool".into(),
            VarKind::RealArray(len) => format!("real[{}]", self.int(len)),
        }
    }

    fn place(&self, p: &Place) -> String {
        match p {
            Place::Scalar(v) => self.name(*v).to_string(),
            Place::Elem(v, i) => format!("{}[{}]", self.name(*v), self.int(i)),
        }
    }

    fn adj_place(&self, p: &Place) -> String {
        format!("_d_{}", self.place(p))
    }

    fn saved(&self, s: &Saved) -> String {
        match s {
            Saved::Real(p) => self.place(p),
            Saved::Int(v) => self.name(*v).to_string(),
            Saved::Array(v) => format!("{}[..]", self.name(*v)),
        }
    }

    fn fwd(&mut self, s: &FStmt) {
        match s {
            FStmt::Push(saved) => {
                let t = format!("TapePush({});", self.saved(saved));
                self.line(&t)
            }
            FStmt::Primal(stmt) => {
                let t = self.primal(stmt);
                self.line(&t)
            }
            FStmt::For { index, lo, hi, body, loc, .. } => {
                let head = format!("for {} in {}..{} {{", self.name(*index), self.int(lo), self.int(hi));
                self.line(&head);
                self.nested(body, |e, s| e.fwd(s));
                self.line("}");
                let t = format!("TapePush(loop {} @{loc});", self.name(*index));
                self.line(&t);
            }
            FStmt::While { cond, body, loc, .. } => {
                let head = format!("while {} {{", self.boolean(cond));
                self.line(&head);
                self.nested(body, |e, s| e.fwd(s));
                self.line("}");
                self.line(&format!("TapePush(trips @{loc});"));
            }
            FStmt::If { cond, then_body, else_body, loc, .. } => {
                let head = format!("if {} {{", self.boolean(cond));
                self.line(&head);
                self.nested(then_body, |e, s| e.fwd(s));
                if !else_body.is_empty() {
                    self.line("} else {");
                    self.nested(else_body, |e, s| e.fwd(s));
                }
                self.line("}");
                self.line(&format!("TapePush(branch @{loc});"));
            }
        }
    }

    fn bwd(&mut self, s: &BStmt, adj: &AdjointFunction) {
        match s {
            BStmt::Snapshot { target, value, adjoint } => {
                let mut t = format!("_t{} = {};", value.0, self.place(target));
                if let Some(a) = adjoint {
                    let d = self.adj_place(target);
                    write!(t, " _t{} = {d}; {d} = 0;", a.0).unwrap();
                }
                self.line(&t)
            }
            BStmt::Pop(saved) => {
                let t = format!("TapePop({});", self.saved(saved));
                self.line(&t)
            }
            BStmt::Seed { adjoint } => self.line(&format!("_t{} = _seed;", adjoint.0)),
            BStmt::Temp { tmp, value } => {
                let t = format!("_t{} = {};", tmp.0, self.real(value, 0));
                self.line(&t)
            }
            BStmt::Accum { target, value } => {
                let t = format!("{} += {};", self.adj_place(target), self.real(value, 0));
                self.line(&t)
            }
            BStmt::AssignError(a) => {
                let adjoint = a.adjoint.map(|t| format!("_t{}", t.0)).unwrap_or_else(|| "0".into());
                let t = format!(
                    "AssignError({}, value: _t{}, adjoint: {adjoint}, at: {});",
                    self.name(a.var),
                    a.value.0,
                    a.loc
                );
                self.line(&t)
            }
            BStmt::ParamError { var } => {
                let n = self.name(*var).to_string();
                let adjoint = if adj.activity.is_diff(*var) { format!("_d_{n}") } else { "0".into() };
                self.line(&format!("AssignError({n}, value: {n}, adjoint: {adjoint}, at: param);"))
            }
            BStmt::For { index, body, loc, .. } => {
                let i = self.name(*index).to_string();
                self.line(&format!("TapePop(loop {i} @{loc});"));
                self.line(&format!("for {i} in reverse {{"));
                self.nested(body, |e, s| e.bwd(s, adj));
                self.line("}");
            }
            BStmt::While { body, loc, .. } => {
                self.line(&format!("TapePop(trips @{loc});"));
                self.line("repeat trips {");
                self.nested(body, |e, s| e.bwd(s, adj));
                self.line("}");
            }
            BStmt::If { then_body, else_body, loc, .. } => {
                self.line(&format!("TapePop(branch @{loc});"));
                self.line("if taken {");
                self.nested(then_body, |e, s| e.bwd(s, adj));
                if !else_body.is_empty() {
                    self.line("} else {");
                    self.nested(else_body, |e, s| e.bwd(s, adj));
                }
                self.line("}");
            }
            BStmt::FinalizeEE => self.line("_final_error = FinalizeEE();"),
        }
    }

    fn nested<T>(&mut self, body: &[T], mut each: impl FnMut(&mut Self, &T)) {
        self.depth += 1;
        for s in body {
            each(self, s);
        }
        self.depth -= 1;
    }

    fn primal(&self, s: &Stmt) -> String {
        match &s.kind {
            StmtKind::AssignReal { target, value } => format!("{} = {};", self.place(target), self.real(value, 0)),
            StmtKind::AssignInt { var, value } => format!("{} = {};", self.name(*var), self.int(value)),
            StmtKind::AssignBool { var, value } => format!("{} = {};", self.name(*var), self.boolean(value)),
            StmtKind::Alloc { var, len } => format!("alloc {}[{}];", self.name(*var), self.int(len)),
            StmtKind::Return(Some(e)) => format!("return {};", self.real(e, 0)),
            StmtKind::Return(None) => "return;".into(),
            _ => unreachable!("structured statements are rendered by the caller"),
        }
    }

    /// Renders with the fewest parentheses that keep the tree shape. `ctx`
    /// is the binding strength required by the parent.
    fn real(&self, e: &RealExpr, ctx: u8) -> String {
        let (text, prec) = match e {
            RealExpr::Const(c) => (literal(*c), 4),
            RealExpr::Var(v) => (self.name(*v).to_string(), 4),
            RealExpr::Elem(v, i) => (format!("{}[{}]", self.name(*v), self.int(i)), 4),
            RealExpr::FromInt(i) => (format!("real({})", self.int(i)), 4),
            RealExpr::Temp(t) => (format!("_t{}", t.0), 4),
            RealExpr::Neg(a) => (format!("-{}", self.real(a, 3)), 3),
            RealExpr::Bin(op, a, b) => {
                let p = arith_prec(*op);
                (format!("{} {} {}", self.real(a, p), op.symbol(), self.real(b, p + 1)), p)
            }
            RealExpr::Call(f, args) => {
                let args: Vec<String> = args.iter().map(|a| self.real(a, 0)).collect();
                (format!("{f}({})", args.join(", ")), 4)
            }
            RealExpr::UserCall(..) => ("<call>".into(), 4),
        };
        if prec < ctx {
            format!("({text})")
        } else {
            text
        }
    }

    fn int(&self, e: &IntExpr) -> String {
        self.int_ctx(e, 0)
    }

    fn int_ctx(&self, e: &IntExpr, ctx: u8) -> String {
        let (text, prec) = match e {
            IntExpr::Const(c) => (c.to_string(), 4),
            IntExpr::Var(v) => (self.name(*v).to_string(), 4),
            IntExpr::Neg(a) => (format!("-{}", self.int_ctx(a, 3)), 3),
            IntExpr::Bin(op, a, b) => {
                let p = arith_prec(*op);
                (format!("{} {} {}", self.int_ctx(a, p), op.symbol(), self.int_ctx(b, p + 1)), p)
            }
        };
        if prec < ctx {
            format!("({text})")
        } else {
            text
        }
    }

    fn boolean(&self, e: &BoolExpr) -> String {
        match e {
            BoolExpr::Const(b) => b.to_string(),
            BoolExpr::Var(v) => self.name(*v).to_string(),
            BoolExpr::Not(a) => format!("!({})", self.boolean(a)),
            BoolExpr::And(a, b) => format!("({} && {})", self.boolean(a), self.boolean(b)),
            BoolExpr::Or(a, b) => format!("({} || {})", self.boolean(a), self.boolean(b)),
            BoolExpr::CmpReal(op, a, b) => format!("{} {} {}", self.real(a, 1), op.symbol(), self.real(b, 1)),
            BoolExpr::CmpInt(op, a, b) => format!("{} {} {}", self.int_ctx(a, 1), op.symbol(), self.int_ctx(b, 1)),
        }
    }
}

fn arith_prec(op: ArithOp) -> u8 {
    match op {
        ArithOp::Add | ArithOp::Sub => 1,
        ArithOp::Mul | ArithOp::Div => 2,
    }
}

/// Shortest round-tripping decimal, always with a `.` or exponent.
fn literal(c: f64) -> String {
    let s = format!("{c:?}");
    if s.contains(['.', 'e', 'E']) || !c.is_finite() {
        s
    } else {
        format!("{s}.0")
    }
}
