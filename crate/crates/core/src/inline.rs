//! Flattens user-function calls into their call sites.
//!
//! The call graph is acyclic (checked by the front end), so inlining always
//! terminates. Callee variables become fresh locals named
//! `<callee>.<n>.<var>`, where `n` numbers the inlined call sites. The dot
//! cannot appear in FPL identifiers, so these names never collide with
//! user-declared ones.

use std::collections::HashMap;

use crate::ir::*;

/// Returns a copy of `entry` with every user call expanded in place.
pub fn inline(program: &TypedProgram, entry: FnId) -> Function {
    let root = program.get(entry);
    let mut cx = Inliner { program, vars: root.vars.clone(), counter: 0 };
    let identity: HashMap<VarId, VarId> = (0..root.vars.len() as u32).map(|i| (VarId(i), VarId(i))).collect();
    let mut body = Vec::new();
    cx.block(&root.body, &identity, Ret::Top, &mut body);
    let mut f = Function {
        name: root.name.clone(),
        vars: cx.vars,
        params: root.params.clone(),
        return_kind: root.return_kind,
        body,
        loc: root.loc,
    };
    renumber(&mut f.body, &mut 0);
    f
}

/// Convenience: inline the function called `name`.
pub fn inline_named(program: &TypedProgram, name: &str) -> Option<Function> {
    program.function_id(name).map(|id| inline(program, id))
}

fn renumber(body: &mut [Stmt], next: &mut u32) {
    for s in body {
        s.id = StmtId(*next);
        *next += 1;
        match &mut s.kind {
            StmtKind::For { body, .. } | StmtKind::While { body, .. } => renumber(body, next),
            StmtKind::If { then_body, else_body, .. } => {
                renumber(then_body, next);
                renumber(else_body, next);
            }
            _ => {}
        }
    }
}

type VarMap = HashMap<VarId, VarId>;

/// Where a `return` in the block being copied goes.
#[derive(Clone, Copy)]
enum Ret {
    Top,
    Into(Option<VarId>),
}

struct Inliner<'a> {
    program: &'a TypedProgram,
    vars: Vec<VarInfo>,
    counter: u32,
}

impl<'a> Inliner<'a> {
    fn fresh(&mut self, name: String, kind: VarKind, loc: Loc) -> VarId {
        let id = VarId(self.vars.len() as u32);
        self.vars.push(VarInfo { name, kind, role: VarRole::Local, loc });
        id
    }

    fn block(&mut self, body: &[Stmt], map: &VarMap, ret: Ret, out: &mut Vec<Stmt>) {
        for s in body {
            self.stmt(s, map, ret, out);
        }
    }

    fn stmt(&mut self, s: &Stmt, map: &VarMap, ret: Ret, out: &mut Vec<Stmt>) {
        let node = |kind| Stmt { id: s.id, kind, loc: s.loc };
        match &s.kind {
            StmtKind::AssignReal { target, value } => {
                let value = self.real(value, map, out);
                out.push(node(StmtKind::AssignReal { target: place(target, map), value }));
            }
            StmtKind::AssignInt { var, value } => {
                out.push(node(StmtKind::AssignInt { var: map[var], value: int(value, map) }));
            }
            StmtKind::AssignBool { var, value } => {
                out.push(node(StmtKind::AssignBool { var: map[var], value: boolean(value, map) }));
            }
            StmtKind::Alloc { var, len } => out.push(node(StmtKind::Alloc { var: map[var], len: int(len, map) })),
            StmtKind::For { index, lo, hi, body } => {
                let mut inner = Vec::new();
                self.block(body, map, ret, &mut inner);
                out.push(node(StmtKind::For { index: map[index], lo: int(lo, map), hi: int(hi, map), body: inner }));
            }
            StmtKind::While { cond, body } => {
                let mut inner = Vec::new();
                self.block(body, map, ret, &mut inner);
                out.push(node(StmtKind::While { cond: boolean(cond, map), body: inner }));
            }
            StmtKind::If { cond, then_body, else_body } => {
                let mut t = Vec::new();
                let mut e = Vec::new();
                self.block(then_body, map, ret, &mut t);
                self.block(else_body, map, ret, &mut e);
                out.push(node(StmtKind::If { cond: boolean(cond, map), then_body: t, else_body: e }));
            }
            StmtKind::Return(value) => match (ret, value) {
                (Ret::Top, v) => {
                    let v = v.as_ref().map(|v| self.real(v, map, out));
                    out.push(node(StmtKind::Return(v)));
                }
                (Ret::Into(Some(r)), Some(v)) => {
                    let v = self.real(v, map, out);
                    out.push(node(StmtKind::AssignReal { target: Place::Scalar(r), value: v }));
                }
                (Ret::Into(_), _) => {}
            },
            StmtKind::Call { func, args } => {
                self.expand(*func, args, map, out);
            }
        }
    }

    /// Copies `e`, hoisting nested user calls into `out` first.
    fn real(&mut self, e: &RealExpr, map: &VarMap, out: &mut Vec<Stmt>) -> RealExpr {
        match e {
            RealExpr::Const(c) => RealExpr::Const(*c),
            RealExpr::Var(v) => RealExpr::Var(map[v]),
            RealExpr::Elem(v, i) => RealExpr::Elem(map[v], Box::new(int(i, map))),
            RealExpr::FromInt(i) => RealExpr::FromInt(Box::new(int(i, map))),
            RealExpr::Neg(a) => RealExpr::Neg(Box::new(self.real(a, map, out))),
            RealExpr::Bin(op, a, b) => {
                let a = self.real(a, map, out);
                let b = self.real(b, map, out);
                RealExpr::bin(*op, a, b)
            }
            RealExpr::Call(b, args) => RealExpr::Call(*b, args.iter().map(|a| self.real(a, map, out)).collect()),
            RealExpr::Temp(t) => RealExpr::Temp(*t),
            RealExpr::UserCall(func, args) => {
                let slot = self.expand(*func, args, map, out).expect("real-returning callee");
                RealExpr::Var(slot)
            }
        }
    }

    /// Emits the callee body into `out`; returns the slot holding its result.
    fn expand(&mut self, func: FnId, args: &[Arg], map: &VarMap, out: &mut Vec<Stmt>) -> Option<VarId> {
        // Argument expressions are evaluated (and their calls hoisted) first.
        let mut lowered = Vec::new();
        for a in args {
            lowered.push(match a {
                Arg::Real(e) => Arg::Real(self.real(e, map, out)),
                Arg::Int(e) => Arg::Int(int(e, map)),
                Arg::Bool(e) => Arg::Bool(boolean(e, map)),
                Arg::Ref(v) => Arg::Ref(map[v]),
            });
        }
        self.counter += 1;
        let site = self.counter;
        let callee = self.program.get(func);
        let ret = callee.returns_real().then(|| self.fresh(format!("{}.{site}.ret", callee.name), VarKind::Real, callee.loc));
        let mut inner: VarMap = HashMap::new();
        for (param, arg) in callee.params.iter().zip(&lowered) {
            if let Arg::Ref(v) = arg {
                inner.insert(*param, *v);
            }
        }
        let mut created = Vec::new();
        for (i, info) in callee.vars.iter().enumerate() {
            let id = VarId(i as u32);
            if inner.contains_key(&id) {
                continue;
            }
            let fresh = self.fresh(format!("{}.{site}.{}", callee.name, info.name), VarKind::Real, info.loc);
            inner.insert(id, fresh);
            created.push((id, fresh));
        }
        // Kinds refer to other callee variables, so map them once every id exists.
        for (id, fresh) in created {
            self.vars[fresh.index()].kind = match &callee.var(id).kind {
                VarKind::RealArray(len) => VarKind::RealArray(int(len, &inner)),
                other => other.clone(),
            };
        }
        for (param, arg) in callee.params.iter().zip(lowered) {
            let loc = callee.var(*param).loc;
            let target = inner[param];
            let kind = match arg {
                Arg::Real(e) => StmtKind::AssignReal { target: Place::Scalar(target), value: e },
                Arg::Int(e) => StmtKind::AssignInt { var: target, value: e },
                Arg::Bool(e) => StmtKind::AssignBool { var: target, value: e },
                Arg::Ref(_) => continue,
            };
            out.push(Stmt { id: StmtId(0), kind, loc });
        }
        // Scalar locals start at zero on every call, as in a fresh frame.
        for (i, info) in callee.vars.iter().enumerate() {
            if info.is_param() {
                continue;
            }
            let target = inner[&VarId(i as u32)];
            let kind = match info.kind {
                VarKind::Real => StmtKind::AssignReal { target: Place::Scalar(target), value: RealExpr::Const(0.0) },
                VarKind::Int => StmtKind::AssignInt { var: target, value: IntExpr::Const(0) },
                VarKind::Bool => StmtKind::AssignBool { var: target, value: BoolExpr::Const(false) },
                VarKind::RealArray(_) => continue,
            };
            out.push(Stmt { id: StmtId(0), kind, loc: info.loc });
        }
        self.block(&callee.body, &inner, Ret::Into(ret), out);
        ret
    }
}

fn place(p: &Place, map: &VarMap) -> Place {
    match p {
        Place::Scalar(v) => Place::Scalar(map[v]),
        Place::Elem(v, i) => Place::Elem(map[v], int(i, map)),
    }
}

fn int(e: &IntExpr, map: &VarMap) -> IntExpr {
    match e {
        IntExpr::Const(c) => IntExpr::Const(*c),
        IntExpr::Var(v) => IntExpr::Var(map[v]),
        IntExpr::Neg(a) => IntExpr::Neg(Box::new(int(a, map))),
        IntExpr::Bin(op, a, b) => IntExpr::Bin(*op, Box::new(int(a, map)), Box::new(int(b, map))),
    }
}

fn boolean(e: &BoolExpr, map: &VarMap) -> BoolExpr {
    match e {
        BoolExpr::Const(b) => BoolExpr::Const(*b),
        BoolExpr::Var(v) => BoolExpr::Var(map[v]),
        BoolExpr::Not(a) => BoolExpr::Not(Box::new(boolean(a, map))),
        BoolExpr::And(a, b) => BoolExpr::And(Box::new(boolean(a, map)), Box::new(boolean(b, map))),
        BoolExpr::Or(a, b) => BoolExpr::Or(Box::new(boolean(a, map)), Box::new(boolean(b, map))),
        BoolExpr::CmpReal(op, a, b) => BoolExpr::CmpReal(*op, Box::new(real_pure(a, map)), Box::new(real_pure(b, map))),
        BoolExpr::CmpInt(op, a, b) => BoolExpr::CmpInt(*op, Box::new(int(a, map)), Box::new(int(b, map))),
    }
}

/// Conditions never contain user calls, so no hoisting is needed.
fn real_pure(e: &RealExpr, map: &VarMap) -> RealExpr {
    match e {
        RealExpr::Const(c) => RealExpr::Const(*c),
        RealExpr::Var(v) => RealExpr::Var(map[v]),
        RealExpr::Elem(v, i) => RealExpr::Elem(map[v], Box::new(int(i, map))),
        RealExpr::FromInt(i) => RealExpr::FromInt(Box::new(int(i, map))),
        RealExpr::Neg(a) => RealExpr::Neg(Box::new(real_pure(a, map))),
        RealExpr::Bin(op, a, b) => RealExpr::bin(*op, real_pure(a, map), real_pure(b, map)),
        RealExpr::Call(b, args) => RealExpr::Call(*b, args.iter().map(|a| real_pure(a, map)).collect()),
        RealExpr::Temp(t) => RealExpr::Temp(*t),
        RealExpr::UserCall(..) => unreachable!("user calls are rejected in conditions"),
    }
}
