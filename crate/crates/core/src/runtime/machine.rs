//! Slot-resolved tree-walking interpreter shared by the primal and adjoint
//! runs.

use std::collections::BTreeMap;

use super::inputs::{Inputs, Value};
use super::tape::{Tape, TapeEntry};
use super::RuntimeError;
use crate::ir::*;
use crate::models::{ApproxFunctionMap, AssignSite, ErrorModelSpec, ErrorRegistry};
use crate::precision::{round_to, Precision};
use crate::transform::{AdjointFunction, BStmt, FStmt, Saved};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Flags {
    pub non_finite: bool,
    pub overflow: bool,
}

pub(crate) struct Machine<'a> {
    f: &'a Function,
    pub reals: Vec<f64>,
    pub ints: Vec<i64>,
    pub bools: Vec<bool>,
    pub arrays: Vec<Vec<f64>>,
    prec: Vec<Precision>,
    /// Builtin substituted by its approximation at `f(v)` call sites.
    approx_at: Vec<Option<Builtin>>,
    approx: Option<&'a ApproxFunctionMap>,
    /// Domain and bounds checks; off while evaluating generated adjoint code.
    checked: bool,
    pub flags: Flags,
    pub result: Option<f64>,
    pub statements: u64,
}

fn fault(loc: Loc, message: impl Into<String>) -> RuntimeError {
    RuntimeError::Fault { loc, message: message.into() }
}

impl<'a> Machine<'a> {
    pub fn new(f: &'a Function, prec: Vec<Precision>, approx: Option<&'a ApproxFunctionMap>) -> Self {
        let n = f.vars.len();
        let approx_at = f.vars.iter().map(|v| approx.and_then(|m| m.function_for(&v.name))).collect();
        Machine {
            f,
            reals: vec![0.0; n],
            ints: vec![0; n],
            bools: vec![false; n],
            arrays: vec![Vec::new(); n],
            prec,
            approx_at,
            approx,
            checked: true,
            flags: Flags::default(),
            result: None,
            statements: 0,
        }
    }

    /// Switches to evaluating generated adjoint code: exact builtins, no
    /// domain checks.
    pub fn enter_backward(&mut self) {
        self.checked = false;
        self.approx = None;
    }

    /// Stores every parameter, rounding reals per the precision spec.
    pub fn bind(&mut self, inputs: &Inputs) -> Result<(), RuntimeError> {
        let f = self.f;
        for name in inputs.keys() {
            if !f.params.iter().any(|p| f.var(*p).name == *name) {
                return Err(RuntimeError::Input(format!("`{name}` is not a parameter of `{}`", f.name)));
            }
        }
        // Ints first: array lengths may depend on them.
        let mut ordered: Vec<VarId> = f.params.iter().copied().filter(|p| f.var(*p).kind == VarKind::Int).collect();
        ordered.extend(f.params.iter().copied().filter(|p| f.var(*p).kind != VarKind::Int));
        for p in ordered {
            let info = f.var(p);
            let value = inputs.get(&info.name).ok_or_else(|| RuntimeError::Input(format!("missing value for parameter `{}`", info.name)))?;
            let mismatch = || RuntimeError::Input(format!("parameter `{}` has the wrong kind of value", info.name));
            match (&info.kind, value) {
                (VarKind::Real, v) => {
                    let x = v.as_real().ok_or_else(mismatch)?;
                    self.reals[p.index()] = self.round(p, x);
                }
                (VarKind::Int, Value::Int(i)) => self.ints[p.index()] = *i,
                (VarKind::Int, Value::Real(x)) if x.fract() == 0.0 && x.abs() < 9.0e15 => self.ints[p.index()] = *x as i64,
                (VarKind::Bool, Value::Bool(b)) => self.bools[p.index()] = *b,
                (VarKind::RealArray(len), Value::Array(xs)) => {
                    let n = self.int(len, info.loc)?;
                    if n != xs.len() as i64 {
                        return Err(RuntimeError::Input(format!(
                            "array parameter `{}` has {} elements, declared length is {n}",
                            info.name,
                            xs.len()
                        )));
                    }
                    let xs = xs.iter().map(|x| self.round(p, *x)).collect();
                    self.arrays[p.index()] = xs;
                }
                _ => return Err(mismatch()),
            }
        }
        Ok(())
    }

    fn round(&mut self, v: VarId, x: f64) -> f64 {
        let x = match self.prec[v.index()] {
            Precision::Double => x,
            p => {
                let r = round_to(p, x);
                self.flags.overflow |= r.overflow;
                r.value
            }
        };
        if !x.is_finite() {
            self.flags.non_finite = true;
        }
        x
    }

    fn index(&self, v: VarId, i: &IntExpr, loc: Loc) -> Result<usize, RuntimeError> {
        let i = self.int(i, loc)?;
        let len = self.arrays[v.index()].len();
        if i < 0 || i as usize >= len {
            return Err(fault(loc, format!("index {i} out of bounds for `{}` of length {len}", self.f.var(v).name)));
        }
        Ok(i as usize)
    }

    pub fn read(&self, p: &Place, loc: Loc) -> Result<f64, RuntimeError> {
        Ok(match p {
            Place::Scalar(v) => self.reals[v.index()],
            Place::Elem(v, i) => self.arrays[v.index()][self.index(*v, i, loc)?],
        })
    }

    pub fn store(&mut self, p: &Place, x: f64, loc: Loc) -> Result<(), RuntimeError> {
        let x = self.round(p.var(), x);
        match p {
            Place::Scalar(v) => self.reals[v.index()] = x,
            Place::Elem(v, i) => {
                let i = self.index(*v, i, loc)?;
                self.arrays[v.index()][i] = x;
            }
        }
        Ok(())
    }

    pub fn real(&self, e: &RealExpr, temps: &[f64], loc: Loc) -> Result<f64, RuntimeError> {
        Ok(match e {
            RealExpr::Const(c) => *c,
            RealExpr::Var(v) => self.reals[v.index()],
            RealExpr::Elem(v, i) => self.arrays[v.index()][self.index(*v, i, loc)?],
            RealExpr::FromInt(i) => self.int(i, loc)? as f64,
            RealExpr::Temp(t) => temps[t.0 as usize],
            RealExpr::Neg(a) => -self.real(a, temps, loc)?,
            RealExpr::Bin(op, a, b) => {
                let a = self.real(a, temps, loc)?;
                let b = self.real(b, temps, loc)?;
                match op {
                    ArithOp::Add => a + b,
                    ArithOp::Sub => a - b,
                    ArithOp::Mul => a * b,
                    ArithOp::Div => {
                        if self.checked && b == 0.0 {
                            return Err(fault(loc, "division by zero"));
                        }
                        a / b
                    }
                }
            }
            RealExpr::Call(f, args) => {
                let x = self.real(&args[0], temps, loc)?;
                let y = match args.get(1) {
                    Some(a) => self.real(a, temps, loc)?,
                    None => 0.0,
                };
                if self.checked {
                    match f {
                        Builtin::Sqrt if x < 0.0 => return Err(fault(loc, format!("sqrt of negative value {x}"))),
                        Builtin::Log if x < 0.0 => return Err(fault(loc, format!("log of negative value {x}"))),
                        Builtin::Pow if x < 0.0 && y.fract() != 0.0 => {
                            return Err(fault(loc, format!("pow of negative base {x} with non-integer exponent {y}")))
                        }
                        _ => {}
                    }
                }
                if let (Some(map), RealExpr::Var(v)) = (self.approx, &args[0]) {
                    if self.approx_at[v.index()] == Some(*f) {
                        return Ok(map.approx(*f, x));
                    }
                }
                f.apply(&[x, y])
            }
            RealExpr::UserCall(..) => unreachable!("user calls are inlined before execution"),
        })
    }

    pub fn int(&self, e: &IntExpr, loc: Loc) -> Result<i64, RuntimeError> {
        Ok(match e {
            IntExpr::Const(c) => *c,
            IntExpr::Var(v) => self.ints[v.index()],
            IntExpr::Neg(a) => self.int(a, loc)?.checked_neg().ok_or_else(|| fault(loc, "integer overflow"))?,
            IntExpr::Bin(op, a, b) => {
                let (a, b) = (self.int(a, loc)?, self.int(b, loc)?);
                let r = match op {
                    ArithOp::Add => a.checked_add(b),
                    ArithOp::Sub => a.checked_sub(b),
                    ArithOp::Mul => a.checked_mul(b),
                    ArithOp::Div => {
                        if b == 0 {
                            return Err(fault(loc, "integer division by zero"));
                        }
                        a.checked_div(b)
                    }
                };
                r.ok_or_else(|| fault(loc, "integer overflow"))?
            }
        })
    }

    pub fn boolean(&self, e: &BoolExpr, loc: Loc) -> Result<bool, RuntimeError> {
        Ok(match e {
            BoolExpr::Const(b) => *b,
            BoolExpr::Var(v) => self.bools[v.index()],
            BoolExpr::Not(a) => !self.boolean(a, loc)?,
            BoolExpr::And(a, b) => self.boolean(a, loc)? && self.boolean(b, loc)?,
            BoolExpr::Or(a, b) => self.boolean(a, loc)? || self.boolean(b, loc)?,
            BoolExpr::CmpReal(op, a, b) => op.apply(self.real(a, &[], loc)?, self.real(b, &[], loc)?),
            BoolExpr::CmpInt(op, a, b) => op.apply(self.int(a, loc)?, self.int(b, loc)?),
        })
    }

    /// Executes a straight-line statement.
    fn simple(&mut self, s: &Stmt) -> Result<(), RuntimeError> {
        self.statements += 1;
        match &s.kind {
            StmtKind::AssignReal { target, value } => {
                let x = self.real(value, &[], s.loc)?;
                self.store(target, x, s.loc)?;
            }
            StmtKind::AssignInt { var, value } => self.ints[var.index()] = self.int(value, s.loc)?,
            StmtKind::AssignBool { var, value } => self.bools[var.index()] = self.boolean(value, s.loc)?,
            StmtKind::Alloc { var, len } => {
                let n = self.int(len, s.loc)?;
                if n < 0 {
                    return Err(fault(s.loc, format!("negative array length {n} for `{}`", self.f.var(*var).name)));
                }
                self.arrays[var.index()] = vec![0.0; n as usize];
            }
            StmtKind::Return(value) => {
                self.result = match value {
                    Some(e) => Some(self.real(e, &[], s.loc)?),
                    None => None,
                }
            }
            _ => unreachable!("structured statements are handled by the block walkers"),
        }
        Ok(())
    }

    /// Runs the original body.
    pub fn run(&mut self, body: &[Stmt]) -> Result<(), RuntimeError> {
        for s in body {
            match &s.kind {
                StmtKind::For { index, lo, hi, body } => {
                    let (lo, hi) = (self.int(lo, s.loc)?, self.int(hi, s.loc)?);
                    for i in lo..hi {
                        self.ints[index.index()] = i;
                        self.run(body)?;
                    }
                    self.ints[index.index()] = loop_exit(lo, hi, self.ints[index.index()]);
                }
                StmtKind::While { cond, body } => {
                    while self.boolean(cond, s.loc)? {
                        self.run(body)?;
                    }
                }
                StmtKind::If { cond, then_body, else_body } => {
                    if self.boolean(cond, s.loc)? {
                        self.run(then_body)?
                    } else {
                        self.run(else_body)?
                    }
                }
                StmtKind::Call { .. } => unreachable!("user calls are inlined before execution"),
                _ => self.simple(s)?,
            }
        }
        Ok(())
    }

    /// Runs a forward sweep, recording overwritten state on `tape`.
    pub fn forward(&mut self, body: &[FStmt], tape: &mut Tape) -> Result<(), RuntimeError> {
        for s in body {
            match s {
                FStmt::Push(saved) => {
                    let entry = match saved {
                        Saved::Real(p) => TapeEntry::Real(self.read(p, Loc::default())?),
                        Saved::Int(v) => TapeEntry::Int(self.ints[v.index()]),
                        Saved::Array(v) => TapeEntry::Array(std::mem::take(&mut self.arrays[v.index()])),
                    };
                    tape.push(entry);
                }
                FStmt::Primal(stmt) => self.simple(stmt)?,
                FStmt::For { index, lo, hi, body, loc, .. } => {
                    let (lo, hi) = (self.int(lo, *loc)?, self.int(hi, *loc)?);
                    let saved_index = self.ints[index.index()];
                    for i in lo..hi {
                        self.ints[index.index()] = i;
                        self.forward(body, tape)?;
                    }
                    self.ints[index.index()] = loop_exit(lo, hi, saved_index);
                    tape.push(TapeEntry::Loop { lo, hi, saved_index });
                }
                FStmt::While { cond, body, loc, .. } => {
                    let mut trips = 0;
                    while self.boolean(cond, *loc)? {
                        self.forward(body, tape)?;
                        trips += 1;
                    }
                    tape.push(TapeEntry::Trips(trips));
                }
                FStmt::If { cond, then_body, else_body, loc, .. } => {
                    let taken = self.boolean(cond, *loc)?;
                    if taken {
                        self.forward(then_body, tape)?
                    } else {
                        self.forward(else_body, tape)?
                    }
                    tape.push(TapeEntry::Branch(taken));
                }
            }
        }
        Ok(())
    }
}

/// Value of a `for` index after the loop: `hi` if the body ran, else the
/// index is left as it was before.
fn loop_exit(lo: i64, hi: i64, before: i64) -> i64 {
    if lo < hi {
        hi
    } else {
        before
    }
}

/// Mutable state of a backward sweep.
pub(crate) struct Backward<'a> {
    pub adj: &'a AdjointFunction,
    pub model: &'a ErrorModelSpec,
    /// Precision each variable is analyzed for.
    pub target: Vec<Precision>,
    pub temps: Vec<f64>,
    pub d_reals: Vec<f64>,
    pub d_arrays: Vec<Vec<f64>>,
    pub seed: f64,
    pub registry: ErrorRegistry,
    site_entry: Vec<usize>,
    param_entry: Vec<usize>,
    pub sensitivity: Vec<f64>,
    /// Loop index whose iterations are profiled.
    pub marked: Option<VarId>,
    iteration: Option<i64>,
    pub per_iteration: BTreeMap<i64, Vec<f64>>,
    pub marked_trips: u64,
}

impl<'a> Backward<'a> {
    pub fn new(adj: &'a AdjointFunction, model: &'a ErrorModelSpec, target: Vec<Precision>, m: &Machine<'_>) -> Self {
        let n = adj.primal.vars.len();
        Backward {
            adj,
            model,
            target,
            temps: vec![0.0; adj.temps as usize],
            d_reals: vec![0.0; n],
            d_arrays: m.arrays.iter().map(|a| vec![0.0; a.len()]).collect(),
            seed: 1.0,
            registry: ErrorRegistry::new(),
            site_entry: vec![usize::MAX; adj.temps as usize],
            param_entry: vec![usize::MAX; n],
            sensitivity: vec![0.0; n],
            marked: None,
            iteration: None,
            per_iteration: BTreeMap::new(),
            marked_trips: 0,
        }
    }

    fn adjoint_slot(&mut self, m: &Machine<'_>, p: &Place, loc: Loc) -> Result<&mut f64, RuntimeError> {
        Ok(match p {
            Place::Scalar(v) => &mut self.d_reals[v.index()],
            Place::Elem(v, i) => {
                let i = m.index(*v, i, loc)?;
                &mut self.d_arrays[v.index()][i]
            }
        })
    }

    fn record(&mut self, var: VarId, value: f64, adjoint: f64, entry: usize) {
        let s = (value * adjoint).abs();
        self.sensitivity[var.index()] += s;
        if let Some(k) = self.iteration {
            let n = self.sensitivity.len();
            self.per_iteration.entry(k).or_insert_with(|| vec![0.0; n])[var.index()] += s;
        }
        if matches!(self.model, ErrorModelSpec::Null) {
            return;
        }
        let info = self.adj.primal.var(var);
        let site = AssignSite { name: &info.name, value, adjoint, precision: self.target[var.index()] };
        let e = self.model.assign_error(&site);
        self.registry.add(entry, e);
    }

    pub fn run(&mut self, m: &mut Machine<'_>, body: &[BStmt], tape: &mut Tape) -> Result<(), RuntimeError> {
        let loc = Loc::default();
        for s in body {
            match s {
                BStmt::Snapshot { target, value, adjoint } => {
                    self.temps[value.0 as usize] = m.read(target, loc)?;
                    if let Some(a) = adjoint {
                        let slot = self.adjoint_slot(m, target, loc)?;
                        let d = std::mem::replace(slot, 0.0);
                        self.temps[a.0 as usize] = d;
                    }
                }
                BStmt::Pop(saved) => match (saved, tape.pop()) {
                    (Saved::Real(p), TapeEntry::Real(x)) => {
                        // Restores the exact old bits: no rounding on the way back.
                        match p {
                            Place::Scalar(v) => m.reals[v.index()] = x,
                            Place::Elem(v, i) => {
                                let i = m.index(*v, i, loc)?;
                                m.arrays[v.index()][i] = x;
                            }
                        }
                    }
                    (Saved::Int(v), TapeEntry::Int(i)) => m.ints[v.index()] = i,
                    (Saved::Array(v), TapeEntry::Array(old)) => {
                        self.d_arrays[v.index()] = vec![0.0; old.len()];
                        m.arrays[v.index()] = old;
                    }
                    (saved, entry) => panic!("tape mismatch: expected {saved:?}, found {entry:?}"),
                },
                BStmt::Seed { adjoint } => self.temps[adjoint.0 as usize] = self.seed,
                BStmt::Temp { tmp, value } => self.temps[tmp.0 as usize] = m.real(value, &self.temps, loc)?,
                BStmt::Accum { target, value } => {
                    let x = m.real(value, &self.temps, loc)?;
                    *self.adjoint_slot(m, target, loc)? += x;
                }
                BStmt::AssignError(a) => {
                    let value = self.temps[a.value.0 as usize];
                    let adjoint = a.adjoint.map_or(0.0, |t| self.temps[t.0 as usize]);
                    let key = a.value.0 as usize;
                    if self.site_entry[key] == usize::MAX {
                        self.site_entry[key] = self.registry.entry(&self.adj.primal.var(a.var).name, a.loc);
                    }
                    let entry = self.site_entry[key];
                    self.record(a.var, value, adjoint, entry);
                }
                BStmt::ParamError { var } => {
                    let info = self.adj.primal.var(*var);
                    if self.param_entry[var.index()] == usize::MAX {
                        self.param_entry[var.index()] = self.registry.entry(&info.name, info.loc);
                    }
                    let entry = self.param_entry[var.index()];
                    let diff = self.adj.activity.is_diff(*var);
                    if let VarKind::RealArray(_) = info.kind {
                        for i in 0..m.arrays[var.index()].len() {
                            let adjoint = if diff { self.d_arrays[var.index()][i] } else { 0.0 };
                            self.record(*var, m.arrays[var.index()][i], adjoint, entry);
                        }
                    } else {
                        let adjoint = if diff { self.d_reals[var.index()] } else { 0.0 };
                        self.record(*var, m.reals[var.index()], adjoint, entry);
                    }
                }
                BStmt::For { index, body, .. } => {
                    let TapeEntry::Loop { lo, hi, saved_index } = tape.pop() else { panic!("tape mismatch: expected loop bounds") };
                    let marked = self.marked == Some(*index);
                    let outer = self.iteration;
                    if marked {
                        self.marked_trips = self.marked_trips.max((hi - lo).max(0) as u64);
                    }
                    for i in (lo..hi).rev() {
                        m.ints[index.index()] = i;
                        if marked {
                            self.iteration = Some(i - lo);
                        }
                        self.run(m, body, tape)?;
                    }
                    self.iteration = outer;
                    m.ints[index.index()] = saved_index;
                }
                BStmt::While { body, .. } => {
                    let TapeEntry::Trips(n) = tape.pop() else { panic!("tape mismatch: expected trip count") };
                    for _ in 0..n {
                        self.run(m, body, tape)?;
                    }
                }
                BStmt::If { then_body, else_body, .. } => {
                    let TapeEntry::Branch(taken) = tape.pop() else { panic!("tape mismatch: expected branch token") };
                    if taken {
                        self.run(m, then_body, tape)?
                    } else {
                        self.run(m, else_body, tape)?
                    }
                }
                BStmt::FinalizeEE => {}
            }
        }
        Ok(())
    }
}
