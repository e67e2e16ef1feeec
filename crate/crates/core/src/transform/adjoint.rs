//! Adjoint IR and its construction from a flattened function.

use serde::Serialize;

use super::activity::ActivitySet;
use crate::ir::*;
use crate::models::ModelId;

/// Overwritten state saved on the tape before a store.
#[derive(Debug, Clone, PartialEq)]
pub enum Saved {
    /// A real scalar or a single array element.
    Real(Place),
    Int(VarId),
    /// A whole local array, saved before it is reallocated.
    Array(VarId),
}

/// Forward-sweep instruction.
#[derive(Debug, Clone, PartialEq)]
pub enum FStmt {
    Push(Saved),
    /// An original straight-line statement, executed unchanged.
    Primal(Stmt),
    /// Runs the loop, then pushes its bounds and the final index value.
    For { id: StmtId, index: VarId, lo: IntExpr, hi: IntExpr, body: Vec<FStmt>, loc: Loc },
    /// Runs the loop, then pushes its trip count.
    While { id: StmtId, cond: BoolExpr, body: Vec<FStmt>, loc: Loc },
    /// Runs the chosen branch, then pushes which one it was.
    If { id: StmtId, cond: BoolExpr, then_body: Vec<FStmt>, else_body: Vec<FStmt>, loc: Loc },
}

/// Where an error contribution comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ErrorSite {
    Assign(StmtId),
    /// The implicit initializing assignment of a parameter.
    Param,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssignError {
    pub var: VarId,
    pub site: ErrorSite,
    pub loc: Loc,
    /// Temp holding the assigned value.
    pub value: TempId,
    /// Temp holding the adjoint of the assigned value; `None` means zero
    /// (the target is not differentiable).
    pub adjoint: Option<TempId>,
}

/// Backward-sweep instruction.
#[derive(Debug, Clone, PartialEq)]
pub enum BStmt {
    /// Copies the current value of `target` (and, if requested, its adjoint)
    /// into temps, then zeroes the adjoint of `target`.
    Snapshot { target: Place, value: TempId, adjoint: Option<TempId> },
    Pop(Saved),
    /// Loads the caller's seed for the return value.
    Seed { adjoint: TempId },
    Temp { tmp: TempId, value: RealExpr },
    /// `adjoint(target) += value`.
    Accum { target: Place, value: RealExpr },
    AssignError(AssignError),
    /// One error visit per scalar parameter, one per element for arrays.
    ParamError { var: VarId },
    For { id: StmtId, index: VarId, body: Vec<BStmt>, loc: Loc },
    While { id: StmtId, body: Vec<BStmt>, loc: Loc },
    If { id: StmtId, then_body: Vec<BStmt>, else_body: Vec<BStmt>, loc: Loc },
    FinalizeEE,
}

/// The error-estimating adjoint of a function.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointFunction {
    pub name: String,
    pub primal: Function,
    pub model: ModelId,
    pub activity: ActivitySet,
    pub forward: Vec<FStmt>,
    pub backward: Vec<BStmt>,
    pub temps: u32,
}

impl AdjointFunction {
    /// Parameters that receive an adjoint output, in declaration order.
    pub fn adjoint_outputs(&self) -> impl Iterator<Item = VarId> + '_ {
        self.primal.real_params().filter(|p| self.activity.is_diff(*p))
    }

    /// Static instruction counts, for structural checks.
    pub fn counts(&self) -> Counts {
        let mut c = Counts::default();
        fn fwd(body: &[FStmt], c: &mut Counts) {
            for s in body {
                match s {
                    FStmt::Push(_) => c.push += 1,
                    FStmt::Primal(_) => c.primal += 1,
                    FStmt::For { body, .. } | FStmt::While { body, .. } => {
                        c.control_push += 1;
                        fwd(body, c)
                    }
                    FStmt::If { then_body, else_body, .. } => {
                        c.control_push += 1;
                        fwd(then_body, c);
                        fwd(else_body, c);
                    }
                }
            }
        }
        fn bwd(body: &[BStmt], c: &mut Counts) {
            for s in body {
                match s {
                    BStmt::Pop(_) => c.pop += 1,
                    BStmt::Temp { .. } | BStmt::Accum { .. } | BStmt::Seed { .. } => c.adjoint += 1,
                    BStmt::AssignError(_) => c.assign_error += 1,
                    BStmt::ParamError { .. } => c.param_error += 1,
                    BStmt::Snapshot { .. } => {}
                    BStmt::FinalizeEE => c.finalize += 1,
                    BStmt::For { body, .. } | BStmt::While { body, .. } => {
                        c.control_pop += 1;
                        bwd(body, c)
                    }
                    BStmt::If { then_body, else_body, .. } => {
                        c.control_pop += 1;
                        bwd(then_body, c);
                        bwd(else_body, c);
                    }
                }
            }
        }
        fwd(&self.forward, &mut c);
        bwd(&self.backward, &mut c);
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub push: usize,
    pub pop: usize,
    pub control_push: usize,
    pub control_pop: usize,
    pub primal: usize,
    pub adjoint: usize,
    pub assign_error: usize,
    pub param_error: usize,
    pub finalize: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("{loc}: unsupported construct: {what}")]
    Unsupported { loc: Loc, what: String },
}

/// Builds the adjoint of `f`, which must already be flattened by
/// [`crate::inline::inline`].
pub fn transform(f: &Function, model: ModelId, activity: &ActivitySet) -> Result<AdjointFunction, TransformError> {
    let mut b = Builder { activity, temps: 0 };
    let (forward, mut backward) = b.block(&f.body)?;
    for p in f.real_params() {
        backward.push(BStmt::ParamError { var: p });
    }
    backward.push(BStmt::FinalizeEE);
    Ok(AdjointFunction {
        name: format!("{}_ee", f.name),
        primal: f.clone(),
        model,
        activity: activity.clone(),
        forward,
        backward,
        temps: b.temps,
    })
}

struct Builder<'a> {
    activity: &'a ActivitySet,
    temps: u32,
}

impl Builder<'_> {
    fn temp(&mut self) -> TempId {
        self.temps += 1;
        TempId(self.temps - 1)
    }

    /// Returns the forward block and its reversal.
    fn block(&mut self, body: &[Stmt]) -> Result<(Vec<FStmt>, Vec<BStmt>), TransformError> {
        let mut fwd = Vec::new();
        let mut chunks = Vec::new();
        for s in body {
            let mut chunk = Vec::new();
            self.stmt(s, &mut fwd, &mut chunk)?;
            chunks.push(chunk);
        }
        Ok((fwd, chunks.into_iter().rev().flatten().collect()))
    }

    fn stmt(&mut self, s: &Stmt, fwd: &mut Vec<FStmt>, bwd: &mut Vec<BStmt>) -> Result<(), TransformError> {
        match &s.kind {
            StmtKind::AssignReal { target, value } => {
                reject_calls(value, s.loc)?;
                let var = target.var();
                let live = self.activity.is_live(s.id);
                let diff = self.activity.is_diff(var);
                if live {
                    fwd.push(FStmt::Push(Saved::Real(target.clone())));
                }
                fwd.push(FStmt::Primal(s.clone()));
                let value_tmp = self.temp();
                let adj_tmp = diff.then(|| self.temp());
                bwd.push(BStmt::Snapshot { target: target.clone(), value: value_tmp, adjoint: adj_tmp });
                if live {
                    bwd.push(BStmt::Pop(Saved::Real(target.clone())));
                }
                if let Some(a) = adj_tmp {
                    self.propagate(value, RealExpr::Temp(a), bwd);
                }
                bwd.push(BStmt::AssignError(AssignError {
                    var,
                    site: ErrorSite::Assign(s.id),
                    loc: s.loc,
                    value: value_tmp,
                    adjoint: adj_tmp,
                }));
            }
            StmtKind::AssignInt { var, .. } => {
                fwd.push(FStmt::Push(Saved::Int(*var)));
                fwd.push(FStmt::Primal(s.clone()));
                bwd.push(BStmt::Pop(Saved::Int(*var)));
            }
            StmtKind::AssignBool { .. } => fwd.push(FStmt::Primal(s.clone())),
            StmtKind::Alloc { var, .. } => {
                fwd.push(FStmt::Push(Saved::Array(*var)));
                fwd.push(FStmt::Primal(s.clone()));
                bwd.push(BStmt::Pop(Saved::Array(*var)));
            }
            StmtKind::Return(value) => {
                fwd.push(FStmt::Primal(s.clone()));
                if let Some(e) = value {
                    reject_calls(e, s.loc)?;
                    let seed = self.temp();
                    bwd.push(BStmt::Seed { adjoint: seed });
                    self.propagate(e, RealExpr::Temp(seed), bwd);
                }
            }
            StmtKind::For { index, lo, hi, body } => {
                let (f, b) = self.block(body)?;
                fwd.push(FStmt::For { id: s.id, index: *index, lo: lo.clone(), hi: hi.clone(), body: f, loc: s.loc });
                bwd.push(BStmt::For { id: s.id, index: *index, body: b, loc: s.loc });
            }
            StmtKind::While { cond, body } => {
                let (f, b) = self.block(body)?;
                fwd.push(FStmt::While { id: s.id, cond: cond.clone(), body: f, loc: s.loc });
                bwd.push(BStmt::While { id: s.id, body: b, loc: s.loc });
            }
            StmtKind::If { cond, then_body, else_body } => {
                let (tf, tb) = self.block(then_body)?;
                let (ef, eb) = self.block(else_body)?;
                fwd.push(FStmt::If { id: s.id, cond: cond.clone(), then_body: tf, else_body: ef, loc: s.loc });
                bwd.push(BStmt::If { id: s.id, then_body: tb, else_body: eb, loc: s.loc });
            }
            StmtKind::Call { .. } => {
                return Err(TransformError::Unsupported {
                    loc: s.loc,
                    what: "call statement (inline the function first)".into(),
                })
            }
        }
        Ok(())
    }

    fn active(&self, e: &RealExpr) -> bool {
        let mut reads = Vec::new();
        e.reads(&mut reads);
        reads.iter().any(|v| self.activity.is_diff(*v))
    }

    /// Emits statements adding `adj * d(e)/d(leaf)` to the adjoint of every
    /// differentiable leaf of `e`.
    fn propagate(&mut self, e: &RealExpr, adj: RealExpr, out: &mut Vec<BStmt>) {
        if !self.active(e) {
            return;
        }
        match e {
            RealExpr::Var(v) => out.push(BStmt::Accum { target: Place::Scalar(*v), value: adj }),
            RealExpr::Elem(v, i) => out.push(BStmt::Accum { target: Place::Elem(*v, (**i).clone()), value: adj }),
            RealExpr::Const(_) | RealExpr::FromInt(_) | RealExpr::Temp(_) => {}
            RealExpr::Neg(a) => self.child(a, neg(adj), out),
            RealExpr::Bin(op, a, b) => {
                let (a, b) = (&**a, &**b);
                match op {
                    ArithOp::Add => {
                        self.child(a, adj.clone(), out);
                        self.child(b, adj, out);
                    }
                    ArithOp::Sub => {
                        self.child(a, adj.clone(), out);
                        self.child(b, neg(adj), out);
                    }
                    ArithOp::Mul => {
                        self.child(a, mul(adj.clone(), b.clone()), out);
                        self.child(b, mul(adj, a.clone()), out);
                    }
                    ArithOp::Div => {
                        self.child(a, div(adj.clone(), b.clone()), out);
                        // d(a/b)/db = -a / b^2
                        self.child(b, neg(div(mul(adj, a.clone()), mul(b.clone(), b.clone()))), out);
                    }
                }
            }
            RealExpr::Call(f, args) => {
                let x = args[0].clone();
                let call = |b: Builtin, args: Vec<RealExpr>| RealExpr::Call(b, args);
                match f {
                    Builtin::Sin => self.child(&args[0], mul(adj, call(Builtin::Cos, vec![x])), out),
                    Builtin::Cos => self.child(&args[0], neg(mul(adj, call(Builtin::Sin, vec![x]))), out),
                    Builtin::Tan => {
                        let c = call(Builtin::Cos, vec![x]);
                        self.child(&args[0], div(adj, mul(c.clone(), c)), out)
                    }
                    Builtin::Sqrt => {
                        let d = mul(RealExpr::Const(2.0), call(Builtin::Sqrt, vec![x]));
                        self.child(&args[0], div(adj, d), out)
                    }
                    Builtin::Exp => self.child(&args[0], mul(adj, e.clone()), out),
                    Builtin::Log => self.child(&args[0], div(adj, x), out),
                    Builtin::Pow => {
                        let y = args[1].clone();
                        let dx = mul(y.clone(), call(Builtin::Pow, vec![x.clone(), RealExpr::bin(ArithOp::Sub, y, RealExpr::Const(1.0))]));
                        self.child(&args[0], mul(adj.clone(), dx), out);
                        if self.active(&args[1]) {
                            let dy = mul(e.clone(), call(Builtin::Log, vec![x]));
                            self.child(&args[1], mul(adj, dy), out);
                        }
                    }
                    Builtin::Fabs => self.child(&args[0], mul(adj, call(Builtin::Sign, vec![x])), out),
                    Builtin::Min | Builtin::Max => {
                        let y = args[1].clone();
                        // Ties go to the first argument.
                        let first = match f {
                            Builtin::Min => call(Builtin::Le, vec![x, y]),
                            _ => call(Builtin::Le, vec![y, x]),
                        };
                        let second = RealExpr::bin(ArithOp::Sub, RealExpr::Const(1.0), first.clone());
                        self.child(&args[0], mul(adj.clone(), first), out);
                        self.child(&args[1], mul(adj, second), out);
                    }
                    Builtin::Sign | Builtin::Le => {}
                }
            }
            RealExpr::UserCall(..) => unreachable!("calls rejected before propagation"),
        }
    }

    /// Propagates into a child, binding a compound adjoint to a temp unless
    /// the child is a leaf.
    fn child(&mut self, e: &RealExpr, adj: RealExpr, out: &mut Vec<BStmt>) {
        if !self.active(e) {
            return;
        }
        match (e, &adj) {
            (RealExpr::Var(_) | RealExpr::Elem(..), _) | (_, RealExpr::Temp(_)) => self.propagate(e, adj, out),
            _ => {
                let t = self.temp();
                out.push(BStmt::Temp { tmp: t, value: adj });
                self.propagate(e, RealExpr::Temp(t), out)
            }
        }
    }
}

fn neg(a: RealExpr) -> RealExpr {
    RealExpr::Neg(Box::new(a))
}

fn mul(a: RealExpr, b: RealExpr) -> RealExpr {
    RealExpr::bin(ArithOp::Mul, a, b)
}

fn div(a: RealExpr, b: RealExpr) -> RealExpr {
    RealExpr::bin(ArithOp::Div, a, b)
}

fn reject_calls(e: &RealExpr, loc: Loc) -> Result<(), TransformError> {
    fn has_call(e: &RealExpr) -> bool {
        match e {
            RealExpr::UserCall(..) => true,
            RealExpr::Neg(a) => has_call(a),
            RealExpr::Bin(_, a, b) => has_call(a) || has_call(b),
            RealExpr::Call(_, args) => args.iter().any(has_call),
            _ => false,
        }
    }
    if has_call(e) {
        Err(TransformError::Unsupported { loc, what: "user call in expression (inline the function first)".into() })
    } else {
        Ok(())
    }
}
