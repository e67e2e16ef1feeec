//! Typed, name-resolved program representation.
//!
//! Produced by the type checker, flattened by [`crate::inline`], consumed by
//! the adjoint transform and the runtime. Every expression is split by result
//! type so that evaluation never has to dispatch on a dynamic type tag.

use std::fmt;

pub use crate::frontend::ast::{Direction, Loc, ReturnKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FnId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct StmtId(pub u32);

/// Scratch slot used by generated adjoint code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TempId(pub u32);

#[derive(Debug, Clone, PartialEq)]
pub enum VarKind {
    Real,
    Int,
    Bool,
    RealArray(IntExpr),
}

impl VarKind {
    pub fn is_real(&self) -> bool {
        matches!(self, VarKind::Real | VarKind::RealArray(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarRole {
    Param { direction: Direction, position: usize },
    Local,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarInfo {
    pub name: String,
    pub kind: VarKind,
    pub role: VarRole,
    pub loc: Loc,
}

impl VarInfo {
    pub fn is_param(&self) -> bool {
        matches!(self.role, VarRole::Param { .. })
    }

    pub fn is_output(&self) -> bool {
        matches!(self.role, VarRole::Param { direction: Direction::Inout, .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    Sin,
    Cos,
    Tan,
    Sqrt,
    Exp,
    Log,
    Pow,
    Fabs,
    Min,
    Max,
    /// Internal: `sign(x)`, 0 at 0. Appears only in generated adjoint code.
    Sign,
    /// Internal: `le(a, b)` is 1 when `a <= b`, else 0.
    Le,
}

impl Builtin {
    pub fn from_name(name: &str) -> Option<Builtin> {
        Some(match name {
            "sin" => Builtin::Sin,
            "cos" => Builtin::Cos,
            "tan" => Builtin::Tan,
            "sqrt" => Builtin::Sqrt,
            "exp" => Builtin::Exp,
            "log" => Builtin::Log,
            "pow" => Builtin::Pow,
            "fabs" | "abs" => Builtin::Fabs,
            "min" => Builtin::Min,
            "max" => Builtin::Max,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Sin => "sin",
            Builtin::Cos => "cos",
            Builtin::Tan => "tan",
            Builtin::Sqrt => "sqrt",
            Builtin::Exp => "exp",
            Builtin::Log => "log",
            Builtin::Pow => "pow",
            Builtin::Fabs => "fabs",
            Builtin::Min => "min",
            Builtin::Max => "max",
            Builtin::Sign => "sign",
            Builtin::Le => "le",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Builtin::Pow | Builtin::Min | Builtin::Max | Builtin::Le => 2,
            _ => 1,
        }
    }
}

impl Builtin {
    /// Exact (libm) evaluation. Domain checks are the caller's job.
    pub fn apply(self, args: &[f64]) -> f64 {
        let x = args[0];
        match self {
            Builtin::Sin => x.sin(),
            Builtin::Cos => x.cos(),
            Builtin::Tan => x.tan(),
            Builtin::Sqrt => x.sqrt(),
            Builtin::Exp => x.exp(),
            Builtin::Log => x.ln(),
            Builtin::Pow => x.powf(args[1]),
            Builtin::Fabs => x.abs(),
            Builtin::Min => {
                if args[1] < x {
                    args[1]
                } else {
                    x
                }
            }
            Builtin::Max => {
                if args[1] > x {
                    args[1]
                } else {
                    x
                }
            }
            Builtin::Sign => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Builtin::Le => f64::from(x <= args[1]),
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    pub fn apply<T: PartialOrd>(self, a: T, b: T) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RealExpr {
    Const(f64),
    Var(VarId),
    Elem(VarId, Box<IntExpr>),
    FromInt(Box<IntExpr>),
    Neg(Box<RealExpr>),
    Bin(ArithOp, Box<RealExpr>, Box<RealExpr>),
    Call(Builtin, Vec<RealExpr>),
    UserCall(FnId, Vec<Arg>),
    Temp(TempId),
}

#[derive(Debug, Clone, PartialEq)]
pub enum IntExpr {
    Const(i64),
    Var(VarId),
    Neg(Box<IntExpr>),
    Bin(ArithOp, Box<IntExpr>, Box<IntExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoolExpr {
    Const(bool),
    Var(VarId),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
    CmpReal(CmpOp, Box<RealExpr>, Box<RealExpr>),
    CmpInt(CmpOp, Box<IntExpr>, Box<IntExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Arg {
    Real(RealExpr),
    Int(IntExpr),
    Bool(BoolExpr),
    /// Arrays and `inout` scalars are passed by reference.
    Ref(VarId),
}

/// A writable real location.
#[derive(Debug, Clone, PartialEq)]
pub enum Place {
    Scalar(VarId),
    Elem(VarId, IntExpr),
}

impl Place {
    pub fn var(&self) -> VarId {
        match self {
            Place::Scalar(v) | Place::Elem(v, _) => *v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub id: StmtId,
    pub kind: StmtKind,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    AssignReal { target: Place, value: RealExpr },
    AssignInt { var: VarId, value: IntExpr },
    AssignBool { var: VarId, value: BoolExpr },
    /// (Re)allocates a local array, zero-filled.
    Alloc { var: VarId, len: IntExpr },
    For { index: VarId, lo: IntExpr, hi: IntExpr, body: Vec<Stmt> },
    While { cond: BoolExpr, body: Vec<Stmt> },
    If { cond: BoolExpr, then_body: Vec<Stmt>, else_body: Vec<Stmt> },
    Return(Option<RealExpr>),
    Call { func: FnId, args: Vec<Arg> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Function {
    pub name: String,
    pub vars: Vec<VarInfo>,
    pub params: Vec<VarId>,
    pub return_kind: ReturnKind,
    pub body: Vec<Stmt>,
    pub loc: Loc,
}

impl Function {
    pub fn var(&self, id: VarId) -> &VarInfo {
        &self.vars[id.index()]
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v.name == name).map(|i| VarId(i as u32))
    }

    pub fn returns_real(&self) -> bool {
        self.return_kind == ReturnKind::Real
    }

    /// Real-typed parameters, in declaration order. These are the inputs a
    /// gradient is reported for.
    pub fn real_params(&self) -> impl Iterator<Item = VarId> + '_ {
        self.params.iter().copied().filter(|p| self.var(*p).kind.is_real())
    }

    /// Visits every statement, parents before children.
    pub fn visit_stmts<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        visit_stmts(&self.body, f)
    }
}

pub fn visit_stmts<'a>(body: &'a [Stmt], f: &mut impl FnMut(&'a Stmt)) {
    for s in body {
        f(s);
        match &s.kind {
            StmtKind::For { body, .. } | StmtKind::While { body, .. } => visit_stmts(body, f),
            StmtKind::If { then_body, else_body, .. } => {
                visit_stmts(then_body, f);
                visit_stmts(else_body, f);
            }
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypedProgram {
    pub functions: Vec<Function>,
}

impl TypedProgram {
    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn function_id(&self, name: &str) -> Option<FnId> {
        self.functions.iter().position(|f| f.name == name).map(|i| FnId(i as u32))
    }

    pub fn get(&self, id: FnId) -> &Function {
        &self.functions[id.0 as usize]
    }
}

impl RealExpr {
    pub fn bin(op: ArithOp, a: RealExpr, b: RealExpr) -> RealExpr {
        RealExpr::Bin(op, Box::new(a), Box::new(b))
    }

    /// Real variables (scalar or array) whose value this expression reads.
    pub fn reads(&self, out: &mut Vec<VarId>) {
        match self {
            RealExpr::Const(_) | RealExpr::Temp(_) => {}
            RealExpr::Var(v) => out.push(*v),
            RealExpr::Elem(v, i) => {
                out.push(*v);
                i.reads(out);
            }
            RealExpr::FromInt(i) => i.reads(out),
            RealExpr::Neg(e) => e.reads(out),
            RealExpr::Bin(_, a, b) => {
                a.reads(out);
                b.reads(out);
            }
            RealExpr::Call(_, args) => args.iter().for_each(|a| a.reads(out)),
            RealExpr::UserCall(_, args) => args.iter().for_each(|a| a.reads(out)),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            RealExpr::Const(_) | RealExpr::Var(_) | RealExpr::Temp(_) => 1,
            RealExpr::Elem(_, i) | RealExpr::FromInt(i) => 1 + i.size(),
            RealExpr::Neg(e) => 1 + e.size(),
            RealExpr::Bin(_, a, b) => 1 + a.size() + b.size(),
            RealExpr::Call(_, args) => 1 + args.iter().map(|a| a.size()).sum::<usize>(),
            RealExpr::UserCall(_, args) => 1 + args.len(),
        }
    }
}

impl IntExpr {
    pub fn reads(&self, out: &mut Vec<VarId>) {
        match self {
            IntExpr::Const(_) => {}
            IntExpr::Var(v) => out.push(*v),
            IntExpr::Neg(e) => e.reads(out),
            IntExpr::Bin(_, a, b) => {
                a.reads(out);
                b.reads(out);
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            IntExpr::Const(_) | IntExpr::Var(_) => 1,
            IntExpr::Neg(e) => 1 + e.size(),
            IntExpr::Bin(_, a, b) => 1 + a.size() + b.size(),
        }
    }
}

impl BoolExpr {
    pub fn reads(&self, out: &mut Vec<VarId>) {
        match self {
            BoolExpr::Const(_) => {}
            BoolExpr::Var(v) => out.push(*v),
            BoolExpr::Not(e) => e.reads(out),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
                a.reads(out);
                b.reads(out);
            }
            BoolExpr::CmpReal(_, a, b) => {
                a.reads(out);
                b.reads(out);
            }
            BoolExpr::CmpInt(_, a, b) => {
                a.reads(out);
                b.reads(out);
            }
        }
    }
}

impl Arg {
    pub fn reads(&self, out: &mut Vec<VarId>) {
        match self {
            Arg::Real(e) => e.reads(out),
            Arg::Int(e) => e.reads(out),
            Arg::Bool(e) => e.reads(out),
            Arg::Ref(v) => out.push(*v),
        }
    }
}
