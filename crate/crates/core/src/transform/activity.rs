//! Activity (`isDiff`) and liveness (`isLive`) for the adjoint transform.
//!
//! Two modes exist. The default marks every real variable differentiable and
//! every real assignment live. The analysis mode computes:
//!
//! * `diff_vars`: variables that both depend on a real parameter and feed an
//!   output (flow-insensitive, over real data dependences), plus every real
//!   parameter;
//! * `live_stmts`: real assignments whose value can reach an output
//!   (flow-sensitive live-variable analysis), plus assignments whose
//!   overwritten value must be restored for the reverse sweep. The latter is
//!   every write except a first write to a local outside any loop.

use std::collections::BTreeSet;

use crate::ir::*;

/// An output whose adjoint is seeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Seed {
    Return,
    Var(VarId),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ActivitySet {
    pub diff_vars: BTreeSet<VarId>,
    pub live_stmts: BTreeSet<StmtId>,
}

impl ActivitySet {
    pub fn is_diff(&self, v: VarId) -> bool {
        self.diff_vars.contains(&v)
    }

    pub fn is_live(&self, s: StmtId) -> bool {
        self.live_stmts.contains(&s)
    }
}

/// The outputs a function exposes: its return value and `inout` reals.
pub fn default_seeds(f: &Function) -> Vec<Seed> {
    let mut seeds = Vec::new();
    if f.returns_real() {
        seeds.push(Seed::Return);
    }
    seeds.extend(f.params.iter().filter(|p| f.var(**p).is_output() && f.var(**p).kind.is_real()).map(|p| Seed::Var(*p)));
    seeds
}

/// Everything active: all real variables differentiable, all real
/// assignments live.
pub fn all_active(f: &Function) -> ActivitySet {
    let diff_vars = (0..f.vars.len() as u32).map(VarId).filter(|v| f.var(*v).kind.is_real()).collect();
    let mut live_stmts = BTreeSet::new();
    f.visit_stmts(&mut |s| {
        if let StmtKind::AssignReal { .. } = s.kind {
            live_stmts.insert(s.id);
        }
    });
    ActivitySet { diff_vars, live_stmts }
}

pub fn analyze_activity(f: &Function, seeds: &[Seed]) -> ActivitySet {
    let is_real = |v: VarId| f.var(v).kind.is_real();
    let mut assigns: Vec<(VarId, Vec<VarId>)> = Vec::new();
    let mut return_reads = Vec::new();
    f.visit_stmts(&mut |s| match &s.kind {
        StmtKind::AssignReal { target, value } => {
            let mut reads = Vec::new();
            value.reads(&mut reads);
            reads.retain(|v| is_real(*v));
            assigns.push((target.var(), reads));
        }
        StmtKind::Return(Some(e)) => {
            e.reads(&mut return_reads);
            return_reads.retain(|v| is_real(*v));
        }
        _ => {}
    });

    let real_params: BTreeSet<VarId> = f.real_params().collect();
    let mut varied = real_params.clone();
    fixpoint(|| {
        let mut changed = false;
        for (target, reads) in &assigns {
            if !varied.contains(target) && reads.iter().any(|r| varied.contains(r)) {
                varied.insert(*target);
                changed = true;
            }
        }
        changed
    });

    let mut outputs: BTreeSet<VarId> = BTreeSet::new();
    for seed in seeds {
        match seed {
            Seed::Return => outputs.extend(return_reads.iter().copied()),
            Seed::Var(v) => {
                outputs.insert(*v);
            }
        }
    }
    let mut useful = outputs.clone();
    fixpoint(|| {
        let mut changed = false;
        for (target, reads) in &assigns {
            if useful.contains(target) {
                for r in reads {
                    changed |= useful.insert(*r);
                }
            }
        }
        changed
    });

    let mut diff_vars: BTreeSet<VarId> = varied.intersection(&useful).copied().collect();
    diff_vars.extend(real_params);

    let mut live_stmts = BTreeSet::new();
    let exit_live: BTreeSet<VarId> = seeds
        .iter()
        .filter_map(|s| match s {
            Seed::Var(v) => Some(*v),
            Seed::Return => None,
        })
        .collect();
    liveness(&f.body, exit_live, seeds.contains(&Seed::Return), &mut live_stmts);
    restore_required(f, &mut live_stmts);
    ActivitySet { diff_vars, live_stmts }
}

fn fixpoint(mut step: impl FnMut() -> bool) {
    while step() {}
}

/// Backward live-variable analysis over real variables. Returns the set live
/// before `body`, recording assignments whose target is live after them.
fn liveness(body: &[Stmt], after: BTreeSet<VarId>, return_seeded: bool, live: &mut BTreeSet<StmtId>) -> BTreeSet<VarId> {
    let mut cur = after;
    for s in body.iter().rev() {
        cur = match &s.kind {
            StmtKind::AssignReal { target, value } => {
                let v = target.var();
                if cur.contains(&v) {
                    live.insert(s.id);
                    if let Place::Scalar(_) = target {
                        cur.remove(&v);
                    }
                    let mut reads = Vec::new();
                    value.reads(&mut reads);
                    cur.extend(reads);
                }
                cur
            }
            StmtKind::Return(Some(e)) => {
                if return_seeded {
                    let mut reads = Vec::new();
                    e.reads(&mut reads);
                    cur.extend(reads);
                }
                cur
            }
            StmtKind::For { body, .. } | StmtKind::While { body, .. } => {
                let mut acc = cur.clone();
                loop {
                    let inner = liveness(body, acc.clone(), return_seeded, live);
                    let next: BTreeSet<VarId> = acc.union(&inner).copied().collect();
                    if next == acc {
                        break acc;
                    }
                    acc = next;
                }
            }
            StmtKind::If { then_body, else_body, .. } => {
                let t = liveness(then_body, cur.clone(), return_seeded, live);
                let e = liveness(else_body, cur, return_seeded, live);
                t.union(&e).copied().collect()
            }
            _ => cur,
        };
    }
    cur
}

/// Marks as live every real assignment whose overwritten value might be
/// needed while reversing: anything inside a loop, any write to a parameter,
/// any write whose right-hand side reads the target, and any write preceded in
/// program order by another access to the target.
fn restore_required(f: &Function, live: &mut BTreeSet<StmtId>) {
    let mut touched: BTreeSet<VarId> = BTreeSet::new();
    fn walk(f: &Function, body: &[Stmt], in_loop: bool, touched: &mut BTreeSet<VarId>, live: &mut BTreeSet<StmtId>) {
        for s in body {
            match &s.kind {
                StmtKind::AssignReal { target, value } => {
                    let v = target.var();
                    let mut reads = Vec::new();
                    value.reads(&mut reads);
                    let reread = reads.contains(&v);
                    if in_loop || reread || f.var(v).is_param() || touched.contains(&v) || matches!(target, Place::Elem(..)) {
                        live.insert(s.id);
                    }
                    touched.extend(reads);
                    touched.insert(v);
                }
                StmtKind::Return(Some(e)) => {
                    let mut reads = Vec::new();
                    e.reads(&mut reads);
                    touched.extend(reads);
                }
                StmtKind::AssignBool { value, .. } => {
                    let mut reads = Vec::new();
                    value.reads(&mut reads);
                    touched.extend(reads);
                }
                StmtKind::For { body, .. } => walk(f, body, true, touched, live),
                StmtKind::While { cond, body } => {
                    let mut reads = Vec::new();
                    cond.reads(&mut reads);
                    touched.extend(reads);
                    walk(f, body, true, touched, live)
                }
                StmtKind::If { cond, then_body, else_body } => {
                    let mut reads = Vec::new();
                    cond.reads(&mut reads);
                    touched.extend(reads);
                    walk(f, then_body, in_loop, touched, live);
                    walk(f, else_body, in_loop, touched, live);
                }
                _ => {}
            }
        }
    }
    walk(f, &f.body, false, &mut touched, live);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::compile;
    use crate::inline::inline;

    fn func(src: &str) -> Function {
        let p = compile(src).unwrap();
        inline(&p, FnId(p.functions.len() as u32 - 1))
    }

    fn stmt_of(f: &Function, var: &str) -> Vec<StmtId> {
        let v = f.lookup(var).unwrap();
        let mut out = Vec::new();
        f.visit_stmts(&mut |s| {
            if let StmtKind::AssignReal { target, .. } = &s.kind {
                if target.var() == v {
                    out.push(s.id);
                }
            }
        });
        out
    }

    #[test]
    fn dead_assignment_not_live_under_analysis() {
        let f = func("func f(x: real): real { var t: real; var z: real; t = x * x; z = x + 1.0; return z; }");
        let t = stmt_of(&f, "t")[0];
        assert!(!analyze_activity(&f, &default_seeds(&f)).is_live(t));
        assert!(all_active(&f).is_live(t));
    }

    #[test]
    fn loop_index_never_diff() {
        let f = func("func f(x: real): real { var i: int; var s: real; for i in 0..3 { s = s + x; } return s; }");
        let i = f.lookup("i").unwrap();
        assert!(!analyze_activity(&f, &default_seeds(&f)).is_diff(i));
        assert!(!all_active(&f).is_diff(i));
    }

    #[test]
    fn chain_is_diff() {
        let f = func("func f(x: real): real { var u: real; var v: real; u = x * 2.0; v = u + 1.0; return v; }");
        let a = analyze_activity(&f, &default_seeds(&f));
        assert!(a.is_diff(f.lookup("u").unwrap()));
        assert!(a.is_diff(f.lookup("v").unwrap()));
    }

    #[test]
    fn constant_feeding_output_is_live_not_diff() {
        let f = func("func f(x: real): real { var c: real; var z: real; c = 2.0; z = x * c; return z; }");
        let a = analyze_activity(&f, &default_seeds(&f));
        let c = f.lookup("c").unwrap();
        assert!(!a.is_diff(c));
        assert!(a.is_live(stmt_of(&f, "c")[0]));
    }

    #[test]
    fn overwritten_first_write_is_dead_but_diff() {
        let f = func("func f(x: real): real { var z: real; z = x * x; z = x + 1.0; return z; }");
        let a = analyze_activity(&f, &default_seeds(&f));
        let ids = stmt_of(&f, "z");
        assert!(!a.is_live(ids[0]));
        assert!(a.is_live(ids[1]));
        assert!(a.is_diff(f.lookup("z").unwrap()));
    }

    #[test]
    fn writes_in_loops_stay_live() {
        let f = func("func f(x: real): real { var i: int; var t: real; for i in 0..2 { t = x; } return x; }");
        let a = analyze_activity(&f, &default_seeds(&f));
        assert!(a.is_live(stmt_of(&f, "t")[0]));
    }

    #[test]
    fn params_always_diff() {
        let f = func("func f(x: real, y: real): real { return x; }");
        let a = analyze_activity(&f, &default_seeds(&f));
        assert!(a.is_diff(f.lookup("y").unwrap()));
    }
}
