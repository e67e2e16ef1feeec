//! Execution of original and adjoint functions under a per-variable
//! precision assignment.
//!
//! ```
//! use fpee::runtime::{run_primal, Inputs, PrecisionSpec, Value};
//! let p = fpee::frontend::compile("func f(x: real, y: real): real { var z: real; z = x + y; return z; }").unwrap();
//! let f = fpee::inline::inline_named(&p, "f").unwrap();
//! let inputs: Inputs = [("x".into(), Value::Real(1.95e-5)), ("y".into(), Value::Real(1.37e-7))].into();
//! let out = run_primal(&f, &inputs, &PrecisionSpec::all_double()).unwrap();
//! assert_eq!(out.ret, Some(1.9637e-5));
//! ```

mod inputs;
mod machine;
mod spec;
mod tape;

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

pub use inputs::{parse_value, read_csv, Dist, Inputs, SampleSpec, Value};
pub use machine::Flags;
pub use spec::{generic_name, PrecisionSpec};
pub use tape::{Tape, TapeEntry};

use crate::ir::*;
use crate::models::{ApproxFunctionMap, ErrorModelSpec, ErrorRegistry};
use crate::transform::AdjointFunction;
use machine::{Backward, Machine};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RuntimeError {
    /// A fault raised by the executing program.
    #[error("runtime fault at {loc}: {message}")]
    Fault { loc: Loc, message: String },
    /// Bad or missing input data.
    #[error("input error: {0}")]
    Input(String),
    /// An inconsistent configuration, detected before execution.
    #[error("configuration error: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimalResult {
    pub ret: Option<f64>,
    /// Final values of `inout` parameters.
    pub outputs: BTreeMap<String, Value>,
    pub non_finite: bool,
    pub overflow: bool,
    pub statements: u64,
}

impl PrimalResult {
    /// Every scalar output: the return value, then each `inout` in name
    /// order, arrays flattened.
    pub fn scalars(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.ret.into_iter().collect();
        for v in self.outputs.values() {
            match v {
                Value::Real(x) => out.push(*x),
                Value::Array(xs) => out.extend(xs),
                _ => {}
            }
        }
        out
    }
}

pub fn run_primal(f: &Function, inputs: &Inputs, spec: &PrecisionSpec) -> Result<PrimalResult, RuntimeError> {
    run_primal_with(f, inputs, spec, None)
}

/// Like [`run_primal`]; `approx` swaps mapped call sites `g(v)` for the
/// approximate implementation of `g`.
pub fn run_primal_with(
    f: &Function,
    inputs: &Inputs,
    spec: &PrecisionSpec,
    approx: Option<&ApproxFunctionMap>,
) -> Result<PrimalResult, RuntimeError> {
    let mut m = Machine::new(f, spec.resolve(f)?, approx);
    m.bind(inputs)?;
    m.run(&f.body)?;
    Ok(PrimalResult {
        ret: m.result,
        outputs: outputs(f, &m),
        non_finite: m.flags.non_finite,
        overflow: m.flags.overflow,
        statements: m.statements,
    })
}

fn outputs(f: &Function, m: &Machine<'_>) -> BTreeMap<String, Value> {
    f.params
        .iter()
        .filter(|p| f.var(**p).is_output())
        .map(|p| {
            let info = f.var(*p);
            let v = match info.kind {
                VarKind::RealArray(_) => Value::Array(m.arrays[p.index()].clone()),
                _ => Value::Real(m.reals[p.index()]),
            };
            (info.name.clone(), v)
        })
        .collect()
}

/// Settings for an adjoint execution.
#[derive(Debug, Clone, Default)]
pub struct AdjointOptions {
    /// Storage precisions used while executing.
    pub exec: PrecisionSpec,
    /// Precisions the error model estimates for; defaults to `exec`.
    pub target: Option<PrecisionSpec>,
    /// Seed for the return value's adjoint; `None` means 1.
    pub seed: Option<f64>,
    /// Seeds for `inout` outputs. Unlisted outputs get 0 when the function
    /// returns a value, 1 per element otherwise.
    pub output_seeds: Inputs,
    /// Index variable of the loop to profile per iteration.
    pub per_iteration: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stats {
    pub statements: u64,
    pub push_count: u64,
    pub pop_count: u64,
    pub tape_peak: usize,
    pub tape_empty: bool,
    /// Not serialized, so reports stay byte-stable across runs.
    #[serde(skip)]
    pub wall_time_secs: f64,
    pub non_finite: bool,
    pub overflow: bool,
}

/// Sensitivity per variable and iteration of a profiled loop.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationMatrix {
    pub loop_var: String,
    pub variables: Vec<String>,
    /// `rows[k][j]`: sensitivity of `variables[j]` accumulated in iteration `k`.
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExecutionResult {
    pub ret: Option<f64>,
    pub outputs: BTreeMap<String, Value>,
    /// Adjoint of each differentiable parameter, in declaration order.
    pub gradients: Vec<(String, Value)>,
    pub registry: ErrorRegistry,
    pub total_error: f64,
    /// `sum |value * adjoint|` over every error visit, per real variable in
    /// declaration order.
    pub sensitivity: Vec<(String, f64)>,
    pub per_iteration: Option<IterationMatrix>,
    pub stats: Stats,
}

impl ExecutionResult {
    pub fn gradient(&self, name: &str) -> Option<&Value> {
        self.gradients.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn sensitivity_of(&self, name: &str) -> Option<f64> {
        self.sensitivity.iter().find(|(n, _)| n == name).map(|(_, s)| *s)
    }
}

pub fn run_adjoint(
    adj: &AdjointFunction,
    inputs: &Inputs,
    spec: &PrecisionSpec,
    model: &ErrorModelSpec,
) -> Result<ExecutionResult, RuntimeError> {
    run_adjoint_with(adj, inputs, model, &AdjointOptions { exec: spec.clone(), ..Default::default() })
}

pub fn run_adjoint_with(
    adj: &AdjointFunction,
    inputs: &Inputs,
    model: &ErrorModelSpec,
    opts: &AdjointOptions,
) -> Result<ExecutionResult, RuntimeError> {
    if model.id() != adj.model {
        return Err(RuntimeError::Config(format!("adjoint was generated for model {}, not {}", adj.model, model.id())));
    }
    let f = &adj.primal;
    if matches!(model, ErrorModelSpec::ShadowCast) && !opts.exec.is_all_double() {
        return Err(RuntimeError::Config("the shadow-cast model needs every analyzed variable executed in double precision".into()));
    }
    let marked = match &opts.per_iteration {
        None => None,
        Some(name) => Some(loop_index(f, name).ok_or_else(|| RuntimeError::Config(format!("no `for` loop over `{name}` to profile")))?),
    };
    let exec = opts.exec.resolve(f)?;
    let target = match &opts.target {
        Some(t) => t.resolve(f)?,
        None => exec.clone(),
    };
    let start = Instant::now();
    let mut m = Machine::new(f, exec, None);
    m.bind(inputs)?;
    let mut tape = Tape::default();
    m.forward(&adj.forward, &mut tape)?;
    let ret = m.result;
    let outs = outputs(f, &m);

    m.enter_backward();
    let mut b = Backward::new(adj, model, target, &m);
    b.seed = opts.seed.unwrap_or(1.0);
    b.marked = marked;
    seed_outputs(f, opts, &m, &mut b)?;
    b.run(&mut m, &adj.backward, &mut tape)?;
    let total_error = model.finalize(&b.registry);

    let gradients: Vec<(String, Value)> = adj
        .adjoint_outputs()
        .map(|p| {
            let v = match f.var(p).kind {
                VarKind::RealArray(_) => Value::Array(b.d_arrays[p.index()].clone()),
                _ => Value::Real(b.d_reals[p.index()]),
            };
            (f.var(p).name.clone(), v)
        })
        .collect();
    let gradients_finite = gradients.iter().all(|(_, v)| match v {
        Value::Real(x) => x.is_finite(),
        Value::Array(xs) => xs.iter().all(|x| x.is_finite()),
        _ => true,
    });
    let real_vars: Vec<VarId> = (0..f.vars.len() as u32).map(VarId).filter(|v| f.var(*v).kind.is_real()).collect();
    let sensitivity = real_vars.iter().map(|v| (f.var(*v).name.clone(), b.sensitivity[v.index()])).collect();
    let per_iteration = marked.map(|v| IterationMatrix {
        loop_var: f.var(v).name.clone(),
        variables: real_vars.iter().map(|v| f.var(*v).name.clone()).collect(),
        rows: (0..b.marked_trips as i64)
            .map(|k| match b.per_iteration.get(&k) {
                Some(row) => real_vars.iter().map(|v| row[v.index()]).collect(),
                None => vec![0.0; real_vars.len()],
            })
            .collect(),
    });
    let sens_finite = b.sensitivity.iter().all(|s| s.is_finite());
    let stats = Stats {
        statements: m.statements,
        push_count: tape.push_count,
        pop_count: tape.pop_count,
        tape_peak: tape.peak_depth,
        tape_empty: tape.is_empty(),
        wall_time_secs: start.elapsed().as_secs_f64(),
        non_finite: m.flags.non_finite || !total_error.is_finite() || !gradients_finite || !sens_finite,
        overflow: m.flags.overflow,
    };
    Ok(ExecutionResult {
        ret,
        outputs: outs,
        gradients,
        registry: b.registry,
        total_error,
        sensitivity,
        per_iteration,
        stats,
    })
}

fn loop_index(f: &Function, name: &str) -> Option<VarId> {
    let v = f.lookup(name)?;
    let mut found = false;
    f.visit_stmts(&mut |s| {
        if let StmtKind::For { index, .. } = &s.kind {
            found |= *index == v;
        }
    });
    found.then_some(v)
}

fn seed_outputs(f: &Function, opts: &AdjointOptions, m: &Machine<'_>, b: &mut Backward<'_>) -> Result<(), RuntimeError> {
    let default = if f.returns_real() { 0.0 } else { 1.0 };
    for name in opts.output_seeds.keys() {
        if !f.params.iter().any(|p| f.var(*p).is_output() && f.var(*p).name == *name) {
            return Err(RuntimeError::Input(format!("seed given for `{name}`, which is not an inout parameter")));
        }
    }
    for p in f.params.iter().filter(|p| f.var(**p).is_output()) {
        let info = f.var(*p);
        let given = opts.output_seeds.get(&info.name);
        match (&info.kind, given) {
            (VarKind::RealArray(_), Some(Value::Array(xs))) => {
                if xs.len() != m.arrays[p.index()].len() {
                    return Err(RuntimeError::Input(format!("seed for `{}` has the wrong length", info.name)));
                }
                b.d_arrays[p.index()] = xs.clone();
            }
            (VarKind::RealArray(_), None) => b.d_arrays[p.index()] = vec![default; m.arrays[p.index()].len()],
            (VarKind::Real, Some(v)) => {
                b.d_reals[p.index()] = v.as_real().ok_or_else(|| RuntimeError::Input(format!("seed for `{}` must be a real", info.name)))?
            }
            (VarKind::Real, None) => b.d_reals[p.index()] = default,
            _ => return Err(RuntimeError::Input(format!("seed for `{}` has the wrong kind", info.name))),
        }
    }
    Ok(())
}

/// `|double run - spec run|`, maximised over scalar outputs.
pub fn shadow_actual_error(f: &Function, inputs: &Inputs, spec: &PrecisionSpec) -> Result<f64, RuntimeError> {
    let reference = run_primal(f, inputs, &PrecisionSpec::all_double())?;
    let demoted = run_primal(f, inputs, spec)?;
    Ok(max_abs_diff(&reference, &demoted))
}

/// `|exact run - run with mapped calls approximated|`, maximised over
/// scalar outputs.
pub fn approx_actual_error(f: &Function, inputs: &Inputs, map: &ApproxFunctionMap) -> Result<f64, RuntimeError> {
    let spec = PrecisionSpec::all_double();
    let exact = run_primal(f, inputs, &spec)?;
    let approx = run_primal_with(f, inputs, &spec, Some(map))?;
    Ok(max_abs_diff(&exact, &approx))
}

fn max_abs_diff(a: &PrimalResult, b: &PrimalResult) -> f64 {
    // NaN is sticky here, unlike `f64::max`.
    a.scalars().iter().zip(b.scalars()).map(|(x, y)| (x - y).abs()).fold(0.0, |acc, d| if acc.is_nan() || d.is_nan() { f64::NAN } else { acc.max(d) })
}
