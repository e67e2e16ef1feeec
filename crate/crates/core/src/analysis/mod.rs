//! Sensitivity profiles, mixed-precision tuning, per-iteration profiles and
//! estimate-versus-actual validation, each over a batch of input rows.
//!
//! Variables are reported per declaration: every inlined copy `callee.N.v`
//! of a callee local is folded into `callee.v`.
//!
//! ```
//! use fpee::analysis::sensitivity;
//! use fpee::runtime::{Inputs, PrecisionSpec, Value};
//! let p = fpee::frontend::compile("func sq(x: real): real { return x * x; }").unwrap();
//! let f = fpee::inline::inline_named(&p, "sq").unwrap();
//! let row: Inputs = [("x".to_string(), Value::Real(3.0))].into();
//! let report = sensitivity(&f, &[row], &PrecisionSpec::all_double(), &Default::default()).unwrap();
//! assert_eq!(report.value("x"), Some(18.0));
//! ```

mod csv;

use serde::Serialize;

pub use self::csv::ToCsv;

use crate::ir::Function;
use crate::models::{ApproxFunctionMap, BatchStats, ErrorModelSpec, ModelId};
use crate::precision::Precision;
use crate::runtime::{
    approx_actual_error, generic_name, run_adjoint_with, shadow_actual_error, AdjointOptions, ExecutionResult, Inputs,
    PrecisionSpec, RuntimeError, Stats, Value,
};
use crate::transform::{all_active, transform, AdjointFunction, TransformError};

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("{0}")]
    Config(String),
}

impl AnalysisError {
    fn config(msg: impl Into<String>) -> Self {
        AnalysisError::Config(msg.into())
    }
}

/// A name with a value, serialized as `{"name": .., "value": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Named<T> {
    pub name: String,
    pub value: T,
}

impl<T> Named<T> {
    fn new(name: impl Into<String>, value: T) -> Self {
        Named { name: name.into(), value }
    }
}

/// The declaration a variable name belongs to.
pub fn declared_name(name: &str) -> String {
    generic_name(name).unwrap_or_else(|| name.to_string())
}

/// Real variables of `f` by declaration, in first-appearance order.
pub fn real_declarations(f: &Function) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for v in f.vars.iter().filter(|v| v.kind.is_real()) {
        let d = declared_name(&v.name);
        if !out.contains(&d) {
            out.push(d);
        }
    }
    out
}

/// Sums `(name, x)` pairs into per-declaration totals over `decls`.
fn fold(decls: &[String], pairs: impl IntoIterator<Item = (String, f64)>) -> Vec<f64> {
    let mut out = vec![0.0; decls.len()];
    for (name, x) in pairs {
        if let Some(i) = decls.iter().position(|d| *d == declared_name(&name)) {
            out[i] += x;
        }
    }
    out
}

/// `estimated / actual`, defined as infinity for `(positive, 0)` and 1 for
/// `(0, 0)`.
pub fn ratio(estimated: f64, actual: f64) -> f64 {
    if actual == 0.0 {
        if estimated == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        estimated / actual
    }
}

/// Divides every entry by the largest; an all-zero slice is returned as is.
pub fn normalize(values: &[f64]) -> Vec<f64> {
    let max = values.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        values.iter().map(|v| v / max).collect()
    } else {
        values.to_vec()
    }
}

/// Smallest `k` such that every entry of every row from `k` on is below
/// `threshold`.
pub fn cutoff(rows: &[Vec<f64>], threshold: f64) -> usize {
    let mut k = rows.len();
    while k > 0 && rows[k - 1].iter().all(|s| *s < threshold) {
        k -= 1;
    }
    k
}

/// The adjoint of `f` for `model` with every real variable active.
pub fn adjoint_for(f: &Function, model: ModelId) -> Result<AdjointFunction, AnalysisError> {
    Ok(transform(f, model, &all_active(f))?)
}

fn run_all(
    adj: &AdjointFunction,
    rows: &[Inputs],
    model: &ErrorModelSpec,
    opts: &AdjointOptions,
) -> Result<Vec<ExecutionResult>, AnalysisError> {
    if rows.is_empty() {
        return Err(AnalysisError::config("no input rows"));
    }
    rows.iter().map(|r| run_adjoint_with(adj, r, model, opts).map_err(Into::into)).collect()
}

// ---------------------------------------------------------------- analyze

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeRow {
    pub index: usize,
    pub ret: Option<f64>,
    pub outputs: Vec<Named<Value>>,
    pub gradients: Vec<Named<Value>>,
    /// Error contribution per declared variable.
    pub errors: Vec<Named<f64>>,
    pub total_error: f64,
    pub valid: bool,
    pub stats: Stats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeReport {
    pub model: String,
    pub precision_spec: String,
    pub rows: Vec<AnalyzeRow>,
    pub total_error: BatchStats,
}

/// Runs the error-estimating adjoint on every row.
pub fn analyze(f: &Function, rows: &[Inputs], spec: &PrecisionSpec, model: &ErrorModelSpec) -> Result<AnalyzeReport, AnalysisError> {
    let adj = adjoint_for(f, model.id())?;
    let results = run_all(&adj, rows, model, &AdjointOptions { exec: spec.clone(), ..Default::default() })?;
    let decls = real_declarations(f);
    let rows: Vec<AnalyzeRow> = results
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            let errors = fold(&decls, r.registry.per_variable());
            AnalyzeRow {
                index,
                ret: r.ret,
                outputs: r.outputs.into_iter().map(|(n, v)| Named::new(n, v)).collect(),
                gradients: r.gradients.into_iter().map(|(n, v)| Named::new(n, v)).collect(),
                errors: decls.iter().zip(errors).map(|(n, e)| Named::new(n.clone(), e)).collect(),
                total_error: r.total_error,
                valid: !r.stats.non_finite,
                stats: r.stats,
            }
        })
        .collect();
    let totals: Vec<f64> = rows.iter().map(|r| r.total_error).collect();
    Ok(AnalyzeReport {
        model: model.id().to_string(),
        precision_spec: spec.to_string(),
        total_error: BatchStats::of(&totals),
        rows,
    })
}

// ------------------------------------------------------------ sensitivity

#[derive(Debug, Clone, Default)]
pub struct SensitivityOptions {
    /// Index variable of the loop to profile per iteration.
    pub per_iteration: Option<String>,
    /// Variables kept in the per-iteration matrix; empty keeps all.
    pub tracked: Vec<String>,
    /// Cutoff threshold for the per-iteration profile.
    pub threshold: Option<f64>,
    pub normalize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariableSensitivity {
    pub name: String,
    /// Accumulated over all input rows.
    pub value: f64,
    pub normalized: Option<f64>,
    pub stats: BatchStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationCutoff {
    pub threshold: f64,
    pub cutoff: usize,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationProfile {
    pub loop_var: String,
    pub variables: Vec<String>,
    /// `rows[k][j]`: sensitivity of `variables[j]` in iteration `k`,
    /// averaged over input rows.
    pub rows: Vec<Vec<f64>>,
    /// Each row divided by its own maximum.
    pub normalized: Option<Vec<Vec<f64>>>,
    pub cutoff: Option<IterationCutoff>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityReport {
    pub inputs: usize,
    pub per_variable: Vec<VariableSensitivity>,
    pub per_iteration: Option<IterationProfile>,
    pub valid: bool,
}

impl SensitivityReport {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.per_variable.iter().find(|v| v.name == name).map(|v| v.value)
    }
}

/// `S_v = sum |v * adjoint(v)|` over every assignment to `v` (and its
/// parameter binding), per declared variable.
pub fn sensitivity(f: &Function, rows: &[Inputs], spec: &PrecisionSpec, opts: &SensitivityOptions) -> Result<SensitivityReport, AnalysisError> {
    let adj = adjoint_for(f, ModelId::Null)?;
    let ropts = AdjointOptions { exec: spec.clone(), per_iteration: opts.per_iteration.clone(), ..Default::default() };
    let results = run_all(&adj, rows, &ErrorModelSpec::Null, &ropts)?;
    let decls = real_declarations(f);
    let per_row: Vec<Vec<f64>> = results.iter().map(|r| fold(&decls, r.sensitivity.iter().cloned())).collect();
    let totals: Vec<f64> = (0..decls.len()).map(|j| per_row.iter().map(|row| row[j]).sum()).collect();
    let normalized = opts.normalize.then(|| normalize(&totals));
    let per_variable = decls
        .iter()
        .enumerate()
        .map(|(j, name)| VariableSensitivity {
            name: name.clone(),
            value: totals[j],
            normalized: normalized.as_ref().map(|n| n[j]),
            stats: BatchStats::of(&per_row.iter().map(|row| row[j]).collect::<Vec<_>>()),
        })
        .collect();
    let per_iteration = match &opts.per_iteration {
        None => None,
        Some(loop_var) => Some(profile(&decls, loop_var, &results, opts)?),
    };
    Ok(SensitivityReport {
        inputs: rows.len(),
        per_variable,
        per_iteration,
        valid: results.iter().all(|r| !r.stats.non_finite),
    })
}

fn profile(decls: &[String], loop_var: &str, results: &[ExecutionResult], opts: &SensitivityOptions) -> Result<IterationProfile, AnalysisError> {
    let variables: Vec<String> = if opts.tracked.is_empty() { decls.to_vec() } else { opts.tracked.clone() };
    if let Some(bad) = variables.iter().find(|v| !decls.contains(v)) {
        return Err(AnalysisError::config(format!("tracked variable `{bad}` is not a real variable")));
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for r in results {
        let m = r.per_iteration.as_ref().expect("profiling was requested");
        for (k, row) in m.rows.iter().enumerate() {
            let folded = fold(&variables, m.variables.iter().cloned().zip(row.iter().copied()));
            if rows.len() <= k {
                rows.push(vec![0.0; variables.len()]);
            }
            for (acc, x) in rows[k].iter_mut().zip(folded) {
                *acc += x;
            }
        }
    }
    let n = results.len() as f64;
    rows.iter_mut().flatten().for_each(|x| *x /= n);
    let normalized = opts.normalize.then(|| rows.iter().map(|r| normalize(r)).collect());
    let cutoff = opts.threshold.map(|threshold| IterationCutoff { threshold, cutoff: cutoff(&rows, threshold), n: rows.len() });
    Ok(IterationProfile { loop_var: loop_var.to_string(), variables, rows, normalized, cutoff })
}

/// Per-iteration profile of `loop_var` restricted to `tracked`, with its
/// cutoff for `threshold`.
pub fn iteration_profile(
    f: &Function,
    rows: &[Inputs],
    loop_var: &str,
    tracked: &[&str],
    threshold: f64,
) -> Result<IterationProfile, AnalysisError> {
    let opts = SensitivityOptions {
        per_iteration: Some(loop_var.to_string()),
        tracked: tracked.iter().map(|s| s.to_string()).collect(),
        threshold: Some(threshold),
        normalize: false,
    };
    let report = sensitivity(f, rows, &PrecisionSpec::all_double(), &opts)?;
    Ok(report.per_iteration.expect("profiling was requested"))
}

// ----------------------------------------------------------------- tune

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub name: String,
    /// Accumulated over input rows; the ranking key.
    pub sensitivity: f64,
    /// Largest per-row error contribution when demoted.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuningResult {
    pub threshold: f64,
    pub model: String,
    pub precision: Precision,
    /// Every real variable in ascending sensitivity order.
    pub candidates: Vec<Candidate>,
    pub demoted: Vec<String>,
    pub estimated_error: f64,
    pub actual_error: f64,
    pub accepted: bool,
    pub precision_spec: String,
}

/// Declarations, per-row contributions in declaration order, and the raw runs.
type Contributions = (Vec<String>, Vec<Vec<f64>>, Vec<ExecutionResult>);

/// Per-row, per-declaration error contributions with every real variable
/// analyzed for demotion to `to`. Executes in double precision.
fn contributions(f: &Function, rows: &[Inputs], model: &ErrorModelSpec, target: &PrecisionSpec) -> Result<Contributions, AnalysisError> {
    let adj = adjoint_for(f, model.id())?;
    let opts = AdjointOptions { target: Some(target.clone()), ..Default::default() };
    let results = run_all(&adj, rows, model, &opts)?;
    let decls = real_declarations(f);
    let per_row = results.iter().map(|r| fold(&decls, r.registry.per_variable())).collect();
    Ok((decls, per_row, results))
}

/// Worst row of the summed contributions of `set`.
fn estimate(per_row: &[Vec<f64>], set: &[usize]) -> f64 {
    per_row.iter().map(|row| set.iter().map(|j| row[*j]).sum::<f64>()).fold(0.0, f64::max)
}

fn worst_actual(f: &Function, rows: &[Inputs], spec: &PrecisionSpec) -> Result<f64, AnalysisError> {
    let mut worst: f64 = 0.0;
    for r in rows {
        let a = shadow_actual_error(f, r, spec)?;
        worst = if a.is_nan() || worst.is_nan() { f64::NAN } else { worst.max(a) };
    }
    Ok(worst)
}

fn check_model(model: &ErrorModelSpec, to: Precision) -> Result<(), AnalysisError> {
    match model {
        ErrorModelSpec::ShadowCast if to != Precision::Single => Err(AnalysisError::config("the shadow-cast model only estimates demotion to single")),
        ErrorModelSpec::Approx(_) | ErrorModelSpec::Null => Err(AnalysisError::config(format!("model {} does not estimate rounding error", model.id()))),
        _ => Ok(()),
    }
}

/// Greedy demotion: rank real variables by ascending accumulated
/// sensitivity (ties in declaration order) and demote them one at a time,
/// stopping before the estimate exceeds `threshold`. The estimate of a set
/// is the largest, over input rows, of its summed contributions.
pub fn tune(f: &Function, rows: &[Inputs], threshold: f64, model: &ErrorModelSpec, to: Precision) -> Result<TuningResult, AnalysisError> {
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(AnalysisError::config("the threshold must be positive"));
    }
    check_model(model, to)?;
    let target = PrecisionSpec { default_precision: to, overrides: Default::default() };
    let (decls, per_row, results) = contributions(f, rows, model, &target)?;
    let sens: Vec<f64> = fold_sensitivity(&decls, &results);
    let mut order: Vec<usize> = (0..decls.len()).collect();
    // Stable sort keeps declaration order among ties.
    order.sort_by(|a, b| sens[*a].total_cmp(&sens[*b]));
    let mut chosen: Vec<usize> = Vec::new();
    for j in &order {
        let mut next = chosen.clone();
        next.push(*j);
        if estimate(&per_row, &next) > threshold {
            break;
        }
        chosen = next;
    }
    let demoted: Vec<String> = chosen.iter().map(|j| decls[*j].clone()).collect();
    let spec = PrecisionSpec::demote(demoted.iter().map(String::as_str), to);
    let estimated_error = estimate(&per_row, &chosen);
    let actual_error = worst_actual(f, rows, &spec)?;
    Ok(TuningResult {
        threshold,
        model: model.id().to_string(),
        precision: to,
        candidates: order
            .iter()
            .map(|j| Candidate { name: decls[*j].clone(), sensitivity: sens[*j], error: per_row.iter().map(|r| r[*j]).fold(0.0, f64::max) })
            .collect(),
        demoted,
        estimated_error,
        actual_error,
        accepted: estimated_error <= threshold,
        precision_spec: spec.to_string(),
    })
}

fn fold_sensitivity(decls: &[String], results: &[ExecutionResult]) -> Vec<f64> {
    let mut total = vec![0.0; decls.len()];
    for r in results {
        for (acc, s) in total.iter_mut().zip(fold(decls, r.sensitivity.iter().cloned())) {
            *acc += s;
        }
    }
    total
}

/// Estimated error of demoting exactly `set` (declared names), using the
/// same per-row maximum as [`tune`].
pub fn estimated_error(f: &Function, rows: &[Inputs], set: &[&str], model: &ErrorModelSpec, to: Precision) -> Result<f64, AnalysisError> {
    check_model(model, to)?;
    let target = PrecisionSpec { default_precision: to, overrides: Default::default() };
    let (decls, per_row, _) = contributions(f, rows, model, &target)?;
    let idx = set
        .iter()
        .map(|n| decls.iter().position(|d| d == n).ok_or_else(|| AnalysisError::config(format!("`{n}` is not a real variable"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(estimate(&per_row, &idx))
}

// -------------------------------------------------------------- validate

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRow {
    pub index: usize,
    pub estimated: f64,
    pub actual: f64,
    pub ratio: f64,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub model: String,
    pub precision_spec: String,
    pub demoted: Vec<String>,
    pub rows: Vec<ValidationRow>,
    pub estimated: BatchStats,
    pub actual: BatchStats,
    /// Ratio of the accumulated estimate to the accumulated actual error.
    pub ratio: f64,
}

/// Declared real variables that `spec` stores below double precision.
pub fn demoted_variables(f: &Function, spec: &PrecisionSpec) -> Result<Vec<String>, AnalysisError> {
    let precs = spec.resolve(f)?;
    let mut out: Vec<String> = Vec::new();
    for (v, p) in f.vars.iter().zip(precs) {
        let d = declared_name(&v.name);
        if v.kind.is_real() && p != Precision::Double && !out.contains(&d) {
            out.push(d);
        }
    }
    Ok(out)
}

/// Per row: the estimate restricted to the variables `spec` demotes, and
/// the measured difference between the demoted and all-double runs.
pub fn validate(f: &Function, rows: &[Inputs], spec: &PrecisionSpec, model: &ErrorModelSpec) -> Result<ValidationReport, AnalysisError> {
    let demoted = demoted_variables(f, spec)?;
    if let ErrorModelSpec::ShadowCast = model {
        let precs = spec.resolve(f)?;
        if precs.contains(&Precision::Half) {
            return Err(AnalysisError::config("the shadow-cast model only estimates demotion to single"));
        }
    }
    check_model(model, Precision::Single)?;
    let (decls, per_row, results) = contributions(f, rows, model, spec)?;
    let idx: Vec<usize> = demoted.iter().map(|d| decls.iter().position(|x| x == d).expect("declared")).collect();
    let mut out = Vec::with_capacity(rows.len());
    for (index, (row, r)) in rows.iter().zip(&results).enumerate() {
        let estimated: f64 = idx.iter().map(|j| per_row[index][*j]).sum();
        let actual = shadow_actual_error(f, row, spec)?;
        out.push(ValidationRow {
            index,
            estimated,
            actual,
            ratio: ratio(estimated, actual),
            valid: !r.stats.non_finite && actual.is_finite(),
        });
    }
    let est: Vec<f64> = out.iter().map(|r| r.estimated).collect();
    let act: Vec<f64> = out.iter().map(|r| r.actual).collect();
    let (estimated, actual) = (BatchStats::of(&est), BatchStats::of(&act));
    Ok(ValidationReport {
        model: model.id().to_string(),
        precision_spec: spec.to_string(),
        demoted,
        rows: out,
        ratio: ratio(estimated.accumulated, actual.accumulated),
        estimated,
        actual,
    })
}

// ---------------------------------------------------------------- approx

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxReport {
    pub map: Vec<Named<String>>,
    pub rows: Vec<ValidationRow>,
    pub estimated: BatchStats,
    pub actual: BatchStats,
    /// Estimated contribution per mapped variable, accumulated over rows.
    pub per_variable: Vec<Named<f64>>,
}

/// Estimates the error of swapping each mapped call site for its fast
/// approximation, and measures it by running both versions.
pub fn approx(f: &Function, rows: &[Inputs], map: &ApproxFunctionMap) -> Result<ApproxReport, AnalysisError> {
    let decls = real_declarations(f);
    if let Some(bad) = map.pairs.keys().find(|k| !decls.contains(k)) {
        return Err(AnalysisError::config(format!("mapped variable `{bad}` is not a real variable")));
    }
    let model = ErrorModelSpec::Approx(map.clone());
    let adj = adjoint_for(f, ModelId::Approx)?;
    let results = run_all(&adj, rows, &model, &AdjointOptions::default())?;
    let mut out = Vec::with_capacity(rows.len());
    let mut per_variable = vec![0.0; decls.len()];
    for (index, (row, r)) in rows.iter().zip(&results).enumerate() {
        for (acc, e) in per_variable.iter_mut().zip(fold(&decls, r.registry.per_variable())) {
            *acc += e;
        }
        let actual = approx_actual_error(f, row, map)?;
        out.push(ValidationRow {
            index,
            estimated: r.total_error,
            actual,
            ratio: ratio(r.total_error, actual),
            valid: !r.stats.non_finite && actual.is_finite(),
        });
    }
    let est: Vec<f64> = out.iter().map(|r| r.estimated).collect();
    let act: Vec<f64> = out.iter().map(|r| r.actual).collect();
    Ok(ApproxReport {
        map: map.pairs.iter().map(|(k, v)| Named::new(k.clone(), v.name().to_string())).collect(),
        rows: out,
        estimated: BatchStats::of(&est),
        actual: BatchStats::of(&act),
        per_variable: decls
            .iter()
            .zip(per_variable)
            .filter(|(d, _)| map.pairs.contains_key(*d))
            .map(|(d, e)| Named::new(d.clone(), e))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::compile;
    use crate::inline::inline_named;

    fn func(src: &str, name: &str) -> Function {
        inline_named(&compile(src).unwrap(), name).unwrap()
    }

    fn row(pairs: &[(&str, f64)]) -> Inputs {
        pairs.iter().map(|(k, v)| (k.to_string(), Value::Real(*v))).collect()
    }

    #[test]
    fn sum_has_unit_adjoints() {
        let f = func("func g(x: real, y: real): real { return x + y; }", "g");
        let r = sensitivity(&f, &[row(&[("x", -2.5), ("y", 4.0)])], &PrecisionSpec::all_double(), &Default::default()).unwrap();
        assert_eq!(r.value("x"), Some(2.5));
        assert_eq!(r.value("y"), Some(4.0));
    }

    #[test]
    fn zero_input_has_zero_sensitivity() {
        let f = func("func sq(x: real): real { return x * x; }", "sq");
        let r = sensitivity(&f, &[row(&[("x", 0.0)])], &PrecisionSpec::all_double(), &Default::default()).unwrap();
        assert_eq!(r.value("x"), Some(0.0));
    }

    #[test]
    fn cutoff_edges() {
        assert_eq!(cutoff(&[vec![1.0], vec![1.0]], 0.5), 2);
        assert_eq!(cutoff(&[vec![0.0], vec![0.0]], 0.5), 0);
        assert_eq!(cutoff(&[vec![1.0], vec![0.1], vec![0.7], vec![0.1]], 0.5), 3);
    }

    #[test]
    fn ratio_conventions() {
        assert_eq!(ratio(0.0, 0.0), 1.0);
        assert_eq!(ratio(1.0, 0.0), f64::INFINITY);
        assert_eq!(ratio(3.0, 1.5), 2.0);
    }

    #[test]
    fn validate_all_double_is_trivial() {
        let f = func("func g(x: real, y: real): real { var z: real; z = x * y; return z; }", "g");
        let v = validate(&f, &[row(&[("x", 0.1), ("y", 0.3)])], &PrecisionSpec::all_double(), &ErrorModelSpec::ShadowCast).unwrap();
        assert_eq!((v.rows[0].estimated, v.rows[0].actual, v.rows[0].ratio), (0.0, 0.0, 1.0));
    }

    #[test]
    fn tune_extremes() {
        let f = func("func g(x: real, y: real): real { var z: real; z = x * y + 0.1; return z; }", "g");
        let rows = [row(&[("x", 0.1), ("y", 0.3)])];
        let all = tune(&f, &rows, 1e9, &ErrorModelSpec::Taylor, Precision::Single).unwrap();
        assert_eq!(all.demoted, ["x", "y", "z"]);
        assert!(all.accepted);
        let none = tune(&f, &rows, 1e-300, &ErrorModelSpec::Taylor, Precision::Single).unwrap();
        assert!(none.demoted.is_empty());
        assert_eq!(none.actual_error, 0.0);
    }

    #[test]
    fn inlined_copies_fold_into_declaration() {
        let src = "func h(u: real): real { var w: real; w = u * 2.0; return w; }\n\
                   func g(x: real): real { var y: real; y = h(x) + h(x); return y; }";
        let f = func(src, "g");
        assert_eq!(real_declarations(&f), ["x", "y", "h.ret", "h.u", "h.w"]);
        let r = sensitivity(&f, &[row(&[("x", 1.0)])], &PrecisionSpec::all_double(), &Default::default()).unwrap();
        assert_eq!(r.value("h.w"), Some(4.0));
    }
}
