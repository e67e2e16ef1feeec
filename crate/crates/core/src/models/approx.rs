//! Approximate builtins and the variable-to-function map used by the
//! approximation model.

use std::collections::BTreeMap;

use serde::Serialize;

use super::ModelError;
use crate::ir::Builtin;

/// `exp` via `2^t`: the integer part of `t` goes into the exponent bits, the
/// fractional part through a cubic. Max relative error about 1.4e-4.
pub fn fast_exp(x: f64) -> f64 {
    const C: [f64; 4] = [0.999_863_694_062_864_9, 0.696_172_114_319_615_6, 0.225_868_407_005_418_46, 0.077_823_134_943_179_19];
    let t = x * std::f64::consts::LOG2_E;
    if t.is_nan() {
        return f64::NAN;
    }
    if t >= 1024.0 {
        return f64::INFINITY;
    }
    if t < -1022.0 {
        return 0.0;
    }
    let n = t.floor();
    let f = t - n;
    let p = C[0] + f * (C[1] + f * (C[2] + f * C[3]));
    p * f64::from_bits(((n as i64 + 1023) as u64) << 52)
}

/// `log` as `e * ln 2 + q(m)` where `x = m * 2^e`, `m` in `[1, 2)`, and `q` is
/// a quadratic in `m - 1`. Max absolute error about 6.3e-3.
pub fn fast_log(x: f64) -> f64 {
    const C: [f64; 3] = [0.006_258_468_632_666_783, 0.915_744_173_630_281_8, -0.233_508_703_396_385_9];
    if x.is_nan() || x < 0.0 {
        return f64::NAN;
    }
    if x == 0.0 {
        return f64::NEG_INFINITY;
    }
    if x.is_infinite() {
        return x;
    }
    let (m, e) = frexp1(x);
    let u = m - 1.0;
    e as f64 * std::f64::consts::LN_2 + C[0] + u * (C[1] + u * C[2])
}

/// `sqrt` from the halved-exponent bit trick plus one Newton step. Max
/// relative error about 1.7e-3.
pub fn fast_sqrt(x: f64) -> f64 {
    if x.is_nan() || x < 0.0 {
        return f64::NAN;
    }
    if x == 0.0 || x.is_infinite() {
        return x;
    }
    let (m, e) = frexp1(x);
    // Work on a normal number in [1, 4) so the bit trick never sees subnormals.
    let (m, e) = if e % 2 != 0 { (m * 2.0, e - 1) } else { (m, e) };
    let y0 = f64::from_bits((m.to_bits() >> 1) + (0x3FF0_0000_0000_0000 >> 1));
    let y = 0.5 * (y0 + m / y0);
    y * 2f64.powi(e / 2)
}

/// Splits a positive finite `x` into `m * 2^e` with `m` in `[1, 2)`.
fn frexp1(x: f64) -> (f64, i32) {
    let (x, bias) = if x < f64::MIN_POSITIVE { (x * 2f64.powi(64), -64) } else { (x, 0) };
    let bits = x.to_bits();
    let e = ((bits >> 52) & 0x7ff) as i32 - 1023;
    let m = f64::from_bits((bits & 0x000f_ffff_ffff_ffff) | 0x3ff0_0000_0000_0000);
    (m, e + bias)
}

/// How mapped functions are approximated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApproxImpl {
    /// The shipped fast implementations.
    Fast,
    /// Approximation equal to the exact function; every delta is zero.
    ExactStub,
}

/// Maps variable names to the builtin each one feeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxFunctionMap {
    pub pairs: BTreeMap<String, Builtin>,
    pub implementation: ApproxImpl,
}

impl ApproxFunctionMap {
    pub fn new(pairs: impl IntoIterator<Item = (String, Builtin)>, implementation: ApproxImpl) -> Result<Self, ModelError> {
        let pairs: BTreeMap<String, Builtin> = pairs.into_iter().collect();
        for (var, f) in &pairs {
            if !has_approx(*f) {
                return Err(ModelError::Unapproximable { var: var.clone(), function: f.name().to_string() });
            }
        }
        Ok(ApproxFunctionMap { pairs, implementation })
    }

    /// Parses `v=exp,w=log` style pairs.
    pub fn parse(text: &str, implementation: ApproxImpl) -> Result<Self, ModelError> {
        let mut pairs = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (var, f) = item.split_once('=').ok_or_else(|| ModelError::Schema(format!("map entry `{item}` is not `var=function`")))?;
            pairs.push((var.trim().to_string(), lookup(f.trim())?));
        }
        Self::new(pairs, implementation)
    }

    pub fn function_for(&self, var: &str) -> Option<Builtin> {
        self.pairs.get(var).copied()
    }

    /// `f(x) - f_approx(x)` for the function mapped to `var`, or 0 if unmapped.
    pub fn delta(&self, var: &str, x: f64) -> f64 {
        match self.function_for(var) {
            Some(f) => f.apply(&[x]) - self.approx(f, x),
            None => 0.0,
        }
    }

    pub fn approx(&self, f: Builtin, x: f64) -> f64 {
        match self.implementation {
            ApproxImpl::ExactStub => f.apply(&[x]),
            ApproxImpl::Fast => match f {
                Builtin::Exp => fast_exp(x),
                Builtin::Log => fast_log(x),
                Builtin::Sqrt => fast_sqrt(x),
                other => other.apply(&[x]),
            },
        }
    }
}

pub(super) fn lookup(name: &str) -> Result<Builtin, ModelError> {
    match Builtin::from_name(name) {
        Some(f) if has_approx(f) => Ok(f),
        _ => Err(ModelError::Unapproximable { var: String::new(), function: name.to_string() }),
    }
}

fn has_approx(f: Builtin) -> bool {
    matches!(f, Builtin::Exp | Builtin::Log | Builtin::Sqrt)
}
