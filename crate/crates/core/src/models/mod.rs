//! Error models: what each `AssignError` contributes, and how the total is
//! formed.
//!
//! ```
//! use fpee::models::{taylor_assign_error, shadow_cast_assign_error};
//! use fpee::precision::Precision;
//! assert_eq!(taylor_assign_error(1.0, 1.0, Precision::Double), 2f64.powi(-53));
//! assert_eq!(shadow_cast_assign_error(0.5, 3.0), 0.0);
//! ```

mod approx;
mod registry;
mod user;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use approx::{fast_exp, fast_log, fast_sqrt, ApproxFunctionMap, ApproxImpl};
pub use registry::{finalize, BatchStats, ErrorRegistry, RegistryEntry};
pub use user::{compile_expression, load_user_model, parse_user_model, UserModel, BOUND_NAMES};

use crate::precision::{round_to, Precision};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("cannot read model file {0}")]
    Io(String),
    #[error("invalid model file: {0}")]
    Schema(String),
    #[error("unbound name(s) in model expression: {}", .0.join(", "))]
    Unbound(Vec<String>),
    #[error("invalid model expression: {0}")]
    Expression(String),
    #[error("no approximate implementation of `{function}` (mapped from `{var}`); supported: exp, log, sqrt")]
    Unapproximable { var: String, function: String },
    #[error("unknown model `{0}` (expected taylor-default, shadow-cast, approx-func, null or user:<file>)")]
    UnknownModel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelId {
    #[serde(rename = "taylor-default")]
    Taylor,
    #[serde(rename = "shadow-cast")]
    ShadowCast,
    #[serde(rename = "approx-func")]
    Approx,
    #[serde(rename = "user")]
    User,
    /// Contributes nothing; the baseline for overhead measurements.
    #[serde(rename = "null")]
    Null,
}

impl ModelId {
    pub fn name(self) -> &'static str {
        match self {
            ModelId::Taylor => "taylor-default",
            ModelId::ShadowCast => "shadow-cast",
            ModelId::Approx => "approx-func",
            ModelId::User => "user",
            ModelId::Null => "null",
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `eps(prec) * |x| * |xbar|`.
pub fn taylor_assign_error(x: f64, xbar: f64, prec: Precision) -> f64 {
    prec.eps() * x.abs() * xbar.abs()
}

/// `x - (float)x`, the signed binary32 cast residual.
pub fn shadow_delta(x: f64) -> f64 {
    x - round_to(Precision::Single, x).value
}

/// `|xbar * (x - (float)x)|`.
pub fn shadow_cast_assign_error(x: f64, xbar: f64) -> f64 {
    (xbar * shadow_delta(x)).abs()
}

/// `|xbar * (f(x) - f_approx(x))|` if `name` is mapped to `f`, else 0.
pub fn approx_assign_error(name: &str, x: f64, xbar: f64, map: &ApproxFunctionMap) -> f64 {
    match map.function_for(name) {
        None => 0.0,
        Some(_) => (xbar * map.delta(name, x)).abs(),
    }
}

/// Everything an `AssignError` instruction knows about one store.
#[derive(Debug, Clone, Copy)]
pub struct AssignSite<'a> {
    pub name: &'a str,
    pub value: f64,
    pub adjoint: f64,
    /// The precision the variable is being analyzed for.
    pub precision: Precision,
}

/// A configured error model.
#[derive(Debug, Clone, PartialEq)]
pub enum ErrorModelSpec {
    Taylor,
    ShadowCast,
    Approx(ApproxFunctionMap),
    User(UserModel),
    Null,
}

impl ErrorModelSpec {
    pub fn id(&self) -> ModelId {
        match self {
            ErrorModelSpec::Taylor => ModelId::Taylor,
            ErrorModelSpec::ShadowCast => ModelId::ShadowCast,
            ErrorModelSpec::Approx(_) => ModelId::Approx,
            ErrorModelSpec::User(_) => ModelId::User,
            ErrorModelSpec::Null => ModelId::Null,
        }
    }

    /// The variable-to-function map, if this model has one.
    pub fn approx_map(&self) -> Option<&ApproxFunctionMap> {
        match self {
            ErrorModelSpec::Approx(m) => Some(m),
            ErrorModelSpec::User(u) => u.map.as_ref(),
            _ => None,
        }
    }

    pub fn assign_error(&self, site: &AssignSite<'_>) -> f64 {
        match self {
            ErrorModelSpec::Taylor => taylor_assign_error(site.value, site.adjoint, site.precision),
            ErrorModelSpec::ShadowCast => shadow_cast_assign_error(site.value, site.adjoint),
            ErrorModelSpec::Approx(map) => approx_assign_error(site.name, site.value, site.adjoint, map),
            ErrorModelSpec::User(u) => {
                let approx_delta = u.map.as_ref().map_or(0.0, |m| m.delta(site.name, site.value));
                let slots = [site.value, site.adjoint, site.precision.eps(), shadow_delta(site.value), approx_delta];
                user::eval(&u.compiled, &slots)
            }
            ErrorModelSpec::Null => 0.0,
        }
    }

    pub fn finalize(&self, registry: &ErrorRegistry) -> f64 {
        finalize(registry)
    }
}

impl FromStr for ErrorModelSpec {
    type Err = ModelError;

    /// Accepts the built-in names and `user:<file>`. `approx-func` starts
    /// with an empty map.
    fn from_str(s: &str) -> Result<Self, ModelError> {
        match s {
            "taylor-default" | "taylor" => Ok(ErrorModelSpec::Taylor),
            "shadow-cast" => Ok(ErrorModelSpec::ShadowCast),
            "approx-func" => Ok(ErrorModelSpec::Approx(ApproxFunctionMap::new([], ApproxImpl::Fast)?)),
            "null" => Ok(ErrorModelSpec::Null),
            other => match other.strip_prefix("user:") {
                Some(path) => Ok(ErrorModelSpec::User(load_user_model(std::path::Path::new(path))?)),
                None => Err(ModelError::UnknownModel(other.to_string())),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::Builtin;

    #[test]
    fn taylor_examples() {
        assert_eq!(taylor_assign_error(1.0, 1.0, Precision::Double), 2f64.powi(-53));
        assert_eq!(taylor_assign_error(0.0, 7.0, Precision::Half), 0.0);
        assert_eq!(taylor_assign_error(2.0, -3.0, Precision::Single), 6.0 * 2f64.powi(-24));
    }

    #[test]
    fn shadow_examples() {
        // Frozen from an independent numpy float32 round trip.
        assert_eq!(shadow_cast_assign_error(0.1, 1.0), 1.4901161138336505e-09);
        assert_eq!(shadow_cast_assign_error(1.95e-5, 1.0), 6.745103743122441e-13);
        assert_eq!(shadow_cast_assign_error(0.5, 3.0), 0.0);
    }

    #[test]
    fn approx_examples() {
        let map = ApproxFunctionMap::new([("v".to_string(), Builtin::Exp)], ApproxImpl::Fast).unwrap();
        assert_eq!(approx_assign_error("w", 1.0, 2.0, &map), 0.0);
        // Frozen from a standalone evaluation of the same cubic.
        assert_eq!(approx_assign_error("v", 1.0, 2.0, &map), FAST_EXP_1_DELTA_TIMES_2);
        let stub = ApproxFunctionMap::new([("v".to_string(), Builtin::Exp)], ApproxImpl::ExactStub).unwrap();
        for x in [-3.0, 0.0, 1.0, 20.0] {
            assert_eq!(approx_assign_error("v", x, 2.0, &stub), 0.0);
        }
    }

    const FAST_EXP_1_DELTA_TIMES_2: f64 = 0.00027194888579451515;

    #[test]
    fn user_models_match_builtins() {
        let shadow = ErrorModelSpec::User(parse_user_model("model = \"s\"\nexpression = \"abs(adjoint * shadow_delta)\"").unwrap());
        let taylor = ErrorModelSpec::User(parse_user_model("model = \"t\"\nexpression = \"eps_m * abs(value) * abs(adjoint)\"").unwrap());
        for (x, xb) in [(0.1, 1.0), (1.95e-5, -2.5), (3.0, 0.0), (-7.25e10, 1e-3)] {
            for p in [Precision::Half, Precision::Single, Precision::Double] {
                let site = AssignSite { name: "x", value: x, adjoint: xb, precision: p };
                assert_eq!(shadow.assign_error(&site), ErrorModelSpec::ShadowCast.assign_error(&site));
                assert_eq!(taylor.assign_error(&site), ErrorModelSpec::Taylor.assign_error(&site));
            }
        }
    }
}
