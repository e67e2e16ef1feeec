//! Input sets: named parameter values from CSV files or a seeded sampler.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use super::RuntimeError;
use crate::ir::{Function, IntExpr, VarKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Real(f64),
    Array(Vec<f64>),
}

impl Value {
    pub fn as_real(&self) -> Option<f64> {
        match self {
            Value::Real(x) => Some(*x),
            Value::Int(i) => Some(*i as f64),
            _ => None,
        }
    }
}

/// One input set: parameter name to value.
pub type Inputs = BTreeMap<String, Value>;

/// Parses one CSV cell as the declared kind of `param`. Array elements are
/// separated by `;`.
pub fn parse_value(kind: &VarKind, param: &str, text: &str) -> Result<Value, RuntimeError> {
    let text = text.trim();
    let bad = |what: &str| RuntimeError::Input(format!("parameter `{param}`: cannot read `{text}` as {what}"));
    Ok(match kind {
        VarKind::Real => Value::Real(text.parse().map_err(|_| bad("a real"))?),
        VarKind::Int => Value::Int(text.parse().map_err(|_| bad("an int"))?),
        VarKind::Bool => Value::Bool(text.parse().map_err(|_| bad("a bool"))?),
        VarKind::RealArray(_) => Value::Array(
            text.split(';')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|_| bad("a `;`-separated real array")))
                .collect::<Result<_, _>>()?,
        ),
    })
}

/// Reads one input set per CSV row; the header names parameters.
pub fn read_csv(text: &str, f: &Function) -> Result<Vec<Inputs>, RuntimeError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| RuntimeError::Input(format!("CSV header: {e}")))?.clone();
    let mut kinds = Vec::new();
    for h in headers.iter() {
        let v = f
            .params
            .iter()
            .find(|p| f.var(**p).name == h)
            .ok_or_else(|| RuntimeError::Input(format!("CSV column `{h}` is not a parameter of `{}`", f.name)))?;
        kinds.push(&f.var(*v).kind);
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| RuntimeError::Input(format!("CSV row {}: {e}", i + 1)))?;
        let mut row = Inputs::new();
        for ((h, kind), cell) in headers.iter().zip(&kinds).zip(record.iter()) {
            row.insert(h.to_string(), parse_value(kind, h, cell)?);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Distribution for sampled real inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Dist {
    Uniform { lo: f64, hi: f64 },
    Normal { mean: f64, std_dev: f64 },
}

/// A `dist,n,seed` sampling request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleSpec {
    pub dist: Dist,
    pub n: usize,
    pub seed: u64,
}

impl SampleSpec {
    /// Parses `uniform,100,7`, `uniform(-1:1),100,7`, `normal(0:2),10,1`.
    pub fn parse(text: &str) -> Result<Self, RuntimeError> {
        let bad = || RuntimeError::Input(format!("bad sample spec `{text}` (expected dist,n,seed such as uniform(0:1),100,42)"));
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let (name, args) = match parts[0].split_once('(') {
            Some((name, rest)) => {
                let inner = rest.strip_suffix(')').ok_or_else(bad)?;
                let (a, b) = inner.split_once(':').ok_or_else(bad)?;
                (name, Some((a.trim().parse::<f64>().map_err(|_| bad())?, b.trim().parse::<f64>().map_err(|_| bad())?)))
            }
            None => (parts[0], None),
        };
        let dist = match (name, args) {
            ("uniform", None) => Dist::Uniform { lo: 0.0, hi: 1.0 },
            ("uniform", Some((lo, hi))) if lo < hi => Dist::Uniform { lo, hi },
            ("normal", None) => Dist::Normal { mean: 0.0, std_dev: 1.0 },
            ("normal", Some((mean, std_dev))) if std_dev > 0.0 => Dist::Normal { mean, std_dev },
            _ => return Err(bad()),
        };
        Ok(SampleSpec { dist, n: parts[1].parse().map_err(|_| bad())?, seed: parts[2].parse().map_err(|_| bad())? })
    }

    /// Draws `n` input sets. Real scalars and arrays are sampled; int and
    /// bool parameters (and any fixed value) come from `fixed`.
    pub fn sample(&self, f: &Function, fixed: &Inputs) -> Result<Vec<Inputs>, RuntimeError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let draw = |rng: &mut ChaCha8Rng| match self.dist {
            Dist::Uniform { lo, hi } => Uniform::new(lo, hi).sample(rng),
            Dist::Normal { mean, std_dev } => Normal::new(mean, std_dev).expect("validated").sample(rng),
        };
        let mut rows = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            let mut row = fixed.clone();
            for p in &f.params {
                let info = f.var(*p);
                if row.contains_key(&info.name) {
                    continue;
                }
                let v = match &info.kind {
                    VarKind::Real => Value::Real(draw(&mut rng)),
                    VarKind::RealArray(len) => {
                        let n = const_len(len, f, &row).ok_or_else(|| {
                            RuntimeError::Input(format!("length of sampled array `{}` depends on unset int parameters", info.name))
                        })?;
                        Value::Array((0..n).map(|_| draw(&mut rng)).collect())
                    }
                    _ => {
                        return Err(RuntimeError::Input(format!(
                            "parameter `{}` is not real; fix its value with --set {}=<value>",
                            info.name, info.name
                        )))
                    }
                };
                row.insert(info.name.clone(), v);
            }
            rows.push(row);
        }
        Ok(rows)
    }
}

/// Evaluates an array length from literals and already-fixed int params.
fn const_len(e: &IntExpr, f: &Function, fixed: &Inputs) -> Option<usize> {
    fn go(e: &IntExpr, f: &Function, fixed: &Inputs) -> Option<i64> {
        Some(match e {
            IntExpr::Const(c) => *c,
            IntExpr::Var(v) => match fixed.get(&f.var(*v).name)? {
                Value::Int(i) => *i,
                _ => return None,
            },
            IntExpr::Neg(a) => -go(a, f, fixed)?,
            IntExpr::Bin(op, a, b) => {
                let (a, b) = (go(a, f, fixed)?, go(b, f, fixed)?);
                match op {
                    crate::ir::ArithOp::Add => a.checked_add(b)?,
                    crate::ir::ArithOp::Sub => a.checked_sub(b)?,
                    crate::ir::ArithOp::Mul => a.checked_mul(b)?,
                    crate::ir::ArithOp::Div => a.checked_div(b)?,
                }
            }
        })
    }
    usize::try_from(go(e, f, fixed)?).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::compile;

    fn func(src: &str) -> Function {
        compile(src).unwrap().functions.pop().unwrap()
    }

    #[test]
    fn csv_rows() {
        let f = func("func f(x: real, n: int, a: real[n]): real { return x; }");
        let rows = read_csv("x,n,a\n1.5,2,0.5;0.25\n", &f).unwrap();
        assert_eq!(rows[0]["a"], Value::Array(vec![0.5, 0.25]));
        assert_eq!(rows[0]["n"], Value::Int(2));
        assert!(read_csv("q\n1\n", &f).is_err());
    }

    #[test]
    fn sampler_is_seeded() {
        let f = func("func f(x: real, n: int, a: real[n]): real { return x; }");
        let spec = SampleSpec::parse("uniform(-1:1),5,9").unwrap();
        let fixed: Inputs = [("n".to_string(), Value::Int(3))].into_iter().collect();
        let a = spec.sample(&f, &fixed).unwrap();
        assert_eq!(a, spec.sample(&f, &fixed).unwrap());
        assert_eq!(a.len(), 5);
        assert!(spec.sample(&f, &Inputs::new()).is_err());
    }

    #[test]
    fn bad_sample_spec() {
        assert!(SampleSpec::parse("uniform,10").is_err());
        assert!(SampleSpec::parse("cauchy,10,1").is_err());
        assert!(SampleSpec::parse("uniform(1:0),10,1").is_err());
    }
}
