//! Plot-ready CSV renderings of the analysis reports. Floats use the
//! shortest round-trip form, with an exponent for very small or large values.

use super::*;

pub trait ToCsv {
    fn to_csv(&self) -> String;
}

fn write(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = ::csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// `18` for integral values, `8.255841542090283e-13` or `0.25` otherwise.
pub fn num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e16 {
        format!("{x}")
    } else {
        format!("{x:?}")
    }
}

fn values(v: &Value) -> Vec<f64> {
    match v {
        Value::Real(x) => vec![*x],
        Value::Array(xs) => xs.clone(),
        Value::Int(i) => vec![*i as f64],
        Value::Bool(b) => vec![f64::from(u8::from(*b))],
    }
}

fn element(name: &str, i: usize, n: usize) -> String {
    if n == 1 {
        name.to_string()
    } else {
        format!("{name}[{i}]")
    }
}

/// Long format: `row,variable,quantity,value`.
impl ToCsv for AnalyzeReport {
    fn to_csv(&self) -> String {
        let mut out = Vec::new();
        for r in &self.rows {
            let mut push = |var: String, q: &str, v: f64| out.push(vec![r.index.to_string(), var, q.to_string(), num(v)]);
            if let Some(ret) = r.ret {
                push("return".into(), "value", ret);
            }
            for g in &r.gradients {
                let xs = values(&g.value);
                for (i, x) in xs.iter().enumerate() {
                    push(element(&g.name, i, xs.len()), "gradient", *x);
                }
            }
            for e in &r.errors {
                push(e.name.clone(), "error", e.value);
            }
            push("*".into(), "total_error", r.total_error);
        }
        write(&["row", "variable", "quantity", "value"], out)
    }
}

/// One row per variable: `variable,sensitivity[,normalized]`.
impl ToCsv for SensitivityReport {
    fn to_csv(&self) -> String {
        let normalized = self.per_variable.iter().any(|v| v.normalized.is_some());
        let mut header = vec!["variable", "sensitivity"];
        if normalized {
            header.push("normalized");
        }
        write(
            &header,
            self.per_variable.iter().map(|v| {
                let mut r = vec![v.name.clone(), num(v.value)];
                if let Some(n) = v.normalized {
                    r.push(num(n));
                }
                r
            }),
        )
    }
}

/// One row per iteration: `iteration,<var>...`, normalized when available.
impl ToCsv for IterationProfile {
    fn to_csv(&self) -> String {
        let mut header = vec!["iteration"];
        header.extend(self.variables.iter().map(String::as_str));
        let rows = self.normalized.as_ref().unwrap_or(&self.rows);
        write(&header, rows.iter().enumerate().map(|(k, r)| std::iter::once(k.to_string()).chain(r.iter().map(|x| num(*x))).collect()))
    }
}

/// One row per candidate in ranking order.
impl ToCsv for TuningResult {
    fn to_csv(&self) -> String {
        write(
            &["rank", "variable", "sensitivity", "error", "demoted"],
            self.candidates.iter().enumerate().map(|(i, c)| {
                vec![i.to_string(), c.name.clone(), num(c.sensitivity), num(c.error), self.demoted.contains(&c.name).to_string()]
            }),
        )
    }
}

fn validation_rows(rows: &[ValidationRow]) -> impl Iterator<Item = Vec<String>> + '_ {
    rows.iter().map(|r| vec![r.index.to_string(), num(r.estimated), num(r.actual), num(r.ratio), r.valid.to_string()])
}

/// One row per input: `row,estimated,actual,ratio,valid`.
impl ToCsv for ValidationReport {
    fn to_csv(&self) -> String {
        write(&["row", "estimated", "actual", "ratio", "valid"], validation_rows(&self.rows))
    }
}

/// Summary statistics: `statistic,estimated,actual`.
impl ToCsv for ApproxReport {
    fn to_csv(&self) -> String {
        let (e, a) = (&self.estimated, &self.actual);
        write(
            &["statistic", "estimated", "actual"],
            [("average", e.average, a.average), ("max", e.max, a.max), ("accumulated", e.accumulated, a.accumulated)]
                .into_iter()
                .map(|(s, x, y)| vec![s.to_string(), num(x), num(y)]),
        )
    }
}

impl ApproxReport {
    /// Per-input rows, in the validation layout.
    pub fn rows_csv(&self) -> String {
        write(&["row", "estimated", "actual", "ratio", "valid"], validation_rows(&self.rows))
    }
}
