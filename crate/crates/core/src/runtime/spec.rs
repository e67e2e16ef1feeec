use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::RuntimeError;
use crate::ir::Function;
use crate::precision::Precision;

/// Storage precision per variable. Arithmetic is always binary64; a store to
/// a demoted variable rounds to nearest-even.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrecisionSpec {
    pub default_precision: Precision,
    pub overrides: BTreeMap<String, Precision>,
}

impl Default for PrecisionSpec {
    fn default() -> Self {
        Self::all_double()
    }
}

impl PrecisionSpec {
    pub fn all_double() -> Self {
        PrecisionSpec { default_precision: Precision::Double, overrides: BTreeMap::new() }
    }

    pub fn demote<'a>(names: impl IntoIterator<Item = &'a str>, to: Precision) -> Self {
        PrecisionSpec { default_precision: Precision::Double, overrides: names.into_iter().map(|n| (n.to_string(), to)).collect() }
    }

    /// Parses `v=single, w=half` pairs separated by commas or newlines;
    /// `default=<p>` sets the default and `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, RuntimeError> {
        let mut spec = Self::all_double();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            for item in line.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (name, prec) = item
                    .split_once('=')
                    .ok_or_else(|| RuntimeError::Config(format!("precision entry `{item}` is not `name=precision`")))?;
                let prec: Precision = prec.trim().parse().map_err(RuntimeError::Config)?;
                match name.trim() {
                    "default" => spec.default_precision = prec,
                    name => {
                        spec.overrides.insert(name.to_string(), prec);
                    }
                }
            }
        }
        Ok(spec)
    }

    /// Reads a spec from `arg`: a file if one exists at that path, otherwise
    /// the inline form.
    pub fn from_arg(arg: &str) -> Result<Self, RuntimeError> {
        let path = std::path::Path::new(arg);
        if path.is_file() {
            let text = std::fs::read_to_string(path).map_err(|e| RuntimeError::Input(format!("{arg}: {e}")))?;
            Self::parse(&text)
        } else if arg.contains('=') {
            Self::parse(arg)
        } else {
            Err(RuntimeError::Input(format!("precision spec file `{arg}` not found")))
        }
    }

    pub fn is_all_double(&self) -> bool {
        self.default_precision == Precision::Double && self.overrides.values().all(|p| *p == Precision::Double)
    }

    /// Per-variable precisions for `f`. An override `callee.v` also covers
    /// every inlined copy `callee.<n>.v`. Unknown names are an error.
    pub fn resolve(&self, f: &Function) -> Result<Vec<Precision>, RuntimeError> {
        let mut used = vec![false; self.overrides.len()];
        let keys: Vec<&String> = self.overrides.keys().collect();
        let mut out = Vec::with_capacity(f.vars.len());
        for v in &f.vars {
            let generic = generic_name(&v.name);
            let hit = keys.iter().position(|k| **k == v.name).or_else(|| generic.as_ref().and_then(|g| keys.iter().position(|k| *k == g)));
            let p = match hit {
                Some(i) => {
                    used[i] = true;
                    self.overrides[keys[i]]
                }
                None => self.default_precision,
            };
            out.push(if v.kind.is_real() { p } else { Precision::Double });
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(RuntimeError::Config(format!("precision override names unknown variable `{}`", keys[i])));
        }
        Ok(out)
    }
}

/// `callee.3.v` becomes `callee.v`.
pub fn generic_name(name: &str) -> Option<String> {
    let mut parts: Vec<&str> = name.split('.').collect();
    if parts.len() >= 3 && parts[parts.len() - 2].chars().all(|c| c.is_ascii_digit()) {
        parts.remove(parts.len() - 2);
        Some(parts.join("."))
    } else {
        None
    }
}

impl fmt::Display for PrecisionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "default={}", self.default_precision)?;
        for (k, v) in &self.overrides {
            write!(f, ",{k}={v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_inline() {
        let s = PrecisionSpec::parse("x=single, y=half\n# comment\ndefault=double").unwrap();
        assert_eq!(s.overrides["x"], Precision::Single);
        assert_eq!(s.overrides["y"], Precision::Half);
        assert!(PrecisionSpec::parse("x=quad").is_err());
    }

    #[test]
    fn generic_names() {
        assert_eq!(generic_name("fun.2.d1").as_deref(), Some("fun.d1"));
        assert_eq!(generic_name("x"), None);
    }
}
