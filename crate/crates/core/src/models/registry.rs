//! Per-variable error bookkeeping for one adjoint execution.

use std::collections::HashMap;

use serde::Serialize;

use crate::ir::Loc;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegistryEntry {
    pub name: String,
    pub loc: Loc,
    /// One contribution per executed `AssignError` at this site.
    pub contributions: Vec<f64>,
    pub sum: f64,
}

/// Error contributions keyed by `(variable, location)`, in first-seen order.
/// Every sum is accumulated in binary64, in visit order.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ErrorRegistry {
    pub entries: Vec<RegistryEntry>,
    pub total: f64,
    #[serde(skip)]
    index: HashMap<(String, u32, u32), usize>,
}

impl ErrorRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Index of the entry for `(name, loc)`, created empty if new.
    pub fn entry(&mut self, name: &str, loc: Loc) -> usize {
        // Keyed on raw coordinates: `Loc` equality deliberately ignores them.
        let key = (name.to_string(), loc.line, loc.col);
        if let Some(i) = self.index.get(&key) {
            return *i;
        }
        self.entries.push(RegistryEntry { name: name.to_string(), loc, contributions: Vec::new(), sum: 0.0 });
        self.index.insert(key, self.entries.len() - 1);
        self.entries.len() - 1
    }

    /// Records one visit's contribution against an entry from [`Self::entry`].
    pub fn add(&mut self, entry: usize, error: f64) {
        let e = &mut self.entries[entry];
        e.contributions.push(error);
        e.sum += error;
        self.total += error;
    }

    pub fn register(&mut self, name: &str, loc: Loc, error: f64) {
        let i = self.entry(name, loc);
        self.add(i, error);
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Subtotals per variable name, in first-seen order.
    pub fn per_variable(&self) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = Vec::new();
        for e in &self.entries {
            match out.iter_mut().find(|(n, _)| *n == e.name) {
                Some((_, s)) => *s += e.sum,
                None => out.push((e.name.clone(), e.sum)),
            }
        }
        out
    }

    /// Largest single contribution, 0 when empty.
    pub fn max_contribution(&self) -> f64 {
        self.entries.iter().flat_map(|e| e.contributions.iter().copied()).fold(0.0, f64::max)
    }

    pub fn visits(&self) -> usize {
        self.entries.iter().map(|e| e.contributions.len()).sum()
    }

    pub fn has_non_finite(&self) -> bool {
        !self.total.is_finite()
    }
}

/// The default `FinalizeEE`: the plain sum of every contribution.
pub fn finalize(registry: &ErrorRegistry) -> f64 {
    registry.total
}

/// Aggregate of one scalar over a batch of runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatchStats {
    pub count: usize,
    pub accumulated: f64,
    pub average: f64,
    pub max: f64,
}

impl BatchStats {
    pub fn of(values: &[f64]) -> Self {
        let accumulated: f64 = values.iter().sum();
        let count = values.len();
        BatchStats {
            count,
            accumulated,
            average: if count == 0 { 0.0 } else { accumulated / count as f64 },
            max: values.iter().copied().fold(0.0, f64::max),
        }
    }
}
