//! Storage precisions and round-on-store.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Half,
    Single,
    Double,
}

impl Precision {
    /// Unit roundoff, `2^-p` for a `p`-bit significand.
    pub fn eps(self) -> f64 {
        match self {
            Precision::Half => 2f64.powi(-11),
            Precision::Single => 2f64.powi(-24),
            Precision::Double => 2f64.powi(-53),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Precision::Half => "half",
            Precision::Single => "single",
            Precision::Double => "double",
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "half" | "f16" => Ok(Precision::Half),
            "single" | "float" | "f32" => Ok(Precision::Single),
            "double" | "f64" => Ok(Precision::Double),
            other => Err(format!("unknown precision `{other}` (expected half, single or double)")),
        }
    }
}

/// A rounded value and whether rounding overflowed a finite input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rounded {
    pub value: f64,
    pub overflow: bool,
}

/// Rounds `x` to nearest-even in `prec` and widens the result back.
pub fn round_to(prec: Precision, x: f64) -> Rounded {
    let value = match prec {
        Precision::Double => x,
        Precision::Single => x as f32 as f64,
        Precision::Half => half::f16::from_f64(x).to_f64(),
    };
    Rounded { value, overflow: x.is_finite() && !value.is_finite() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_is_identity() {
        for x in [0.1, -3.5e300, 5e-324, 1.0 / 3.0] {
            assert_eq!(round_to(Precision::Double, x).value.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn half_overflow() {
        // 65520 is the midpoint between 65504 and 2^16; ties-to-even overflows.
        let r = round_to(Precision::Half, 65520.0);
        assert!(r.value.is_infinite() && r.overflow);
        assert_eq!(round_to(Precision::Half, 65519.0).value, 65504.0);
    }

    #[test]
    fn single_exact() {
        assert_eq!(round_to(Precision::Single, 0.5).value, 0.5);
    }
}
