//! The shipped benchmark kernels with seeded input generators.
//!
//! ```
//! let k = fpee::corpus::get("kmeans_distance").unwrap();
//! let f = k.function();
//! let rows = k.inputs(3, 7);
//! assert_eq!(rows.len(), 3);
//! assert!(fpee::runtime::run_primal(&f, &rows[0], &Default::default()).is_ok());
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::frontend::compile;
use crate::inline::inline_named;
use crate::ir::Function;
use crate::runtime::{Inputs, Value};

/// Which generator draws a kernel's inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Generator {
    Listing1,
    ArcLength,
    Simpsons,
    KMeans,
    Cg,
    BlackScholes,
}

#[derive(Debug, Clone, Copy)]
pub struct Kernel {
    pub name: &'static str,
    pub file_name: &'static str,
    pub source: &'static str,
    /// The function analyzed; callees are inlined into it.
    pub entry: &'static str,
    /// Problem size: iteration count, feature count or vector length.
    pub default_size: i64,
    /// Input rows drawn by `corpus run`.
    pub default_rows: usize,
    /// Default model for `corpus run`.
    pub model: &'static str,
    /// Tuning budget, or the sensitivity cutoff threshold for profiled kernels.
    pub default_threshold: f64,
    /// Loop index to profile, with the variables tracked in the profile.
    pub per_iteration: Option<(&'static str, &'static [&'static str])>,
    /// Variable-to-function map for approximation analysis.
    pub approx_map: Option<&'static str>,
    pub notes: &'static str,
    generator: Generator,
}

const KERNELS: &[Kernel] = &[
    Kernel {
        name: "listing1",
        default_rows: 1,
        file_name: "listing1.fpl",
        source: include_str!("../corpus/listing1.fpl"),
        entry: "f",
        default_size: 0,
        model: "shadow-cast",
        default_threshold: 1e-12,
        per_iteration: None,
        approx_map: None,
        notes: "Two-input sum. Row 0 is x = 1.95e-5, y = 1.37e-7; later rows are uniform in [-1, 1).",
        generator: Generator::Listing1,
    },
    Kernel {
        name: "arc_length",
        default_rows: 1,
        file_name: "arc_length.fpl",
        source: include_str!("../corpus/arc_length.fpl"),
        entry: "arc_length",
        default_size: 10_000,
        model: "shadow-cast",
        default_threshold: 1e-5,
        per_iteration: None,
        approx_map: None,
        notes: "Mixed-precision tuning target over n segments. Row 0 is the benchmark domain [0, pi]; \
                later rows draw a in [0, 0.5), b in [2.5, pi).",
        generator: Generator::ArcLength,
    },
    Kernel {
        name: "simpsons",
        default_rows: 1,
        file_name: "simpsons.fpl",
        source: include_str!("../corpus/simpsons.fpl"),
        entry: "simpsons",
        default_size: 10_000,
        model: "shadow-cast",
        default_threshold: 1e-6,
        per_iteration: None,
        approx_map: None,
        notes: "Mixed-precision tuning target over 2n subintervals. Row 0 is [0, 1]; later rows draw \
                a in [0, 0.5), b in [0.5, 1).",
        generator: Generator::Simpsons,
    },
    Kernel {
        name: "kmeans_distance",
        default_rows: 1000,
        file_name: "kmeans_distance.fpl",
        source: include_str!("../corpus/kmeans_distance.fpl"),
        entry: "distance",
        default_size: 34,
        model: "shadow-cast",
        default_threshold: 1e-6,
        per_iteration: None,
        approx_map: None,
        notes: "Point-to-centre distance over nf features. Data points are sparse and hold \
                multiples of 1/16 below 64, so they are exact in binary32; centres are \
                uniform in [0, 40).",
        generator: Generator::KMeans,
    },
    Kernel {
        name: "cg",
        default_rows: 10,
        file_name: "cg.fpl",
        source: include_str!("../corpus/cg.fpl"),
        entry: "cg",
        default_size: 64,
        model: "taylor-default",
        default_threshold: 1.0,
        per_iteration: Some(("i", &["r", "p", "ap"])),
        approx_map: None,
        notes: "Conjugate gradient, 50 iterations, stand-in for a sparse CG benchmark. \
                b uniform in [0, 1), sigma in [0.04, 0.06).",
        generator: Generator::Cg,
    },
    Kernel {
        name: "black_scholes",
        default_rows: 1000,
        file_name: "black_scholes.fpl",
        source: include_str!("../corpus/black_scholes.fpl"),
        entry: "black_scholes",
        default_size: 0,
        model: "approx-func",
        default_threshold: 1e-2,
        per_iteration: None,
        approx_map: Some("d=log,s=sqrt,e=exp"),
        notes: "Call price. spot, strike in [50, 150), rate in [0.01, 0.1), vol in [0.1, 0.5), \
                t in [0.25, 2).",
        generator: Generator::BlackScholes,
    },
];

pub fn kernels() -> &'static [Kernel] {
    KERNELS
}

pub fn get(name: &str) -> Option<&'static Kernel> {
    let name = name.strip_suffix(".fpl").unwrap_or(name);
    KERNELS.iter().find(|k| k.name == name)
}

/// Number of CG iterations.
pub const CG_ITERATIONS: i64 = 50;

impl Kernel {
    /// The entry point with callees inlined.
    pub fn function(&self) -> Function {
        let program = compile(self.source).expect("corpus kernels compile");
        inline_named(&program, self.entry).expect("entry exists")
    }

    pub fn inputs(&self, rows: usize, seed: u64) -> Vec<Inputs> {
        self.inputs_sized(rows, seed, self.default_size)
    }

    /// `rows` input sets drawn from a ChaCha8 stream seeded with `seed`.
    pub fn inputs_sized(&self, rows: usize, seed: u64, size: i64) -> Vec<Inputs> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..rows).map(|row| self.draw(&mut rng, row, size)).collect()
    }

    fn draw(&self, rng: &mut ChaCha8Rng, row: usize, size: i64) -> Inputs {
        let real = |v: f64| Value::Real(v);
        let mut m = Inputs::new();
        match self.generator {
            Generator::Listing1 => {
                let (x, y) = if row == 0 { (1.95e-5, 1.37e-7) } else { (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) };
                m.insert("x".into(), real(x));
                m.insert("y".into(), real(y));
            }
            Generator::ArcLength => {
                let (a, b) = if row == 0 { (0.0, std::f64::consts::PI) } else { (rng.gen_range(0.0..0.5), rng.gen_range(2.5..std::f64::consts::PI)) };
                m.insert("a".into(), real(a));
                m.insert("b".into(), real(b));
                m.insert("n".into(), Value::Int(size));
            }
            Generator::Simpsons => {
                let (a, b) = if row == 0 { (0.0, 1.0) } else { (rng.gen_range(0.0..0.5), rng.gen_range(0.5..1.0)) };
                m.insert("a".into(), real(a));
                m.insert("b".into(), real(b));
                m.insert("n".into(), Value::Int(size));
            }
            Generator::KMeans => {
                let attrs = (0..size)
                    .map(|_| if rng.gen_bool(0.4) { f64::from(rng.gen_range(0..1024u32)) / 16.0 } else { 0.0 })
                    .collect();
                let clusters = (0..size).map(|_| rng.gen_range(0.0..40.0)).collect();
                m.insert("attrs".into(), Value::Array(attrs));
                m.insert("clusters".into(), Value::Array(clusters));
                m.insert("nf".into(), Value::Int(size));
            }
            Generator::Cg => {
                m.insert("b".into(), Value::Array((0..size).map(|_| rng.gen_range(0.0..1.0)).collect()));
                m.insert("sigma".into(), real(rng.gen_range(0.04..0.06)));
                m.insert("n".into(), Value::Int(size));
                m.insert("iters".into(), Value::Int(CG_ITERATIONS));
            }
            Generator::BlackScholes => {
                m.insert("spot".into(), real(rng.gen_range(50.0..150.0)));
                m.insert("strike".into(), real(rng.gen_range(50.0..150.0)));
                m.insert("rate".into(), real(rng.gen_range(0.01..0.1)));
                m.insert("vol".into(), real(rng.gen_range(0.1..0.5)));
                m.insert("t".into(), real(rng.gen_range(0.25..2.0)));
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runtime::{run_primal, PrecisionSpec};

    #[test]
    fn every_kernel_runs_under_double() {
        for k in kernels() {
            let f = k.function();
            for row in k.inputs_sized(3, 1, k.default_size.min(100)) {
                let out = run_primal(&f, &row, &PrecisionSpec::all_double()).unwrap_or_else(|e| panic!("{}: {e}", k.name));
                assert!(!out.non_finite, "{}", k.name);
            }
        }
    }

    #[test]
    fn generators_are_seeded() {
        let k = get("black_scholes").unwrap();
        assert_eq!(k.inputs(5, 9), k.inputs(5, 9));
        assert_ne!(k.inputs(5, 9), k.inputs(5, 10));
    }

    #[test]
    fn kmeans_points_are_binary32_exact() {
        for row in get("kmeans_distance").unwrap().inputs(20, 3) {
            let Value::Array(xs) = &row["attrs"] else { panic!() };
            assert!(xs.iter().all(|x| f64::from(*x as f32) == *x));
        }
    }

    #[test]
    fn arc_length_with_no_segments_is_zero() {
        let k = get("arc_length").unwrap();
        let out = run_primal(&k.function(), &k.inputs_sized(1, 0, 0)[0], &PrecisionSpec::all_double()).unwrap();
        assert_eq!(out.ret, Some(0.0));
    }
}
