//! Adjoint-based floating-point error estimation.
//!
//! The pipeline parses programs written in FPL, a small imperative numeric
//! language, synthesizes reverse-mode adjoint code instrumented with
//! per-assignment error-estimation hooks, and executes it under configurable
//! per-variable storage precision. The resulting error and sensitivity data
//! drive mixed-precision recommendations and approximate-function analysis.

pub mod analysis;
pub mod corpus;
pub mod frontend;
pub mod inline;
pub mod ir;
pub mod models;
pub mod precision;
pub mod transform;
pub mod runtime;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/fpl.md")]
    mod fpl {}
    #[doc = include_str!("../../../book/src/fpl-grammar.md")]
    mod fpl_grammar {}
    #[doc = include_str!("../../../book/src/adjoints.md")]
    mod adjoints {}
    #[doc = include_str!("../../../book/src/precision.md")]
    mod precision {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    mod analysis {}
    #[doc = include_str!("../../../book/src/corpus.md")]
    mod corpus {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/report-schema.md")]
    mod report_schema {}
}
