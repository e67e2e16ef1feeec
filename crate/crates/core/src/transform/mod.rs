//! Reverse-mode source transformation with error-estimation instructions.
//!
//! Each real assignment `L` is handled by one of three rules, picked by
//! [`ActivitySet`]:
//!
//! | live | diff | forward        | backward                                  |
//! |------|------|----------------|-------------------------------------------|
//! | yes  | yes  | push, `L`      | pop, adjoint statements, `AssignError`    |
//! | yes  | no   | push, `L`      | pop, `AssignError` (zero adjoint)         |
//! | no   | yes  | `L`            | adjoint statements, `AssignError`         |
//!
//! A statement that is neither live nor differentiable gets only its
//! `AssignError`. Parameters get one `AssignError` each at the end of the
//! backward sweep, followed by `FinalizeEE`.
//!
//! ```
//! use fpee::{frontend, inline, models::ModelId, transform};
//! let program = frontend::compile("func f(x: real, y: real): real { var z: real; z = x + y; return z; }").unwrap();
//! let f = inline::inline_named(&program, "f").unwrap();
//! let adj = transform::transform(&f, ModelId::Taylor, &transform::all_active(&f)).unwrap();
//! let text = transform::emit(&adj);
//! assert_eq!(text.matches("FinalizeEE").count(), 1);
//! assert_eq!(text.matches("TapePush").count(), text.matches("TapePop").count());
//! ```

mod activity;
mod adjoint;
mod emit;

pub use activity::{all_active, analyze_activity, default_seeds, ActivitySet, Seed};
pub use adjoint::{transform, AdjointFunction, AssignError, BStmt, Counts, ErrorSite, FStmt, Saved, TransformError};
pub use emit::emit;
