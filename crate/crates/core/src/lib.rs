//! Aggregation functions on `[0,1]` and their compilation into the basis
//! of suprema, infima, `b`-medians and the steps `χ_a`.
//!
//! - [`types`]: unit values, rational grid points, input vectors.
//! - [`basis`], [`expr`], [`program`]: the generators, expression trees and
//!   a flattened evaluator.
//! - [`agg`], [`catalog`]: the function interface and named functions.
//! - [`compiler`]: `G^n_b`, `h`-blocks, grid compilation, the exact unary
//!   compiler, rational refinements and duality.
//! - [`dsl`]: text and JSON forms of expressions.
//! - [`verify`]: property checks and the lemma suite.
//! - [`connectives`]: negations and implications.

pub mod agg;
pub mod basis;
pub mod catalog;
pub mod compiler;
pub mod connectives;
pub mod dsl;
pub mod expr;
pub mod program;
pub mod types;
pub mod verify;

pub use agg::{AggError, AggFunction, Provenance};
pub use compiler::{
    build_g, build_h, build_h_grid, compile_grid, compile_unary_exact, dualize, dualize_expr, grid_oracle,
    jump_set, refine_chi, refine_med, CompileError, CompileReport, GridOracle, StepFn1D,
};
pub use expr::{BasisExpr, ExprError, Node};
pub use program::Program;
pub use types::{DomainError, GridPoint, InputVector, Param, UnitValue};
pub use verify::{VerifyReport, DEFAULT_SEED};
