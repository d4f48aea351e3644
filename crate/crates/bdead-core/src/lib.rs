//! Deadlock analysis for guarded-event state machines.
//!
//! The crate is organized around a small machine language (sorts, constants,
//! axioms, state variables, invariants, guarded events) and two independent
//! analyses over it:
//!
//! * [`cbc`] — constraint-based search for a state satisfying the axioms and
//!   invariants in which no event guard holds, built on the reified
//!   propagation kernel in [`kernel`].
//! * [`mc`] — explicit-state exploration from the initial states, reporting a
//!   deadlocking trace if one is reachable.
//!
//! [`model`] holds the surface syntax (parser, printer, typechecker, ground
//! evaluator), [`simplify`] the guard rewriter and atom normalizer shared by
//! both analyses, and [`testgen`] deterministic generators for machines used
//! in differential testing and benchmarks.

pub mod cbc;
pub mod kernel;
pub mod mc;
pub mod model;
pub mod simplify;
pub mod testgen;

pub use cbc::{
    check_deadlock, guard_table, CbcReport, CbcResult, CheckOptions, GuardStatus, Inconclusive,
};
pub use kernel::{solve, solve_all, Budget, SolveConfig, SolveOutcome, SolveStats, Store, Truth};
pub use mc::{model_check, McOptions, McReport, McResult, SearchOrder, TraceStep};
pub use model::{
    parse_machine, typecheck, EvalError, Expr, Machine, ParseError, Pred, Ty, TypeError,
    TypedMachine, Valuation, Value,
};
pub use simplify::{normalize_atom, simplify, substitute, AtomKey, Facts};
