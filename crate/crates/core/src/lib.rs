//! Stationary solutions of stochastic recursions `X∘θ = φ(X)` on a finite
//! cyclic base, without any monotonicity assumption on `φ`.
//!
//! The [`backwards`] module runs the backwards scheme and builds the
//! stationary extension; [`monotone`] holds Loynes' scheme and related checks;
//! [`queueing`] instantiates everything for the loss queue and the queue with
//! impatient customers.

pub mod backwards;
pub mod error;
pub mod monotone;
pub mod queueing;
pub mod rational;
pub mod system;

pub use backwards::{
    backwards_run, default_max_sweeps, extension_measure, image_at_horizon, invariant_sets, period_permutation,
    solves_recursion, stationary_solutions, verify_structure, Atom, BackwardsRun, Cardinal, ExtensionMeasure,
    InvariantFamily, InvariantSets, PeriodPermutation, RandomSet, Selection, StructureReport,
};
pub use error::{Error, Result};
pub use monotone::{
    condition_v_horizon, condition_v_violation, dominates, loynes_solve, order_checks, verify_condition_v,
    ConditionVViolation, Continuity, ImproperReason, LoynesOutcome, MonotoneSolveResult, OrderReport,
};
pub use rational::{format_rational, parse_rational, Exact, Rational};
pub use system::{DrivingMap, FiniteCyclicSystem, Sample, State, StateLattice};
