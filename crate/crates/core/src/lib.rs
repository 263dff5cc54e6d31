//! Pseudo-Boolean CDCL solving with generalized-resolution conflict analysis
//! that can keep going past the first assertive constraint to find lower
//! backjump levels.

pub mod analysis;
pub mod constraint;
pub mod extended;
pub mod generators;
pub mod harness;
pub mod literal;
pub mod opb;
pub mod propagation;
pub mod raw;
pub mod solver;
pub mod trail;

pub use analysis::{analyze_conflict, first_assertive_level, AnalysisError, AnalysisOutcome, Assertion, AssertionInfo};
pub use constraint::{Constraint, ConstraintError, Term};
pub use extended::{AnalysisConfig, ConfigError, Fraction, Mode, StopCriterion, WeakeningStrategy};
pub use literal::{Literal, Var};
pub use opb::{parse_opb, write_opb, OpbError, OpbInstance};
pub use raw::{RawConstraint, Relation};
pub use solver::{solve, Formula, Heuristic, Limits, Model, RunStats, SolveError, SolveResult, Solver, Verdict};
pub use trail::{ConstraintId, Reason, Trail, TrailEntry};
