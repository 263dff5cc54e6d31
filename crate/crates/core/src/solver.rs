//! The CDCL loop: propagate, analyze, learn, backjump, decide.
//!
//! No restarts and no deletion of learned constraints, so runs are fully
//! determined by the formula, the analysis configuration and the heuristic.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{AnalysisError, AnalysisOutcome, Analyzer, Derivation};
use crate::constraint::Constraint;
use crate::extended::{analyze_with_config, AnalysisConfig, ExtendedOutcome};
use crate::literal::{Literal, Var};
use crate::propagation::{PropagationOutcome, Propagator};
use crate::raw::RawConstraint;
use crate::trail::{Assignment, ConstraintId, Reason, Trail, TrailError};

/// A set of normalized constraints over variables `1..=num_vars`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Formula {
    num_vars: u32,
    constraints: Vec<Constraint>,
}

impl Formula {
    pub fn new(num_vars: u32, constraints: Vec<Constraint>) -> Self {
        let max = constraints.iter().flat_map(|c| c.terms().iter().map(|t| t.lit.var().index())).max().unwrap_or(0);
        Formula { num_vars: num_vars.max(max), constraints }
    }

    /// Normalizes raw constraints; equalities contribute two constraints.
    pub fn from_raw(num_vars: u32, raw: &[RawConstraint]) -> Self {
        Formula::new(num_vars, raw.iter().flat_map(RawConstraint::normalize).collect())
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn is_satisfied_by(&self, model: &Model) -> bool {
        self.constraints.iter().all(|c| c.is_satisfied_by(|v| model.value(v)))
    }
}

/// A total assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Model(Vec<bool>);

impl Model {
    pub fn value(&self, var: Var) -> bool {
        self.0[var.index() as usize - 1]
    }

    pub fn literals(&self) -> impl Iterator<Item = Literal> + '_ {
        self.0.iter().enumerate().map(|(i, &b)| Literal::new(Var::new(i as u32 + 1), b))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Heuristic {
    /// Lowest unassigned variable, negative polarity.
    #[default]
    FixedOrder,
    /// Decide the listed literals in order (skipping assigned ones). When the
    /// list runs out, fall back to [`Heuristic::FixedOrder`] if `fallback`
    /// is set, otherwise fail with [`SolveError::ScriptExhausted`].
    Scripted { decisions: Vec<Literal>, fallback: bool },
}

impl Heuristic {
    pub fn scripted(decisions: Vec<Literal>) -> Self {
        Heuristic::Scripted { decisions, fallback: false }
    }

    pub fn script_then_fixed(decisions: Vec<Literal>) -> Self {
        Heuristic::Scripted { decisions, fallback: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Limits {
    pub max_conflicts: Option<u64>,
    pub time_limit: Option<Duration>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RunStats {
    pub conflicts: u64,
    pub cancellations: u64,
    /// Conflicts whose final backjump level is strictly below the first
    /// assertive level.
    pub improved_backjumps: u64,
    pub total_backjumps: u64,
    pub decisions: u64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Satisfiable(Model),
    Unsatisfiable,
    /// A resource limit was hit.
    Unknown,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Satisfiable(_) => "SAT",
            Verdict::Unsatisfiable => "UNSAT",
            Verdict::Unknown => "UNKNOWN",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub verdict: Verdict,
    pub stats: RunStats,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("decision script exhausted with unassigned variables left")]
    ScriptExhausted,
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Trail(#[from] TrailError),
}

/// What happened during one conflict analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictRecord {
    pub conflict: ConstraintId,
    pub level: u32,
    /// Committed assertion levels; empty when the conflict proved
    /// unsatisfiability before any assertive constraint was found.
    pub committed_levels: Vec<u32>,
    /// `None` when the analysis proved unsatisfiability.
    pub learned: Option<Constraint>,
    pub derivations: Vec<Derivation>,
}

#[derive(Debug)]
pub struct Solver {
    engine: Propagator,
    trail: Trail,
    num_inputs: usize,
    config: AnalysisConfig,
    heuristic: Heuristic,
    script_pos: usize,
    limits: Limits,
    stats: RunStats,
    recording: bool,
    records: Vec<ConflictRecord>,
}

impl Solver {
    /// Input constraints are saturated; tautologies are dropped.
    pub fn new(formula: &Formula, config: AnalysisConfig) -> Self {
        let trail = Trail::new(formula.num_vars());
        let mut engine = Propagator::new(formula.num_vars());
        for c in formula.constraints() {
            let c = c.saturate();
            if !c.is_tautology() {
                engine.add_constraint(c, &trail);
            }
        }
        let num_inputs = engine.len();
        Solver {
            engine,
            trail,
            num_inputs,
            config,
            heuristic: Heuristic::FixedOrder,
            script_pos: 0,
            limits: Limits::default(),
            stats: RunStats::default(),
            recording: false,
            records: Vec::new(),
        }
    }

    pub fn with_heuristic(mut self, heuristic: Heuristic) -> Self {
        self.heuristic = heuristic;
        self
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    /// Keep a [`ConflictRecord`] with the derivation log for every conflict.
    pub fn recording(mut self, on: bool) -> Self {
        self.recording = on;
        self
    }

    pub fn trail(&self) -> &Trail {
        &self.trail
    }

    pub fn constraints(&self) -> &[Constraint] {
        self.engine.constraints()
    }

    pub fn learned(&self) -> &[Constraint] {
        &self.engine.constraints()[self.num_inputs..]
    }

    pub fn records(&self) -> &[ConflictRecord] {
        &self.records
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    pub fn engine(&self) -> &Propagator {
        &self.engine
    }

    /// Adds `c` to the database; it propagates once the caller has
    /// backjumped to its assertion level.
    pub fn learn(&mut self, c: Constraint) -> ConstraintId {
        self.engine.add_constraint(c, &self.trail)
    }

    /// Next decision, or `None` when every variable is assigned.
    pub fn decide(&mut self) -> Result<Option<Literal>, SolveError> {
        if let Heuristic::Scripted { decisions, fallback } = &self.heuristic {
            while let Some(&lit) = decisions.get(self.script_pos) {
                self.script_pos += 1;
                if self.trail.query(lit.var()).is_none() {
                    return Ok(Some(lit));
                }
            }
            if !fallback {
                return match self.first_unassigned() {
                    Some(_) => Err(SolveError::ScriptExhausted),
                    None => Ok(None),
                };
            }
        }
        Ok(self.first_unassigned().map(Var::negative))
    }

    fn first_unassigned(&self) -> Option<Var> {
        (1..=self.trail.num_vars()).map(Var::new).find(|&v| self.trail.query(v).is_none())
    }

    fn model(&self) -> Model {
        Model((1..=self.trail.num_vars()).map(|v| self.trail.query(Var::new(v)).is_some_and(|a| a.value)).collect())
    }

    fn finish(&mut self, verdict: Verdict, start: Instant) -> SolveResult {
        self.stats.wall_time += start.elapsed();
        SolveResult { verdict, stats: self.stats }
    }

    pub fn solve(&mut self) -> Result<SolveResult, SolveError> {
        let start = Instant::now();
        loop {
            match self.engine.propagate(&mut self.trail) {
                PropagationOutcome::Conflict(id) => {
                    self.stats.conflicts += 1;
                    let level = self.trail.current_level();
                    let conflict = self.engine.constraint(id).clone();
                    let mut analyzer = Analyzer::new(self.engine.constraints(), self.trail.prefix(self.trail.len()));
                    if self.recording {
                        analyzer = analyzer.with_log();
                    }
                    let result = if level == 0 {
                        analyzer.refute(conflict)?;
                        ExtendedOutcome { outcome: AnalysisOutcome::Unsat, committed_levels: Vec::new() }
                    } else {
                        analyze_with_config(&mut analyzer, conflict, &self.config)?
                    };
                    self.stats.cancellations += analyzer.cancellations();
                    let derivations = analyzer.take_derivations();
                    let learned = match &result.outcome {
                        AnalysisOutcome::Unsat => None,
                        AnalysisOutcome::Learned { constraint, .. } => Some(constraint.clone()),
                    };
                    if self.recording {
                        self.records.push(ConflictRecord {
                            conflict: id,
                            level,
                            committed_levels: result.committed_levels.clone(),
                            learned,
                            derivations,
                        });
                    }
                    match result.outcome {
                        AnalysisOutcome::Unsat => return Ok(self.finish(Verdict::Unsatisfiable, start)),
                        AnalysisOutcome::Learned { constraint, info } => {
                            self.stats.total_backjumps += 1;
                            if result.committed_levels.first().is_some_and(|&first| info.level < first) {
                                self.stats.improved_backjumps += 1;
                            }
                            self.engine.backjump(&mut self.trail, info.level);
                            self.learn(constraint);
                        }
                    }
                    if self.limits.max_conflicts.is_some_and(|max| self.stats.conflicts >= max) {
                        return Ok(self.finish(Verdict::Unknown, start));
                    }
                }
                PropagationOutcome::NoConflict => {
                    if self.limits.time_limit.is_some_and(|limit| start.elapsed() >= limit) {
                        return Ok(self.finish(Verdict::Unknown, start));
                    }
                    match self.decide()? {
                        Some(lit) => {
                            self.stats.decisions += 1;
                            self.engine.assign(&mut self.trail, lit, Reason::Decision)?;
                        }
                        None => {
                            let model = self.model();
                            return Ok(self.finish(Verdict::Satisfiable(model), start));
                        }
                    }
                }
            }
        }
    }
}

/// Solves `formula` from scratch.
pub fn solve(formula: &Formula, config: AnalysisConfig, heuristic: Heuristic) -> Result<SolveResult, SolveError> {
    Solver::new(formula, config).with_heuristic(heuristic).solve()
}
