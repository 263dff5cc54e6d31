//! Regular conflict analysis by generalized resolution.
//!
//! The trail is walked backward from the top. Each propagated literal whose
//! negation occurs in the working constraint is cancelled with its reason,
//! after the reason has been weakened enough for the result to stay
//! conflicting. Analysis stops at the first assertive constraint.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Signed;
use thiserror::Error;

use crate::constraint::{lcm_multipliers, signed, Constraint, ConstraintError};
use crate::literal::Literal;
use crate::propagation::{slack_at_level, slack_current};
use crate::trail::{Assignment, ConstraintId, Reason, TrailPrefix};

/// Where a constraint first propagates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssertionInfo {
    pub level: u32,
    /// Literals the constraint propagates at `level`, in variable order.
    pub propagated: Vec<Literal>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Assertion {
    Assertive(AssertionInfo),
    ConflictingAt(u32),
    NotAssertive,
}

/// Scans decision levels upward and reports the first one at which `c` is
/// either conflicting or propagates a literal that is still unassigned there.
pub fn first_assertive_level<A: Assignment + ?Sized>(c: &Constraint, assignment: &A) -> Assertion {
    assertion_up_to(c, assignment, assignment.current_level())
}

/// [`first_assertive_level`] restricted to levels `<= max_level`.
pub fn assertion_up_to<A: Assignment + ?Sized>(c: &Constraint, assignment: &A, max_level: u32) -> Assertion {
    // The status can only change at levels where one of c's literals gets
    // assigned, so those (and level 0) are the only candidates.
    let mut levels: Vec<u32> = c
        .terms()
        .iter()
        .filter_map(|t| assignment.lit_state(t.lit).map(|(_, l)| l))
        .filter(|&l| l <= max_level)
        .collect();
    levels.push(0);
    levels.sort_unstable();
    levels.dedup();
    for level in levels {
        let slack = slack_at_level(c, assignment, level);
        if slack.is_negative() {
            return Assertion::ConflictingAt(level);
        }
        let propagated: Vec<Literal> = c
            .terms()
            .iter()
            .filter(|t| signed(&t.coef) > slack)
            .filter(|t| !matches!(assignment.lit_state(t.lit), Some((_, l)) if l <= level))
            .map(|t| t.lit)
            .collect();
        if !propagated.is_empty() {
            return Assertion::Assertive(AssertionInfo { level, propagated });
        }
    }
    Assertion::NotAssertive
}

/// Weakens `reason` until cancelling it with `conflict` on `pivot` is
/// guaranteed to stay conflicting.
///
/// `pivot` occurs in `conflict`; its negation in `reason`. The guarantee uses
/// subadditivity of the slack: the result's slack is at most
/// `mu * slack(conflict) + nu * slack(reason)`. Non-falsified literals other
/// than the propagated one are weakened away smallest coefficient first,
/// saturating after each step. Returns `None` if the reason degenerates to a
/// tautology.
pub fn reduce_reason<A: Assignment + ?Sized>(
    conflict: &Constraint,
    reason: &Constraint,
    pivot: Literal,
    assignment: &A,
) -> Result<Option<Constraint>, ConstraintError> {
    let alpha = conflict.coef_of(pivot).ok_or(ConstraintError::PivotAbsent(pivot))?;
    let conflict_slack = slack_current(conflict, assignment);
    let mut reduced = reason.clone();
    loop {
        let beta = reduced.coef_of(!pivot).ok_or(ConstraintError::PivotAbsent(pivot))?;
        let (mu, nu) = lcm_multipliers(alpha, beta);
        let estimate: BigInt = signed(&mu) * &conflict_slack + signed(&nu) * slack_current(&reduced, assignment);
        if estimate.is_negative() {
            return Ok(Some(reduced));
        }
        let pick = reduced
            .terms()
            .iter()
            .filter(|t| t.lit != !pivot && !assignment.is_falsified(t.lit))
            .min_by(|a, b| a.coef.cmp(&b.coef).then(a.lit.var().cmp(&b.lit.var())))
            .map(|t| t.lit);
        let Some(lit) = pick else {
            return Ok(Some(reduced));
        };
        reduced = reduced.weaken(lit)?.saturate();
        if reduced.is_tautology() {
            return Ok(None);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("malformed solver state: {0}")]
    MalformedState(String),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnalysisOutcome {
    Learned { constraint: Constraint, info: AssertionInfo },
    Unsat,
}

/// One committed cancellation step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub pivot: Literal,
    pub reason: ConstraintId,
    pub result: Constraint,
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CANCEL {} {} -> {}", self.pivot, self.reason, self.result)
    }
}

/// Mutable state of one conflict analysis: the shrinking trail view, the
/// cancellation counter and an optional derivation log.
#[derive(Debug)]
pub struct Analyzer<'a> {
    constraints: &'a [Constraint],
    view: TrailPrefix<'a>,
    cancellations: u64,
    log: Option<Vec<Derivation>>,
}

impl<'a> Analyzer<'a> {
    pub fn new(constraints: &'a [Constraint], view: TrailPrefix<'a>) -> Self {
        Analyzer { constraints, view, cancellations: 0, log: None }
    }

    pub fn with_log(mut self) -> Self {
        self.log = Some(Vec::new());
        self
    }

    pub fn view(&self) -> &TrailPrefix<'a> {
        &self.view
    }

    pub(crate) fn view_mut(&mut self) -> &mut TrailPrefix<'a> {
        &mut self.view
    }

    pub fn cancellations(&self) -> u64 {
        self.cancellations
    }

    pub fn derivations(&self) -> &[Derivation] {
        self.log.as_deref().unwrap_or(&[])
    }

    pub fn take_derivations(&mut self) -> Vec<Derivation> {
        self.log.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub(crate) fn reason(&self, id: ConstraintId) -> &'a Constraint {
        &self.constraints[id.index()]
    }

    pub(crate) fn record(&mut self, pivot: Literal, reason: ConstraintId, result: &Constraint) {
        self.cancellations += 1;
        if let Some(log) = &mut self.log {
            log.push(Derivation { pivot, reason, result: result.clone() });
        }
    }

    /// Resolves `conflict` backward along the view until it is assertive.
    pub fn analyze(&mut self, conflict: Constraint) -> Result<AnalysisOutcome, AnalysisError> {
        let mut current = conflict;
        loop {
            match first_assertive_level(&current, &self.view) {
                Assertion::ConflictingAt(0) => {
                    self.refute(current)?;
                    return Ok(AnalysisOutcome::Unsat);
                }
                Assertion::Assertive(info) => return Ok(AnalysisOutcome::Learned { constraint: current, info }),
                Assertion::ConflictingAt(_) | Assertion::NotAssertive => {}
            }
            let Some(&entry) = self.view.top() else {
                return Err(AnalysisError::MalformedState(
                    "trail exhausted before an assertive constraint was derived".into(),
                ));
            };
            let pivot = !entry.lit;
            if current.contains(pivot) {
                match entry.reason {
                    Reason::Propagated(id) => {
                        let reason = self.reason(id);
                        let reduced = reduce_reason(&current, reason, pivot, &self.view)?.ok_or_else(|| {
                            AnalysisError::MalformedState(format!(
                                "reason {id} for {} weakened to a tautology",
                                entry.lit
                            ))
                        })?;
                        current = current.cancel(&reduced, pivot)?;
                        debug_assert!(
                            slack_current(&current, &self.view).is_negative(),
                            "conflict lost after cancelling {pivot}"
                        );
                        self.record(pivot, id, &current);
                    }
                    Reason::Decision => {
                        let below = entry.level - 1;
                        if !slack_at_level(&current, &self.view, below).is_negative() {
                            return Err(AnalysisError::MalformedState(format!(
                                "decision {} at the conflict level has no reason",
                                entry.lit
                            )));
                        }
                    }
                }
            }
            self.view.pop();
        }
    }
}

impl Analyzer<'_> {
    /// Completes a refutation from a constraint that is conflicting at level
    /// 0: every literal in it is falsified by a root propagation, so
    /// cancelling them all away ends in `0 >= 1`.
    pub fn refute(&mut self, conflict: Constraint) -> Result<Constraint, AnalysisError> {
        let mut current = self.drop_unfalsified_at_root(conflict)?;
        while !current.is_empty() {
            let Some(&entry) = self.view.top() else {
                return Err(AnalysisError::MalformedState("root trail exhausted during refutation".into()));
            };
            let pivot = !entry.lit;
            if entry.level == 0 && current.contains(pivot) {
                let Reason::Propagated(id) = entry.reason else {
                    return Err(AnalysisError::MalformedState(format!("decision {} at level 0", entry.lit)));
                };
                let reduced = reduce_reason(&current, self.reason(id), pivot, &self.view)?.ok_or_else(|| {
                    AnalysisError::MalformedState(format!("reason {id} for {} weakened to a tautology", entry.lit))
                })?;
                current = current.cancel(&reduced, pivot)?;
                self.record(pivot, id, &current);
                current = self.drop_unfalsified_at_root(current)?;
            }
            self.view.pop();
        }
        debug_assert!(current.is_contradiction());
        Ok(current)
    }

    /// Weakens away literals not falsified at level 0. Both sides of the
    /// slack drop by the same amount, so the constraint stays conflicting.
    fn drop_unfalsified_at_root(&self, mut c: Constraint) -> Result<Constraint, AnalysisError> {
        let loose: Vec<Literal> =
            c.terms().iter().map(|t| t.lit).filter(|&l| !self.view.is_falsified_at(l, 0)).collect();
        for lit in loose {
            c = c.weaken(lit)?;
        }
        if c.is_tautology() {
            return Err(AnalysisError::MalformedState("refutation lost its conflict".into()));
        }
        Ok(c.saturate())
    }
}

/// Regular analysis of `conflict` against the full `trail` view.
pub fn analyze_conflict(
    conflict: Constraint,
    constraints: &[Constraint],
    view: TrailPrefix<'_>,
) -> Result<(AnalysisOutcome, u64), AnalysisError> {
    let mut analyzer = Analyzer::new(constraints, view);
    let outcome = analyzer.analyze(conflict)?;
    Ok((outcome, analyzer.cancellations()))
}
