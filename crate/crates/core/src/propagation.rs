//! Slack computation and counter-based unit propagation.
//!
//! The slack of `sum(a_i * l_i) >= d` is the sum of the coefficients of
//! non-falsified literals minus `d`. A negative slack means the constraint is
//! conflicting; a literal whose coefficient exceeds the slack is propagated.
//! The engine keeps every constraint's slack up to date as literals are
//! assigned and unassigned, so no watch scheme is needed.

use std::collections::VecDeque;

use num_bigint::{BigInt, BigUint};
use num_traits::Signed;

use crate::constraint::{signed, Constraint};
use crate::literal::Literal;
use crate::trail::{Assignment, ConstraintId, Reason, Trail, TrailError};

/// Slack under the full partial assignment.
pub fn slack_current<A: Assignment + ?Sized>(c: &Constraint, assignment: &A) -> BigInt {
    let live: BigUint = c.terms().iter().filter(|t| !assignment.is_falsified(t.lit)).map(|t| &t.coef).sum();
    signed(&live) - signed(c.degree())
}

/// Slack treating every assignment made above `level` as undone.
pub fn slack_at_level<A: Assignment + ?Sized>(c: &Constraint, assignment: &A, level: u32) -> BigInt {
    let live: BigUint = c.terms().iter().filter(|t| !assignment.is_falsified_at(t.lit, level)).map(|t| &t.coef).sum();
    signed(&live) - signed(c.degree())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagationOutcome {
    NoConflict,
    Conflict(ConstraintId),
}

/// Constraint database plus incrementally maintained slacks.
#[derive(Debug, Clone, Default)]
pub struct Propagator {
    constraints: Vec<Constraint>,
    /// For each literal code, the constraints containing that literal and
    /// the index of the term.
    occurs: Vec<Vec<(ConstraintId, u32)>>,
    slack: Vec<BigInt>,
    max_coef: Vec<BigUint>,
    /// Constraints that need a full check (new ones).
    pending: VecDeque<ConstraintId>,
    qhead: usize,
}

impl Propagator {
    pub fn new(num_vars: u32) -> Self {
        Propagator { occurs: vec![Vec::new(); 2 * (num_vars as usize + 1)], ..Default::default() }
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn constraint(&self, id: ConstraintId) -> &Constraint {
        &self.constraints[id.index()]
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn slack(&self, id: ConstraintId) -> &BigInt {
        &self.slack[id.index()]
    }

    /// Adds a constraint, computing its slack against `trail`. It is checked
    /// on the next call to [`Propagator::propagate`].
    pub fn add_constraint(&mut self, c: Constraint, trail: &Trail) -> ConstraintId {
        let id = ConstraintId(self.constraints.len() as u32);
        for (i, t) in c.terms().iter().enumerate() {
            let code = t.lit.code();
            if code >= self.occurs.len() {
                self.occurs.resize(code + 2, Vec::new());
            }
            self.occurs[code].push((id, i as u32));
        }
        self.slack.push(slack_current(&c, trail));
        self.max_coef.push(c.terms().iter().map(|t| &t.coef).max().cloned().unwrap_or_default());
        self.constraints.push(c);
        self.pending.push_back(id);
        id
    }

    /// Assigns `lit` on the trail and updates slacks of the constraints
    /// containing its negation.
    pub fn assign(&mut self, trail: &mut Trail, lit: Literal, reason: Reason) -> Result<(), TrailError> {
        trail.assign(lit, reason)?;
        self.on_falsified(!lit, |slack, coef| *slack -= signed(coef));
        Ok(())
    }

    pub fn backjump(&mut self, trail: &mut Trail, level: u32) {
        for entry in trail.backjump_to(level).into_iter().rev() {
            self.on_falsified(!entry.lit, |slack, coef| *slack += signed(coef));
        }
        self.qhead = self.qhead.min(trail.len());
    }

    fn on_falsified(&mut self, lit: Literal, mut update: impl FnMut(&mut BigInt, &BigUint)) {
        let Some(occurrences) = self.occurs.get(lit.code()) else {
            return;
        };
        for &(id, term) in occurrences {
            let coef = &self.constraints[id.index()].terms()[term as usize].coef;
            update(&mut self.slack[id.index()], coef);
        }
    }

    /// Runs unit propagation to fixpoint. New constraints are checked first,
    /// then trail entries in FIFO order; the constraints affected by an entry
    /// are visited in id order.
    pub fn propagate(&mut self, trail: &mut Trail) -> PropagationOutcome {
        loop {
            if let Some(id) = self.pending.pop_front() {
                if let Some(conflict) = self.check(trail, id) {
                    return PropagationOutcome::Conflict(conflict);
                }
                continue;
            }
            let Some(entry) = trail.entries().get(self.qhead).copied() else {
                return PropagationOutcome::NoConflict;
            };
            self.qhead += 1;
            let falsified = !entry.lit;
            let mut ids: Vec<ConstraintId> = self
                .occurs
                .get(falsified.code())
                .map(|occ| occ.iter().map(|&(id, _)| id).collect())
                .unwrap_or_default();
            ids.sort_unstable();
            for id in ids {
                if let Some(conflict) = self.check(trail, id) {
                    return PropagationOutcome::Conflict(conflict);
                }
            }
        }
    }

    fn check(&mut self, trail: &mut Trail, id: ConstraintId) -> Option<ConstraintId> {
        let slack = self.slack[id.index()].clone();
        if slack.is_negative() {
            return Some(id);
        }
        if signed(&self.max_coef[id.index()]) <= slack {
            return None;
        }
        let forced: Vec<Literal> = self.constraints[id.index()]
            .terms()
            .iter()
            .filter(|t| signed(&t.coef) > slack && trail.query(t.lit.var()).is_none())
            .map(|t| t.lit)
            .collect();
        for lit in forced {
            self.assign(trail, lit, Reason::Propagated(id)).expect("forced literal was checked unassigned");
        }
        None
    }

    /// Recomputes every slack from scratch and compares with the maintained
    /// values.
    pub fn slacks_consistent(&self, trail: &Trail) -> bool {
        self.constraints.iter().zip(&self.slack).all(|(c, s)| &slack_current(c, trail) == s)
    }

    /// Checks that each propagated trail entry is implied by its reason under
    /// the trail prefix preceding it.
    pub fn reasons_valid(&self, trail: &Trail) -> bool {
        trail.entries().iter().enumerate().all(|(pos, e)| match e.reason {
            Reason::Decision => true,
            Reason::Propagated(id) => {
                let c = self.constraint(id);
                let Some(coef) = c.coef_of(e.lit) else {
                    return false;
                };
                let slack = slack_current(c, &trail.prefix(pos));
                !slack.is_negative() && signed(coef) > slack
            }
        })
    }
}
