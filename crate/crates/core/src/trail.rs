//! The assignment stack.
//!
//! Entries are ordered by decision level; there is no chronological
//! backtracking. Level 0 exists before any decision and only holds
//! propagations.

use std::fmt;

use thiserror::Error;

use crate::literal::{Literal, Var};

/// Index of a constraint in the solver's database.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConstraintId(pub u32);

impl ConstraintId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reason {
    Decision,
    Propagated(ConstraintId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrailEntry {
    /// The literal made true.
    pub lit: Literal,
    pub level: u32,
    pub reason: Reason,
}

/// State of an assigned variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarAssignment {
    pub value: bool,
    pub level: u32,
    pub reason: Reason,
    /// Position of the entry on the trail.
    pub position: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrailError {
    #[error("variable {0} is already assigned")]
    AlreadyAssigned(Var),
    #[error("variable {0} is out of range")]
    UnknownVariable(Var),
}

/// Read access to a partial assignment with decision levels.
///
/// Implemented by [`Trail`] and by [`TrailPrefix`], the view conflict
/// analysis uses while it undoes assignments from the top.
pub trait Assignment {
    fn var_state(&self, var: Var) -> Option<VarAssignment>;

    /// Highest decision level present.
    fn current_level(&self) -> u32;

    /// `Some((truth value of lit, level))` if assigned.
    fn lit_state(&self, lit: Literal) -> Option<(bool, u32)> {
        self.var_state(lit.var()).map(|a| (lit.eval(a.value), a.level))
    }

    fn is_falsified(&self, lit: Literal) -> bool {
        matches!(self.lit_state(lit), Some((false, _)))
    }

    /// Falsified by an assignment made at level `<= level`.
    fn is_falsified_at(&self, lit: Literal, level: u32) -> bool {
        matches!(self.lit_state(lit), Some((false, l)) if l <= level)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Trail {
    entries: Vec<TrailEntry>,
    vars: Vec<Option<VarAssignment>>,
    level: u32,
}

impl Trail {
    /// A trail over variables `1..=num_vars`.
    pub fn new(num_vars: u32) -> Self {
        Trail { entries: Vec::new(), vars: vec![None; num_vars as usize + 1], level: 0 }
    }

    pub fn num_vars(&self) -> u32 {
        (self.vars.len() - 1) as u32
    }

    pub fn entries(&self) -> &[TrailEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Makes `lit` true. A decision opens a new level; a propagation joins
    /// the current one.
    pub fn assign(&mut self, lit: Literal, reason: Reason) -> Result<(), TrailError> {
        let slot = self.vars.get_mut(lit.var().index() as usize).ok_or(TrailError::UnknownVariable(lit.var()))?;
        if slot.is_some() {
            return Err(TrailError::AlreadyAssigned(lit.var()));
        }
        if reason == Reason::Decision {
            self.level += 1;
        }
        *slot = Some(VarAssignment {
            value: lit.polarity(),
            level: self.level,
            reason,
            position: self.entries.len() as u32,
        });
        self.entries.push(TrailEntry { lit, level: self.level, reason });
        Ok(())
    }

    /// Removes every entry above `level` and returns them, most recent last.
    pub fn backjump_to(&mut self, level: u32) -> Vec<TrailEntry> {
        assert!(level <= self.level, "cannot backjump forward");
        let keep = self.entries.partition_point(|e| e.level <= level);
        let removed = self.entries.split_off(keep);
        for e in &removed {
            self.vars[e.lit.var().index() as usize] = None;
        }
        self.level = level;
        removed
    }

    pub fn query(&self, var: Var) -> Option<VarAssignment> {
        self.vars.get(var.index() as usize).copied().flatten()
    }

    /// View of the first `len` entries.
    pub fn prefix(&self, len: usize) -> TrailPrefix<'_> {
        assert!(len <= self.entries.len());
        TrailPrefix { trail: self, len }
    }

    /// One entry per line: `<lit> @<level> <reason-id|DEC>`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let reason = match e.reason {
                Reason::Decision => "DEC".to_string(),
                Reason::Propagated(id) => id.to_string(),
            };
            out.push_str(&format!("{} @{} {}\n", e.lit, e.level, reason));
        }
        out
    }
}

impl Assignment for Trail {
    fn var_state(&self, var: Var) -> Option<VarAssignment> {
        self.query(var)
    }

    fn current_level(&self) -> u32 {
        self.level
    }
}

/// The trail restricted to its first `len` entries.
#[derive(Debug, Clone, Copy)]
pub struct TrailPrefix<'a> {
    trail: &'a Trail,
    len: usize,
}

impl<'a> TrailPrefix<'a> {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn top(&self) -> Option<&'a TrailEntry> {
        self.len.checked_sub(1).map(|i| &self.trail.entries[i])
    }

    /// Undoes the top entry and returns it.
    pub fn pop(&mut self) -> Option<&'a TrailEntry> {
        let top = self.top()?;
        self.len -= 1;
        Some(top)
    }
}

impl Assignment for TrailPrefix<'_> {
    fn var_state(&self, var: Var) -> Option<VarAssignment> {
        self.trail.query(var).filter(|a| (a.position as usize) < self.len)
    }

    fn current_level(&self) -> u32 {
        self.top().map_or(0, |e| e.level)
    }
}
