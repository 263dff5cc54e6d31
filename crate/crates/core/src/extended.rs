//! Continuing conflict analysis past the first assertive constraint.
//!
//! Once an assertive constraint at level `b` has been derived, further
//! cancellations are only committed when the result is still assertive at
//! some level `<= b` or conflicting at `b`; the backjump level therefore
//! never gets worse. When a candidate breaks that invariant the reason can be
//! weakened (per [`WeakeningStrategy`]) or the step skipped. A
//! [`StopCriterion`] decides when to give up looking for a better level.

use std::fmt;
use std::str::FromStr;

use num_traits::Signed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{assertion_up_to, AnalysisError, AnalysisOutcome, Analyzer, Assertion, AssertionInfo};
use crate::constraint::{Constraint, ConstraintError};
use crate::literal::Literal;
use crate::propagation::slack_at_level;
use crate::trail::{Assignment, Reason};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum WeakeningStrategy {
    /// Skip any cancellation that breaks the invariant.
    NeverWeaken,
    /// Weaken reason literals in variable order until the invariant holds.
    #[default]
    WeakenAny,
    /// Weaken unassigned literals first, then by increasing level.
    WeakenOrdered,
}

/// A fraction in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fraction {
    num: u32,
    den: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("fraction must lie in (0, 1], got `{0}`")]
    BadFraction(String),
    #[error("unknown weakening strategy `{0}`")]
    UnknownWeakening(String),
    #[error("unknown stop criterion `{0}`")]
    UnknownStop(String),
    #[error("unknown analysis configuration `{0}`")]
    UnknownConfig(String),
}

impl Fraction {
    pub fn new(num: u32, den: u32) -> Result<Self, ConfigError> {
        if num == 0 || den == 0 || num > den {
            return Err(ConfigError::BadFraction(format!("{num}/{den}")));
        }
        Ok(Fraction { num, den })
    }

    pub fn one_tenth() -> Self {
        Fraction { num: 1, den: 10 }
    }

    /// `ceil(self * level)`.
    pub fn ceil_of(self, level: u32) -> u32 {
        let p = u64::from(self.num) * u64::from(level);
        p.div_ceil(u64::from(self.den)) as u32
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Fraction {
    type Err = ConfigError;

    /// Accepts `1/10`, `0.1` or `1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ConfigError::BadFraction(s.to_string());
        if let Some((n, d)) = s.split_once('/') {
            let n = n.trim().parse().map_err(|_| bad())?;
            let d = d.trim().parse().map_err(|_| bad())?;
            return Fraction::new(n, d).map_err(|_| bad());
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 9 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let int: u32 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let den = 10u32.pow(frac.len() as u32);
        let frac: u32 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let num = int.checked_mul(den).and_then(|v| v.checked_add(frac)).ok_or_else(bad)?;
        let g = gcd(num, den).max(1);
        Fraction::new(num / g, den / g).map_err(|_| bad())
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum StopCriterion {
    /// Stop once every assignment above the assertion level is undone.
    #[default]
    UntilBjLevel,
    /// Also stop as soon as the assertion level is 0.
    UntilTopLevel,
    /// Also stop once the assertion level is at most `ceil(fraction * top)`
    /// where `top` is the highest level left on the trail.
    UntilHighLevel(Fraction),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Mode {
    #[default]
    Regular,
    Extended,
}

/// Weakening and stop settings are ignored in [`Mode::Regular`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub mode: Mode,
    pub weakening: WeakeningStrategy,
    pub stop: StopCriterion,
}

impl AnalysisConfig {
    pub fn regular() -> Self {
        AnalysisConfig::default()
    }

    pub fn extended(weakening: WeakeningStrategy, stop: StopCriterion) -> Self {
        AnalysisConfig { mode: Mode::Extended, weakening, stop }
    }

    /// The regular configuration followed by every extended combination.
    pub fn all() -> Vec<AnalysisConfig> {
        let mut out = vec![AnalysisConfig::regular()];
        for w in [WeakeningStrategy::NeverWeaken, WeakeningStrategy::WeakenAny, WeakeningStrategy::WeakenOrdered] {
            for s in [
                StopCriterion::UntilBjLevel,
                StopCriterion::UntilTopLevel,
                StopCriterion::UntilHighLevel(Fraction::one_tenth()),
            ] {
                out.push(AnalysisConfig::extended(w, s));
            }
        }
        out
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Regular => "regular",
            Mode::Extended => "extended",
        })
    }
}

impl FromStr for Mode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "regular" => Ok(Mode::Regular),
            "extended" => Ok(Mode::Extended),
            _ => Err(ConfigError::UnknownConfig(s.to_string())),
        }
    }
}

impl fmt::Display for WeakeningStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeakeningStrategy::NeverWeaken => "never-weaken",
            WeakeningStrategy::WeakenAny => "weaken-any",
            WeakeningStrategy::WeakenOrdered => "weaken-ordered",
        })
    }
}

impl FromStr for WeakeningStrategy {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "never-weaken" | "never" => Ok(WeakeningStrategy::NeverWeaken),
            "weaken-any" | "any" => Ok(WeakeningStrategy::WeakenAny),
            "weaken-ordered" | "ordered" => Ok(WeakeningStrategy::WeakenOrdered),
            _ => Err(ConfigError::UnknownWeakening(s.to_string())),
        }
    }
}

impl fmt::Display for StopCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopCriterion::UntilBjLevel => f.write_str("until-bjlevel"),
            StopCriterion::UntilTopLevel => f.write_str("until-toplevel"),
            StopCriterion::UntilHighLevel(r) if *r == Fraction::one_tenth() => f.write_str("until-highlevel"),
            StopCriterion::UntilHighLevel(r) => write!(f, "until-highlevel({r})"),
        }
    }
}

impl FromStr for StopCriterion {
    type Err = ConfigError;

    /// `until-bjlevel`, `until-toplevel`, `until-highlevel` or
    /// `until-highlevel(R)`; the `until-` prefix is optional.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let name = s.strip_prefix("until-").unwrap_or(s);
        match name {
            "bjlevel" => Ok(StopCriterion::UntilBjLevel),
            "toplevel" => Ok(StopCriterion::UntilTopLevel),
            "highlevel" => Ok(StopCriterion::UntilHighLevel(Fraction::one_tenth())),
            _ => {
                let arg = name
                    .strip_prefix("highlevel(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| ConfigError::UnknownStop(s.to_string()))?;
                Ok(StopCriterion::UntilHighLevel(arg.parse()?))
            }
        }
    }
}

impl fmt::Display for AnalysisConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mode {
            Mode::Regular => f.write_str("regular"),
            Mode::Extended => write!(f, "extended/{}/{}", self.weakening, self.stop),
        }
    }
}

impl FromStr for AnalysisConfig {
    type Err = ConfigError;

    /// `regular` or `extended/<weakening>/<stop>`; `:` also works as a
    /// separator and omitted parts take their defaults.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.splitn(3, ['/', ':']);
        match parts.next().map(str::parse::<Mode>).transpose()? {
            Some(Mode::Regular) if parts.next().is_none() => Ok(AnalysisConfig::regular()),
            Some(Mode::Extended) => {
                let weakening = parts.next().map(str::parse).transpose()?.unwrap_or_default();
                let stop = parts.next().map(str::parse).transpose()?.unwrap_or_default();
                Ok(AnalysisConfig::extended(weakening, stop))
            }
            _ => Err(ConfigError::UnknownConfig(s.to_string())),
        }
    }
}

/// Outcome of checking a candidate against the non-worsening invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InvariantStatus {
    /// Assertive at `info.level <= b`.
    Assertive(AssertionInfo),
    /// Conflicting at the given level `<= b`.
    Conflicting(u32),
    Violated,
}

/// The constraint a cancellation would produce, without committing it.
pub fn candidate_result(
    current: &Constraint,
    reason: &Constraint,
    pivot: Literal,
) -> Result<Constraint, ConstraintError> {
    current.cancel(reason, pivot)
}

/// Checks `candidate` against the invariant at level `b`, using exact
/// slacks. Tautologies never satisfy it.
pub fn invariant_holds<A: Assignment + ?Sized>(candidate: &Constraint, assignment: &A, b: u32) -> InvariantStatus {
    if candidate.is_tautology() {
        return InvariantStatus::Violated;
    }
    match assertion_up_to(candidate, assignment, b) {
        Assertion::Assertive(info) => InvariantStatus::Assertive(info),
        Assertion::ConflictingAt(level) => InvariantStatus::Conflicting(level),
        Assertion::NotAssertive => {
            if slack_at_level(candidate, assignment, b).is_negative() {
                InvariantStatus::Conflicting(b)
            } else {
                InvariantStatus::Violated
            }
        }
    }
}

/// A reason weakened so that its cancellation satisfies the invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Restored {
    pub reason: Constraint,
    pub candidate: Constraint,
    pub status: InvariantStatus,
    pub weakened: Vec<Literal>,
}

/// Weakens `reason` according to `strategy` until cancelling it with
/// `current` on `pivot` satisfies the invariant at `b`. `None` means the
/// cancellation should be skipped.
pub fn restore_invariant<A: Assignment + ?Sized>(
    current: &Constraint,
    reason: &Constraint,
    pivot: Literal,
    assignment: &A,
    b: u32,
    strategy: WeakeningStrategy,
) -> Result<Option<Restored>, ConstraintError> {
    if strategy == WeakeningStrategy::NeverWeaken {
        return Ok(None);
    }
    let mut reduced = reason.clone();
    let mut weakened = Vec::new();
    loop {
        let mut choices: Vec<(u32, u32, Literal)> = reduced
            .terms()
            .iter()
            .filter(|t| t.lit != !pivot && !assignment.is_falsified_at(t.lit, b))
            .map(|t| {
                let rank = match strategy {
                    WeakeningStrategy::WeakenOrdered => match assignment.lit_state(t.lit) {
                        None => (0, 0),
                        Some((_, level)) => (1, level),
                    },
                    _ => (0, 0),
                };
                (rank.0, rank.1, t.lit)
            })
            .collect();
        choices.sort_by_key(|&(a, l, lit)| (a, l, lit.var()));
        let Some(&(_, _, lit)) = choices.first() else {
            return Ok(None);
        };
        reduced = reduced.weaken(lit)?.saturate();
        weakened.push(lit);
        if reduced.is_tautology() {
            return Ok(None);
        }
        let candidate = candidate_result(current, &reduced, pivot)?;
        let status = invariant_holds(&candidate, assignment, b);
        if status != InvariantStatus::Violated {
            return Ok(Some(Restored { reason: reduced, candidate, status, weakened }));
        }
    }
}

/// Whether extended analysis should stop with assertion level `b`.
pub fn should_stop<A: Assignment + ?Sized>(
    assignment: &A,
    b: u32,
    criterion: StopCriterion,
    conflicting_at_root: bool,
) -> bool {
    if conflicting_at_root {
        return true;
    }
    let top = assignment.current_level();
    if top <= b {
        return true;
    }
    match criterion {
        StopCriterion::UntilBjLevel => false,
        StopCriterion::UntilTopLevel => b == 0,
        StopCriterion::UntilHighLevel(fraction) => b <= fraction.ceil_of(top),
    }
}

/// Result of a full (regular + extended) analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedOutcome {
    pub outcome: AnalysisOutcome,
    /// Assertion levels in commit order, starting with the first assertive
    /// level. Non-increasing.
    pub committed_levels: Vec<u32>,
}

/// Continues from `first`, assertive at `info.level`, consuming the
/// analyzer's trail view from the top.
pub fn continue_analysis(
    analyzer: &mut Analyzer<'_>,
    first: Constraint,
    info: AssertionInfo,
    config: &AnalysisConfig,
) -> Result<ExtendedOutcome, AnalysisError> {
    let mut current = first;
    let mut info = info;
    let mut levels = vec![info.level];
    loop {
        if should_stop(analyzer.view(), info.level, config.stop, false) {
            break;
        }
        let Some(&entry) = analyzer.view().top() else {
            break;
        };
        let pivot = !entry.lit;
        let reason_id = match entry.reason {
            Reason::Propagated(id) if current.contains(pivot) => id,
            _ => {
                analyzer.view_mut().pop();
                continue;
            }
        };
        let reason = analyzer.reason(reason_id);
        let b = info.level;
        let mut candidate = candidate_result(&current, reason, pivot)?;
        let mut status = invariant_holds(&candidate, analyzer.view(), b);
        if status == InvariantStatus::Violated {
            match restore_invariant(&current, reason, pivot, analyzer.view(), b, config.weakening)? {
                Some(restored) => {
                    candidate = restored.candidate;
                    status = restored.status;
                }
                None => {
                    analyzer.view_mut().pop();
                    continue;
                }
            }
        }
        analyzer.record(pivot, reason_id, &candidate);
        analyzer.view_mut().pop();
        match status {
            InvariantStatus::Assertive(new_info) => {
                current = candidate;
                info = new_info;
            }
            InvariantStatus::Conflicting(0) => {
                analyzer.refute(candidate)?;
                return Ok(ExtendedOutcome { outcome: AnalysisOutcome::Unsat, committed_levels: levels });
            }
            InvariantStatus::Conflicting(_) => match analyzer.analyze(candidate)? {
                AnalysisOutcome::Unsat => {
                    return Ok(ExtendedOutcome { outcome: AnalysisOutcome::Unsat, committed_levels: levels });
                }
                AnalysisOutcome::Learned { constraint, info: new_info } => {
                    current = constraint;
                    info = new_info;
                }
            },
            InvariantStatus::Violated => unreachable!("violated candidates are skipped"),
        }
        assert!(info.level <= b, "backjump level worsened from {b} to {}", info.level);
        levels.push(info.level);
    }
    Ok(ExtendedOutcome { outcome: AnalysisOutcome::Learned { constraint: current, info }, committed_levels: levels })
}

/// Regular analysis of `conflict`, followed by continuation when `config`
/// asks for it.
pub fn analyze_with_config(
    analyzer: &mut Analyzer<'_>,
    conflict: Constraint,
    config: &AnalysisConfig,
) -> Result<ExtendedOutcome, AnalysisError> {
    match analyzer.analyze(conflict)? {
        AnalysisOutcome::Unsat => Ok(ExtendedOutcome { outcome: AnalysisOutcome::Unsat, committed_levels: Vec::new() }),
        AnalysisOutcome::Learned { constraint, info } => match config.mode {
            Mode::Regular => {
                let level = info.level;
                Ok(ExtendedOutcome {
                    outcome: AnalysisOutcome::Learned { constraint, info },
                    committed_levels: vec![level],
                })
            }
            Mode::Extended => continue_analysis(analyzer, constraint, info, config),
        },
    }
}
