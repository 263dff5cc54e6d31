//! Normalized pseudo-Boolean constraints and the cutting-planes rules used
//! during conflict analysis: cancellation, weakening and saturation.
//!
//! A [`Constraint`] is `sum(coef_i * lit_i) >= degree` with strictly positive
//! coefficients, at most one literal per variable, and terms kept sorted by
//! variable index. The tautology has a single canonical form, empty terms and
//! degree 0, so constraints can be compared with `==`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::literal::{Literal, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstraintError {
    #[error("literal {0} does not occur in the constraint")]
    LiteralAbsent(Literal),
    #[error("cancellation pivot {0} does not occur with opposite signs in the premises")]
    PivotAbsent(Literal),
    #[error("coefficient of {0} must be strictly positive")]
    NonPositiveCoefficient(Literal),
    #[error("variable {0} occurs more than once")]
    DuplicateVariable(Var),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub coef: BigUint,
    pub lit: Literal,
}

impl Term {
    pub fn new(coef: impl Into<BigUint>, lit: Literal) -> Self {
        Term { coef: coef.into(), lit }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    terms: Vec<Term>,
    degree: BigUint,
}

impl Constraint {
    /// Builds a constraint, sorting terms by variable. A degree of zero
    /// collapses to the canonical tautology.
    pub fn new(mut terms: Vec<Term>, degree: BigUint) -> Result<Self, ConstraintError> {
        if let Some(t) = terms.iter().find(|t| t.coef.is_zero()) {
            return Err(ConstraintError::NonPositiveCoefficient(t.lit));
        }
        terms.sort_by_key(|t| t.lit.var());
        if let Some(w) = terms.windows(2).find(|w| w[0].lit.var() == w[1].lit.var()) {
            return Err(ConstraintError::DuplicateVariable(w[0].lit.var()));
        }
        if degree.is_zero() {
            return Ok(Constraint::tautology());
        }
        Ok(Constraint { terms, degree })
    }

    /// Convenience constructor over machine integers.
    pub fn from_terms<I>(terms: I, degree: u64) -> Result<Self, ConstraintError>
    where
        I: IntoIterator<Item = (u64, Literal)>,
    {
        let terms = terms.into_iter().map(|(c, l)| Term::new(c, l)).collect();
        Constraint::new(terms, BigUint::from(degree))
    }

    /// A clause `l1 + ... + lk >= 1`.
    pub fn clause<I: IntoIterator<Item = Literal>>(lits: I) -> Result<Self, ConstraintError> {
        Constraint::from_terms(lits.into_iter().map(|l| (1, l)), 1)
    }

    pub fn tautology() -> Self {
        Constraint { terms: Vec::new(), degree: BigUint::zero() }
    }

    /// `0 >= 1`, falsified by every assignment.
    pub fn contradiction() -> Self {
        Constraint { terms: Vec::new(), degree: BigUint::one() }
    }

    pub(crate) fn from_sorted_unchecked(terms: Vec<Term>, degree: BigUint) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].lit.var() < w[1].lit.var()));
        debug_assert!(terms.iter().all(|t| !t.coef.is_zero()));
        if degree.is_zero() {
            Constraint::tautology()
        } else {
            Constraint { terms, degree }
        }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn degree(&self) -> &BigUint {
        &self.degree
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_tautology(&self) -> bool {
        self.degree.is_zero()
    }

    /// Empty left-hand side with positive degree.
    pub fn is_contradiction(&self) -> bool {
        self.terms.is_empty() && !self.degree.is_zero()
    }

    pub fn is_saturated(&self) -> bool {
        self.terms.iter().all(|t| t.coef <= self.degree)
    }

    pub fn is_clause(&self) -> bool {
        self.degree.is_one() && self.terms.iter().all(|t| t.coef.is_one())
    }

    fn position(&self, var: Var) -> Option<usize> {
        self.terms.binary_search_by_key(&var, |t| t.lit.var()).ok()
    }

    /// Term on `var`, whatever its polarity.
    pub fn term_of(&self, var: Var) -> Option<&Term> {
        self.position(var).map(|i| &self.terms[i])
    }

    /// Coefficient of `lit`, if `lit` (with this exact polarity) occurs.
    pub fn coef_of(&self, lit: Literal) -> Option<&BigUint> {
        self.term_of(lit.var()).filter(|t| t.lit == lit).map(|t| &t.coef)
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.coef_of(lit).is_some()
    }

    pub fn sum_of_coefs(&self) -> BigUint {
        self.terms.iter().map(|t| &t.coef).sum()
    }

    /// Evaluates the constraint under a total assignment.
    pub fn is_satisfied_by<F: Fn(Var) -> bool>(&self, value: F) -> bool {
        let lhs: BigUint = self.terms.iter().filter(|t| t.lit.eval(value(t.lit.var()))).map(|t| &t.coef).sum();
        lhs >= self.degree
    }

    /// Clamps every coefficient to the degree.
    ///
    /// When every clamped coefficient equals the degree the constraint is a
    /// disjunction of its literals and is returned in clause form.
    pub fn saturate(&self) -> Constraint {
        if self.is_tautology() {
            return Constraint::tautology();
        }
        let degree = &self.degree;
        if !self.terms.is_empty() && self.terms.iter().all(|t| &t.coef >= degree) {
            let terms = self.terms.iter().map(|t| Term::new(1u32, t.lit)).collect();
            return Constraint::from_sorted_unchecked(terms, BigUint::one());
        }
        let terms = self.terms.iter().map(|t| Term { coef: (&t.coef).min(degree).clone(), lit: t.lit }).collect();
        Constraint::from_sorted_unchecked(terms, degree.clone())
    }

    /// Removes `lit` and lowers the degree by its coefficient.
    pub fn weaken(&self, lit: Literal) -> Result<Constraint, ConstraintError> {
        let idx = self
            .position(lit.var())
            .filter(|&i| self.terms[i].lit == lit)
            .ok_or(ConstraintError::LiteralAbsent(lit))?;
        let coef = &self.terms[idx].coef;
        if coef >= &self.degree {
            return Ok(Constraint::tautology());
        }
        let degree = &self.degree - coef;
        let mut terms = self.terms.clone();
        terms.remove(idx);
        Ok(Constraint::from_sorted_unchecked(terms, degree))
    }

    /// Multiplies every coefficient and the degree by `factor`.
    pub fn scale(&self, factor: &BigUint) -> Constraint {
        if factor.is_zero() {
            return Constraint::tautology();
        }
        let terms = self.terms.iter().map(|t| Term { coef: &t.coef * factor, lit: t.lit }).collect();
        Constraint::from_sorted_unchecked(terms, &self.degree * factor)
    }

    /// Cancellation on `pivot`: `pivot` occurs in `self`, its negation in
    /// `other`. Both sides are scaled to the LCM of the pivot coefficients,
    /// added, opposite literals merged, and the result saturated.
    pub fn cancel(&self, other: &Constraint, pivot: Literal) -> Result<Constraint, ConstraintError> {
        let alpha = self.coef_of(pivot).ok_or(ConstraintError::PivotAbsent(pivot))?;
        let beta = other.coef_of(!pivot).ok_or(ConstraintError::PivotAbsent(pivot))?;
        let (mu, nu) = lcm_multipliers(alpha, beta);
        Ok(add_scaled(self, &mu, other, &nu).saturate())
    }
}

/// Multipliers `(mu, nu)` with `mu * alpha == nu * beta == lcm(alpha, beta)`.
pub fn lcm_multipliers(alpha: &BigUint, beta: &BigUint) -> (BigUint, BigUint) {
    let lcm = alpha.lcm(beta);
    (&lcm / alpha, &lcm / beta)
}

/// `mu * a + nu * b` with opposite literals merged: `x * l + y * ~l`
/// becomes `|x - y|` on the heavier literal and lowers the degree by
/// `min(x, y)`. Not saturated.
pub(crate) fn add_scaled(a: &Constraint, mu: &BigUint, b: &Constraint, nu: &BigUint) -> Constraint {
    let mut terms = Vec::with_capacity(a.terms.len() + b.terms.len());
    let mut reduction = BigUint::zero();
    let (mut i, mut j) = (0, 0);
    while i < a.terms.len() || j < b.terms.len() {
        let order = match (a.terms.get(i), b.terms.get(j)) {
            (Some(x), Some(y)) => x.lit.var().cmp(&y.lit.var()),
            (Some(_), None) => Ordering::Less,
            _ => Ordering::Greater,
        };
        match order {
            Ordering::Less => {
                let t = &a.terms[i];
                terms.push(Term { coef: &t.coef * mu, lit: t.lit });
                i += 1;
            }
            Ordering::Greater => {
                let t = &b.terms[j];
                terms.push(Term { coef: &t.coef * nu, lit: t.lit });
                j += 1;
            }
            Ordering::Equal => {
                let (x, y) = (&a.terms[i], &b.terms[j]);
                let cx = &x.coef * mu;
                let cy = &y.coef * nu;
                if x.lit == y.lit {
                    terms.push(Term { coef: cx + cy, lit: x.lit });
                } else {
                    match cx.cmp(&cy) {
                        Ordering::Greater => {
                            terms.push(Term { coef: &cx - &cy, lit: x.lit });
                            reduction += cy;
                        }
                        Ordering::Less => {
                            terms.push(Term { coef: &cy - &cx, lit: y.lit });
                            reduction += cx;
                        }
                        Ordering::Equal => reduction += cx,
                    }
                }
                i += 1;
                j += 1;
            }
        }
    }
    let total = &a.degree * mu + &b.degree * nu;
    if total <= reduction {
        return Constraint::tautology();
    }
    Constraint::from_sorted_unchecked(terms, total - reduction)
}

/// Signed difference helper used by slack computations.
pub(crate) fn signed(value: &BigUint) -> BigInt {
    BigInt::from_biguint(Sign::Plus, value.clone())
}

impl fmt::Display for Constraint {
    /// OPB-style: `+2 x1 +1 ~x3 >= 2`; an empty left side prints as `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 >= {}", self.degree);
        }
        for t in &self.terms {
            write!(f, "+{} {} ", t.coef, t.lit)?;
        }
        write!(f, ">= {}", self.degree)
    }
}
