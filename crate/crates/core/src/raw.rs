//! Unnormalized linear constraints as they appear in input files, and their
//! rewriting into `>=` form with non-negative coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, Zero};

use crate::constraint::{Constraint, Term};
use crate::literal::{Literal, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        })
    }
}

/// `sum(coef_i * lit_i) <rel> bound` with signed coefficients. Duplicate
/// variables and negative coefficients are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RawConstraint {
    pub terms: Vec<(BigInt, Literal)>,
    pub relation: Relation,
    pub bound: BigInt,
}

impl RawConstraint {
    pub fn new(terms: Vec<(BigInt, Literal)>, relation: Relation, bound: BigInt) -> Self {
        RawConstraint { terms, relation, bound }
    }

    pub fn from_ints(terms: &[(i64, Literal)], relation: Relation, bound: i64) -> Self {
        RawConstraint {
            terms: terms.iter().map(|&(c, l)| (BigInt::from(c), l)).collect(),
            relation,
            bound: BigInt::from(bound),
        }
    }

    /// Evaluates the raw relation under a total assignment.
    pub fn is_satisfied_by<F: Fn(Var) -> bool>(&self, value: F) -> bool {
        let lhs: BigInt = self.terms.iter().filter(|(_, l)| l.eval(value(l.var()))).map(|(c, _)| c).sum();
        match self.relation {
            Relation::Lt => lhs < self.bound,
            Relation::Le => lhs <= self.bound,
            Relation::Eq => lhs == self.bound,
            Relation::Ge => lhs >= self.bound,
            Relation::Gt => lhs > self.bound,
        }
    }

    pub fn max_var(&self) -> Option<Var> {
        self.terms.iter().map(|(_, l)| l.var()).max()
    }

    /// Rewrites into normalized `>=` constraints: one for an inequality, two
    /// for an equality. Results are not saturated.
    pub fn normalize(&self) -> Vec<Constraint> {
        // Collapse to sum(c_v * x_v) <rel> k over positive literals,
        // using c * ~x = c - c * x.
        let mut coefs: BTreeMap<Var, BigInt> = BTreeMap::new();
        let mut bound = self.bound.clone();
        for (c, l) in &self.terms {
            let entry = coefs.entry(l.var()).or_insert_with(BigInt::zero);
            if l.polarity() {
                *entry += c;
            } else {
                *entry -= c;
                bound -= c;
            }
        }
        let ge = |flip: bool, k: BigInt| {
            let signed: Vec<(Var, BigInt)> =
                coefs.iter().map(|(&v, c)| (v, if flip { -c } else { c.clone() })).collect();
            to_normalized(signed, if flip { -k } else { k })
        };
        match self.relation {
            Relation::Ge => vec![ge(false, bound)],
            Relation::Gt => vec![ge(false, bound + BigInt::one())],
            Relation::Le => vec![ge(true, bound)],
            Relation::Lt => vec![ge(true, bound - BigInt::one())],
            Relation::Eq => vec![ge(false, bound.clone()), ge(true, bound)],
        }
    }
}

/// `sum(c_v * x_v) >= k` with signed `c_v` into non-negative form.
fn to_normalized(coefs: Vec<(Var, BigInt)>, mut degree: BigInt) -> Constraint {
    let mut terms = Vec::with_capacity(coefs.len());
    for (v, c) in coefs {
        match c.sign() {
            Sign::NoSign => {}
            Sign::Plus => terms.push(Term { coef: c.magnitude().clone(), lit: v.positive() }),
            Sign::Minus => {
                // -a * x = -a + a * ~x
                degree += c.abs();
                terms.push(Term { coef: c.magnitude().clone(), lit: v.negative() });
            }
        }
    }
    if !degree.is_positive() {
        return Constraint::tautology();
    }
    Constraint::from_sorted_unchecked(terms, degree.magnitude().clone())
}

impl fmt::Display for RawConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (c, l) in &self.terms {
            if c.is_negative() {
                write!(f, "{c} {l} ")?;
            } else {
                write!(f, "+{c} {l} ")?;
            }
        }
        write!(f, "{} {}", self.relation, self.bound)
    }
}
