//! Independent brute-force oracles shared by the integration tests. Nothing
//! here goes through the solver's own slack or propagation code.

#![allow(dead_code)]

use backjump_core::generators::random_pb;
use backjump_core::{Constraint, Formula, Literal, RawConstraint, Var};
use num_bigint::BigInt;

/// Evaluates a literal under a bitmask assignment (bit `v - 1` is `x_v`).
pub fn lit_true(lit: Literal, bits: u64) -> bool {
    let value = bits >> (lit.var().index() - 1) & 1 == 1;
    value == lit.polarity()
}

pub fn holds(c: &Constraint, bits: u64) -> bool {
    let lhs: BigInt = c.terms().iter().filter(|t| lit_true(t.lit, bits)).map(|t| BigInt::from(t.coef.clone())).sum();
    lhs >= BigInt::from(c.degree().clone())
}

pub fn raw_holds(c: &RawConstraint, bits: u64) -> bool {
    c.is_satisfied_by(|v: Var| bits >> (v.index() - 1) & 1 == 1)
}

/// All satisfying assignments of `formula`, as bitmasks.
pub fn models(formula: &Formula) -> Vec<u64> {
    let n = formula.num_vars();
    assert!(n <= 20, "enumeration over {n} variables");
    (0..1u64 << n).filter(|&bits| formula.constraints().iter().all(|c| holds(c, bits))).collect()
}

/// `c` holds in every model of the inputs.
pub fn entailed(c: &Constraint, models: &[u64]) -> bool {
    models.iter().all(|&bits| holds(c, bits))
}

/// Parameters for the seeded random corpus: at most 12 variables, 15
/// constraints and coefficient 8.
pub fn corpus_params(seed: u64) -> (u32, u32, u32) {
    let vars = 3 + (seed % 10) as u32;
    let constraints = 2 + (seed.wrapping_mul(7) % 14) as u32;
    let max_coef = 1 + (seed.wrapping_mul(5) % 8) as u32;
    (vars, constraints, max_coef)
}

pub fn corpus_formula(seed: u64) -> Formula {
    let (vars, constraints, max_coef) = corpus_params(seed);
    let inst = random_pb(seed, vars, constraints, max_coef);
    Formula::from_raw(inst.variable_count, &inst.constraints)
}

/// Slack by the textbook definition: coefficients of literals that are not
/// false, minus the degree.
pub fn slack_by_definition(c: &Constraint, value: impl Fn(Var) -> Option<bool>) -> BigInt {
    let live: BigInt = c
        .terms()
        .iter()
        .filter(|t| value(t.lit.var()) != Some(!t.lit.polarity()))
        .map(|t| BigInt::from(t.coef.clone()))
        .sum();
    live - BigInt::from(c.degree().clone())
}
