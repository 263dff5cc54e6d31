//! Instance generators: pigeonhole formulas, the irrelevant-literal conflict
//! pattern, and small random PB instances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::literal::{Literal, Var};
use crate::opb::OpbInstance;
use crate::raw::{RawConstraint, Relation};

/// Variable for "pigeon `i` sits in hole `j`", both 1-based, with
/// `n - 1` holes.
pub fn pigeon_var(n: u32, pigeon: u32, hole: u32) -> Var {
    Var::new((pigeon - 1) * (n - 1) + hole)
}

/// `n` pigeons, `n - 1` holes. Hole constraints `sum_i ~p(i,j) >= n - 1`
/// come first, then pigeon constraints `sum_j p(i,j) >= 1`.
///
/// # Panics
/// If `n < 2`.
pub fn gen_pigeonhole(n: u32) -> OpbInstance {
    assert!(n >= 2, "pigeonhole needs at least 2 pigeons");
    let holes = n - 1;
    let mut constraints = Vec::with_capacity((holes + n) as usize);
    for j in 1..=holes {
        let terms: Vec<_> = (1..=n).map(|i| (1, pigeon_var(n, i, j).negative())).collect();
        constraints.push(RawConstraint::from_ints(&terms, Relation::Ge, i64::from(n) - 1));
    }
    for i in 1..=n {
        let terms: Vec<_> = (1..=holes).map(|j| (1, pigeon_var(n, i, j).positive())).collect();
        constraints.push(RawConstraint::from_ints(&terms, Relation::Ge, 1));
    }
    OpbInstance::new(n * holes, constraints)
}

/// An instance together with the decisions that drive the solver into a
/// particular conflict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub instance: OpbInstance,
    pub script: Vec<Literal>,
}

/// `sum_i 2 ~x_i >= n` plus the clauses `x_1 + x_j >= 1` for `2 <= j <= n`,
/// with the single decision `~x_1`. The resulting conflict on the first
/// constraint cancels with every clause.
///
/// # Panics
/// If `n < 3`.
pub fn gen_irrelevant_pattern(n: u32) -> Scenario {
    assert!(n >= 3, "the pattern needs at least 3 variables");
    let x = |i: u32| Var::new(i);
    let mut constraints = Vec::with_capacity(n as usize);
    let big: Vec<_> = (1..=n).map(|i| (2, x(i).negative())).collect();
    constraints.push(RawConstraint::from_ints(&big, Relation::Ge, i64::from(n)));
    for j in 2..=n {
        constraints.push(RawConstraint::from_ints(&[(1, x(1).positive()), (1, x(j).positive())], Relation::Ge, 1));
    }
    Scenario { instance: OpbInstance::new(n, constraints), script: vec![x(1).negative()] }
}

/// Random PB instance with `vars` variables and `constraints` constraints of
/// 2 to 5 terms, coefficients in `1..=max_coef`. About one constraint in ten
/// is an equality.
pub fn random_pb(seed: u64, vars: u32, constraints: u32, max_coef: u32) -> OpbInstance {
    assert!(vars >= 1 && max_coef >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<u32> = (1..=vars).collect();
    let mut out = Vec::with_capacity(constraints as usize);
    for _ in 0..constraints {
        let size = rng.gen_range(2..=5u32).min(vars) as usize;
        let chosen: Vec<u32> = all.choose_multiple(&mut rng, size).copied().collect();
        let terms: Vec<(i64, Literal)> = chosen
            .iter()
            .map(|&v| {
                let coef = i64::from(rng.gen_range(1..=max_coef));
                (coef, Literal::new(Var::new(v), rng.gen_bool(0.5)))
            })
            .collect();
        let sum: i64 = terms.iter().map(|t| t.0).sum();
        let (relation, bound) = if rng.gen_ratio(1, 10) {
            (Relation::Eq, rng.gen_range(0..=sum))
        } else {
            (Relation::Ge, rng.gen_range(1..=sum))
        };
        out.push(RawConstraint::from_ints(&terms, relation, bound));
    }
    OpbInstance::new(vars, out)
}
