//! Variables and literals.

use std::fmt;
use std::ops::Not;
use std::str::FromStr;

use thiserror::Error;

/// A propositional variable, identified by a 1-based index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    /// Creates a variable. Panics on index 0, which is reserved.
    pub fn new(index: u32) -> Self {
        assert!(index > 0, "variable indices are 1-based");
        Var(index)
    }

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn positive(self) -> Literal {
        Literal::new(self, true)
    }

    pub fn negative(self) -> Literal {
        Literal::new(self, false)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A variable or its negation.
///
/// Encoded as `2 * var + negated`, so literals of the same variable are
/// adjacent and `code()` can index per-literal tables directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal(u32);

impl Literal {
    pub fn new(var: Var, polarity: bool) -> Self {
        Literal(var.0 << 1 | u32::from(!polarity))
    }

    /// Shorthand used heavily in tests: `Literal::from_dimacs(-3)` is `~x3`.
    pub fn from_dimacs(value: i64) -> Self {
        assert!(value != 0);
        let var = Var::new(u32::try_from(value.unsigned_abs()).expect("variable index overflow"));
        Literal::new(var, value > 0)
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    /// `true` for the plain variable, `false` for its negation.
    pub fn polarity(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn code(self) -> usize {
        self.0 as usize
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var().index());
        if self.polarity() {
            v
        } else {
            -v
        }
    }

    /// Truth value of this literal when its variable takes `value`.
    pub fn eval(self, value: bool) -> bool {
        value == self.polarity()
    }
}

impl Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        Literal(self.0 ^ 1)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.polarity() {
            write!(f, "x{}", self.var().index())
        } else {
            write!(f, "~x{}", self.var().index())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid literal token `{0}`")]
pub struct ParseLiteralError(pub String);

impl FromStr for Literal {
    type Err = ParseLiteralError;

    /// Accepts `x3`, `~x3` and `-x3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseLiteralError(s.to_string());
        let (polarity, rest) = match s.strip_prefix('~').or_else(|| s.strip_prefix('-')) {
            Some(rest) => (false, rest),
            None => (true, s),
        };
        let digits = rest.strip_prefix('x').ok_or_else(err)?;
        let index: u32 = digits.parse().map_err(|_| err())?;
        if index == 0 {
            return Err(err());
        }
        Ok(Literal::new(Var::new(index), polarity))
    }
}
