//! Reader and writer for the linear decision subset of the OPB format used by
//! the pseudo-Boolean competitions.
//!
//! ```text
//! * #variable= 3 #constraint= 2
//! +1 x1 +1 x2 +1 x3 >= 1 ;
//! -1 x1 +2 ~x3 = 1 ;
//! ```
//!
//! Only `>=` and `=` are accepted. Objectives, soft constraints and
//! non-linear products are rejected with [`OpbError::UnsupportedFeature`].

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::Signed;
use thiserror::Error;

use crate::constraint::Constraint;
use crate::literal::{Literal, Var};
use crate::raw::{RawConstraint, Relation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpbError {
    #[error("syntax error at {line}:{column}: {reason}")]
    SyntaxError { line: usize, column: usize, reason: String },
    #[error("unsupported feature at {line}:{column}: {feature}")]
    UnsupportedFeature { line: usize, column: usize, feature: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OpbInstance {
    pub variable_count: u32,
    pub constraint_count: u32,
    pub constraints: Vec<RawConstraint>,
    /// Non-fatal problems such as a header count that does not match.
    pub warnings: Vec<String>,
}

impl OpbInstance {
    pub fn new(variable_count: u32, constraints: Vec<RawConstraint>) -> Self {
        OpbInstance { variable_count, constraint_count: constraints.len() as u32, constraints, warnings: Vec::new() }
    }

    /// The token naming `var` in OPB text.
    pub fn token(var: Var) -> String {
        var.to_string()
    }

    /// Inverse of [`OpbInstance::token`].
    pub fn var_of(token: &str) -> Option<Var> {
        match token.parse::<Literal>() {
            Ok(l) if l.polarity() && !token.starts_with('-') => Some(l.var()),
            _ => None,
        }
    }

    /// All constraints in normalized form.
    pub fn normalized(&self) -> Vec<Constraint> {
        self.constraints.iter().flat_map(RawConstraint::normalize).collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

fn syntax(tok: &Token<'_>, reason: impl Into<String>) -> OpbError {
    OpbError::SyntaxError { line: tok.line, column: tok.column, reason: reason.into() }
}

fn unsupported(tok: &Token<'_>, feature: impl Into<String>) -> OpbError {
    OpbError::UnsupportedFeature { line: tok.line, column: tok.column, feature: feature.into() }
}

fn parse_literal(tok: &Token<'_>) -> Option<Literal> {
    let t = tok.text;
    let body = t.strip_prefix('~').unwrap_or(t);
    if !body.starts_with('x') {
        return None;
    }
    t.parse().ok().filter(|_| !t.starts_with('-'))
}

fn parse_integer(tok: &Token<'_>) -> Option<BigInt> {
    let t = tok.text;
    let digits = t.strip_prefix(['+', '-']).unwrap_or(t);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    t.parse().ok()
}

/// Reads `* #variable= N #constraint= M` if present on a comment line.
fn parse_header(line: &str) -> Option<(u32, u32)> {
    let mut vars = None;
    let mut cons = None;
    let mut words = line.split_whitespace();
    while let Some(w) = words.next() {
        match w {
            "#variable=" => vars = words.next().and_then(|n| n.parse().ok()),
            "#constraint=" => cons = words.next().and_then(|n| n.parse().ok()),
            _ => {}
        }
    }
    Some((vars?, cons?))
}

pub fn parse_opb(text: &str) -> Result<OpbInstance, OpbError> {
    let mut header = None;
    let mut tokens = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        if line.trim_start().starts_with('*') {
            if header.is_none() {
                header = parse_header(line);
            }
            continue;
        }
        let mut col = 0;
        for piece in line.split_inclusive(char::is_whitespace) {
            let word = piece.trim_end();
            let mut offset = col;
            // `;` is its own token even when glued to the bound.
            for part in word.split_inclusive(';') {
                let (body, semi) = match part.strip_suffix(';') {
                    Some(b) => (b, true),
                    None => (part, false),
                };
                if !body.is_empty() {
                    tokens.push(Token { text: body, line: i + 1, column: offset + 1 });
                }
                if semi {
                    tokens.push(Token { text: ";", line: i + 1, column: offset + body.len() + 1 });
                }
                offset += part.len();
            }
            col += piece.len();
        }
    }

    let mut constraints = Vec::new();
    let mut max_var = 0u32;
    let mut i = 0;
    while i < tokens.len() {
        let first = tokens[i];
        match first.text {
            t if t.starts_with("min:") || t.starts_with("max:") => {
                return Err(unsupported(&first, "objective function"));
            }
            t if t.starts_with("soft:") || t.starts_with('[') => {
                return Err(unsupported(&first, "soft constraint"));
            }
            _ => {}
        }
        let mut terms = Vec::new();
        let relation = loop {
            let Some(tok) = tokens.get(i) else {
                return Err(syntax(tokens.last().unwrap_or(&first), "unexpected end of input"));
            };
            match tok.text {
                ">=" => break Relation::Ge,
                "=" => break Relation::Eq,
                "<=" | "<" | ">" => {
                    return Err(syntax(tok, format!("relational operator `{}` not accepted", tok.text)))
                }
                ";" => return Err(syntax(tok, "constraint without relational operator")),
                _ => {}
            }
            let coef = parse_integer(tok).ok_or_else(|| {
                if parse_literal(tok).is_some() {
                    syntax(tok, "literal without coefficient")
                } else {
                    syntax(tok, format!("expected coefficient, found `{}`", tok.text))
                }
            })?;
            i += 1;
            let lit_tok = tokens.get(i).ok_or_else(|| syntax(tok, "coefficient without literal"))?;
            let lit = parse_literal(lit_tok)
                .ok_or_else(|| syntax(lit_tok, format!("expected literal, found `{}`", lit_tok.text)))?;
            i += 1;
            if let Some(next) = tokens.get(i) {
                if parse_literal(next).is_some() {
                    return Err(unsupported(next, "non-linear product term"));
                }
            }
            max_var = max_var.max(lit.var().index());
            terms.push((coef, lit));
        };
        let rel_tok = tokens[i];
        i += 1;
        let bound_tok = tokens.get(i).ok_or_else(|| syntax(&rel_tok, "missing bound"))?;
        let bound = parse_integer(bound_tok)
            .ok_or_else(|| syntax(bound_tok, format!("expected integer bound, found `{}`", bound_tok.text)))?;
        i += 1;
        match tokens.get(i) {
            Some(t) if t.text == ";" => i += 1,
            Some(t) => return Err(syntax(t, "expected `;`")),
            None => return Err(syntax(bound_tok, "missing `;`")),
        }
        constraints.push(RawConstraint::new(terms, relation, bound));
    }

    let mut warnings = Vec::new();
    let (variable_count, constraint_count) = match header {
        Some((v, c)) => {
            if c as usize != constraints.len() {
                warnings.push(format!("header announces {c} constraints, found {}", constraints.len()));
            }
            if max_var > v {
                warnings.push(format!("header announces {v} variables, found x{max_var}"));
            }
            (v.max(max_var), c)
        }
        None => (max_var, constraints.len() as u32),
    };
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(OpbInstance { variable_count, constraint_count, constraints, warnings })
}

fn write_term(out: &mut String, coef: &BigInt, lit: Literal) {
    if coef.is_negative() {
        let _ = write!(out, "{coef} {lit} ");
    } else {
        let _ = write!(out, "+{coef} {lit} ");
    }
}

/// One line in the accepted dialect. `<`, `<=` and `>` are rewritten to
/// `>=` over integers.
pub fn write_raw_line(c: &RawConstraint) -> String {
    let mut out = String::new();
    let (flip, relation, bound) = match c.relation {
        Relation::Ge => (false, ">=", c.bound.clone()),
        Relation::Eq => (false, "=", c.bound.clone()),
        Relation::Gt => (false, ">=", &c.bound + 1),
        Relation::Le => (true, ">=", -&c.bound),
        Relation::Lt => (true, ">=", -&c.bound + 1),
    };
    for (coef, lit) in &c.terms {
        let coef = if flip { -coef } else { coef.clone() };
        write_term(&mut out, &coef, *lit);
    }
    let _ = write!(out, "{relation} {bound} ;");
    out
}

/// One line for a normalized constraint, e.g. `+1 ~x1 +1 ~x2 >= 1 ;`.
pub fn write_constraint_line(c: &Constraint) -> String {
    let mut out = String::new();
    for t in c.terms() {
        let _ = write!(out, "+{} {} ", t.coef, t.lit);
    }
    let _ = write!(out, ">= {} ;", c.degree());
    out
}

pub fn write_opb(instance: &OpbInstance) -> String {
    let mut out = format!("* #variable= {} #constraint= {}\n", instance.variable_count, instance.constraints.len());
    for c in &instance.constraints {
        out.push_str(&write_raw_line(c));
        out.push('\n');
    }
    out
}

/// Writes normalized constraints as an OPB document.
pub fn write_normalized(num_vars: u32, constraints: &[Constraint]) -> String {
    let mut out = format!("* #variable= {} #constraint= {}\n", num_vars, constraints.len());
    for c in constraints {
        out.push_str(&write_constraint_line(c));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(v: i64) -> Literal {
        Literal::from_dimacs(v)
    }

    #[test]
    fn parses_pigeon_clause() {
        let inst = parse_opb("+1 x1 +1 x2 +1 x3 >= 1 ;\n").unwrap();
        assert_eq!(inst.variable_count, 3);
        assert_eq!(inst.constraints.len(), 1);
        assert_eq!(inst.normalized(), vec![Constraint::clause([lit(1), lit(2), lit(3)]).unwrap()]);
    }

    #[test]
    fn negative_coefficient() {
        let inst = parse_opb("-1 x1 >= 0 ;").unwrap();
        let raw = &inst.constraints[0];
        assert_eq!(raw.terms, vec![(BigInt::from(-1), lit(1))]);
        assert_eq!(inst.normalized(), vec![Constraint::clause([lit(-1)]).unwrap()]);
        for v in [false, true] {
            assert_eq!(raw.is_satisfied_by(|_| v), inst.normalized()[0].is_satisfied_by(|_| v));
        }
    }

    #[test]
    fn rejects_products_and_objectives() {
        assert!(matches!(parse_opb("+2 x1 x2 >= 1 ;"), Err(OpbError::UnsupportedFeature { line: 1, column: 7, .. })));
        assert!(matches!(parse_opb("min: +1 x1 ;"), Err(OpbError::UnsupportedFeature { .. })));
        assert!(matches!(parse_opb("soft: 3 ;"), Err(OpbError::UnsupportedFeature { .. })));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_opb("* c\n+1 x1 +1 y2 >= 1 ;") {
            Err(OpbError::SyntaxError { line, column, .. }) => assert_eq!((line, column), (2, 10)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_opb("+1 x1 >= 1"), Err(OpbError::SyntaxError { .. })));
        assert!(matches!(parse_opb("+1 x1 <= 1 ;"), Err(OpbError::SyntaxError { .. })));
        assert!(matches!(parse_opb("x1 >= 1 ;"), Err(OpbError::SyntaxError { .. })));
        assert!(matches!(parse_opb("+1 x1 >= ;"), Err(OpbError::SyntaxError { .. })));
        assert!(matches!(parse_opb("+1 x0 >= 1 ;"), Err(OpbError::SyntaxError { .. })));
    }

    #[test]
    fn header_and_crlf() {
        let text = "* #variable= 5 #constraint= 2\r\n+1 x1 +2 ~x2 >= 2;\r\n+1 x3 = 1 ;\r\n";
        let inst = parse_opb(text).unwrap();
        assert_eq!(inst.variable_count, 5);
        assert_eq!(inst.constraint_count, 2);
        assert!(inst.warnings.is_empty());
        assert_eq!(inst.constraints[1].relation, Relation::Eq);
    }

    #[test]
    fn count_mismatch_warns() {
        let inst = parse_opb("* #variable= 1 #constraint= 3\n+1 x2 >= 1 ;\n").unwrap();
        assert_eq!(inst.warnings.len(), 2);
        assert_eq!(inst.variable_count, 2);
    }

    #[test]
    fn empty_instance_is_header_only() {
        assert_eq!(write_opb(&OpbInstance::default()), "* #variable= 0 #constraint= 0\n");
    }

    #[test]
    fn normalized_line_shape() {
        let c = Constraint::from_terms((1..=4).map(|v| (1, lit(-v))), 3).unwrap();
        assert_eq!(write_constraint_line(&c), "+1 ~x1 +1 ~x2 +1 ~x3 +1 ~x4 >= 3 ;");
    }

    #[test]
    fn writer_rewrites_other_relations() {
        let raw = RawConstraint::from_ints(&[(1, lit(1)), (1, lit(2))], Relation::Le, 1);
        let line = write_raw_line(&raw);
        assert_eq!(line, "-1 x1 -1 x2 >= -1 ;");
        let back = parse_opb(&line).unwrap();
        assert_eq!(back.normalized(), raw.normalize());
    }

    #[test]
    fn token_mapping() {
        assert_eq!(OpbInstance::token(Var::new(12)), "x12");
        assert_eq!(OpbInstance::var_of("x12"), Some(Var::new(12)));
        assert_eq!(OpbInstance::var_of("~x12"), None);
    }
}
