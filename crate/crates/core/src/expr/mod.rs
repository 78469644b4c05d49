//! Measurement-function expressions: the AST, printing, evaluation and band
//! classification.

mod classify;
mod eval;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::Identifier;

pub use classify::{classify, ClassifiedValue, ClassifyError};
pub use eval::{evaluate, BindingError, Bindings, EvalError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    pub fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinaryOp::Add | BinaryOp::Sub => 1,
            BinaryOp::Mul | BinaryOp::Div => 2,
        }
    }
}

/// Arithmetic over numeric literals and base-measurement variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionExpr {
    Number(f64),
    Var(Identifier),
    Neg(Box<FunctionExpr>),
    Binary {
        op: BinaryOp,
        lhs: Box<FunctionExpr>,
        rhs: Box<FunctionExpr>,
    },
}

impl FunctionExpr {
    pub fn number(value: f64) -> Self {
        FunctionExpr::Number(value)
    }

    pub fn var(id: &str) -> Self {
        FunctionExpr::Var(Identifier::new(id).expect("valid variable name"))
    }

    pub fn binary(op: BinaryOp, lhs: FunctionExpr, rhs: FunctionExpr) -> Self {
        FunctionExpr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn negate(inner: FunctionExpr) -> Self {
        FunctionExpr::Neg(Box::new(inner))
    }

    /// Distinct variables, sorted.
    pub fn variables(&self) -> BTreeSet<&Identifier> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables<'a>(&'a self, out: &mut BTreeSet<&'a Identifier>) {
        match self {
            FunctionExpr::Number(_) => {}
            FunctionExpr::Var(id) => {
                out.insert(id);
            }
            FunctionExpr::Neg(inner) => inner.collect_variables(out),
            FunctionExpr::Binary { lhs, rhs, .. } => {
                lhs.collect_variables(out);
                rhs.collect_variables(out);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            FunctionExpr::Number(_) | FunctionExpr::Var(_) => 1,
            FunctionExpr::Neg(inner) => 1 + inner.depth(),
            FunctionExpr::Binary { lhs, rhs, .. } => 1 + lhs.depth().max(rhs.depth()),
        }
    }

    /// Fully parenthesized rendering: every binary node and negation wrapped.
    pub fn to_parenthesized(&self) -> String {
        let mut out = String::new();
        self.write_parenthesized(&mut out);
        out
    }

    fn write_parenthesized(&self, out: &mut String) {
        match self {
            FunctionExpr::Number(v) => out.push_str(&format_number(*v)),
            FunctionExpr::Var(id) => out.push_str(id.as_str()),
            FunctionExpr::Neg(inner) => {
                out.push_str("(-");
                inner.write_parenthesized(out);
                out.push(')');
            }
            FunctionExpr::Binary { op, lhs, rhs } => {
                out.push('(');
                lhs.write_parenthesized(out);
                out.push(' ');
                out.push(op.symbol());
                out.push(' ');
                rhs.write_parenthesized(out);
                out.push(')');
            }
        }
    }

    fn write_minimal(&self, out: &mut String) {
        match self {
            FunctionExpr::Number(v) => out.push_str(&format_number(*v)),
            FunctionExpr::Var(id) => out.push_str(id.as_str()),
            FunctionExpr::Neg(inner) => {
                out.push('-');
                let wrap = matches!(**inner, FunctionExpr::Binary { .. });
                wrap_if(out, wrap, |out| inner.write_minimal(out));
            }
            FunctionExpr::Binary { op, lhs, rhs } => {
                let prec = op.precedence();
                let lhs_wrap = matches!(&**lhs, FunctionExpr::Binary { op: l, .. } if l.precedence() < prec);
                let rhs_wrap = matches!(&**rhs, FunctionExpr::Binary { op: r, .. } if r.precedence() <= prec);
                wrap_if(out, lhs_wrap, |out| lhs.write_minimal(out));
                out.push(' ');
                out.push(op.symbol());
                out.push(' ');
                wrap_if(out, rhs_wrap, |out| rhs.write_minimal(out));
            }
        }
    }
}

fn wrap_if(out: &mut String, wrap: bool, body: impl FnOnce(&mut String)) {
    if wrap {
        out.push('(');
    }
    body(out);
    if wrap {
        out.push(')');
    }
}

/// Shortest decimal text that parses back to the same double; never uses
/// exponent notation.
pub fn format_number(value: f64) -> String {
    format!("{value}")
}

/// Minimal-parenthesis rendering.
impl fmt::Display for FunctionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        self.write_minimal(&mut out);
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_printing_keeps_needed_parens() {
        let e = FunctionExpr::binary(
            BinaryOp::Mul,
            FunctionExpr::binary(
                BinaryOp::Div,
                FunctionExpr::var("bm_completed"),
                FunctionExpr::var("bm_took"),
            ),
            FunctionExpr::number(100.0),
        );
        assert_eq!(e.to_string(), "bm_completed / bm_took * 100");
        assert_eq!(e.to_parenthesized(), "((bm_completed / bm_took) * 100)");

        let right_assoc = FunctionExpr::binary(
            BinaryOp::Sub,
            FunctionExpr::var("a"),
            FunctionExpr::binary(BinaryOp::Sub, FunctionExpr::var("b"), FunctionExpr::var("c")),
        );
        assert_eq!(right_assoc.to_string(), "a - (b - c)");

        let neg = FunctionExpr::negate(FunctionExpr::binary(
            BinaryOp::Add,
            FunctionExpr::number(1.0),
            FunctionExpr::number(0.5),
        ));
        assert_eq!(neg.to_string(), "-(1 + 0.5)");
    }

    #[test]
    fn variables_are_distinct_and_sorted() {
        let e = FunctionExpr::binary(
            BinaryOp::Add,
            FunctionExpr::var("b"),
            FunctionExpr::binary(BinaryOp::Mul, FunctionExpr::var("a"), FunctionExpr::var("b")),
        );
        let vars: Vec<&str> = e.variables().into_iter().map(Identifier::as_str).collect();
        assert_eq!(vars, ["a", "b"]);
        assert_eq!(e.depth(), 3);
    }

    #[test]
    fn numbers_print_without_exponent() {
        assert_eq!(format_number(100.0), "100");
        assert_eq!(format_number(0.1), "0.1");
        assert_eq!(format_number(1e21), "1000000000000000000000");
        assert_eq!(format_number(1e-7), "0.0000001");
    }
}
