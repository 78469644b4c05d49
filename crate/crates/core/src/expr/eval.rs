use std::collections::BTreeMap;

use thiserror::Error;

use super::{BinaryOp, FunctionExpr};
use crate::model::Identifier;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no value for base measurement {0}")]
    MissingBinding(Identifier),
    #[error("division by zero in {site}")]
    DivisionByZero { site: String },
    #[error("non-finite result")]
    NonFiniteResult,
    #[error("literal {0} is not representable")]
    UnrepresentableLiteral(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BindingError {
    #[error("binding for {0} is not a finite number")]
    NonFinite(Identifier),
    #[error("invalid base measurement name {0:?}")]
    InvalidName(String),
}

/// Values of base measurements. Only finite values are admitted.
#[derive(Debug, Clone, PartialEq)]
pub struct Bindings<T = f64> {
    values: BTreeMap<Identifier, T>,
}

impl<T> Default for Bindings<T> {
    fn default() -> Self {
        Self {
            values: BTreeMap::new(),
        }
    }
}

impl<T: Scalar> Bindings<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: Identifier, value: T) -> Result<(), BindingError> {
        if !value.is_finite_value() {
            return Err(BindingError::NonFinite(id));
        }
        self.values.insert(id, value);
        Ok(())
    }

    /// Convenience constructor for tests and examples.
    pub fn from_pairs<'a>(
        pairs: impl IntoIterator<Item = (&'a str, T)>,
    ) -> Result<Self, BindingError> {
        let mut out = Self::new();
        for (id, value) in pairs {
            let id = Identifier::new(id).map_err(|e| BindingError::InvalidName(e.0))?;
            out.insert(id, value)?;
        }
        Ok(out)
    }

    pub fn get(&self, id: &str) -> Option<&T> {
        self.values.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Identifier, &T)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Evaluates a measurement function over bound base measurements.
///
/// A divisor that evaluates to exactly zero is an error rather than an
/// infinity; any other non-finite intermediate is reported as
/// [`EvalError::NonFiniteResult`].
pub fn evaluate<T: Scalar>(expr: &FunctionExpr, bindings: &Bindings<T>) -> Result<T, EvalError> {
    let value = match expr {
        FunctionExpr::Number(v) => {
            T::from_f64(*v).ok_or_else(|| EvalError::UnrepresentableLiteral(v.to_string()))?
        }
        FunctionExpr::Var(id) => bindings
            .get(id.as_str())
            .cloned()
            .ok_or_else(|| EvalError::MissingBinding(id.clone()))?,
        FunctionExpr::Neg(inner) => -evaluate(inner, bindings)?,
        FunctionExpr::Binary { op, lhs, rhs } => {
            let left = evaluate(lhs, bindings)?;
            let right = evaluate(rhs, bindings)?;
            match op {
                BinaryOp::Add => left + right,
                BinaryOp::Sub => left - right,
                BinaryOp::Mul => left * right,
                BinaryOp::Div => {
                    if right.is_zero() {
                        return Err(EvalError::DivisionByZero {
                            site: expr.to_string(),
                        });
                    }
                    left / right
                }
            }
        }
    };
    if value.is_finite_value() {
        Ok(value)
    } else {
        Err(EvalError::NonFiniteResult)
    }
}
