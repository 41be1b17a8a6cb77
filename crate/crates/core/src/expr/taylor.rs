use rug::Float;

use super::ast::{BinOp, Expr};
use super::{parse_expr, ConstantError, FunctionDef};
use crate::precision::Precision;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TaylorError {
    #[error("Taylor data needs at least one coefficient")]
    Empty,
    #[error("coefficient {index}: {source}")]
    Coefficient {
        index: usize,
        #[source]
        source: ConstantError,
    },
    #[error("radius hint must be positive")]
    Radius,
}

/// Truncated Taylor data `f(x) = a_1 x + a_2 x^2 + ... + a_m x^m` at the origin.
#[derive(Debug, Clone)]
pub struct TaylorDef {
    terms: Vec<Expr>,
    coefficients: Vec<Float>,
    radius_hint: Option<Float>,
}

impl TaylorDef {
    /// Parses a comma-separated list such as `"1, 0, -1/6"`; entry `i` is `a_{i+1}`.
    pub fn parse(list: &str, precision: Precision) -> Result<Self, TaylorError> {
        let mut terms = Vec::new();
        let mut coefficients = Vec::new();
        for (i, item) in list.split(',').enumerate() {
            if list.trim().is_empty() {
                return Err(TaylorError::Empty);
            }
            let index = i + 1;
            let wrap = |source: ConstantError| TaylorError::Coefficient { index, source };
            let expr = parse_expr(item).map_err(|e| wrap(e.into()))?;
            let value = super::constant_value(item, precision).map_err(wrap)?;
            terms.push(expr);
            coefficients.push(value);
        }
        if coefficients.is_empty() {
            return Err(TaylorError::Empty);
        }
        Ok(Self {
            terms,
            coefficients,
            radius_hint: None,
        })
    }

    pub fn with_radius_hint(mut self, radius: Float) -> Result<Self, TaylorError> {
        if radius <= 0 || !radius.is_finite() {
            return Err(TaylorError::Radius);
        }
        self.radius_hint = Some(radius);
        Ok(self)
    }

    /// `a_1, a_2, ...` in order; `a_1` is stored explicitly.
    pub fn coefficients(&self) -> &[Float] {
        &self.coefficients
    }

    pub fn leading(&self) -> &Float {
        &self.coefficients[0]
    }

    pub fn radius_hint(&self) -> Option<&Float> {
        self.radius_hint.as_ref()
    }

    /// The truncated polynomial as a defining function.
    pub fn to_function(&self) -> FunctionDef {
        let mut sum: Option<Expr> = None;
        for (i, coef) in self.terms.iter().enumerate() {
            if self.coefficients[i].is_zero() {
                continue;
            }
            let power = match i + 1 {
                1 => Expr::Var,
                k => Expr::binary(BinOp::Pow, Expr::Var, Expr::num(k.to_string())),
            };
            let term = Expr::binary(BinOp::Mul, coef.clone(), power);
            sum = Some(match sum {
                None => term,
                Some(acc) => Expr::binary(BinOp::Add, acc, term),
            });
        }
        FunctionDef::from_expr(sum.unwrap_or_else(|| Expr::num("0")))
    }
}
