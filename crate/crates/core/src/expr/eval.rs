use rug::float::Constant as MpConstant;
use rug::ops::Pow;
use rug::Float;

use super::ast::{BinOp, Constant, Expr, Func};
use crate::precision::{to_decimal, Precision};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DomainReason {
    DivisionByZero,
    LogOfNonPositive,
    SqrtOfNegative,
    NegativeBaseFractionalExponent,
    NonFinite,
    BadLiteral,
}

impl std::fmt::Display for DomainReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DomainReason::DivisionByZero => "division by zero",
            DomainReason::LogOfNonPositive => "ln of a non-positive value",
            DomainReason::SqrtOfNegative => "sqrt of a negative value",
            DomainReason::NegativeBaseFractionalExponent => {
                "negative base raised to a non-integer exponent"
            }
            DomainReason::NonFinite => "non-finite result",
            DomainReason::BadLiteral => "numeric literal out of range",
        })
    }
}

/// Evaluation failed inside `subexpr` at the point `x`.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{reason} in `{subexpr}` at x = {x}")]
pub struct DomainError {
    pub reason: DomainReason,
    pub subexpr: String,
    pub x: String,
}

#[derive(Debug, Clone)]
enum Node {
    Lit(Float),
    Var,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>, Box<Expr>),
    Pow(Box<Node>, Box<Node>, Box<Expr>),
    Call(Func, Box<Node>, Box<Expr>),
}

/// An expression with its literals and constants rounded once at a fixed
/// working precision, ready for repeated evaluation along an orbit.
#[derive(Debug, Clone)]
pub struct CompiledFn {
    root: Node,
    precision: Precision,
}

impl CompiledFn {
    pub fn new(expr: &Expr, precision: Precision) -> Result<Self, DomainError> {
        Ok(Self {
            root: lower(expr, precision)?,
            precision,
        })
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn eval(&self, x: &Float) -> Result<Float, DomainError> {
        let bits = self.precision.bits();
        let x = Float::with_val(bits, x);
        eval_node(&self.root, &x, self.precision)
    }

    /// Convenience for grid code working in `f64`.
    pub fn eval_f64(&self, x: f64) -> Result<Float, DomainError> {
        self.eval(&self.precision.float(x))
    }
}

fn lower(expr: &Expr, precision: Precision) -> Result<Node, DomainError> {
    let bits = precision.bits();
    Ok(match expr {
        Expr::Num(text) => match precision.parse_decimal(text) {
            Some(v) => Node::Lit(v),
            None => {
                return Err(DomainError {
                    reason: DomainReason::BadLiteral,
                    subexpr: text.clone(),
                    x: "-".into(),
                })
            }
        },
        Expr::Var => Node::Var,
        Expr::Const(Constant::Pi) => Node::Lit(Float::with_val(bits, MpConstant::Pi)),
        Expr::Const(Constant::E) => Node::Lit(Float::with_val(bits, 1).exp()),
        Expr::Neg(inner) => Node::Neg(Box::new(lower(inner, precision)?)),
        Expr::Call(func, arg) => {
            Node::Call(*func, Box::new(lower(arg, precision)?), Box::new(expr.clone()))
        }
        Expr::Binary(op, lhs, rhs) => {
            let l = Box::new(lower(lhs, precision)?);
            let r = Box::new(lower(rhs, precision)?);
            match op {
                BinOp::Add => Node::Add(l, r),
                BinOp::Sub => Node::Sub(l, r),
                BinOp::Mul => Node::Mul(l, r),
                BinOp::Div => Node::Div(l, r, Box::new(expr.clone())),
                BinOp::Pow => Node::Pow(l, r, Box::new(expr.clone())),
            }
        }
    })
}

fn fail(reason: DomainReason, expr: &Expr, x: &Float, precision: Precision) -> DomainError {
    DomainError {
        reason,
        subexpr: expr.to_string(),
        x: to_decimal(x, precision.digits()),
    }
}

fn eval_node(node: &Node, x: &Float, precision: Precision) -> Result<Float, DomainError> {
    let bits = precision.bits();
    let value = match node {
        Node::Lit(v) => v.clone(),
        Node::Var => x.clone(),
        Node::Neg(inner) => -eval_node(inner, x, precision)?,
        Node::Add(l, r) => eval_node(l, x, precision)? + eval_node(r, x, precision)?,
        Node::Sub(l, r) => eval_node(l, x, precision)? - eval_node(r, x, precision)?,
        Node::Mul(l, r) => eval_node(l, x, precision)? * eval_node(r, x, precision)?,
        Node::Div(l, r, src) => {
            let num = eval_node(l, x, precision)?;
            let den = eval_node(r, x, precision)?;
            if den.is_zero() {
                return Err(fail(DomainReason::DivisionByZero, src, x, precision));
            }
            num / den
        }
        Node::Pow(l, r, src) => {
            let base = eval_node(l, x, precision)?;
            let exponent = eval_node(r, x, precision)?;
            power(base, exponent, bits).map_err(|reason| fail(reason, src, x, precision))?
        }
        Node::Call(func, arg, src) => {
            let v = eval_node(arg, x, precision)?;
            match func {
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Exp => v.exp(),
                Func::Abs => v.abs(),
                Func::Ln => {
                    if v <= 0 {
                        return Err(fail(DomainReason::LogOfNonPositive, src, x, precision));
                    }
                    v.ln()
                }
                Func::Sqrt => {
                    if v < 0 {
                        return Err(fail(DomainReason::SqrtOfNegative, src, x, precision));
                    }
                    v.sqrt()
                }
            }
        }
    };
    if !value.is_finite() {
        let src = match node {
            Node::Div(_, _, src) | Node::Pow(_, _, src) | Node::Call(_, _, src) => src.to_string(),
            _ => "<expression>".to_string(),
        };
        return Err(DomainError {
            reason: DomainReason::NonFinite,
            subexpr: src,
            x: to_decimal(x, precision.digits()),
        });
    }
    Ok(value)
}

fn power(base: Float, exponent: Float, bits: u32) -> Result<Float, DomainReason> {
    if exponent.is_integer() {
        if base.is_zero() && exponent < 0 {
            return Err(DomainReason::DivisionByZero);
        }
        if let Some(n) = exponent.to_i32_saturating().filter(|n| exponent == *n) {
            return Ok(Float::with_val(bits, base.pow(n)));
        }
        return Ok(Float::with_val(bits, base.pow(&exponent)));
    }
    if base.is_zero() {
        return if exponent > 0 {
            Ok(Float::new(bits))
        } else {
            Err(DomainReason::DivisionByZero)
        };
    }
    if base < 0 {
        return Err(DomainReason::NegativeBaseFractionalExponent);
    }
    Ok(base.pow(&exponent))
}
