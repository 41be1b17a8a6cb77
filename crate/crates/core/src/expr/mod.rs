//! Defining functions: parsing, rendering and extended-precision evaluation.

mod ast;
mod eval;
mod parse;
mod taylor;

use rug::Float;

pub use ast::{BinOp, Constant, Expr, Func};
pub use eval::{CompiledFn, DomainError, DomainReason};
pub use parse::{parse_expr, ParseError};
pub use taylor::{TaylorDef, TaylorError};

use crate::precision::Precision;

/// A parsed defining function `f` of the single variable `x`.
///
/// Immutable after construction. Equality compares trees, not source text.
#[derive(Debug, Clone)]
pub struct FunctionDef {
    root: Expr,
    source_text: String,
}

impl FunctionDef {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Ok(Self {
            root: parse_expr(text)?,
            source_text: text.to_string(),
        })
    }

    pub fn from_expr(root: Expr) -> Self {
        let source_text = root.to_string();
        Self { root, source_text }
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub fn source_text(&self) -> &str {
        &self.source_text
    }

    /// Canonical text; re-parses to an identical tree.
    pub fn render(&self) -> String {
        self.root.to_string()
    }

    pub fn compile(&self, precision: Precision) -> Result<CompiledFn, DomainError> {
        CompiledFn::new(&self.root, precision)
    }

    pub fn evaluate(&self, x: &Float, precision: Precision) -> Result<Float, DomainError> {
        self.compile(precision)?.eval(x)
    }
}

impl PartialEq for FunctionDef {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}

impl Eq for FunctionDef {}

pub fn parse(text: &str) -> Result<FunctionDef, ParseError> {
    FunctionDef::parse(text)
}

pub fn render(f: &FunctionDef) -> String {
    f.render()
}

pub fn evaluate(f: &FunctionDef, x: &Float, precision: Precision) -> Result<Float, DomainError> {
    f.evaluate(x, precision)
}

/// Error from [`constant_value`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConstantError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("`{0}` must not depend on x")]
    DependsOnX(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Evaluates a closed expression such as `5/6` or `-1/6` at `precision`.
pub fn constant_value(text: &str, precision: Precision) -> Result<Float, ConstantError> {
    let expr = parse_expr(text)?;
    if expr.contains_var() {
        return Err(ConstantError::DependsOnX(text.to_string()));
    }
    Ok(CompiledFn::new(&expr, precision)?.eval(&precision.zero())?)
}
