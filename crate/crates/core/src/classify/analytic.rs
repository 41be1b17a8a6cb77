use rug::Float;

use super::verdict::{Verdict, Witness};
use crate::expr::TaylorDef;
use crate::precision::to_decimal;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalyticError {
    #[error("a1 = {0} != 1, theorem inapplicable; use derivative rule with c = a1")]
    LeadingNotOne(String),
    #[error("all higher coefficients vanish: f(x) = x is not below the identity")]
    NoHigherTerm,
    #[error("first nonzero higher coefficient a{index} = {value} is positive, so f(x) > x near 0")]
    PositiveCorrection { index: usize, value: String },
}

/// An analytic `f` with `a1 = 1` generates a divergent series.
///
/// Also requires the first nonzero coefficient after `a1` to be negative,
/// which is what keeps `f(x) < x` near 0.
pub fn analytic_rule(t: &TaylorDef) -> Result<Verdict, AnalyticError> {
    let coefficients = t.coefficients();
    let leading = t.leading();
    if *leading != 1 {
        return Err(AnalyticError::LeadingNotOne(to_decimal(leading, 12)));
    }
    let (i, value) = coefficients
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, a)| !a.is_zero())
        .ok_or(AnalyticError::NoHigherTerm)?;
    let index = i + 1;
    if *value > 0 {
        return Err(AnalyticError::PositiveCorrection {
            index,
            value: to_decimal(value, 12),
        });
    }
    let note = format!(
        "a1 = 1 and the first higher coefficient a{index} = {} is negative",
        to_decimal(value, 12)
    );
    Ok(Verdict::divergent(
        Witness::Analytic {
            index,
            coefficient: Float::with_val(value.prec(), value),
        },
        note,
    ))
}
