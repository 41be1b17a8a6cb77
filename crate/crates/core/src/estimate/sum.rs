use rug::ops::Pow;
use rug::Float;

use super::fit::AsymptoticFit;
use crate::orbit::{partial_sum, tail_bound_geometric, Mode, Orbit, RATIO_WINDOW};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TailModel {
    /// `k N^(1-1/a) / (1/a - 1)` from the fitted power law.
    PowerLaw,
    /// `x_N c / (1 - c)` with `c` the largest recent term ratio.
    Geometric,
    /// No usable model; the estimate is the bare partial sum.
    None,
}

/// `S_N` plus a model-based (not rigorous) estimate of the remaining tail.
#[derive(Debug, Clone)]
pub struct SumEstimate {
    pub partial: Float,
    pub tail: Option<Float>,
    pub model: TailModel,
}

impl SumEstimate {
    pub fn total(&self) -> Float {
        match &self.tail {
            Some(t) => Float::with_val(t.prec().max(self.partial.prec()), &self.partial + t),
            None => self.partial.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SumError {
    #[error("tail divergent: fitted exponent a = {0} is at least 1")]
    TailDivergent(String),
    #[error("sum estimates need a positive-mode orbit")]
    NotPositive,
}

pub fn sum_estimate(orbit: &Orbit, fit: Option<&AsymptoticFit>) -> Result<SumEstimate, SumError> {
    if orbit.mode() != Mode::Positive {
        return Err(SumError::NotPositive);
    }
    let bits = orbit.precision().bits();
    let partial = partial_sum(orbit).clone();
    if let Some(fit) = fit {
        if fit.a >= 1 {
            return Err(SumError::TailDivergent(crate::precision::to_decimal(&fit.a, 12)));
        }
        // integral of k t^(-1/a) over [N, inf)
        let n = Float::with_val(bits, orbit.last_index().max(1));
        let inv_a = Float::with_val(bits, fit.a.recip_ref());
        let exponent = Float::with_val(bits, 1 - &inv_a);
        let denom = Float::with_val(bits, &inv_a - 1u32);
        let tail = Float::with_val(bits, &fit.k * n.pow(&exponent)) / denom;
        return Ok(SumEstimate {
            partial,
            tail: Some(tail),
            model: TailModel::PowerLaw,
        });
    }
    if let Some(c) = recent_max_ratio(orbit).filter(|c| *c < 1) {
        if let Ok(tail) = tail_bound_geometric(orbit, &c) {
            return Ok(SumEstimate {
                partial,
                tail: Some(tail),
                model: TailModel::Geometric,
            });
        }
    }
    Ok(SumEstimate {
        partial,
        tail: None,
        model: TailModel::None,
    })
}

fn recent_max_ratio(orbit: &Orbit) -> Option<Float> {
    let terms = orbit.terms();
    if terms.len() < 2 {
        return None;
    }
    let bits = orbit.precision().bits();
    let start = terms.len().saturating_sub(RATIO_WINDOW + 1);
    (start + 1..terms.len())
        .filter(|&n| !terms[n - 1].is_zero())
        .map(|n| Float::with_val(bits, &terms[n] / &terms[n - 1]).abs())
        .max_by(|a, b| a.partial_cmp(b).expect("finite ratios"))
}
