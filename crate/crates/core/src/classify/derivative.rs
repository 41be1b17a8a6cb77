use rug::Float;

use super::stabilize::{Stabilization, TailBehavior};
use super::verdict::Verdict;
use crate::estimate::extrapolate_limit;
use crate::expr::{CompiledFn, DomainError};
use crate::grid::GridSpec;
use crate::precision::to_decimal;

#[derive(Debug, Clone)]
pub enum DerivativeKind {
    Value(Float),
    /// `[low, high]` spanned by the second half of the samples.
    Dne { low: Float, high: Float },
    /// A stable limit outside `[0, 1]`.
    OutOfRange(Float),
}

impl DerivativeKind {
    pub fn name(&self) -> &'static str {
        match self {
            DerivativeKind::Value(_) => "value",
            DerivativeKind::Dne { .. } => "dne",
            DerivativeKind::OutOfRange(_) => "out_of_range",
        }
    }
}

/// Samples of `f(x)/x` on a grid descending to 0 and what they say about `f'(0)`.
#[derive(Debug, Clone)]
pub struct DerivativeEstimate {
    pub kind: DerivativeKind,
    pub samples: Vec<(Float, Float)>,
    pub grid: GridSpec,
}

pub fn estimate_derivative_at_zero(
    f: &CompiledFn,
    grid: &GridSpec,
    rule: &Stabilization,
) -> Result<DerivativeEstimate, DomainError> {
    let precision = f.precision();
    let mut samples = Vec::with_capacity(grid.len());
    for x in grid.points(precision) {
        let q = f.eval(&x)? / &x;
        samples.push((x, q));
    }
    let limit = match rule.classify(&samples) {
        TailBehavior::Stable { value } => Some(value),
        TailBehavior::Trending { .. } => monotone_limit(&samples, rule),
        _ => None,
    };
    let kind = match limit {
        Some(c) if out_of_unit_interval(&c, rule) => DerivativeKind::OutOfRange(c),
        Some(c) => DerivativeKind::Value(c),
        None => {
            let half = &samples[samples.len() / 2..];
            let mut low = half[0].1.clone();
            let mut high = half[0].1.clone();
            for (_, v) in half {
                if *v < low {
                    low = v.clone();
                }
                if *v > high {
                    high = v.clone();
                }
            }
            DerivativeKind::Dne { low, high }
        }
    };
    Ok(DerivativeEstimate {
        kind,
        samples,
        grid: *grid,
    })
}

/// Outside `[0, 1]` by more than the stabilization tolerance.
fn out_of_unit_interval(c: &Float, rule: &Stabilization) -> bool {
    let tol = (c.to_f64().abs() * rule.rel_tol).max(rule.abs_tol);
    *c < -tol || *c > 1.0 + tol
}

/// Passes of the sliding-window elimination tried by [`monotone_limit`].
const MAX_ELIMINATIONS: usize = 3;

/// Limit of a monotone tail when `L + A x^p` fits it to within `rel_tol`.
///
/// `f(x)/x = c + b x` converges too slowly in relative terms for the window
/// criterion when `c = 0`; extrapolation recovers such limits. When one
/// elimination leaves a correction above tolerance (`c + b x^p + d x^(2p)`
/// with small `p`), the tail is replaced by its sliding four-point
/// extrapolations and the elimination is repeated.
fn monotone_limit(samples: &[(Float, Float)], rule: &Stabilization) -> Option<Float> {
    let mut seq = samples[samples.len() / 2..].to_vec();
    for _ in 0..MAX_ELIMINATIONS {
        if seq.len() < rule.window {
            return None;
        }
        let est = extrapolate_limit(&seq[seq.len() - rule.window..]).ok()?;
        if est.fallback {
            return None;
        }
        let scale = Float::with_val(est.value.prec(), est.value.abs_ref()).max(&Float::with_val(53, 1));
        if est.uncertainty <= scale * rule.rel_tol {
            return Some(est.value);
        }
        seq = seq
            .windows(4)
            .map(|w| {
                let e = extrapolate_limit(w).ok().filter(|e| !e.fallback)?;
                Some((w[3].0.clone(), e.value))
            })
            .collect::<Option<Vec<_>>>()?;
    }
    None
}

/// Geometric-domination test on an estimate of `f'(0)`.
///
/// Never concludes divergence; `c` within `margin` of 1 is routed onward.
pub fn derivative_rule(est: &DerivativeEstimate, margin: f64, digits: u32) -> Verdict {
    match &est.kind {
        DerivativeKind::Value(c) => {
            let gap = Float::with_val(c.prec(), 1 - c);
            if gap > margin {
                Verdict::convergent(
                    super::Witness::Derivative { c: c.clone() },
                    format!("f'(0) = {} < 1", to_decimal(c, digits)),
                )
            } else {
                Verdict::inconclusive(format!(
                    "f'(0) = {} is within {margin:e} of 1: route to limit-exponent rule",
                    to_decimal(c, digits)
                ))
            }
        }
        DerivativeKind::Dne { low, high } => Verdict::inconclusive(format!(
            "f(x)/x does not settle, ranging over [{}, {}]: no f'(0) estimate, route to majorant rule",
            to_decimal(low, 6),
            to_decimal(high, 6)
        )),
        DerivativeKind::OutOfRange(c) => Verdict::inconclusive(format!(
            "hypothesis contradiction: f(x)/x tends to {}, outside [0, 1]",
            to_decimal(c, digits)
        )),
    }
}
