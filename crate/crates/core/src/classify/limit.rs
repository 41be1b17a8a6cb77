use std::cmp::Ordering;

use rug::ops::Pow;
use rug::Float;

use super::stabilize::{tail_shrinks, Stabilization, TailBehavior};
use super::verdict::{Verdict, Witness};
use crate::estimate::AsymptoticFit;
use crate::expr::{CompiledFn, DomainError};
use crate::grid::GridSpec;
use crate::precision::{to_decimal, Precision};

/// Digits of headroom the cancellation guard keeps below the working precision.
pub const GUARD_DIGITS: u32 = 12;

#[derive(Debug, Clone)]
pub enum LimitVerdict {
    FiniteNonzero(Float),
    TendsToZero,
    TendsToInfinity,
    Oscillates,
}

impl LimitVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            LimitVerdict::FiniteNonzero(_) => "FiniteNonzero",
            LimitVerdict::TendsToZero => "TendsToZero",
            LimitVerdict::TendsToInfinity => "TendsToInfinity",
            LimitVerdict::Oscillates => "Oscillates",
        }
    }
}

/// Samples of `L_a(x) = (x^a - f(x)^a) / (x^a f(x)^a)` and their limit class.
#[derive(Debug, Clone)]
pub struct LimitProbe {
    pub a: Float,
    pub samples: Vec<(Float, Float)>,
    pub verdict: LimitVerdict,
    /// Most leading digits lost to cancellation at any sample.
    pub cancellation_digits: u32,
}

impl LimitProbe {
    /// `k = L^(-1/a)` for a finite nonzero limit.
    pub fn implied_k(&self) -> Option<Float> {
        match &self.verdict {
            LimitVerdict::FiniteNonzero(l) => {
                let exp = -Float::with_val(self.a.prec(), self.a.recip_ref());
                Some(Float::with_val(l.prec(), l.pow(&exp)))
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProbeError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("f(x) = {fx} is not positive at x = {x}")]
    NonPositive { x: String, fx: String },
    #[error("f(x) >= x at x = {x}")]
    NotBelowIdentity { x: String },
    #[error(
        "x^a and f(x)^a agree to {agreement} digits at x = {x}, beyond the {usable} usable \
         digits of {digits}-digit precision; rerun with a higher --precision"
    )]
    PrecisionGuard { x: String, agreement: String, usable: u32, digits: u32 },
    #[error("exponent must be positive, got {0}")]
    Exponent(String),
}

pub fn probe_limit(
    f: &CompiledFn,
    a: &Float,
    grid: &GridSpec,
    rule: &Stabilization,
) -> Result<LimitProbe, ProbeError> {
    let precision = f.precision();
    if *a <= 0 {
        return Err(ProbeError::Exponent(to_decimal(a, 12)));
    }
    let bits = precision.bits();
    let usable = precision.digits().saturating_sub(GUARD_DIGITS);
    let mut samples = Vec::with_capacity(grid.len());
    let mut cancellation_digits = 0;
    for x in grid.points(precision) {
        let fx = f.eval(&x)?;
        if fx <= 0 {
            return Err(ProbeError::NonPositive {
                x: to_decimal(&x, 12),
                fx: to_decimal(&fx, 12),
            });
        }
        if fx >= x {
            return Err(ProbeError::NotBelowIdentity { x: to_decimal(&x, 12) });
        }
        let xa = Float::with_val(bits, (&x).pow(a));
        let fa = Float::with_val(bits, (&fx).pow(a));
        let diff = Float::with_val(bits, &xa - &fa);
        let agreement = agreement_digits(&diff, &xa);
        if agreement.as_ref().map_or(true, |d| *d > usable) {
            return Err(ProbeError::PrecisionGuard {
                x: to_decimal(&x, 6),
                agreement: agreement.map_or("all".into(), |d| d.to_string()),
                usable,
                digits: precision.digits(),
            });
        }
        cancellation_digits = cancellation_digits.max(agreement.unwrap_or(0));
        let l = diff / Float::with_val(bits, &xa * &fa);
        samples.push((x, l));
    }
    let verdict = match rule.classify(&samples) {
        TailBehavior::Stable { value } if value.clone().abs() < rule.abs_tol => {
            LimitVerdict::TendsToZero
        }
        TailBehavior::Stable { value } => LimitVerdict::FiniteNonzero(value),
        TailBehavior::Trending { shrinking: true } => LimitVerdict::TendsToZero,
        TailBehavior::Trending { shrinking: false } => LimitVerdict::TendsToInfinity,
        TailBehavior::Oscillating { .. } | TailBehavior::Unsettled { .. } => {
            LimitVerdict::Oscillates
        }
    };
    Ok(LimitProbe {
        a: a.clone(),
        samples,
        verdict,
        cancellation_digits,
    })
}

/// Leading decimal digits shared by `x^a` and `f^a`; `None` when they are equal.
fn agreement_digits(diff: &Float, xa: &Float) -> Option<u32> {
    if diff.is_zero() {
        return None;
    }
    let rel = Float::with_val(diff.prec(), diff / xa).abs();
    let digits = -rel.log10().to_f64();
    Some(digits.max(0.0).floor() as u32)
}

/// Bisection settings for [`search_exponent`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentSearchConfig {
    pub a_max: f64,
    pub iterations: u32,
}

impl Default for ExponentSearchConfig {
    fn default() -> Self {
        Self {
            a_max: 4.0,
            iterations: 40,
        }
    }
}

#[derive(Debug, Clone)]
pub enum ExponentSearch {
    Found { fit: AsymptoticFit, probe: LimitProbe },
    NotFound { reason: String },
}

/// Which side of the transition a probe lies on.
enum Side {
    Below,
    Above,
    Exact,
}

fn side(probe: &LimitProbe, window: usize) -> Option<Side> {
    match &probe.verdict {
        LimitVerdict::TendsToZero => Some(Side::Below),
        LimitVerdict::TendsToInfinity => Some(Side::Above),
        LimitVerdict::Oscillates => None,
        // within tolerance of the transition: the direction of drift decides
        LimitVerdict::FiniteNonzero(l) => {
            // drift below the digits that survive cancellation is rounding
            let digits = (l.prec() as f64 * std::f64::consts::LOG10_2) as i32;
            let noise = 10f64.powi(probe.cancellation_digits as i32 + 2 - digits);
            let first = &probe.samples[probe.samples.len().saturating_sub(window)].1;
            let drift = Float::with_val(l.prec(), first - l).abs();
            if drift <= Float::with_val(l.prec(), l.abs_ref()) * noise {
                return Some(Side::Exact);
            }
            Some(match tail_shrinks(&probe.samples, window) {
                Ordering::Greater => Side::Below,
                _ => Side::Above,
            })
        }
    }
}

/// Bisects on the probe verdict over `(0, a_max]` for the exponent where
/// `L_a` switches from tending to 0 to tending to infinity, then confirms a
/// finite nonzero limit there.
pub fn search_exponent(
    f: &CompiledFn,
    grid: &GridSpec,
    rule: &Stabilization,
    search: &ExponentSearchConfig,
) -> Result<ExponentSearch, ProbeError> {
    let precision = f.precision();
    let bits = precision.bits();
    let not_found = |reason: String| Ok(ExponentSearch::NotFound { reason });

    let mut lo = Float::new(bits);
    let mut hi = precision.float(search.a_max);
    let top = probe_limit(f, &hi, grid, rule)?;
    match side(&top, rule.window) {
        Some(Side::Above) => {}
        None => return not_found(format!("L_a oscillates at a = {}", search.a_max)),
        Some(_) => {
            return not_found(format!(
                "L_a does not tend to infinity at a = {}: no transition in range",
                search.a_max
            ))
        }
    }

    let mut seen_below = false;
    let mut exact = None;
    for _ in 0..search.iterations {
        let mid = midpoint(&lo, &hi);
        let probe = probe_limit(f, &mid, grid, rule)?;
        match side(&probe, rule.window) {
            Some(Side::Below) => {
                seen_below = true;
                lo = mid;
            }
            Some(Side::Above) => hi = mid,
            Some(Side::Exact) => {
                exact = Some(probe);
                break;
            }
            None => {
                return not_found(format!(
                    "L_a oscillates at a = {}",
                    to_decimal(&mid, 12)
                ))
            }
        }
    }

    let probe = match exact {
        Some(p) => p,
        None if !seen_below => {
            return not_found(format!(
                "L_a tends to infinity for every sampled a down to {}",
                to_decimal(&hi, 3)
            ))
        }
        None => probe_limit(f, &midpoint(&lo, &hi), grid, rule)?,
    };
    let Some(k) = probe.implied_k() else {
        return not_found(format!(
            "confirmation probe at a = {} gives {}",
            to_decimal(&probe.a, 12),
            probe.verdict.name()
        ));
    };
    let residual = relative_spread(&probe, rule.window);
    Ok(ExponentSearch::Found {
        fit: AsymptoticFit {
            a: probe.a.clone(),
            k,
            residual,
            window: None,
        },
        probe,
    })
}

fn midpoint(lo: &Float, hi: &Float) -> Float {
    Float::with_val(lo.prec(), lo + hi) / 2u32
}

/// `(max - min) / |last|` over the tail window.
fn relative_spread(probe: &LimitProbe, window: usize) -> f64 {
    let tail = &probe.samples[probe.samples.len().saturating_sub(window)..];
    let (mut lo, mut hi) = (tail[0].1.to_f64(), tail[0].1.to_f64());
    for (_, v) in tail {
        lo = lo.min(v.to_f64());
        hi = hi.max(v.to_f64());
    }
    let last = tail[tail.len() - 1].1.to_f64().abs();
    if last > 0.0 {
        (hi - lo) / last
    } else {
        f64::INFINITY
    }
}

/// Exponent test on a confirmed law `x_n ~ k n^(-1/a)`: `a >= 1` diverges, `a < 1` converges.
pub fn limit_exponent_rule(fit: &AsymptoticFit, margin: f64, precision: Precision) -> Verdict {
    let bits = precision.bits();
    let a = &fit.a;
    let shown = format!("a = {}, k = {}", to_decimal(a, 12), to_decimal(&fit.k, 12));
    let witness = Witness::LimitExponent {
        a: a.clone(),
        k: fit.k.clone(),
    };
    let gap = Float::with_val(bits, a - 1u32);
    if gap >= margin {
        Verdict::divergent(witness, format!("{shown}: a >= 1, terms decay like n^(-1/a)"))
    } else if gap <= -margin {
        Verdict::convergent(witness, format!("{shown}: a < 1, terms decay like n^(-1/a)"))
    } else {
        Verdict::divergent(
            witness,
            format!("{shown}: a is within {margin:e} of the boundary a = 1, which diverges"),
        )
    }
}
