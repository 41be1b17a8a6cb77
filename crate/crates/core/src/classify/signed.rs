use rug::Float;

use super::majorant::{linear_candidates, region_grid};
use super::verdict::{Verdict, Witness};
use super::ClassifyConfig;
use crate::expr::{CompiledFn, DomainError};
use crate::precision::to_decimal;

/// Signed-mode rules for `|f(x)| < |x|`: alternating signs, else an absolute bound.
///
/// The bound `c` is the smallest linear-majorant candidate at or above the
/// sampled supremum of `|f(x)|/|x|`.
pub fn signed_rule(f: &CompiledFn, x_max: f64, cfg: &ClassifyConfig) -> Result<Verdict, DomainError> {
    let precision = f.precision();
    let bits = precision.bits();
    let points = region_grid(x_max, cfg).symmetric_points(precision);
    let mut alternating = true;
    let mut sup = Float::new(bits);
    for x in &points {
        let fx = f.eval(x)?;
        if fx.is_sign_negative() == x.is_sign_negative() || fx.is_zero() {
            alternating = false;
        }
        let ratio = Float::with_val(bits, &fx / x).abs();
        if ratio > sup {
            sup = ratio;
        }
    }
    if alternating {
        let sign_pattern = format!("x f(x) < 0 at all {} grid points", points.len());
        let note = format!("{sign_pattern}: terms alternate in sign with decreasing magnitude");
        return Ok(Verdict::convergent(Witness::Alternating { sign_pattern }, note));
    }
    let shown_sup = to_decimal(&sup, 12);
    for (p, q, label) in linear_candidates() {
        let c = Float::with_val(bits, p) / q;
        if sup <= c {
            let note = format!("|f(x)|/|x| <= {shown_sup} <= {label} < 1 on the grid: absolutely convergent");
            return Ok(Verdict::convergent(Witness::AbsoluteBound { c }, note));
        }
    }
    Ok(Verdict::inconclusive(format!(
        "signs of x f(x) are mixed and sup |f(x)|/|x| = {shown_sup} admits no bound c <= 0.95: \
         this regime is left open"
    )))
}
