//! Fixed-window Cauchy criterion for sampled limits at the origin.

use std::cmp::Ordering;

use rug::Float;

use crate::estimate::extrapolate_limit;

/// Window and tolerances of the stabilization rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stabilization {
    pub window: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for Stabilization {
    fn default() -> Self {
        Self {
            window: 8,
            rel_tol: 1e-6,
            abs_tol: 1e-30,
        }
    }
}

/// How the tail of a sample sequence behaves as `x -> 0`.
#[derive(Debug, Clone)]
pub enum TailBehavior {
    /// Spread below tolerance; `value` is the extrapolated limit when the
    /// extrapolation agrees with the tail, else the last sample.
    Stable { value: Float },
    /// Magnitudes move monotonically; `shrinking` when they decrease toward 0.
    Trending { shrinking: bool },
    /// Spread above ten times the tolerance on two consecutive windows.
    Oscillating { low: Float, high: Float },
    /// Neither stable, monotone, nor persistently oscillating.
    Unsettled { low: Float, high: Float },
}

struct WindowStats {
    low: Float,
    high: Float,
    median: Float,
}

impl WindowStats {
    fn of(values: &[&Float]) -> Self {
        let mut sorted: Vec<&Float> = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        let mid = sorted.len() / 2;
        let median = if sorted.len() % 2 == 0 {
            let sum = Float::with_val(sorted[mid].prec(), sorted[mid - 1] + sorted[mid]);
            sum / 2u32
        } else {
            sorted[mid].clone()
        };
        Self {
            low: sorted[0].clone(),
            high: sorted[sorted.len() - 1].clone(),
            median,
        }
    }

    fn spread(&self) -> Float {
        Float::with_val(self.high.prec(), &self.high - &self.low)
    }

    fn scaled_median(&self, factor: f64) -> Float {
        Float::with_val(self.median.prec(), self.median.abs_ref()) * factor
    }
}

impl Stabilization {
    fn tolerance(&self, stats: &WindowStats) -> Float {
        let rel = stats.scaled_median(self.rel_tol);
        if rel > self.abs_tol {
            rel
        } else {
            Float::with_val(rel.prec(), self.abs_tol)
        }
    }

    /// True when the last window of `values` satisfies the Cauchy criterion.
    pub fn is_stable(&self, values: &[Float]) -> bool {
        if values.len() < self.window {
            return false;
        }
        let tail: Vec<&Float> = values[values.len() - self.window..].iter().collect();
        let stats = WindowStats::of(&tail);
        stats.spread() < self.tolerance(&stats)
    }

    /// Classifies the tail of `samples` (`(x, v)` with `x` descending).
    pub fn classify(&self, samples: &[(Float, Float)]) -> TailBehavior {
        let w = self.window.max(2);
        let n = samples.len();
        assert!(n > w, "need more than {w} samples, got {n}");
        let values: Vec<&Float> = samples.iter().map(|(_, v)| v).collect();
        let last = WindowStats::of(&values[n - w..]);
        let prev = WindowStats::of(&values[n - w - 1..n - 1]);

        if last.spread() < self.tolerance(&last) {
            let tail = &samples[n - w..];
            let value = match extrapolate_limit(tail) {
                Ok(est) if !est.fallback && est.uncertainty <= self.tolerance(&last) => est.value,
                _ => tail[w - 1].1.clone(),
            };
            return TailBehavior::Stable { value };
        }

        let mags: Vec<Float> = values[n - w..].iter().map(|v| Float::with_val(v.prec(), v.abs_ref())).collect();
        let decreasing = mags.windows(2).all(|p| p[1] < p[0]);
        let increasing = mags.windows(2).all(|p| p[1] > p[0]);
        if decreasing || increasing {
            return TailBehavior::Trending {
                shrinking: decreasing,
            };
        }

        let wide = |s: &WindowStats| s.spread() > s.scaled_median(10.0 * self.rel_tol);
        if wide(&last) && wide(&prev) {
            TailBehavior::Oscillating {
                low: last.low,
                high: last.high,
            }
        } else {
            TailBehavior::Unsettled {
                low: last.low,
                high: last.high,
            }
        }
    }
}

/// Whether the tail magnitudes of `samples` shrink as `x -> 0`.
pub fn tail_shrinks(samples: &[(Float, Float)], window: usize) -> Ordering {
    let n = samples.len();
    let first = samples[n.saturating_sub(window)].1.clone().abs();
    let last = samples[n - 1].1.clone().abs();
    first.partial_cmp(&last).unwrap_or(Ordering::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::precision::Precision;

    fn samples(mut v: impl FnMut(&Float) -> Float) -> Vec<(Float, Float)> {
        GridSpec::PROBE
            .points(Precision::default())
            .into_iter()
            .map(|x| {
                let y = v(&x);
                (x, y)
            })
            .collect()
    }

    #[test]
    fn converging_sequence_is_stable() {
        let s = samples(|x| Float::with_val(x.prec(), 1 + x).recip());
        match Stabilization::default().classify(&s) {
            TailBehavior::Stable { value } => assert!((value.to_f64() - 1.0).abs() < 1e-20),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn power_decay_is_trending() {
        let s = samples(|x| Float::with_val(x.prec(), x.sqrt_ref()));
        assert!(matches!(
            Stabilization::default().classify(&s),
            TailBehavior::Trending { shrinking: true }
        ));
        let s = samples(|x| Float::with_val(x.prec(), x.sqrt_ref()).recip());
        assert!(matches!(
            Stabilization::default().classify(&s),
            TailBehavior::Trending { shrinking: false }
        ));
        assert_eq!(tail_shrinks(&s, 8), Ordering::Less);
    }

    #[test]
    fn oscillation_is_detected() {
        let s = samples(|x| {
            let s = Float::with_val(x.prec(), x.recip_ref()).sin();
            s / 3u32 + 0.5
        });
        match Stabilization::default().classify(&s) {
            TailBehavior::Oscillating { low, high } => assert!(low < high),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn small_wobble_is_unsettled() {
        let mut flip = false;
        let s = samples(|x| {
            flip = !flip;
            let bump = if flip { 3e-6 } else { -3e-6 };
            Float::with_val(x.prec(), 1.0 + bump)
        });
        assert!(matches!(
            Stabilization::default().classify(&s),
            TailBehavior::Unsettled { .. }
        ));
    }
}
