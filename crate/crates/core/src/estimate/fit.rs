use std::io::{self, Write};
use std::ops::Range;

use rug::ops::Pow;
use rug::Float;

use crate::orbit::{Mode, Orbit};
use crate::precision::{to_decimal, Precision};

/// Minimum number of orbit indices in a fit window.
pub const MIN_WINDOW: usize = 100;
/// Fits with a larger residual are not power laws.
pub const MAX_RESIDUAL: f64 = 0.1;
/// Largest tolerated relative drift of the log-log slope between window halves.
pub const MAX_SLOPE_DRIFT: f64 = 0.05;

/// The law `x_n ~ k n^(-1/a)`.
#[derive(Debug, Clone)]
pub struct AsymptoticFit {
    pub a: Float,
    pub k: Float,
    /// `max |n^(1/a) x_n - k| / k` over the window.
    pub residual: f64,
    /// Orbit indices used; `None` when `(a, k)` came from the limit probe.
    pub window: Option<Range<usize>>,
}

/// Result of [`fit_power_law`]; `rejection` is set when the data is not a power law.
#[derive(Debug, Clone)]
pub struct PowerLawFit {
    pub fit: AsymptoticFit,
    pub slope_drift: f64,
    pub rejection: Option<String>,
}

impl PowerLawFit {
    pub fn is_power_law(&self) -> bool {
        self.rejection.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FitError {
    #[error("fit window {start}..{end} holds fewer than {MIN_WINDOW} usable terms")]
    TooFewTerms { start: usize, end: usize },
    #[error("power-law fits need a positive-mode orbit")]
    NotPositive,
    #[error("orbit is not strictly decreasing at index {0}")]
    NotMonotone(usize),
    #[error("fitted slope {0} is not negative")]
    NonDecayingSlope(String),
}

/// Least-squares line through `(ln n, ln x_n)` over `window`.
///
/// The default window is the last half of the orbit, `[N/2, N]`. Returns
/// `a = -1/slope`, `k = exp(intercept)`, and flags the fit as "no power law"
/// when the residual exceeds [`MAX_RESIDUAL`] or the slopes of the two window
/// halves differ by more than [`MAX_SLOPE_DRIFT`].
pub fn fit_power_law(orbit: &Orbit, window: Option<Range<usize>>) -> Result<PowerLawFit, FitError> {
    if orbit.mode() != Mode::Positive {
        return Err(FitError::NotPositive);
    }
    let terms = orbit.terms();
    let last = orbit.last_index();
    let window = window.unwrap_or(last / 2..last + 1);
    let start = window.start.max(1);
    let end = window.end.min(terms.len());
    if end <= start || end - start < MIN_WINDOW {
        return Err(FitError::TooFewTerms { start, end });
    }
    for n in start..end {
        if terms[n] <= 0 || (n > 0 && terms[n] >= terms[n - 1]) {
            return Err(FitError::NotMonotone(n));
        }
    }
    let precision = orbit.precision();
    let bits = precision.bits();

    let (slope, intercept) = least_squares(terms, start..end, bits);
    if slope >= 0 {
        return Err(FitError::NonDecayingSlope(to_decimal(&slope, 12)));
    }
    let mid = start + (end - start) / 2;
    let (slope_lo, _) = least_squares(terms, start..mid, bits);
    let (slope_hi, _) = least_squares(terms, mid..end, bits);
    let drift = {
        let d = Float::with_val(bits, &slope_hi - &slope_lo);
        (d / &slope).abs().to_f64()
    };

    let a = Float::with_val(bits, -1) / &slope;
    let k = intercept.exp();
    let residual = max_residual(terms, start..end, &a, &k, bits);
    let rejection = if !(residual <= MAX_RESIDUAL) {
        Some(format!("no power law: residual {residual:.3e} exceeds {MAX_RESIDUAL}"))
    } else if !(drift <= MAX_SLOPE_DRIFT) {
        Some(format!(
            "no power law: log-log slope drifts by {:.1}% across the window",
            drift * 100.0
        ))
    } else {
        None
    };
    Ok(PowerLawFit {
        fit: AsymptoticFit {
            a,
            k,
            residual,
            window: Some(start..end),
        },
        slope_drift: drift,
        rejection,
    })
}

fn ln_index(n: usize, bits: u32) -> Float {
    Float::with_val(bits, n).ln()
}

fn least_squares(terms: &[Float], range: Range<usize>, bits: u32) -> (Float, Float) {
    let count = Float::with_val(bits, range.len());
    let mut sx = Float::new(bits);
    let mut sy = Float::new(bits);
    let mut sxx = Float::new(bits);
    let mut sxy = Float::new(bits);
    for n in range {
        let lx = ln_index(n, bits);
        let ly = Float::with_val(bits, terms[n].ln_ref());
        sxx += Float::with_val(bits, lx.square_ref());
        sxy += Float::with_val(bits, &lx * &ly);
        sx += &lx;
        sy += &ly;
    }
    // slope = (n Sxy - Sx Sy) / (n Sxx - Sx^2)
    let num = Float::with_val(bits, &count * &sxy) - Float::with_val(bits, &sx * &sy);
    let den = Float::with_val(bits, &count * &sxx) - Float::with_val(bits, sx.square_ref());
    let slope = num / den;
    let intercept = (sy - Float::with_val(bits, &slope * &sx)) / count;
    (slope, intercept)
}

/// `n^(1/a) x_n` at extended precision.
fn scaled_term(n: usize, x: &Float, inv_a: &Float, bits: u32) -> Float {
    let scale = Float::with_val(bits, n).pow(inv_a);
    scale * x
}

fn max_residual(terms: &[Float], range: Range<usize>, a: &Float, k: &Float, bits: u32) -> f64 {
    let inv_a = Float::with_val(bits, a.recip_ref());
    range
        .map(|n| {
            let r = scaled_term(n, &terms[n], &inv_a, bits);
            (Float::with_val(bits, &r - k) / k).abs().to_f64()
        })
        .fold(0.0, f64::max)
}

/// Sequence `r_n = n^(1/a) x_n` over the final tenth of the orbit.
#[derive(Debug, Clone)]
pub struct AsymptoticTrace {
    pub passed: bool,
    pub worst: f64,
    pub rows: Vec<(usize, Float, Float)>,
    precision: Precision,
}

impl AsymptoticTrace {
    /// CSV `n,x_n,r_n`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let digits = self.precision.digits();
        writeln!(out, "n,x_n,r_n")?;
        for (n, x, r) in &self.rows {
            writeln!(out, "{n},{},{}", to_decimal(x, digits), to_decimal(r, digits))?;
        }
        Ok(())
    }
}

/// Checks `|n^(1/a) x_n / k - 1| <= tolerance` for `n` in `[ceil(0.9 N), N]`.
pub fn verify_asymptotic(orbit: &Orbit, a: &Float, k: &Float, tolerance: f64) -> AsymptoticTrace {
    let precision = orbit.precision();
    let bits = precision.bits();
    let last = orbit.last_index();
    let start = (last - last / 10).max(1);
    let inv_a = Float::with_val(bits, a.recip_ref());
    let mut worst = 0.0f64;
    let mut rows = Vec::with_capacity(last + 1 - start.min(last + 1));
    for n in start..=last {
        let x = &orbit.terms()[n];
        let r = scaled_term(n, x, &inv_a, bits);
        let dev = (Float::with_val(bits, &r / k) - 1u32).abs().to_f64();
        worst = worst.max(dev);
        rows.push((n, x.clone(), r));
    }
    AsymptoticTrace {
        passed: !rows.is_empty() && worst <= tolerance,
        worst,
        rows,
        precision,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::orbit::{iterate, OrbitConfig};

    fn p() -> Precision {
        Precision::default()
    }

    fn orbit(text: &str, x0: f64, max_n: usize, floor: &str) -> Orbit {
        let cfg = OrbitConfig::new(Mode::Positive, p())
            .with_max_n(max_n)
            .with_floor(p().parse_decimal(floor).unwrap());
        iterate(&parse(text).unwrap(), &p().float(x0), &cfg).unwrap()
    }

    /// `x_n = k n^(-1/a)` for `n >= 1`, seeded with `x_0 = 2k`.
    fn synthetic(a: f64, k: f64, len: usize) -> Orbit {
        let bits = p().bits();
        let inv_a = -1.0 / a;
        let terms = (0..len)
            .map(|n| match n {
                0 => Float::with_val(bits, 2.0 * k),
                n => Float::with_val(bits, n).pow(inv_a) * k,
            })
            .collect();
        Orbit::from_terms(terms, Mode::Positive, p())
    }

    #[test]
    fn harmonic_orbit_fit() {
        let o = orbit("x/(1+x)", 1.0, 20_000, "1e-40");
        let fit = fit_power_law(&o, None).unwrap();
        assert!(fit.is_power_law(), "{:?}", fit.rejection);
        assert!((fit.fit.a.to_f64() - 1.0).abs() < 1e-3);
        assert!((fit.fit.k.to_f64() - 1.0).abs() < 1e-3);
        assert!(fit.fit.residual < 1e-3);
        assert_eq!(fit.fit.window, Some(10_000..20_001));
    }

    #[test]
    fn geometric_decay_is_not_a_power_law() {
        let o = orbit("x/2", 1.0, 1_000_000, "1e-300");
        assert!(o.terms().len() > 900);
        let fit = fit_power_law(&o, None).unwrap();
        assert!(!fit.is_power_law());
        assert!(fit.rejection.unwrap().starts_with("no power law"));
    }

    #[test]
    fn short_orbits_are_rejected() {
        let o = orbit("x/2", 1.0, 1_000_000, "1e-40");
        assert!(matches!(fit_power_law(&o, None), Err(FitError::TooFewTerms { .. })));
    }

    #[test]
    fn exact_power_law_is_recovered() {
        let o = synthetic(0.5, 3.0, 4000);
        let fit = fit_power_law(&o, None).unwrap();
        assert!(fit.is_power_law());
        assert!((fit.fit.a.to_f64() - 0.5).abs() < 1e-40);
        assert!((fit.fit.k.to_f64() - 3.0).abs() < 1e-15);
        assert!(fit.fit.residual < 1e-40);
    }

    #[test]
    fn verify_harmonic() {
        let o = orbit("x/(1+x)", 1.0, 100_000, "1e-40");
        let one = p().float(1);
        assert!(verify_asymptotic(&o, &one, &one, 1e-3).passed);
        let two = p().float(2);
        let trace = verify_asymptotic(&o, &two, &one, 1e-3);
        assert!(!trace.passed);
        assert!(trace.worst > 0.5);
    }

    #[test]
    fn trace_csv() {
        let o = orbit("x/(1+x)", 1.0, 30, "1e-40");
        let one = p().float(1);
        let trace = verify_asymptotic(&o, &one, &one, 0.1);
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,x_n,r_n\n27,"));
        assert_eq!(text.lines().count(), 5);
    }
}
