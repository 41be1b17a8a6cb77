use rug::Float;

/// Limit estimate of a sampled sequence `v(x)` as `x -> 0`.
#[derive(Debug, Clone)]
pub struct Extrapolated {
    pub value: Float,
    pub uncertainty: Float,
    /// True when the model fit was rejected and the raw tail value is returned.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtrapolationError {
    #[error("need at least 4 samples, got {0}")]
    TooFewSamples(usize),
    #[error("samples are not on a geometric grid descending toward 0")]
    NotGeometric,
}

/// Relative tolerance on the grid ratio when checking geometric spacing.
const GRID_RATIO_TOL: f64 = 1e-9;
/// Model ratios `r^p` above this are treated as no convergence.
const MAX_MODEL_RATIO: f64 = 0.99;
/// Two consecutive triples must agree on `r^p` to this relative tolerance.
const RATIO_AGREEMENT: f64 = 0.1;

/// One Richardson-style elimination assuming `v(x) = L + A x^p`.
///
/// `samples` are `(x, v)` pairs with `x` descending geometrically. The ratio
/// `q = r^p` is read from the last three samples and cross-checked against the
/// preceding triple; when the model does not hold the raw tail value is
/// returned with the last inter-sample gap as its uncertainty.
pub fn extrapolate_limit(samples: &[(Float, Float)]) -> Result<Extrapolated, ExtrapolationError> {
    let n = samples.len();
    if n < 4 {
        return Err(ExtrapolationError::TooFewSamples(n));
    }
    check_geometric(samples)?;
    let bits = samples.iter().map(|(_, v)| v.prec()).max().unwrap_or(64);
    let v = |i: usize| &samples[i].1;

    let d0 = Float::with_val(bits, v(n - 3) - v(n - 4));
    let d1 = Float::with_val(bits, v(n - 2) - v(n - 3));
    let d2 = Float::with_val(bits, v(n - 1) - v(n - 2));
    let tail = v(n - 1).clone();
    let fallback = || Extrapolated {
        value: tail.clone(),
        uncertainty: d2.clone().abs(),
        fallback: true,
    };

    if d1.is_zero() || d0.is_zero() {
        return Ok(fallback());
    }
    let q = Float::with_val(bits, &d2 / &d1);
    let q_prev = Float::with_val(bits, &d1 / &d0);
    if q <= 0 || q >= MAX_MODEL_RATIO {
        return Ok(fallback());
    }
    let disagreement = Float::with_val(bits, &q - &q_prev).abs();
    if disagreement > Float::with_val(bits, &q * RATIO_AGREEMENT) {
        return Ok(fallback());
    }
    // v_last - L = d2 q / (q - 1)  =>  L = v_last - d2^2 / (d2 - d1)
    let denom = Float::with_val(bits, &d2 - &d1);
    if denom.is_zero() {
        return Ok(fallback());
    }
    let correction = Float::with_val(bits, d2.square_ref()) / denom;
    let value = Float::with_val(bits, &tail - &correction);
    Ok(Extrapolated {
        uncertainty: correction.abs(),
        value,
        fallback: false,
    })
}

fn check_geometric(samples: &[(Float, Float)]) -> Result<(), ExtrapolationError> {
    let bits = samples[0].0.prec();
    let ratio = |i: usize| Float::with_val(bits, &samples[i + 1].0 / &samples[i].0);
    let r0 = ratio(0);
    if r0 <= 0 || r0 >= 1 {
        return Err(ExtrapolationError::NotGeometric);
    }
    for i in 1..samples.len() - 1 {
        let r = ratio(i);
        let dev = Float::with_val(bits, &r - &r0).abs();
        if dev > Float::with_val(bits, &r0 * GRID_RATIO_TOL) {
            return Err(ExtrapolationError::NotGeometric);
        }
    }
    Ok(())
}
