//! Orbits `x_{n+1} = f(x_n)` with per-step hypothesis checks and partial sums.

use std::fmt;
use std::io::{self, Write};

use rug::Float;

use crate::expr::{CompiledFn, DomainError, FunctionDef};
use crate::grid::GridSpec;
use crate::precision::{to_decimal, Precision};

/// Number of trailing ratios inspected by [`tail_bound_geometric`].
pub const RATIO_WINDOW: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// `0 < f(x) < x` on `(0, inf)`: terms positive and strictly decreasing.
    Positive,
    /// `|f(x)| < |x|` for `x != 0`: magnitudes strictly decreasing.
    Signed,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Positive => "positive",
            Mode::Signed => "signed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrbitStatus {
    ReachedFloor,
    MaxIterations,
    /// The term at `step` broke the standing hypothesis; it is not recorded.
    HypothesisViolation { step: usize, witness: String },
    /// `f` returned exactly zero from a nonzero positive input.
    Underflow,
}

impl OrbitStatus {
    pub fn name(&self) -> &'static str {
        match self {
            OrbitStatus::ReachedFloor => "ReachedFloor",
            OrbitStatus::MaxIterations => "MaxIterations",
            OrbitStatus::HypothesisViolation { .. } => "HypothesisViolation",
            OrbitStatus::Underflow => "Underflow",
        }
    }
}

impl fmt::Display for OrbitStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrbitStatus::HypothesisViolation { step, witness } => {
                write!(f, "HypothesisViolation at step {step}: {witness}")
            }
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OrbitConfig {
    pub mode: Mode,
    pub max_n: usize,
    pub floor: Float,
    pub precision: Precision,
}

impl OrbitConfig {
    pub const DEFAULT_MAX_N: usize = 1_000_000;

    pub fn new(mode: Mode, precision: Precision) -> Self {
        Self {
            mode,
            max_n: Self::DEFAULT_MAX_N,
            floor: precision.parse_decimal("1e-40").expect("literal"),
            precision,
        }
    }

    pub fn with_max_n(mut self, max_n: usize) -> Self {
        self.max_n = max_n;
        self
    }

    pub fn with_floor(mut self, floor: Float) -> Self {
        self.floor = floor;
        self
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OrbitError {
    #[error("x0 must be nonzero")]
    ZeroSeed,
    #[error("max_n must be at least 1")]
    MaxN,
    #[error("floor must be positive")]
    Floor,
    #[error(transparent)]
    Compile(#[from] DomainError),
}

/// A computed trajectory `x_0, x_1, ..., x_N` with its partial sums.
#[derive(Debug, Clone)]
pub struct Orbit {
    x0: Float,
    terms: Vec<Float>,
    partial_sums: Vec<Float>,
    status: OrbitStatus,
    mode: Mode,
    precision: Precision,
}

impl Orbit {
    /// Builds an orbit from precomputed terms, e.g. synthetic data in tests.
    pub fn from_terms(terms: Vec<Float>, mode: Mode, precision: Precision) -> Self {
        assert!(!terms.is_empty(), "an orbit has at least its seed");
        let mut orbit = Self {
            x0: terms[0].clone(),
            terms: Vec::with_capacity(terms.len()),
            partial_sums: Vec::with_capacity(terms.len()),
            status: OrbitStatus::MaxIterations,
            mode,
            precision,
        };
        for t in terms {
            orbit.push(t);
        }
        orbit
    }

    fn push(&mut self, term: Float) {
        let sum = match self.partial_sums.last() {
            Some(prev) => exact_add(prev, &term),
            None => term.clone(),
        };
        self.terms.push(term);
        self.partial_sums.push(sum);
    }

    pub fn x0(&self) -> &Float {
        &self.x0
    }

    pub fn terms(&self) -> &[Float] {
        &self.terms
    }

    pub fn partial_sums(&self) -> &[Float] {
        &self.partial_sums
    }

    pub fn status(&self) -> &OrbitStatus {
        &self.status
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// Index `N` of the last recorded term.
    pub fn last_index(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn last(&self) -> &Float {
        self.terms.last().expect("nonempty orbit")
    }

    /// Writes `n,x_n,S_n` rows, keeping every `thin`-th term plus the last one.
    pub fn write_csv<W: Write>(&self, mut out: W, thin: usize) -> io::Result<()> {
        let thin = thin.max(1);
        let digits = self.precision.digits();
        writeln!(out, "n,x_n,S_n")?;
        let last = self.last_index();
        for (n, (x, s)) in self.terms.iter().zip(&self.partial_sums).enumerate() {
            if n % thin == 0 || n == last {
                writeln!(out, "{n},{},{}", to_decimal(x, digits), to_decimal(s, digits))?;
            }
        }
        Ok(())
    }
}

/// Sum of two floats with enough precision that no rounding occurs.
fn exact_add(a: &Float, b: &Float) -> Float {
    if b.is_zero() {
        return a.clone();
    }
    if a.is_zero() {
        return b.clone();
    }
    let (ea, eb) = (a.get_exp().unwrap_or(0), b.get_exp().unwrap_or(0));
    let lowest = (ea - a.prec() as i32).min(eb - b.prec() as i32);
    let highest = ea.max(eb) + 1;
    let prec = (highest - lowest).max(1) as u32;
    let mut sum = Float::with_val(prec, a);
    sum += b;
    // drop the carry bit when unused so the width does not creep up per step
    if let Some(e) = sum.get_exp() {
        let needed = (e - lowest).max(1) as u32;
        if needed < prec {
            sum.set_prec(needed);
        }
    }
    sum
}

/// Iterates `f` from `x0` until the floor, `max_n`, or a hypothesis violation.
pub fn iterate(f: &FunctionDef, x0: &Float, config: &OrbitConfig) -> Result<Orbit, OrbitError> {
    let compiled = f.compile(config.precision)?;
    iterate_compiled(&compiled, x0, config)
}

pub fn iterate_compiled(
    f: &CompiledFn,
    x0: &Float,
    config: &OrbitConfig,
) -> Result<Orbit, OrbitError> {
    if x0.is_zero() {
        return Err(OrbitError::ZeroSeed);
    }
    if config.max_n == 0 {
        return Err(OrbitError::MaxN);
    }
    if config.floor <= 0 {
        return Err(OrbitError::Floor);
    }
    let precision = config.precision;
    let digits = precision.digits();
    let x0 = precision.float(x0);
    let mut orbit = Orbit {
        x0: x0.clone(),
        terms: Vec::new(),
        partial_sums: Vec::new(),
        status: OrbitStatus::MaxIterations,
        mode: config.mode,
        precision,
    };
    if config.mode == Mode::Positive && x0 < 0 {
        orbit.status = OrbitStatus::HypothesisViolation {
            step: 0,
            witness: format!("x_0 = {} is not positive", to_decimal(&x0, digits)),
        };
        return Ok(orbit);
    }
    orbit.push(x0);

    for n in 0.. {
        let current = &orbit.terms[n];
        if current.is_zero() || current.clone().abs() < config.floor {
            orbit.status = OrbitStatus::ReachedFloor;
            break;
        }
        if n == config.max_n {
            orbit.status = OrbitStatus::MaxIterations;
            break;
        }
        let step = n + 1;
        let next = match f.eval(current) {
            Ok(v) => v,
            Err(err) => {
                orbit.status = OrbitStatus::HypothesisViolation {
                    step,
                    witness: err.to_string(),
                };
                break;
            }
        };
        let violation = match config.mode {
            Mode::Positive if next.is_zero() => {
                orbit.status = OrbitStatus::Underflow;
                break;
            }
            Mode::Positive if next < 0 => Some("term is negative"),
            Mode::Positive if next >= *current => Some("term did not decrease"),
            Mode::Signed if next.clone().abs() >= current.clone().abs() => {
                Some("magnitude did not decrease")
            }
            _ => None,
        };
        if let Some(reason) = violation {
            orbit.status = OrbitStatus::HypothesisViolation {
                step,
                witness: format!(
                    "{reason}: x_{n} = {}, x_{step} = {}",
                    to_decimal(current, digits),
                    to_decimal(&next, digits)
                ),
            };
            break;
        }
        orbit.push(next);
    }
    Ok(orbit)
}

/// `S_N`, the last partial sum, accumulated in index order without rounding.
pub fn partial_sum(orbit: &Orbit) -> &Float {
    orbit.partial_sums.last().expect("nonempty orbit")
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TailBoundError {
    #[error("ratio c must lie in (0, 1)")]
    Ratio,
    #[error("ratio |x_{step}/x_{prev}| = {ratio} exceeds c", prev = step - 1)]
    RatioExceeded { step: usize, ratio: String },
}

/// Heuristic tail bound `|x_N| c / (1 - c)` for `sum_{k>N} x_k`.
///
/// Valid only if the ratio `|x_{n+1} / x_n|` stays at or below `c` from here
/// on; the last [`RATIO_WINDOW`] recorded ratios are checked.
pub fn tail_bound_geometric(orbit: &Orbit, c: &Float) -> Result<Float, TailBoundError> {
    if *c <= 0 || *c >= 1 {
        return Err(TailBoundError::Ratio);
    }
    let bits = orbit.precision.bits();
    let terms = &orbit.terms;
    let start = terms.len().saturating_sub(RATIO_WINDOW + 1);
    for n in start + 1..terms.len() {
        if terms[n - 1].is_zero() {
            continue;
        }
        let ratio = Float::with_val(bits, &terms[n] / &terms[n - 1]).abs();
        if ratio > *c {
            return Err(TailBoundError::RatioExceeded {
                step: n,
                ratio: to_decimal(&ratio, 12),
            });
        }
    }
    let last = orbit.last().clone().abs();
    let one_minus = Float::with_val(bits, 1 - c);
    Ok(Float::with_val(bits, last * c) / one_minus)
}

/// Outcome of sampling the standing hypotheses on a grid.
#[derive(Debug, Clone)]
pub struct HypothesisReport {
    pub mode: Mode,
    pub checked_grid: Vec<Float>,
    /// `(x, f(x))` pairs, or `(x, error)` when evaluation failed.
    pub violations: Vec<(Float, Result<Float, DomainError>)>,
    pub passed: bool,
}

impl HypothesisReport {
    pub const CAVEAT: &'static str =
        "hypotheses checked on sample points only; a pass is evidence, not proof";

    pub fn describe(&self, digits: u32) -> String {
        if self.passed {
            return format!(
                "{} hypotheses hold at {} grid points ({})",
                self.mode.as_str(),
                self.checked_grid.len(),
                Self::CAVEAT
            );
        }
        let (x, fx) = &self.violations[0];
        let fx = match fx {
            Ok(v) => to_decimal(v, digits),
            Err(e) => e.to_string(),
        };
        format!(
            "{} hypothesis violated at {} of {} grid points; first at x = {}, f(x) = {}",
            self.mode.as_str(),
            self.violations.len(),
            self.checked_grid.len(),
            to_decimal(x, digits),
            fx
        )
    }
}

/// Checks `0 < f(x) < x` (positive) or `0 < |f(x)| < |x|` (signed) on the grid.
pub fn validate_hypotheses(
    f: &CompiledFn,
    mode: Mode,
    grid: &GridSpec,
) -> HypothesisReport {
    let precision = f.precision();
    let checked_grid = match mode {
        Mode::Positive => grid.points(precision),
        Mode::Signed => grid.symmetric_points(precision),
    };
    let mut violations = Vec::new();
    for x in &checked_grid {
        match f.eval(x) {
            Ok(fx) => {
                let ok = match mode {
                    Mode::Positive => fx > 0 && fx < *x,
                    Mode::Signed => !fx.is_zero() && fx.clone().abs() < x.clone().abs(),
                };
                if !ok {
                    violations.push((x.clone(), Ok(fx)));
                }
            }
            Err(err) => violations.push((x.clone(), Err(err))),
        }
    }
    HypothesisReport {
        mode,
        passed: violations.is_empty(),
        checked_grid,
        violations,
    }
}
