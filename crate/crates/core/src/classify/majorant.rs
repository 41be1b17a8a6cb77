use std::fmt;

use rug::Float;

use super::derivative::{derivative_rule, estimate_derivative_at_zero};
use super::limit::{limit_exponent_rule, search_exponent, ExponentSearch, ProbeError};
use super::verdict::{Conclusion, Verdict, Witness};
use super::ClassifyConfig;
use crate::expr::{constant_value, CompiledFn, ConstantError, DomainError, FunctionDef, ParseError};
use crate::grid::GridSpec;
use crate::precision::{to_decimal, Precision};

#[derive(Debug, Clone)]
pub enum MajorantFamily {
    /// `m(x) = c x`.
    Linear { c: Float, label: String },
    /// `m(x) = x / (1 + c x^a)^(1/a)`.
    PowerLaw { a: Float, c: Float, a_label: String, c_label: String },
    UserFunction(FunctionDef),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Monotonicity {
    /// Increasing on `(0, inf)` by construction.
    Everywhere,
    Unchecked,
    /// Sampled nondecreasing on `(0, delta]`.
    UpTo(Float),
}

#[derive(Debug, Clone)]
pub struct MajorantSpec {
    pub family: MajorantFamily,
    pub monotone: Monotonicity,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MajorantParseError {
    #[error("unknown majorant `{0}`; expected linear:<c>, powerlaw:a=<a>,c=<c> or fn:<expr>")]
    Unknown(String),
    #[error("majorant parameter `{name}`: {source}")]
    Parameter { name: String, source: ConstantError },
    #[error("majorant parameter `{name}` = {value} must lie in {range}")]
    Range { name: String, value: String, range: &'static str },
    #[error("powerlaw majorant needs both a= and c=, got `{0}`")]
    PowerLawFields(String),
    #[error("majorant function: {0}")]
    Function(#[from] ParseError),
}

impl MajorantSpec {
    pub fn linear(label: &str, precision: Precision) -> Result<Self, MajorantParseError> {
        let c = parameter("c", label, precision)?;
        if !(c > 0 && c < 1) {
            return Err(out_of_range("c", &c, "(0, 1)"));
        }
        Ok(Self {
            family: MajorantFamily::Linear {
                c,
                label: label.trim().to_string(),
            },
            monotone: Monotonicity::Everywhere,
        })
    }

    pub fn power_law(a_label: &str, c_label: &str, precision: Precision) -> Result<Self, MajorantParseError> {
        let a = parameter("a", a_label, precision)?;
        let c = parameter("c", c_label, precision)?;
        if !(a > 0 && a < 1) {
            return Err(out_of_range("a", &a, "(0, 1)"));
        }
        if !(c > 0) {
            return Err(out_of_range("c", &c, "(0, inf)"));
        }
        Ok(Self {
            family: MajorantFamily::PowerLaw {
                a,
                c,
                a_label: a_label.trim().to_string(),
                c_label: c_label.trim().to_string(),
            },
            monotone: Monotonicity::Everywhere,
        })
    }

    pub fn user(f: FunctionDef) -> Self {
        Self {
            family: MajorantFamily::UserFunction(f),
            monotone: Monotonicity::Unchecked,
        }
    }

    /// `linear:5/6`, `powerlaw:a=0.5,c=1` or `fn:<expr>`.
    pub fn parse(text: &str, precision: Precision) -> Result<Self, MajorantParseError> {
        let (kind, rest) = text
            .split_once(':')
            .ok_or_else(|| MajorantParseError::Unknown(text.to_string()))?;
        match kind.trim() {
            "linear" => Self::linear(rest, precision),
            "powerlaw" => {
                let (mut a, mut c) = (None, None);
                for part in rest.split(',') {
                    match part.split_once('=').map(|(k, v)| (k.trim(), v)) {
                        Some(("a", v)) if a.is_none() => a = Some(v),
                        Some(("c", v)) if c.is_none() => c = Some(v),
                        _ => return Err(MajorantParseError::PowerLawFields(rest.to_string())),
                    }
                }
                match (a, c) {
                    (Some(a), Some(c)) => Self::power_law(a, c, precision),
                    _ => Err(MajorantParseError::PowerLawFields(rest.to_string())),
                }
            }
            "fn" => Ok(Self::user(FunctionDef::parse(rest)?)),
            _ => Err(MajorantParseError::Unknown(text.to_string())),
        }
    }

    pub fn id(&self) -> String {
        match &self.family {
            MajorantFamily::Linear { label, .. } => format!("linear:{label}"),
            MajorantFamily::PowerLaw { a_label, c_label, .. } => {
                format!("powerlaw:a={a_label},c={c_label}")
            }
            MajorantFamily::UserFunction(f) => format!("fn:{}", f.render()),
        }
    }

    pub fn function(&self) -> FunctionDef {
        let text = match &self.family {
            MajorantFamily::Linear { label, .. } => format!("({label}) * x"),
            MajorantFamily::PowerLaw { a_label, c_label, .. } => {
                format!("x / (1 + ({c_label}) * x ^ ({a_label})) ^ (1 / ({a_label}))")
            }
            MajorantFamily::UserFunction(f) => return f.clone(),
        };
        FunctionDef::parse(&text).expect("majorant parameters were validated as expressions")
    }
}

impl fmt::Display for MajorantSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

fn parameter(name: &str, text: &str, precision: Precision) -> Result<Float, MajorantParseError> {
    constant_value(text, precision).map_err(|source| MajorantParseError::Parameter {
        name: name.to_string(),
        source,
    })
}

fn out_of_range(name: &str, value: &Float, range: &'static str) -> MajorantParseError {
    MajorantParseError::Range {
        name: name.to_string(),
        value: to_decimal(value, 12),
        range,
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MajorantError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("certifying the majorant: {0}")]
    Certify(#[from] ProbeError),
}

/// Sampled monotonicity on a grid.
#[derive(Debug, Clone)]
pub struct MonotoneCheck {
    pub monotone: bool,
    /// Largest grid point below which every sampled pair is nondecreasing;
    /// 0 when the two smallest samples already decrease.
    pub delta: Float,
}

pub fn check_monotone(f: &CompiledFn, grid: &GridSpec) -> Result<MonotoneCheck, DomainError> {
    let precision = f.precision();
    let mut points = grid.points(precision);
    points.reverse();
    let mut prev = f.eval(&points[0])?;
    for i in 1..points.len() {
        let cur = f.eval(&points[i])?;
        if cur < prev {
            let delta = if i == 1 { precision.zero() } else { points[i - 1].clone() };
            return Ok(MonotoneCheck {
                monotone: false,
                delta,
            });
        }
        prev = cur;
    }
    Ok(MonotoneCheck {
        monotone: true,
        delta: points[points.len() - 1].clone(),
    })
}

/// Region grid for domination checks: 16 points per decade from `x_max` down
/// to the probe floor.
pub fn region_grid(x_max: f64, cfg: &ClassifyConfig) -> GridSpec {
    let floor = cfg.probe_grid.floor.min(x_max);
    GridSpec::decades(x_max, cfg.region_per_decade, floor)
}

/// First grid point where `0 < g(x) <= m(x) < x` fails, if any, plus the
/// smallest gap `m(x) - g(x)` seen.
fn domination(
    g_values: &[(Float, Float)],
    m: &CompiledFn,
) -> Result<Result<Float, String>, DomainError> {
    let mut margin: Option<Float> = None;
    for (x, gx) in g_values {
        let mx = m.eval(x)?;
        let digits = 12;
        if !(*gx > 0) {
            return Ok(Err(format!("g(x) = {} <= 0 at x = {}", to_decimal(gx, digits), to_decimal(x, digits))));
        }
        if *gx > mx {
            return Ok(Err(format!(
                "g(x) = {} > m(x) = {} at x = {}",
                to_decimal(gx, digits),
                to_decimal(&mx, digits),
                to_decimal(x, digits)
            )));
        }
        if mx >= *x {
            return Ok(Err(format!("m(x) >= x at x = {}", to_decimal(x, digits))));
        }
        let gap = Float::with_val(mx.prec(), &mx - gx);
        if margin.as_ref().map_or(true, |m| gap < *m) {
            margin = Some(gap);
        }
    }
    Ok(margin.ok_or_else(|| "empty grid".to_string()))
}

fn sample(g: &CompiledFn, grid: &GridSpec) -> Result<Vec<(Float, Float)>, DomainError> {
    grid.points(g.precision())
        .into_iter()
        .map(|x| g.eval(&x).map(|gx| (x, gx)))
        .collect()
}

/// Comparison test: `g <= m < id` on the sampled region with `m` monotone
/// and generating a convergent series.
pub fn majorant_rule(
    g: &CompiledFn,
    m: &MajorantSpec,
    x_max: f64,
    cfg: &ClassifyConfig,
) -> Result<Verdict, MajorantError> {
    let grid = region_grid(x_max, cfg);
    let values = sample(g, &grid)?;
    majorant_rule_sampled(&values, m, &grid, g.precision(), cfg)
}

fn majorant_rule_sampled(
    g_values: &[(Float, Float)],
    m: &MajorantSpec,
    grid: &GridSpec,
    precision: Precision,
    cfg: &ClassifyConfig,
) -> Result<Verdict, MajorantError> {
    let id = m.id();
    let mf = m.function().compile(precision)?;
    let margin = match domination(g_values, &mf)? {
        Ok(margin) => margin,
        Err(witness) => {
            return Ok(Verdict::inconclusive(format!("{id} does not dominate: {witness}")));
        }
    };
    let delta = match &m.monotone {
        Monotonicity::Everywhere => None,
        _ => {
            let check = check_monotone(&mf, grid)?;
            if check.delta.is_zero() {
                return Ok(Verdict::inconclusive(format!(
                    "{id} is not monotone near 0 at grid resolution"
                )));
            }
            Some(check.delta)
        }
    };
    let reason = match &m.family {
        MajorantFamily::Linear { label, .. } => format!("geometric with ratio {label}"),
        MajorantFamily::PowerLaw { a_label, .. } => format!("power-law majorant with a = {a_label} < 1"),
        MajorantFamily::UserFunction(_) => match certify_user_majorant(&mf, cfg)? {
            Ok(reason) => reason,
            Err(why) => {
                return Ok(Verdict::inconclusive(format!(
                    "{id} dominates but its own convergence is not certified: {why}"
                )))
            }
        },
    };
    let shown_delta = delta.as_ref().map_or("inf".to_string(), |d| to_decimal(d, 12));
    let note = format!(
        "{id} dominates on {} grid points with margin {}, monotone up to {shown_delta}; {reason}",
        g_values.len(),
        to_decimal(&margin, 12)
    );
    Ok(Verdict::convergent(Witness::Majorant { id, delta, margin }, note))
}

/// Runs the derivative and limit-exponent rules on `m` itself.
fn certify_user_majorant(m: &CompiledFn, cfg: &ClassifyConfig) -> Result<Result<String, String>, MajorantError> {
    let est = estimate_derivative_at_zero(m, &cfg.probe_grid, &cfg.stabilization)?;
    let verdict = derivative_rule(&est, cfg.derivative_margin, 12);
    if verdict.conclusion() == Conclusion::Convergent {
        return Ok(Ok(format!("its series converges by the derivative rule ({})", verdict.notes()[0])));
    }
    if !verdict.notes()[0].contains("limit-exponent") {
        return Ok(Err(verdict.notes()[0].clone()));
    }
    match search_exponent(m, &cfg.probe_grid, &cfg.stabilization, &cfg.search)? {
        ExponentSearch::Found { fit, .. } => {
            let v = limit_exponent_rule(&fit, cfg.exponent_margin, m.precision());
            if v.conclusion() == Conclusion::Convergent {
                Ok(Ok(format!("its series converges by the limit-exponent rule ({})", v.notes()[0])))
            } else {
                Ok(Err(v.notes()[0].clone()))
            }
        }
        ExponentSearch::NotFound { reason } => Ok(Err(reason)),
    }
}

/// Decimal-grid values `0.1, 0.15, ..., 0.95` as multiples of 1/20.
const LINEAR_GRID: std::ops::RangeInclusive<u32> = 2..=19;
/// Denominators of the exact fractions added to the linear candidates.
const MAX_DENOMINATOR: u32 = 12;
const POWER_A: [&str; 9] = ["0.1", "0.2", "0.3", "0.4", "0.5", "0.6", "0.7", "0.8", "0.9"];
const POWER_C: [&str; 5] = ["0.25", "0.5", "1", "2", "4"];

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `(numerator, denominator, label)` of the linear candidates, ascending.
///
/// The decimal grid is merged with the reduced fractions `p/q`, `q <= 12`,
/// lying in `[0.1, 0.95]`, so that bounds such as `5/6` are found exactly.
pub fn linear_candidates() -> Vec<(u32, u32, String)> {
    let mut out: Vec<(u32, u32, String)> = LINEAR_GRID
        .map(|k| {
            let label = format!("{}", f64::from(k) / 20.0);
            let g = gcd(k, 20);
            (k / g, 20 / g, label)
        })
        .collect();
    for q in 2..=MAX_DENOMINATOR {
        for p in 1..q {
            let on_grid = (20 * p) % q == 0;
            let in_range = 10 * p >= q && 20 * p <= 19 * q;
            if gcd(p, q) == 1 && !on_grid && in_range {
                out.push((p, q, format!("{p}/{q}")));
            }
        }
    }
    out.sort_by(|a, b| (u64::from(a.0) * u64::from(b.1)).cmp(&(u64::from(b.0) * u64::from(a.1))));
    out
}

/// Built-in candidates in search order: linear ascending, then power laws
/// by `c` then `a`.
pub fn builtin_candidates(precision: Precision) -> Vec<MajorantSpec> {
    let mut out: Vec<MajorantSpec> = linear_candidates()
        .iter()
        .map(|(_, _, label)| MajorantSpec::linear(label, precision).expect("valid candidate"))
        .collect();
    for c in POWER_C {
        for a in POWER_A {
            out.push(MajorantSpec::power_law(a, c, precision).expect("valid candidate"));
        }
    }
    out
}

/// First built-in candidate that dominates `g` on the region grid, and the
/// majorant-rule verdict for it.
pub fn search_majorant(
    g: &CompiledFn,
    x_max: f64,
    cfg: &ClassifyConfig,
) -> Result<Option<(MajorantSpec, Verdict)>, MajorantError> {
    let precision = g.precision();
    let grid = region_grid(x_max, cfg);
    let values = sample(g, &grid)?;
    for m in builtin_candidates(precision) {
        let mf = m.function().compile(precision)?;
        if domination(&values, &mf)?.is_ok() {
            let verdict = majorant_rule_sampled(&values, &m, &grid, precision, cfg)?;
            return Ok(Some((m, verdict)));
        }
    }
    Ok(None)
}

/// Term-by-term comparison of the orbits of `g` and `m` from `x0`.
#[derive(Debug, Clone)]
pub struct OrbitComparison {
    /// `(n, g^n(x0), m^n(x0))`.
    pub rows: Vec<(usize, Float, Float)>,
    /// First `n` with `m^n(x0) < g^n(x0)`.
    pub first_violation: Option<usize>,
}

pub fn compare_orbits(
    g: &CompiledFn,
    m: &CompiledFn,
    x0: &Float,
    steps: usize,
) -> Result<OrbitComparison, DomainError> {
    let mut gx = x0.clone();
    let mut mx = x0.clone();
    let mut rows = Vec::with_capacity(steps + 1);
    let mut first_violation = None;
    for n in 0..=steps {
        if n > 0 {
            gx = g.eval(&gx)?;
            mx = m.eval(&mx)?;
        }
        if first_violation.is_none() && mx < gx {
            first_violation = Some(n);
        }
        rows.push((n, gx.clone(), mx.clone()));
        if gx.is_zero() && mx.is_zero() {
            break;
        }
    }
    Ok(OrbitComparison { rows, first_violation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::Rule;
    use crate::expr::parse;

    const OSC: &str = "x*(1/2+1/3*sin(1/x))";

    fn p() -> Precision {
        Precision::default()
    }

    fn compiled(text: &str) -> CompiledFn {
        parse(text).unwrap().compile(p()).unwrap()
    }

    #[test]
    fn parse_specs() {
        let m = MajorantSpec::parse("linear:5/6", p()).unwrap();
        assert_eq!(m.id(), "linear:5/6");
        assert_eq!(m.function().render(), "5 / 6 * x");
        let m = MajorantSpec::parse("powerlaw:c=1,a=0.5", p()).unwrap();
        assert_eq!(m.id(), "powerlaw:a=0.5,c=1");
        assert_eq!(m.function().render(), "x / (1 + 1 * x ^ 0.5) ^ (1 / 0.5)");
        let m = MajorantSpec::parse("fn:x/(1+x)^2", p()).unwrap();
        assert_eq!(m.monotone, Monotonicity::Unchecked);
        assert!(matches!(MajorantSpec::parse("linear:1", p()), Err(MajorantParseError::Range { .. })));
        assert!(matches!(MajorantSpec::parse("linear:x", p()), Err(MajorantParseError::Parameter { .. })));
        assert!(matches!(MajorantSpec::parse("powerlaw:a=2,c=1", p()), Err(MajorantParseError::Range { .. })));
        assert!(matches!(MajorantSpec::parse("powerlaw:a=0.5", p()), Err(MajorantParseError::PowerLawFields(_))));
        assert!(matches!(MajorantSpec::parse("cubic:1", p()), Err(MajorantParseError::Unknown(_))));
    }

    #[test]
    fn candidates_are_sorted_and_unique() {
        let c = linear_candidates();
        let values: Vec<f64> = c.iter().map(|(p, q, _)| f64::from(*p) / f64::from(*q)).collect();
        assert!(values.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(values[0], 0.1);
        assert_eq!(*values.last().unwrap(), 0.95);
        let labels: Vec<&str> = c.iter().map(|(_, _, l)| l.as_str()).collect();
        assert!(labels.contains(&"5/6") && labels.contains(&"0.5") && !labels.contains(&"1/2"));
        assert_eq!(builtin_candidates(p()).len(), c.len() + 45);
    }

    #[test]
    fn monotone_checks() {
        let grid = GridSpec::decades(1.0, 16, 1e-25);
        let check = check_monotone(&compiled("x/(1+x^(1/2))^2"), &grid).unwrap();
        assert!(check.monotone);
        assert!((check.delta.to_f64() - 1.0).abs() < 1e-12);
        assert!(check_monotone(&compiled("5/6*x"), &grid).unwrap().monotone);
        let check = check_monotone(&compiled(OSC), &grid).unwrap();
        assert!(!check.monotone);
        assert!(check.delta < 1e-20, "{}", check.delta);
    }

    #[test]
    fn oscillatory_function_under_five_sixths() {
        let cfg = ClassifyConfig::default();
        let m = MajorantSpec::parse("linear:5/6", p()).unwrap();
        let v = majorant_rule(&compiled(OSC), &m, 0.3, &cfg).unwrap();
        assert_eq!(v.rule(), Some(Rule::MajorantRule));
        let (found, v) = search_majorant(&compiled(OSC), 0.3, &cfg).unwrap().unwrap();
        assert_eq!(found.id(), "linear:5/6");
        assert_eq!(v.rule(), Some(Rule::MajorantRule));
    }

    #[test]
    fn equality_case_has_zero_margin() {
        let cfg = ClassifyConfig::default();
        let m = MajorantSpec::parse("linear:0.5", p()).unwrap();
        let v = majorant_rule(&compiled("x/2"), &m, 1.0, &cfg).unwrap();
        match v.witness() {
            Some(Witness::Majorant { margin, delta, .. }) => {
                assert!(margin.is_zero());
                assert!(delta.is_none());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn domination_failures_are_inconclusive() {
        let cfg = ClassifyConfig::default();
        let m = MajorantSpec::parse("linear:0.5", p()).unwrap();
        let v = majorant_rule(&compiled("x/(1+x^(1/2))^2"), &m, 1.0, &cfg).unwrap();
        assert_eq!(v.conclusion(), Conclusion::Inconclusive);
        assert!(v.notes()[0].contains("does not dominate"));
        let m = MajorantSpec::parse("powerlaw:a=0.5,c=1", p()).unwrap();
        let v = majorant_rule(&compiled("x/2"), &m, 1.0, &cfg).unwrap();
        assert_eq!(v.conclusion(), Conclusion::Inconclusive);
    }

    #[test]
    fn user_majorant_is_certified() {
        let cfg = ClassifyConfig::default();
        let m = MajorantSpec::parse("fn:x/(1+x^(1/2))^2", p()).unwrap();
        let v = majorant_rule(&compiled("x/(1+2*x^(1/2))^2"), &m, 1.0, &cfg).unwrap();
        assert_eq!(v.rule(), Some(Rule::MajorantRule), "{:?}", v.notes());
        let m = MajorantSpec::parse("fn:x/(1+x)", p()).unwrap();
        let v = majorant_rule(&compiled("x/(2+x)"), &m, 1.0, &cfg).unwrap();
        assert_eq!(v.conclusion(), Conclusion::Inconclusive);
        assert!(v.notes()[0].contains("not certified"), "{:?}", v.notes());
    }

    #[test]
    fn orbit_comparison_holds() {
        let cmp = compare_orbits(&compiled(OSC), &compiled("5/6*x"), &p().float(0.3), 200).unwrap();
        assert_eq!(cmp.rows.len(), 201);
        assert!(cmp.first_violation.is_none());
        let cmp = compare_orbits(&compiled("x/2"), &compiled("x/3"), &p().float(1), 5).unwrap();
        assert_eq!(cmp.first_violation, Some(1));
    }
}
