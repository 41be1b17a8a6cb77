use std::fmt;

use rug::Float;

use super::analytic::analytic_rule;
use super::derivative::{derivative_rule, estimate_derivative_at_zero, DerivativeEstimate, DerivativeKind};
use super::limit::{limit_exponent_rule, search_exponent, ExponentSearch, ProbeError};
use super::majorant::{compare_orbits, search_majorant, MajorantError, MajorantSpec};
use super::signed::signed_rule;
use super::verdict::{Conclusion, Verdict, Witness};
use super::ClassifyConfig;
use crate::estimate::{fit_power_law, sum_estimate, PowerLawFit, SumEstimate};
use crate::expr::{CompiledFn, DomainError, FunctionDef, TaylorDef};
use crate::grid::GridSpec;
use crate::orbit::{iterate_compiled, validate_hypotheses, HypothesisReport, Mode, Orbit, OrbitConfig, OrbitError, OrbitStatus};
use crate::precision::{to_decimal, Precision};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeChoice {
    Auto,
    Positive,
    Signed,
}

#[derive(Debug, Clone)]
pub struct AnalyzeConfig {
    pub precision: Precision,
    pub mode: ModeChoice,
    pub max_n: usize,
    pub floor: Float,
    pub classify: ClassifyConfig,
    /// Hypothesis grid: `hypothesis_per_decade` points per decade from `|x0|`
    /// down to `hypothesis_floor`.
    pub hypothesis_per_decade: u32,
    pub hypothesis_floor: f64,
    pub taylor: Option<TaylorDef>,
    /// Orbit length of the term-by-term majorant comparison.
    pub comparison_steps: usize,
}

impl AnalyzeConfig {
    pub fn new(precision: Precision) -> Self {
        Self {
            precision,
            mode: ModeChoice::Auto,
            max_n: OrbitConfig::DEFAULT_MAX_N,
            floor: precision.parse_decimal("1e-40").expect("literal"),
            classify: ClassifyConfig::default(),
            hypothesis_per_decade: 4,
            hypothesis_floor: 1e-30,
            taylor: None,
            comparison_steps: 10_000,
        }
    }

    pub fn hypothesis_grid(&self, x0: &Float) -> GridSpec {
        let start = x0.to_f64().abs();
        GridSpec::decades(start, self.hypothesis_per_decade, self.hypothesis_floor.min(start))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Compile,
    Hypotheses,
    Signed,
    Derivative,
    LimitExponent,
    Majorant,
    Orbit,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Compile => "compile",
            Stage::Hypotheses => "hypothesis validation",
            Stage::Signed => "signed rule",
            Stage::Derivative => "derivative estimate",
            Stage::LimitExponent => "exponent search",
            Stage::Majorant => "majorant search",
            Stage::Orbit => "orbit",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StageError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Probe(#[from] ProbeError),
    #[error(transparent)]
    Majorant(#[from] MajorantError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalyzeError {
    #[error("x0 must be nonzero")]
    ZeroSeed,
    #[error("{0}")]
    Hypothesis(String),
    #[error("{stage} failed: {source}")]
    Stage { stage: Stage, source: StageError },
}

fn at<E: Into<StageError>>(stage: Stage) -> impl FnOnce(E) -> AnalyzeError {
    move |e| AnalyzeError::Stage {
        stage,
        source: e.into(),
    }
}

/// Everything the pipeline computed for one function and seed.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub function: FunctionDef,
    pub x0: Float,
    pub mode: Mode,
    pub hypotheses: HypothesisReport,
    pub verdict: Verdict,
    pub derivative: DerivativeEstimate,
    pub exponent: Option<ExponentSearch>,
    pub majorant: Option<MajorantSpec>,
    pub orbit: Orbit,
    pub fit: Result<PowerLawFit, String>,
    pub sum: Option<SumEstimate>,
    pub warnings: Vec<String>,
}

/// Signed when asked for, when `x0 < 0`, or when `f` is negative somewhere
/// on the hypothesis grid.
pub fn resolve_mode(g: &CompiledFn, x0: &Float, cfg: &AnalyzeConfig) -> Mode {
    match cfg.mode {
        ModeChoice::Positive => Mode::Positive,
        ModeChoice::Signed => Mode::Signed,
        ModeChoice::Auto if *x0 < 0 => Mode::Signed,
        ModeChoice::Auto => {
            let takes_negative = cfg
                .hypothesis_grid(x0)
                .points(g.precision())
                .iter()
                .any(|x| matches!(g.eval(x), Ok(fx) if fx < 0));
            if takes_negative {
                Mode::Signed
            } else {
                Mode::Positive
            }
        }
    }
}

/// Validates the hypotheses, applies the rules in order until one is
/// decisive, then iterates the orbit as an empirical cross-check.
pub fn analyze(f: &FunctionDef, x0: &Float, cfg: &AnalyzeConfig) -> Result<Analysis, AnalyzeError> {
    if x0.is_zero() {
        return Err(AnalyzeError::ZeroSeed);
    }
    let precision = cfg.precision;
    let digits = precision.digits();
    let cc = &cfg.classify;
    let g = f.compile(precision).map_err(at(Stage::Compile))?;
    let x_max = x0.to_f64().abs();
    let hgrid = cfg.hypothesis_grid(x0);

    let mode = resolve_mode(&g, x0, cfg);
    if mode == Mode::Positive && *x0 < 0 {
        return Err(AnalyzeError::Hypothesis(format!(
            "positive mode needs x0 > 0, got {}",
            to_decimal(x0, digits)
        )));
    }
    let hypotheses = validate_hypotheses(&g, mode, &hgrid);
    if !hypotheses.passed {
        return Err(AnalyzeError::Hypothesis(hypotheses.describe(12)));
    }

    let derivative = estimate_derivative_at_zero(&g, &cc.probe_grid, &cc.stabilization)
        .map_err(at(Stage::Derivative))?;
    let mut exponent = None;
    let mut majorant = None;
    let mut trail = vec![hypotheses.describe(12)];

    let verdict = match mode {
        Mode::Signed => signed_rule(&g, x_max, cc).map_err(at(Stage::Signed))?,
        Mode::Positive => 'rules: {
            if let Some(t) = &cfg.taylor {
                match analytic_rule(t) {
                    Ok(v) => break 'rules v,
                    Err(e) => trail.push(format!("analytic rule not applied: {e}")),
                }
            }
            let v = derivative_rule(&derivative, cc.derivative_margin, crate::cli::report::WITNESS_DIGITS);
            if v.is_decisive() {
                break 'rules v;
            }
            trail.extend(v.notes().iter().cloned());
            let try_exponent = matches!(derivative.kind, DerivativeKind::Value(_));
            if matches!(derivative.kind, DerivativeKind::OutOfRange(_)) {
                break 'rules Verdict::inconclusive("no rule applies");
            }
            if try_exponent {
                let search = search_exponent(&g, &cc.probe_grid, &cc.stabilization, &cc.search)
                    .map_err(at(Stage::LimitExponent))?;
                let found = match &search {
                    ExponentSearch::Found { fit, .. } => {
                        Some(limit_exponent_rule(fit, cc.exponent_margin, precision))
                    }
                    ExponentSearch::NotFound { reason } => {
                        trail.push(format!("limit exponent not found ({reason}): trying majorants"));
                        None
                    }
                };
                exponent = Some(search);
                if let Some(v) = found {
                    break 'rules v;
                }
            }
            match search_majorant(&g, x_max, cc).map_err(at(Stage::Majorant))? {
                Some((m, v)) => {
                    majorant = Some(m);
                    v
                }
                None => Verdict::inconclusive("no built-in majorant dominates f on the grid"),
            }
        }
    }
    .after(&trail);

    let orbit_cfg = OrbitConfig {
        mode,
        max_n: cfg.max_n,
        floor: cfg.floor.clone(),
        precision,
    };
    let orbit = iterate_compiled(&g, x0, &orbit_cfg).map_err(at(Stage::Orbit))?;
    let fit = match mode {
        Mode::Positive => fit_power_law(&orbit, None).map_err(|e| e.to_string()),
        Mode::Signed => Err("power-law fits need a positive-mode orbit".to_string()),
    };
    let usable_fit = fit.as_ref().ok().filter(|f| f.is_power_law() && f.fit.a < 1);
    let sum = match (mode, verdict.conclusion()) {
        (Mode::Positive, Conclusion::Convergent) => sum_estimate(&orbit, usable_fit.map(|f| &f.fit)).ok(),
        _ => None,
    };

    let mut analysis = Analysis {
        function: f.clone(),
        x0: x0.clone(),
        mode,
        hypotheses,
        verdict,
        derivative,
        exponent,
        majorant,
        orbit,
        fit,
        sum,
        warnings: Vec::new(),
    };
    analysis.warnings = cross_check(&analysis, &g, cfg)?;
    Ok(analysis)
}

/// Relative disagreement above which an empirical exponent contradicts the rule.
const EXPONENT_TOLERANCE: f64 = 0.1;

fn cross_check(an: &Analysis, g: &CompiledFn, cfg: &AnalyzeConfig) -> Result<Vec<String>, AnalyzeError> {
    let mut warnings = Vec::new();
    let orbit = &an.orbit;
    if let OrbitStatus::HypothesisViolation { .. } = orbit.status() {
        warnings.push(format!("orbit stopped early: {}", orbit.status()));
    }
    let fit = an.fit.as_ref().ok().filter(|f| f.is_power_law());
    match an.verdict.witness() {
        Some(Witness::LimitExponent { a, .. }) => {
            if let Some(fit) = fit {
                let rel = (fit.fit.a.to_f64() / a.to_f64() - 1.0).abs();
                if rel > EXPONENT_TOLERANCE {
                    warnings.push(format!(
                        "empirical fit a = {} disagrees with the limit exponent a = {}",
                        to_decimal(&fit.fit.a, 6),
                        to_decimal(a, 6)
                    ));
                }
            }
        }
        Some(Witness::Derivative { .. }) => {
            if let Some(fit) = fit.filter(|f| f.fit.a >= 1) {
                warnings.push(format!(
                    "orbit decays like a power law with a = {}, not geometrically",
                    to_decimal(&fit.fit.a, 6)
                ));
            }
        }
        Some(Witness::Majorant { .. }) => {
            if let Some(m) = &an.majorant {
                let mf = m.function().compile(cfg.precision).map_err(at(Stage::Majorant))?;
                let cmp = compare_orbits(g, &mf, &an.x0, cfg.comparison_steps)
                    .map_err(at(Stage::Majorant))?;
                if let Some(n) = cmp.first_violation {
                    warnings.push(format!("majorant orbit falls below the orbit of f at n = {n}"));
                }
            }
        }
        Some(Witness::Alternating { .. }) => {
            let terms = orbit.terms();
            if let Some(n) = (1..terms.len()).find(|&n| terms[n].is_sign_negative() == terms[n - 1].is_sign_negative()) {
                warnings.push(format!("orbit signs do not alternate at n = {n}"));
            }
        }
        _ => {}
    }
    if an.verdict.conclusion() == Conclusion::Divergent && *orbit.status() == OrbitStatus::ReachedFloor {
        warnings.push(format!(
            "orbit reached the floor after {} steps, which is unexpected for a divergent series",
            orbit.last_index()
        ));
    }
    Ok(warnings)
}
