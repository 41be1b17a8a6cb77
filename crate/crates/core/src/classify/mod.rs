//! Convergence rules and the pipeline that chains them.

mod analytic;
mod derivative;
mod limit;
mod majorant;
mod pipeline;
mod signed;
mod stabilize;
mod verdict;

pub use analytic::{analytic_rule, AnalyticError};
pub use derivative::{derivative_rule, estimate_derivative_at_zero, DerivativeEstimate, DerivativeKind};
pub use limit::{
    limit_exponent_rule, probe_limit, search_exponent, ExponentSearch, ExponentSearchConfig,
    LimitProbe, LimitVerdict, ProbeError, GUARD_DIGITS,
};
pub use majorant::{
    builtin_candidates, check_monotone, compare_orbits, linear_candidates, majorant_rule,
    region_grid, search_majorant, MajorantError, MajorantFamily, MajorantParseError,
    MajorantSpec, MonotoneCheck, Monotonicity, OrbitComparison,
};
pub use pipeline::{analyze, resolve_mode, Analysis, AnalyzeConfig, AnalyzeError, ModeChoice, Stage, StageError};
pub use signed::signed_rule;
pub use stabilize::{Stabilization, TailBehavior};
pub use verdict::{Conclusion, Rule, Verdict, Witness};

use crate::grid::GridSpec;

/// Grids, tolerances and margins shared by the rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyConfig {
    pub probe_grid: GridSpec,
    pub stabilization: Stabilization,
    /// `c` within this of 1 is routed to the limit-exponent rule.
    pub derivative_margin: f64,
    /// `a` within this of 1 is reported as the divergent boundary case.
    pub exponent_margin: f64,
    pub search: ExponentSearchConfig,
    /// Density of the domination and sign grids.
    pub region_per_decade: u32,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            probe_grid: GridSpec::PROBE,
            stabilization: Stabilization::default(),
            derivative_margin: 1e-4,
            exponent_margin: 1e-6,
            search: ExponentSearchConfig::default(),
            region_per_decade: 16,
        }
    }
}
