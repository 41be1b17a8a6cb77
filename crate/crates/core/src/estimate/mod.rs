//! Empirical asymptotics from computed orbits: power-law fits, limit
//! extrapolation and sum estimates used to cross-check rule verdicts.

mod extrapolate;
mod fit;
mod sum;

pub use extrapolate::{extrapolate_limit, Extrapolated, ExtrapolationError};
pub use fit::{
    fit_power_law, verify_asymptotic, AsymptoticFit, AsymptoticTrace, FitError, PowerLawFit,
    MAX_RESIDUAL, MAX_SLOPE_DRIFT, MIN_WINDOW,
};
pub use sum::{sum_estimate, SumError, SumEstimate, TailModel};
