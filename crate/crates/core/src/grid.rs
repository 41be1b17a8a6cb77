//! Geometric sample grids descending toward the origin.

use rug::ops::Pow;
use rug::Float;

use crate::precision::Precision;

/// `x_j = start * ratio^j` for `j = 0, 1, ...` while `x_j >= floor`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub ratio: f64,
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("grid start must be positive and finite, got {0}")]
    Start(f64),
    #[error("grid ratio must lie in (0, 1), got {0}")]
    Ratio(f64),
    #[error("grid floor must be positive and at most the start, got {0}")]
    Floor(f64),
}

impl GridSpec {
    /// Probe grid used by the derivative and limit probes.
    pub const PROBE: GridSpec = GridSpec {
        start: 1e-2,
        ratio: 0.562_341_325_190_349_1, // 10^(-1/4)
        floor: 1e-25,
    };

    /// `per_decade` points per factor of ten, from `start` down to `floor`.
    pub fn decades(start: f64, per_decade: u32, floor: f64) -> Self {
        Self {
            start,
            ratio: 10f64.powf(-1.0 / f64::from(per_decade.max(1))),
            floor,
        }
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if !(self.start.is_finite() && self.start > 0.0) {
            return Err(GridError::Start(self.start));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(GridError::Ratio(self.ratio));
        }
        if !(self.floor > 0.0 && self.floor <= self.start) {
            return Err(GridError::Floor(self.floor));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        if self.validate().is_err() {
            return 0;
        }
        // Small slack so that a floor landing exactly on a grid point is kept.
        let steps = (self.floor / self.start).ln() / self.ratio.ln();
        (steps + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid points at working precision, in descending order.
    pub fn points(&self, precision: Precision) -> Vec<Float> {
        let n = self.len();
        let start = precision.float(self.start);
        let ratio = precision.float(self.ratio);
        (0..n)
            .map(|j| {
                let scale = Float::with_val(precision.bits(), (&ratio).pow(j as u32));
                Float::with_val(precision.bits(), &start * scale)
            })
            .collect()
    }

    /// Points of the grid mirrored onto both sides of the origin:
    /// `x_0, -x_0, x_1, -x_1, ...`.
    pub fn symmetric_points(&self, precision: Precision) -> Vec<Float> {
        self.points(precision)
            .into_iter()
            .flat_map(|x| {
                let neg = Float::with_val(precision.bits(), -&x);
                [x, neg]
            })
            .collect()
    }
}
