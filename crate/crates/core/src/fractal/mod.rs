//! Measurement of scale-dependent length, area and fractal dimension.

mod boxcount;
mod divider;
mod fit;
mod koch;

pub use boxcount::{box_count, boxcount_dimension, covered_cells, rasterized_area, CellGrid};
pub use divider::{divider_dimension, divider_fit, divider_measurements, yardstick_walk, Walk};
pub use fit::{loglog_fit, LogLogFit};
pub use koch::{koch_curve, koch_recursive_segments, KochSpec, MAX_KOCH_ITERATIONS};

use alloc::vec::Vec;

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::scaling::ScalingError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("koch iterations {0} exceed the limit of {MAX_KOCH_ITERATIONS}")]
    TooManyIterations(u32),
    #[error("initiator length must be positive and finite, got {0}")]
    Unit(f64),
    #[error("yardstick must be positive and finite, got {0}")]
    Yardstick(f64),
    #[error("scales must be positive, finite and strictly decreasing (problem at index {0})")]
    Scales(usize),
    #[error("duplicate scale {0}")]
    DuplicateScale(f64),
    #[error("need at least {needed} points for a fit, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("log-log fit needs positive coordinates, got ({0}, {1})")]
    NonPositive(f64, f64),
    #[error("all x values are identical; slope undefined")]
    ZeroVariance,
    #[error("box counts must be at least 1")]
    EmptyBox,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Series(#[from] ScalingError),
}

/// Measuring scales (yardsticks, box or cell sizes), strictly decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleSeries {
    scales: Vec<f64>,
}

impl ScaleSeries {
    pub fn new(scales: Vec<f64>) -> Result<Self, MeasureError> {
        for (i, s) in scales.iter().enumerate() {
            if !(s.is_finite() && *s > 0.0) {
                return Err(MeasureError::Scales(i));
            }
            if i > 0 && scales[i - 1] <= *s {
                return Err(MeasureError::Scales(i));
            }
        }
        Ok(ScaleSeries { scales })
    }

    /// Sorts descending; rejects duplicates and invalid values.
    pub fn from_unordered(mut scales: Vec<f64>) -> Result<Self, MeasureError> {
        if let Some(i) = scales.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(MeasureError::Scales(i));
        }
        scales.sort_by(|a, b| b.total_cmp(a));
        if let Some(w) = scales.windows(2).find(|w| w[0] == w[1]) {
            return Err(MeasureError::DuplicateScale(w[0]));
        }
        ScaleSeries::new(scales)
    }

    /// `count` scales `start, start*ratio, start*ratio^2, ...` with `0 < ratio < 1`.
    pub fn geometric(start: f64, ratio: f64, count: usize) -> Result<Self, MeasureError> {
        let mut v = Vec::with_capacity(count);
        let mut s = start;
        for _ in 0..count {
            v.push(s);
            s *= ratio;
        }
        ScaleSeries::new(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.scales
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.scales.iter().copied()
    }
}
