//! Range/velocity estimation from radar echoes.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::channel::TargetSet;
use crate::error::{bail, Result};

mod crlb;
mod fusion;
mod matched_filter;
mod metrics;
mod music;
mod peaks;

pub use crlb::{crlb, CrlbResult, TargetBound};
pub use fusion::{fuse, fusion_weight, ErrorVariances};
pub use matched_filter::{
    matched_filter_spectrum, matched_filter_spectrum_direct, noise_only_threshold, peak_to_mean,
};
pub use metrics::{associate, rmse, RmseReport, GATE_CELLS};
pub use music::{music_2d, music_pseudo_spectrum, MusicOutput, MusicWindow};
pub use peaks::find_peaks;

/// Rectangular search domain over range (m) and radial velocity (m/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeVelocityGrid {
    pub range_min: f64,
    pub range_max: f64,
    pub range_step: f64,
    pub velocity_min: f64,
    pub velocity_max: f64,
    pub velocity_step: f64,
}

impl RangeVelocityGrid {
    pub fn new(
        (range_min, range_max, range_step): (f64, f64, f64),
        (velocity_min, velocity_max, velocity_step): (f64, f64, f64),
    ) -> Result<Self> {
        let grid = Self { range_min, range_max, range_step, velocity_min, velocity_max, velocity_step };
        grid.validate()?;
        Ok(grid)
    }

    /// Grid with `range_points × velocity_points` samples spanning both
    /// closed intervals.
    pub fn with_points(
        (range_min, range_max, range_points): (f64, f64, usize),
        (velocity_min, velocity_max, velocity_points): (f64, f64, usize),
    ) -> Result<Self> {
        if range_points < 2 || velocity_points < 2 {
            bail!(Input, "a grid needs at least two points per axis");
        }
        Self::new(
            (range_min, range_max, (range_max - range_min) / (range_points - 1) as f64),
            (velocity_min, velocity_max, (velocity_max - velocity_min) / (velocity_points - 1) as f64),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.range_min,
            self.range_max,
            self.range_step,
            self.velocity_min,
            self.velocity_max,
            self.velocity_step,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            bail!(Input, "grid bounds must be finite");
        }
        if !(self.range_step > 0.0 && self.velocity_step > 0.0) {
            bail!(Input, "grid steps must be positive");
        }
        if self.range_max < self.range_min || self.velocity_max < self.velocity_min {
            bail!(Input, "grid maxima must not be below the minima");
        }
        Ok(())
    }

    fn axis(min: f64, max: f64, step: f64) -> Vec<f64> {
        // tolerate rounding in (max − min) / step
        let count = libm::floor((max - min) / step + 1e-9) as usize + 1;
        (0..count).map(|i| min + i as f64 * step).collect()
    }

    pub fn ranges(&self) -> Vec<f64> {
        Self::axis(self.range_min, self.range_max, self.range_step)
    }

    pub fn velocities(&self) -> Vec<f64> {
        Self::axis(self.velocity_min, self.velocity_max, self.velocity_step)
    }

    pub fn contains(&self, range: f64, velocity: f64) -> bool {
        (self.range_min..=self.range_max).contains(&range)
            && (self.velocity_min..=self.velocity_max).contains(&velocity)
    }

    pub fn covers(&self, targets: &TargetSet) -> bool {
        targets.targets().iter().all(|t| self.contains(t.range, t.velocity))
    }

    /// Scale used for nearest-neighbour association in normalised space.
    pub(crate) fn scale(&self) -> (f64, f64) {
        let r = self.range_min.abs().max(self.range_max.abs()).max(self.range_step);
        let v = self.velocity_min.abs().max(self.velocity_max.abs()).max(self.velocity_step);
        (r, v)
    }
}

/// Real surface sampled on a range × velocity grid; rows follow range.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub ranges: Vec<f64>,
    pub velocities: Vec<f64>,
    pub values: DMatrix<f64>,
}

impl Spectrum {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.mean()
    }

    /// Grid indices of the global maximum (first in column-major order).
    pub fn argmax(&self) -> (usize, usize) {
        let (mut best, mut at) = (f64::NEG_INFINITY, (0, 0));
        for j in 0..self.values.ncols() {
            for i in 0..self.values.nrows() {
                if self.values[(i, j)] > best {
                    best = self.values[(i, j)];
                    at = (i, j);
                }
            }
        }
        at
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimateSource {
    MatchedFilter,
    Music,
    Fused,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub range: f64,
    pub velocity: f64,
    /// Spectrum value at the detected peak.
    pub power: f64,
    pub range_var: Option<f64>,
    pub velocity_var: Option<f64>,
}

impl Estimate {
    pub fn new(range: f64, velocity: f64, power: f64) -> Self {
        Self { range, velocity, power, range_var: None, velocity_var: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSet {
    pub source: EstimateSource,
    /// Sorted by decreasing power.
    pub estimates: Vec<Estimate>,
    /// Set when fewer estimates than requested were found, or some could not
    /// be paired during fusion.
    pub incomplete: bool,
}

impl EstimateSet {
    pub fn len(&self) -> usize {
        self.estimates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.estimates.is_empty()
    }
}
