use alloc::vec::Vec;
use core::cmp::Ordering;

use nalgebra::DMatrix;

use super::{Estimate, EstimateSet, EstimateSource, Spectrum};
use crate::error::{bail, Result};

/// Vertex offset of the parabola through `(−1, a), (0, b), (1, c)`, clamped
/// to half a step.
fn parabolic_offset(a: f64, b: f64, c: f64) -> f64 {
    let denom = a - 2.0 * b + c;
    if denom < 0.0 {
        (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
    } else {
        0.0
    }
}

/// Local maxima over the 8-neighbourhood. A cell must strictly exceed
/// neighbours that precede it in (range, velocity) order and be at least as
/// large as those that follow, so a plateau yields one peak.
pub(crate) fn local_maxima(values: &DMatrix<f64>) -> Vec<(usize, usize)> {
    let (rows, cols) = values.shape();
    let mut out = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let v = values[(i, j)];
            if !v.is_finite() {
                continue;
            }
            let mut is_peak = true;
            'scan: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni < 0 || nj < 0 || ni >= rows as i64 || nj >= cols as i64 {
                        continue;
                    }
                    let u = values[(ni as usize, nj as usize)];
                    let earlier = (di, dj) < (0, 0);
                    if (earlier && u >= v) || (!earlier && u > v) {
                        is_peak = false;
                        break 'scan;
                    }
                }
            }
            if is_peak {
                out.push((i, j));
            }
        }
    }
    out
}

/// Local maxima refined by 3-point parabolic interpolation on each axis,
/// strongest first. Equal powers are ordered by range, then velocity.
pub(crate) fn pick_peaks(spectrum: &Spectrum, values: &DMatrix<f64>, count: usize) -> Result<(Vec<Estimate>, bool)> {
    if count == 0 {
        bail!(Input, "at least one peak must be requested");
    }
    let (rows, cols) = values.shape();
    if rows != spectrum.ranges.len() || cols != spectrum.velocities.len() || rows == 0 || cols == 0 {
        bail!(Input, "spectrum axes do not match its values");
    }
    let step = |axis: &[f64]| if axis.len() > 1 { axis[1] - axis[0] } else { 0.0 };
    let (dr, dv) = (step(&spectrum.ranges), step(&spectrum.velocities));

    let mut found: Vec<Estimate> = local_maxima(values)
        .into_iter()
        .map(|(i, j)| {
            let b = values[(i, j)];
            let dr_off = if i > 0 && i + 1 < rows {
                parabolic_offset(values[(i - 1, j)], b, values[(i + 1, j)])
            } else {
                0.0
            };
            let dv_off = if j > 0 && j + 1 < cols {
                parabolic_offset(values[(i, j - 1)], b, values[(i, j + 1)])
            } else {
                0.0
            };
            Estimate::new(spectrum.ranges[i] + dr_off * dr, spectrum.velocities[j] + dv_off * dv, b)
        })
        .collect();
    found.sort_by(|a, b| {
        b.power
            .partial_cmp(&a.power)
            .unwrap_or(Ordering::Equal)
            .then(a.range.partial_cmp(&b.range).unwrap_or(Ordering::Equal))
            .then(a.velocity.partial_cmp(&b.velocity).unwrap_or(Ordering::Equal))
    });
    let incomplete = found.len() < count;
    found.truncate(count);
    Ok((found, incomplete))
}

/// The `count` strongest local maxima of a matched-filter spectrum.
pub fn find_peaks(spectrum: &Spectrum, count: usize) -> Result<EstimateSet> {
    let (estimates, incomplete) = pick_peaks(spectrum, &spectrum.values, count)?;
    Ok(EstimateSet { source: EstimateSource::MatchedFilter, estimates, incomplete })
}
