use alloc::vec;
use alloc::vec::Vec;

use super::{Estimate, EstimateSet, RangeVelocityGrid};
use crate::channel::TargetSet;

/// Association gate in grid cells; larger errors count as divergent trials.
pub const GATE_CELLS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmseReport {
    /// Range RMSE (m).
    pub range: f64,
    /// Velocity RMSE (m/s).
    pub velocity: f64,
    /// Associated (target, trial) pairs contributing to the RMSE.
    pub samples: usize,
    /// Fraction of (target, trial) pairs excluded as divergent.
    pub exclusion_rate: f64,
}

/// For each true target, the index of its associated estimate. Estimates
/// are visited in power order and claim the nearest unclaimed target in the
/// grid-normalised plane.
pub fn associate(estimates: &[Estimate], truth: &TargetSet, grid: &RangeVelocityGrid) -> Vec<Option<usize>> {
    let (rs, vs) = grid.scale();
    let mut out = vec![None; truth.len()];
    let mut order: Vec<usize> = (0..estimates.len()).collect();
    order.sort_by(|&a, &b| estimates[b].power.partial_cmp(&estimates[a].power).unwrap_or(core::cmp::Ordering::Equal));
    for e in order {
        let est = &estimates[e];
        let nearest = truth
            .targets()
            .iter()
            .enumerate()
            .filter(|(t, _)| out[*t].is_none())
            .map(|(t, target)| {
                let (dr, dv) = ((est.range - target.range) / rs, (est.velocity - target.velocity) / vs);
                (t, dr * dr + dv * dv)
            })
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap_or(core::cmp::Ordering::Equal));
        if let Some((t, _)) = nearest {
            out[t] = Some(e);
        }
    }
    out
}

/// Root mean squared range and velocity error over trials after
/// association, excluding targets without an estimate inside the
/// [`GATE_CELLS`] gate.
pub fn rmse(trials: &[EstimateSet], truth: &TargetSet, grid: &RangeVelocityGrid) -> RmseReport {
    let (gate_r, gate_v) = (GATE_CELLS * grid.range_step, GATE_CELLS * grid.velocity_step);
    let (mut sr, mut sv, mut used, mut total) = (0.0, 0.0, 0usize, 0usize);
    for set in trials {
        for (t, e) in associate(&set.estimates, truth, grid).into_iter().enumerate() {
            total += 1;
            let Some(e) = e else { continue };
            let target = truth.targets()[t];
            let (dr, dv) = (set.estimates[e].range - target.range, set.estimates[e].velocity - target.velocity);
            if dr.abs() <= gate_r && dv.abs() <= gate_v {
                sr += dr * dr;
                sv += dv * dv;
                used += 1;
            }
        }
    }
    let (range, velocity) = if used > 0 {
        ((sr / used as f64).sqrt(), (sv / used as f64).sqrt())
    } else {
        (f64::NAN, f64::NAN)
    };
    let exclusion_rate = if total > 0 { (total - used) as f64 / total as f64 } else { 0.0 };
    RmseReport { range, velocity, samples: used, exclusion_rate }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{normal, trial_rng};
    use crate::sensing::EstimateSource;
    use crate::testutil::config;
    use crate::Complex64;

    fn grid() -> RangeVelocityGrid {
        RangeVelocityGrid::with_points((0.0, 1000.0, 101), (-100.0, 100.0, 101)).unwrap()
    }

    fn truth() -> TargetSet {
        TargetSet::from_pairs(&[(200.0, 10.0), (600.0, -30.0)], Complex64::new(1.0, 0.0), &config(16)).unwrap()
    }

    fn trial(points: &[(f64, f64)]) -> EstimateSet {
        EstimateSet {
            source: EstimateSource::MatchedFilter,
            estimates: points.iter().map(|&(r, v)| Estimate::new(r, v, 1.0)).collect(),
            incomplete: false,
        }
    }

    #[test]
    fn exact_and_offset() {
        let exact = rmse(&[trial(&[(600.0, -30.0), (200.0, 10.0)])], &truth(), &grid());
        assert_eq!((exact.range, exact.velocity, exact.samples), (0.0, 0.0, 2));
        let shifted: Vec<EstimateSet> = (0..5).map(|_| trial(&[(203.0, 8.0), (603.0, -32.0)])).collect();
        let rep = rmse(&shifted, &truth(), &grid());
        assert!((rep.range - 3.0).abs() < 1e-12 && (rep.velocity - 2.0).abs() < 1e-12);
        assert_eq!(rep.exclusion_rate, 0.0);
    }

    #[test]
    fn divergent_and_missing_targets_are_excluded() {
        let rep = rmse(&[trial(&[(200.0, 10.0), (900.0, 80.0)]), trial(&[(201.0, 10.0)])], &truth(), &grid());
        assert_eq!(rep.samples, 2);
        assert!((rep.exclusion_rate - 0.5).abs() < 1e-12);
        assert!((rep.range - (0.5f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gaussian_errors() {
        let mut rng = trial_rng(11, "rmse", 0);
        let sigma = 4.0;
        let trials: Vec<EstimateSet> = (0..10_000)
            .map(|_| trial(&[(200.0 + normal(&mut rng, sigma), 10.0 + normal(&mut rng, 1.0))]))
            .collect();
        let one = TargetSet::from_pairs(&[(200.0, 10.0)], Complex64::new(1.0, 0.0), &config(16)).unwrap();
        let rep = rmse(&trials, &one, &grid());
        assert!((rep.range / sigma - 1.0).abs() < 0.03);
        assert!((rep.velocity - 1.0).abs() < 0.03);
    }
}
