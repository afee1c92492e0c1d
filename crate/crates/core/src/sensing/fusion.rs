use alloc::vec;
use alloc::vec::Vec;

use super::metrics::GATE_CELLS;
use super::{Estimate, EstimateSet, EstimateSource, RangeVelocityGrid};

/// Error variances of one estimator, in m² and (m/s)².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorVariances {
    pub range: f64,
    pub velocity: f64,
}

/// Weight on the first estimate, `σ₂² / (σ₁² + σ₂²)`; `0.5` when both
/// variances vanish.
pub fn fusion_weight(var1: f64, var2: f64) -> f64 {
    let total = var1 + var2;
    if total > 0.0 {
        var2 / total
    } else {
        0.5
    }
}

/// Pair estimates nearest-first on the grid-normalised `(r/r_max, v/v_max)`
/// plane. Pairs further apart than the association gate on either axis stay
/// unpaired. Returns, for each entry of `first`, the paired index in
/// `second`.
pub(crate) fn pair(first: &[Estimate], second: &[Estimate], grid: &RangeVelocityGrid) -> Vec<Option<usize>> {
    let (rs, vs) = grid.scale();
    let (gate_r, gate_v) = (GATE_CELLS * grid.range_step, GATE_CELLS * grid.velocity_step);
    let mut candidates = Vec::new();
    for (i, a) in first.iter().enumerate() {
        for (j, b) in second.iter().enumerate() {
            let (dr, dv) = (a.range - b.range, a.velocity - b.velocity);
            if dr.abs() <= gate_r && dv.abs() <= gate_v {
                candidates.push(((dr / rs).powi(2) + (dv / vs).powi(2), i, j));
            }
        }
    }
    // index order breaks distance ties deterministically
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let mut out = vec![None; first.len()];
    let mut taken = vec![false; second.len()];
    for (_, i, j) in candidates {
        if out[i].is_none() && !taken[j] {
            out[i] = Some(j);
            taken[j] = true;
        }
    }
    out
}

/// Variance-weighted fusion of two estimate sets of the same targets.
///
/// Without priors both estimates get weight `0.5`. Unpaired estimates are
/// passed through unchanged and the result is flagged incomplete; they fill
/// the set up to the larger input size, those of the estimator with the
/// smaller prior variance first.
pub fn fuse(
    first: &EstimateSet,
    second: &EstimateSet,
    priors: Option<(ErrorVariances, ErrorVariances)>,
    grid: &RangeVelocityGrid,
) -> EstimateSet {
    let (wr, wv) = match priors {
        Some((a, b)) => (fusion_weight(a.range, b.range), fusion_weight(a.velocity, b.velocity)),
        None => (0.5, 0.5),
    };
    let pairs = pair(&first.estimates, &second.estimates, grid);
    let mut used = vec![false; second.len()];
    let mut estimates = Vec::with_capacity(first.len().max(second.len()));
    let mut spare_first = Vec::new();
    for (a, p) in first.estimates.iter().zip(&pairs) {
        let Some(j) = p else {
            spare_first.push(*a);
            continue;
        };
        used[*j] = true;
        let b = &second.estimates[*j];
        let mut fused = Estimate::new(wr * a.range + (1.0 - wr) * b.range, wv * a.velocity + (1.0 - wv) * b.velocity, a.power);
        if let Some((va, vb)) = priors {
            // variance of the weighted sum of independent errors
            fused.range_var = Some(wr * wr * va.range + (1.0 - wr) * (1.0 - wr) * vb.range);
            fused.velocity_var = Some(wv * wv * va.velocity + (1.0 - wv) * (1.0 - wv) * vb.velocity);
        }
        estimates.push(fused);
    }
    let spare_second: Vec<Estimate> =
        second.estimates.iter().zip(&used).filter(|(_, u)| !**u).map(|(b, _)| *b).collect();
    let incomplete = first.incomplete || second.incomplete || !spare_first.is_empty() || !spare_second.is_empty();
    let spares = if wr + wv < 1.0 { [spare_second, spare_first] } else { [spare_first, spare_second] };
    let limit = first.len().max(second.len());
    for e in spares.into_iter().flatten() {
        if estimates.len() == limit {
            break;
        }
        estimates.push(e);
    }
    EstimateSet { source: EstimateSource::Fused, estimates, incomplete }
}
