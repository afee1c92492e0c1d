use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;

use super::peaks::pick_peaks;
use super::{Estimate, EstimateSet, EstimateSource, RangeVelocityGrid, Spectrum};
use crate::channel::{normalized_delay, normalized_doppler};
use crate::error::{bail, Result};
use crate::linalg::{leading_eigenpairs, CMatrix};
use crate::waveform::{Frame, WaveformConfig};

/// Entries of the transmitted frame below this fraction of its RMS amplitude
/// are not divided by.
const MASK_LEVEL: f64 = 0.1;
const MAX_SUBFRAMES: usize = 4096;
/// Grid maxima examined per expected target.
const CANDIDATES_PER_TARGET: usize = 3;
/// Half-width, in grid cells, of the box a grid maximum is refined in.
const REFINE_CELLS: f64 = 2.0;
/// Refined maxima closer than this many cells on both axes are one target.
const MERGE_CELLS: f64 = 0.5;
/// Krylov dimension beyond the model order.
const KRYLOV_EXTRA: usize = 40;

/// Smoothing window `M_w × N_w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MusicWindow {
    pub subcarriers: usize,
    pub symbols: usize,
}

impl MusicWindow {
    /// `M_w = min(M/2, 32)`, `N_w = min(N_s/2, 8)`, at least 1 each.
    pub fn default_for(config: &WaveformConfig) -> Self {
        Self {
            subcarriers: (config.subcarriers / 2).clamp(1, 32),
            symbols: (config.symbols / 2).clamp(1, 8),
        }
    }

    pub fn len(&self) -> usize {
        self.subcarriers * self.symbols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone)]
pub struct MusicOutput {
    pub estimates: EstimateSet,
    /// Pseudo-spectrum `1/‖E_nᴴ a‖²` on the grid.
    pub spectrum: Spectrum,
    /// Leading eigenvalues of the smoothed covariance (Lanczos Ritz values),
    /// descending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal signal subspace, `M_w·N_w × P`, vectorised column-major
    /// over the window.
    pub signal_subspace: CMatrix,
    pub window: MusicWindow,
    /// Number of eigenvalues above the numerical noise floor.
    pub rank: usize,
}

impl MusicOutput {
    /// `‖E_nᴴ a(r, v)‖² / ‖a‖²`, zero on the signal subspace.
    pub fn noise_projection(&self, range: f64, velocity: f64, config: &WaveformConfig) -> f64 {
        let tau = normalized_delay(range, config);
        let f = normalized_doppler(velocity, config);
        1.0 - signal_energy(&self.signal_subspace, self.window, tau, f) / self.window.len() as f64
    }
}

/// `Σ_i |e_iᴴ a|²` for the steering vector at `(τ^s, f^s)`.
fn signal_energy(subspace: &CMatrix, window: MusicWindow, tau: f64, f: f64) -> f64 {
    let ar: Vec<Complex64> = (0..window.subcarriers).map(|m| Complex64::from_polar(1.0, -(m as f64) * tau)).collect();
    let av: Vec<Complex64> =
        (0..window.symbols).map(|n| Complex64::from_polar(1.0, 2.0 * PI * n as f64 * f)).collect();
    subspace
        .column_iter()
        .map(|e| {
            let mut acc = Complex64::new(0.0, 0.0);
            for n in 0..window.symbols {
                let mut inner = Complex64::new(0.0, 0.0);
                for m in 0..window.subcarriers {
                    inner += e[m + window.subcarriers * n].conj() * ar[m];
                }
                acc += inner * av[n];
            }
            acc.norm_sqr()
        })
        .sum()
}

/// `R ⊘ X` with near-zero entries of `X` replaced by the mean of their valid
/// 8-neighbours.
fn divide_masked(echo: &CMatrix, transmitted: &CMatrix) -> CMatrix {
    let (rows, cols) = echo.shape();
    let rms = (transmitted.iter().map(|z| z.norm_sqr()).sum::<f64>() / (rows * cols) as f64).sqrt();
    let valid = |i: usize, j: usize| transmitted[(i, j)].norm() >= MASK_LEVEL * rms;
    let mut y = DMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            if valid(i, j) {
                y[(i, j)] = echo[(i, j)] / transmitted[(i, j)];
            }
        }
    }
    for j in 0..cols {
        for i in 0..rows {
            if valid(i, j) {
                continue;
            }
            let (mut acc, mut count) = (Complex64::new(0.0, 0.0), 0usize);
            for ni in i.saturating_sub(1)..(i + 2).min(rows) {
                for nj in j.saturating_sub(1)..(j + 2).min(cols) {
                    if (ni, nj) != (i, j) && valid(ni, nj) {
                        acc += y[(ni, nj)];
                        count += 1;
                    }
                }
            }
            if count > 0 {
                y[(i, j)] = acc / count as f64;
            }
        }
    }
    y
}

/// Overlapping smoothing windows stacked as columns; the smoothed sample
/// covariance is `S Sᴴ / K` for `K` columns.
fn smoothing_snapshots(y: &CMatrix, window: MusicWindow) -> CMatrix {
    let (rows, cols) = y.shape();
    let (da, db) = (rows - window.subcarriers + 1, cols - window.symbols + 1);
    let total = da * db;
    let used = total.min(MAX_SUBFRAMES);
    let mut stacked = DMatrix::zeros(window.len(), used);
    for s in 0..used {
        // evenly spaced subset when there are too many windows
        let k = s * total / used;
        let (a, b) = (k % da, k / da);
        for n in 0..window.symbols {
            for m in 0..window.subcarriers {
                stacked[(m + window.subcarriers * n, s)] = y[(a + m, b + n)];
            }
        }
    }
    stacked
}

/// Pseudo-spectrum on the grid, evaluated separably per eigenvector as
/// `A_r · conj(E_i) · A_v`.
fn pseudo_spectrum(
    subspace: &CMatrix,
    window: MusicWindow,
    grid: &RangeVelocityGrid,
    config: &WaveformConfig,
) -> Spectrum {
    let ranges = grid.ranges();
    let velocities = grid.velocities();
    let a_r = DMatrix::from_fn(ranges.len(), window.subcarriers, |k, m| {
        Complex64::from_polar(1.0, -(m as f64) * normalized_delay(ranges[k], config))
    });
    let a_v = DMatrix::from_fn(window.symbols, velocities.len(), |n, l| {
        Complex64::from_polar(1.0, 2.0 * PI * n as f64 * normalized_doppler(velocities[l], config))
    });
    let mut energy = DMatrix::<f64>::zeros(ranges.len(), velocities.len());
    for e in subspace.column_iter() {
        let e_mat = DMatrix::from_fn(window.subcarriers, window.symbols, |m, n| e[m + window.subcarriers * n].conj());
        let proj = &a_r * e_mat * &a_v;
        energy += proj.map(|z| z.norm_sqr());
    }
    let len = window.len() as f64;
    let floor = len * 1e-15;
    let values = energy.map(|s| 1.0 / (len - s).max(floor));
    Spectrum { ranges, velocities, values }
}

/// Maximise the signal-subspace energy within [`REFINE_CELLS`] grid cells
/// of `start` by compass search. Diagonal moves follow the ridge that
/// coupled range and velocity errors leave in the objective. Returns the
/// point and its energy.
fn refine(
    subspace: &CMatrix,
    window: MusicWindow,
    start: (f64, f64),
    grid: &RangeVelocityGrid,
    config: &WaveformConfig,
) -> (f64, f64, f64) {
    let objective = |r: f64, v: f64| {
        signal_energy(subspace, window, normalized_delay(r, config), normalized_doppler(v, config))
    };
    let (span_r, span_v) = (REFINE_CELLS * grid.range_step, REFINE_CELLS * grid.velocity_step);
    let (r_lo, r_hi) = (start.0 - span_r, start.0 + span_r);
    let (v_lo, v_hi) = (start.1 - span_v, start.1 + span_v);
    let (mut r, mut v) = start;
    let mut best = objective(r, v);
    let (mut sr, mut sv) = (0.5 * grid.range_step, 0.5 * grid.velocity_step);
    while sr > 1e-6 * grid.range_step {
        let mut moved = false;
        for (dr, dv) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)] {
            let (nr, nv) = ((r + dr * sr).clamp(r_lo, r_hi), (v + dv * sv).clamp(v_lo, v_hi));
            let val = objective(nr, nv);
            if val > best {
                best = val;
                r = nr;
                v = nv;
                moved = true;
            }
        }
        if !moved {
            sr *= 0.5;
            sv *= 0.5;
        }
    }
    (r, v, best)
}

/// 2D-MUSIC on `Y = R ⊘ X`.
///
/// `transmitted` is the frame exactly as radiated (all components, any
/// scaling). The model order `targets` is the number of signal eigenvectors.
pub fn music_2d(
    echo: &Frame,
    transmitted: &Frame,
    grid: &RangeVelocityGrid,
    targets: usize,
    window: MusicWindow,
    config: &WaveformConfig,
) -> Result<MusicOutput> {
    grid.validate()?;
    let shape = (config.subcarriers, config.symbols);
    if echo.samples.shape() != shape || transmitted.samples.shape() != shape {
        bail!(Input, "echo and transmitted frames must both be {:?}", shape);
    }
    if targets == 0 {
        bail!(Input, "model order must be at least one");
    }
    if window.subcarriers == 0
        || window.symbols == 0
        || window.subcarriers > config.subcarriers
        || window.symbols > config.symbols
    {
        bail!(Input, "window {}x{} does not fit a {}x{} frame", window.subcarriers, window.symbols, shape.0, shape.1);
    }
    if window.len() <= targets {
        bail!(Input, "window size {} must exceed the model order {targets}", window.len());
    }
    if transmitted.samples.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        bail!(Input, "transmitted frame is all zero");
    }

    let y = divide_masked(&echo.samples, &transmitted.samples);
    let snapshots = smoothing_snapshots(&y, window);
    let k = Complex64::new(snapshots.ncols() as f64, 0.0);
    let (eigenvalues, subspace) =
        leading_eigenpairs(window.len(), targets, targets + KRYLOV_EXTRA, |v| &snapshots * snapshots.ad_mul(v) / k);
    let top = eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    let tol = top * window.len() as f64 * 1e-12;
    let rank = eigenvalues.iter().filter(|&&l| l > tol).count();

    let spectrum = pseudo_spectrum(&subspace, window, grid, config);
    let log = spectrum.values.map(|v| v.log10());
    // an off-grid target can show as two grid maxima on either side of a
    // sharp null, so take spare candidates and merge those that refine onto
    // the same point
    let (candidates, _) = pick_peaks(&spectrum, &log, CANDIDATES_PER_TARGET * targets)?;
    let mut refined: Vec<(f64, f64, f64)> =
        candidates.iter().map(|p| refine(&subspace, window, (p.range, p.velocity), grid, config)).collect();
    refined.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.total_cmp(&b.0)).then(a.1.total_cmp(&b.1)));
    let mut kept: Vec<(f64, f64, f64)> = Vec::with_capacity(targets);
    for c in refined {
        if kept.len() == targets {
            break;
        }
        let duplicate = kept.iter().any(|k| {
            (k.0 - c.0).abs() < MERGE_CELLS * grid.range_step && (k.1 - c.1).abs() < MERGE_CELLS * grid.velocity_step
        });
        if !duplicate {
            kept.push(c);
        }
    }
    let short = kept.len() < targets;
    let floor = window.len() as f64 * 1e-15;
    let estimates = kept
        .into_iter()
        .map(|(r, v, s)| Estimate::new(r, v, 1.0 / (window.len() as f64 - s).max(floor)))
        .collect();
    Ok(MusicOutput {
        estimates: EstimateSet { source: EstimateSource::Music, estimates, incomplete: short || rank < targets },
        spectrum,
        eigenvalues,
        signal_subspace: subspace,
        window,
        rank,
    })
}

/// Pseudo-spectrum of an existing subspace on another grid.
pub fn music_pseudo_spectrum(output: &MusicOutput, grid: &RangeVelocityGrid, config: &WaveformConfig) -> Result<Spectrum> {
    grid.validate()?;
    Ok(pseudo_spectrum(&output.signal_subspace, output.window, grid, config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_echo, TargetSet};
    use crate::rng::trial_rng;
    use crate::testutil::config;
    use crate::waveform::{build_sense_frame, FrameRole};

    fn setup(m: usize, symbols: usize) -> (WaveformConfig, Frame) {
        let mut cfg = config(m);
        cfg.symbols = symbols;
        let x = build_sense_frame(&cfg).unwrap();
        (cfg, x)
    }

    #[test]
    fn noiseless_single_target() {
        let (cfg, x) = setup(64, 16);
        let grid = RangeVelocityGrid::with_points((0.0, 1000.0, 64), (-100.0, 100.0, 64)).unwrap();
        let targets = TargetSet::from_pairs(&[(437.0, -23.4)], Complex64::new(0.8, 0.3), &cfg).unwrap();
        let mut rng = trial_rng(0, "music", 0);
        let echo = generate_echo(&x, &targets, 0.0, &cfg, &mut rng).unwrap();
        let out = music_2d(&echo, &x, &grid, 1, MusicWindow::default_for(&cfg), &cfg).unwrap();
        assert_eq!(out.window, MusicWindow { subcarriers: 32, symbols: 8 });
        assert_eq!(out.rank, 1);
        assert!(!out.estimates.incomplete);
        let (i, j) = out.spectrum.argmax();
        assert!((out.spectrum.ranges[i] - 437.0).abs() <= grid.range_step);
        assert!((out.spectrum.velocities[j] + 23.4).abs() <= grid.velocity_step);
        let est = out.estimates.estimates[0];
        assert!((est.range - 437.0).abs() < 1e-3 * grid.range_step, "{}", est.range);
        assert!((est.velocity + 23.4).abs() < 1e-3 * grid.velocity_step, "{}", est.velocity);

        assert!(out.noise_projection(437.0, -23.4, &cfg) < 1e-6);
        let floor = out.spectrum.values.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(10.0 * (est.power / floor).log10() > 40.0);
    }

    #[test]
    fn rank_shortfall_is_flagged() {
        let (cfg, x) = setup(32, 8);
        let grid = RangeVelocityGrid::with_points((0.0, 1000.0, 32), (-100.0, 100.0, 16)).unwrap();
        let targets = TargetSet::from_pairs(&[(300.0, 10.0)], Complex64::new(1.0, 0.0), &cfg).unwrap();
        let mut rng = trial_rng(0, "rank", 0);
        let echo = generate_echo(&x, &targets, 0.0, &cfg, &mut rng).unwrap();
        let out = music_2d(&echo, &x, &grid, 2, MusicWindow::default_for(&cfg), &cfg).unwrap();
        assert_eq!(out.rank, 1);
        assert!(out.estimates.incomplete);
    }

    #[test]
    fn rejects_bad_windows() {
        let (cfg, x) = setup(16, 4);
        let grid = RangeVelocityGrid::with_points((0.0, 100.0, 4), (-10.0, 10.0, 4)).unwrap();
        let w = |subcarriers, symbols| MusicWindow { subcarriers, symbols };
        assert!(music_2d(&x, &x, &grid, 1, w(17, 2), &cfg).is_err());
        assert!(music_2d(&x, &x, &grid, 1, w(4, 5), &cfg).is_err());
        assert!(music_2d(&x, &x, &grid, 4, w(2, 2), &cfg).is_err());
        assert!(music_2d(&x, &x, &grid, 0, w(4, 2), &cfg).is_err());
    }

    #[test]
    fn masked_entries_are_imputed() {
        let x = DMatrix::from_fn(4, 4, |i, j| if (i, j) == (1, 2) { Complex64::new(0.01, 0.0) } else { Complex64::new(2.0, 0.0) });
        let r = DMatrix::from_fn(4, 4, |i, j| Complex64::new((i + 4 * j) as f64, 0.0) * 2.0);
        let y = divide_masked(&r, &x);
        let neighbours = [(0, 1), (0, 2), (0, 3), (1, 1), (1, 3), (2, 1), (2, 2), (2, 3)];
        let mean = neighbours.iter().map(|&(i, j)| (i + 4 * j) as f64).sum::<f64>() / 8.0;
        assert!((y[(1, 2)].re - mean).abs() < 1e-12);
        assert_eq!(y[(3, 3)], Complex64::new(15.0, 0.0));
    }

    #[test]
    fn superposed_frame_division_removes_comm_component() {
        use crate::testutil::small_config;
        use crate::waveform::{map_bits_to_comm_frame, superpose, Constellation, IndexCodebook};
        let mut cfg = small_config(64, 8, 2, Constellation::qpsk());
        cfg.symbols = 16;
        let cb = IndexCodebook::new(8, 2).unwrap();
        let mut rng = trial_rng(2, "sup", 0);
        let bits = crate::rng::random_bits(&mut rng, 64 * 16);
        let comm = map_bits_to_comm_frame(&bits, &cfg, &cb).unwrap();
        let sense = build_sense_frame(&cfg).unwrap();
        let x = superpose(&comm, &sense, 0.3).unwrap();
        let grid = RangeVelocityGrid::with_points((0.0, 2000.0, 64), (-100.0, 100.0, 64)).unwrap();
        let truth = [(300.0, 40.0), (1400.0, -60.0)];
        let targets = TargetSet::from_pairs(&truth, Complex64::new(1.0, 0.0), &cfg).unwrap();
        let echo = generate_echo(&x, &targets, 0.0, &cfg, &mut rng).unwrap();
        let out = music_2d(&echo, &Frame::new(x.samples.clone(), FrameRole::Superposed), &grid, 2, MusicWindow::default_for(&cfg), &cfg)
            .unwrap();
        let mut got: Vec<(f64, f64)> = out.estimates.estimates.iter().map(|e| (e.range, e.velocity)).collect();
        got.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for (g, t) in got.iter().zip(truth.iter()) {
            assert!((g.0 - t.0).abs() < 1.0 && (g.1 - t.1).abs() < 0.5, "{got:?}");
        }
    }
}
