use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;

use super::{RangeVelocityGrid, Spectrum};
use crate::channel::{normalized_delay, normalized_doppler};
use crate::error::{bail, Result};
use crate::fft::chirp_z;
use crate::waveform::{Frame, WaveformConfig};

fn check_inputs(echo: &Frame, sense: &Frame, grid: &RangeVelocityGrid, config: &WaveformConfig) -> Result<()> {
    grid.validate()?;
    let shape = (config.subcarriers, config.symbols);
    if echo.samples.shape() != shape || sense.samples.shape() != shape {
        bail!(
            Input,
            "echo {:?} and sensing frame {:?} must both be {:?}",
            echo.samples.shape(),
            sense.samples.shape(),
            shape
        );
    }
    if sense.samples.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        bail!(Input, "sensing frame is all zero");
    }
    Ok(())
}

/// Range-velocity power spectrum
/// `f(r, v) = |Σ_n Σ_m R_{m,n} X_{s,m,n} e^{jmτ(r)} e^{−j2πn f(v)}|²`.
///
/// The sensing sequence is real, so correlating without conjugation is the
/// matched filter. Both axes are evaluated with chirp-z transforms, which
/// cover arbitrary grid spacing without the interpolation error of a padded
/// FFT.
pub fn matched_filter_spectrum(
    echo: &Frame,
    sense: &Frame,
    grid: &RangeVelocityGrid,
    config: &WaveformConfig,
) -> Result<Spectrum> {
    check_inputs(echo, sense, grid, config)?;
    let ranges = grid.ranges();
    let velocities = grid.velocities();
    let w = echo.samples.component_mul(&sense.samples);

    let tau0 = normalized_delay(grid.range_min, config);
    let dtau = normalized_delay(grid.range_step, config);
    let mut partial = DMatrix::zeros(ranges.len(), config.symbols);
    for n in 0..config.symbols {
        let col: Vec<Complex64> = w.column(n).iter().copied().collect();
        for (k, z) in chirp_z(&col, tau0, dtau, ranges.len()).into_iter().enumerate() {
            partial[(k, n)] = z;
        }
    }

    let f0 = normalized_doppler(grid.velocity_min, config);
    let df = normalized_doppler(grid.velocity_step, config);
    let mut values = DMatrix::zeros(ranges.len(), velocities.len());
    for k in 0..ranges.len() {
        let row: Vec<Complex64> = partial.row(k).iter().copied().collect();
        for (l, z) in chirp_z(&row, -2.0 * PI * f0, -2.0 * PI * df, velocities.len()).into_iter().enumerate() {
            values[(k, l)] = z.norm_sqr();
        }
    }
    Ok(Spectrum { ranges, velocities, values })
}

/// Direct evaluation of the double sum at every grid point.
pub fn matched_filter_spectrum_direct(
    echo: &Frame,
    sense: &Frame,
    grid: &RangeVelocityGrid,
    config: &WaveformConfig,
) -> Result<Spectrum> {
    check_inputs(echo, sense, grid, config)?;
    let ranges = grid.ranges();
    let velocities = grid.velocities();
    let mut values = DMatrix::zeros(ranges.len(), velocities.len());
    for (k, &r) in ranges.iter().enumerate() {
        let tau = normalized_delay(r, config);
        for (l, &v) in velocities.iter().enumerate() {
            let f = normalized_doppler(v, config);
            let mut acc = Complex64::new(0.0, 0.0);
            for n in 0..config.symbols {
                for m in 0..config.subcarriers {
                    acc += echo.samples[(m, n)]
                        * sense.samples[(m, n)]
                        * Complex64::from_polar(1.0, m as f64 * tau - 2.0 * PI * n as f64 * f);
                }
            }
            values[(k, l)] = acc.norm_sqr();
        }
    }
    Ok(Spectrum { ranges, velocities, values })
}

/// Peak-to-mean ratio of a spectrum.
pub fn peak_to_mean(spectrum: &Spectrum) -> f64 {
    spectrum.max() / spectrum.mean()
}

/// Peak-to-mean threshold for a noise-only spectrum with `cells` grid points.
///
/// Noise-only spectrum values are exponential; treating the cells as
/// independent gives `P(max < t·mean) = (1 − e^{−t})^cells`. Correlated cells
/// only lower the maximum. The mean is itself estimated from the same cells,
/// so the threshold is raised by three of its standard errors.
pub fn noise_only_threshold(cells: usize, false_alarm: f64) -> Result<f64> {
    if cells == 0 || !(false_alarm > 0.0 && false_alarm < 1.0) {
        bail!(Input, "need cells > 0 and a false-alarm rate in (0, 1)");
    }
    let per_cell = (1.0 - false_alarm).powf(1.0 / cells as f64);
    let mean_margin = 1.0 - 3.0 / (cells as f64).sqrt();
    Ok(-(1.0 - per_cell).ln() / mean_margin.max(0.1))
}
