//! Transmit-side Doppler pre-compensation and SINR analysis.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;

use crate::channel::{channel_matrix_from, Path, PathSet};
use crate::error::{bail, Result};
use crate::linalg::{checked_inverse, frobenius, inverse_with_condition, CMatrix, MAX_CONDITION};
use crate::sensing::Estimate;
use crate::waveform::WaveformConfig;
use crate::SPEED_OF_LIGHT;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// True path parameters.
    Genie,
    /// Delays and Dopplers from sensing.
    Sensed,
    /// Genie or sensed values with perturbed gains.
    Perturbed,
}

/// One-way path parameters used to rebuild the channel at the transmitter.
#[derive(Debug, Clone, PartialEq)]
pub struct SensedChannelEstimate {
    pub paths: Vec<Path>,
    pub provenance: Provenance,
}

impl SensedChannelEstimate {
    pub fn genie(paths: &PathSet) -> Self {
        Self { paths: paths.paths.clone(), provenance: Provenance::Genie }
    }

    /// Paths from range/velocity estimates with the given gains. A mono-static
    /// echo travels twice the path, so the one-way delay is `r/c` and the
    /// one-way Doppler `f_c v / c`.
    pub fn from_estimates(gains: &[Complex64], estimates: &[Estimate], config: &WaveformConfig) -> Result<Self> {
        if gains.len() != estimates.len() {
            bail!(Input, "{} gains for {} estimates", gains.len(), estimates.len());
        }
        let paths = gains
            .iter()
            .zip(estimates)
            .map(|(&gain, e)| Path {
                gain,
                delay: e.range / SPEED_OF_LIGHT,
                doppler: config.carrier * e.velocity / SPEED_OF_LIGHT,
            })
            .collect();
        Ok(Self { paths, provenance: Provenance::Sensed })
    }

    /// Multiply every gain by `factor`.
    pub fn perturb_gains(mut self, factor: Complex64) -> Self {
        for p in &mut self.paths {
            p.gain *= factor;
        }
        self.provenance = Provenance::Perturbed;
        self
    }
}

/// `H̃` from the estimated paths with the closed-form ICI matrix.
pub fn reconstruct_channel(estimate: &SensedChannelEstimate, config: &WaveformConfig) -> Result<CMatrix> {
    if estimate.paths.is_empty() {
        bail!(Input, "no paths to reconstruct the channel from");
    }
    Ok(channel_matrix_from(estimate.paths.iter().copied(), config))
}

/// Precoder `U = W/κ` with `κ = ‖W‖_F`.
///
/// For a perfect estimate the channel seen through the precoder is
/// `H·U = diag(target)/κ`: identity for the full inverse, the channel's own
/// diagonal for the ICI-only variant.
#[derive(Debug, Clone, PartialEq)]
pub struct Compensator {
    pub matrix: CMatrix,
    pub target: DVector<Complex64>,
    pub norm: f64,
    /// 1-norm condition number of `H̃`.
    pub condition: f64,
}

impl Compensator {
    /// `κ·H·U`, the channel the receiver sees after undoing the normalisation.
    pub fn effective_channel(&self, channel: &CMatrix) -> CMatrix {
        channel * &self.matrix * Complex64::new(self.norm, 0.0)
    }
}

fn invert_estimate(estimated: &CMatrix) -> Result<(CMatrix, f64)> {
    let (inv, cond) = inverse_with_condition(estimated)?;
    if !(cond <= MAX_CONDITION) {
        bail!(Numerical, "reconstructed channel is near-singular (condition {cond:.3e})");
    }
    Ok((inv, cond))
}

/// `U = H̃⁻¹ / ‖H̃⁻¹‖_F`.
pub fn build_compensator(estimated: &CMatrix) -> Result<Compensator> {
    let (inv, condition) = invert_estimate(estimated)?;
    let norm = frobenius(&inv);
    Ok(Compensator {
        matrix: inv / Complex64::new(norm, 0.0),
        target: DVector::from_element(estimated.nrows(), Complex64::new(1.0, 0.0)),
        norm,
        condition,
    })
}

/// `U = H̃⁻¹ T / ‖H̃⁻¹ T‖_F` with `T = diag(H̃)`: cancels only the
/// inter-carrier interference and leaves each subcarrier's own gain for the
/// receiver to equalise.
pub fn build_ici_compensator(estimated: &CMatrix) -> Result<Compensator> {
    let (inv, condition) = invert_estimate(estimated)?;
    let target = estimated.diagonal();
    let w = DMatrix::from_fn(inv.nrows(), inv.ncols(), |i, j| inv[(i, j)] * target[j]);
    let norm = frobenius(&w);
    if !(norm > 0.0) {
        bail!(Numerical, "reconstructed channel has a zero diagonal");
    }
    Ok(Compensator { matrix: w / Complex64::new(norm, 0.0), target, norm, condition })
}

/// `H̄ = (I + Δ_H H⁻¹)⁻¹` with `Δ_H = H̃ − H`.
pub fn equivalent_channel(channel: &CMatrix, estimated: &CMatrix) -> Result<CMatrix> {
    if channel.shape() != estimated.shape() || !channel.is_square() {
        bail!(Input, "channel and estimate must be square and of equal size");
    }
    let h_inv = checked_inverse(channel)?;
    let delta = estimated - channel;
    let inner = CMatrix::identity(channel.nrows(), channel.ncols()) + delta * h_inv;
    checked_inverse(&inner)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinrReport {
    /// Linear SINR per subcarrier.
    pub sinr: Vec<f64>,
    pub omega: Vec<f64>,
    pub min_sinr: f64,
    pub argmin: usize,
    /// Some `H̄_{m,m}` vanished; those subcarriers report zero SINR.
    pub flagged: bool,
}

/// `Ω_m` for one subcarrier. The diagonal mismatch is complex; its squared
/// magnitude is used.
fn omega_m(equivalent: &CMatrix, m: usize, rho: f64, scaled_norm: f64) -> f64 {
    let diag = equivalent[(m, m)];
    let off: f64 = (0..equivalent.ncols()).filter(|&j| j != m).map(|j| equivalent[(m, j)].norm_sqr()).sum();
    let mismatch = (diag - Complex64::new(scaled_norm, 0.0)).norm_sqr();
    (off + rho / (1.0 - rho) * mismatch) / diag.norm_sqr()
}

/// Per-subcarrier SINR after compensation and sensing subtraction.
pub fn sinr_per_subcarrier(
    equivalent: &CMatrix,
    channel: &CMatrix,
    rho: f64,
    transmit_power: f64,
    noise_var: f64,
) -> Result<SinrReport> {
    if !(0.0..1.0).contains(&rho) {
        bail!(Input, "power split {rho} outside [0, 1)");
    }
    if equivalent.shape() != channel.shape() || !channel.is_square() {
        bail!(Input, "equivalent and physical channels must be square and of equal size");
    }
    let m_count = channel.nrows();
    let noise = frobenius(&checked_inverse(channel)?).powi(2) * noise_var;
    let scaled_norm = frobenius(equivalent) / (m_count as f64).sqrt();
    let (mut sinr, mut omega) = (Vec::with_capacity(m_count), Vec::with_capacity(m_count));
    let mut flagged = false;
    for m in 0..m_count {
        let d2 = equivalent[(m, m)].norm_sqr();
        if d2 == 0.0 {
            flagged = true;
            sinr.push(0.0);
            omega.push(f64::INFINITY);
            continue;
        }
        let om = omega_m(equivalent, m, rho, scaled_norm);
        omega.push(om);
        sinr.push(1.0 / (om + noise / ((1.0 - rho) * d2 * transmit_power)));
    }
    let (argmin, min_sinr) = sinr
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (m, s)| if s < best.1 { (m, s) } else { best });
    Ok(SinrReport { sinr, omega, min_sinr, argmin, flagged })
}

/// `ρ ∈ {0.00, 0.01, …, 0.99}` maximising the minimum SINR, with the smaller
/// `ρ` kept on ties. Returns `(ρ*, min SINR at ρ*)`.
pub fn optimize_rho(equivalent: &CMatrix, channel: &CMatrix, transmit_power: f64, noise_var: f64) -> Result<(f64, f64)> {
    optimize_rho_on_grid(equivalent, channel, transmit_power, noise_var, 100)
}

pub(crate) fn optimize_rho_on_grid(
    equivalent: &CMatrix,
    channel: &CMatrix,
    transmit_power: f64,
    noise_var: f64,
    steps: usize,
) -> Result<(f64, f64)> {
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..steps {
        let rho = i as f64 / steps as f64;
        let s = sinr_per_subcarrier(equivalent, channel, rho, transmit_power, noise_var)?.min_sinr;
        if s > best.1 {
            best = (rho, s);
        }
    }
    Ok(best)
}

/// Upper bound on `ρ` that keeps the communication gain `G_c` (dB):
///
/// `ρ_max = 1 − max_m { A / (10^{G_c/10} (Ω_m + A/(P_t²|H̄_mm|²)) |H̄_mm|² P_t²) }`,
/// `A = ‖H⁻¹‖_F² σ²`, with `Ω_m` taken at `ρ = 0`.
///
/// Returns the clamped bound and whether clamping to zero was needed.
pub fn rho_max(
    equivalent: &CMatrix,
    channel: &CMatrix,
    gain_db: f64,
    transmit_power: f64,
    noise_var: f64,
) -> Result<(f64, bool)> {
    if !(gain_db >= 0.0) {
        bail!(Input, "communication gain must be non-negative (got {gain_db} dB)");
    }
    if equivalent.shape() != channel.shape() || !channel.is_square() {
        bail!(Input, "equivalent and physical channels must be square and of equal size");
    }
    let a = frobenius(&checked_inverse(channel)?).powi(2) * noise_var;
    let gain = 10f64.powf(gain_db / 10.0);
    let p2 = transmit_power * transmit_power;
    let scaled_norm = frobenius(equivalent) / (channel.nrows() as f64).sqrt();
    let mut worst = f64::NEG_INFINITY;
    for m in 0..channel.nrows() {
        let d2 = equivalent[(m, m)].norm_sqr();
        if d2 == 0.0 {
            worst = f64::INFINITY;
            continue;
        }
        let om = omega_m(equivalent, m, 0.0, scaled_norm);
        worst = worst.max(a / (gain * (om + a / (p2 * d2)) * d2 * p2));
    }
    let bound = 1.0 - worst;
    Ok(if bound < 0.0 { (0.0, true) } else { (bound, false) })
}

/// SNR gap (dB) at which two BER curves reach `target`, interpolating
/// `log10(BER)` linearly in SNR. Points with zero BER are ignored.
pub fn comm_gain_gc(im: &[(f64, f64)], ofdm: &[(f64, f64)], target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        bail!(Input, "target BER {target} outside (0, 1)");
    }
    Ok(snr_at_ber(ofdm, target)? - snr_at_ber(im, target)?)
}

/// First crossing of `target` by a BER curve given as `(snr_db, ber)`.
pub fn snr_at_ber(curve: &[(f64, f64)], target: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = curve.iter().copied().filter(|&(_, b)| b > 0.0).collect();
    let lt = target.log10();
    for w in pts.windows(2) {
        let ((s0, b0), (s1, b1)) = (w[0], w[1]);
        if b0 >= target && b1 <= target {
            let (l0, l1) = (b0.log10(), b1.log10());
            if l0 == l1 {
                return Ok(s0);
            }
            return Ok(s0 + (lt - l0) / (l1 - l0) * (s1 - s0));
        }
    }
    bail!(Input, "BER curve does not bracket {target}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{freq_channel_matrix, sample_paths, ChannelModel};
    use crate::linalg::max_abs_diff;
    use crate::rng::{complex_normal, trial_rng};
    use crate::testutil::config;

    fn random_channel(m: usize, seed: u64, velocity_std: f64) -> (WaveformConfig, PathSet, CMatrix) {
        let cfg = config(m);
        let mut rng = trial_rng(seed, "comp", 0);
        let paths = sample_paths(ChannelModel::Rician { k_factor: 2.0 }, 3, 4, velocity_std, &cfg, &mut rng).unwrap();
        let h = freq_channel_matrix(&paths, &cfg);
        (cfg, paths, h)
    }

    fn random_matrix(m: usize, seed: u64) -> CMatrix {
        let mut rng = trial_rng(seed, "mat", 0);
        CMatrix::identity(m, m) * Complex64::new(2.0, 0.0) + DMatrix::from_fn(m, m, |_, _| complex_normal(&mut rng, 0.2))
    }

    #[test]
    fn genie_reconstruction_is_exact() {
        let (cfg, paths, h) = random_channel(16, 1, 300.0);
        let est = SensedChannelEstimate::genie(&paths);
        assert_eq!(reconstruct_channel(&est, &cfg).unwrap(), h);
        let empty = SensedChannelEstimate { paths: Vec::new(), provenance: Provenance::Genie };
        assert!(reconstruct_channel(&empty, &cfg).is_err());
    }

    #[test]
    fn doppler_error_grows_mismatch() {
        let (cfg, paths, h) = random_channel(16, 2, 300.0);
        let mut last = 0.0;
        for k in 1..=10 {
            let mut est = SensedChannelEstimate::genie(&paths);
            for p in &mut est.paths {
                p.doppler += k as f64 * 5.0;
            }
            let d = frobenius(&(reconstruct_channel(&est, &cfg).unwrap() - &h));
            assert!(d > last);
            last = d;
        }
    }

    #[test]
    fn estimates_convert_to_one_way_paths() {
        let cfg = config(16);
        let est = [Estimate::new(300.0, 12.0, 1.0)];
        let s = SensedChannelEstimate::from_estimates(&[Complex64::new(1.0, 0.0)], &est, &cfg).unwrap();
        assert!((s.paths[0].range() - 300.0).abs() < 1e-9);
        assert!((s.paths[0].velocity(&cfg) - 12.0).abs() < 1e-9);
        let p = s.perturb_gains(Complex64::new(0.0, 2.0));
        assert_eq!(p.provenance, Provenance::Perturbed);
        assert_eq!(p.paths[0].gain, Complex64::new(0.0, 2.0));
    }

    #[test]
    fn compensator_norm_and_identity() {
        let u = build_compensator(&CMatrix::identity(8, 8)).unwrap();
        assert!(max_abs_diff(&u.matrix, &(CMatrix::identity(8, 8) / Complex64::new(8f64.sqrt(), 0.0))) < 1e-15);
        for seed in 0..10 {
            let h = random_matrix(12, seed);
            for c in [build_compensator(&h).unwrap(), build_ici_compensator(&h).unwrap()] {
                assert!((frobenius(&c.matrix) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn perfect_compensation_diagonalises() {
        let (_, _, h) = random_channel(16, 3, 300.0);
        let full = build_compensator(&h).unwrap();
        let hu = &h * &full.matrix;
        let expected = CMatrix::identity(16, 16) / Complex64::new(full.norm, 0.0);
        assert!(max_abs_diff(&hu, &expected) < 1e-12);

        let ici = build_ici_compensator(&h).unwrap();
        let eff = ici.effective_channel(&h);
        assert!(max_abs_diff(&eff, &CMatrix::from_diagonal(&h.diagonal())) < 1e-12);
        // static channels: the ICI-only precoder is a scaled identity
        let (_, _, hs) = random_channel(16, 4, 0.0);
        let c = build_ici_compensator(&hs).unwrap();
        assert!(max_abs_diff(&c.matrix, &(CMatrix::identity(16, 16) / Complex64::new(4.0, 0.0))) < 1e-12);
    }

    #[test]
    fn singular_estimate_rejected() {
        let mut h = CMatrix::identity(4, 4);
        h[(3, 3)] = Complex64::new(0.0, 0.0);
        assert!(build_compensator(&h).is_err());
        h[(3, 3)] = Complex64::new(1e-14, 0.0);
        assert!(build_compensator(&h).is_err());
    }

    #[test]
    fn equivalent_channel_cases() {
        let h = random_matrix(8, 7);
        let id = CMatrix::identity(8, 8);
        assert!(max_abs_diff(&equivalent_channel(&h, &h).unwrap(), &id) < 1e-12);
        let doubled = &h * Complex64::new(2.0, 0.0);
        assert!(max_abs_diff(&equivalent_channel(&h, &doubled).unwrap(), &(id * Complex64::new(0.5, 0.0))) < 1e-12);
    }

    #[test]
    fn received_signal_identity() {
        let mut rng = trial_rng(8, "eq6", 0);
        for seed in 0..10 {
            let h = random_matrix(8, seed);
            let ht = &h + DMatrix::from_fn(8, 8, |_, _| complex_normal(&mut rng, 0.01));
            let x = DVector::from_fn(8, |_, _| complex_normal(&mut rng, 1.0));
            let pt = 3.0f64;
            let u = build_compensator(&ht).unwrap();
            let lhs = &h * &u.matrix * &x * Complex64::new(pt.sqrt(), 0.0);
            let hbar = equivalent_channel(&h, &ht).unwrap();
            let rhs = hbar * &x * Complex64::new(pt.sqrt() / frobenius(&checked_inverse(&ht).unwrap()), 0.0);
            assert!((lhs - rhs).camax() < 1e-9);
        }
    }

    #[test]
    fn sinr_identity_channel() {
        let h = random_matrix(8, 3);
        let id = CMatrix::identity(8, 8);
        let rep = sinr_per_subcarrier(&id, &h, 0.0, 2.0, 0.1).unwrap();
        let expected = 2.0 / (frobenius(&checked_inverse(&h).unwrap()).powi(2) * 0.1);
        assert!(rep.sinr.iter().all(|s| (s - expected).abs() < 1e-12 * expected));
        assert!(rep.omega.iter().all(|&o| o == 0.0));
        let mut last = f64::INFINITY;
        for i in 0..100 {
            let s = sinr_per_subcarrier(&id, &h, i as f64 / 100.0, 2.0, 0.1).unwrap().min_sinr;
            assert!(s < last);
            last = s;
        }
        assert_eq!(optimize_rho(&id, &h, 2.0, 0.1).unwrap().0, 0.0);
        assert!(sinr_per_subcarrier(&id, &h, 1.0, 2.0, 0.1).is_err());
    }

    #[test]
    fn zero_diagonal_is_flagged() {
        let mut hb = CMatrix::identity(4, 4);
        hb[(2, 2)] = Complex64::new(0.0, 0.0);
        hb[(2, 1)] = Complex64::new(1.0, 0.0);
        let rep = sinr_per_subcarrier(&hb, &CMatrix::identity(4, 4), 0.2, 1.0, 0.1).unwrap();
        assert!(rep.flagged);
        assert_eq!((rep.min_sinr, rep.argmin), (0.0, 2));
    }

    #[test]
    fn optimum_matches_fine_grid() {
        // Both Ω_m and the noise term grow with ρ, so a perturbed H̄ still
        // peaks at the lower edge of the grid.
        for seed in 0..20 {
            let mut rng = trial_rng(seed, "perturbed", 0);
            let m = 8;
            let hb = DMatrix::from_fn(m, m, |i, j| {
                let d = if i == j { Complex64::new(1.0 + 0.3 * (i as f64 - 3.5) / 3.5, 0.0) } else { Complex64::new(0.0, 0.0) };
                d + complex_normal(&mut rng, 1e-3)
            });
            let h = random_matrix(m, seed);
            let (coarse, cs) = optimize_rho(&hb, &h, 1.0, 1e-2).unwrap();
            let (fine, fs) = optimize_rho_on_grid(&hb, &h, 1.0, 1e-2, 1000).unwrap();
            assert!((coarse - fine).abs() <= 0.01 + 1e-12, "{coarse} vs {fine}");
            assert!(fs >= cs);
            for i in 0..100 {
                let s = sinr_per_subcarrier(&hb, &h, i as f64 / 100.0, 1.0, 1e-2).unwrap().min_sinr;
                assert!(cs >= s);
            }
            assert_eq!(coarse, 0.0);
        }
    }

    #[test]
    fn static_rho_max_closed_form() {
        let h = random_matrix(8, 5);
        let id = CMatrix::identity(8, 8);
        for g in [0.0, 3.0, 5.0, 10.0] {
            let (r, clamped) = rho_max(&id, &h, g, 1.7, 0.2).unwrap();
            assert!(!clamped);
            assert!((r - (1.0 - 10f64.powf(-g / 10.0))).abs() < 1e-12);
        }
        assert!((rho_max(&id, &h, 5.0, 1.0, 1.0).unwrap().0 - 0.683_772_233_983_162).abs() < 1e-12);
        assert!(rho_max(&id, &h, 60.0, 1.0, 1.0).unwrap().0 > 0.999_99);
        assert!(rho_max(&id, &h, -1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn gain_interpolation() {
        let base: Vec<(f64, f64)> = (0..10).map(|i| (i as f64 * 2.0, 10f64.powf(-0.5 * i as f64))).collect();
        let shifted: Vec<(f64, f64)> = base.iter().map(|&(s, b)| (s - 3.0, b)).collect();
        assert!(comm_gain_gc(&base, &base, 1e-3).unwrap().abs() < 1e-12);
        assert!((comm_gain_gc(&shifted, &base, 1e-3).unwrap() - 3.0).abs() < 1e-12);
        // 1e-3 is reached at 12 dB on the base curve
        assert!((snr_at_ber(&base, 1e-3).unwrap() - 12.0).abs() < 1e-12);
        assert!(comm_gain_gc(&base, &base, 1e-12).is_err());
    }
}
