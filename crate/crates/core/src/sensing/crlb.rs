use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::Matrix2;

use crate::channel::TargetSet;
use crate::error::{bail, Result};
use crate::waveform::{Frame, WaveformConfig};
use crate::SPEED_OF_LIGHT;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetBound {
    /// Fisher information over `(r, v)`.
    pub fisher: Matrix2<f64>,
    /// Bound on the range error variance (m²); infinite when singular.
    pub range: f64,
    /// Bound on the velocity error variance ((m/s)²); infinite when singular.
    pub velocity: f64,
    pub singular: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrlbResult {
    pub targets: Vec<TargetBound>,
}

impl CrlbResult {
    pub fn any_singular(&self) -> bool {
        self.targets.iter().any(|t| t.singular)
    }
}

/// Per-target Cramér–Rao bounds for range and velocity from an echo
/// `μ = sqrt(P_t/M)·G ⊙ X` in white complex Gaussian noise of variance
/// `σ_s²`, using the real Fisher form `J = (2/σ_s²)·Re Σ ∂μ*/∂θ_i ∂μ/∂θ_j`.
///
/// With `∂τ^s/∂r = 4πΔf/c = a_r` and `∂f^s/∂v = 2f_cT_s/c = a_v`:
/// `J_rr = (2/σ²)Σ|μ|²m²a_r²`, `J_vv = (2/σ²)Σ|μ|²(2πn a_v)²`,
/// `J_rv = −(2/σ²)Σ|μ|² m n a_r 2π a_v`. Targets are bounded one at a time.
pub fn crlb(
    targets: &TargetSet,
    frame: &Frame,
    noise_var: f64,
    transmit_power: f64,
    config: &WaveformConfig,
) -> Result<CrlbResult> {
    if frame.samples.shape() != (config.subcarriers, config.symbols) {
        bail!(Input, "frame shape {:?} does not match the configuration", frame.samples.shape());
    }
    if !(noise_var > 0.0 && transmit_power > 0.0) {
        bail!(Input, "noise variance and transmit power must be positive");
    }
    let (mut smm, mut smn, mut snn) = (0.0, 0.0, 0.0);
    for n in 0..config.symbols {
        for m in 0..config.subcarriers {
            let p = frame.samples[(m, n)].norm_sqr();
            let (mf, nf) = (m as f64, n as f64);
            smm += p * mf * mf;
            smn += p * mf * nf;
            snn += p * nf * nf;
        }
    }
    if smm == 0.0 && snn == 0.0 {
        bail!(Input, "frame carries no energy");
    }
    let a_r = 4.0 * PI * config.subcarrier_spacing / SPEED_OF_LIGHT;
    let a_v = 2.0 * PI * 2.0 * config.carrier * config.symbol_duration / SPEED_OF_LIGHT;
    let scale = 2.0 / noise_var * (transmit_power / config.subcarriers as f64);
    let bounds = targets
        .targets()
        .iter()
        .map(|t| {
            let g = scale * t.reflectivity.norm_sqr();
            let jrr = g * smm * a_r * a_r;
            let jvv = g * snn * a_v * a_v;
            let jrv = -g * smn * a_r * a_v;
            let fisher = Matrix2::new(jrr, jrv, jrv, jvv);
            let det = jrr * jvv - jrv * jrv;
            let singular = !(det > 1e-12 * jrr * jvv) || !det.is_finite();
            let (range, velocity) =
                if singular { (f64::INFINITY, f64::INFINITY) } else { (jvv / det, jrr / det) };
            TargetBound { fisher, range, velocity, singular }
        })
        .collect();
    Ok(CrlbResult { targets: bounds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::target_response;
    use crate::testutil::config;
    use crate::waveform::{build_sense_frame, FrameRole};
    use crate::Complex64;
    use nalgebra::DMatrix;

    fn scene() -> (WaveformConfig, TargetSet, Frame) {
        let mut cfg = config(64);
        cfg.symbols = 16;
        let t = TargetSet::from_pairs(&[(150.0, 12.0), (800.0, -40.0)], Complex64::new(0.6, -0.8), &cfg).unwrap();
        let x = build_sense_frame(&cfg).unwrap();
        (cfg, t, x)
    }

    #[test]
    fn scaling_laws_are_exact() {
        let (cfg, t, x) = scene();
        let base = crlb(&t, &x, 0.5, 1.0, &cfg).unwrap();
        let power = crlb(&t, &x, 0.5, 2.0, &cfg).unwrap();
        let noise = crlb(&t, &x, 1.0, 1.0, &cfg).unwrap();
        for ((b, p), n) in base.targets.iter().zip(&power.targets).zip(&noise.targets) {
            assert!(!b.singular);
            assert!((p.range / b.range - 0.5).abs() < 1e-10);
            assert!((p.velocity / b.velocity - 0.5).abs() < 1e-10);
            assert!((n.range / b.range - 2.0).abs() < 1e-10);
            assert!((n.velocity / b.velocity - 2.0).abs() < 1e-10);
            assert!(b.fisher.symmetric_eigen().eigenvalues.iter().all(|&l| l > 0.0));
        }
    }

    /// Fisher information from numerical derivatives of the noiseless echo.
    #[test]
    fn matches_finite_difference_fisher() {
        let (cfg, t, x) = scene();
        let target = t.targets()[0];
        let amp = (2.0 / cfg.subcarriers as f64).sqrt();
        let mu = |r: f64, v: f64| {
            let one = TargetSet::from_pairs(&[(r, v)], target.reflectivity, &cfg).unwrap();
            target_response(&one, &cfg).component_mul(&x.samples) * Complex64::new(amp, 0.0)
        };
        let (hr, hv) = (1e-4, 1e-4);
        let dr = (mu(target.range + hr, target.velocity) - mu(target.range - hr, target.velocity)) / Complex64::new(2.0 * hr, 0.0);
        let dv = (mu(target.range, target.velocity + hv) - mu(target.range, target.velocity - hv)) / Complex64::new(2.0 * hv, 0.0);
        let inner = |a: &DMatrix<Complex64>, b: &DMatrix<Complex64>| a.iter().zip(b.iter()).map(|(p, q)| (p.conj() * q).re).sum::<f64>();
        let sigma2 = 0.3;
        let j = Matrix2::new(inner(&dr, &dr), inner(&dr, &dv), inner(&dv, &dr), inner(&dv, &dv)) * (2.0 / sigma2);
        let got = crlb(&t, &x, sigma2, 2.0, &cfg).unwrap().targets[0].fisher;
        for (a, b) in got.iter().zip(j.iter()) {
            assert!((a - b).abs() < 1e-5 * j.abs().max(), "{got} vs {j}");
        }
    }

    #[test]
    fn degenerate_inputs() {
        let (cfg, t, _) = scene();
        let zero = Frame::new(DMatrix::zeros(64, 16), FrameRole::Sense);
        assert!(crlb(&t, &zero, 1.0, 1.0, &cfg).is_err());
        let (_, _, x) = scene();
        assert!(crlb(&t, &x, 0.0, 1.0, &cfg).is_err());
        // a single symbol carries no Doppler information
        let mut one = cfg.clone();
        one.symbols = 1;
        let x1 = Frame::new(DMatrix::from_element(64, 1, Complex64::new(1.0, 0.0)), FrameRole::Sense);
        let t1 = TargetSet::from_pairs(&[(10.0, 1.0)], Complex64::new(1.0, 0.0), &one).unwrap();
        let res = crlb(&t1, &x1, 1.0, 1.0, &one).unwrap();
        assert!(res.any_singular());
        assert!(res.targets[0].range.is_infinite());
    }
}
