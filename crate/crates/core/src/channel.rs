//! Mono-static radar echoes and time-varying multipath communication
//! channels.
//!
//! Indices are zero-based throughout: subcarrier `m ∈ 0..M`, symbol
//! `n ∈ 0..N_s`, delay tap `d ∈ 0..N_d`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;
use rand_core::RngCore;

use crate::error::{bail, Result};
use crate::linalg::CMatrix;
use crate::rng::{below, complex_normal, normal, uniform};
use crate::waveform::{Frame, FrameRole, WaveformConfig};
use crate::SPEED_OF_LIGHT;

/// Per-subcarrier amplitude of a frame whose columns have squared norm `M`
/// when the total transmit power is `P_t`.
pub fn transmit_amplitude(config: &WaveformConfig) -> f64 {
    (config.transmit_power / config.subcarriers as f64).sqrt()
}

/// Round-trip phase slope per subcarrier, `τ^s = 4π Δf r / c`.
pub fn normalized_delay(range: f64, config: &WaveformConfig) -> f64 {
    4.0 * PI * config.subcarrier_spacing * range / SPEED_OF_LIGHT
}

/// Round-trip Doppler per symbol in cycles, `f^s = 2 f_c v T_s / c`.
pub fn normalized_doppler(velocity: f64, config: &WaveformConfig) -> f64 {
    2.0 * config.carrier * velocity * config.symbol_duration / SPEED_OF_LIGHT
}

pub fn range_from_normalized_delay(tau: f64, config: &WaveformConfig) -> f64 {
    tau * SPEED_OF_LIGHT / (4.0 * PI * config.subcarrier_spacing)
}

pub fn velocity_from_normalized_doppler(f: f64, config: &WaveformConfig) -> f64 {
    f * SPEED_OF_LIGHT / (2.0 * config.carrier * config.symbol_duration)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub reflectivity: Complex64,
    /// Range (m).
    pub range: f64,
    /// Radial velocity (m/s).
    pub velocity: f64,
    /// `τ^s` for this target.
    pub norm_delay: f64,
    /// `f^s` for this target.
    pub norm_doppler: f64,
}

impl Target {
    pub fn new(reflectivity: Complex64, range: f64, velocity: f64, config: &WaveformConfig) -> Self {
        Self {
            reflectivity,
            range,
            velocity,
            norm_delay: normalized_delay(range, config),
            norm_doppler: normalized_doppler(velocity, config),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetSet {
    targets: Vec<Target>,
}

impl TargetSet {
    pub fn new(targets: Vec<Target>) -> Result<Self> {
        if targets.is_empty() {
            bail!(Input, "a target set needs at least one target");
        }
        if let Some(t) = targets.iter().find(|t| !(t.range >= 0.0 && t.range.is_finite())) {
            bail!(Input, "target range {} must be non-negative", t.range);
        }
        Ok(Self { targets })
    }

    /// Targets from `(range, velocity)` pairs with a common reflectivity.
    pub fn from_pairs(
        pairs: &[(f64, f64)],
        reflectivity: Complex64,
        config: &WaveformConfig,
    ) -> Result<Self> {
        Self::new(pairs.iter().map(|&(r, v)| Target::new(reflectivity, r, v, config)).collect())
    }

    pub fn targets(&self) -> &[Target] {
        &self.targets
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelModel {
    /// A single unit-power path.
    LineOfSight,
    /// A deterministic dominant path with `k_factor` times the power of each
    /// scattered path.
    Rician { k_factor: f64 },
    /// All paths scattered.
    Rayleigh,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    pub gain: Complex64,
    /// Delay (s), on the tap grid `d · T_s / M`.
    pub delay: f64,
    /// Doppler shift (Hz).
    pub doppler: f64,
}

impl Path {
    pub fn tap(&self, config: &WaveformConfig) -> usize {
        libm::round(self.delay * config.subcarriers as f64 / config.symbol_duration) as usize
    }

    /// One-way range implied by the delay.
    pub fn range(&self) -> f64 {
        self.delay * SPEED_OF_LIGHT
    }

    pub fn velocity(&self, config: &WaveformConfig) -> f64 {
        self.doppler * SPEED_OF_LIGHT / config.carrier
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub paths: Vec<Path>,
    pub model: ChannelModel,
    /// Delay-tap count `N_d`.
    pub taps: usize,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Same gains and delays with every Doppler shift set to zero.
    pub fn without_doppler(&self) -> Self {
        let mut out = self.clone();
        for p in &mut out.paths {
            p.doppler = 0.0;
        }
        out
    }
}

/// Draw a multipath channel.
///
/// Scattered gains are `CN(0, 1)`. Delays are uniform over the tap grid,
/// drawn without replacement while `P ≤ N_d` so distinct paths stay
/// resolvable in delay. Radial velocities are `N(0, velocity_std²)` and
/// `f_p = f_c v_p / c`. Line-of-sight channels always have one path.
pub fn sample_paths<R: RngCore + ?Sized>(
    model: ChannelModel,
    count: usize,
    taps: usize,
    velocity_std: f64,
    config: &WaveformConfig,
    rng: &mut R,
) -> Result<PathSet> {
    if count == 0 || taps == 0 {
        bail!(Input, "path count and tap count must be positive");
    }
    if !(velocity_std >= 0.0 && velocity_std.is_finite()) {
        bail!(Input, "velocity standard deviation must be non-negative");
    }
    if let ChannelModel::Rician { k_factor } = model {
        if !(k_factor >= 0.0 && k_factor.is_finite()) {
            bail!(Input, "Rice factor must be non-negative");
        }
    }
    let count = if model == ChannelModel::LineOfSight { 1 } else { count };

    let mut free: Vec<usize> = (0..taps).collect();
    let tap_spacing = config.symbol_duration / config.subcarriers as f64;
    let mut paths = Vec::with_capacity(count);
    for p in 0..count {
        let gain = match (model, p) {
            (ChannelModel::LineOfSight, _) => Complex64::from_polar(1.0, 2.0 * PI * uniform(rng)),
            (ChannelModel::Rician { k_factor }, 0) => {
                Complex64::from_polar(k_factor.sqrt(), 2.0 * PI * uniform(rng))
            }
            _ => complex_normal(rng, 1.0),
        };
        let tap = if free.is_empty() {
            below(rng, taps as u64) as usize
        } else {
            free.swap_remove(below(rng, free.len() as u64) as usize)
        };
        let velocity = normal(rng, velocity_std);
        paths.push(Path {
            gain,
            delay: tap as f64 * tap_spacing,
            doppler: config.carrier * velocity / SPEED_OF_LIGHT,
        });
    }
    Ok(PathSet { paths, model, taps })
}

/// `(1 − e^{j2πx}) / (1 − e^{j2πx/M})` for `x = ε + offset`, with the
/// removable singularity at `x ≡ 0 (mod M)` evaluated as `M`.
///
/// The numerator only depends on the fractional Doppler `ε`, so integer
/// offsets give exact zeros when `ε = 0`.
pub(crate) fn ici_kernel(eps: f64, offset: i64, m: usize) -> Complex64 {
    let mf = m as f64;
    let x = eps + offset as f64;
    let reduced = x - mf * libm::round(x / mf);
    if reduced == 0.0 {
        return Complex64::new(mf, 0.0);
    }
    // 1 − e^{jθ} = −2j·sin(θ/2)·e^{jθ/2}; the −2j cancels.
    let num = Complex64::from_polar(libm::sin(PI * eps), PI * eps);
    let den = Complex64::from_polar(libm::sin(PI * reduced / mf), PI * reduced / mf);
    num / den
}

/// Frequency-domain channel matrix with inter-carrier interference,
/// `H_{i,j} = (1/M) Σ_p α_p e^{−j2π τ_p j / T_s} K(f_p T_s − i + j)`.
pub fn freq_channel_matrix(paths: &PathSet, config: &WaveformConfig) -> CMatrix {
    channel_matrix_from(paths.paths.iter().copied(), config)
}

pub(crate) fn channel_matrix_from(
    paths: impl Iterator<Item = Path>,
    config: &WaveformConfig,
) -> CMatrix {
    let m = config.subcarriers;
    let mut h = DMatrix::zeros(m, m);
    for path in paths {
        let eps = path.doppler * config.symbol_duration;
        // kernel only depends on j − i
        let kernel: Vec<Complex64> =
            (0..2 * m - 1).map(|k| ici_kernel(eps, k as i64 - (m as i64 - 1), m)).collect();
        let phase_step = -2.0 * PI * path.delay / config.symbol_duration;
        for j in 0..m {
            let col = path.gain * Complex64::from_polar(1.0 / m as f64, phase_step * j as f64);
            for i in 0..m {
                h[(i, j)] += col * kernel[j + m - 1 - i];
            }
        }
    }
    h
}

/// Channel impulse response at time sample `m` of a symbol,
/// `h_d(m) = Σ_p α_p [τ_p = d T_s / M] e^{j2π f_p m T_s / M}`.
pub fn cir_taps(paths: &PathSet, config: &WaveformConfig, sample: usize) -> Result<Vec<Complex64>> {
    if sample >= config.subcarriers {
        bail!(Input, "sample index {sample} outside 0..{}", config.subcarriers);
    }
    let mut taps = vec![Complex64::new(0.0, 0.0); paths.taps];
    for p in &paths.paths {
        let d = p.tap(config);
        if d >= taps.len() {
            bail!(Input, "path delay maps to tap {d} beyond {} taps", paths.taps);
        }
        let phase = 2.0 * PI * p.doppler * sample as f64 * config.symbol_duration
            / config.subcarriers as f64;
        taps[d] += p.gain * Complex64::from_polar(1.0, phase);
    }
    Ok(taps)
}

/// Target response `G_{m,n} = Σ_p γ_p e^{−j m τ_p^s} e^{j2π n f_p^s}`.
pub fn target_response(targets: &TargetSet, config: &WaveformConfig) -> CMatrix {
    let mut g = DMatrix::zeros(config.subcarriers, config.symbols);
    for t in targets.targets() {
        for n in 0..config.symbols {
            let doppler = Complex64::from_polar(1.0, 2.0 * PI * n as f64 * t.norm_doppler);
            for m in 0..config.subcarriers {
                g[(m, n)] += t.reflectivity
                    * doppler
                    * Complex64::from_polar(1.0, -(m as f64) * t.norm_delay);
            }
        }
    }
    g
}

/// Echo `R_s = G ⊙ X + ξ_s` with `ξ_s ~ CN(0, σ_s²)` per entry.
///
/// `X` is the frame as radiated, i.e. already scaled by
/// [`transmit_amplitude`] when physical powers matter.
pub fn generate_echo<R: RngCore + ?Sized>(
    transmitted: &Frame,
    targets: &TargetSet,
    noise_std: f64,
    config: &WaveformConfig,
    rng: &mut R,
) -> Result<Frame> {
    if transmitted.samples.shape() != (config.subcarriers, config.symbols) {
        bail!(Input, "frame shape {:?} does not match the configuration", transmitted.samples.shape());
    }
    let g = target_response(targets, config);
    let var = noise_std * noise_std;
    let mut echo = g.component_mul(&transmitted.samples);
    if var > 0.0 {
        for z in echo.iter_mut() {
            *z += complex_normal(rng, var);
        }
    }
    Ok(Frame::new(echo, FrameRole::Echo))
}

/// Received frame `y(n) = sqrt(P_t)·H·x_pre(n) + ξ_c(n)`, where `x_pre` is the
/// compensator output `U·x`.
pub fn apply_comm_channel<R: RngCore + ?Sized>(
    precompensated: &CMatrix,
    channel: &CMatrix,
    transmit_power: f64,
    noise_std: f64,
    rng: &mut R,
) -> Result<Frame> {
    if channel.ncols() != precompensated.nrows() {
        bail!(
            Input,
            "channel is {}x{} but the frame has {} rows",
            channel.nrows(),
            channel.ncols(),
            precompensated.nrows()
        );
    }
    let mut y = channel * precompensated * Complex64::new(transmit_power.sqrt(), 0.0);
    let var = noise_std * noise_std;
    if var > 0.0 {
        for z in y.iter_mut() {
            *z += complex_normal(rng, var);
        }
    }
    Ok(Frame::new(y, FrameRole::Received))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius, max_abs, max_abs_diff};
    use crate::rng::trial_rng;
    use crate::testutil::config;

    /// Brute-force time-domain propagation of each unit frequency vector:
    /// IDFT, per-sample Doppler rotation at each tap, circular convolution,
    /// DFT.
    fn time_domain_channel(paths: &PathSet, cfg: &WaveformConfig) -> CMatrix {
        let m = cfg.subcarriers;
        let mut h = DMatrix::zeros(m, m);
        let taps_at: Vec<Vec<Complex64>> = (0..m).map(|s| cir_taps(paths, cfg, s).unwrap()).collect();
        for j in 0..m {
            let s: Vec<Complex64> = (0..m)
                .map(|t| Complex64::from_polar(1.0 / m as f64, 2.0 * PI * (j * t) as f64 / m as f64))
                .collect();
            let r: Vec<Complex64> = (0..m)
                .map(|t| {
                    taps_at[t]
                        .iter()
                        .enumerate()
                        .map(|(d, &hd)| hd * s[(t + m - d % m) % m])
                        .sum()
                })
                .collect();
            for i in 0..m {
                h[(i, j)] = (0..m)
                    .map(|t| r[t] * Complex64::from_polar(1.0, -2.0 * PI * (i * t) as f64 / m as f64))
                    .sum();
            }
        }
        h
    }

    #[test]
    fn closed_form_matches_time_domain_oracle() {
        let mut cfg = config(32);
        let mut rng = trial_rng(9, "eq5", 0);
        for trial in 0..20 {
            cfg.carrier = 2.5e9;
            let model = if trial % 2 == 0 { ChannelModel::Rayleigh } else { ChannelModel::Rician { k_factor: 2.0 } };
            let paths = sample_paths(model, 1 + trial % 4, 8, 400.0, &cfg, &mut rng).unwrap();
            let fast = freq_channel_matrix(&paths, &cfg);
            let slow = time_domain_channel(&paths, &cfg);
            assert!(max_abs_diff(&fast, &slow) <= 1e-9 * max_abs(&slow));
        }
    }

    #[test]
    fn zero_doppler_is_diagonal() {
        let cfg = config(16);
        let mut rng = trial_rng(1, "diag", 0);
        let paths = sample_paths(ChannelModel::Rayleigh, 3, 6, 0.0, &cfg, &mut rng).unwrap();
        assert!(paths.paths.iter().all(|p| p.doppler == 0.0));
        let h = freq_channel_matrix(&paths, &cfg);
        for i in 0..16 {
            for j in 0..16 {
                if i != j {
                    assert_eq!(h[(i, j)], Complex64::new(0.0, 0.0));
                }
            }
            let expected: Complex64 = paths
                .paths
                .iter()
                .map(|p| p.gain * Complex64::from_polar(1.0, -2.0 * PI * p.delay * i as f64 / cfg.symbol_duration))
                .sum();
            assert!((h[(i, i)] - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn unit_path_gives_identity() {
        let cfg = config(8);
        let paths = PathSet {
            paths: vec![Path { gain: Complex64::new(1.0, 0.0), delay: 0.0, doppler: 0.0 }],
            model: ChannelModel::LineOfSight,
            taps: 1,
        };
        assert_eq!(freq_channel_matrix(&paths, &cfg), CMatrix::identity(8, 8));
    }

    #[test]
    fn kernel_limits() {
        assert_eq!(ici_kernel(0.0, 0, 16), Complex64::new(16.0, 0.0));
        assert_eq!(ici_kernel(0.0, 3, 16), Complex64::new(0.0, 0.0));
        // continuity at the removable singularity
        let near = ici_kernel(1e-9, 0, 16);
        assert!((near - Complex64::new(16.0, 0.0)).norm() < 1e-6);
        // wrap-around: offset M behaves like offset 0
        assert_eq!(ici_kernel(0.0, 16, 16), Complex64::new(16.0, 0.0));
    }

    #[test]
    fn los_draw_has_one_path_and_static_draws_have_no_doppler() {
        let cfg = config(16);
        let mut rng = trial_rng(2, "los", 0);
        let los = sample_paths(ChannelModel::LineOfSight, 5, 4, 10.0, &cfg, &mut rng).unwrap();
        assert_eq!(los.len(), 1);
        let stat = sample_paths(ChannelModel::Rician { k_factor: 2.0 }, 4, 8, 0.0, &cfg, &mut rng).unwrap();
        assert!(stat.paths.iter().all(|p| p.doppler == 0.0));
        let mut taps: Vec<usize> = stat.paths.iter().map(|p| p.tap(&cfg)).collect();
        taps.sort();
        taps.dedup();
        assert_eq!(taps.len(), 4);
        assert!(taps.iter().all(|&t| t < 8));
    }

    #[test]
    fn rician_power_ratio() {
        let cfg = config(16);
        let mut rng = trial_rng(4, "rice", 0);
        let (mut dominant, mut scattered, mut count) = (0.0, 0.0, 0usize);
        for _ in 0..10_000 {
            let ps = sample_paths(ChannelModel::Rician { k_factor: 2.0 }, 3, 8, 0.0, &cfg, &mut rng).unwrap();
            dominant += ps.paths[0].gain.norm_sqr();
            for p in &ps.paths[1..] {
                scattered += p.gain.norm_sqr();
                count += 1;
            }
        }
        let ratio = (dominant / 10_000.0) / (scattered / count as f64);
        assert!((ratio - 2.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn taps_follow_doppler() {
        let cfg = config(16);
        let still = PathSet {
            paths: vec![Path { gain: Complex64::new(0.5, 0.5), delay: 0.0, doppler: 0.0 }],
            model: ChannelModel::LineOfSight,
            taps: 3,
        };
        assert_eq!(cir_taps(&still, &cfg, 0).unwrap(), cir_taps(&still, &cfg, 7).unwrap());
        let moving = PathSet {
            paths: vec![Path { gain: Complex64::new(1.0, 0.0), delay: 0.0, doppler: 500.0 }],
            ..still
        };
        let t = cir_taps(&moving, &cfg, 5).unwrap();
        let expected = Complex64::from_polar(1.0, 2.0 * PI * 500.0 * 5.0 * cfg.symbol_duration / 16.0);
        assert!((t[0] - expected).norm() < 1e-14);
        assert_eq!(t[1], Complex64::new(0.0, 0.0));
        assert!(cir_taps(&moving, &cfg, 16).is_err());
    }

    #[test]
    fn target_response_identities() {
        let cfg = config(16);
        let still = TargetSet::from_pairs(&[(0.0, 0.0)], Complex64::new(1.0, 0.0), &cfg).unwrap();
        assert!(target_response(&still, &cfg).iter().all(|&z| z == Complex64::new(1.0, 0.0)));

        let gamma = Complex64::new(0.3, -0.4);
        let one = TargetSet::from_pairs(&[(120.0, 7.0)], gamma, &cfg).unwrap();
        assert!(target_response(&one, &cfg).iter().all(|z| (z.norm() - 0.5).abs() < 1e-14));

        let pair = TargetSet::from_pairs(&[(50.0, 20.0), (50.0, -20.0)], gamma, &cfg).unwrap();
        let g = target_response(&pair, &cfg);
        let t = pair.targets()[0];
        for n in 0..cfg.symbols {
            for m in 0..16 {
                let expected = gamma
                    * 2.0
                    * Complex64::from_polar(1.0, -(m as f64) * t.norm_delay)
                    * libm::cos(2.0 * PI * n as f64 * t.norm_doppler);
                assert!((g[(m, n)] - expected).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn noiseless_echo_is_hadamard_product() {
        let cfg = config(16);
        let mut rng = trial_rng(6, "echo", 0);
        let x = DMatrix::from_fn(16, cfg.symbols, |m, n| Complex64::new(1.0 + m as f64, n as f64 - 1.5));
        let frame = Frame::new(x.clone(), FrameRole::Superposed);
        let still = TargetSet::from_pairs(&[(0.0, 0.0)], Complex64::new(1.0, 0.0), &cfg).unwrap();
        assert_eq!(generate_echo(&frame, &still, 0.0, &cfg, &mut rng).unwrap().samples, x);

        let targets = TargetSet::from_pairs(&[(40.0, 3.0), (90.0, -8.0)], Complex64::new(0.7, 0.2), &cfg).unwrap();
        let echo = generate_echo(&frame, &targets, 0.0, &cfg, &mut rng).unwrap();
        let g = target_response(&targets, &cfg);
        assert!(max_abs_diff(&echo.samples.component_div(&x), &g) < 1e-12);
    }

    #[test]
    fn echo_noise_variance() {
        let cfg = config(16);
        let mut rng = trial_rng(8, "echo-noise", 0);
        let frame = Frame::new(DMatrix::from_element(16, cfg.symbols, Complex64::new(1.0, 0.0)), FrameRole::Superposed);
        let targets = TargetSet::from_pairs(&[(10.0, 1.0)], Complex64::new(1.0, 0.0), &cfg).unwrap();
        let g = target_response(&targets, &cfg);
        let sigma = 0.7;
        let mut acc = 0.0;
        for _ in 0..1000 {
            let echo = generate_echo(&frame, &targets, sigma, &cfg, &mut rng).unwrap();
            acc += frobenius(&(echo.samples - &g)).powi(2) / (16 * cfg.symbols) as f64;
        }
        let est = acc / 1000.0;
        assert!((est / (sigma * sigma) - 1.0).abs() < 0.03, "{est}");
    }

    #[test]
    fn comm_channel_identity_and_noise() {
        let mut rng = trial_rng(10, "comm", 0);
        let m = 8;
        let x = DMatrix::from_fn(m, 3, |i, n| Complex64::new(i as f64 - n as f64, 1.0));
        let u = CMatrix::identity(m, m) / Complex64::new((m as f64).sqrt(), 0.0);
        let y = apply_comm_channel(&(&u * &x), &CMatrix::identity(m, m), 4.0, 0.0, &mut rng).unwrap();
        assert!(max_abs_diff(&y.samples, &(x.clone() * Complex64::new(2.0 / (m as f64).sqrt(), 0.0))) < 1e-14);
        assert!(apply_comm_channel(&x, &CMatrix::identity(m + 1, m + 1), 1.0, 0.0, &mut rng).is_err());

        let zeros = DMatrix::zeros(m, 50);
        let mut acc = 0.0;
        for _ in 0..1000 {
            let y = apply_comm_channel(&zeros, &CMatrix::identity(m, m), 1.0, 0.5, &mut rng).unwrap();
            acc += y.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / (m * 50) as f64;
        }
        assert!((acc / 1000.0 / 0.25 - 1.0).abs() < 0.03);
    }
}
