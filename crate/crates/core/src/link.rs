//! Single-frame link simulations composed from the other modules.
//!
//! Every function draws from the supplied RNG in an order that does not
//! depend on the noise level, so sweeping SNR with a fixed per-trial stream
//! reuses the same channels, data and (scaled) noise.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand_core::RngCore;

use crate::channel::{apply_comm_channel, generate_echo, transmit_amplitude, PathSet, Target, TargetSet};
use crate::compensation::{
    build_compensator, build_ici_compensator, reconstruct_channel, Compensator, SensedChannelEstimate,
};
use crate::error::{bail, Result};
use crate::linalg::CMatrix;
use crate::receiver::{count_bit_errors, decode_frame, ofdm_detect, ofdm_modulate, ReceiverChannel, RhoMode};
use crate::rng::random_bits;
use crate::sensing::{
    associate, find_peaks, fuse, matched_filter_spectrum, music_2d, ErrorVariances, EstimateSet, MusicWindow,
    RangeVelocityGrid,
};
use crate::waveform::{bits_per_symbol, map_bits_to_comm_frame, superpose, Frame, FrameRole, IndexCodebook, WaveformConfig};

/// Noise variance for an SNR per bit, `SNR = P_t / (b σ²)` with `b` bits per
/// OFDM symbol.
pub fn noise_var_for_snr(transmit_power: f64, bits_per_ofdm_symbol: usize, snr_db: f64) -> f64 {
    transmit_power / (bits_per_ofdm_symbol as f64 * libm::pow(10.0, snr_db / 10.0))
}

/// Errors and bits of one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BitCount {
    pub errors: usize,
    pub bits: usize,
}

impl core::ops::AddAssign for BitCount {
    fn add_assign(&mut self, rhs: Self) {
        self.errors += rhs.errors;
        self.bits += rhs.bits;
    }
}

impl BitCount {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.errors as f64 / self.bits as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompensatorKind {
    /// No precoding, `U = I/√M`.
    Identity,
    /// `U ∝ H̃⁻¹`.
    FullInverse,
    /// `U ∝ H̃⁻¹ diag(H̃)`.
    IciOnly,
}

/// `U = I/√M` with `κ = √M`.
pub fn identity_compensator(subcarriers: usize) -> Compensator {
    let norm = (subcarriers as f64).sqrt();
    Compensator {
        matrix: CMatrix::identity(subcarriers, subcarriers) / Complex64::new(norm, 0.0),
        target: nalgebra::DVector::from_element(subcarriers, Complex64::new(1.0, 0.0)),
        norm,
        condition: 1.0,
    }
}

pub fn build(kind: CompensatorKind, estimated: &CMatrix) -> Result<Compensator> {
    match kind {
        CompensatorKind::Identity => Ok(identity_compensator(estimated.nrows())),
        CompensatorKind::FullInverse => build_compensator(estimated),
        CompensatorKind::IciOnly => build_ici_compensator(estimated),
    }
}

/// Receiver view of a compensated link: `κ` and the diagonal of `κ·H·U`.
pub fn receiver_channel(compensator: &Compensator, channel: &CMatrix) -> ReceiverChannel {
    let eff = compensator.effective_channel(channel);
    ReceiverChannel { norm: compensator.norm, gains: eff.diagonal().iter().copied().collect() }
}

/// Random bits mapped to a superposed S-IM-OFDM frame at `config.power_split`.
pub fn random_superposed_frame<R: RngCore + ?Sized>(
    config: &WaveformConfig,
    codebook: &IndexCodebook,
    sense: &Frame,
    rng: &mut R,
) -> Result<(Vec<bool>, Frame)> {
    let bits = random_bits(rng, bits_per_symbol(config)? * config.symbols);
    let comm = map_bits_to_comm_frame(&bits, config, codebook)?;
    Ok((bits, superpose(&comm, sense, config.power_split)?))
}

/// One BPSK-OFDM frame through `channel`, zero-forced by its diagonal.
pub fn ofdm_frame<R: RngCore + ?Sized>(
    config: &WaveformConfig,
    channel: &CMatrix,
    noise_std: f64,
    rng: &mut R,
) -> Result<BitCount> {
    let bits = random_bits(rng, config.subcarriers * config.symbols);
    let x = ofdm_modulate(&bits, config)?;
    let pre = &x.samples / Complex64::new((config.subcarriers as f64).sqrt(), 0.0);
    let y = apply_comm_channel(&pre, channel, config.transmit_power, noise_std, rng)?;
    let got = ofdm_detect(&y, channel)?;
    Ok(BitCount { errors: count_bit_errors(&bits, &got), bits: bits.len() })
}

/// One (S-)IM-OFDM frame: superpose, precode, propagate, decode.
#[allow(clippy::too_many_arguments)]
pub fn im_frame<R: RngCore + ?Sized>(
    config: &WaveformConfig,
    codebook: &IndexCodebook,
    sense: &Frame,
    channel: &CMatrix,
    compensator: &Compensator,
    noise_std: f64,
    rho_mode: RhoMode,
    rng: &mut R,
) -> Result<(BitCount, f64)> {
    let (bits, x) = random_superposed_frame(config, codebook, sense, rng)?;
    let pre = &compensator.matrix * &x.samples;
    let y = apply_comm_channel(&pre, channel, config.transmit_power, noise_std, rng)?;
    let rx = receiver_channel(compensator, channel);
    let decoded = decode_frame(&y, sense, &rx, config.transmit_power, config, codebook, rho_mode)?;
    Ok((BitCount { errors: count_bit_errors(&bits, &decoded.bits), bits: bits.len() }, decoded.rho))
}

/// Targets that stand for the communication paths in a mono-static
/// geometry: reflectivity `α_p`, range `c τ_p`, velocity `c f_p / f_c`.
pub fn paths_as_targets(paths: &PathSet, config: &WaveformConfig) -> Result<TargetSet> {
    TargetSet::new(
        paths.paths.iter().map(|p| Target::new(p.gain, p.range(), p.velocity(config), config)).collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SensingMethod {
    MatchedFilter,
    Music,
    /// Both, fused with the given error variances (or equal weights).
    Fused(Option<(ErrorVariances, ErrorVariances)>),
}

/// Range/velocity estimates from one echo of `radiated`.
pub fn estimate_targets(
    echo: &Frame,
    radiated: &Frame,
    sense: &Frame,
    count: usize,
    method: SensingMethod,
    grid: &RangeVelocityGrid,
    config: &WaveformConfig,
) -> Result<EstimateSet> {
    let mf = || -> Result<EstimateSet> {
        let spec = matched_filter_spectrum(echo, sense, grid, config)?;
        find_peaks(&spec, count)
    };
    let mu = || -> Result<EstimateSet> {
        Ok(music_2d(echo, radiated, grid, count, MusicWindow::default_for(config), config)?.estimates)
    };
    match method {
        SensingMethod::MatchedFilter => mf(),
        SensingMethod::Music => mu(),
        SensingMethod::Fused(priors) => Ok(fuse(&mf()?, &mu()?, priors, grid)),
    }
}

/// Sense the paths from the echo of one transmitted frame and turn the
/// estimates into a channel estimate. Gains are taken from the associated
/// true paths; undetected paths are left out.
#[allow(clippy::too_many_arguments)]
pub fn sense_channel<R: RngCore + ?Sized>(
    paths: &PathSet,
    frame: &Frame,
    sense: &Frame,
    noise_std: f64,
    method: SensingMethod,
    grid: &RangeVelocityGrid,
    config: &WaveformConfig,
    rng: &mut R,
) -> Result<SensedChannelEstimate> {
    let targets = paths_as_targets(paths, config)?;
    let amp = Complex64::new(transmit_amplitude(config), 0.0);
    let radiated = Frame::new(&frame.samples * amp, FrameRole::Superposed);
    let scaled_sense = Frame::new(&sense.samples * amp, FrameRole::Sense);
    let echo = generate_echo(&radiated, &targets, noise_std, config, rng)?;
    let est = estimate_targets(&echo, &radiated, &scaled_sense, paths.len(), method, grid, config)?;
    let links = associate(&est.estimates, &targets, grid);
    let (mut gains, mut picked) = (Vec::new(), Vec::new());
    for (p, e) in links.iter().enumerate() {
        if let Some(e) = e {
            gains.push(paths.paths[p].gain);
            picked.push(est.estimates[*e]);
        }
    }
    if picked.is_empty() {
        bail!(Estimation, "no path was detected");
    }
    SensedChannelEstimate::from_estimates(&gains, &picked, config)
}

/// Compensator from a channel estimate, falling back to no precoding when the
/// estimate is unusable.
pub fn compensator_from_estimate(
    kind: CompensatorKind,
    estimate: &SensedChannelEstimate,
    config: &WaveformConfig,
) -> Result<Compensator> {
    let h = reconstruct_channel(estimate, config)?;
    build(kind, &h)
}

/// A noiseless static link with perfect compensation returns every bit.
pub fn noiseless_static_check<R: RngCore + ?Sized>(
    config: &WaveformConfig,
    codebook: &IndexCodebook,
    sense: &Frame,
    paths: &PathSet,
    kind: CompensatorKind,
    rng: &mut R,
) -> Result<BitCount> {
    let h = crate::channel::freq_channel_matrix(&paths.without_doppler(), config);
    let comp = build(kind, &h)?;
    let (count, _) = im_frame(config, codebook, sense, &h, &comp, 0.0, RhoMode::Known(config.power_split), rng)?;
    Ok(count)
}
