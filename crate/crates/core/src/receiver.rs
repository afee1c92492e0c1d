//! Bit recovery: power-split estimation, sensing subtraction and per-group
//! maximum-likelihood detection.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;

use crate::error::{bail, Result};
use crate::linalg::{frobenius, CMatrix};
use crate::waveform::{comm_frame_to_bits, Constellation, Frame, FrameRole, IndexCodebook, WaveformConfig};

/// Upper clamp of the power-split estimate.
pub const RHO_CEILING: f64 = 1.0 - 1e-3;

/// What the receiver knows about the link: the compensator normalisation `κ`
/// and the per-subcarrier gains of the equivalent channel, so that
/// `z = (κ/√P_t)·y ≈ diag(gains)·x + noise`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverChannel {
    pub norm: f64,
    pub gains: Vec<Complex64>,
}

impl ReceiverChannel {
    /// Unit gains, as after a full-inverse compensator with `κ = ‖H̃⁻¹‖_F`.
    pub fn flat(norm: f64, subcarriers: usize) -> Self {
        Self { norm, gains: vec![Complex64::new(1.0, 0.0); subcarriers] }
    }

    fn check(&self, frame: &CMatrix) -> Result<()> {
        if self.gains.len() != frame.nrows() {
            bail!(Input, "{} gains for {} subcarriers", self.gains.len(), frame.nrows());
        }
        if !(self.norm > 0.0 && self.norm.is_finite()) {
            bail!(Input, "compensator norm must be positive");
        }
        Ok(())
    }

    fn normalise(&self, received: &CMatrix, transmit_power: f64) -> CMatrix {
        received * Complex64::new(self.norm / transmit_power.sqrt(), 0.0)
    }

    fn apply_gains(&self, frame: &CMatrix) -> CMatrix {
        DMatrix::from_fn(frame.nrows(), frame.ncols(), |m, n| self.gains[m] * frame[(m, n)])
    }
}

/// How the decoder obtains `ρ̂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoMode {
    /// Given directly, e.g. `0` for plain IM-OFDM.
    Known(f64),
    /// Sample correlation with the sensing sequence.
    Estimated,
    /// As `Estimated`, removing the finite-frame bias of the communication
    /// cross term and of noise with per-entry variance `noise_var` (before
    /// normalisation).
    Corrected { noise_var: f64 },
}

fn average_outer(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b.adjoint() / Complex64::new(a.ncols() as f64, 0.0)
}

/// Power split as printed:
/// `ρ̂ = ‖H⁻¹‖_F² ‖(1/N_s) Σ_n y(n) x_s(n)ᴴ‖_F² / (M P_t)`, clamped to
/// `[0, 1 − 10⁻³]`.
///
/// When the sensing column repeats every symbol `‖x_s x_sᴴ‖_F = M`, so this
/// returns about `ρM`; [`estimate_rho`] normalises by the sensing term itself.
pub fn estimate_rho_literal(received: &Frame, sense: &Frame, inverse_norm: f64, transmit_power: f64) -> f64 {
    let a = average_outer(&received.samples, &sense.samples);
    let m = received.samples.nrows() as f64;
    let raw = inverse_norm * inverse_norm * frobenius(&a).powi(2) / (m * transmit_power);
    raw.clamp(0.0, RHO_CEILING)
}

/// `ρ̂ = ‖A‖_F² / ‖B‖_F²` with `A = (1/N_s) Σ z(n) x_s(n)ᴴ` and
/// `B = (1/N_s) Σ (g ⊙ x_s(n)) x_s(n)ᴴ`, so a noiseless, comm-free frame
/// returns `ρ` exactly. Clamped to `[0, 1 − 10⁻³]`.
///
/// With `noise_var` the expected contributions of the communication cross
/// term, `‖g‖² Σ_n‖x_s(n)‖² / N_s²`, and of noise, `M η Σ_n‖x_s(n)‖² / N_s²`
/// with `η = κ² σ² / P_t`, are removed from both sides.
pub fn estimate_rho(
    received: &Frame,
    sense: &Frame,
    channel: &ReceiverChannel,
    transmit_power: f64,
    noise_var: Option<f64>,
) -> Result<f64> {
    if received.samples.shape() != sense.samples.shape() {
        bail!(Input, "received and sensing frames differ in shape");
    }
    channel.check(&received.samples)?;
    let z = channel.normalise(&received.samples, transmit_power);
    let a = frobenius(&average_outer(&z, &sense.samples)).powi(2);
    let b = frobenius(&average_outer(&channel.apply_gains(&sense.samples), &sense.samples)).powi(2);
    if b == 0.0 {
        bail!(Input, "sensing frame is all zero");
    }
    let rho = match noise_var {
        None => a / b,
        Some(var) => {
            let n = sense.samples.ncols() as f64;
            let m = sense.samples.nrows() as f64;
            let sense_energy: f64 = sense.samples.iter().map(|z| z.norm_sqr()).sum();
            let gain_energy: f64 = channel.gains.iter().map(|g| g.norm_sqr()).sum();
            let cross = gain_energy * sense_energy / (n * n);
            let eta = channel.norm * channel.norm * var / transmit_power;
            let noise = m * eta * sense_energy / (n * n);
            let denom = b - cross;
            if denom <= 0.0 {
                bail!(Numerical, "too few symbols to debias the power-split estimate");
            }
            (a - cross - noise) / denom
        }
    };
    Ok(rho.clamp(0.0, RHO_CEILING))
}

/// `x̃_c = ((κ/√P_t)·y − √ρ̂·g⊙x_s) / √(1 − ρ̂)`.
pub fn subtract_sense(
    received: &Frame,
    rho: f64,
    sense: &Frame,
    channel: &ReceiverChannel,
    transmit_power: f64,
) -> Result<Frame> {
    if !(0.0..1.0).contains(&rho) {
        bail!(Input, "power split {rho} outside [0, 1)");
    }
    if received.samples.shape() != sense.samples.shape() {
        bail!(Input, "received and sensing frames differ in shape");
    }
    channel.check(&received.samples)?;
    let z = channel.normalise(&received.samples, transmit_power);
    let s = channel.apply_gains(&sense.samples) * Complex64::new(rho.sqrt(), 0.0);
    Ok(Frame::new((z - s) / Complex64::new((1.0 - rho).sqrt(), 0.0), FrameRole::Comm))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupDecision {
    /// Index into the codebook.
    pub entry: usize,
    /// Constellation labels on the active subcarriers, ascending.
    pub symbols: Vec<usize>,
    pub metric: f64,
}

/// Exhaustive ML search over codebook entries and symbol tuples,
/// `min ‖g ⊙ x(I, s) − x̃‖²`, with `x(I, s)` placing `amplitude·s` on the
/// active set `I`.
///
/// The metric separates over subcarriers, so each entry is scored with the
/// per-subcarrier best symbol; this visits the same minimiser as listing
/// all `|S|^k` tuples. Ties keep the lowest codebook index, then the
/// lexicographically smallest symbol tuple.
pub fn ml_detect_group(
    observed: &[Complex64],
    gains: &[Complex64],
    codebook: &IndexCodebook,
    constellation: &Constellation,
    amplitude: f64,
) -> Result<GroupDecision> {
    let ng = codebook.group_size();
    if observed.len() != ng || gains.len() != ng {
        bail!(Input, "group slice of length {} for group size {ng}", observed.len());
    }
    let idle: Vec<f64> = observed.iter().map(|z| z.norm_sqr()).collect();
    let best: Vec<(usize, f64)> = observed
        .iter()
        .zip(gains)
        .map(|(&z, &g)| {
            let mut out = (0, f64::INFINITY);
            for (label, &p) in constellation.points().iter().enumerate() {
                let d = (z - g * p * amplitude).norm_sqr();
                if d < out.1 {
                    out = (label, d);
                }
            }
            out
        })
        .collect();
    let mut decision = GroupDecision { entry: 0, symbols: Vec::new(), metric: f64::INFINITY };
    for (e, entry) in codebook.entries().iter().enumerate() {
        let mut metric = 0.0;
        let mut cursor = 0;
        for i in 0..ng {
            if cursor < entry.len() && entry[cursor] == i {
                metric += best[i].1;
                cursor += 1;
            } else {
                metric += idle[i];
            }
        }
        if metric < decision.metric {
            decision = GroupDecision { entry: e, symbols: entry.iter().map(|&i| best[i].0).collect(), metric };
        }
    }
    Ok(decision)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodedFrame {
    /// Decisions indexed by `n · groups + g`.
    pub groups: Vec<GroupDecision>,
    pub bits: Vec<bool>,
    pub rho: f64,
}

/// Estimate `ρ`, subtract the sensing component, detect every group and
/// demap to bits.
pub fn decode_frame(
    received: &Frame,
    sense: &Frame,
    channel: &ReceiverChannel,
    transmit_power: f64,
    config: &WaveformConfig,
    codebook: &IndexCodebook,
    rho_mode: RhoMode,
) -> Result<DecodedFrame> {
    config.validate()?;
    if received.samples.shape() != (config.subcarriers, config.symbols) {
        bail!(Input, "received frame shape does not match the configuration");
    }
    let rho = match rho_mode {
        RhoMode::Known(r) => r,
        RhoMode::Estimated => estimate_rho(received, sense, channel, transmit_power, None)?,
        RhoMode::Corrected { noise_var } => estimate_rho(received, sense, channel, transmit_power, Some(noise_var))?,
    };
    let comm = subtract_sense(received, rho, sense, channel, transmit_power)?;
    let amp = config.active_amplitude();
    let ng = config.group_size;
    let mut groups = Vec::with_capacity(config.groups() * config.symbols);
    let mut detected = DMatrix::zeros(config.subcarriers, config.symbols);
    for n in 0..config.symbols {
        for g in 0..config.groups() {
            let base = g * ng;
            let slice: Vec<Complex64> = (0..ng).map(|i| comm.samples[(base + i, n)]).collect();
            let d = ml_detect_group(&slice, &channel.gains[base..base + ng], codebook, &config.constellation, amp)?;
            for (&pos, &label) in codebook.entries()[d.entry].iter().zip(&d.symbols) {
                detected[(base + pos, n)] = config.constellation.points()[label] * amp;
            }
            groups.push(d);
        }
    }
    let bits = comm_frame_to_bits(&Frame::new(detected, FrameRole::Comm), config, codebook)?;
    Ok(DecodedFrame { groups, bits, rho })
}

/// BPSK frame for the OFDM baseline: one bit per subcarrier and symbol,
/// column-major.
pub fn ofdm_modulate(bits: &[bool], config: &WaveformConfig) -> Result<Frame> {
    if bits.len() != config.subcarriers * config.symbols {
        bail!(Input, "expected {} bits, got {}", config.subcarriers * config.symbols, bits.len());
    }
    let points = Constellation::bpsk();
    let samples = DMatrix::from_fn(config.subcarriers, config.symbols, |m, n| {
        points.points()[usize::from(bits[n * config.subcarriers + m])]
    });
    Ok(Frame::new(samples, FrameRole::Comm))
}

/// Single-tap zero-forcing by `diag(H)` and hard BPSK decisions. ICI is left
/// untreated.
pub fn ofdm_detect(received: &Frame, channel: &CMatrix) -> Result<Vec<bool>> {
    let (m_count, symbols) = received.samples.shape();
    if channel.shape() != (m_count, m_count) {
        bail!(Input, "channel does not match the received frame");
    }
    let points = Constellation::bpsk();
    let mut bits = Vec::with_capacity(m_count * symbols);
    for n in 0..symbols {
        for m in 0..m_count {
            let h = channel[(m, m)];
            let eq = if h.norm_sqr() > 0.0 { received.samples[(m, n)] / h } else { received.samples[(m, n)] };
            bits.push(points.nearest(eq) == 1);
        }
    }
    Ok(bits)
}

pub fn count_bit_errors(sent: &[bool], got: &[bool]) -> usize {
    sent.iter().zip(got).filter(|(a, b)| a != b).count() + sent.len().abs_diff(got.len())
}
