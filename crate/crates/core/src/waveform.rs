//! Frame construction: index-modulated communication frames, m-sequence
//! sensing frames and their power-split superposition.
//!
//! All frames are frequency-domain `M × N_s` matrices (subcarrier × symbol).
//! Both components are normalised to carry squared column norm `M`, so the
//! power split `ρ` is a true power fraction.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;

use crate::error::{bail, Result};
use crate::fft::ceil_log2;

/// Unit-magnitude PSK constellation with Gray labelling.
///
/// `points()[label]` is the symbol transmitted for the bit label `label`
/// (most significant bit first on the wire).
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
    bits: u32,
}

impl Constellation {
    /// `order`-PSK. BPSK sits on the real axis, higher orders are rotated by
    /// `π/order` so QPSK lands on the diagonals.
    pub fn psk(order: usize) -> Result<Self> {
        if order < 2 || !order.is_power_of_two() {
            bail!(Config, "constellation size {order} is not a power of two ≥ 2");
        }
        let offset = if order == 2 { 0.0 } else { PI / order as f64 };
        let points = (0..order)
            .map(|label| {
                let gray = label ^ (label >> 1);
                Complex64::from_polar(1.0, offset + 2.0 * PI * gray as f64 / order as f64)
            })
            .collect();
        Ok(Self { points, bits: order.trailing_zeros() })
    }

    pub fn bpsk() -> Self {
        Self::psk(2).expect("BPSK is valid")
    }

    pub fn qpsk() -> Self {
        Self::psk(4).expect("QPSK is valid")
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits
    }

    /// Label of the point nearest to `z`, first label on ties.
    pub fn nearest(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (label, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = label;
            }
        }
        best
    }
}

/// How the sensing column varies across the symbols of a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SensePattern {
    /// The same column in every symbol.
    #[default]
    Repeated,
    /// Symbol `n` carries the base sequence cyclically shifted by `n` chips.
    CyclicShift,
}

/// System constants of one S-IM-OFDM link.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformConfig {
    /// Subcarrier count `M`.
    pub subcarriers: usize,
    /// Subcarriers per group `N_g`; the group count is `M / N_g`.
    pub group_size: usize,
    /// Active subcarriers per group `k`.
    pub active: usize,
    pub constellation: Constellation,
    /// Subcarrier spacing `Δf` (Hz).
    pub subcarrier_spacing: f64,
    /// Useful symbol duration `T_s` (s).
    pub symbol_duration: f64,
    /// Cyclic-prefix duration `T_g` (s). Carried for completeness; the
    /// frequency-domain model never inserts the prefix.
    pub cyclic_prefix: f64,
    /// Symbols per frame `N_s`.
    pub symbols: usize,
    /// Carrier frequency `f_c` (Hz).
    pub carrier: f64,
    /// Transmit power `P_t` (W).
    pub transmit_power: f64,
    /// Power splitting ratio `ρ` given to the sensing sequence.
    pub power_split: f64,
    pub sense_pattern: SensePattern,
}

impl WaveformConfig {
    pub fn groups(&self) -> usize {
        self.subcarriers / self.group_size
    }

    pub fn validate(&self) -> Result<()> {
        if self.subcarriers == 0 || self.group_size == 0 {
            bail!(Config, "subcarriers and group_size must be positive");
        }
        if self.subcarriers % self.group_size != 0 {
            bail!(
                Config,
                "subcarriers ({}) is not a multiple of group_size ({})",
                self.subcarriers,
                self.group_size
            );
        }
        if self.active == 0 || self.active > self.group_size {
            bail!(Config, "active ({}) must lie in 1..={}", self.active, self.group_size);
        }
        if binomial(self.group_size, self.active) < 2 {
            bail!(Config, "C({}, {}) < 2 leaves no index bits", self.group_size, self.active);
        }
        if self.symbols == 0 {
            bail!(Config, "symbols must be positive");
        }
        if !(0.0..1.0).contains(&self.power_split) {
            bail!(Config, "power_split {} is outside [0, 1)", self.power_split);
        }
        for (name, v) in [
            ("subcarrier_spacing", self.subcarrier_spacing),
            ("symbol_duration", self.symbol_duration),
            ("carrier", self.carrier),
            ("transmit_power", self.transmit_power),
        ] {
            if !(v.is_finite() && v > 0.0) {
                bail!(Config, "{name} must be positive and finite (got {v})");
            }
        }
        if !(self.cyclic_prefix.is_finite() && self.cyclic_prefix >= 0.0) {
            bail!(Config, "cyclic_prefix must be non-negative");
        }
        Ok(())
    }

    /// Amplitude of an active comm subcarrier, `sqrt(N_g / k)`.
    pub fn active_amplitude(&self) -> f64 {
        (self.group_size as f64 / self.active as f64).sqrt()
    }
}

/// `C(n, k)` saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Lookup table from index bits to the set of active subcarriers of a group.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexCodebook {
    entries: Vec<Vec<usize>>,
    bits: u32,
    group_size: usize,
    lookup: BTreeMap<Vec<usize>, usize>,
}

impl IndexCodebook {
    /// First `2^p` k-subsets of `{0..N_g}` in lexicographic order with
    /// `p = floor(log2 C(N_g, k))`.
    pub fn new(group_size: usize, active: usize) -> Result<Self> {
        if active == 0 || active > group_size {
            bail!(Config, "active ({active}) must lie in 1..={group_size}");
        }
        let count = binomial(group_size, active);
        if count < 2 {
            bail!(Config, "C({group_size}, {active}) < 2 leaves no index bits");
        }
        let bits = 127 - count.leading_zeros();
        if bits > 20 {
            bail!(Config, "index codebook with 2^{bits} entries is too large");
        }
        let size = 1usize << bits;

        let mut entries = Vec::with_capacity(size);
        let mut combo: Vec<usize> = (0..active).collect();
        loop {
            entries.push(combo.clone());
            if entries.len() == size {
                break;
            }
            // advance to the next combination in lexicographic order
            let mut i = active;
            while i > 0 && combo[i - 1] == group_size - active + (i - 1) {
                i -= 1;
            }
            debug_assert!(i > 0, "ran out of combinations");
            combo[i - 1] += 1;
            for j in i..active {
                combo[j] = combo[j - 1] + 1;
            }
        }

        let lookup = entries.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        Ok(Self { entries, bits, group_size, lookup })
    }

    pub fn entries(&self) -> &[Vec<usize>] {
        &self.entries
    }

    /// Index bits per group `p`.
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn group_size(&self) -> usize {
        self.group_size
    }

    pub fn active(&self) -> usize {
        self.entries[0].len()
    }

    /// Position of a (sorted) active set, if it is a codeword.
    pub fn position(&self, support: &[usize]) -> Option<usize> {
        self.lookup.get(support).copied()
    }
}

/// Information bits per OFDM symbol, `G · (p + k · log2|S|)`.
pub fn bits_per_symbol(config: &WaveformConfig) -> Result<usize> {
    config.validate()?;
    let index_bits = 127 - binomial(config.group_size, config.active).leading_zeros();
    Ok(config.groups()
        * (index_bits as usize + config.active * config.constellation.bits_per_symbol() as usize))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameRole {
    Comm,
    Sense,
    Superposed,
    Echo,
    Received,
}

/// `M × N_s` frequency-domain frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub samples: DMatrix<Complex64>,
    pub role: FrameRole,
}

impl Frame {
    pub fn new(samples: DMatrix<Complex64>, role: FrameRole) -> Self {
        Self { samples, role }
    }

    pub fn subcarriers(&self) -> usize {
        self.samples.nrows()
    }

    pub fn symbols(&self) -> usize {
        self.samples.ncols()
    }

    pub fn column_energy(&self, n: usize) -> f64 {
        self.samples.column(n).iter().map(|z| z.norm_sqr()).sum()
    }
}

fn bits_to_usize(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
}

fn push_bits(out: &mut Vec<bool>, value: usize, width: u32) {
    for i in (0..width).rev() {
        out.push((value >> i) & 1 == 1);
    }
}

/// Map `bits_per_symbol · N_s` bits onto a communication frame.
///
/// Per group and symbol the first `p` bits pick the active set, the next
/// `k · log2|S|` bits pick the symbols placed on it (in ascending subcarrier
/// order). Active entries are scaled by `sqrt(N_g/k)`.
pub fn map_bits_to_comm_frame(
    bits: &[bool],
    config: &WaveformConfig,
    codebook: &IndexCodebook,
) -> Result<Frame> {
    let per_symbol = bits_per_symbol(config)?;
    let expected = per_symbol * config.symbols;
    if bits.len() != expected {
        bail!(Input, "expected {expected} bits, got {}", bits.len());
    }
    if codebook.group_size() != config.group_size || codebook.active() != config.active {
        bail!(Input, "codebook does not match the configured group layout");
    }

    let amp = config.active_amplitude();
    let sym_bits = config.constellation.bits_per_symbol() as usize;
    let p = codebook.bits() as usize;
    let mut samples = DMatrix::zeros(config.subcarriers, config.symbols);
    let mut cursor = 0;
    for n in 0..config.symbols {
        for g in 0..config.groups() {
            let entry = &codebook.entries()[bits_to_usize(&bits[cursor..cursor + p])];
            cursor += p;
            for &pos in entry {
                let label = bits_to_usize(&bits[cursor..cursor + sym_bits]);
                cursor += sym_bits;
                samples[(g * config.group_size + pos, n)] =
                    config.constellation.points()[label] * amp;
            }
        }
    }
    Ok(Frame::new(samples, FrameRole::Comm))
}

/// Exact inverse of [`map_bits_to_comm_frame`].
pub fn comm_frame_to_bits(
    frame: &Frame,
    config: &WaveformConfig,
    codebook: &IndexCodebook,
) -> Result<Vec<bool>> {
    config.validate()?;
    if frame.subcarriers() != config.subcarriers || frame.symbols() != config.symbols {
        bail!(Input, "frame shape does not match the configuration");
    }
    let amp = config.active_amplitude();
    let sym_bits = config.constellation.bits_per_symbol();
    let mut out = Vec::with_capacity(bits_per_symbol(config)? * config.symbols);
    for n in 0..config.symbols {
        for g in 0..config.groups() {
            let base = g * config.group_size;
            let support: Vec<usize> = (0..config.group_size)
                .filter(|&i| frame.samples[(base + i, n)].norm() > 1e-12)
                .collect();
            let Some(index) = codebook.position(&support) else {
                bail!(Decode, "group {g} of symbol {n} has support {support:?}, not a codeword");
            };
            push_bits(&mut out, index, codebook.bits());
            for &pos in &support {
                let label = config.constellation.nearest(frame.samples[(base + pos, n)] / amp);
                push_bits(&mut out, label, sym_bits);
            }
        }
    }
    Ok(out)
}

/// Primitive feedback polynomials for degrees 3..=16, as the exponents of the
/// non-leading terms (the constant term is implied).
const PRIMITIVE_TAPS: [&[u32]; 14] = [
    &[1],          // x^3 + x + 1
    &[3],          // x^4 + x^3 + 1
    &[3],          // x^5 + x^3 + 1
    &[5],          // x^6 + x^5 + 1
    &[6],          // x^7 + x^6 + 1
    &[6, 5, 4],    // x^8 + x^6 + x^5 + x^4 + 1
    &[5],          // x^9 + x^5 + 1
    &[7],          // x^10 + x^7 + 1
    &[9],          // x^11 + x^9 + 1
    &[11, 10, 4],  // x^12 + x^11 + x^10 + x^4 + 1
    &[12, 11, 8],  // x^13 + x^12 + x^11 + x^8 + 1
    &[13, 12, 2],  // x^14 + x^13 + x^12 + x^2 + 1
    &[14],         // x^15 + x^14 + 1
    &[15, 13, 4],  // x^16 + x^15 + x^13 + x^4 + 1
];

pub const MIN_SEQUENCE_DEGREE: u32 = 3;
pub const MAX_SEQUENCE_DEGREE: u32 = 16;

/// Maximal-length ±1 sequence of length `2^degree − 1`.
///
/// The register starts from all ones and follows
/// `a[n+d] = a[n] ⊕ (⊕_i a[n+i])` over the polynomial's middle terms; bit 0
/// maps to `+1`, bit 1 to `−1`.
pub fn generate_m_sequence(degree: u32) -> Result<Vec<f64>> {
    if !(MIN_SEQUENCE_DEGREE..=MAX_SEQUENCE_DEGREE).contains(&degree) {
        bail!(
            Config,
            "m-sequence degree {degree} outside {MIN_SEQUENCE_DEGREE}..={MAX_SEQUENCE_DEGREE}"
        );
    }
    let taps = PRIMITIVE_TAPS[(degree - MIN_SEQUENCE_DEGREE) as usize];
    let d = degree as usize;
    let len = (1usize << d) - 1;
    let mut bits = vec![1u8; d];
    bits.reserve(len);
    while bits.len() < len {
        let n = bits.len() - d;
        let mut next = bits[n];
        for &t in taps {
            next ^= bits[n + t as usize];
        }
        bits.push(next);
    }
    Ok(bits.into_iter().map(|b| if b == 0 { 1.0 } else { -1.0 }).collect())
}

/// Degree of the base sequence used for `M` subcarriers.
pub fn sense_sequence_degree(subcarriers: usize) -> u32 {
    ceil_log2(subcarriers).max(MIN_SEQUENCE_DEGREE)
}

/// Sensing frame: the base m-sequence cyclically extended (or truncated) to
/// `M` chips, one column per symbol.
pub fn build_sense_frame(config: &WaveformConfig) -> Result<Frame> {
    config.validate()?;
    let base = generate_m_sequence(sense_sequence_degree(config.subcarriers))?;
    let m = config.subcarriers;
    let samples = DMatrix::from_fn(m, config.symbols, |i, n| {
        let shift = match config.sense_pattern {
            SensePattern::Repeated => 0,
            SensePattern::CyclicShift => n,
        };
        Complex64::new(base[(i + shift) % base.len()], 0.0)
    });
    Ok(Frame::new(samples, FrameRole::Sense))
}

/// `X = sqrt(ρ)·x_s + sqrt(1−ρ)·x_c`.
pub fn superpose(comm: &Frame, sense: &Frame, rho: f64) -> Result<Frame> {
    if comm.samples.shape() != sense.samples.shape() {
        bail!(
            Input,
            "frame shapes differ: {:?} vs {:?}",
            comm.samples.shape(),
            sense.samples.shape()
        );
    }
    if !(0.0..1.0).contains(&rho) {
        bail!(Input, "power split {rho} is outside [0, 1)");
    }
    let samples = sense.samples.map(|z| z * rho.sqrt()) + comm.samples.map(|z| z * (1.0 - rho).sqrt());
    Ok(Frame::new(samples, FrameRole::Superposed))
}
