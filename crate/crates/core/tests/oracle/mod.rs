//! Brute-force references for the fast paths, shared with the harness
//! acceptance run.

#![allow(dead_code)]

use std::f64::consts::PI;

use simofdm_core::channel::{freq_channel_matrix, sample_paths, ChannelModel, PathSet};
use simofdm_core::linalg::CMatrix;
use simofdm_core::receiver::ml_detect_group;
use simofdm_core::rng::{below, complex_normal, trial_rng};
use simofdm_core::sensing::{matched_filter_spectrum, matched_filter_spectrum_direct, RangeVelocityGrid};
use simofdm_core::waveform::{
    build_sense_frame, Constellation, Frame, FrameRole, IndexCodebook, SensePattern, WaveformConfig,
};
use simofdm_core::Complex64;

pub fn config(m: usize, group: usize, active: usize, symbols: usize) -> WaveformConfig {
    WaveformConfig {
        subcarriers: m,
        group_size: group,
        active,
        constellation: Constellation::qpsk(),
        subcarrier_spacing: 15e3,
        symbol_duration: 1.0 / 15e3,
        cyclic_prefix: 4.7e-6,
        symbols,
        carrier: 2.5e9,
        transmit_power: 1.0,
        power_split: 0.0,
        sense_pattern: SensePattern::Repeated,
    }
}

/// Propagate each unit subcarrier through the multipath channel sample by
/// sample: IDFT, delayed copies rotating at their own Doppler, DFT.
pub fn time_domain_channel(paths: &PathSet, cfg: &WaveformConfig) -> CMatrix {
    let m = cfg.subcarriers;
    let dt = cfg.symbol_duration / m as f64;
    let mut h = CMatrix::zeros(m, m);
    for j in 0..m {
        let tx: Vec<Complex64> = (0..m)
            .map(|t| Complex64::from_polar(1.0 / m as f64, 2.0 * PI * (j * t) as f64 / m as f64))
            .collect();
        let mut rx = vec![Complex64::new(0.0, 0.0); m];
        for p in &paths.paths {
            let lag = (p.delay / dt).round() as usize;
            for (t, r) in rx.iter_mut().enumerate() {
                let rot = Complex64::from_polar(1.0, 2.0 * PI * p.doppler * t as f64 * dt);
                *r += p.gain * rot * tx[(t + m - lag % m) % m];
            }
        }
        for i in 0..m {
            h[(i, j)] = rx
                .iter()
                .enumerate()
                .map(|(t, &r)| r * Complex64::from_polar(1.0, -2.0 * PI * (i * t) as f64 / m as f64))
                .sum();
        }
    }
    h
}

/// Largest relative deviation of the closed-form channel matrix from the
/// time-domain propagation over `draws` random channels.
pub fn channel_matrix_error(draws: u64) -> f64 {
    let cfg = config(64, 8, 2, 1);
    let mut worst: f64 = 0.0;
    for t in 0..draws {
        let mut rng = trial_rng(11, "oracle/channel", t);
        let model = match t % 3 {
            0 => ChannelModel::LineOfSight,
            1 => ChannelModel::Rician { k_factor: 2.0 },
            _ => ChannelModel::Rayleigh,
        };
        let count = 1 + below(&mut rng, 8) as usize;
        // up to a third of a subcarrier of Doppler, so the ICI terms matter
        let paths = sample_paths(model, count, 16, 600.0, &cfg, &mut rng).unwrap();
        let fast = freq_channel_matrix(&paths, &cfg);
        let slow = time_domain_channel(&paths, &cfg);
        let scale = slow.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let diff = (fast - &slow).iter().map(|z| z.norm()).fold(0.0, f64::max);
        worst = worst.max(diff / scale);
    }
    worst
}

/// Largest relative deviation of the chirp-z matched filter from the direct
/// double sum on random 32×8 echoes.
pub fn matched_filter_error(frames: u64) -> f64 {
    let cfg = config(32, 8, 2, 8);
    let sense = build_sense_frame(&cfg).unwrap();
    let grid = RangeVelocityGrid::with_points((-150.0, 4000.0, 37), (-400.0, 250.0, 21)).unwrap();
    let mut worst: f64 = 0.0;
    for t in 0..frames {
        let mut rng = trial_rng(12, "oracle/mf", t);
        let echo = Frame::new(CMatrix::from_fn(32, 8, |_, _| complex_normal(&mut rng, 1.0)), FrameRole::Echo);
        let fast = matched_filter_spectrum(&echo, &sense, &grid, &cfg).unwrap();
        let slow = matched_filter_spectrum_direct(&echo, &sense, &grid, &cfg).unwrap();
        let diff = (&fast.values - &slow.values).iter().map(|v| v.abs()).fold(0.0, f64::max);
        worst = worst.max(diff / slow.max());
    }
    worst
}

/// Number of noisy `N_g = 4` draws on which the per-subcarrier ML detector
/// disagrees with scoring every (codeword, symbol tuple) hypothesis.
pub fn ml_disagreements(draws: u64) -> usize {
    let cfg = config(4, 4, 2, 1);
    let cb = IndexCodebook::new(4, 2).unwrap();
    let points = cfg.constellation.points().to_vec();
    let amp = cfg.active_amplitude();
    let mut bad = 0;
    for t in 0..draws {
        let mut rng = trial_rng(13, "oracle/ml", t);
        let gains: Vec<Complex64> = (0..4).map(|_| complex_normal(&mut rng, 1.0)).collect();
        let sent = below(&mut rng, cb.len() as u64) as usize;
        let mut x = [Complex64::new(0.0, 0.0); 4];
        for &i in &cb.entries()[sent] {
            x[i] = points[below(&mut rng, points.len() as u64) as usize] * amp;
        }
        // noisy enough that a fair share of decisions are wrong
        let y: Vec<Complex64> = (0..4).map(|i| gains[i] * x[i] + complex_normal(&mut rng, 0.8)).collect();

        let mut best = (f64::INFINITY, 0, Vec::new());
        for (e, entry) in cb.entries().iter().enumerate() {
            for combo in 0..points.len().pow(entry.len() as u32) {
                let labels: Vec<usize> =
                    (0..entry.len()).map(|k| combo / points.len().pow(k as u32) % points.len()).collect();
                let mut hyp = [Complex64::new(0.0, 0.0); 4];
                for (&i, &l) in entry.iter().zip(&labels) {
                    hyp[i] = points[l] * amp;
                }
                let metric: f64 = (0..4).map(|i| (y[i] - gains[i] * hyp[i]).norm_sqr()).sum();
                if metric < best.0 {
                    best = (metric, e, labels);
                }
            }
        }
        let d = ml_detect_group(&y, &gains, &cb, &cfg.constellation, amp).unwrap();
        if d.entry != best.1 || d.symbols != best.2 {
            bad += 1;
        }
    }
    bad
}
