//! Bit error rate sweeps.

use rayon::prelude::*;
use simofdm_core::SPEED_OF_LIGHT;
use simofdm_core::channel::{freq_channel_matrix, sample_paths, ChannelModel, PathSet};
use simofdm_core::compensation::{Compensator, SensedChannelEstimate};
use simofdm_core::linalg::CMatrix;
use simofdm_core::link::{
    compensator_from_estimate, identity_compensator, im_frame, noise_var_for_snr, ofdm_frame,
    random_superposed_frame, sense_channel, BitCount, SensingMethod,
};
use simofdm_core::receiver::RhoMode;
use simofdm_core::sensing::RangeVelocityGrid;
use simofdm_core::rng::{trial_rng, TrialRng};
use simofdm_core::waveform::{bits_per_symbol, build_sense_frame, Frame, IndexCodebook, WaveformConfig};

use crate::config::{Estimator, ExperimentConfig, Knowledge, WaveformKind};
use crate::error::Result;
use crate::output::{Metric, ResultRow};

/// One BER curve: a waveform at one power split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Curve {
    pub kind: WaveformKind,
    pub rho: f64,
}

/// Curves of a sweep. OFDM and IM-OFDM carry no sensing sequence and get a
/// single curve at `ρ = 0`.
pub fn curves(cfg: &ExperimentConfig) -> Vec<Curve> {
    let mut out = Vec::new();
    for &kind in &cfg.sweep.waveforms {
        match kind {
            WaveformKind::Ofdm | WaveformKind::Im => out.push(Curve { kind, rho: 0.0 }),
            WaveformKind::Sim => out.extend(cfg.sweep.rho.iter().map(|&rho| Curve { kind, rho })),
        }
    }
    out
}

/// Experiment id, e.g. `ber-static-rician`.
pub fn experiment_id(cfg: &ExperimentConfig) -> String {
    let model = match cfg.channel.model {
        ChannelModel::LineOfSight => "los",
        ChannelModel::Rician { .. } => "rician",
        ChannelModel::Rayleigh => "rayleigh",
    };
    format!("ber-{}-{model}", if cfg.channel.doppler { "tv" } else { "static" })
}

struct Prepared {
    config: WaveformConfig,
    codebook: IndexCodebook,
    sense: Frame,
    bits: usize,
    grid: RangeVelocityGrid,
}

fn prepare(cfg: &ExperimentConfig, curve: Curve) -> Result<Prepared> {
    let config = cfg.waveform_config(curve.rho)?;
    let codebook = IndexCodebook::new(config.group_size, config.active)?;
    let sense = build_sense_frame(&config)?;
    let bits = match curve.kind {
        WaveformKind::Ofdm => config.subcarriers,
        _ => bits_per_symbol(&config)?,
    };
    let grid = channel_grid(cfg, &config)?;
    Ok(Prepared { config, codebook, sense, bits, grid })
}

/// Search grid spanning the channel's tap span and velocity spread, rather
/// than the target grid of the sensing experiments.
pub(crate) fn channel_grid(cfg: &ExperimentConfig, config: &WaveformConfig) -> Result<RangeVelocityGrid> {
    let step = SPEED_OF_LIGHT * config.symbol_duration / config.subcarriers as f64;
    let taps = cfg.channel.taps;
    let v = (4.0 * cfg.velocity_std()).max(1.0);
    Ok(RangeVelocityGrid::with_points((0.0, step * taps as f64, 4 * taps), (-v, v, 64))?)
}

fn sensing_method(cfg: &ExperimentConfig, rho: f64) -> SensingMethod {
    // without a sensing sequence only the subspace estimator applies
    match cfg.sensing.estimator {
        _ if rho == 0.0 => SensingMethod::Music,
        Estimator::MatchedFilter => SensingMethod::MatchedFilter,
        Estimator::Music => SensingMethod::Music,
        Estimator::Fused => SensingMethod::Fused(None),
    }
}

/// Transmit-side compensator for one S-IM-OFDM trial. A sensing pass that finds
/// nothing, or a reconstruction too ill-conditioned to invert, leaves the
/// link uncompensated.
#[allow(clippy::too_many_arguments)]
fn compensator(
    cfg: &ExperimentConfig,
    p: &Prepared,
    rho: f64,
    paths: &PathSet,
    noise_std: f64,
    rng: &mut TrialRng,
) -> Result<Compensator> {
    let m = p.config.subcarriers;
    let estimate = match cfg.compensation.knowledge {
        Knowledge::None => return Ok(identity_compensator(m)),
        Knowledge::Genie => SensedChannelEstimate::genie(paths),
        Knowledge::Sensed => {
            let (_, frame) = random_superposed_frame(&p.config, &p.codebook, &p.sense, rng)?;
            let method = sensing_method(cfg, rho);
            match sense_channel(paths, &frame, &p.sense, noise_std, method, &p.grid, &p.config, rng) {
                Ok(e) => e,
                Err(simofdm_core::Error::Estimation(_)) => return Ok(identity_compensator(m)),
                Err(e) => return Err(e.into()),
            }
        }
    };
    match compensator_from_estimate(cfg.compensation.kind, &estimate, &p.config) {
        Ok(c) => Ok(c),
        Err(simofdm_core::Error::Numerical(_)) => Ok(identity_compensator(m)),
        Err(e) => Err(e.into()),
    }
}

/// Errors for every `(curve, snr)` of one trial.
fn run_trial(cfg: &ExperimentConfig, id: &str, prepared: &[(Curve, Prepared)], trial: u64) -> Result<Vec<BitCount>> {
    let first = &prepared[0].1.config;
    let mut crng = trial_rng(cfg.sweep.seed, &format!("{id}/channel"), trial);
    let paths = sample_paths(cfg.channel.model, cfg.channel.paths, cfg.channel.taps, cfg.velocity_std(), first, &mut crng)?;
    let h: CMatrix = freq_channel_matrix(&paths, first);
    let p_t = cfg.waveform.transmit_power;
    let mut out = Vec::with_capacity(prepared.len() * cfg.sweep.snr_db.len());
    for (ci, (curve, p)) in prepared.iter().enumerate() {
        for &snr in &cfg.sweep.snr_db {
            let var = noise_var_for_snr(p_t, p.bits, snr);
            let std = var.sqrt();
            // same stream at every SNR, so points differ only by noise scale
            let mut rng = trial_rng(cfg.sweep.seed, &format!("{id}/data/{ci}"), trial);
            let mut count = BitCount::default();
            match curve.kind {
                WaveformKind::Ofdm => {
                    for _ in 0..cfg.sweep.frames_per_trial {
                        count += ofdm_frame(&p.config, &h, std, &mut rng)?;
                    }
                }
                WaveformKind::Im | WaveformKind::Sim => {
                    // plain IM-OFDM is a conventional scheme and is never precoded
                    let comp = if curve.kind == WaveformKind::Im {
                        identity_compensator(p.config.subcarriers)
                    } else {
                        compensator(cfg, p, curve.rho, &paths, std, &mut rng)?
                    };
                    let mode = if curve.kind == WaveformKind::Im {
                        RhoMode::Known(0.0)
                    } else {
                        RhoMode::Corrected { noise_var: var }
                    };
                    for _ in 0..cfg.sweep.frames_per_trial {
                        let (c, _) = im_frame(&p.config, &p.codebook, &p.sense, &h, &comp, std, mode, &mut rng)?;
                        count += c;
                    }
                }
            }
            out.push(count);
        }
    }
    Ok(out)
}

/// BER of every curve at every SNR point.
pub fn run_ber_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let id = experiment_id(cfg);
    let prepared: Vec<(Curve, Prepared)> =
        curves(cfg).into_iter().map(|c| prepare(cfg, c).map(|p| (c, p))).collect::<Result<_>>()?;
    let per_trial: Vec<Vec<BitCount>> = (0..cfg.sweep.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(cfg, &id, &prepared, t))
        .collect::<Result<_>>()?;
    let snrs = &cfg.sweep.snr_db;
    let mut rows = Vec::new();
    for (ci, (curve, _)) in prepared.iter().enumerate() {
        for (si, &snr) in snrs.iter().enumerate() {
            let mut total = BitCount::default();
            for t in &per_trial {
                total += t[ci * snrs.len() + si];
            }
            rows.push(ResultRow {
                experiment: id.clone(),
                waveform: curve.kind.tag().into(),
                rho: curve.rho,
                snr_db: snr,
                metric: Metric::Ber,
                value: total.ber(),
                trials: cfg.sweep.trials,
                seed: cfg.sweep.seed,
            });
        }
    }
    Ok(rows)
}

/// `(snr_db, ber)` points of one curve from sweep rows.
pub fn ber_curve(rows: &[ResultRow], waveform: WaveformKind, rho: f64) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.metric == Metric::Ber && r.waveform == waveform.tag() && r.rho == rho)
        .map(|r| (r.snr_db, r.value))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts
}
