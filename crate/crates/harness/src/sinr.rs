//! Minimum-SINR analysis of the power split.

use std::path::Path;

use rayon::prelude::*;
use simofdm_core::channel::{freq_channel_matrix, sample_paths};
use simofdm_core::compensation::{
    comm_gain_gc, equivalent_channel, optimize_rho, reconstruct_channel, rho_max, sinr_per_subcarrier,
};
use simofdm_core::linalg::CMatrix;
use simofdm_core::link::{noise_var_for_snr, random_superposed_frame, sense_channel, SensingMethod};
use simofdm_core::rng::trial_rng;
use simofdm_core::waveform::{bits_per_symbol, build_sense_frame, IndexCodebook};

use crate::ber::ber_curve;
use crate::config::{Estimator, ExperimentConfig, Knowledge, WaveformKind};
use crate::error::{HarnessError, Result};
use crate::output::{read_csv, Metric, ResultRow};

/// BER at which `G_c` is read off measured curves.
pub const GAIN_TARGET_BER: f64 = 1e-3;

/// `ρ_max` of a perfectly compensated static link: `1 − 10^{−G_c/10}`.
pub fn static_rho_max(gain_db: f64) -> f64 {
    1.0 - 10f64.powf(-gain_db / 10.0)
}

/// `G_c` (dB) between the IM-OFDM and OFDM curves of a BER results file.
pub fn gain_from_results(path: &Path) -> Result<f64> {
    let rows = read_csv(path)?;
    let im = ber_curve(&rows, WaveformKind::Im, 0.0);
    let ofdm = ber_curve(&rows, WaveformKind::Ofdm, 0.0);
    if im.is_empty() || ofdm.is_empty() {
        return Err(HarnessError::config(
            "compensation.gain_from",
            format!("{} lacks im-ofdm or ofdm BER rows", path.display()),
        ));
    }
    comm_gain_gc(&im, &ofdm, GAIN_TARGET_BER).map_err(|e| HarnessError::config("compensation.gain_from", e.to_string()))
}

/// `G_c` from the referenced BER results when given, else the configured value.
pub fn resolve_gain(cfg: &ExperimentConfig) -> Result<f64> {
    match &cfg.compensation.gain_from {
        Some(p) => gain_from_results(p),
        None => Ok(cfg.compensation.gain_db),
    }
}

/// Channel and transmitter-side estimate of one draw at one SNR.
fn draw(cfg: &ExperimentConfig, id: &str, trial: u64, noise_var: f64) -> Result<(CMatrix, CMatrix)> {
    let base = cfg.waveform_config(0.0)?;
    let mut rng = trial_rng(cfg.sweep.seed, &format!("{id}/channel"), trial);
    let paths = sample_paths(cfg.channel.model, cfg.channel.paths, cfg.channel.taps, cfg.velocity_std(), &base, &mut rng)?;
    let h = freq_channel_matrix(&paths, &base);
    let estimate = match cfg.compensation.knowledge {
        Knowledge::Genie => h.clone(),
        // the receiver knows only each subcarrier's own gain
        Knowledge::None => CMatrix::from_diagonal(&h.diagonal()),
        Knowledge::Sensed => {
            let config = cfg.waveform_config(cfg.compensation.sensing_rho)?;
            let codebook = IndexCodebook::new(config.group_size, config.active)?;
            let sense = build_sense_frame(&config)?;
            let (_, frame) = random_superposed_frame(&config, &codebook, &sense, &mut rng)?;
            let method = match cfg.sensing.estimator {
                Estimator::MatchedFilter => SensingMethod::MatchedFilter,
                Estimator::Music => SensingMethod::Music,
                Estimator::Fused => SensingMethod::Fused(None),
            };
            let grid = crate::ber::channel_grid(cfg, &config)?;
            let est = sense_channel(&paths, &frame, &sense, noise_var.sqrt(), method, &grid, &config, &mut rng)?;
            reconstruct_channel(&est, &config)?
        }
    };
    Ok((h, estimate))
}

fn row(cfg: &ExperimentConfig, experiment: String, rho: f64, snr_db: f64, metric: Metric, value: f64) -> ResultRow {
    ResultRow {
        experiment,
        waveform: WaveformKind::Sim.tag().into(),
        rho,
        snr_db,
        metric,
        value,
        trials: cfg.sweep.trials,
        seed: cfg.sweep.seed,
    }
}

/// Per channel draw and SNR: the minimum SINR (linear) at every swept `ρ`,
/// `ρ*` and the time-varying `ρ_max`, under `sinr-<mode>-draw<k>`; plus the
/// static closed-form `ρ_max` and the `G_c` used, under `sinr-static-bound`.
/// Summary rows carry `ρ = 0`.
pub fn run_sinr_report(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let gain = resolve_gain(cfg)?;
    let mode = if cfg.channel.doppler { "tv" } else { "static" };
    let p_t = cfg.waveform.transmit_power;
    let bits = bits_per_symbol(&cfg.waveform_config(0.0)?)?;
    let per_draw: Vec<Vec<ResultRow>> = (0..cfg.sweep.trials as u64)
        .into_par_iter()
        .map(|t| {
            let id = format!("sinr-{mode}-draw{t:03}");
            let mut rows = Vec::new();
            for &snr in &cfg.sweep.snr_db {
                let var = noise_var_for_snr(p_t, bits, snr);
                let (h, estimate) = draw(cfg, &format!("sinr-{mode}"), t, var)?;
                let eq = equivalent_channel(&h, &estimate)?;
                for &rho in &cfg.sweep.rho {
                    let s = sinr_per_subcarrier(&eq, &h, rho, p_t, var)?;
                    rows.push(row(cfg, id.clone(), rho, snr, Metric::SinrMin, s.min_sinr));
                }
                let (rho_star, _) = optimize_rho(&eq, &h, p_t, var)?;
                rows.push(row(cfg, id.clone(), 0.0, snr, Metric::RhoStar, rho_star));
                let (bound, _) = rho_max(&eq, &h, gain, p_t, var)?;
                rows.push(row(cfg, id.clone(), 0.0, snr, Metric::RhoMax, bound));
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<ResultRow> = per_draw.concat();
    for &snr in &cfg.sweep.snr_db {
        rows.push(row(cfg, "sinr-static-bound".into(), 0.0, snr, Metric::RhoMax, static_rho_max(gain)));
        rows.push(row(cfg, "sinr-static-bound".into(), 0.0, snr, Metric::GainDb, gain));
    }
    Ok(rows)
}
