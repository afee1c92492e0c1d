//! One small end-to-end run: sensing accuracy, then BER without, with genie
//! and with sensed pre-compensation.

use crate::ber::run_ber_sweep;
use crate::config::{ExperimentConfig, Knowledge, WaveformKind};
use crate::error::Result;
use crate::output::ResultRow;
use crate::rmse::{point_rows, sweep_point, Method};

pub fn run_demo(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &rho in &cfg.sweep.rho {
        for &snr in &cfg.sweep.snr_db {
            rows.extend(point_rows(cfg, &sweep_point(cfg, &Method::ALL, rho, snr)?, "demo"));
        }
    }
    for (knowledge, name) in [(Knowledge::None, "none"), (Knowledge::Genie, "genie"), (Knowledge::Sensed, "sensed")] {
        let mut c = cfg.clone();
        c.compensation.knowledge = knowledge;
        c.sweep.waveforms = vec![WaveformKind::Sim];
        rows.extend(run_ber_sweep(&c)?.into_iter().map(|r| ResultRow { experiment: format!("demo-{name}"), ..r }));
    }
    Ok(rows)
}
