//! Quick invariant checks of the whole pipeline.

use std::time::Instant;

use simofdm_core::channel::{freq_channel_matrix, sample_paths, ChannelModel};
use simofdm_core::compensation::{equivalent_channel, sinr_per_subcarrier};
use simofdm_core::linalg::{frobenius, CMatrix};
use simofdm_core::link::{build, noiseless_static_check, random_superposed_frame, BitCount, CompensatorKind};
use simofdm_core::rng::{random_bits, trial_rng};
use simofdm_core::waveform::{
    binomial, build_sense_frame, comm_frame_to_bits, generate_m_sequence, map_bits_to_comm_frame,
    IndexCodebook,
};
use simofdm_core::Complex64;

use crate::ber::run_ber_sweep;
use crate::config::{Experiment, ExperimentConfig, Scale, WaveformKind};
use crate::error::{HarnessError, Result};
use crate::output::write_csv;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

fn config() -> Result<ExperimentConfig> {
    let cfg = ExperimentConfig::preset(Experiment::Ber, Scale::Desk);
    cfg.validate()?;
    Ok(cfg)
}

fn codebook_bijective() -> Result<(bool, String)> {
    let mut cases = 0;
    for n in 2..=8usize {
        for k in 1..n {
            if binomial(n, k) < 2 {
                continue;
            }
            let cb = IndexCodebook::new(n, k)?;
            let mut seen = std::collections::BTreeSet::new();
            for (i, e) in cb.entries().iter().enumerate() {
                let valid = e.len() == k && e.windows(2).all(|w| w[0] < w[1]) && e.iter().all(|&x| x < n);
                if !valid || cb.position(e) != Some(i) || !seen.insert(e.clone()) {
                    return Ok((false, format!("N_g={n}, k={k}: codeword {i} {e:?}")));
                }
            }
            cases += 1;
        }
    }
    // frame level, on the configured layout
    let w = config()?.waveform_config(0.0)?;
    let cb = IndexCodebook::new(w.group_size, w.active)?;
    let mut rng = trial_rng(0, "selftest/codebook", 0);
    for _ in 0..20 {
        let bits = random_bits(&mut rng, simofdm_core::waveform::bits_per_symbol(&w)? * w.symbols);
        let frame = map_bits_to_comm_frame(&bits, &w, &cb)?;
        if comm_frame_to_bits(&frame, &w, &cb)? != bits {
            return Ok((false, "frame map/demap roundtrip differs".into()));
        }
    }
    Ok((true, format!("{cases} layouts exhaustive, 20 frame roundtrips")))
}

fn m_sequence_two_valued() -> Result<(bool, String)> {
    for degree in 3..=12u32 {
        let s = generate_m_sequence(degree)?;
        let n = s.len();
        for lag in 0..n {
            let c: f64 = (0..n).map(|i| s[i] * s[(i + lag) % n]).sum();
            let want = if lag == 0 { n as f64 } else { -1.0 };
            if c != want {
                return Ok((false, format!("degree {degree}, lag {lag}: {c}")));
            }
        }
    }
    Ok((true, "degrees 3..=12, every lag".into()))
}

fn power_conserved() -> Result<(bool, String)> {
    let cfg = config()?;
    let mut worst: f64 = 0.0;
    for rho in [0.0, 0.25, 0.5, 0.75] {
        let w = cfg.waveform_config(rho)?;
        let cb = IndexCodebook::new(w.group_size, w.active)?;
        let sense = build_sense_frame(&w)?;
        let mut rng = trial_rng(0, "selftest/power", (rho * 100.0) as u64);
        let frames = 1000;
        let mut acc = 0.0;
        for _ in 0..frames {
            let (_, x) = random_superposed_frame(&w, &cb, &sense, &mut rng)?;
            acc += (0..w.symbols).map(|n| x.column_energy(n)).sum::<f64>() / w.symbols as f64;
        }
        let rel = (acc / frames as f64 / w.subcarriers as f64 - 1.0).abs();
        worst = worst.max(rel);
        if rel > 0.02 {
            return Ok((false, format!("ρ={rho}: mean column energy off by {:.2}%", 100.0 * rel)));
        }
    }
    Ok((true, format!("worst deviation {:.3}% over 1000 frames", 100.0 * worst)))
}

fn statistically_orthogonal() -> Result<(bool, String)> {
    let w = config()?.waveform_config(0.5)?;
    let cb = IndexCodebook::new(w.group_size, w.active)?;
    let sense = build_sense_frame(&w)?;
    let mut rng = trial_rng(0, "selftest/orthogonality", 0);
    let per_symbol = simofdm_core::waveform::bits_per_symbol(&w)? * w.symbols;
    let frames = 10_000;
    let samples: Vec<Complex64> = (0..frames)
        .map(|_| {
            let frame = map_bits_to_comm_frame(&random_bits(&mut rng, per_symbol), &w, &cb)?;
            Ok(frame.samples.column(0).dotc(&sense.samples.column(0)))
        })
        .collect::<Result<_>>()?;
    let n = frames as f64;
    let mean: Complex64 = samples.iter().sum::<Complex64>() / n;
    let var = samples.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    let passed = mean.norm() < 3.0 * se;
    Ok((passed, format!("|mean| = {:.4}, standard error {:.4}", mean.norm(), se)))
}

fn noiseless_links_error_free() -> Result<(bool, String)> {
    let cfg = config()?;
    let mut total = BitCount::default();
    for rho in [0.0, 0.3, 0.6] {
        let w = cfg.waveform_config(rho)?;
        let cb = IndexCodebook::new(w.group_size, w.active)?;
        let sense = build_sense_frame(&w)?;
        for kind in [CompensatorKind::Identity, CompensatorKind::FullInverse, CompensatorKind::IciOnly] {
            for t in 0..5 {
                let mut rng = trial_rng(0, "selftest/noiseless", t);
                let paths = sample_paths(cfg.channel.model, cfg.channel.paths, cfg.channel.taps, 0.0, &w, &mut rng)?;
                total += noiseless_static_check(&w, &cb, &sense, &paths, kind, &mut rng)?;
            }
        }
    }
    Ok((total.errors == 0, format!("{} errors in {} bits", total.errors, total.bits)))
}

fn draws() -> Result<Vec<CMatrix>> {
    let cfg = config()?;
    let w = cfg.waveform_config(0.0)?;
    (0..10)
        .map(|t| {
            let mut rng = trial_rng(0, "selftest/channel", t);
            let paths = sample_paths(ChannelModel::Rician { k_factor: 2.0 }, 4, 16, 10.0, &w, &mut rng)?;
            Ok(freq_channel_matrix(&paths, &w))
        })
        .collect()
}

fn unit_norm_precoder() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for h in draws()? {
        for kind in [CompensatorKind::FullInverse, CompensatorKind::IciOnly] {
            worst = worst.max((frobenius(&build(kind, &h)?.matrix) - 1.0).abs());
        }
    }
    Ok((worst < 1e-12, format!("max |‖U‖_F − 1| = {worst:.2e}")))
}

fn perfect_estimate_is_identity() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for h in draws()? {
        let eq = equivalent_channel(&h, &h)?;
        let id = CMatrix::identity(h.nrows(), h.ncols());
        worst = worst.max((eq - &id).iter().map(|z| z.norm()).fold(0.0, f64::max));
        let omega = sinr_per_subcarrier(&id, &h, 0.3, 1.0, 1e-3)?.omega;
        worst = worst.max(omega.iter().copied().fold(0.0, f64::max));
    }
    Ok((worst < 1e-9, format!("max deviation {worst:.2e}")))
}

fn reruns_identical() -> Result<(bool, String)> {
    // the time-varying preset senses and pre-compensates, covering every stage
    let mut cfg = config()?;
    cfg.set_doppler(true);
    cfg.sweep.trials = 4;
    cfg.sweep.frames_per_trial = 2;
    cfg.sweep.snr_db = vec![10.0, 30.0];
    cfg.sweep.waveforms = vec![WaveformKind::Ofdm, WaveformKind::Sim];
    let dir = std::env::temp_dir().join(format!("simofdm-selftest-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
    let mut bytes = Vec::new();
    for (k, threads) in [1usize, 3].into_iter().enumerate() {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| HarnessError::config("selftest", e.to_string()))?;
        let rows = pool.install(|| run_ber_sweep(&cfg))?;
        let path = dir.join(format!("run{k}.csv"));
        write_csv(&rows, &path)?;
        bytes.push(std::fs::read(&path).map_err(|e| HarnessError::io(&path, e))?);
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok((bytes[0] == bytes[1], format!("{} bytes, 1 vs 3 worker threads", bytes[0].len())))
}

/// Run every check, in order.
pub fn run_selftest() -> Vec<Check> {
    let checks: [(&'static str, fn() -> Result<(bool, String)>); 8] = [
        ("codebook bijectivity", codebook_bijective),
        ("m-sequence autocorrelation", m_sequence_two_valued),
        ("power conservation", power_conserved),
        ("statistical orthogonality", statistically_orthogonal),
        ("noiseless end-to-end BER", noiseless_links_error_free),
        ("unit-norm precoder", unit_norm_precoder),
        ("perfect estimate gives identity", perfect_estimate_is_identity),
        ("byte-identical reruns", reruns_identical),
    ];
    checks
        .into_iter()
        .map(|(name, f)| {
            let t = Instant::now();
            let (passed, detail) = f().unwrap_or_else(|e| (false, e.to_string()));
            Check { name, passed, detail, seconds: t.elapsed().as_secs_f64() }
        })
        .collect()
}
