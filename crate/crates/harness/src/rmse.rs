//! Range/velocity estimation accuracy sweeps.

use rayon::prelude::*;
use simofdm_core::channel::{transmit_amplitude, Target, TargetSet};
use simofdm_core::link::{estimate_targets, noise_var_for_snr, random_superposed_frame, SensingMethod};
use simofdm_core::rng::{trial_rng, uniform, TrialRng};
use simofdm_core::sensing::{associate, crlb, fuse, rmse, ErrorVariances, EstimateSet, RmseReport, GATE_CELLS};
use simofdm_core::waveform::{bits_per_symbol, build_sense_frame, Frame, FrameRole, IndexCodebook, WaveformConfig};
use simofdm_core::Complex64;

use crate::config::{ExperimentConfig, WaveformKind};
use crate::error::Result;
use crate::output::{Metric, ResultRow};

/// Estimators compared by the sweep, in output order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    MatchedFilter,
    Music,
    Fused,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::MatchedFilter, Method::Music, Method::Fused];

    pub fn key(self) -> &'static str {
        match self {
            Method::MatchedFilter => "mf",
            Method::Music => "music",
            Method::Fused => "fused",
        }
    }

    /// Experiment id of this estimator's rows, e.g. `rmse-mf`.
    pub fn experiment_id(self, prefix: &str) -> String {
        format!("{prefix}-{}", self.key())
    }
}

pub(crate) struct Setup {
    pub config: WaveformConfig,
    codebook: IndexCodebook,
    sense: Frame,
    pub noise_var: f64,
}

pub(crate) fn setup(cfg: &ExperimentConfig, rho: f64, snr_db: f64) -> Result<Setup> {
    let config = cfg.waveform_config(rho)?;
    let codebook = IndexCodebook::new(config.group_size, config.active)?;
    let sense = build_sense_frame(&config)?;
    // sensing noise shares the communication noise level
    let noise_var = noise_var_for_snr(config.transmit_power, bits_per_symbol(&config)?, snr_db);
    Ok(Setup { config, codebook, sense, noise_var })
}

/// One sensing trial: unit-modulus reflectivities with random phases at the
/// configured positions, one superposed frame and its echo.
pub(crate) struct Trial {
    pub truth: TargetSet,
    pub frame: Frame,
    echo: Frame,
    radiated: Frame,
    sense: Frame,
}

pub(crate) fn draw_trial(cfg: &ExperimentConfig, s: &Setup, rng: &mut TrialRng) -> Result<Trial> {
    let targets = cfg
        .sensing
        .targets
        .iter()
        .map(|&(r, v)| {
            let phase = std::f64::consts::TAU * uniform(rng);
            Target::new(Complex64::from_polar(1.0, phase), r, v, &s.config)
        })
        .collect();
    let truth = TargetSet::new(targets)?;
    let (_, frame) = random_superposed_frame(&s.config, &s.codebook, &s.sense, rng)?;
    let amp = Complex64::new(transmit_amplitude(&s.config), 0.0);
    let radiated = Frame::new(&frame.samples * amp, FrameRole::Superposed);
    let sense = Frame::new(&s.sense.samples * amp, FrameRole::Sense);
    let echo = simofdm_core::channel::generate_echo(&radiated, &truth, s.noise_var.sqrt(), &s.config, rng)?;
    Ok(Trial { truth, frame, echo, radiated, sense })
}

pub(crate) fn estimate(cfg: &ExperimentConfig, s: &Setup, t: &Trial, method: SensingMethod) -> Result<EstimateSet> {
    let count = t.truth.len();
    Ok(estimate_targets(&t.echo, &t.radiated, &t.sense, count, method, &cfg.sensing.grid, &s.config)?)
}

/// Error pairs `(matched filter, MUSIC)` for targets both estimators place
/// inside the association gate.
fn joint_errors(cfg: &ExperimentConfig, t: &Trial, mf: &EstimateSet, mu: &EstimateSet) -> Vec<[f64; 4]> {
    let grid = &cfg.sensing.grid;
    let (gr, gv) = (GATE_CELLS * grid.range_step, GATE_CELLS * grid.velocity_step);
    let a = associate(&mf.estimates, &t.truth, grid);
    let b = associate(&mu.estimates, &t.truth, grid);
    let mut out = Vec::new();
    for (k, target) in t.truth.targets().iter().enumerate() {
        if let (Some(i), Some(j)) = (a[k], b[k]) {
            let (e1, e2) = (mf.estimates[i], mu.estimates[j]);
            let e = [e1.range - target.range, e2.range - target.range, e1.velocity - target.velocity, e2.velocity - target.velocity];
            if e[0].abs() <= gr && e[1].abs() <= gr && e[2].abs() <= gv && e[3].abs() <= gv {
                out.push(e);
            }
        }
    }
    out
}

/// Fusion priors from calibration errors. The estimators see the same echo,
/// so their errors correlate; passing `m_i − c` (mean square error less the
/// cross moment) makes the variance-ratio weight the correlated optimum
/// `(m₂ − c) / (m₁ + m₂ − 2c)`.
pub fn priors_from_errors(errors: &[[f64; 4]]) -> Option<(ErrorVariances, ErrorVariances)> {
    if errors.is_empty() {
        return None;
    }
    let n = errors.len() as f64;
    let mean = |f: &dyn Fn(&[f64; 4]) -> f64| errors.iter().map(f).sum::<f64>() / n;
    let (m1r, m2r, cr) = (mean(&|e| e[0] * e[0]), mean(&|e| e[1] * e[1]), mean(&|e| e[0] * e[1]));
    let (m1v, m2v, cv) = (mean(&|e| e[2] * e[2]), mean(&|e| e[3] * e[3]), mean(&|e| e[2] * e[3]));
    Some((
        ErrorVariances { range: (m1r - cr).max(0.0), velocity: (m1v - cv).max(0.0) },
        ErrorVariances { range: (m2r - cr).max(0.0), velocity: (m2v - cv).max(0.0) },
    ))
}

/// Calibrate fusion weights at one sweep point on a stream disjoint from the
/// evaluation trials.
pub fn calibrate(cfg: &ExperimentConfig, rho: f64, snr_db: f64) -> Result<Option<(ErrorVariances, ErrorVariances)>> {
    let s = setup(cfg, rho, snr_db)?;
    let errors: Vec<Vec<[f64; 4]>> = (0..cfg.sensing.calibration_trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(cfg.sweep.seed, "rmse/calibration", i);
            let t = draw_trial(cfg, &s, &mut rng)?;
            let mf = estimate(cfg, &s, &t, SensingMethod::MatchedFilter)?;
            let mu = estimate(cfg, &s, &t, SensingMethod::Music)?;
            Ok(joint_errors(cfg, &t, &mf, &mu))
        })
        .collect::<Result<_>>()?;
    Ok(priors_from_errors(&errors.concat()))
}

/// Per-estimator accuracy and mean bounds at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointReport {
    pub rho: f64,
    pub snr_db: f64,
    pub reports: Vec<(Method, RmseReport)>,
    /// Mean over trials and targets of the range and velocity bounds.
    pub crlb: (f64, f64),
}

struct TrialOut {
    sets: Vec<EstimateSet>,
    truth: TargetSet,
    crlb: (f64, f64),
}

fn mean_bound(truth: &TargetSet, frame: &Frame, s: &Setup) -> Result<(f64, f64)> {
    let b = crlb(truth, frame, s.noise_var, s.config.transmit_power, &s.config)?;
    let n = b.targets.len() as f64;
    Ok((b.targets.iter().map(|t| t.range).sum::<f64>() / n, b.targets.iter().map(|t| t.velocity).sum::<f64>() / n))
}

/// Accuracy of `methods` at one `(ρ, SNR)`. Trial `i` draws its positions'
/// phases, data and noise from the same stream at every sweep point.
pub fn sweep_point(cfg: &ExperimentConfig, methods: &[Method], rho: f64, snr_db: f64) -> Result<PointReport> {
    let priors = if methods.contains(&Method::Fused) { calibrate(cfg, rho, snr_db)? } else { None };
    let s = setup(cfg, rho, snr_db)?;
    let outs: Vec<TrialOut> = (0..cfg.sweep.trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(cfg.sweep.seed, "rmse/trial", i);
            let t = draw_trial(cfg, &s, &mut rng)?;
            let need_mf = methods.iter().any(|m| *m != Method::Music);
            let need_mu = methods.iter().any(|m| *m != Method::MatchedFilter);
            let mf = if need_mf { Some(estimate(cfg, &s, &t, SensingMethod::MatchedFilter)?) } else { None };
            let mu = if need_mu { Some(estimate(cfg, &s, &t, SensingMethod::Music)?) } else { None };
            let sets = methods
                .iter()
                .map(|m| match m {
                    Method::MatchedFilter => mf.clone().expect("computed above"),
                    Method::Music => mu.clone().expect("computed above"),
                    Method::Fused => fuse(mf.as_ref().expect("computed above"), mu.as_ref().expect("computed above"), priors, &cfg.sensing.grid),
                })
                .collect();
            let crlb = mean_bound(&t.truth, &t.frame, &s)?;
            Ok(TrialOut { sets, truth: t.truth, crlb })
        })
        .collect::<Result<_>>()?;
    let truth = &outs[0].truth;
    let n = outs.len() as f64;
    let crlb = (outs.iter().map(|o| o.crlb.0).sum::<f64>() / n, outs.iter().map(|o| o.crlb.1).sum::<f64>() / n);
    // positions are fixed across trials, phases do not enter association
    let reports = methods
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let sets: Vec<EstimateSet> = outs.iter().map(|o| o.sets[k].clone()).collect();
            (m, rmse(&sets, truth, &cfg.sensing.grid))
        })
        .collect();
    Ok(PointReport { rho, snr_db, reports, crlb })
}

fn row(cfg: &ExperimentConfig, experiment: String, p: &PointReport, metric: Metric, value: f64) -> ResultRow {
    ResultRow {
        experiment,
        waveform: WaveformKind::Sim.tag().into(),
        rho: p.rho,
        snr_db: p.snr_db,
        metric,
        value,
        trials: cfg.sweep.trials,
        seed: cfg.sweep.seed,
    }
}

/// Rows for one point: RMSE and exclusion rate per estimator under
/// `{prefix}-{estimator}`, and the bounds (as variances) under
/// `{prefix}-bound`. An estimator that diverged on every trial reports only
/// its exclusion rate.
pub fn point_rows(cfg: &ExperimentConfig, p: &PointReport, prefix: &str) -> Vec<ResultRow> {
    let mut rows = Vec::new();
    let bound = format!("{prefix}-bound");
    for (m, r) in &p.reports {
        let id = m.experiment_id(prefix);
        if r.samples > 0 {
            rows.push(row(cfg, id.clone(), p, Metric::RmseRange, r.range));
            rows.push(row(cfg, id.clone(), p, Metric::RmseVelocity, r.velocity));
        }
        rows.push(row(cfg, id, p, Metric::Exclusion, r.exclusion_rate));
    }
    rows.push(row(cfg, bound.clone(), p, Metric::CrlbRange, p.crlb.0));
    rows.push(row(cfg, bound, p, Metric::CrlbVelocity, p.crlb.1));
    rows
}

/// RMSE of every estimator over the `(ρ, SNR)` sweep, with bound rows.
pub fn run_rmse_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &rho in &cfg.sweep.rho {
        for &snr in &cfg.sweep.snr_db {
            let p = sweep_point(cfg, &Method::ALL, rho, snr)?;
            rows.extend(point_rows(cfg, &p, "rmse"));
        }
    }
    Ok(rows)
}

/// `(snr_db, value)` of one estimator's metric at one `ρ`.
pub fn metric_curve(rows: &[ResultRow], experiment: &str, metric: Metric, rho: f64) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.experiment == experiment && r.metric == metric && r.rho == rho)
        .map(|r| (r.snr_db, r.value))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts
}

/// Bounds and matched-filter accuracy over the `(ρ, SNR)` sweep.
pub fn run_crlb_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &rho in &cfg.sweep.rho {
        for &snr in &cfg.sweep.snr_db {
            let p = sweep_point(cfg, &[Method::MatchedFilter], rho, snr)?;
            rows.extend(point_rows(cfg, &p, "crlb"));
        }
    }
    Ok(rows)
}
