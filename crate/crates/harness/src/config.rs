//! Experiment configuration: defaults, scale presets, `key = value` files and
//! command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use simofdm_core::channel::ChannelModel;
use simofdm_core::link::CompensatorKind;
use simofdm_core::sensing::RangeVelocityGrid;
use simofdm_core::waveform::{Constellation, SensePattern, WaveformConfig};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Ber,
    Rmse,
    Sinr,
    Crlb,
    Demo,
}

impl Experiment {
    pub fn id(self) -> &'static str {
        match self {
            Experiment::Ber => "ber",
            Experiment::Rmse => "rmse",
            Experiment::Sinr => "sinr",
            Experiment::Crlb => "crlb",
            Experiment::Demo => "demo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Paper,
    Desk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum WaveformKind {
    Ofdm,
    Im,
    Sim,
}

impl WaveformKind {
    /// Name used in config files and on the command line.
    pub fn key(self) -> &'static str {
        match self {
            WaveformKind::Ofdm => "ofdm",
            WaveformKind::Im => "im",
            WaveformKind::Sim => "sim",
        }
    }

    /// Tag written to result rows.
    pub fn tag(self) -> &'static str {
        match self {
            WaveformKind::Ofdm => "ofdm",
            WaveformKind::Im => "im-ofdm",
            WaveformKind::Sim => "s-im-ofdm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    MatchedFilter,
    Music,
    Fused,
}

/// Where the transmitter's channel estimate comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Knowledge {
    /// No precoding at all.
    None,
    /// True paths.
    Genie,
    /// Paths sensed from the echo of the preceding frame.
    Sensed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveformParams {
    pub carrier: f64,
    pub subcarriers: usize,
    pub group_size: usize,
    pub active: usize,
    /// PSK order of the IM symbols.
    pub modulation: usize,
    pub symbols: usize,
    pub cyclic_prefix: f64,
    pub symbol_duration: f64,
    pub subcarrier_spacing: f64,
    pub transmit_power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    pub model: ChannelModel,
    pub paths: usize,
    pub taps: usize,
    /// Radial velocity standard deviation (m/s).
    pub velocity_std: f64,
    pub doppler: bool,
    /// Sense the communication paths themselves (mono-static); otherwise the
    /// sensing targets are the configured ones.
    pub coupled: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepParams {
    pub snr_db: Vec<f64>,
    pub rho: Vec<f64>,
    pub waveforms: Vec<WaveformKind>,
    pub trials: usize,
    pub frames_per_trial: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensingParams {
    pub grid: RangeVelocityGrid,
    pub estimator: Estimator,
    /// `(range m, velocity m/s)` of the sensing targets.
    pub targets: Vec<(f64, f64)>,
    /// Trials used to calibrate fusion weights, on seeds disjoint from the
    /// evaluation trials.
    pub calibration_trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompensationParams {
    pub knowledge: Knowledge,
    pub kind: CompensatorKind,
    /// Communication gain `G_c` (dB) for the `ρ_max` bound.
    pub gain_db: f64,
    /// Power split of the frame sensed for the SINR report's channel estimate.
    pub sensing_rho: f64,
    /// Earlier BER results to measure `G_c` from, overriding `gain_db`.
    pub gain_from: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub scale: Scale,
    pub waveform: WaveformParams,
    pub channel: ChannelParams,
    pub sweep: SweepParams,
    pub sensing: SensingParams,
    pub compensation: CompensationParams,
    pub out: PathBuf,
}

fn range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    // rounded so listed values print as written
    (0..=n).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect()
}

fn grid(r: (f64, f64, usize), v: (f64, f64, usize)) -> RangeVelocityGrid {
    RangeVelocityGrid::with_points(r, v).expect("preset grid is valid")
}

impl WaveformParams {
    fn standard() -> Self {
        Self {
            carrier: 2.5e9,
            subcarriers: 256,
            group_size: 8,
            active: 2,
            modulation: 4,
            symbols: 32,
            cyclic_prefix: 5e-6,
            symbol_duration: 6.67e-5,
            subcarrier_spacing: 15e3,
            transmit_power: 1.0,
        }
    }
}

impl ExperimentConfig {
    /// Defaults for one experiment at one scale.
    pub fn preset(experiment: Experiment, scale: Scale) -> Self {
        let mut waveform = WaveformParams::standard();
        let desk = scale == Scale::Desk;
        if desk {
            waveform.subcarriers = 64;
            waveform.symbols = 16;
        }
        let mut channel = ChannelParams {
            model: ChannelModel::Rician { k_factor: 2.0 },
            paths: 4,
            taps: 16,
            velocity_std: 10.0,
            doppler: false,
            coupled: true,
        };
        let mut sweep = SweepParams {
            snr_db: range(-4.0, 24.0, 2.0),
            rho: vec![0.1, 0.3],
            waveforms: vec![WaveformKind::Ofdm, WaveformKind::Im, WaveformKind::Sim],
            trials: if desk { 200 } else { 1000 },
            frames_per_trial: 1,
            seed: 1,
        };
        let paper_targets = vec![(15.0, 15.0), (30.0, 5.0), (45.0, 10.0), (80.0, 10.0)];
        let mut sensing = SensingParams {
            grid: if desk {
                grid((0.0, 2000.0, 64), (-100.0, 100.0, 64))
            } else {
                grid((0.0, 120.0, 128), (-5.0, 25.0, 128))
            },
            estimator: Estimator::Fused,
            targets: paper_targets,
            calibration_trials: if desk { 100 } else { 200 },
        };
        if desk {
            // the standard targets sit well inside one resolution cell at
            // this bandwidth and frame length
            sensing.targets = vec![(300.0, 20.0), (750.0, -15.0), (1200.0, 5.0), (1650.0, -30.0)];
        }
        let compensation = CompensationParams {
            knowledge: Knowledge::Genie,
            kind: CompensatorKind::IciOnly,
            gain_db: 5.0,
            sensing_rho: 0.3,
            gain_from: None,
        };
        match experiment {
            Experiment::Ber => {
                // richer static multipath; the time-varying case keeps the
                // scatterer count the sensing pass resolves reliably
                channel.paths = 8;
                sensing.estimator = Estimator::Music;
            }
            Experiment::Rmse => {
                // the desk frame integrates about 9 dB less energy
                sweep.snr_db = if desk { range(-10.0, 10.0, 2.0) } else { range(-20.0, 0.0, 2.0) };
                sweep.rho = vec![0.1, 0.3, 0.6];
                sweep.waveforms = vec![WaveformKind::Sim];
            }
            Experiment::Sinr => {
                sweep.snr_db = vec![20.0];
                sweep.rho = range(0.0, 0.95, 0.05);
                sweep.trials = 20;
                channel.doppler = true;
                sweep.waveforms = vec![WaveformKind::Sim];
            }
            Experiment::Crlb => {
                sweep.snr_db = if desk { range(-10.0, 30.0, 5.0) } else { range(-20.0, 20.0, 5.0) };
                sweep.rho = vec![0.1, 0.3, 0.6];
                sweep.waveforms = vec![WaveformKind::Sim];
            }
            Experiment::Demo => {
                // high enough for the Doppler floor to show
                sweep.snr_db = vec![50.0];
                sweep.rho = vec![0.3];
                sweep.trials = 20;
                sweep.frames_per_trial = 10;
                sensing.estimator = Estimator::Music;
                channel.doppler = true;
                sweep.waveforms = vec![WaveformKind::Sim];
            }
        }
        Self { experiment, scale, waveform, channel, sweep, sensing, compensation, out: PathBuf::from("out") }
    }

    /// Switch Doppler on or off together with the sweep defaults that go with
    /// it. The time-varying BER floor sits far above the static waterfall, so
    /// the sweep extends to high SNR with more frames per trial, and the
    /// superposed curves use sensed pre-compensation.
    pub fn set_doppler(&mut self, on: bool) {
        self.channel.doppler = on;
        if self.experiment != Experiment::Ber {
            return;
        }
        if on {
            self.channel.paths = 4;
            self.sweep.snr_db = range(10.0, 70.0, 10.0);
            self.sweep.frames_per_trial = 20;
            self.compensation.knowledge = Knowledge::Sensed;
        } else {
            let base = Self::preset(self.experiment, self.scale);
            self.channel.paths = base.channel.paths;
            self.sweep.snr_db = base.sweep.snr_db;
            self.sweep.frames_per_trial = base.sweep.frames_per_trial;
            self.compensation.knowledge = base.compensation.knowledge;
        }
    }

    /// Core waveform configuration at power split `rho`.
    pub fn waveform_config(&self, rho: f64) -> Result<WaveformConfig> {
        let w = &self.waveform;
        let cfg = WaveformConfig {
            subcarriers: w.subcarriers,
            group_size: w.group_size,
            active: w.active,
            constellation: Constellation::psk(w.modulation).map_err(|e| cfg_err("waveform.modulation", e))?,
            subcarrier_spacing: w.subcarrier_spacing,
            symbol_duration: w.symbol_duration,
            cyclic_prefix: w.cyclic_prefix,
            symbols: w.symbols,
            carrier: w.carrier,
            transmit_power: w.transmit_power,
            power_split: rho,
            sense_pattern: SensePattern::Repeated,
        };
        cfg.validate().map_err(|e| cfg_err("waveform", e))?;
        Ok(cfg)
    }

    pub fn velocity_std(&self) -> f64 {
        if self.channel.doppler {
            self.channel.velocity_std
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.sweep;
        if s.trials == 0 {
            return Err(HarnessError::config("sweep.trials", "must be at least 1"));
        }
        if s.frames_per_trial == 0 {
            return Err(HarnessError::config("sweep.frames_per_trial", "must be at least 1"));
        }
        if s.snr_db.is_empty() {
            return Err(HarnessError::config("sweep.snr_db", "needs at least one SNR point"));
        }
        if let Some(x) = s.snr_db.iter().find(|x| !x.is_finite()) {
            return Err(HarnessError::config("sweep.snr_db", format!("{x} is not finite")));
        }
        if s.rho.is_empty() {
            return Err(HarnessError::config("sweep.rho", "needs at least one value"));
        }
        if let Some(r) = s.rho.iter().find(|r| !(0.0..1.0).contains(*r)) {
            return Err(HarnessError::config("sweep.rho", format!("{r} outside [0, 1)")));
        }
        if s.waveforms.is_empty() {
            return Err(HarnessError::config("sweep.waveforms", "needs at least one waveform"));
        }
        for &r in &s.rho {
            self.waveform_config(r)?;
        }
        if !(self.waveform.transmit_power > 0.0) {
            return Err(HarnessError::config("waveform.transmit_power", "must be positive"));
        }
        let c = &self.channel;
        if c.paths == 0 {
            return Err(HarnessError::config("channel.paths", "must be at least 1"));
        }
        if c.taps == 0 || c.taps > self.waveform.subcarriers {
            return Err(HarnessError::config("channel.taps", "must lie in 1..=subcarriers"));
        }
        if !(c.velocity_std >= 0.0 && c.velocity_std.is_finite()) {
            return Err(HarnessError::config("channel.velocity_std", "must be non-negative"));
        }
        self.sensing.grid.validate().map_err(|e| cfg_err("sensing.grid", e))?;
        if self.sensing.targets.is_empty() {
            return Err(HarnessError::config("sensing.targets", "needs at least one target"));
        }
        if let Some(t) = self.sensing.targets.iter().find(|(r, v)| !self.sensing.grid.contains(*r, *v)) {
            return Err(HarnessError::config("sensing.targets", format!("{t:?} lies outside the grid")));
        }
        if !(self.compensation.sensing_rho > 0.0 && self.compensation.sensing_rho < 1.0) {
            return Err(HarnessError::config("compensation.sensing_rho", "must lie in (0, 1)"));
        }
        if !(self.compensation.gain_db >= 0.0) {
            return Err(HarnessError::config("compensation.gain_db", "must be non-negative"));
        }
        Ok(())
    }

    /// Apply a config file's entries.
    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        self.load_str(&text)
    }

    pub fn load_str(&mut self, text: &str) -> Result<()> {
        let ini = ini::Ini::load_from_str(text)
            .map_err(|e| HarnessError::Config { field: "config file".into(), message: e.to_string() })?;
        for (section, props) in ini.iter() {
            let section = section.unwrap_or("");
            for (key, value) in props.iter() {
                self.set(section, key, value)?;
            }
        }
        Ok(())
    }

    /// Set one `section.key` from its textual value.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let field = format!("{section}.{key}");
        let f = field.as_str();
        let value = value.trim();
        match (section, key) {
            ("waveform", "carrier") => self.waveform.carrier = parse(f, value)?,
            ("waveform", "subcarriers") => self.waveform.subcarriers = parse(f, value)?,
            ("waveform", "group_size") => self.waveform.group_size = parse(f, value)?,
            ("waveform", "active") => self.waveform.active = parse(f, value)?,
            ("waveform", "modulation") => self.waveform.modulation = parse(f, value)?,
            ("waveform", "symbols") => self.waveform.symbols = parse(f, value)?,
            ("waveform", "cyclic_prefix") => self.waveform.cyclic_prefix = parse(f, value)?,
            ("waveform", "symbol_duration") => self.waveform.symbol_duration = parse(f, value)?,
            ("waveform", "subcarrier_spacing") => self.waveform.subcarrier_spacing = parse(f, value)?,
            ("waveform", "transmit_power") => self.waveform.transmit_power = parse(f, value)?,
            ("channel", "model") => {
                let k = match self.channel.model {
                    ChannelModel::Rician { k_factor } => k_factor,
                    _ => 2.0,
                };
                self.channel.model = parse_model(f, value, k)?;
            }
            ("channel", "k_factor") => {
                let k = parse(f, value)?;
                if let ChannelModel::Rician { k_factor } = &mut self.channel.model {
                    *k_factor = k;
                }
            }
            ("channel", "paths") => self.channel.paths = parse(f, value)?,
            ("channel", "taps") => self.channel.taps = parse(f, value)?,
            ("channel", "velocity_std") => self.channel.velocity_std = parse(f, value)?,
            ("channel", "doppler") => self.channel.doppler = parse_switch(f, value)?,
            ("channel", "coupled") => self.channel.coupled = parse_switch(f, value)?,
            ("sweep", "snr_db") => self.sweep.snr_db = parse_list(f, value)?,
            ("sweep", "rho") => self.sweep.rho = parse_list(f, value)?,
            ("sweep", "waveforms") => {
                self.sweep.waveforms =
                    value.split(',').map(|s| parse_waveform(f, s.trim())).collect::<Result<_>>()?
            }
            ("sweep", "trials") => self.sweep.trials = parse(f, value)?,
            ("sweep", "frames_per_trial") => self.sweep.frames_per_trial = parse(f, value)?,
            ("sweep", "seed") => self.sweep.seed = parse(f, value)?,
            ("sensing", "range") => {
                let (a, b, n) = parse_axis(f, value)?;
                let v = &self.sensing.grid;
                let np = ((v.velocity_max - v.velocity_min) / v.velocity_step).round() as usize + 1;
                self.sensing.grid = RangeVelocityGrid::with_points((a, b, n), (v.velocity_min, v.velocity_max, np))
                    .map_err(|e| cfg_err(f, e))?;
            }
            ("sensing", "velocity") => {
                let (a, b, n) = parse_axis(f, value)?;
                let r = &self.sensing.grid;
                let np = ((r.range_max - r.range_min) / r.range_step).round() as usize + 1;
                self.sensing.grid = RangeVelocityGrid::with_points((r.range_min, r.range_max, np), (a, b, n))
                    .map_err(|e| cfg_err(f, e))?;
            }
            ("sensing", "estimator") => {
                self.sensing.estimator = match value {
                    "mf" | "matched-filter" => Estimator::MatchedFilter,
                    "music" => Estimator::Music,
                    "fused" => Estimator::Fused,
                    _ => return Err(HarnessError::config(f, format!("unknown estimator '{value}'"))),
                }
            }
            ("sensing", "targets") => self.sensing.targets = parse_targets(f, value)?,
            ("sensing", "calibration_trials") => self.sensing.calibration_trials = parse(f, value)?,
            ("compensation", "knowledge") => {
                self.compensation.knowledge = match value {
                    "none" => Knowledge::None,
                    "genie" => Knowledge::Genie,
                    "sensed" => Knowledge::Sensed,
                    _ => return Err(HarnessError::config(f, format!("unknown knowledge mode '{value}'"))),
                }
            }
            ("compensation", "kind") => {
                self.compensation.kind = match value {
                    "identity" => CompensatorKind::Identity,
                    "full" => CompensatorKind::FullInverse,
                    "ici" => CompensatorKind::IciOnly,
                    _ => return Err(HarnessError::config(f, format!("unknown compensator '{value}'"))),
                }
            }
            ("compensation", "gain_db") => self.compensation.gain_db = parse(f, value)?,
            ("compensation", "sensing_rho") => self.compensation.sensing_rho = parse(f, value)?,
            ("compensation", "gain_from") => self.compensation.gain_from = Some(PathBuf::from(value)),
            ("output", "dir") => self.out = PathBuf::from(value),
            _ => return Err(HarnessError::config(f, "unknown key")),
        }
        Ok(())
    }

    /// Resolved configuration in the file format, for run manifests.
    pub fn to_manifest(&self) -> String {
        let w = &self.waveform;
        let c = &self.channel;
        let s = &self.sweep;
        let g = &self.sensing.grid;
        let list = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ");
        let (model, k) = match c.model {
            ChannelModel::LineOfSight => ("los", None),
            ChannelModel::Rician { k_factor } => ("rician", Some(k_factor)),
            ChannelModel::Rayleigh => ("rayleigh", None),
        };
        let mut out = String::new();
        let mut line = |s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        line(format!("# experiment {} at {:?} scale", self.experiment.id(), self.scale).to_lowercase());
        line("[waveform]".into());
        line(format!("carrier = {}", w.carrier));
        line(format!("subcarriers = {}", w.subcarriers));
        line(format!("group_size = {}", w.group_size));
        line(format!("active = {}", w.active));
        line(format!("modulation = {}", w.modulation));
        line(format!("symbols = {}", w.symbols));
        line(format!("cyclic_prefix = {}", w.cyclic_prefix));
        line(format!("symbol_duration = {}", w.symbol_duration));
        line(format!("subcarrier_spacing = {}", w.subcarrier_spacing));
        line(format!("transmit_power = {}", w.transmit_power));
        line("\n[channel]".into());
        line(format!("model = {model}"));
        if let Some(k) = k {
            line(format!("k_factor = {k}"));
        }
        line(format!("paths = {}", c.paths));
        line(format!("taps = {}", c.taps));
        line(format!("velocity_std = {}", c.velocity_std));
        line(format!("doppler = {}", if c.doppler { "on" } else { "off" }));
        line(format!("coupled = {}", if c.coupled { "on" } else { "off" }));
        line("\n[sweep]".into());
        line(format!("snr_db = {}", list(&s.snr_db)));
        line(format!("rho = {}", list(&s.rho)));
        line(format!(
            "waveforms = {}",
            s.waveforms.iter().map(|w| w.key()).collect::<Vec<_>>().join(", ")
        ));
        line(format!("trials = {}", s.trials));
        line(format!("frames_per_trial = {}", s.frames_per_trial));
        line(format!("seed = {}", s.seed));
        line("\n[sensing]".into());
        line(format!("range = {}, {}, {}", g.range_min, g.range_max, g.ranges().len()));
        line(format!("velocity = {}, {}, {}", g.velocity_min, g.velocity_max, g.velocities().len()));
        line(format!(
            "estimator = {}",
            match self.sensing.estimator {
                Estimator::MatchedFilter => "mf",
                Estimator::Music => "music",
                Estimator::Fused => "fused",
            }
        ));
        line(format!(
            "targets = {}",
            self.sensing.targets.iter().map(|(r, v)| format!("{r}:{v}")).collect::<Vec<_>>().join(", ")
        ));
        line(format!("calibration_trials = {}", self.sensing.calibration_trials));
        line("\n[compensation]".into());
        line(format!(
            "knowledge = {}",
            match self.compensation.knowledge {
                Knowledge::None => "none",
                Knowledge::Genie => "genie",
                Knowledge::Sensed => "sensed",
            }
        ));
        line(format!(
            "kind = {}",
            match self.compensation.kind {
                CompensatorKind::Identity => "identity",
                CompensatorKind::FullInverse => "full",
                CompensatorKind::IciOnly => "ici",
            }
        ));
        line(format!("gain_db = {}", self.compensation.gain_db));
        line(format!("sensing_rho = {}", self.compensation.sensing_rho));
        if let Some(p) = &self.compensation.gain_from {
            line(format!("gain_from = {}", p.display()));
        }
        line("\n[output]".into());
        line(format!("dir = {}", self.out.display()));
        out
    }
}

fn cfg_err(field: &str, e: impl fmt::Display) -> HarnessError {
    HarnessError::config(field, e.to_string())
}

fn parse<T: FromStr>(field: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e: T::Err| HarnessError::config(field, format!("'{value}': {e}")))
}

fn parse_list(field: &str, value: &str) -> Result<Vec<f64>> {
    value.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse(field, s.trim())).collect()
}

fn parse_switch(field: &str, value: &str) -> Result<bool> {
    match value {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        _ => Err(HarnessError::config(field, format!("expected on/off, got '{value}'"))),
    }
}

fn parse_axis(field: &str, value: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(HarnessError::config(field, "expected 'min, max, points'"));
    }
    Ok((parse(field, parts[0])?, parse(field, parts[1])?, parse(field, parts[2])?))
}

fn parse_targets(field: &str, value: &str) -> Result<Vec<(f64, f64)>> {
    value
        .split(',')
        .map(|t| {
            let (r, v) = t
                .trim()
                .split_once(':')
                .ok_or_else(|| HarnessError::config(field, format!("expected 'range:velocity', got '{t}'")))?;
            Ok((parse(field, r.trim())?, parse(field, v.trim())?))
        })
        .collect()
}

pub fn parse_model(field: &str, value: &str, k_factor: f64) -> Result<ChannelModel> {
    match value {
        "los" => Ok(ChannelModel::LineOfSight),
        "rician" => Ok(ChannelModel::Rician { k_factor }),
        "rayleigh" => Ok(ChannelModel::Rayleigh),
        _ => Err(HarnessError::config(field, format!("unknown channel model '{value}'"))),
    }
}

pub fn parse_waveform(field: &str, value: &str) -> Result<WaveformKind> {
    match value {
        "ofdm" => Ok(WaveformKind::Ofdm),
        "im" | "im-ofdm" => Ok(WaveformKind::Im),
        "sim" | "s-im-ofdm" => Ok(WaveformKind::Sim),
        _ => Err(HarnessError::config(field, format!("unknown waveform '{value}'"))),
    }
}
