use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use simofdm::config::{parse_model, parse_waveform};
use simofdm::output::{emit_results, series};
use simofdm::{ber, demo, rmse, selftest, sinr};
use simofdm::{Experiment, ExperimentConfig, HarnessError, ResultRow, Result, Scale};

#[derive(Parser)]
#[command(name = "simofdm", version, about = "S-IM-OFDM link-level experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// BER against SNR for OFDM, IM-OFDM and S-IM-OFDM.
    Ber(Common),
    /// Range/velocity RMSE of the matched filter, MUSIC and their fusion.
    Rmse(Common),
    /// Minimum SINR against the power split, with ρ* and ρ_max per channel draw.
    Sinr(Common),
    /// Cramér-Rao bounds next to matched-filter accuracy.
    Crlb(Common),
    /// A small end-to-end run: sensing, then decoding with and without compensation.
    Demo(Common),
    /// Invariant checks of the whole pipeline.
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Paper,
    Desk,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct Common {
    /// Config file of `[section]` and `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "desk")]
    scale: ScaleArg,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Power splits, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    rho: Option<Vec<f64>>,
    /// SNR points (dB), comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    snr: Option<Vec<f64>>,
    /// los, rician or rayleigh.
    #[arg(long)]
    channel: Option<String>,
    #[arg(long, value_enum)]
    doppler: Option<Switch>,
    /// ofdm, im or sim, comma separated.
    #[arg(long, value_delimiter = ',')]
    waveform: Option<Vec<String>>,
    /// Monte Carlo trials per point.
    #[arg(long)]
    trials: Option<usize>,
    /// Also write an SVG line chart.
    #[arg(long)]
    svg: bool,
}

/// Preset, then Doppler-dependent defaults, then the config file, then flags.
fn resolve(experiment: Experiment, args: &Common) -> Result<ExperimentConfig> {
    let scale = match args.scale {
        ScaleArg::Paper => Scale::Paper,
        ScaleArg::Desk => Scale::Desk,
    };
    let mut cfg = ExperimentConfig::preset(experiment, scale);
    let text = match &args.config {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|e| HarnessError::io(p, e))?),
        None => None,
    };
    let doppler = match args.doppler {
        Some(s) => Some(matches!(s, Switch::On)),
        None => match &text {
            Some(t) => {
                let mut probe = cfg.clone();
                probe.load_str(t)?;
                (probe.channel.doppler != cfg.channel.doppler).then_some(probe.channel.doppler)
            }
            None => None,
        },
    };
    if let Some(on) = doppler {
        cfg.set_doppler(on);
    }
    if let Some(t) = &text {
        cfg.load_str(t)?;
    }
    if let Some(on) = doppler {
        cfg.channel.doppler = on;
    }
    if let Some(seed) = args.seed {
        cfg.sweep.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }
    if let Some(rho) = &args.rho {
        cfg.sweep.rho = rho.clone();
    }
    if let Some(snr) = &args.snr {
        cfg.sweep.snr_db = snr.clone();
    }
    if let Some(model) = &args.channel {
        cfg.channel.model = parse_model("--channel", model, 2.0)?;
    }
    if let Some(w) = &args.waveform {
        cfg.sweep.waveforms = w.iter().map(|s| parse_waveform("--waveform", s)).collect::<Result<_>>()?;
    }
    if let Some(t) = args.trials {
        cfg.sweep.trials = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(experiment: Experiment, args: &Common) -> Result<()> {
    let cfg = resolve(experiment, args)?;
    let start = Instant::now();
    let (name, rows): (String, Vec<ResultRow>) = match experiment {
        Experiment::Ber => (ber::experiment_id(&cfg), ber::run_ber_sweep(&cfg)?),
        Experiment::Rmse => ("rmse".into(), rmse::run_rmse_sweep(&cfg)?),
        Experiment::Sinr => {
            let mode = if cfg.channel.doppler { "tv" } else { "static" };
            (format!("sinr-{mode}"), sinr::run_sinr_report(&cfg)?)
        }
        Experiment::Crlb => ("crlb".into(), rmse::run_crlb_sweep(&cfg)?),
        Experiment::Demo => ("demo".into(), demo::run_demo(&cfg)?),
    };
    let manifest = format!(
        "# simofdm {} ({})\n# seed {}\n{}",
        env!("CARGO_PKG_VERSION"),
        std::env::args().collect::<Vec<_>>().join(" "),
        cfg.sweep.seed,
        cfg.to_manifest()
    );
    let files = emit_results(&rows, &cfg.out, &name, &manifest, args.svg)?;
    for s in series(&rows) {
        if s.label.contains("-draw") {
            continue;
        }
        let pts: Vec<String> = s.points.iter().map(|(x, y)| format!("{x}:{y:.3e}")).collect();
        println!("{}  {}", s.label, pts.join(" "));
    }
    eprintln!("wrote {} in {:.1} s", files.results.display(), start.elapsed().as_secs_f64());
    Ok(())
}

fn selftest() -> ExitCode {
    let checks = selftest::run_selftest();
    for c in &checks {
        println!("{} {:<32} {:>6.2} s  {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.seconds, c.detail);
    }
    if checks.iter().all(|c| c.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // bad arguments are configuration errors
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let (experiment, args) = match &cli.command {
        Command::Ber(a) => (Experiment::Ber, a),
        Command::Rmse(a) => (Experiment::Rmse, a),
        Command::Sinr(a) => (Experiment::Sinr, a),
        Command::Crlb(a) => (Experiment::Crlb, a),
        Command::Demo(a) => (Experiment::Demo, a),
        Command::Selftest => return selftest(),
    };
    match run(experiment, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
