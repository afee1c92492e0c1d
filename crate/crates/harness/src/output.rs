//! Result rows and the files they are written to.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};

pub const CSV_HEADER: [&str; 8] = ["experiment", "waveform", "rho", "snr_db", "metric", "value", "trials", "seed"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Ber,
    RmseRange,
    RmseVelocity,
    CrlbRange,
    CrlbVelocity,
    /// Fraction of (target, trial) pairs left out of an RMSE as divergent.
    Exclusion,
    SinrMin,
    RhoStar,
    RhoMax,
    GainDb,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Ber => "BER",
            Metric::RmseRange => "RMSE_r",
            Metric::RmseVelocity => "RMSE_v",
            Metric::CrlbRange => "CRLB_r",
            Metric::CrlbVelocity => "CRLB_v",
            Metric::Exclusion => "exclusion_rate",
            Metric::SinrMin => "SINR_min",
            Metric::RhoStar => "rho_star",
            Metric::RhoMax => "rho_max",
            Metric::GainDb => "G_c",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            Metric::Ber,
            Metric::RmseRange,
            Metric::RmseVelocity,
            Metric::CrlbRange,
            Metric::CrlbVelocity,
            Metric::Exclusion,
            Metric::SinrMin,
            Metric::RhoStar,
            Metric::RhoMax,
            Metric::GainDb,
        ]
        .into_iter()
        .find(|m| m.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub waveform: String,
    pub rho: f64,
    pub snr_db: f64,
    pub metric: Metric,
    pub value: f64,
    pub trials: usize,
    pub seed: u64,
}

impl ResultRow {
    fn cmp_key(&self, other: &Self) -> Ordering {
        self.experiment
            .cmp(&other.experiment)
            .then_with(|| self.waveform.cmp(&other.waveform))
            .then_with(|| self.rho.total_cmp(&other.rho))
            .then_with(|| self.snr_db.total_cmp(&other.snr_db))
            .then_with(|| self.metric.name().cmp(other.metric.name()))
            .then_with(|| self.value.total_cmp(&other.value))
            .then_with(|| self.trials.cmp(&other.trials))
            .then_with(|| self.seed.cmp(&other.seed))
    }
}

pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(ResultRow::cmp_key);
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |e| HarnessError::io(path, e)
}

fn csv_err(path: &Path, e: csv::Error) -> HarnessError {
    let kind = std::io::ErrorKind::Other;
    HarnessError::io(path, std::io::Error::new(kind, e.to_string()))
}

/// Write rows, sorted, as CSV with the fixed header.
pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(HarnessError::config("results", "no rows to write"));
    }
    if let Some(r) = rows.iter().find(|r| !(r.value.is_finite() && r.value >= 0.0)) {
        return Err(simofdm_core::Error::Numerical(format!(
            "{} {} at rho {} snr {} is {}",
            r.experiment,
            r.metric.name(),
            r.rho,
            r.snr_db,
            r.value
        ))
        .into());
    }
    let mut sorted = rows.to_vec();
    sort_rows(&mut sorted);
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(CSV_HEADER).map_err(|e| csv_err(path, e))?;
    for r in &sorted {
        w.write_record([
            r.experiment.clone(),
            r.waveform.clone(),
            r.rho.to_string(),
            r.snr_db.to_string(),
            r.metric.name().to_string(),
            r.value.to_string(),
            r.trials.to_string(),
            r.seed.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io(path))
}

/// Read rows back from a results CSV.
pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header: Vec<String> = r.headers().map_err(|e| csv_err(path, e))?.iter().map(String::from).collect();
    if header != CSV_HEADER {
        return Err(HarnessError::config(path.display().to_string(), "unexpected CSV header"));
    }
    let bad = |what: &str| HarnessError::config(path.display().to_string(), format!("malformed {what}"));
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let num = |i: usize| rec[i].parse::<f64>().map_err(|_| bad(CSV_HEADER[i]));
        rows.push(ResultRow {
            experiment: rec[0].to_string(),
            waveform: rec[1].to_string(),
            rho: num(2)?,
            snr_db: num(3)?,
            metric: Metric::from_name(&rec[4]).ok_or_else(|| bad("metric"))?,
            value: num(5)?,
            trials: rec[6].parse().map_err(|_| bad("trials"))?,
            seed: rec[7].parse().map_err(|_| bad("seed"))?,
        });
    }
    Ok(rows)
}

/// One plotted line: rows sharing everything but the SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub metric: Metric,
    pub points: Vec<(f64, f64)>,
}

pub fn series(rows: &[ResultRow]) -> Vec<Series> {
    let label = |r: &ResultRow| format!("{}/{}/rho={}/{}", r.experiment, r.waveform, r.rho, r.metric.name());
    let mut sorted = rows.to_vec();
    sort_rows(&mut sorted);
    // stable, so points stay in SNR order within a series
    sorted.sort_by(|a, b| {
        (&a.experiment, &a.waveform, a.metric.name())
            .cmp(&(&b.experiment, &b.waveform, b.metric.name()))
            .then(a.rho.total_cmp(&b.rho))
    });
    let mut out: Vec<Series> = Vec::new();
    for r in sorted {
        let label = label(&r);
        match out.last_mut() {
            Some(s) if s.label == label => s.points.push((r.snr_db, r.value)),
            _ => out.push(Series { label, metric: r.metric, points: vec![(r.snr_db, r.value)] }),
        }
    }
    out
}

/// Plot data as `series,snr_db,value` lines.
pub fn write_plot_data(rows: &[ResultRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["series", "snr_db", "value"]).map_err(|e| csv_err(path, e))?;
    for s in series(rows) {
        for (x, y) in &s.points {
            w.write_record([s.label.as_str(), &x.to_string(), &y.to_string()]).map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(io(path))
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Line chart of every series with more than one point, value on a log axis
/// when all values are positive.
pub fn render_svg(rows: &[ResultRow], title: &str) -> String {
    let lines: Vec<Series> = series(rows).into_iter().filter(|s| s.points.len() > 1).collect();
    let (w, h, pad) = (720.0, 480.0, 60.0);
    let pts = || lines.iter().flat_map(|s| s.points.iter().copied());
    let log = pts().all(|(_, y)| y > 0.0);
    let ty = |y: f64| if log { y.log10() } else { y };
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in pts() {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(ty(y));
        y1 = y1.max(ty(y));
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (ty(y) - y0) / (y1 - y0) * (h - 2.0 * pad);
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(
        svg,
        r#"<path d="M{pad} {pad} V{} H{}" fill="none" stroke="black"/>"#,
        h - pad,
        w - pad
    );
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">SNR (dB)</text>"#, w / 2.0, h - 20.0);
    let _ = writeln!(svg, r#"<text x="{pad}" y="{}" text-anchor="middle">{x0}</text>"#, h - pad + 15.0);
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{x1}</text>"#, w - pad, h - pad + 15.0);
    let fmt_y = |v: f64| if log { format!("1e{v:.1}") } else { format!("{v:.3}") };
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, pad - 4.0, h - pad, fmt_y(y0));
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, pad - 4.0, pad + 4.0, fmt_y(y1));
    for (i, s) in lines.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let d: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#, d.join(" "));
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{colour}">{}</text>"#,
            w - pad - 200.0,
            pad + 14.0 * i as f64,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Paths of everything one run writes into `dir`.
#[derive(Debug, Clone)]
pub struct RunFiles {
    pub results: PathBuf,
    pub plot_data: PathBuf,
    pub manifest: PathBuf,
    pub svg: Option<PathBuf>,
}

/// Write results, plot data, the manifest and optionally an SVG chart for
/// experiment `name` into `dir`.
pub fn emit_results(rows: &[ResultRow], dir: &Path, name: &str, manifest: &str, svg: bool) -> Result<RunFiles> {
    fs::create_dir_all(dir).map_err(io(dir))?;
    let files = RunFiles {
        results: dir.join(format!("{name}.csv")),
        plot_data: dir.join(format!("{name}.plot.csv")),
        manifest: dir.join(format!("{name}.manifest")),
        svg: svg.then(|| dir.join(format!("{name}.svg"))),
    };
    write_csv(rows, &files.results)?;
    write_plot_data(rows, &files.plot_data)?;
    fs::write(&files.manifest, manifest).map_err(io(&files.manifest))?;
    if let Some(p) = &files.svg {
        fs::write(p, render_svg(rows, name)).map_err(io(p))?;
    }
    Ok(files)
}
