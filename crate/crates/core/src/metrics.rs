//! Result analysis: fidelities, bootstrap error bars, per-width aggregation
//! and report tables.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::{Counts, ExactDistribution};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("readout widths differ: measured {measured}, expected {expected}")]
    WidthMismatch { measured: usize, expected: usize },
    #[error("no shots recorded")]
    NoShots,
    #[error("empty input")]
    Empty,
    #[error("at least {MIN_RESAMPLES} bootstrap resamples are required, got {0}")]
    TooFewResamples(usize),
    #[error("instances span several widths ({0} and {1})")]
    MixedWidths(usize, usize),
}

pub const MIN_RESAMPLES: usize = 1000;

/// `(sum_i sqrt(p_i q_i))^2` between normalised counts and the expectation.
pub fn hellinger_fidelity(measured: &Counts, expected: &ExactDistribution) -> Result<f64, MetricsError> {
    if measured.num_bits != expected.num_bits {
        return Err(MetricsError::WidthMismatch { measured: measured.num_bits, expected: expected.num_bits });
    }
    if measured.shots == 0 {
        return Err(MetricsError::NoShots);
    }
    let total = measured.shots as f64;
    let overlap: f64 = measured
        .counts
        .iter()
        .map(|(k, &n)| ((n as f64 / total) * expected.get(k)).sqrt())
        .sum();
    Ok((overlap * overlap).min(1.0))
}

/// Hellinger fidelity rescaled so that a uniform readout over `d` outcomes
/// scores zero.
pub fn polarization_fidelity(f_h: f64, d: f64) -> f64 {
    let floor = 1.0 / d;
    ((f_h - floor) / (1.0 - floor)).max(0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub hellinger_fidelity: f64,
    pub polarization_fidelity: f64,
    /// Number of readout outcomes, `2^width`.
    pub dimension: f64,
}

pub fn fidelity_report(measured: &Counts, expected: &ExactDistribution) -> Result<FidelityReport, MetricsError> {
    let f = hellinger_fidelity(measured, expected)?;
    let d = 2f64.powi(measured.num_bits as i32).max(2.0);
    Ok(FidelityReport { hellinger_fidelity: f, polarization_fidelity: polarization_fidelity(f, d), dimension: d })
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len().max(1) as f64
}

/// Standard deviation of the mean estimated from `resamples` resamples with
/// replacement.
pub fn bootstrap_std(values: &[f64], resamples: usize, seed: u64) -> Result<f64, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::Empty);
    }
    if resamples < MIN_RESAMPLES {
        return Err(MetricsError::TooFewResamples(resamples));
    }
    if values.iter().all(|&v| v == values[0]) {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = values.len();
    let means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    let m = mean(&means);
    let var = means.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / resamples as f64;
    Ok(var.sqrt())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceTimings {
    /// Generator call.
    pub creation_secs: f64,
    /// Submission to result, including transpilation and sampling.
    pub elapsed_secs: f64,
    /// Simulator inner loop only.
    pub execute_secs: f64,
}

/// Analysed outcome of one executed instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub width: usize,
    pub name: String,
    pub counts: Counts,
    pub fidelity: FidelityReport,
    pub timings: InstanceTimings,
    pub algorithmic_depth: usize,
    pub normalized_depth: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub width: usize,
    pub num_instances: usize,
    pub fidelities: Vec<FidelityReport>,
    pub mean_hellinger: f64,
    pub std_hellinger: f64,
    pub mean_polarization: f64,
    pub std_polarization: f64,
    pub mean_creation_secs: f64,
    pub mean_elapsed_secs: f64,
    pub mean_execute_secs: f64,
    pub mean_algorithmic_depth: f64,
    pub mean_normalized_depth: f64,
}

pub const BOOTSTRAP_RESAMPLES: usize = 2000;

/// Per-width means; fidelity spreads are bootstrap standard deviations.
pub fn aggregate_sweep(results: &[InstanceResult], seed: u64) -> Result<SweepRecord, MetricsError> {
    let first = results.first().ok_or(MetricsError::Empty)?;
    if let Some(other) = results.iter().find(|r| r.width != first.width) {
        return Err(MetricsError::MixedWidths(first.width, other.width));
    }
    let pick = |f: &dyn Fn(&InstanceResult) -> f64| results.iter().map(f).collect::<Vec<_>>();
    let hel = pick(&|r| r.fidelity.hellinger_fidelity);
    let pol = pick(&|r| r.fidelity.polarization_fidelity);
    Ok(SweepRecord {
        width: first.width,
        num_instances: results.len(),
        fidelities: results.iter().map(|r| r.fidelity).collect(),
        mean_hellinger: mean(&hel),
        std_hellinger: bootstrap_std(&hel, BOOTSTRAP_RESAMPLES, seed)?,
        mean_polarization: mean(&pol),
        std_polarization: bootstrap_std(&pol, BOOTSTRAP_RESAMPLES, seed)?,
        mean_creation_secs: mean(&pick(&|r| r.timings.creation_secs)),
        mean_elapsed_secs: mean(&pick(&|r| r.timings.elapsed_secs)),
        mean_execute_secs: mean(&pick(&|r| r.timings.execute_secs)),
        mean_algorithmic_depth: mean(&pick(&|r| r.algorithmic_depth as f64)),
        mean_normalized_depth: mean(&pick(&|r| r.normalized_depth as f64)),
    })
}

pub const SWEEP_CSV_HEADER: &str = "width,instances,mean_hellinger,std_hellinger,mean_polarization,std_polarization,mean_algorithmic_depth,mean_normalized_depth";
pub const TIMINGS_CSV_HEADER: &str = "width,mean_creation_secs,mean_elapsed_secs,mean_execute_secs";
pub const VOLUMETRIC_CSV_HEADER: &str = "width,depth,fidelity";

/// Fidelity and depth table. Contains no timings, so reruns with the same
/// seed are byte-identical.
pub fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut out = format!("{SWEEP_CSV_HEADER}\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.3},{:.3}",
            r.width,
            r.num_instances,
            r.mean_hellinger,
            r.std_hellinger,
            r.mean_polarization,
            r.std_polarization,
            r.mean_algorithmic_depth,
            r.mean_normalized_depth
        );
    }
    out
}

pub fn timings_csv(records: &[SweepRecord]) -> String {
    let mut out = format!("{TIMINGS_CSV_HEADER}\n");
    for r in records {
        let _ = writeln!(out, "{},{:.6e},{:.6e},{:.6e}", r.width, r.mean_creation_secs, r.mean_elapsed_secs, r.mean_execute_secs);
    }
    out
}

/// Width, normalised depth, polarization fidelity per width.
pub fn volumetric_csv(records: &[SweepRecord]) -> String {
    let mut out = format!("{VOLUMETRIC_CSV_HEADER}\n");
    for r in records {
        let _ = writeln!(out, "{},{:.3},{:.6}", r.width, r.mean_normalized_depth, r.mean_polarization);
    }
    out
}

pub fn jsonl<T: Serialize>(rows: &[T]) -> String {
    rows.iter().map(|r| serde_json::to_string(r).expect("serialisable row") + "\n").collect()
}

/// One line of the fidelity chart.
pub struct Series<'a> {
    pub label: &'a str,
    pub records: &'a [SweepRecord],
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Self-contained SVG of mean polarization fidelity against width, one
/// polyline per series with bootstrap error bars.
pub fn fidelity_svg(title: &str, series: &[Series<'_>]) -> String {
    let (w, h, m) = (640.0, 400.0, 56.0);
    let widths = series.iter().flat_map(|s| s.records.iter().map(|r| r.width));
    let (lo, hi) = widths.fold((usize::MAX, 0), |(lo, hi), x| (lo.min(x), hi.max(x)));
    let (lo, hi) = if lo > hi { (0, 1) } else { (lo, hi.max(lo + 1)) };
    let x = |width: usize| m + (width - lo) as f64 / (hi - lo) as f64 * (w - 2.0 * m);
    let y = |f: f64| h - m - f.clamp(0.0, 1.0) * (h - 2.0 * m);

    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(out, r#"<line x1="{m}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, h - m, w - m, h - m);
    let _ = writeln!(out, r#"<line x1="{m}" y1="{m}" x2="{m}" y2="{}" stroke="black"/>"#, h - m);
    for width in lo..=hi {
        let _ = writeln!(out, r#"<text x="{:.1}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{width}</text>"#, x(width), h - m + 16.0);
    }
    for tick in 0..=4 {
        let f = tick as f64 / 4.0;
        let _ = writeln!(out, r#"<text x="{}" y="{:.1}" text-anchor="end" font-family="sans-serif" font-size="11">{f:.2}</text>"#, m - 6.0, y(f) + 4.0);
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">qubits</text>"#, w / 2.0, h - 14.0);
    let _ = writeln!(out, r#"<text x="16" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {})">polarization fidelity</text>"#, h / 2.0, h / 2.0);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> =
            s.records.iter().map(|r| format!("{:.1},{:.1}", x(r.width), y(r.mean_polarization))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, points.join(" "));
        for r in s.records {
            let (cx, top, bot) = (x(r.width), y(r.mean_polarization + r.std_polarization), y(r.mean_polarization - r.std_polarization));
            let _ = writeln!(out, r#"<line x1="{cx:.1}" y1="{top:.1}" x2="{cx:.1}" y2="{bot:.1}" stroke="{color}"/>"#);
            let _ = writeln!(out, r#"<circle cx="{cx:.1}" cy="{:.1}" r="3" fill="{color}"/>"#, y(r.mean_polarization));
        }
        let ly = m + 16.0 * i as f64;
        let _ = writeln!(out, r#"<text x="{}" y="{ly:.1}" font-family="sans-serif" font-size="12" fill="{color}">{}</text>"#, w - m - 120.0, escape(s.label));
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
