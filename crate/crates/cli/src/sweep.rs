use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qbench_core::benchmarks::{
    generate_batch, generate_qrl_ansatz, AnsatzConfig, BenchmarkInstance, BenchmarkParams, Entangler, Family,
};
use qbench_core::circuit::{algorithmic_depth, normalized_depth};
use qbench_core::distributed::{partitioned_run, DistConfig, RankStats};
use qbench_core::metrics::{
    aggregate_sweep, fidelity_report, fidelity_svg, jsonl, sweep_csv, timings_csv, volumetric_csv, InstanceResult,
    InstanceTimings, Series, SweepRecord,
};
use qbench_core::noise::{lower_for_noise, sample_noise_model, NoiseModel};
use qbench_core::{Counts, ExactDistribution, Simulator64};

use crate::config::{Engine, SweepConfig};
use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const INSTANCES_FILE: &str = "instances.jsonl";

/// One executed instance as persisted: enough to recompute its fidelity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub index: usize,
    pub params: BenchmarkParams,
    pub shots_seed: u64,
    pub expected: ExactDistribution,
    pub result: InstanceResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthFailure {
    pub width: usize,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Completion record of a sweep; written last.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: SweepConfig,
    pub noise_model: Option<NoiseModel>,
    pub records: Vec<SweepRecord>,
    pub failures: Vec<WidthFailure>,
    pub files: Vec<FileEntry>,
    pub versions: BTreeMap<String, String>,
    pub started_unix_secs: u64,
    pub finished_unix_secs: u64,
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn io(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| io(path, e))
}

/// Write via a temporary name so a reader never sees a half-written file.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    write(&tmp, contents)?;
    fs::rename(&tmp, path).map_err(|e| io(path, e))
}

pub fn file_entry(dir: &Path, rel: &str) -> Result<FileEntry, CliError> {
    let path = dir.join(rel);
    let bytes = fs::read(&path).map_err(|e| io(&path, e))?;
    Ok(FileEntry { path: rel.to_string(), sha256: hex::encode(Sha256::digest(&bytes)), bytes: bytes.len() as u64 })
}

/// The instances of one width, in generation order.
pub fn instances_for(config: &SweepConfig, width: usize) -> Result<Vec<BenchmarkInstance>, CliError> {
    if config.benchmark != Family::QrlAnsatz {
        return Ok(generate_batch(config.benchmark, width, config.max_circuits, config.dynamic, config.seed)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(width as u64);
    let states: Vec<u64> = match config.init_state {
        Some(s) => vec![s; config.max_circuits],
        None => {
            let space = 1usize << width.min(24);
            let mut ks: Vec<u64> =
                rand::seq::index::sample(&mut rng, space, config.max_circuits.min(space)).into_iter().map(|k| k as u64).collect();
            ks.sort_unstable();
            ks
        }
    };
    states
        .into_iter()
        .map(|input_state| {
            let params = (0..AnsatzConfig::param_count(width, config.num_layers)).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
            let ansatz = AnsatzConfig {
                n_qubits: width,
                n_layers: config.num_layers,
                n_measurements: config.n_measurements.unwrap_or(width).min(width),
                data_reupload: config.data_reupload,
                input_state,
                entangler: Entangler::Chain,
                params,
            };
            Ok(generate_qrl_ansatz(&ansatz)?)
        })
        .collect()
}

struct Executed {
    record: InstanceRecord,
    ranks: Option<Vec<RankStats>>,
}

fn execute(
    config: &SweepConfig,
    noise: Option<&NoiseModel>,
    width: usize,
    index: usize,
    inst: &BenchmarkInstance,
    creation_secs: f64,
    shots_seed: u64,
) -> Result<Executed, CliError> {
    let grid = config.grid();
    let start = Instant::now();
    let sim = Simulator64::default();
    let (counts, execute_secs, ranks): (Counts, f64, Option<Vec<RankStats>>) = match (config.engine, noise) {
        (Engine::Serial, None) => {
            let (c, t) = sim.run_shots(&inst.circuit, config.num_shots, shots_seed, None)?;
            (c, t.execute_secs, None)
        }
        (Engine::Serial, Some(model)) => {
            let (lowered, bound) = lower_for_noise(&inst.circuit, model, &grid)?;
            let (c, t) = sim.run_shots(&lowered, config.num_shots, shots_seed, Some(&bound))?;
            (c, t.execute_secs, None)
        }
        (Engine::Partitioned, _) => {
            let dist = DistConfig { workers: config.workers, transport: config.transport };
            let run = partitioned_run(&inst.circuit, config.num_shots, shots_seed, &dist)?;
            // a serial fallback has no ranks to log
            let ranks = (!run.serial_fallback).then_some(run.ranks);
            (run.counts, run.timing.execute_secs, ranks)
        }
    };
    let elapsed_secs = start.elapsed().as_secs_f64();
    let fidelity = fidelity_report(&counts, &inst.expected)?;
    let result = InstanceResult {
        width,
        name: inst.circuit.name.clone(),
        counts,
        fidelity,
        timings: InstanceTimings { creation_secs, elapsed_secs, execute_secs },
        algorithmic_depth: algorithmic_depth(&inst.circuit)?,
        normalized_depth: normalized_depth(&inst.circuit, &grid)?,
    };
    Ok(Executed {
        record: InstanceRecord { index, params: inst.params.clone(), shots_seed, expected: inst.expected.clone(), result },
        ranks,
    })
}

/// Per-rank statistics of one instance, keyed by instance index.
type RankLog = (usize, Vec<RankStats>);

fn run_width(
    config: &SweepConfig,
    noise: Option<&NoiseModel>,
    width: usize,
) -> Result<(Vec<InstanceRecord>, Vec<RankLog>), CliError> {
    let start = Instant::now();
    let instances = instances_for(config, width)?;
    let creation_secs = start.elapsed().as_secs_f64() / instances.len().max(1) as f64;
    let mut seeds = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5107_5eed);
    seeds.set_stream(width as u64);
    let shot_seeds: Vec<u64> = instances.iter().map(|_| seeds.next_u64()).collect();
    let run = |(i, inst): (usize, &BenchmarkInstance)| execute(config, noise, width, i, inst, creation_secs, shot_seeds[i]);
    // partitioned runs bring their own rank threads
    let executed: Vec<Executed> = match config.engine {
        Engine::Serial => instances.par_iter().enumerate().map(run).collect::<Result<_, _>>()?,
        Engine::Partitioned => instances.iter().enumerate().map(run).collect::<Result<_, _>>()?,
    };
    let mut ranks = Vec::new();
    let records = executed
        .into_iter()
        .map(|e| {
            if let Some(r) = e.ranks {
                ranks.push((e.record.index, r));
            }
            e.record
        })
        .collect();
    Ok((records, ranks))
}

fn bootstrap_seed(config: &SweepConfig, width: usize) -> u64 {
    config.seed.wrapping_add(width as u64)
}

/// Execute the sweep and persist everything under `config.output_dir`.
/// A failing width is recorded and skipped; the manifest is written last.
pub fn run_sweep(config: &SweepConfig) -> Result<RunManifest, CliError> {
    config.check()?;
    let started = unix_now();
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let noise = if config.nonoise {
        None
    } else {
        Some(sample_noise_model(&config.noise, config.grid(), config.noise_seed)?)
    };

    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut instance_rows = Vec::new();
    let mut files = Vec::new();
    for width in config.widths() {
        match run_width(config, noise.as_ref(), width) {
            Ok((rows, ranks)) => {
                let results: Vec<InstanceResult> = rows.iter().map(|r| r.result.clone()).collect();
                records.push(aggregate_sweep(&results, bootstrap_seed(config, width))?);
                for (index, stats) in ranks {
                    let rel = format!("ranks/width-{width:02}-instance-{index:02}.json");
                    write(&dir.join(&rel), &serde_json::to_string_pretty(&stats).expect("rank stats serialise"))?;
                    files.push(rel);
                }
                instance_rows.extend(rows);
            }
            Err(e) => failures.push(WidthFailure { width, error: e.to_string() }),
        }
    }
    write(&dir.join(INSTANCES_FILE), &jsonl(&instance_rows))?;
    files.push(INSTANCES_FILE.to_string());

    let mut manifest = RunManifest {
        config: config.clone(),
        noise_model: noise,
        records,
        failures,
        files: Vec::new(),
        versions: BTreeMap::from([
            ("qbench-cli".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            ("manifest-format".to_string(), "1".to_string()),
        ]),
        started_unix_secs: started,
        finished_unix_secs: 0,
    };
    files.extend(emit_reports(&manifest, dir, &[])?);
    manifest.files = files.iter().map(|f| file_entry(dir, f)).collect::<Result<_, _>>()?;
    manifest.finished_unix_secs = unix_now();
    write_atomic(&dir.join(MANIFEST_FILE), &serde_json::to_string_pretty(&manifest).expect("manifest serialises"))?;
    Ok(manifest)
}

fn series_label(m: &RunManifest) -> String {
    let c = &m.config;
    let mut label = format!("{}{}", c.benchmark, if c.dynamic { " dynamic" } else { "" });
    if !c.nonoise {
        label += if c.noise.crosstalk_enabled { " ZZ crosstalk" } else { " crosstalk-free" };
    }
    label
}

/// Write the report tables of `manifest` (and a chart that also shows
/// `others`) into `dir`; returns the relative file names.
pub fn emit_reports(manifest: &RunManifest, dir: &Path, others: &[&RunManifest]) -> Result<Vec<String>, CliError> {
    let labels: Vec<String> = std::iter::once(manifest).chain(others.iter().copied()).map(series_label).collect();
    let series: Vec<Series<'_>> = std::iter::once(manifest)
        .chain(others.iter().copied())
        .zip(&labels)
        .map(|(m, label)| Series { label, records: &m.records })
        .collect();
    let title = format!("{} fidelity vs width", manifest.config.benchmark);
    let outputs = [
        ("sweep.csv", sweep_csv(&manifest.records)),
        ("sweep.jsonl", jsonl(&manifest.records)),
        ("timings.csv", timings_csv(&manifest.records)),
        ("volumetric.csv", volumetric_csv(&manifest.records)),
        ("fidelity.svg", fidelity_svg(&title, &series)),
    ];
    for (name, body) in &outputs {
        write(&dir.join(name), body)?;
    }
    Ok(outputs.iter().map(|(n, _)| n.to_string()).collect())
}

pub fn load_manifest(dir: &Path) -> Result<RunManifest, CliError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn load_instances(dir: &Path) -> Result<Vec<InstanceRecord>, CliError> {
    let path = dir.join(INSTANCES_FILE);
    let text = fs::read_to_string(&path).map_err(|e| io(&path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| CliError::Config(format!("{}: {e}", path.display()))))
        .collect()
}

/// Problems found when checking a finished run against its manifest.
pub fn verify_run(dir: &Path) -> Result<Vec<String>, CliError> {
    let manifest = load_manifest(dir)?;
    let mut problems = Vec::new();
    for f in &manifest.files {
        match file_entry(dir, &f.path) {
            Ok(now) if now == *f => {}
            Ok(_) => problems.push(format!("{} changed since the run", f.path)),
            Err(e) => problems.push(e.to_string()),
        }
    }
    let rows = load_instances(dir)?;
    let mut by_width: BTreeMap<usize, Vec<InstanceResult>> = BTreeMap::new();
    for row in &rows {
        let again = fidelity_report(&row.result.counts, &row.expected)?;
        if again != row.result.fidelity {
            problems.push(format!("width {} instance {}: fidelity does not recompute", row.result.width, row.index));
        }
        by_width.entry(row.result.width).or_default().push(row.result.clone());
    }
    for rec in &manifest.records {
        let Some(results) = by_width.get(&rec.width) else {
            problems.push(format!("width {} has no instances", rec.width));
            continue;
        };
        let again = aggregate_sweep(results, bootstrap_seed(&manifest.config, rec.width))?;
        if again != *rec {
            problems.push(format!("width {}: sweep record does not recompute", rec.width));
        }
    }
    Ok(problems)
}
