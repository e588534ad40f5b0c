use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use qbench_core::benchmarks::Family;
use qbench_core::distributed::TransportKind;
use qbench_qrl::{train, OptimizerKind, TrainConfig};

use crate::config::{Engine, SweepConfig};
use crate::sweep::{emit_reports, load_manifest, run_sweep, verify_run, RunManifest};
use crate::verify::invariant_suite;
use crate::CliError;

#[derive(Parser, Debug)]
#[command(name = "qbench", version, about = "Application-oriented benchmarks on a built-in statevector simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sweep a benchmark family over circuit widths.
    Run(RunArgs),
    /// Train the quantum Q-network on FrozenLake.
    #[command(name = "qrl-train")]
    QrlTrain(TrainArgs),
    /// Rewrite the report files of a finished run.
    Report(ReportArgs),
    /// Run the invariant suite, and check a finished run if one is given.
    Verify(VerifyArgs),
}

/// `--flag`, `--flag true` and `--flag false` all parse.
macro_rules! bool_flag {
    () => {
        clap::ArgAction::Set
    };
}

#[derive(Args, Debug, Default)]
pub struct RunArgs {
    /// TOML file with any of the settings below; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub benchmark: Option<Family>,
    #[arg(long = "min_qubits")]
    pub min_qubits: Option<usize>,
    #[arg(long = "max_qubits")]
    pub max_qubits: Option<usize>,
    #[arg(long = "skip_qubits")]
    pub skip_qubits: Option<usize>,
    #[arg(long = "max_circuits")]
    pub max_circuits: Option<usize>,
    #[arg(long = "num_layers")]
    pub num_layers: Option<usize>,
    #[arg(long = "init_state")]
    pub init_state: Option<u64>,
    #[arg(long = "n_measurements")]
    pub n_measurements: Option<usize>,
    #[arg(long = "num_shots")]
    pub num_shots: Option<u64>,
    #[arg(long = "data_reupload", num_args = 0..=1, default_missing_value = "true", action = bool_flag!())]
    pub data_reupload: Option<bool>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true", action = bool_flag!())]
    pub nonoise: Option<bool>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true", action = bool_flag!())]
    pub dynamic: Option<bool>,
    /// Enable ZZ crosstalk in the noise model.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", action = bool_flag!())]
    pub crosstalk: Option<bool>,
    #[arg(long = "sigma_h")]
    pub sigma_h: Option<f64>,
    #[arg(long = "s_max")]
    pub s_max: Option<f64>,
    #[arg(long = "h_zz")]
    pub h_zz: Option<f64>,
    #[arg(long = "noise_seed")]
    pub noise_seed: Option<u64>,
    #[arg(long = "grid_rows")]
    pub grid_rows: Option<usize>,
    #[arg(long = "grid_cols")]
    pub grid_cols: Option<usize>,
    #[arg(long, value_enum)]
    pub engine: Option<Engine>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// channel or tcp
    #[arg(long)]
    pub transport: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "output_dir")]
    pub output_dir: Option<PathBuf>,
}

impl RunArgs {
    pub fn resolve(&self) -> Result<SweepConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => SweepConfig::from_toml_file(p)?,
            None => SweepConfig::default(),
        };
        macro_rules! take {
            ($($f:ident),*) => {$( if let Some(v) = self.$f.clone() { c.$f = v; } )*};
        }
        take!(benchmark, min_qubits, max_qubits, skip_qubits, max_circuits, num_layers, num_shots, data_reupload);
        take!(nonoise, dynamic, noise_seed, grid_rows, grid_cols, engine, workers, seed, output_dir);
        if self.init_state.is_some() {
            c.init_state = self.init_state;
        }
        if self.n_measurements.is_some() {
            c.n_measurements = self.n_measurements;
        }
        if let Some(x) = self.crosstalk {
            c.noise.crosstalk_enabled = x;
        }
        if let Some(x) = self.sigma_h {
            c.noise.sigma_h = x;
        }
        if let Some(x) = self.s_max {
            c.noise.s_max = x;
        }
        if let Some(x) = self.h_zz {
            c.noise.h_zz = x;
        }
        if let Some(t) = &self.transport {
            c.transport = match t.as_str() {
                "channel" => TransportKind::Channel,
                "tcp" => TransportKind::Tcp,
                _ => return Err(CliError::Config(format!("unknown transport `{t}` (channel, tcp)"))),
            };
        }
        c.check()?;
        Ok(c)
    }
}

#[derive(Args, Debug, Default)]
pub struct TrainArgs {
    /// TOML file with any of the settings below; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Starting point before the file and flags: `cost` or `learning`.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub optimizer: Option<OptimizerKind>,
    #[arg(long = "num_layers")]
    pub num_layers: Option<usize>,
    #[arg(long = "n_measurements")]
    pub n_measurements: Option<usize>,
    /// 0 selects exact expectations.
    #[arg(long = "num_shots")]
    pub num_shots: Option<u64>,
    #[arg(long = "data_reupload", num_args = 0..=1, default_missing_value = "true", action = bool_flag!())]
    pub data_reupload: Option<bool>,
    #[arg(long = "total_steps")]
    pub total_steps: Option<u64>,
    #[arg(long = "learning_start")]
    pub learning_start: Option<u64>,
    #[arg(long = "params_update")]
    pub params_update: Option<u64>,
    #[arg(long = "target_update")]
    pub target_update: Option<u64>,
    #[arg(long = "batch_size")]
    pub batch_size: Option<usize>,
    #[arg(long = "exploration_fraction")]
    pub exploration_fraction: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true", action = bool_flag!())]
    pub nonoise: Option<bool>,
    #[arg(long = "map_size")]
    pub map_size: Option<usize>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Where the step log and statistics go; console only if unset.
    #[arg(long = "output_dir")]
    pub output_dir: Option<PathBuf>,
}

impl TrainArgs {
    pub fn resolve(&self) -> Result<TrainConfig, CliError> {
        let optimizer = self.optimizer.unwrap_or(OptimizerKind::Adam);
        let mut c = match self.preset.as_deref() {
            None | Some("cost") => TrainConfig::cost_preset(optimizer),
            Some("learning") => TrainConfig::learning_preset(),
            Some(p) => return Err(CliError::Config(format!("unknown preset `{p}` (cost, learning)"))),
        };
        if let Some(p) = &self.config {
            let text = fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            // the file overrides the preset field by field
            let mut merged = toml::Table::try_from(&c).map_err(|e| CliError::Config(e.to_string()))?;
            let file: toml::Table = toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
            merged.extend(file);
            c = merged.try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        }
        macro_rules! take {
            ($($f:ident),*) => {$( if let Some(v) = self.$f.clone() { c.$f = v; } )*};
        }
        take!(optimizer, num_layers, n_measurements, num_shots, data_reupload, total_steps, learning_start);
        take!(params_update, target_update, batch_size, exploration_fraction, tau, nonoise, map_size, gamma, seed);
        c.check()?;
        Ok(c)
    }
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Output directory of a finished run.
    pub run_dir: PathBuf,
    /// Further runs drawn as extra series in the chart.
    #[arg(long)]
    pub compare: Vec<PathBuf>,
    /// Defaults to the run directory.
    #[arg(long = "output_dir")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Also check this finished run against its manifest.
    pub run_dir: Option<PathBuf>,
}

fn print_manifest(m: &RunManifest) {
    println!("{:>5} {:>9} {:>10} {:>10} {:>8} {:>8}", "width", "instances", "hellinger", "polarized", "depth", "ndepth");
    for r in &m.records {
        println!(
            "{:>5} {:>9} {:>10.4} {:>10.4} {:>8.1} {:>8.1}",
            r.width, r.num_instances, r.mean_hellinger, r.mean_polarization, r.mean_algorithmic_depth, r.mean_normalized_depth
        );
    }
    for f in &m.failures {
        eprintln!("width {} failed: {}", f.width, f.error);
    }
}

fn dispatch(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Run(args) => {
            let config = args.resolve()?;
            let manifest = run_sweep(&config)?;
            print_manifest(&manifest);
            println!("results in {}", config.output_dir.display());
            Ok(if manifest.failures.is_empty() { 0 } else { 1 })
        }
        Command::QrlTrain(args) => {
            let config = args.resolve()?;
            let stats = train(&config)?;
            println!("{}", stats.summary());
            if let Some(dir) = &args.output_dir {
                fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
                let put = |name: &str, body: String| {
                    let p = dir.join(name);
                    fs::write(&p, body).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
                };
                put("qrl_steps.jsonl", stats.steps_jsonl())?;
                let mut summary = stats.clone();
                summary.steps.clear();
                put("qrl_stats.json", serde_json::to_string_pretty(&summary).expect("stats serialise"))?;
                println!("logs in {}", dir.display());
            }
            Ok(0)
        }
        Command::Report(args) => {
            let manifest = load_manifest(&args.run_dir)?;
            let others = args.compare.iter().map(|d| load_manifest(d)).collect::<Result<Vec<_>, _>>()?;
            let out = args.output_dir.unwrap_or_else(|| args.run_dir.clone());
            let refs: Vec<&RunManifest> = others.iter().collect();
            for f in emit_reports(&manifest, &out, &refs)? {
                println!("{}", out.join(f).display());
            }
            Ok(0)
        }
        Command::Verify(args) => {
            let mut ok = true;
            for c in invariant_suite() {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                ok &= c.passed;
            }
            if let Some(dir) = &args.run_dir {
                let problems = verify_run(dir)?;
                for p in &problems {
                    println!("FAIL run: {p}");
                }
                if problems.is_empty() {
                    println!("PASS run: every file matches the manifest and every fidelity recomputes");
                }
                ok &= problems.is_empty();
            }
            Ok(if ok { 0 } else { 1 })
        }
    }
}

/// Parse `args` (program name first) and run; returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
