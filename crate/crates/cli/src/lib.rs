//! Command-line front end: argument parsing, config resolution and the four
//! commands. `main.rs` only maps results to exit codes.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use lapqbe_core::circuit::qasm::to_qasm;
use lapqbe_core::encoder::{build_nd, grid_register, EncodingDescriptor};
use lapqbe_core::format::g17;
use lapqbe_core::lattice::{self, BoundaryCondition, GridAxisSpec, LaplacianSpec};
use lapqbe_core::resources::{estimate_nd, lower_and_count, ResourceReport};
use lapqbe_core::simulator::{
    extract_block, oracle_success_probability, success_probability, test_state, uniform_state, SimOptions,
    DEFAULT_MAX_QUBITS,
};
use serde::{Deserialize, Serialize};

/// Entrywise tolerance for `verify` and for the success-probability cross-check.
pub const TOLERANCE: f64 = 1e-10;

/// Environment variable replacing the default simulation cap.
pub const CAP_ENV: &str = "LAPQBE_CAP";

pub const CONFIG_SCHEMA: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] lapqbe_core::Error),
    #[error("{0}")]
    Check(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(lapqbe_core::Error::Spec(_)) => 2,
            CliError::Core(lapqbe_core::Error::Resource(_)) => 3,
            CliError::Core(lapqbe_core::Error::Degenerate(_)) => 4,
            _ => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: impl AsRef<Path>) -> impl FnOnce(io::Error) -> CliError {
    let path = path.as_ref().display().to_string();
    move |source| CliError::Io { path, source }
}

fn stdout_err(source: io::Error) -> CliError {
    CliError::Io { path: "<stdout>".into(), source }
}

#[derive(Debug, Parser)]
#[command(name = "lapqbe", version, about = "Exact block encodings of finite-difference Laplacians")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the OpenQASM 3 circuit and JSON descriptor to `<out>.qasm` / `<out>.json`.
    Build {
        #[command(flatten)]
        common: CommonArgs,
        /// Output path prefix.
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract the encoded block by simulation and compare it with the matrix oracle.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Write the extracted block as `row,col,value` CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the oracle matrix as `row col value` triplets.
        #[arg(long)]
        oracle: Option<PathBuf>,
    },
    /// Success probability of the encoding on a grid-sampled input.
    Success {
        #[command(flatten)]
        common: CommonArgs,
        /// Write the `label,size,value` CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = InputKind::Test)]
        input: InputKind,
    },
    /// Symbolic and lowered Clifford+T counts.
    Resources {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Quantity in the CSV `value` column.
        #[arg(long, value_enum, default_value_t = Metric::SymbolicT)]
        metric: Metric,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Grid axis `n=<qubits>,h=<spacing>,bc=<p|d|n>`; repeat for more axes, in axis order.
    #[arg(long = "axis", value_parser = parse_axis)]
    pub axes: Vec<GridAxisSpec>,
    /// JSON config with `schema: 1`; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Run every axis at each register width `lo..hi` (inclusive).
    #[arg(long, value_parser = parse_sweep)]
    pub sweep: Option<(usize, usize)>,
    /// Largest circuit (in qubits) the simulator may allocate.
    #[arg(long)]
    pub cap: Option<usize>,
    /// Worker threads for block extraction.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputKind {
    /// `sin(2π Σ x_d)` at cell midpoints.
    Test,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    SymbolicT,
    SymbolicToffoli,
    LoweredT,
    LoweredToffoli,
}

pub fn parse_axis(s: &str) -> std::result::Result<GridAxisSpec, String> {
    let (mut n, mut h, mut bc) = (None, 1.0, None);
    for part in s.split(',') {
        let (key, value) = part.split_once('=').ok_or_else(|| format!("expected key=value, got `{part}`"))?;
        match key.trim() {
            "n" => n = Some(value.trim().parse::<usize>().map_err(|e| format!("n: {e}"))?),
            "h" => h = value.trim().parse::<f64>().map_err(|e| format!("h: {e}"))?,
            "bc" => bc = Some(value.trim().parse::<BoundaryCondition>().map_err(|e| e.to_string())?),
            other => return Err(format!("unknown axis key `{other}`")),
        }
    }
    let n = n.ok_or("missing n=<qubits>")?;
    let bc = bc.ok_or("missing bc=<p|d|n>")?;
    GridAxisSpec::new(n, h, bc).map_err(|e| e.to_string())
}

pub fn parse_sweep(s: &str) -> std::result::Result<(usize, usize), String> {
    let (lo, hi) = s.split_once("..").ok_or("expected <lo>..<hi>")?;
    let lo: usize = lo.trim().parse().map_err(|e| format!("lo: {e}"))?;
    let hi: usize = hi.trim().parse().map_err(|e| format!("hi: {e}"))?;
    if lo == 0 || lo > hi {
        return Err(format!("empty or invalid range {lo}..{hi}"));
    }
    Ok((lo, hi))
}

/// On-disk config. Axis keys accept the short flag names or the long field names.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    schema: u32,
    #[serde(default)]
    axes: Vec<AxisRecord>,
    sweep: Option<String>,
    cap: Option<usize>,
    jobs: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AxisRecord {
    #[serde(alias = "n_qubits")]
    n: usize,
    #[serde(alias = "spacing", default = "unit_spacing")]
    h: f64,
    bc: String,
}

fn unit_spacing() -> f64 {
    1.0
}

/// Fully resolved inputs shared by every command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub axes: Vec<GridAxisSpec>,
    pub sweep: Option<(usize, usize)>,
    pub sim: SimOptions,
}

impl RunConfig {
    /// Precedence: flags, then the config file, then `env_cap` for the cap, then defaults.
    pub fn resolve(args: &CommonArgs, env_cap: Option<&str>) -> CliResult<Self> {
        let file = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(io_err(path))?;
                let file: ConfigFile = serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                if file.schema != CONFIG_SCHEMA {
                    return Err(CliError::Usage(format!(
                        "{}: unsupported schema {} (expected {CONFIG_SCHEMA})",
                        path.display(),
                        file.schema
                    )));
                }
                Some(file)
            }
            None => None,
        };

        let axes = if !args.axes.is_empty() {
            args.axes.clone()
        } else if let Some(file) = &file {
            file.axes
                .iter()
                .map(|a| {
                    let bc = a.bc.parse()?;
                    GridAxisSpec::new(a.n, a.h, bc)
                })
                .collect::<lapqbe_core::Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        if axes.is_empty() {
            return Err(CliError::Usage("at least one --axis is required".into()));
        }

        let sweep = match (args.sweep, file.as_ref().and_then(|f| f.sweep.as_deref())) {
            (Some(s), _) => Some(s),
            (None, Some(s)) => Some(parse_sweep(s).map_err(CliError::Usage)?),
            (None, None) => None,
        };

        let env_cap = env_cap
            .map(|v| v.trim().parse::<usize>().map_err(|e| CliError::Usage(format!("{CAP_ENV}: {e}"))))
            .transpose()?;
        let max_qubits =
            args.cap.or(file.as_ref().and_then(|f| f.cap)).or(env_cap).unwrap_or(DEFAULT_MAX_QUBITS);
        let threads = args.jobs.or(file.as_ref().and_then(|f| f.jobs)).unwrap_or(1).max(1);
        Ok(RunConfig { axes, sweep, sim: SimOptions { max_qubits, threads } })
    }

    /// The specs to run: the configured one, or one per sweep width with every axis resized.
    pub fn specs(&self) -> CliResult<Vec<LaplacianSpec>> {
        let widths: Vec<Option<usize>> = match self.sweep {
            None => vec![None],
            Some((lo, hi)) => (lo..=hi).map(Some).collect(),
        };
        widths
            .into_iter()
            .map(|w| {
                let axes = self
                    .axes
                    .iter()
                    .map(|a| GridAxisSpec::new(w.unwrap_or(a.n_qubits), a.spacing, a.bc))
                    .collect::<lapqbe_core::Result<Vec<_>>>()?;
                Ok(LaplacianSpec::new(axes)?)
            })
            .collect()
    }
}

/// `periodic(n=2,h=1) x neumann(n=2,h=0.5)`.
pub fn describe(spec: &LaplacianSpec) -> String {
    spec.axes()
        .iter()
        .map(|a| format!("{}(n={},h={})", a.bc, a.n_qubits, g17(a.spacing)))
        .collect::<Vec<_>>()
        .join(" x ")
}

/// Whether a command's checks passed. Errors are reported separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
        }
    }
}

/// Runs a parsed command; primary output goes to `out`.
pub fn run(cli: &Cli, env_cap: Option<&str>, out: &mut dyn Write) -> CliResult<Outcome> {
    match &cli.command {
        Command::Build { common, out: prefix } => {
            let config = RunConfig::resolve(common, env_cap)?;
            if config.sweep.is_some() {
                return Err(CliError::Usage("build does not take --sweep".into()));
            }
            let spec = &config.specs()?[0];
            cmd_build(spec, prefix, out)?;
            Ok(Outcome::Pass)
        }
        Command::Verify { common, out: heatmap, oracle } => {
            let config = RunConfig::resolve(common, env_cap)?;
            let specs = config.specs()?;
            if specs.len() > 1 && (heatmap.is_some() || oracle.is_some()) {
                return Err(CliError::Usage("--out and --oracle need a single spec, not a sweep".into()));
            }
            let mut outcome = Outcome::Pass;
            for spec in &specs {
                let desc = build_nd(spec)?;
                if verify_descriptor(&desc, &config.sim, out, heatmap.as_deref(), oracle.as_deref())? == Outcome::Fail {
                    outcome = Outcome::Fail;
                }
            }
            Ok(outcome)
        }
        Command::Success { common, out: path, input } => {
            let config = RunConfig::resolve(common, env_cap)?;
            let csv = cmd_success(&config, *input)?;
            emit(path.as_deref(), &csv, out)?;
            Ok(Outcome::Pass)
        }
        Command::Resources { common, out: path, format, metric } => {
            let config = RunConfig::resolve(common, env_cap)?;
            let text = cmd_resources(&config, *format, *metric)?;
            emit(path.as_deref(), &text, out)?;
            Ok(Outcome::Pass)
        }
    }
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(path) => fs::write(path, text).map_err(io_err(path)),
        None => out.write_all(text.as_bytes()).map_err(stdout_err),
    }
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

pub fn cmd_build(spec: &LaplacianSpec, prefix: &Path, out: &mut dyn Write) -> CliResult<()> {
    let desc = build_nd(spec)?;
    let qasm_path = with_extension(prefix, "qasm");
    let json_path = with_extension(prefix, "json");
    fs::write(&qasm_path, to_qasm(&desc.circuit)).map_err(io_err(&qasm_path))?;
    fs::write(&json_path, desc.to_json() + "\n").map_err(io_err(&json_path))?;
    writeln!(
        out,
        "{}: {} ancillas, {} system qubits, {} gates\nwrote {}\nwrote {}",
        describe(spec),
        desc.ancilla_count,
        desc.system_qubits,
        desc.circuit.gates().len(),
        qasm_path.display(),
        json_path.display()
    )
    .map_err(stdout_err)
}

/// Compares the block encoded by `desc` with the oracle for `desc.spec`.
pub fn verify_descriptor(
    desc: &EncodingDescriptor,
    sim: &SimOptions,
    out: &mut dyn Write,
    heatmap: Option<&Path>,
    oracle_path: Option<&Path>,
) -> CliResult<Outcome> {
    let oracle = lattice::build_scaled_nd(&desc.spec)?;
    let block = extract_block(desc, sim)?;
    let dev = block.max_deviation(&oracle)?;
    let outcome = if dev.max_abs <= TOLERANCE { Outcome::Pass } else { Outcome::Fail };
    let verdict = match outcome {
        Outcome::Pass => "PASS",
        Outcome::Fail => "FAIL",
    };
    writeln!(
        out,
        "{}: ancillas={} system_qubits={} max_abs_deviation={} at row={} col={} (block {} oracle {}) {verdict}",
        describe(&desc.spec),
        desc.ancilla_count,
        desc.system_qubits,
        g17(dev.max_abs),
        dev.row,
        dev.col,
        g17(block.get(dev.row, dev.col)),
        g17(oracle.get(dev.row, dev.col)),
    )
    .map_err(stdout_err)?;
    if let Some(path) = heatmap {
        let mut buf = Vec::new();
        block.write_heatmap_csv(&mut buf).map_err(io_err(path))?;
        fs::write(path, buf).map_err(io_err(path))?;
    }
    if let Some(path) = oracle_path {
        let mut buf = Vec::new();
        oracle.write_triplets(&mut buf).map_err(io_err(path))?;
        fs::write(path, buf).map_err(io_err(path))?;
    }
    Ok(outcome)
}

/// `label,size,value` rows; `size` is the number of system qubits.
pub fn cmd_success(config: &RunConfig, input: InputKind) -> CliResult<String> {
    let mut csv = String::from("label,size,value\n");
    for spec in config.specs()? {
        let desc = build_nd(&spec)?;
        let v = match input {
            InputKind::Test => test_state(&spec)?,
            InputKind::Uniform => uniform_state(&spec)?,
        };
        let p = success_probability(&desc, &v, &config.sim)?;
        let expected = oracle_success_probability(&lattice::build_scaled_nd(&spec)?, &v)?;
        if (p - expected).abs() > TOLERANCE {
            return Err(CliError::Check(format!(
                "{}: simulated probability {} differs from oracle {}",
                describe(&spec),
                g17(p),
                g17(expected)
            )));
        }
        csv.push_str(&format!("{},{},{}\n", spec.label(), spec.total_qubits(), g17(p)));
    }
    Ok(csv)
}

/// A breakdown line where the lowered count differs from the closed form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub label: String,
    pub symbolic_toffoli: u64,
    pub lowered_toffoli: u64,
    /// Single-qubit shifts lower to a CNOT, below the incrementer closed form.
    pub documented: bool,
}

#[derive(Debug, Serialize)]
pub struct ResourceRecord {
    pub schema: u32,
    pub label: String,
    pub spec: LaplacianSpec,
    pub symbolic: ResourceReport,
    pub lowered: ResourceReport,
    pub ir_metrics: lapqbe_core::circuit::Metrics,
    pub flattened_metrics: lapqbe_core::circuit::Metrics,
    pub mismatches: Vec<Mismatch>,
}

pub fn resource_record(spec: &LaplacianSpec) -> CliResult<ResourceRecord> {
    let desc = build_nd(spec)?;
    let symbolic = estimate_nd(spec)?;
    let lowered = lower_and_count(&desc.circuit);
    let mut labels: Vec<&str> =
        symbolic.breakdown.iter().chain(&lowered.breakdown).map(|e| e.label.as_str()).collect();
    labels.sort_unstable();
    labels.dedup();
    let mismatches = labels
        .into_iter()
        .filter_map(|label| {
            let s = symbolic.entry(label).map_or(0, |e| e.toffoli);
            let l = lowered.entry(label).map_or(0, |e| e.toffoli);
            (s != l).then(|| {
                let single_qubit_shift = spec.axes().iter().enumerate().any(|(r, a)| {
                    a.n_qubits == 1 && label == format!("{}/shifts", grid_register(r + 1))
                });
                Mismatch {
                    label: label.to_string(),
                    symbolic_toffoli: s,
                    lowered_toffoli: l,
                    documented: single_qubit_shift && l < s,
                }
            })
        })
        .collect();
    Ok(ResourceRecord {
        schema: 1,
        label: spec.label(),
        spec: spec.clone(),
        ir_metrics: desc.circuit.metrics(),
        flattened_metrics: desc.circuit.flattened().metrics(),
        symbolic,
        lowered,
        mismatches,
    })
}

pub fn cmd_resources(config: &RunConfig, format: Format, metric: Metric) -> CliResult<String> {
    let records = config.specs()?.iter().map(resource_record).collect::<CliResult<Vec<_>>>()?;
    Ok(match format {
        Format::Json => {
            let text = if config.sweep.is_some() {
                serde_json::to_string_pretty(&records)
            } else {
                serde_json::to_string_pretty(&records[0])
            };
            text.expect("resource records serialize") + "\n"
        }
        Format::Csv => {
            let mut csv = String::from("label,size,value\n");
            for r in &records {
                let value = match metric {
                    Metric::SymbolicT => r.symbolic.t_count,
                    Metric::SymbolicToffoli => r.symbolic.toffoli_count,
                    Metric::LoweredT => r.lowered.t_count,
                    Metric::LoweredToffoli => r.lowered.toffoli_count,
                };
                csv.push_str(&format!("{},{},{value}\n", r.label, r.spec.total_qubits()));
            }
            csv
        }
    })
}
