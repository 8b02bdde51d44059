//! `zaktop` command-line tool.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 invalid input (parse or
//! validation), 3 symmetry verification failure, 4 gapless input, 5 numerical
//! failure.

mod output;
mod source;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use zaktop::invariants::analyze;
use zaktop::sweep::{sweep, ModelPath};
use zaktop::transport::parallel_transport;
use zaktop::{AnalysisConfig, Error, Tolerances};

use crate::source::ModelSource;

const MIN_STEPS: usize = 64;
const MAX_STEPS: usize = 1 << 20;

#[derive(Parser)]
#[command(name = "zaktop", version, about = "Zak phases and Z2 invariants of 1D tight-binding chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the declared symmetries and report the symmetry class.
    Classify(CommonArgs),
    /// Run the full pipeline: gap, symmetries, transport, Zak phases, Z2.
    Invariant {
        #[command(flatten)]
        common: CommonArgs,
        /// Write the sampled transport and its logarithm as JSON lines.
        #[arg(long, value_name = "FILE")]
        dump_transport: Option<PathBuf>,
    },
    /// Follow the straight-line path between two models.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Model file for the end of the path.
        #[arg(long, value_name = "FILE", conflicts_with = "to_coeffs")]
        to: Option<PathBuf>,
        /// Preset coefficients for the end of the path.
        #[arg(long, value_name = "SPEC")]
        to_coeffs: Option<String>,
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },
    /// Band energies on a uniform k-grid.
    Spectrum(CommonArgs),
    /// Write the selected model as a model file.
    Export(CommonArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    #[command(flatten)]
    source: ModelSource,
    /// Transport steps M.
    #[arg(long)]
    steps: Option<usize>,
    /// Momentum grid for the gap scan, or for the band table of `spectrum`.
    #[arg(long)]
    kgrid: Option<usize>,
    #[arg(long)]
    symmetry_grid: Option<usize>,
    /// Grid for the symmetric-frame checks; 0 skips them.
    #[arg(long)]
    basis_grid: Option<usize>,
    /// Tolerance override such as `gap=1e-6`; repeatable.
    #[arg(long = "tol", value_name = "KEY=VALUE")]
    tolerances: Vec<String>,
    /// JSON file with analysis settings; flags take precedence.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, short, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Usage(String),
    Csv(csv::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Csv(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Csv(_) => 1,
            CliError::Core(e) => match e {
                Error::Io(_) => 1,
                Error::Parse(_)
                | Error::InvalidModel(_)
                | Error::DimensionMismatch { .. }
                | Error::Precondition(_) => 2,
                Error::InvalidSymmetry { .. }
                | Error::NotInvolution { .. }
                | Error::InconsistentSymmetries(_)
                | Error::SymmetryViolation { .. } => 3,
                Error::Gapless { .. } | Error::RankChange { .. } => 4,
                Error::EigenSolver { .. }
                | Error::Numerical(_)
                | Error::InvalidLoop(_)
                | Error::InvariantViolation(_) => 5,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Csv(e) => write!(f, "csv: {e}"),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn set_tolerance(tol: &mut Tolerances, spec: &str) -> CliResult<()> {
    let (key, value) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("tolerance override {spec:?} is not KEY=VALUE")))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("tolerance {key}: {value:?} is not a number")))?;
    if !(value > 0.0 && value.is_finite()) {
        return Err(CliError::Usage(format!("tolerance {key} must be positive and finite")));
    }
    let slot = match key.trim() {
        "herm" => &mut tol.herm,
        "eig" => &mut tol.eig,
        "proj" => &mut tol.proj,
        "gap" => &mut tol.gap,
        "sym" => &mut tol.sym,
        "unit" => &mut tol.unit,
        "intw" => &mut tol.intw,
        "zak" => &mut tol.zak,
        "int" => &mut tol.int,
        "loop" => &mut tol.r#loop,
        other => {
            return Err(CliError::Usage(format!(
                "unknown tolerance {other:?} (expected herm, eig, proj, gap, sym, unit, intw, zak, int or loop)"
            )))
        }
    };
    *slot = value;
    Ok(())
}

impl CommonArgs {
    fn analysis_config(&self) -> CliResult<AnalysisConfig> {
        let mut config = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
            }
            None => AnalysisConfig::default(),
        };
        if let Some(m) = self.steps {
            config.steps = m;
        }
        if let Some(k) = self.kgrid {
            config.gap_grid = k;
        }
        if let Some(g) = self.symmetry_grid {
            config.symmetry_grid = g;
        }
        if let Some(g) = self.basis_grid {
            config.basis_grid = g;
        }
        for spec in &self.tolerances {
            set_tolerance(&mut config.tolerances, spec)?;
        }
        if !(MIN_STEPS..=MAX_STEPS).contains(&config.steps) {
            return Err(CliError::Usage(format!(
                "--steps must lie in [{MIN_STEPS}, {MAX_STEPS}], got {}",
                config.steps
            )));
        }
        if !(2..=MAX_STEPS).contains(&config.gap_grid) {
            return Err(CliError::Usage(format!(
                "--kgrid must lie in [2, {MAX_STEPS}], got {}",
                config.gap_grid
            )));
        }
        if !(1..=MAX_STEPS).contains(&config.symmetry_grid) {
            return Err(CliError::Usage("--symmetry-grid must lie in [1, 2^20]".into()));
        }
        Ok(config)
    }

    fn writer(&self) -> CliResult<Box<dyn Write>> {
        Ok(match &self.output {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Classify(args) => {
            let config = args.analysis_config()?;
            let (model, set) = args.source.load()?;
            let report = output::ClassifyReport::new(&model, &set, &config)?;
            let mut w = args.writer()?;
            output::write_classify(&mut w, &report, args.format)?;
            w.flush()?;
        }
        Command::Invariant {
            common: args,
            dump_transport,
        } => {
            let config = args.analysis_config()?;
            let (model, set) = args.source.load()?;
            let report = analyze(&model, &set, &config)?;
            if let Some(path) = dump_transport {
                let tr = parallel_transport(&model, config.steps, &config.tolerances)?;
                tr.write_dump(BufWriter::new(File::create(path)?))?;
            }
            let mut w = args.writer()?;
            output::write_invariant(&mut w, &report, args.format)?;
            w.flush()?;
        }
        Command::Sweep {
            common: args,
            to,
            to_coeffs,
            samples,
        } => {
            let config = args.analysis_config()?;
            let (start, set) = args.source.load()?;
            let end = match (to, to_coeffs) {
                (Some(path), _) => ModelSource::file(path).load()?,
                (None, Some(coeffs)) => args.source.with_coeffs(coeffs).load()?,
                (None, None) => {
                    return Err(CliError::Usage(
                        "sweep needs an end point: --to FILE or --to-coeffs SPEC".into(),
                    ))
                }
            };
            if start.dim() != end.0.dim() {
                return Err(Error::DimensionMismatch {
                    expected: start.dim(),
                    found: end.0.dim(),
                }
                .into());
            }
            if !source::same_symmetries(&set, &end.1) {
                return Err(Error::Precondition(
                    "the two end points declare different symmetry operators".into(),
                )
                .into());
            }
            if !(2..=100_001).contains(&samples) {
                return Err(CliError::Usage(format!(
                    "--samples must lie in [2, 100001], got {samples}"
                )));
            }
            let path = ModelPath::new(start, end.0, set, samples)?;
            let result = sweep(&path, &config)?;
            let mut w = args.writer()?;
            output::write_sweep(&mut w, &result, args.format)?;
            w.flush()?;
            if args.format == Format::Csv {
                eprintln!("{}", output::sweep_summary(&result));
            }
        }
        Command::Spectrum(args) => {
            let config = args.analysis_config()?;
            let (model, _) = args.source.load()?;
            let points = args.kgrid.unwrap_or(256);
            let table = output::SpectrumTable::new(&model, points, &config)?;
            let mut w = args.writer()?;
            output::write_spectrum(&mut w, &table, args.format)?;
            w.flush()?;
        }
        Command::Export(args) => {
            let (model, set) = args.source.load()?;
            let mut w = args.writer()?;
            w.write_all(zaktop::format::model_to_string(&model, &set).as_bytes())?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
