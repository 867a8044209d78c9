use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use degroot::datagen::{generate_synthetic, write_dataset, FileFormat, SyntheticConfig};
use degroot::harness::{
    emit_report, emit_sweep, run_experiment, run_sweep, DataSource, ExperimentConfig,
    OutputFormat, Report, Scheme, SweepAxis, SweepResult,
};
use degroot::Error;

/// Trust-weighted consensus experiments for ensembles of regressors.
#[derive(Debug, Parser)]
#[command(name = "degroot", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a single experiment.
    Run(RunArgs),
    /// Run an experiment once per value of one configuration axis.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Axis to vary.
        #[arg(long, value_enum)]
        axis: AxisArg,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Write synthetic agent and test datasets to files.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
struct Overrides {
    /// JSON experiment config; unspecified fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of agents K. Synthetic data keeps the first K agent means.
    #[arg(short = 'K', long = "agents")]
    agents: Option<usize>,
    /// Local validation size N.
    #[arg(long)]
    neighbors: Option<usize>,
    /// Sorted fraction p used when partitioning file data.
    #[arg(long)]
    sort_fraction: Option<f64>,
    /// Exponent q of the per-agent lambda schedule.
    #[arg(long)]
    lambda_exponent: Option<f64>,
    /// Covariance scale of the synthetic agents.
    #[arg(long)]
    cov_scale: Option<f64>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    overrides: Overrides,
    /// Output directory; defaults to the config's `output_dir`. Without
    /// either, only the summary is printed.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    /// Comma-separated schemes, e.g. degroot,m-avg,cv-adaptive.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<String>>,
    /// Compute jackknife standard errors.
    #[arg(long)]
    jackknife: bool,
    #[arg(long)]
    replications: Option<usize>,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = DataFormatArg::Csv)]
    format: DataFormatArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DataFormatArg {
    Csv,
    Libsvm,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AxisArg {
    SortFraction,
    LambdaExponent,
    CovScale,
    Neighbors,
    AgentCount,
}

impl From<AxisArg> for SweepAxis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::SortFraction => SweepAxis::SortFraction,
            AxisArg::LambdaExponent => SweepAxis::LambdaExponent,
            AxisArg::CovScale => SweepAxis::CovScale,
            AxisArg::Neighbors => SweepAxis::Neighbors,
            AxisArg::AgentCount => SweepAxis::AgentCount,
        }
    }
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
        }
    }
}

fn base_config(o: &Overrides) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &o.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = o.seed {
        cfg.seed = seed;
    }
    let axes = [
        (SweepAxis::AgentCount, o.agents.map(|k| k as f64)),
        (SweepAxis::Neighbors, o.neighbors.map(|n| n as f64)),
        (SweepAxis::SortFraction, o.sort_fraction),
        (SweepAxis::LambdaExponent, o.lambda_exponent),
        (SweepAxis::CovScale, o.cov_scale),
    ];
    for (axis, value) in axes {
        if let Some(v) = value {
            cfg = axis.apply(&cfg, v)?;
        }
    }
    Ok(cfg)
}

fn experiment_config(args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = base_config(&args.overrides)?;
    if let Some(list) = &args.schemes {
        cfg.schemes = list.iter().map(|s| s.parse::<Scheme>()).collect::<Result<_, _>>()?;
    }
    if args.jackknife {
        cfg.jackknife = true;
    }
    if let Some(r) = args.replications {
        cfg.replications = r;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_report(r: &Report) {
    if let Some(note) = &r.data_note {
        println!("note: {note}");
    }
    println!(
        "agents {}  dimension {}  neighbors {}  replications {}",
        r.agents,
        r.dimension,
        r.neighbors,
        r.replications.len()
    );
    println!("{:<12} {:>12} {:>12} {:>14}", "scheme", "mse", "std", "gain vs dg %");
    for s in &r.schemes {
        let (m, sd) = s.mse.map(|m| (m.mean, m.std)).unwrap_or((f64::NAN, f64::NAN));
        let g = s.gain_vs_degroot.map(|g| format!("{:.2}", g.mean)).unwrap_or_default();
        println!("{:<12} {:>12.4e} {:>12.4e} {:>14}", s.scheme.name(), m, sd, g);
    }
    if let Some(g) = r.degroot_gain_over_mavg {
        println!("degroot gain over m-avg: {:.2}% ± {:.2}", g.mean, g.std);
    }
    let failed: usize = r.replications.iter().filter(|x| x.error.is_some()).count();
    if failed > 0 {
        println!("{failed} replication(s) failed numerically");
    }
}

fn print_sweep(s: &SweepResult) {
    for (row, report) in s.rows.iter().zip(&s.reports) {
        println!("== {} = {}", s.axis, row.value);
        print_report(report);
    }
}

fn written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn gen(args: &GenArgs) -> Result<(), Error> {
    let cfg = base_config(&args.overrides)?;
    let synth: SyntheticConfig = match cfg.data {
        DataSource::Synthetic(s) => SyntheticConfig { seed: cfg.seed, ..s },
        DataSource::File(_) => {
            return Err(Error::Config("gen needs a synthetic data source".into()))
        }
    };
    let data = generate_synthetic(&synth)?;
    let (format, ext) = match args.format {
        DataFormatArg::Csv => (FileFormat::Csv, "csv"),
        DataFormatArg::Libsvm => (FileFormat::Libsvm, "libsvm"),
    };
    std::fs::create_dir_all(&args.out).map_err(|e| io_error(&args.out, e))?;
    let mut paths = Vec::new();
    for (k, d) in data.agents.iter().enumerate() {
        let p = args.out.join(format!("agent_{}.{ext}", k + 1));
        write_dataset(&p, d, format)?;
        paths.push(p);
    }
    let p = args.out.join(format!("test.{ext}"));
    write_dataset(&p, &data.test, format)?;
    paths.push(p);
    written(&paths);
    Ok(())
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run(args) => {
            let cfg = experiment_config(&args)?;
            let report = run_experiment(&cfg)?;
            print_report(&report);
            if let Some(dir) = args.out.as_ref().or(cfg.output_dir.as_ref()) {
                written(&emit_report(&report, dir, "report", args.format.into())?);
            }
        }
        Command::Sweep { run, axis, values } => {
            let cfg = experiment_config(&run)?;
            let result = run_sweep(&cfg, axis.into(), &values)?;
            print_sweep(&result);
            if let Some(dir) = run.out.as_ref().or(cfg.output_dir.as_ref()) {
                written(&emit_sweep(&result, dir, run.format.into())?);
            }
        }
        Command::Gen(args) => gen(&args)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Numerical(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
