use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod emit;
mod error;
mod figures;

use config::RunConfig;
use emit::Format;
use error::CliError;
use figures::Figure;

#[derive(Debug, Parser)]
#[command(name = "cavityspec", version, about = "Quasiparticle bath spectra, fluctuations and critical points")]
struct Cli {
    /// TOML configuration, or an emitted CSV whose manifest is reused.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "CAVITYSPEC_JOBS")]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Args, Default)]
struct GridArgs {
    #[arg(long)]
    start: Option<f64>,
    #[arg(long)]
    stop: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Derived constants of the parameter set.
    Derive,
    /// Spectral densities over both branches, uniform in √W.
    Spectral {
        /// C, AC, A, Adot or all.
        #[arg(long)]
        channel: Option<String>,
        /// landau, beliaev or all.
        #[arg(long)]
        branch: Option<String>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Exact Beliaev densities next to the cusp approximant, over W.
    Cusp {
        #[arg(long)]
        channel: Option<String>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Euclidean kernels ξ_x(ν).
    Kernels {
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Variances with and without the quasiparticle baths.
    Observe {
        /// pump or nU.
        #[arg(long)]
        sweep: Option<String>,
        /// Interpret the pump grid as fractions of the critical pump.
        #[arg(long)]
        relative: Option<bool>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Critical pumps and the Stokes shift over a grid of nU.
    Critical {
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Lattice sums against continuum bin integrals.
    Oracle {
        #[arg(long)]
        channel: Option<String>,
        #[arg(long)]
        branch: Option<String>,
        #[arg(long)]
        scale: Option<usize>,
        #[arg(long)]
        bins: Option<usize>,
    },
    /// Data for one of the figure presets.
    Figures {
        #[arg(value_enum)]
        figure: Figure,
    },
    /// Recomputes an emitted CSV file from its manifest.
    Replay { file: PathBuf },
}

fn apply_grid(c: &mut RunConfig, g: GridArgs) {
    if g.start.is_some() || g.stop.is_some() || g.points.is_some() {
        c.grid.values = None;
    }
    c.grid.start = g.start.or(c.grid.start);
    c.grid.stop = g.stop.or(c.grid.stop);
    c.grid.points = g.points.or(c.grid.points);
}

fn base_config(cli: &Cli) -> Result<RunConfig, CliError> {
    match &cli.config {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default()),
    }
}

fn jobs(cli: Cli) -> Result<(Vec<RunConfig>, Cli), CliError> {
    let mut c = base_config(&cli)?;
    let command = match &cli.command {
        Command::Derive => "derive",
        Command::Spectral { .. } => "spectral",
        Command::Cusp { .. } => "cusp",
        Command::Kernels { .. } => "kernels",
        Command::Observe { .. } => "observe",
        Command::Critical { .. } => "critical",
        Command::Oracle { .. } => "oracle",
        Command::Figures { figure } => {
            let jobs = figures::jobs(*figure);
            let expanded = jobs.into_iter().map(commands::expand).collect::<Result<Vec<_>, _>>()?;
            return Ok((expanded.into_iter().flatten().collect(), cli));
        }
        Command::Replay { file } => {
            let c = RunConfig::load(file)?;
            return Ok((commands::expand(c)?, cli));
        }
    };
    if c.run.command.as_deref().is_some_and(|x| x != command) {
        c = RunConfig {
            run: Default::default(),
            grid: Default::default(),
            ..c
        };
    }
    c.run.command = Some(command.into());
    let Cli { command: cmd, .. } = &cli;
    match cmd {
        Command::Spectral { channel, branch, points } => {
            c.grid.channel = channel.clone().or(c.grid.channel);
            c.grid.branch = branch.clone().or(c.grid.branch);
            c.grid.points = points.or(c.grid.points);
        }
        Command::Cusp { channel, grid } => {
            c.grid.channel = channel.clone().or(c.grid.channel);
            apply_grid(&mut c, *grid);
        }
        Command::Kernels { grid } | Command::Critical { grid } => apply_grid(&mut c, *grid),
        Command::Observe { sweep, relative, grid } => {
            c.grid.sweep = sweep.clone().or(c.grid.sweep);
            c.grid.relative = relative.or(c.grid.relative);
            apply_grid(&mut c, *grid);
        }
        Command::Oracle {
            channel,
            branch,
            scale,
            bins,
        } => {
            c.grid.channel = channel.clone().or(c.grid.channel);
            c.grid.branch = branch.clone().or(c.grid.branch);
            c.grid.scale = scale.or(c.grid.scale);
            c.grid.bins = bins.or(c.grid.bins);
        }
        _ => {}
    }
    Ok((commands::expand(c)?, cli))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (jobs, cli) = jobs(cli)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::Config("--jobs must be >= 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Config(e.to_string()))?;
    let mut failed = Vec::new();
    for job in &jobs {
        let out = pool.install(|| commands::execute(job))?;
        let text = emit::render(&out.manifest, &out.table, cli.format)?;
        let path = emit::write(&cli.out_dir, &out.stem, cli.format, &text)?;
        if matches!(cli.command, Command::Derive) {
            print!("{text}");
        } else {
            println!("{}", path.display());
        }
        if out.failed_rows > 0 {
            failed.push(format!("{}: {} rows failed", path.display(), out.failed_rows));
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::RowsFailed(failed.join("; ")))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Config(e.kind().to_string());
            eprintln!("{}", err.to_json());
            eprint!("{e}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
