//! Command-line driver: runs the entropy pipeline, or individual stages of
//! it, from the shell.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for invalid input or
//! configuration, 3 when the numerics fail.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use entroshell::pipeline::{
    compute_model_system, emit_figure_data, entropy_csv, enumerate_for_mode, fits_json,
    reference_curves, run_pipeline, ExternalSystem, GridSettings, Mode, RunConfig, RunFits,
    SystemResult,
};
use entroshell::{
    boltzmann_analogy, fit_log_linear, format_g6, EntropyResult, Error, FillingMode,
};

#[derive(Parser)]
#[command(
    name = "entroshell",
    version,
    about = "Information entropies of shell-filled fermion systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a whole set of systems, fit the scaling law, write outputs.
    Run(RunArgs),
    /// Entropies of a single system, printed as CSV.
    Entropy(SystemArgs),
    /// Level scheme of a single model system, printed as CSV.
    Levels(SystemArgs),
    /// Fit S = a + b ln N to an existing entropy table.
    Fit(FitArgs),
    /// Reference scaling curves with computed points as scatter.
    Figure(FigureArgs),
}

#[derive(Args)]
struct GridArgs {
    /// Box radius (Angstrom or fm); defaults to a potential-derived value.
    #[arg(long)]
    r_max: Option<f64>,
    /// Points on the position grid.
    #[arg(long)]
    n_points: Option<usize>,
    /// Momentum cutoff (reciprocal of the length unit).
    #[arg(long)]
    k_max: Option<f64>,
    /// Points on the momentum grid.
    #[arg(long)]
    n_k: Option<usize>,
    /// Highest orbital angular momentum searched.
    #[arg(long)]
    l_max: Option<u32>,
}

impl GridArgs {
    fn apply(&self, grid: &mut GridSettings) {
        if self.r_max.is_some() {
            grid.r_max = self.r_max;
        }
        if let Some(n) = self.n_points {
            grid.n_points = n;
        }
        if self.k_max.is_some() {
            grid.k_max = self.k_max;
        }
        if let Some(n) = self.n_k {
            grid.n_k = n;
        }
        if let Some(l) = self.l_max {
            grid.l_max = l;
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file; flags below override its settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// cluster_ws, nucleus_ho or external.
    #[arg(long)]
    mode: Option<String>,
    /// Comma-separated particle counts, e.g. 8,18,20.
    #[arg(long)]
    counts: Option<String>,
    /// strict_closed or uniform_fractional.
    #[arg(long)]
    filling: Option<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// External system: comma-separated density table files (repeatable).
    #[arg(long = "system", value_name = "FILES")]
    systems: Vec<String>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct SystemArgs {
    /// cluster_ws, nucleus_ho or external.
    #[arg(long)]
    mode: String,
    /// Particle count (model modes).
    #[arg(long)]
    n: Option<u32>,
    /// strict_closed or uniform_fractional.
    #[arg(long)]
    filling: Option<String>,
    /// External system: comma-separated density table files.
    #[arg(long = "system", value_name = "FILES")]
    system: Option<String>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct FitArgs {
    /// entropy.csv produced by a run.
    #[arg(long)]
    entropy: PathBuf,
    /// Write the fits as JSON here as well.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FigureArgs {
    /// entropy.csv whose systems become the scatter column.
    #[arg(long)]
    entropy: Option<PathBuf>,
    /// Write the figure CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<Mode, Error> {
    Mode::parse(s).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "mode must be cluster_ws, nucleus_ho or external, got `{s}`"
        ))
    })
}

fn parse_filling(s: &str) -> Result<FillingMode, Error> {
    match s {
        "strict_closed" => Ok(FillingMode::StrictClosed),
        "uniform_fractional" => Ok(FillingMode::UniformFractional),
        other => Err(Error::InvalidArgument(format!(
            "filling must be strict_closed or uniform_fractional, got `{other}`"
        ))),
    }
}

fn parse_counts(s: &str) -> Result<Vec<u32>, Error> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<u32>()
                .map_err(|_| Error::InvalidArgument(format!("bad particle count `{p}`")))
        })
        .collect()
}

fn external_from_flag(value: &str, index: usize) -> Result<ExternalSystem, Error> {
    let files: Vec<PathBuf> = value
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(PathBuf::from)
        .collect();
    if files.is_empty() {
        return Err(Error::InvalidArgument(
            "--system needs at least one file".into(),
        ));
    }
    let id = files[0]
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| format!("system{}", index + 1));
    Ok(ExternalSystem { id, files })
}

/// Reads an entropy.csv back into per-system results.
fn read_entropy_csv(path: &PathBuf) -> Result<Vec<SystemResult>, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut systems = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 {
            if line != "system_id,N,S_r,S_k,S_sum,eur_margin" {
                return Err(Error::Parse {
                    line: 1,
                    message: "not an entropy table (unexpected header)".into(),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected 6 columns, got {}", fields.len()),
            });
        }
        let number = |i: usize| -> Result<f64, Error> {
            fields[i].parse().map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("bad number `{}`", fields[i]),
            })
        };
        let n_particles: u32 = fields[1].parse().map_err(|_| Error::Parse {
            line: idx + 1,
            message: format!("bad particle count `{}`", fields[1]),
        })?;
        let (s_r, s_k, s_sum, eur_margin) = (number(2)?, number(3)?, number(4)?, number(5)?);
        systems.push(SystemResult {
            id: fields[0].to_string(),
            n_particles,
            entropy: EntropyResult {
                s_r,
                s_k,
                s_sum,
                eur_bound: s_sum - eur_margin,
                eur_margin,
            },
        });
    }
    if systems.is_empty() {
        return Err(Error::InsufficientData(
            "entropy table has no data rows".into(),
        ));
    }
    Ok(systems)
}

fn fit_summary(fits: &RunFits) -> String {
    let mut out = String::new();
    for (name, fit) in [("S_r", &fits.s_r), ("S_k", &fits.s_k), ("S_sum", &fits.s_sum)] {
        out.push_str(&format!(
            "{name}: a = {}, b = {}, rms = {}\n",
            format_g6(fit.a),
            format_g6(fit.b),
            format_g6(fit.rms_residual)
        ));
    }
    if let Some(analogy) = &fits.boltzmann {
        out.push_str(&analogy.report());
        out.push('\n');
    }
    out
}

fn fit_from_systems(systems: &[SystemResult]) -> Result<RunFits, Error> {
    let pts = |pick: fn(&EntropyResult) -> f64| -> Vec<(f64, f64)> {
        systems
            .iter()
            .map(|s| (s.n_particles as f64, pick(&s.entropy)))
            .collect()
    };
    let s_r = fit_log_linear(&pts(|e| e.s_r))?;
    let s_k = fit_log_linear(&pts(|e| e.s_k))?;
    let s_sum = fit_log_linear(&pts(|e| e.s_sum))?;
    let boltzmann = boltzmann_analogy(&s_sum).ok();
    Ok(RunFits {
        s_r,
        s_k,
        s_sum,
        boltzmann,
    })
}

fn cmd_run(args: RunArgs) -> Result<i32, Error> {
    let mut config = match (&args.config, &args.mode) {
        (Some(path), _) => RunConfig::parse(&std::fs::read_to_string(path)?)?,
        (None, Some(mode)) => match parse_mode(mode)? {
            Mode::ClusterWs => RunConfig::default_cluster(),
            Mode::NucleusHo => RunConfig::default_nucleus(),
            Mode::External => {
                let mut c = RunConfig::default_cluster();
                c.mode = Mode::External;
                c.particle_counts.clear();
                c
            }
        },
        (None, None) => {
            return Err(Error::InvalidArgument(
                "need --config or --mode to know what to run".into(),
            ))
        }
    };
    if let Some(mode) = &args.mode {
        config.mode = parse_mode(mode)?;
    }
    if let Some(counts) = &args.counts {
        config.particle_counts = parse_counts(counts)?;
    }
    if let Some(filling) = &args.filling {
        config.filling = parse_filling(filling)?;
    }
    if let Some(dir) = args.out {
        config.output_dir = dir;
    }
    if !args.systems.is_empty() {
        config.external_systems = args
            .systems
            .iter()
            .enumerate()
            .map(|(i, s)| external_from_flag(s, i))
            .collect::<Result<_, _>>()?;
    }
    args.grid.apply(&mut config.grid);

    let report = run_pipeline(&config)?;
    print!("{}", entropy_csv(&report.systems));
    if let Some(fits) = &report.fits {
        print!("{}", fit_summary(fits));
    } else if let Some(reason) = &report.fit_skip_reason {
        println!("fit skipped: {reason}");
    }
    for path in &report.written {
        println!("wrote {}", path.display());
    }
    for failure in &report.failures {
        eprintln!("failed {}: {}", failure.id, failure.message);
    }
    Ok(report
        .failures
        .first()
        .map(|f| f.exit_code)
        .unwrap_or(0))
}

fn cmd_entropy(args: SystemArgs) -> Result<i32, Error> {
    let mode = parse_mode(&args.mode)?;
    let filling = match &args.filling {
        Some(f) => parse_filling(f)?,
        None => FillingMode::StrictClosed,
    };
    let mut grid = GridSettings::default();
    args.grid.apply(&mut grid);
    let result = match mode {
        Mode::External => {
            let spec = args.system.as_deref().ok_or(Error::InvalidArgument(
                "external mode needs --system".into(),
            ))?;
            let system = external_from_flag(spec, 0)?;
            let (pair, entropy) =
                entroshell::pipeline::compute_external_system(&system, &grid)?;
            SystemResult {
                id: system.id,
                n_particles: pair.n_particles,
                entropy,
            }
        }
        mode => {
            let n = args.n.ok_or(Error::InvalidArgument(
                "model modes need --n".into(),
            ))?;
            let system = compute_model_system(mode, n, &grid, filling)?;
            SystemResult {
                id: system.id,
                n_particles: system.n_particles,
                entropy: system.entropy,
            }
        }
    };
    print!("{}", entropy_csv(std::slice::from_ref(&result)));
    Ok(0)
}

fn cmd_levels(args: SystemArgs) -> Result<i32, Error> {
    let mode = parse_mode(&args.mode)?;
    let n = args.n.ok_or(Error::InvalidArgument(
        "levels needs --n".into(),
    ))?;
    let mut grid = GridSettings::default();
    args.grid.apply(&mut grid);
    let scheme = enumerate_for_mode(mode, n, &grid)?;
    print!("{}", scheme.to_csv());
    Ok(0)
}

fn cmd_fit(args: FitArgs) -> Result<i32, Error> {
    let systems = read_entropy_csv(&args.entropy)?;
    let fits = fit_from_systems(&systems)?;
    print!("{}", fit_summary(&fits));
    if let Some(path) = args.out {
        std::fs::write(&path, fits_json(&fits))?;
        println!("wrote {}", path.display());
    }
    Ok(0)
}

fn cmd_figure(args: FigureArgs) -> Result<i32, Error> {
    let systems = match &args.entropy {
        Some(path) => read_entropy_csv(path)?,
        None => Vec::new(),
    };
    let csv = emit_figure_data(&reference_curves(), &systems);
    match args.out {
        Some(path) => {
            std::fs::write(&path, csv)?;
            println!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(0)
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Entropy(args) => cmd_entropy(args),
        Command::Levels(args) => cmd_levels(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Figure(args) => cmd_figure(args),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}
