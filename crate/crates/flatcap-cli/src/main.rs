mod commands;
mod error;
mod output;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use error::CliError;
use settings::{IcKind, Preset, Settings};

/// Delayed pattern onset on a flattening spherical cap: curves, spectra,
/// reduced coefficients, normal-form sweeps and direct simulation. Every
/// command writes plot-ready CSV files and a manifest.json into --out.
#[derive(Parser, Debug)]
#[command(name = "flatcap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Marginal stability curves A_mn(γ), one file per mode.
    Curves,
    /// Degrees, eigenvalues and growth rates of modes at --gamma0.
    Eigen,
    /// Drifting axisymmetric correction X01 and its dilution expansion.
    Qp,
    /// Tabulated normal-form coefficients σ0, σ1, C0 over the γ window.
    Nfcoef,
    /// Normal-form trajectories for each ε plus the constant-domain branch.
    Nf,
    /// Direct simulation on the evolving cap.
    Sim,
    /// Projection of a field onto the critical and tracked modes.
    Project {
        /// Snapshot CSV written by `sim`; without it the configured initial condition is used.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Grid convergence of simulation against the centre-manifold prediction.
    Converge,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Curves => "curves",
            Command::Eigen => "eigen",
            Command::Qp => "qp",
            Command::Nfcoef => "nfcoef",
            Command::Nf => "nf",
            Command::Sim => "sim",
            Command::Project { .. } => "project",
            Command::Converge => "converge",
        }
    }
}

fn parse_pair<T: std::str::FromStr>(s: &str) -> Result<(T, T), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected two comma-separated values, got '{s}'"))?;
    let p = |x: &str| x.trim().parse::<T>().map_err(|_| format!("bad value '{x}' in '{s}'"));
    Ok((p(a)?, p(b)?))
}

#[derive(Args, Debug)]
struct Common {
    /// Starting curvature γ(0).
    #[arg(long, global = true)]
    gamma0: Option<f64>,
    /// Final curvature.
    #[arg(long, global = true)]
    gamma_end: Option<f64>,
    /// Flattening rate(s), comma-separated for sweeps.
    #[arg(long, global = true, value_delimiter = ',')]
    epsilon: Option<Vec<f64>>,
    /// Mode m,n; repeat for several.
    #[arg(long = "mode", global = true, value_parser = parse_pair::<u32>)]
    modes: Option<Vec<(u32, u32)>>,
    /// Sample count: γ points (curves), coefficient-table size (nf, nfcoef, converge), series points (sim).
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Simulation grid Nw,Nphi.
    #[arg(long, global = true, value_parser = parse_pair::<usize>)]
    grid: Option<(usize, usize)>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Steps between geometry refreshes.
    #[arg(long, global = true)]
    cadence: Option<usize>,
    /// Seed of the noise initial condition.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// JSON settings file (or a previous manifest.json).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Initial amplitude of normal-form trajectories.
    #[arg(long, global = true)]
    x0: Option<f64>,
    /// Series truncation of the reduction.
    #[arg(long, global = true)]
    terms: Option<usize>,
    /// Radial resolutions of a convergence study, comma-separated.
    #[arg(long, global = true, value_delimiter = ',')]
    resolutions: Option<Vec<usize>>,
    #[arg(long, global = true, value_enum)]
    ic: Option<IcKind>,
    /// Replace the reaction by its affine part (drifting-state check).
    #[arg(long, global = true)]
    affine: bool,
    /// Run length when ε = 0.
    #[arg(long, global = true)]
    duration: Option<f64>,
    /// Track projections onto all modes with m ≤ M, n ≤ N.
    #[arg(long, global = true, value_parser = parse_pair::<u32>)]
    track: Option<(u32, u32)>,
}

impl Common {
    fn settings(&self) -> Settings {
        Settings {
            preset: self.preset,
            gamma0: self.gamma0,
            gamma_end: self.gamma_end,
            epsilon: self.epsilon.clone(),
            modes: self.modes.clone(),
            samples: self.samples,
            grid: self.grid,
            dt: self.dt,
            cadence: self.cadence,
            seed: self.seed,
            x0: self.x0,
            terms: self.terms,
            resolutions: self.resolutions.clone(),
            ic: self.ic,
            affine: self.affine.then_some(true),
            duration: self.duration,
            track: self.track,
            ..Settings::default()
        }
    }
}

fn execute(cli: &Cli) -> Result<PathBuf, CliError> {
    let started = Instant::now();
    let name = cli.command.name();
    let file = match &cli.common.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    let resolved = settings::resolve(name, file, cli.common.settings());
    let mut out = output::Outputs::new(&cli.common.out)?;
    let report = match &cli.command {
        Command::Curves => commands::curves(&resolved, &mut out),
        Command::Eigen => commands::eigen(&resolved, &mut out),
        Command::Qp => commands::qp(&resolved, &mut out),
        Command::Nfcoef => commands::nfcoef(&resolved, &mut out),
        Command::Nf => commands::nf(&resolved, &mut out),
        Command::Sim => commands::sim(&resolved, &mut out),
        Command::Project { input } => commands::project(&resolved, input.as_deref(), &mut out),
        Command::Converge => commands::converge(&resolved, &mut out),
    }?;
    output::write_manifest(out, name, &resolved.0, &report.results, &report.notes, started)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match execute(&cli) {
        Ok(manifest) => {
            println!("{}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("flatcap {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}
