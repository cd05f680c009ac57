//! `compdiff` binary: simulate, equilibria, stability-region, convergence.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use compdiff::model::{equilibria, ModelParams};
use compdiff::stability::{region_raster, FixedPoint};
use compdiff_cli::config::load_config;
use compdiff_cli::convergence::convergence_study;
use compdiff_cli::sim::{run_simulation, DirectoryObserver};
use compdiff_cli::{io, AppError};

#[derive(Parser)]
#[command(
    name = "compdiff",
    version,
    about = "Three-species competition-diffusion simulator and scheme analysis tools"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a simulation from a JSON config and write snapshots + diagnostics
    Simulate(SimulateArgs),
    /// Print the equilibrium table (points, eigenvalues, classification) as CSV
    Equilibria(EquilibriaArgs),
    /// Raster the scheme's stability region over a complex-z window
    StabilityRegion(StabilityArgs),
    /// Temporal convergence study on the config's problem with a smooth IC
    Convergence(ConvergenceArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Path to the JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Override the output directory from the config
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EquilibriaArgs {
    /// Competition coefficient a (pressure of the next species in the cycle)
    #[arg(long)]
    a: f64,
    /// Competition coefficient b (pressure of the previous species)
    #[arg(long)]
    b: f64,
    /// Coupling of species 1 on species 3; defaults to a (cyclic symmetry)
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args)]
struct StabilityArgs {
    /// Which fixed point of the scalar reduction to linearize at: 0 or 1
    #[arg(long = "fixed-point")]
    fixed_point: u8,
    /// Real-axis window as min:max
    #[arg(long, default_value = "-10:2")]
    re: String,
    /// Imaginary-axis window as min:max
    #[arg(long, default_value = "-6:6")]
    im: String,
    /// Samples per axis
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Output base path; writes <out>.csv and <out>.ppm
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ConvergenceArgs {
    /// Path to the JSON run configuration (mesh, params, t_end)
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated step sizes, strictly decreasing, at least three
    #[arg(long, value_delimiter = ',', required = true)]
    dts: Vec<f64>,
}

fn parse_range(text: &str) -> Result<(f64, f64), AppError> {
    let err = || AppError::Usage(format!("range '{text}' is not of the form min:max"));
    let (lo, hi) = text.split_once(':').ok_or_else(err)?;
    let lo: f64 = lo.trim().parse().map_err(|_| err())?;
    let hi: f64 = hi.trim().parse().map_err(|_| err())?;
    Ok((lo, hi))
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), AppError> {
    let mut cfg = load_config(&args.config)?;
    if let Some(out) = args.out {
        cfg.out_dir = out;
    }
    let mut observer = DirectoryObserver::create(&cfg.out_dir, &cfg.formats)?;
    let outcome = run_simulation(&cfg, &mut observer)?;
    println!(
        "completed {} steps to t = {}; wrote {} snapshot(s) and diagnostics.csv to {}; config hash {:016x}",
        outcome.n_steps,
        outcome.final_state.t,
        outcome.snapshots_emitted,
        cfg.out_dir.display(),
        cfg.provenance,
    );
    Ok(())
}

fn cmd_equilibria(args: EquilibriaArgs) -> Result<(), AppError> {
    // the diffusivities do not enter the equilibrium computation
    let params = ModelParams::with_alpha(args.a, args.b, args.alpha.unwrap_or(args.a), 1.0, 1.0)?;
    println!("u1,u2,u3,re1,im1,re2,im2,re3,im3,kind");
    for e in equilibria(&params) {
        let p = e.point;
        let l = e.eigenvalues;
        println!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            p[0], p[1], p[2], l[0].re, l[0].im, l[1].re, l[1].im, l[2].re, l[2].im, e.kind
        );
    }
    Ok(())
}

fn cmd_stability(args: StabilityArgs) -> Result<(), AppError> {
    let fixed_point = FixedPoint::from_tag(args.fixed_point)
        .ok_or_else(|| AppError::Usage("fixed-point must be 0 or 1".to_string()))?;
    let re = parse_range(&args.re)?;
    let im = parse_range(&args.im)?;
    let raster = region_raster(fixed_point, re, im, args.n)?;
    let csv_path = args.out.with_extension("csv");
    let ppm_path = args.out.with_extension("ppm");
    io::write_bytes(&csv_path, io::raster_csv_string(&raster).as_bytes())?;
    io::write_bytes(&ppm_path, &io::raster_ppm_bytes(&raster))?;
    let stable = raster.samples.iter().filter(|s| s.stable).count();
    println!(
        "sampled {} points at fixed point {}; {} stable; wrote {} and {}",
        raster.samples.len(),
        args.fixed_point,
        stable,
        csv_path.display(),
        ppm_path.display(),
    );
    Ok(())
}

fn cmd_convergence(args: ConvergenceArgs) -> Result<(), AppError> {
    let cfg = load_config(&args.config)?;
    let rows = convergence_study(&cfg, &args.dts)?;
    println!("dt,error,order");
    for row in rows {
        match row.order {
            Some(order) => println!("{:.16e},{:.16e},{order:.4}", row.dt, row.error),
            None => println!("{:.16e},{:.16e},", row.dt, row.error),
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.kind() == ErrorKind::DisplayHelp || e.kind() == ErrorKind::DisplayVersion => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first_line = e.to_string();
            let first_line = first_line.lines().next().unwrap_or("invalid arguments");
            eprintln!("error: usage: {first_line}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.cmd {
        Cmd::Simulate(args) => cmd_simulate(args),
        Cmd::Equilibria(args) => cmd_equilibria(args),
        Cmd::StabilityRegion(args) => cmd_stability(args),
        Cmd::Convergence(args) => cmd_convergence(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
