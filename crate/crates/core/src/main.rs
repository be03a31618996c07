use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use tracefem::cli::{run_convergence, run_desorption, Experiment, RunConfig, OUT_DIR_ENV};

/// Trace finite element solver for coupled bulk-interface transport.
///
/// Settings are taken from the defaults, then the config file, then flags.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    #[arg(long, value_enum)]
    experiment: Option<Experiment>,
    /// Finest refinement level of the convergence study (0..=4).
    #[arg(long)]
    max_level: Option<u32>,
    /// Refinement level of the desorption study (0..=4).
    #[arg(long)]
    level: Option<u32>,
    /// Relative GCR residual target.
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Desorption coefficients to sweep, comma separated.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Also write VTK files.
    #[arg(long)]
    vtk: bool,
    /// `key = value` config file using the flag names as keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the resolved configuration to this file and continue.
    #[arg(long)]
    save_config: Option<PathBuf>,
    #[arg(long)]
    nu1: Option<f64>,
    #[arg(long)]
    nu2: Option<f64>,
    #[arg(long)]
    nu_gamma: Option<f64>,
    #[arg(long)]
    k1a: Option<f64>,
    #[arg(long)]
    k2a: Option<f64>,
    #[arg(long)]
    k1d: Option<f64>,
    #[arg(long)]
    k2d: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
}

fn resolve(args: Args) -> tracefem::Result<RunConfig> {
    let mut c = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    macro_rules! set {
        ($($field:ident),*) => {$(
            if let Some(v) = args.$field {
                c.$field = v;
            }
        )*};
    }
    macro_rules! set_opt {
        ($($field:ident),*) => {$(
            if args.$field.is_some() {
                c.$field = args.$field;
            }
        )*};
    }
    set!(experiment, max_level, level, out, threads, eps);
    set_opt!(tol, nu1, nu2, nu_gamma, k1a, k2a, k1d, k2d, k);
    c.vtk |= args.vtk;
    c.validate()?;
    if let Some(path) = &args.save_config {
        c.save(path)?;
    }
    Ok(c)
}

fn run(args: Args) -> tracefem::Result<bool> {
    let config = resolve(args)?;
    match config.experiment {
        Experiment::Convergence => {
            let out = run_convergence(&config)?;
            println!("{:>5} {:>12} {:>12} {:>12} {:>12} {:>12} {:>6}", "level", "h", "l2_bulk", "h1_bulk", "l2_surf", "h1_surf", "iters");
            for row in &out.report.rows {
                let e = row.errors;
                println!(
                    "{:>5} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>6}",
                    row.level, row.h, e.l2_bulk, e.h1_bulk, e.l2_surf, e.h1_surf, row.gcr_iters
                );
            }
            println!("wrote {}", out.csv.display());
            Ok(out.all_converged())
        }
        Experiment::Desorption => {
            let out = run_desorption(&config, &config.eps)?;
            println!("level {}", out.level);
            println!("{:>10} {:>12} {:>12} {:>12} {:>6}", "eps", "mean_u1", "mean_u1/eps", "int_v", "iters");
            for r in &out.rows {
                let ratio = if r.eps > 0.0 { format!("{:.4e}", r.mean_u1 / r.eps) } else { "-".into() };
                println!("{:>10.1e} {:>12.4e} {:>12} {:>12.5} {:>6}", r.eps, r.mean_u1, ratio, r.surface_mass, r.iterations);
            }
            println!("wrote {}", out.csv.display());
            Ok(out.all_converged())
        }
    }
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: at least one solve did not reach the tolerance");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
