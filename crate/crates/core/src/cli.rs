//! Experiment drivers and their configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assembly::{apply_dirichlet, assemble, dirichlet_values};
use crate::error::{FemError, Result};
use crate::fespace::{build_dofmaps, DofMaps};
use crate::levelset::{phi_sphere, LevelSetField};
use crate::linalg::{gcr_solve, BlockSgsPreconditioner, GcrOptions, SolveReport};
use crate::mesh::Mesh;
use crate::model::{DesorptionData, ManufacturedSolution, ProblemData, ProblemParams};
use crate::postproc::{
    compute_errors, mean_bulk_concentration, surface_integral, write_bulk_vtk, write_csv, write_interface_vtk,
    DiscreteSolution, ErrorReport, ReportRow,
};
use crate::scalar::Real;

/// Environment variable consulted for the default output directory.
pub const OUT_DIR_ENV: &str = "TRACEFEM_OUT_DIR";

pub const MAX_LEVEL: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    #[default]
    Convergence,
    Desorption,
}

/// Coefficient overrides applied on top of an experiment's defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ParamOverrides {
    pub nu1: Option<f64>,
    pub nu2: Option<f64>,
    pub nu_gamma: Option<f64>,
    pub k1a: Option<f64>,
    pub k2a: Option<f64>,
    pub k1d: Option<f64>,
    pub k2d: Option<f64>,
    pub k: Option<f64>,
}

impl ParamOverrides {
    pub fn apply(&self, mut p: ProblemParams<f64>) -> ProblemParams<f64> {
        let set = |dst: &mut f64, src: Option<f64>| {
            if let Some(v) = src {
                *dst = v;
            }
        };
        set(&mut p.nu1, self.nu1);
        set(&mut p.nu2, self.nu2);
        set(&mut p.nu_gamma, self.nu_gamma);
        set(&mut p.k1a, self.k1a);
        set(&mut p.k2a, self.k2a);
        set(&mut p.k1d, self.k1d);
        set(&mut p.k2d, self.k2d);
        set(&mut p.k, self.k);
        p
    }
}

/// Run configuration. The file form is `key = value` lines with the same
/// names as the command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    /// Finest level of the convergence study.
    pub max_level: u32,
    /// Level of the desorption study.
    pub level: u32,
    /// Relative residual target; per-experiment default when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    pub out: PathBuf,
    pub threads: usize,
    pub eps: Vec<f64>,
    pub vtk: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k1a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k2a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k1d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k2d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::Convergence,
            max_level: 3,
            level: 3,
            tol: None,
            out: default_out_dir(),
            threads: 1,
            eps: vec![1.0, 1e-1, 1e-3, 1e-5, 0.0],
            vtk: false,
            nu1: None,
            nu2: None,
            nu_gamma: None,
            k1a: None,
            k2a: None,
            k1d: None,
            k2d: None,
            k: None,
        }
    }
}

pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("out"), PathBuf::from)
}

impl RunConfig {
    pub fn overrides(&self) -> ParamOverrides {
        ParamOverrides {
            nu1: self.nu1,
            nu2: self.nu2,
            nu_gamma: self.nu_gamma,
            k1a: self.k1a,
            k2a: self.k2a,
            k1d: self.k1d,
            k2d: self.k2d,
            k: self.k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FemError::Config(m));
        if self.max_level > MAX_LEVEL {
            return bad(format!("max-level must be at most {MAX_LEVEL}, got {}", self.max_level));
        }
        if self.level > MAX_LEVEL {
            return bad(format!("level must be at most {MAX_LEVEL}, got {}", self.level));
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol < 1.0) {
                return bad(format!("tol must lie in (0, 1), got {tol}"));
            }
        }
        if self.threads == 0 {
            return bad("threads must be positive".into());
        }
        if self.eps.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return bad("eps values must be finite and nonnegative".into());
        }
        Ok(())
    }

    pub fn effective_tol(&self) -> f64 {
        self.tol.unwrap_or(match self.experiment {
            Experiment::Convergence => 1e-10,
            Experiment::Desorption => 1e-14,
        })
    }

    pub fn to_file_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| FemError::Config(e.to_string()))
    }

    pub fn from_file_string(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| FemError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_file_string(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_file_string()?)?;
        Ok(())
    }

    fn gcr(&self) -> GcrOptions {
        GcrOptions { tol: self.effective_tol(), ..GcrOptions::default() }
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(|e| FemError::Config(e.to_string()))
    }
}

/// Result of one discrete solve, in original variables.
#[derive(Debug, Clone)]
pub struct Solved<T> {
    pub dofs: DofMaps,
    pub solution: DiscreteSolution<T>,
    pub report: SolveReport,
    pub degenerate_cuts: usize,
}

/// Transforms, assembles, constrains and solves on a given cut mesh.
pub fn solve_problem<T: Real, D: ProblemData<T> + ?Sized>(
    field: &LevelSetField<'_, T>,
    params: &ProblemParams<T>,
    data: &D,
    opts: &GcrOptions,
) -> Result<Solved<T>> {
    let tp = params.transform()?;
    let dofs = build_dofmaps(field.mesh, field);
    let raw = assemble(field, &dofs, &tp, data)?;
    let values = dirichlet_values(field, &dofs, &tp, data);
    let sys = apply_dirichlet(raw, &values);
    let pre = BlockSgsPreconditioner::new(&sys.a_bb, &sys.a_ss);
    let (x, report) = gcr_solve(&sys, &sys.rhs(), &pre, opts)?;
    let solution = DiscreteSolution::from_transformed(&x, &dofs, &tp);
    Ok(Solved { dofs, solution, report, degenerate_cuts: sys.degenerate_cuts })
}

#[derive(Debug, Clone)]
pub struct ConvergenceOutcome {
    pub report: ErrorReport,
    pub solves: Vec<SolveReport>,
    pub csv: PathBuf,
}

impl ConvergenceOutcome {
    pub fn all_converged(&self) -> bool {
        self.solves.iter().all(|s| s.converged)
    }
}

/// Manufactured-solution study on levels `0..=max_level`; writes
/// `convergence.csv` into the output directory. A solve that misses the
/// tolerance ends the sweep; the rows computed so far are still written.
pub fn run_convergence(config: &RunConfig) -> Result<ConvergenceOutcome> {
    config.validate()?;
    let params = config.overrides().apply(ProblemParams::convergence_study());
    let exact = ManufacturedSolution::new(params);
    let opts = config.gcr();
    std::fs::create_dir_all(&config.out)?;
    let pool = config.pool()?;
    pool.install(|| {
        let mut report = ErrorReport::default();
        let mut solves = Vec::new();
        let mut mesh = Mesh::<f64>::box_level(0);
        for level in 0..=config.max_level {
            if level > 0 {
                mesh = mesh.refine_uniform();
            }
            let field = LevelSetField::interpolate_p1(phi_sphere, &mesh)?;
            let s = solve_problem(&field, &params, &exact, &opts)?;
            let errors = compute_errors(&field, &s.dofs, &s.solution, &exact);
            report.rows.push(ReportRow { level, h: mesh.mesh_size(), errors, gcr_iters: s.report.iterations });
            if config.vtk {
                write_bulk_vtk(&config.out.join(format!("bulk_level{level}.vtk")), &field, &s.dofs, &s.solution)?;
                write_interface_vtk(&config.out.join(format!("interface_level{level}.vtk")), &field, &s.dofs, &s.solution)?;
            }
            let converged = s.report.converged;
            solves.push(s.report);
            if !converged {
                break;
            }
        }
        let csv = config.out.join("convergence.csv");
        write_csv(&report, &csv)?;
        Ok(ConvergenceOutcome { report, solves, csv })
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesorptionRow {
    pub eps: f64,
    /// Mean of `u_1` over the inner phase.
    pub mean_u1: f64,
    /// Integral of `v` over the interface.
    pub surface_mass: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct DesorptionOutcome {
    pub level: u32,
    pub rows: Vec<DesorptionRow>,
    pub csv: PathBuf,
}

impl DesorptionOutcome {
    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }
}

pub const DESORPTION_HEADER: &str = "eps,mean_u1,mean_u1_over_eps,surface_mass,gcr_iters,residual";

/// Small-desorption sweep at `config.level`, one solve per `eps`; writes
/// `desorption.csv`. Parameter overrides other than `k1d` apply.
pub fn run_desorption(config: &RunConfig, epsilons: &[f64]) -> Result<DesorptionOutcome> {
    config.validate()?;
    if epsilons.iter().any(|e| e.is_nan() || *e < 0.0) {
        return Err(FemError::Config("eps values must be nonnegative".into()));
    }
    let opts = config.gcr();
    std::fs::create_dir_all(&config.out)?;
    let pool = config.pool()?;
    pool.install(|| {
        let mesh = Mesh::<f64>::box_level(config.level);
        let field = LevelSetField::interpolate_p1(phi_sphere, &mesh)?;
        let mut rows = Vec::new();
        let mut csv_text = format!("{DESORPTION_HEADER}\n");
        for &eps in epsilons {
            let overrides = ParamOverrides { k1d: None, ..config.overrides() };
            let params = overrides.apply(ProblemParams::desorption_study(eps));
            let s = solve_problem(&field, &params, &DesorptionData, &opts)?;
            let mean_u1 = mean_bulk_concentration(&field, &s.dofs, &s.solution, 1)?;
            let surface_mass = surface_integral(&field, &s.dofs, &s.solution);
            let ratio = if eps > 0.0 { format!("{:.5e}", mean_u1 / eps) } else { String::new() };
            csv_text.push_str(&format!(
                "{eps:e},{mean_u1:.5e},{ratio},{surface_mass:.5e},{},{:.3e}\n",
                s.report.iterations, s.report.residual
            ));
            if config.vtk {
                let tag = format!("{eps:e}");
                write_interface_vtk(&config.out.join(format!("desorption_eps{tag}.vtk")), &field, &s.dofs, &s.solution)?;
            }
            rows.push(DesorptionRow {
                eps,
                mean_u1,
                surface_mass,
                iterations: s.report.iterations,
                residual: s.report.residual,
                converged: s.report.converged,
            });
            if !s.report.converged {
                break;
            }
        }
        let csv = config.out.join("desorption.csv");
        std::fs::write(&csv, csv_text)?;
        Ok(DesorptionOutcome { level: config.level, rows, csv })
    })
}
