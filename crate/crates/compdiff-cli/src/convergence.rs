//! Temporal self-convergence harness.
//!
//! Runs the full nonlinear system from a smooth built-in initial condition
//! at several step sizes and measures the M-weighted error of each leg at
//! the final time against a much finer reference leg (dt_min / 8). The
//! reference must be well inside the asymptotic regime: measuring against
//! the coarsest leg's own sibling (dt_min) would bias the observed order,
//! since for exactly second-order errors e(2h)-e(h) comparisons against
//! dt_min give ratios of 5 rather than 4.

use compdiff::assembly::{assemble_mass, NodalField};
use compdiff::linalg::spmv;
use compdiff::mesh::{build_structured_quad_mesh, Mesh};
use compdiff::stepper::{Stepper, StepperOptions};

use crate::config::SimConfig;
use crate::AppError;

/// One convergence-table row; `order` is measured against the previous
/// (coarser) row, so the first row has none.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub error: f64,
    pub order: Option<f64>,
}

/// Smooth, positive, boundary-compatible initial data for time-accuracy
/// studies: per-species offset cosine bumps with zero normal derivative on
/// every edge of the domain rectangle.
pub fn smooth_ic(mesh: &Mesh) -> [NodalField; 3] {
    let rect = mesh.rect();
    let (w, h) = (rect.width(), rect.height());
    let pi = std::f64::consts::PI;
    let bump =
        |x: f64, y: f64| (pi * (x - rect.x_min) / w).cos() * (pi * (y - rect.y_min) / h).cos();
    let build = |base: f64, amp: f64| {
        NodalField::from_fn(mesh, |x, y| base + amp * bump(x, y)).expect("cosine data is finite")
    };
    [build(0.3, 0.1), build(0.25, 0.08), build(0.2, 0.06)]
}

fn run_leg(
    cfg: &SimConfig,
    mesh: &Mesh,
    dt: f64,
    n_steps: usize,
) -> Result<[NodalField; 3], AppError> {
    let options = StepperOptions {
        mass_lumping: cfg.mass_lumping,
        uniform_stage_diffusivity: cfg.uniform_stage_diffusivity,
        reaction_enabled: true,
    };
    let stepper = Stepper::new(mesh, cfg.params, dt, cfg.solver, options)
        .map_err(|e| AppError::Engine(e.to_string()))?;
    let mut state =
        stepper.initial_state(smooth_ic(mesh)).map_err(|e| AppError::Engine(e.to_string()))?;
    for step in 1..=n_steps {
        state = stepper.step(&state).map_err(|e| AppError::Step {
            step,
            t: step as f64 * dt,
            source: e,
        })?;
    }
    Ok(state.u_curr)
}

fn steps_exactly(t_end: f64, dt: f64) -> Result<usize, AppError> {
    let n = (t_end / dt).round();
    if n < 1.0 || ((n * dt - t_end) / t_end.max(1.0)).abs() > 1e-9 {
        return Err(AppError::Usage(format!("dt {dt} does not divide the final time {t_end}")));
    }
    Ok(n as usize)
}

/// Runs the study over the given step sizes, finest last.
///
/// The mesh, parameters, solver settings, and final time come from `cfg`;
/// the initial condition is the built-in smooth field (time accuracy needs
/// smooth data, which the config's sector initial condition is not).
pub fn convergence_study(cfg: &SimConfig, dts: &[f64]) -> Result<Vec<ConvergenceRow>, AppError> {
    if dts.len() < 3 {
        return Err(AppError::Usage("need at least 3 step sizes".to_string()));
    }
    if !dts.iter().all(|dt| dt.is_finite() && *dt > 0.0) {
        return Err(AppError::Usage("step sizes must be positive and finite".to_string()));
    }
    if !dts.windows(2).all(|p| p[0] > p[1]) {
        return Err(AppError::Usage("step sizes must be strictly decreasing".to_string()));
    }
    if !(cfg.t_end > 0.0) {
        return Err(AppError::Usage("t_end must be positive for a convergence study".to_string()));
    }

    let mesh = build_structured_quad_mesh(cfg.domain, cfg.nx, cfg.ny)?;
    let mass = assemble_mass(&mesh).map_err(|e| AppError::Engine(e.to_string()))?;
    let m_norm_sq = |d: &[f64]| -> Result<f64, AppError> {
        let md = spmv(&mass, d).map_err(|e| AppError::Engine(e.to_string()))?;
        Ok(d.iter().zip(&md).map(|(a, b)| a * b).sum())
    };

    let dt_ref = dts[dts.len() - 1] / 8.0;
    let n_ref = steps_exactly(cfg.t_end, dt_ref)?;
    let reference = run_leg(cfg, &mesh, dt_ref, n_ref)?;

    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(dts.len());
    for &dt in dts {
        let n = steps_exactly(cfg.t_end, dt)?;
        let u = run_leg(cfg, &mesh, dt, n)?;
        let mut err_sq = 0.0;
        for i in 0..3 {
            let d: Vec<f64> = u[i].iter().zip(reference[i].iter()).map(|(a, b)| a - b).collect();
            err_sq += m_norm_sq(&d)?;
        }
        let error = err_sq.sqrt();
        let order = rows
            .last()
            .map(|prev: &ConvergenceRow| (prev.error / error).ln() / (prev.dt / dt).ln());
        rows.push(ConvergenceRow { dt, error, order });
    }
    Ok(rows)
}
