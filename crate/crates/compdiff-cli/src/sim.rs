//! Simulation driver: mesh and stepper setup, the time loop, snapshot
//! scheduling, and per-step diagnostics.
//!
//! Output is routed through a [`SimObserver`] so the same loop serves the
//! CLI (writing files as it goes, which keeps partial output on abort) and
//! in-memory consumers like tests and the convergence harness.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use compdiff::assembly::NodalField;
use compdiff::linalg::{spmv, SparseMatrix};
use compdiff::mesh::{build_structured_quad_mesh, Mesh};
use compdiff::stepper::{SpeciesState, Stepper, StepperOptions};

use crate::config::{OutputFormat, SimConfig};
use crate::ic::build_triple_junction_ic;
use crate::{io, AppError};

/// One emitted field set. `t` is the step time actually captured, which is
/// the latest step not after the requested time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub step_index: usize,
    pub fields: [NodalField; 3],
    /// Config-text hash tying the artifact back to its exact inputs.
    pub provenance: u64,
}

/// Per-step summary: total mass 1' M u_i plus nodal extrema per species.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub mass: [f64; 3],
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl DiagnosticsRow {
    pub const CSV_HEADER: &'static str = "t,mass1,min1,max1,mass2,min2,max2,mass3,min3,max3";

    pub fn to_csv(&self) -> String {
        let mut s = format!("{:.16e}", self.t);
        for i in 0..3 {
            s.push_str(&format!(
                ",{:.16e},{:.16e},{:.16e}",
                self.mass[i], self.min[i], self.max[i]
            ));
        }
        s
    }
}

/// Mass and extrema of the current fields under the given mass matrix.
pub fn diagnostics(
    mass: &SparseMatrix,
    fields: &[NodalField; 3],
    t: f64,
) -> Result<DiagnosticsRow, AppError> {
    let mut row = DiagnosticsRow { t, mass: [0.0; 3], min: [0.0; 3], max: [0.0; 3] };
    for i in 0..3 {
        let mu =
            spmv(mass, &fields[i]).map_err(|e| AppError::Engine(format!("diagnostics: {e}")))?;
        row.mass[i] = mu.iter().sum();
        row.min[i] = fields[i].iter().copied().fold(f64::INFINITY, f64::min);
        row.max[i] = fields[i].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    }
    Ok(row)
}

/// Receives diagnostics rows and snapshots as the run produces them.
pub trait SimObserver {
    fn diagnostics(&mut self, _row: &DiagnosticsRow) -> Result<(), AppError> {
        Ok(())
    }
    fn snapshot(&mut self, _mesh: &Mesh, _snap: &Snapshot) -> Result<(), AppError> {
        Ok(())
    }
}

/// Observer that keeps everything in memory.
#[derive(Debug, Default)]
pub struct CollectObserver {
    pub rows: Vec<DiagnosticsRow>,
    pub snapshots: Vec<Snapshot>,
}

impl SimObserver for CollectObserver {
    fn diagnostics(&mut self, row: &DiagnosticsRow) -> Result<(), AppError> {
        self.rows.push(*row);
        Ok(())
    }
    fn snapshot(&mut self, _mesh: &Mesh, snap: &Snapshot) -> Result<(), AppError> {
        self.snapshots.push(snap.clone());
        Ok(())
    }
}

/// Observer that writes `diagnostics.csv` and numbered snapshot files into
/// a directory, flushing as it goes so aborted runs keep what finished.
pub struct DirectoryObserver {
    dir: PathBuf,
    formats: Vec<OutputFormat>,
    diag: std::fs::File,
    count: usize,
}

impl DirectoryObserver {
    pub fn create(dir: &Path, formats: &[OutputFormat]) -> Result<Self, AppError> {
        std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
        let diag_path = dir.join("diagnostics.csv");
        let mut diag =
            std::fs::File::create(&diag_path).map_err(|e| AppError::io(&diag_path, e))?;
        writeln!(diag, "{}", DiagnosticsRow::CSV_HEADER)
            .map_err(|e| AppError::io(&diag_path, e))?;
        Ok(DirectoryObserver { dir: dir.to_path_buf(), formats: formats.to_vec(), diag, count: 0 })
    }

    pub fn snapshots_written(&self) -> usize {
        self.count
    }
}

impl SimObserver for DirectoryObserver {
    fn diagnostics(&mut self, row: &DiagnosticsRow) -> Result<(), AppError> {
        writeln!(self.diag, "{}", row.to_csv())
            .map_err(|e| AppError::io(&self.dir.join("diagnostics.csv"), e))
    }

    fn snapshot(&mut self, mesh: &Mesh, snap: &Snapshot) -> Result<(), AppError> {
        let base = format!("snap_{:03}_t{:.3}", self.count, snap.t);
        if self.formats.contains(&OutputFormat::Ppm) {
            let path = self.dir.join(format!("{base}.ppm"));
            io::write_bytes(&path, &io::snapshot_ppm_bytes(mesh.nx(), mesh.ny(), &snap.fields))?;
        }
        if self.formats.contains(&OutputFormat::Csv) {
            let path = self.dir.join(format!("{base}.csv"));
            io::write_bytes(&path, io::snapshot_csv_string(mesh, &snap.fields).as_bytes())?;
        }
        self.count += 1;
        Ok(())
    }
}

/// Number of whole steps of length dt that fit in [0, t_end], with a guard
/// against t_end being a sub-ulp short of an exact multiple.
pub fn n_steps_for(t_end: f64, dt: f64) -> usize {
    (t_end / dt + 1e-9).floor() as usize
}

/// The step whose time is nearest to t_req without passing it.
pub fn snapshot_step(t_req: f64, dt: f64) -> usize {
    (t_req / dt + 1e-9).floor() as usize
}

/// Final state of a completed run.
pub struct SimOutcome {
    pub mesh: Mesh,
    pub final_state: SpeciesState,
    pub n_steps: usize,
    pub snapshots_emitted: usize,
}

/// Runs the configured simulation from t = 0 to t_end.
///
/// Diagnostics are emitted for the initial state and after every step;
/// snapshots fire at the step mapped from each requested time (at most one
/// snapshot per step even if several requests collide). A stage failure
/// aborts with the failing step and time in the error.
pub fn run_simulation(
    cfg: &SimConfig,
    observer: &mut dyn SimObserver,
) -> Result<SimOutcome, AppError> {
    let mesh = build_structured_quad_mesh(cfg.domain, cfg.nx, cfg.ny)?;
    let options = StepperOptions {
        mass_lumping: cfg.mass_lumping,
        uniform_stage_diffusivity: cfg.uniform_stage_diffusivity,
        reaction_enabled: true,
    };
    let stepper = Stepper::new(&mesh, cfg.params, cfg.dt, cfg.solver, options)
        .map_err(|e| AppError::Engine(e.to_string()))?;
    let ic = build_triple_junction_ic(&mesh, &cfg.ic)?;
    let mut state = stepper.initial_state(ic).map_err(|e| AppError::Engine(e.to_string()))?;

    let n_steps = n_steps_for(cfg.t_end, cfg.dt);
    let due: BTreeSet<usize> =
        cfg.snapshot_times.iter().map(|&t| snapshot_step(t, cfg.dt)).collect();
    let mut emitted = 0;

    let emit = |state: &SpeciesState,
                observer: &mut dyn SimObserver,
                emitted: &mut usize|
     -> Result<(), AppError> {
        if due.contains(&state.step_index) {
            observer.snapshot(
                &mesh,
                &Snapshot {
                    t: state.t,
                    step_index: state.step_index,
                    fields: state.u_curr.clone(),
                    provenance: cfg.provenance,
                },
            )?;
            *emitted += 1;
        }
        Ok(())
    };

    observer.diagnostics(&diagnostics(stepper.mass(), &state.u_curr, state.t)?)?;
    emit(&state, observer, &mut emitted)?;

    for step in 1..=n_steps {
        state = stepper.step(&state).map_err(|e| AppError::Step {
            step,
            t: step as f64 * cfg.dt,
            source: e,
        })?;
        observer.diagnostics(&diagnostics(stepper.mass(), &state.u_curr, state.t)?)?;
        emit(&state, observer, &mut emitted)?;
    }

    Ok(SimOutcome { mesh, final_state: state, n_steps, snapshots_emitted: emitted })
}
