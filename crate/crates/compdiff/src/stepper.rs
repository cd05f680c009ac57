//! Stage-by-stage semi-implicit time stepping of the three coupled
//! semi-discrete systems.
//!
//! Each step treats diffusion by Crank-Nicolson and the frozen growth factor
//! by Adams-Bashforth extrapolation, species by species: species 1 solves
//! with all growth arguments extrapolated, then each later species replaces
//! the already-updated species' argument with its fresh half-step average
//! u_hat = (u^n + u^{n+1})/2. One linear solve per species per step; no
//! nonlinear iteration.

use alloc::vec::Vec;

use crate::assembly::{
    assemble_mass, assemble_stiffness, assemble_weighted_mass, lump_mass, AssemblyError, NodalField,
};
use crate::linalg::{solve_linear, LinAlgError, SolverConfig, SparseMatrix};
use crate::mesh::Mesh;
use crate::model::{ModelError, ModelParams, Species};

#[derive(Debug, Clone, PartialEq)]
pub enum StepError {
    /// Field length does not match the mesh node count.
    StateMismatch {
        expected: usize,
        got: usize,
    },
    /// dt must be positive and finite.
    InvalidDt(f64),
    Params(ModelError),
    Assembly(AssemblyError),
    /// Linear solve failed in the given stage (1, 2, or 3).
    Stage {
        stage: u8,
        source: LinAlgError,
    },
}

impl core::fmt::Display for StepError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            StepError::StateMismatch { expected, got } => {
                write!(f, "state field length {got} does not match mesh node count {expected}")
            }
            StepError::InvalidDt(dt) => {
                write!(f, "time step must be positive and finite, got {dt}")
            }
            StepError::Params(e) => write!(f, "{e}"),
            StepError::Assembly(e) => write!(f, "{e}"),
            StepError::Stage { stage, source } => write!(f, "stage {stage} solve failed: {source}"),
        }
    }
}

impl core::error::Error for StepError {}

impl From<AssemblyError> for StepError {
    fn from(e: AssemblyError) -> Self {
        StepError::Assembly(e)
    }
}

impl From<ModelError> for StepError {
    fn from(e: ModelError) -> Self {
        StepError::Params(e)
    }
}

/// Two consecutive time levels of the three species fields.
///
/// The stepper starts counting at t0 = 0: `t` always equals
/// `step_index as f64 * dt`, recomputed per step rather than accumulated.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesState {
    pub u_prev: [NodalField; 3],
    pub u_curr: [NodalField; 3],
    pub t: f64,
    pub step_index: usize,
}

/// Intermediate fields of one step: the extrapolations feeding each stage's
/// frozen growth factor, and the half-step averages filled in as stages
/// complete (the scheme never forms the species-3 average, so `hat[2]`
/// stays `None`).
#[derive(Debug, Clone)]
pub struct StepWorkspace {
    pub tilde: [NodalField; 3],
    pub hat: [Option<NodalField>; 3],
}

/// Adams-Bashforth extrapolation to the half step:
/// u_tilde = -1/2 u_prev + 3/2 u_curr.
pub fn extrapolate_tilde(
    u_prev: &NodalField,
    u_curr: &NodalField,
) -> Result<NodalField, StepError> {
    if u_prev.len() != u_curr.len() {
        return Err(StepError::StateMismatch { expected: u_prev.len(), got: u_curr.len() });
    }
    let values: Vec<f64> =
        u_prev.iter().zip(u_curr.iter()).map(|(p, c)| -0.5 * p + 1.5 * c).collect();
    Ok(NodalField::new(values)?)
}

/// Crank-Nicolson average of two time levels.
fn half_step_average(u_curr: &NodalField, u_next: &NodalField) -> Result<NodalField, StepError> {
    if u_curr.len() != u_next.len() {
        return Err(StepError::StateMismatch { expected: u_curr.len(), got: u_next.len() });
    }
    let values: Vec<f64> = u_curr.iter().zip(u_next.iter()).map(|(c, n)| 0.5 * (c + n)).collect();
    Ok(NodalField::new(values)?)
}

/// Builds the stage system pair: the implicit matrix
/// M + dt/2 (eps K - B) and the explicit matrix M - dt/2 (eps K - B), so
/// that (lhs) u^{n+1} = (rhs_mat) u^n is the Crank-Nicolson update with the
/// frozen reaction matrix B. Pass `reaction: None` for the diffusion-only
/// system (B = 0).
pub fn stage_system(
    mass: &SparseMatrix,
    stiffness: &SparseMatrix,
    reaction: Option<&SparseMatrix>,
    eps: f64,
    dt: f64,
) -> Result<(SparseMatrix, SparseMatrix), LinAlgError> {
    let half = 0.5 * dt;
    let lhs_terms: &[(f64, &SparseMatrix)];
    let rhs_terms: &[(f64, &SparseMatrix)];
    let with_b;
    let without_b;
    match reaction {
        Some(b) => {
            with_b = (
                [(1.0, mass), (half * eps, stiffness), (-half, b)],
                [(1.0, mass), (-half * eps, stiffness), (half, b)],
            );
            lhs_terms = &with_b.0;
            rhs_terms = &with_b.1;
        }
        None => {
            without_b =
                ([(1.0, mass), (half * eps, stiffness)], [(1.0, mass), (-half * eps, stiffness)]);
            lhs_terms = &without_b.0;
            rhs_terms = &without_b.1;
        }
    }
    Ok((SparseMatrix::linear_combination(lhs_terms)?, SparseMatrix::linear_combination(rhs_terms)?))
}

/// Behavior switches for the stepper.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepperOptions {
    /// Replace the consistent mass matrix by its row-sum lumped diagonal.
    pub mass_lumping: bool,
    /// Use the species-1 diffusivity (1 after rescaling) in every stage
    /// instead of each species' own. Off by default: distinct mobilities are
    /// the point of the model, and the per-species stage matrices preserve
    /// them; the uniform variant exists for comparison runs.
    pub uniform_stage_diffusivity: bool,
    /// Assemble the frozen reaction matrix B each stage. Disabling gives the
    /// pure diffusion scheme (B = 0), useful for conservation and heat-flow
    /// checks.
    pub reaction_enabled: bool,
}

impl Default for StepperOptions {
    fn default() -> Self {
        StepperOptions {
            mass_lumping: false,
            uniform_stage_diffusivity: false,
            reaction_enabled: true,
        }
    }
}

/// Owns the assembled mass and stiffness matrices and advances states.
#[derive(Debug, Clone)]
pub struct Stepper<'m> {
    mesh: &'m Mesh,
    params: ModelParams,
    dt: f64,
    solver: SolverConfig,
    options: StepperOptions,
    mass: SparseMatrix,
    stiffness: SparseMatrix,
}

impl<'m> Stepper<'m> {
    pub fn new(
        mesh: &'m Mesh,
        params: ModelParams,
        dt: f64,
        solver: SolverConfig,
        options: StepperOptions,
    ) -> Result<Self, StepError> {
        params.validate()?;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(StepError::InvalidDt(dt));
        }
        let mass = if options.mass_lumping {
            lump_mass(&assemble_mass(mesh)?)?
        } else {
            assemble_mass(mesh)?
        };
        let stiffness = assemble_stiffness(mesh)?;
        Ok(Stepper { mesh, params, dt, solver, options, mass, stiffness })
    }

    pub fn mesh(&self) -> &Mesh {
        self.mesh
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// The mass matrix in use (lumped when configured).
    pub fn mass(&self) -> &SparseMatrix {
        &self.mass
    }

    pub fn stiffness(&self) -> &SparseMatrix {
        &self.stiffness
    }

    /// Bootstraps a state at t = 0 with u_prev = u_curr = u0, the standard
    /// starting procedure for a two-level method with only one known level.
    pub fn initial_state(&self, u0: [NodalField; 3]) -> Result<SpeciesState, StepError> {
        for field in &u0 {
            self.check_len(field)?;
        }
        Ok(SpeciesState { u_prev: u0.clone(), u_curr: u0, t: 0.0, step_index: 0 })
    }

    fn check_len(&self, field: &NodalField) -> Result<(), StepError> {
        if field.len() != self.mesh.n_nodes() {
            return Err(StepError::StateMismatch {
                expected: self.mesh.n_nodes(),
                got: field.len(),
            });
        }
        Ok(())
    }

    fn stage_diffusivity(&self, species: Species) -> f64 {
        if self.options.uniform_stage_diffusivity {
            1.0
        } else {
            self.params.diffusivity(species)
        }
    }

    /// Solves one species' stage system for u^{n+1}: builds B from the
    /// frozen argument fields, then solves
    /// (M + dt/2 (eps K - B)) u^{n+1} = (M - dt/2 (eps K - B)) u^n,
    /// seeding the iteration with u^n.
    pub fn stage_solve(
        &self,
        species: Species,
        f_args: &[NodalField; 3],
        u_curr: &NodalField,
    ) -> Result<NodalField, StepError> {
        self.check_len(u_curr)?;
        let stage = species.index() as u8 + 1;
        let reaction = if self.options.reaction_enabled {
            Some(assemble_weighted_mass(self.mesh, f_args, species, &self.params)?)
        } else {
            None
        };
        let eps = self.stage_diffusivity(species);
        let (lhs, rhs_mat) =
            stage_system(&self.mass, &self.stiffness, reaction.as_ref(), eps, self.dt)
                .map_err(|source| StepError::Stage { stage, source })?;
        let mut rhs = alloc::vec![0.0; u_curr.len()];
        rhs_mat
            .mul_vec_into(u_curr, &mut rhs)
            .map_err(|source| StepError::Stage { stage, source })?;
        let solved = solve_linear(&lhs, &rhs, Some(u_curr), &self.solver)
            .map_err(|source| StepError::Stage { stage, source })?;
        Ok(NodalField::new(solved.x)?)
    }

    /// Advances one step, returning the workspace of intermediate fields
    /// alongside the new state.
    ///
    /// Fails atomically: on any stage error the input state is untouched and
    /// no partial update escapes.
    pub fn step_with_workspace(
        &self,
        state: &SpeciesState,
    ) -> Result<(SpeciesState, StepWorkspace), StepError> {
        for field in state.u_prev.iter().chain(state.u_curr.iter()) {
            self.check_len(field)?;
        }
        let tilde: [NodalField; 3] = [
            extrapolate_tilde(&state.u_prev[0], &state.u_curr[0])?,
            extrapolate_tilde(&state.u_prev[1], &state.u_curr[1])?,
            extrapolate_tilde(&state.u_prev[2], &state.u_curr[2])?,
        ];

        // stage 1: growth arguments all extrapolated
        let args1 = [tilde[0].clone(), tilde[1].clone(), tilde[2].clone()];
        let u1_next = self.stage_solve(Species::U1, &args1, &state.u_curr[0])?;
        let hat1 = half_step_average(&state.u_curr[0], &u1_next)?;

        // stage 2: species 1 argument refreshed to its half-step average
        let args2 = [hat1.clone(), tilde[1].clone(), tilde[2].clone()];
        let u2_next = self.stage_solve(Species::U2, &args2, &state.u_curr[1])?;
        let hat2 = half_step_average(&state.u_curr[1], &u2_next)?;

        // stage 3: species 1 and 2 arguments refreshed
        let args3 = [hat1.clone(), hat2.clone(), tilde[2].clone()];
        let u3_next = self.stage_solve(Species::U3, &args3, &state.u_curr[2])?;

        let step_index = state.step_index + 1;
        let next = SpeciesState {
            u_prev: state.u_curr.clone(),
            u_curr: [u1_next, u2_next, u3_next],
            t: step_index as f64 * self.dt,
            step_index,
        };
        let workspace = StepWorkspace { tilde, hat: [Some(hat1), Some(hat2), None] };
        Ok((next, workspace))
    }

    /// Advances one step.
    pub fn step(&self, state: &SpeciesState) -> Result<SpeciesState, StepError> {
        Ok(self.step_with_workspace(state)?.0)
    }
}
