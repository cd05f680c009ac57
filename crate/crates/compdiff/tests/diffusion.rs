//! End-to-end diffusion checks against the closed-form heat kernel.
//!
//! With the reaction disabled every species obeys u_t = eps * laplace(u)
//! under natural boundary conditions, so on [0, pi]^2 the initial field
//! cos(x)cos(y) decays as e^{-2 eps t} cos(x)cos(y). That gives an exact
//! oracle for both the spatial convergence order and the per-species
//! diffusivity wiring.

use compdiff::assembly::NodalField;
use compdiff::linalg::{spmv, SolverConfig};
use compdiff::mesh::{build_structured_quad_mesh, Mesh, Rect};
use compdiff::model::ModelParams;
use compdiff::stepper::{Stepper, StepperOptions};

const PI: f64 = std::f64::consts::PI;

fn cos_mode(mesh: &Mesh) -> NodalField {
    NodalField::from_fn(mesh, |x, y| x.cos() * y.cos()).unwrap()
}

fn run_diffusion(mesh: &Mesh, params: ModelParams, dt: f64, n_steps: usize) -> [NodalField; 3] {
    let options = StepperOptions { reaction_enabled: false, ..StepperOptions::default() };
    let stepper = Stepper::new(mesh, params, dt, SolverConfig::default(), options).unwrap();
    let ic = cos_mode(mesh);
    let mut state = stepper.initial_state([ic.clone(), ic.clone(), ic]).unwrap();
    for _ in 0..n_steps {
        state = stepper.step(&state).unwrap();
    }
    state.u_curr
}

fn m_norm(mesh: &Mesh, d: &[f64]) -> f64 {
    let m = compdiff::assembly::assemble_mass(mesh).unwrap();
    let md = spmv(&m, d).unwrap();
    d.iter().zip(&md).map(|(a, b)| a * b).sum::<f64>().sqrt()
}

/// M-norm error of species 1 against the exact solution at t_end.
fn heat_error(n: usize, dt: f64, n_steps: usize) -> f64 {
    let mesh = build_structured_quad_mesh(Rect::new(0.0, PI, 0.0, PI), n, n).unwrap();
    let params = ModelParams::new(1.0, 2.0, 1.0, 1.0).unwrap();
    let u = run_diffusion(&mesh, params, dt, n_steps);
    let t_end = dt * n_steps as f64;
    let decay = (-2.0 * t_end).exp();
    let diff: Vec<f64> = mesh
        .nodes()
        .iter()
        .zip(u[0].as_slice())
        .map(|(&[x, y], &v)| v - decay * x.cos() * y.cos())
        .collect();
    m_norm(&mesh, &diff)
}

#[test]
fn spatial_error_is_second_order() {
    // dt small enough that the O(dt^2) time error is negligible next to the
    // O(h^2) spatial error on every mesh in the sweep
    let dt = 5e-4;
    let n_steps = 100;
    let errors: Vec<f64> = [9, 17, 33].iter().map(|&n| heat_error(n, dt, n_steps)).collect();
    assert!(errors[0] > errors[1] && errors[1] > errors[2]);
    for pair in errors.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!(
            (3.3..4.7).contains(&ratio),
            "halving h should quarter the error, got ratio {ratio}, errors {errors:?}"
        );
    }
}

#[test]
fn species_decay_at_their_own_diffusivities() {
    let mesh = build_structured_quad_mesh(Rect::new(0.0, PI, 0.0, PI), 17, 17).unwrap();
    let params = ModelParams::new(1.0, 2.0, 0.1, 0.6).unwrap();
    let dt = 5e-3;
    let n_steps = 100;
    let u = run_diffusion(&mesh, params, dt, n_steps);
    let t_end = dt * n_steps as f64;
    let ic = cos_mode(&mesh);
    let norm0 = m_norm(&mesh, &ic);
    for (i, eps) in [1.0, 0.1, 0.6].into_iter().enumerate() {
        let rate = -(m_norm(&mesh, &u[i]) / norm0).ln() / t_end;
        let expect = 2.0 * eps;
        assert!(
            (rate / expect - 1.0).abs() < 0.015,
            "species {i}: measured decay rate {rate}, expected {expect}"
        );
    }
}
