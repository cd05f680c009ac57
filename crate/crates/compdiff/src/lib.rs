//! Finite-element engine for a three-species competition-diffusion system.
//!
//! The crate provides the numerical core: structured Q1 quadrilateral meshes,
//! Galerkin assembly of mass, stiffness, and interaction matrices, sparse
//! iterative and dense direct linear solvers, the reaction model with its
//! equilibrium analysis, a three-stage semi-implicit time stepper, and
//! stability analysis of the scheme's scalar recurrence.
//!
//! The crate is `no_std` (with `alloc`); all IO, configuration, and file
//! formats live in the companion CLI crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod assembly;
pub mod linalg;
pub mod mesh;
pub mod model;
pub mod stability;
pub mod stepper;

pub use num_complex::Complex64;
