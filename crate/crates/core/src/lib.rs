//! Unfitted P1 trace finite elements for stationary advection-diffusion in
//! two bulk phases coupled to a surfactant equation on the interface through
//! adsorption and desorption.
//!
//! The pipeline runs `mesh` -> `levelset` -> `cutgeom` -> `fespace` ->
//! `assembly` -> `linalg` -> `postproc`; `cli` drives the two experiments.
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix `f64`.

#![allow(clippy::needless_range_loop)]

pub mod assembly;
pub mod cli;
pub mod cutgeom;
pub mod error;
pub mod fespace;
pub mod levelset;
pub mod linalg;
pub mod mesh;
pub mod model;
pub mod postproc;
pub mod scalar;

pub use error::{FemError, Result};
pub use scalar::{Real, Vec3};

pub type Mesh64 = mesh::Mesh<f64>;
pub type LevelSetField64<'m> = levelset::LevelSetField<'m, f64>;
pub type ProblemParams64 = model::ProblemParams<f64>;
pub type TransformedParams64 = model::TransformedParams<f64>;
pub type CsrMatrix64 = linalg::CsrMatrix<f64>;
pub type SystemBlocks64 = assembly::SystemBlocks<f64>;
pub type DiscreteSolution64 = postproc::DiscreteSolution<f64>;
