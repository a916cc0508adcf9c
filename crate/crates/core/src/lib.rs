//! Shock waves of multi-dimensional scalar conservation laws: admissible
//! cones and their duals, Lipschitz shock fronts, a monotone finite-volume
//! solver and the experiments that probe their long-time behaviour.

pub mod cone;
pub mod experiments;
pub mod flux;
pub mod grid;
pub mod hull;
pub mod io;
pub mod linalg;
pub mod normalization;
pub mod poly;
pub mod profile;
pub mod solver;

pub use cone::{AdmissibleCone, DualCone};
pub use experiments::{Check, ExperimentError, Verdict};
pub use flux::{Flux, ShockPair};
pub use grid::{Field, Grid};
pub use io::RunConfig;
pub use poly::Poly;
pub use profile::{Front, PerturbationSpec, Pwl, ShockProfile};
pub use solver::{Boundary, SchemeConfig, Solver};
