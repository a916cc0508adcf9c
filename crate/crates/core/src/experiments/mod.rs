//! Scripted desk-scale experiments and their verdicts.

mod dispersion;
mod normalize;
mod overhead;
mod stability;
mod support;

pub use dispersion::{dispersion_exponents, dispersion_experiment, DispersionParams, DispersionReport};
pub use normalize::{normalization_residuals, ResidualReport};
pub use overhead::{
    overhead_experiment, predicted_absorption_time, AbsorptionEstimate, OverheadParams, OverheadReport,
};
pub use stability::{default_comparisons, stability_experiment, StabilityParams, StabilityReport};
pub use support::{support_experiment, support_hull, SupportHull, SupportParams, SupportReport};

use std::fmt::Write as _;

use thiserror::Error;

use crate::cone::ConeError;
use crate::flux::FluxError;
use crate::grid::{Field, GridError};
use crate::profile::ProfileError;
use crate::solver::{Boundary, SolverError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("the solution reached the domain boundary at t = {t}")]
    BoundaryContact { t: f64 },
    #[error("initial data leave [{lo}, {hi}] (range {min}..{max})")]
    RangeViolation { min: f64, max: f64, lo: f64, hi: f64 },
    #[error("overhead amplitude too large: alpha = {alpha} <= 0")]
    EtaTooLarge { alpha: f64 },
    #[error("the shock is characteristic: {0}")]
    Characteristic(String),
    #[error("invalid experiment parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Flux(#[from] FluxError),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

/// One checked invariant: `measured` compared against `limit`.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub limit: f64,
}

impl Check {
    /// Passes when `measured <= limit`.
    pub fn at_most(name: impl Into<String>, measured: f64, limit: f64) -> Check {
        Check {
            name: name.into(),
            pass: measured <= limit,
            measured,
            limit,
        }
    }

    /// Passes when `measured >= limit`.
    pub fn at_least(name: impl Into<String>, measured: f64, limit: f64) -> Check {
        Check {
            name: name.into(),
            pass: measured >= limit,
            measured,
            limit,
        }
    }
}

/// Machine-readable list of checks, rendered as `key: value` lines.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Verdict {
    pub experiment: String,
    pub checks: Vec<Check>,
    pub notes: Vec<(String, String)>,
}

impl Verdict {
    pub fn new(experiment: impl Into<String>) -> Self {
        Verdict {
            experiment: experiment.into(),
            ..Verdict::default()
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl ToString) {
        self.notes.push((key.into(), value.to_string()));
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment: {}", self.experiment);
        let _ = writeln!(s, "all_pass: {}", self.all_pass());
        for c in &self.checks {
            let _ = writeln!(s, "{}.pass: {}", c.name, c.pass);
            let _ = writeln!(s, "{}.measured: {:e}", c.name, c.measured);
            let _ = writeln!(s, "{}.limit: {:e}", c.name, c.limit);
        }
        for (k, v) in &self.notes {
            let _ = writeln!(s, "{k}: {v}");
        }
        s
    }
}

/// Largest increment `x[n+1] - x[n]`, or `-inf` for fewer than two samples.
pub fn max_increase(series: &[f64]) -> f64 {
    series
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max)
}

fn check_range(field: &Field, lo: f64, hi: f64) -> Result<(), ExperimentError> {
    let (min, max) = field.range();
    let slack = 1e-14 * (1.0 + lo.abs().max(hi.abs()));
    if min < lo - slack || max > hi + slack {
        return Err(ExperimentError::RangeViolation { min, max, lo, hi });
    }
    Ok(())
}

pub fn steady_boundary(profile: &crate::profile::ShockProfile) -> Boundary {
    let p = profile.clone();
    Boundary::dirichlet(move |_, x| p.eval(x))
}
