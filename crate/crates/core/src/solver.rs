//! First-order monotone finite volumes for `u_t + div g(u) = 0`.
//!
//! The update is unsplit and conservative. Every face flux is a pure
//! function of its two states, so a cell and its neighbour compute
//! bit-identical values for their shared face and the cell sums telescope
//! exactly. Results do not depend on the number of worker threads.
//!
//! The Rusanov variant runs with one dissipation constant per axis, fixed
//! by the declared state range for the whole run. That keeps the discrete
//! evolution operator time-invariant and exactly monotone, which is what
//! comparison and L1 contraction between different fields need.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::flux::Flux;
use crate::grid::{l1_distance, Field, GridError};
use crate::linalg::pairwise_sum;
use crate::poly::Poly;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("CFL number must lie in (0, 0.5), got {0}")]
    BadCfl(f64),
    #[error("flux dimension {flux} does not match grid dimension {grid}")]
    DimensionMismatch { flux: usize, grid: usize },
    #[error("state range grew to [{min}, {max}] beyond the configured [{lo}, {hi}]")]
    CflViolation { min: f64, max: f64, lo: f64, hi: f64 },
    #[error("time step {dt} exceeds the stable limit {limit}")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("invalid state range [{0}, {1}]")]
    BadRange(f64, f64),
    #[error("horizon must be positive, got {0}")]
    BadHorizon(f64),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NumericalFlux {
    Rusanov,
    EngquistOsher,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryKind {
    DirichletProfile,
    Outflow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FluxFrame {
    Original,
    Reduced,
}

macro_rules! keyword_enum {
    ($ty:ident { $($name:literal => $variant:ident),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($name => Ok($ty::$variant),)+
                    other => Err(format!(
                        "unknown value `{other}` (expected one of: {})",
                        [$($name),+].join(", ")
                    )),
                }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($ty::$variant => $name,)+ })
            }
        }
    };
}

keyword_enum!(NumericalFlux { "rusanov" => Rusanov, "engquist-osher" => EngquistOsher });
keyword_enum!(BoundaryKind { "dirichlet-profile" => DirichletProfile, "outflow" => Outflow });
keyword_enum!(FluxFrame { "original" => Original, "reduced" => Reduced });

#[derive(Clone, Debug, PartialEq)]
pub struct SchemeConfig {
    pub flux: NumericalFlux,
    pub cfl: f64,
    pub boundary: BoundaryKind,
    pub frame: FluxFrame,
}

impl SchemeConfig {
    pub fn default_for(d: usize) -> Self {
        SchemeConfig {
            flux: NumericalFlux::Rusanov,
            cfl: if d >= 3 { 0.3 } else { 0.45 },
            boundary: BoundaryKind::DirichletProfile,
            frame: FluxFrame::Reduced,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.cfl > 0.0 && self.cfl < 0.5 {
            Ok(())
        } else {
            Err(SolverError::BadCfl(self.cfl))
        }
    }
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig::default_for(2)
    }
}

/// Ghost-cell policy.
#[derive(Clone)]
pub enum Boundary {
    /// Zero-gradient extrapolation.
    Outflow,
    Constant(f64),
    /// Ghost value `g(t, x)` at the ghost cell centre.
    Dirichlet(Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>),
}

impl Boundary {
    pub fn dirichlet(f: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Boundary::Dirichlet(Arc::new(f))
    }
}

impl fmt::Debug for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Outflow => f.write_str("Outflow"),
            Boundary::Constant(c) => write!(f, "Constant({c})"),
            Boundary::Dirichlet(_) => f.write_str("Dirichlet(..)"),
        }
    }
}

/// Largest `|g'|` over `[lo, hi]` via the critical points of `g'`.
fn max_abs_derivative(g: &Poly, lo: f64, hi: f64) -> f64 {
    g.derivative().max_abs_on(lo, hi)
}

/// Integral of `max(g', 0)` over `[lo, hi]`, `lo <= hi`, split at the given
/// sorted roots of `g'`.
fn positive_variation(g: &Poly, roots: &[f64], lo: f64, hi: f64) -> f64 {
    let mut total = 0.0;
    let mut g_start = g.eval(lo);
    for &r in roots.iter().filter(|&&r| r > lo && r < hi) {
        let g_r = g.eval(r);
        total += (g_r - g_start).max(0.0);
        g_start = g_r;
    }
    total + (g.eval(hi) - g_start).max(0.0)
}

fn engquist_osher(g: &Poly, roots: &[f64], a: f64, b: f64) -> f64 {
    // g(0) + int_0^a max(g',0) + int_0^b min(g',0) = g(b) + int_b^a max(g',0)
    let p = if a >= b {
        positive_variation(g, roots, b, a)
    } else {
        -positive_variation(g, roots, a, b)
    };
    g.eval(b) + p
}

/// Interface flux of a single component between left state `a` and right
/// state `b`. Rusanov uses the largest `|g'|` on the interval between the
/// states.
pub fn numerical_flux(kind: NumericalFlux, g: &Poly, a: f64, b: f64) -> f64 {
    match kind {
        NumericalFlux::Rusanov => {
            let lambda = max_abs_derivative(g, a.min(b), a.max(b));
            0.5 * (g.eval(a) + g.eval(b)) - 0.5 * lambda * (b - a)
        }
        NumericalFlux::EngquistOsher => {
            let roots = g.derivative().real_roots();
            engquist_osher(g, &roots, a, b)
        }
    }
}

#[derive(Clone, Debug)]
struct FaceKernel {
    g: Poly,
    roots: Vec<f64>,
    lambda: f64,
    kind: NumericalFlux,
}

impl FaceKernel {
    #[inline]
    fn flux(&self, a: f64, b: f64) -> f64 {
        match self.kind {
            NumericalFlux::Rusanov => 0.5 * (self.g.eval(a) + self.g.eval(b)) - 0.5 * self.lambda * (b - a),
            NumericalFlux::EngquistOsher => engquist_osher(&self.g, &self.roots, a, b),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Solver {
    flux: Flux,
    kernels: Vec<FaceKernel>,
    cfl: f64,
    range: (f64, f64),
    lambda_max: f64,
}

/// Result of one explicit update.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub field: Field,
    pub dt: f64,
    /// Net mass that left through the boundary during the step.
    pub outflux: f64,
}

impl Solver {
    /// Solver for data confined to `range`. The range fixes the
    /// dissipation and the stable time step; leaving it is an error.
    pub fn new(flux: Flux, scheme: &SchemeConfig, range: (f64, f64)) -> Result<Self, SolverError> {
        scheme.validate()?;
        let (lo, hi) = range;
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(SolverError::BadRange(lo, hi));
        }
        let kernels: Vec<FaceKernel> = flux
            .components()
            .iter()
            .map(|g| FaceKernel {
                g: g.clone(),
                roots: g.derivative().real_roots(),
                lambda: max_abs_derivative(g, lo, hi),
                kind: scheme.flux,
            })
            .collect();
        let lambda_max = kernels.iter().map(|k| k.lambda).fold(0.0, f64::max);
        Ok(Solver {
            flux,
            kernels,
            cfl: scheme.cfl,
            range,
            lambda_max,
        })
    }

    /// Solver whose range is the union of the ranges of `fields`.
    pub fn for_fields(flux: Flux, scheme: &SchemeConfig, fields: &[&Field]) -> Result<Self, SolverError> {
        let lo = fields.iter().map(|f| f.min()).fold(f64::INFINITY, f64::min);
        let hi = fields.iter().map(|f| f.max()).fold(f64::NEG_INFINITY, f64::max);
        Solver::new(flux, scheme, (lo, hi))
    }

    pub fn flux(&self) -> &Flux {
        &self.flux
    }
    pub fn range(&self) -> (f64, f64) {
        self.range
    }
    pub fn cfl(&self) -> f64 {
        self.cfl
    }
    /// `max_k max |g_k'|` over the range.
    pub fn max_speed(&self) -> f64 {
        self.lambda_max
    }

    /// `CFL dx / (d Lambda_max)`; infinite for a flux without speed.
    pub fn dt_max(&self, dx: f64) -> f64 {
        if self.lambda_max == 0.0 {
            f64::INFINITY
        } else {
            self.cfl * dx / (self.kernels.len() as f64 * self.lambda_max)
        }
    }

    fn check_range(&self, min: f64, max: f64) -> Result<(), SolverError> {
        let (lo, hi) = self.range;
        let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        if min < lo - slack || max > hi + slack {
            return Err(SolverError::CflViolation { min, max, lo, hi });
        }
        Ok(())
    }

    /// Ghost values for both sides of every axis, laid out per axis as
    /// `[left slab, right slab]` indexed by the cell index with that axis
    /// removed.
    fn ghosts(&self, field: &Field, t: f64, boundary: &Boundary) -> Vec<[Vec<f64>; 2]> {
        let grid = field.grid();
        let d = grid.dim();
        let counts = grid.counts();
        let strides = grid.strides();
        let u = field.values();
        (0..d)
            .map(|k| {
                let n = counts[k];
                let s = strides[k];
                let slab_len = grid.len() / n;
                let side = |right: bool| -> Vec<f64> {
                    (0..slab_len)
                        .into_par_iter()
                        .map(|slab| {
                            let outer = slab / s;
                            let inner = slab % s;
                            let i = if right { n - 1 } else { 0 };
                            let cell = outer * s * n + i * s + inner;
                            match boundary {
                                Boundary::Outflow => u[cell],
                                Boundary::Constant(c) => *c,
                                Boundary::Dirichlet(g) => {
                                    let mut x = grid.center(cell);
                                    x[k] += if right { grid.dx() } else { -grid.dx() };
                                    g(t, &x)
                                }
                            }
                        })
                        .collect()
                };
                [side(false), side(true)]
            })
            .collect()
    }

    /// Advances `field` from time `t` by `dt`.
    pub fn advance(&self, field: &Field, dt: f64, t: f64, boundary: &Boundary) -> Result<StepOutcome, SolverError> {
        let grid = field.grid();
        let d = grid.dim();
        if d != self.kernels.len() {
            return Err(SolverError::DimensionMismatch {
                flux: self.kernels.len(),
                grid: d,
            });
        }
        let limit = self.dt_max(grid.dx());
        if dt > limit * (1.0 + 1e-12) || dt < 0.0 {
            return Err(SolverError::StepTooLarge { dt, limit });
        }
        let ghosts = self.ghosts(field, t, boundary);
        let (gmin, gmax) = ghosts
            .iter()
            .flat_map(|g| g.iter().flat_map(|v| v.iter()))
            .fold((field.min(), field.max()), |(a, b), &v| (a.min(v), b.max(v)));
        self.check_range(gmin, gmax)?;

        let counts = grid.counts().to_vec();
        let strides = grid.strides().to_vec();
        let u = field.values();
        let ratio = dt / grid.dx();
        let row = counts[d - 1];
        let mut next = vec![0.0; u.len()];
        next.par_chunks_mut(row).enumerate().for_each(|(r, out)| {
            let base = r * row;
            for (j, o) in out.iter_mut().enumerate() {
                let c = base + j;
                let uc = u[c];
                let mut div = 0.0;
                for k in 0..d {
                    let (n, s) = (counts[k], strides[k]);
                    let i = (c / s) % n;
                    let slab = (c / (s * n)) * s + c % s;
                    let left = if i > 0 { u[c - s] } else { ghosts[k][0][slab] };
                    let right = if i + 1 < n { u[c + s] } else { ghosts[k][1][slab] };
                    let kern = &self.kernels[k];
                    div += kern.flux(uc, right) - kern.flux(left, uc);
                }
                *o = uc - ratio * div;
            }
        });

        // mass leaving through the boundary faces
        let face_area = grid.dx().powi(d as i32 - 1);
        let mut out_terms = Vec::new();
        for k in 0..d {
            let (n, s) = (counts[k], strides[k]);
            let kern = &self.kernels[k];
            for slab in 0..grid.len() / n {
                let outer = slab / s;
                let inner = slab % s;
                let first = outer * s * n + inner;
                let last = first + (n - 1) * s;
                out_terms.push(kern.flux(u[last], ghosts[k][1][slab]));
                out_terms.push(-kern.flux(ghosts[k][0][slab], u[first]));
            }
        }
        let outflux = pairwise_sum(&out_terms) * dt * face_area;

        let field = Field::new(grid.clone(), next)?;
        let (min, max) = field.range();
        self.check_range(min, max)?;
        Ok(StepOutcome { field, dt, outflux })
    }

    /// One step with the largest stable time step.
    pub fn step(&self, field: &Field, t: f64, boundary: &Boundary) -> Result<StepOutcome, SolverError> {
        let dt = self.dt_max(field.grid().dx());
        let dt = if dt.is_finite() { dt } else { field.grid().dx() };
        self.advance(field, dt, t, boundary)
    }

    /// Evolves a set of fields with common time steps from `t0` to `t1`,
    /// calling `observe` after each step with the new time. Steps are
    /// shortened to land exactly on `t1`.
    pub fn evolve<F>(&self, members: &mut [Member], t0: f64, t1: f64, mut observe: F) -> Result<f64, SolverError>
    where
        F: FnMut(f64, &[Member]) -> Result<(), SolverError>,
    {
        let Some(first) = members.first() else {
            return Ok(t1);
        };
        let dx = first.field.grid().dx();
        let dt_max = {
            let dt = self.dt_max(dx);
            if dt.is_finite() { dt } else { dx }
        };
        let mut t = t0;
        while t < t1 {
            let remaining = t1 - t;
            let dt = if remaining <= dt_max * (1.0 + 1e-9) { remaining } else { dt_max };
            let dt = dt.min(dt_max);
            let new: Vec<StepOutcome> = members
                .iter()
                .map(|m| self.advance(&m.field, dt, t, &m.boundary))
                .collect::<Result<_, _>>()?;
            for (m, o) in members.iter_mut().zip(new) {
                m.field = o.field;
                m.outflux += o.outflux;
            }
            t = if remaining <= dt_max * (1.0 + 1e-9) { t1 } else { t + dt };
            observe(t, members)?;
        }
        Ok(t)
    }

    /// Runs the scheme for `duration` from `t0`, returning the final field.
    pub fn relax(&self, field: &Field, boundary: &Boundary, t0: f64, duration: f64) -> Result<Field, SolverError> {
        let mut members = vec![Member::new(field.clone(), boundary.clone())];
        self.evolve(&mut members, t0, t0 + duration, |_, _| Ok(()))?;
        Ok(members.pop().expect("one member").field)
    }

    /// Single-field run with probes.
    pub fn run(&self, initial: Field, boundary: &Boundary, opts: &RunOptions) -> Result<Trajectory, SolverError> {
        if !(opts.horizon > 0.0) {
            return Err(SolverError::BadHorizon(opts.horizon));
        }
        for (_, c) in &opts.comparisons {
            initial.check_grid(c)?;
        }
        let names = opts.comparisons.iter().map(|(n, _)| n.clone()).collect();
        let mut traj = Trajectory {
            comparison_names: names,
            rows: Vec::new(),
            snapshots: Vec::new(),
        };
        let record = |t: f64, m: &Member, traj: &mut Trajectory| -> Result<(), SolverError> {
            let l1 = opts
                .comparisons
                .iter()
                .map(|(_, c)| l1_distance(&m.field, c))
                .collect::<Result<Vec<_>, _>>()?;
            traj.rows.push(ProbeRow {
                t,
                sup: m.field.max(),
                inf: m.field.min(),
                mass: m.field.mass(),
                outflux: m.outflux,
                l1,
            });
            Ok(())
        };
        let mut members = vec![Member::new(initial, boundary.clone())];
        record(opts.t0, &members[0], &mut traj)?;
        if opts.snapshot_every.is_some() {
            traj.snapshots.push((opts.t0, members[0].field.clone()));
        }
        let stops = snapshot_times(opts.t0, opts.t0 + opts.horizon, opts.snapshot_every);
        let mut t = opts.t0;
        for stop in stops {
            t = self.evolve(&mut members, t, stop, |tn, m| record(tn, &m[0], &mut traj))?;
            if opts.snapshot_every.is_some() {
                traj.snapshots.push((t, members[0].field.clone()));
            }
        }
        Ok(traj)
    }
}

/// Intermediate stopping times `t0 + k every` up to and including `t1`.
pub fn snapshot_times(t0: f64, t1: f64, every: Option<f64>) -> Vec<f64> {
    match every {
        Some(e) if e > 0.0 => {
            let mut out = Vec::new();
            let mut k = 1;
            loop {
                let t = t0 + k as f64 * e;
                if t >= t1 - 1e-9 * e {
                    out.push(t1);
                    break;
                }
                out.push(t);
                k += 1;
            }
            out
        }
        _ => vec![t1],
    }
}

/// A field together with its boundary policy and accumulated outflux.
#[derive(Clone, Debug)]
pub struct Member {
    pub field: Field,
    pub boundary: Boundary,
    pub outflux: f64,
}

impl Member {
    pub fn new(field: Field, boundary: Boundary) -> Self {
        Member {
            field,
            boundary,
            outflux: 0.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub t0: f64,
    pub horizon: f64,
    pub snapshot_every: Option<f64>,
    pub comparisons: Vec<(String, Field)>,
}

impl RunOptions {
    pub fn new(horizon: f64) -> Self {
        RunOptions {
            t0: 0.0,
            horizon,
            snapshot_every: None,
            comparisons: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeRow {
    pub t: f64,
    pub sup: f64,
    pub inf: f64,
    pub mass: f64,
    /// Cumulative mass that left through the boundary.
    pub outflux: f64,
    pub l1: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub comparison_names: Vec<String>,
    pub rows: Vec<ProbeRow>,
    pub snapshots: Vec<(f64, Field)>,
}

impl Trajectory {
    pub fn final_time(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.t)
    }

    /// CSV with header `t,sup,inf,mass,l1_to_<name>...,outflux`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,sup,inf,mass");
        for n in &self.comparison_names {
            s.push_str(&format!(",l1_to_{n}"));
        }
        s.push_str(",outflux\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{}", r.t, r.sup, r.inf, r.mass));
            for v in &r.l1 {
                s.push_str(&format!(",{v}"));
            }
            s.push_str(&format!(",{}\n", r.outflux));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn sq() -> Poly {
        Poly::new(vec![0.0, 0.0, 1.0])
    }

    #[test]
    fn flux_examples() {
        assert_eq!(numerical_flux(NumericalFlux::Rusanov, &sq(), 2.0, 2.0), 4.0);
        assert_eq!(numerical_flux(NumericalFlux::EngquistOsher, &sq(), 2.0, 2.0), 4.0);
        assert_eq!(numerical_flux(NumericalFlux::Rusanov, &sq(), 1.0, -1.0), 3.0);
        assert_eq!(numerical_flux(NumericalFlux::EngquistOsher, &sq(), -1.0, 1.0), 0.0);
    }

    #[test]
    fn engquist_osher_against_quadrature() {
        let g = Poly::new(vec![0.3, -1.0, 0.0, 1.0]); // s^3 - s + 0.3
        let gp = g.derivative();
        let quad = |lo: f64, hi: f64, pos: bool| {
            let n = 200_000;
            let h = (hi - lo) / n as f64;
            (0..n)
                .map(|i| {
                    let v = gp.eval(lo + (i as f64 + 0.5) * h);
                    if pos { v.max(0.0) } else { v.min(0.0) }
                })
                .sum::<f64>()
                * h
        };
        for &(a, b) in &[(-1.5, 1.2), (0.9, -0.2), (0.1, 0.4), (-2.0, -1.0)] {
            let oracle = g.eval(0.0) + quad(0.0, a, true) + quad(0.0, b, false);
            let got = numerical_flux(NumericalFlux::EngquistOsher, &g, a, b);
            assert!((got - oracle).abs() < 1e-8, "{a} {b}: {got} vs {oracle}");
        }
    }

    #[test]
    fn constant_state_is_fixed() {
        let g = Grid::centered(vec![8, 6], 0.25).unwrap();
        let u = Field::constant(&g, 0.7);
        for kind in [NumericalFlux::Rusanov, NumericalFlux::EngquistOsher] {
            let scheme = SchemeConfig {
                flux: kind,
                ..SchemeConfig::default()
            };
            let s = Solver::new(Flux::burgers(2), &scheme, (0.0, 1.0)).unwrap();
            let out = s.step(&u, 0.0, &Boundary::Constant(0.7)).unwrap();
            assert_eq!(out.field, u);
        }
    }

    #[test]
    fn range_growth_is_reported() {
        let g = Grid::centered(vec![8, 8], 0.25).unwrap();
        let u = Field::constant(&g, 0.7);
        let s = Solver::new(Flux::burgers(2), &SchemeConfig::default(), (0.0, 1.0)).unwrap();
        let err = s.step(&u, 0.0, &Boundary::Constant(2.0)).unwrap_err();
        assert!(matches!(err, SolverError::CflViolation { .. }));
        assert!(matches!(
            Solver::new(Flux::burgers(2), &SchemeConfig { cfl: 0.5, ..SchemeConfig::default() }, (0.0, 1.0)),
            Err(SolverError::BadCfl(_))
        ));
    }

    #[test]
    fn snapshot_schedule_lands_on_horizon() {
        assert_eq!(snapshot_times(0.0, 1.0, Some(0.25)), vec![0.25, 0.5, 0.75, 1.0]);
        assert_eq!(snapshot_times(0.0, 1.0, Some(0.3)).last(), Some(&1.0));
        assert_eq!(snapshot_times(0.0, 1.0, None), vec![1.0]);
    }

    #[test]
    fn keywords_parse() {
        assert_eq!("engquist-osher".parse::<NumericalFlux>(), Ok(NumericalFlux::EngquistOsher));
        assert_eq!(BoundaryKind::Outflow.to_string(), "outflow");
        assert!("upwind".parse::<NumericalFlux>().is_err());
    }
}
