//! Two-valued steady shocks `U = u- on {r < psi(y)}, u+ on {r >= psi(y)}`
//! and the constructions built from them.

mod front;

pub use front::{gauge_from_grads, linear_rho, min_gauge_on_unit_sphere, unit_section_vertices, Front, Pwl};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cone::{admissible_cone, dual_cone, ConeError, DualCone, DEFAULT_RESOLUTION};
use crate::flux::{FluxError, OleinikOptions, ShockPair};
use crate::grid::{Field, Grid, GridError};
use crate::linalg::{self, dot, norm, normalized};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("front normal {0:?} is not an admissible direction")]
    InadmissibleNormal(Vec<f64>),
    #[error("front is not Lipschitz in the gauge: ratio {0} > 1")]
    NotLipschitzInGauge(f64),
    #[error("gauge vanishes on a pair with different front values (front is not a graph in this frame)")]
    GaugeZero,
    #[error("perturbed shock is no longer uniformly non-characteristic (worst margin {worst})")]
    NotUncAfterPerturbation { worst: f64 },
    #[error("the admissible cone has empty interior")]
    EmptyInterior,
    #[error("profiles do not share the same pair and frame")]
    FrameMismatch,
    #[error("profile is not uniformly non-characteristic (rho = {0})")]
    NotUnc(f64),
    #[error("no column of the field crosses the mid level")]
    NoCrossing,
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    Flux(#[from] FluxError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Thresholds for calling a front uniformly non-characteristic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UncPolicy {
    pub rho_max: f64,
    pub angular_margin: f64,
}

impl Default for UncPolicy {
    fn default() -> Self {
        UncPolicy {
            rho_max: 0.9,
            angular_margin: 0.05,
        }
    }
}

const DEFAULT_EXTENT: f64 = 16.0;

#[derive(Clone, Debug)]
pub struct ShockProfile {
    pair: ShockPair,
    dual: DualCone,
    front: Front,
    rho: f64,
    unc: bool,
    extent: f64,
}

impl ShockProfile {
    /// Profile with a given ratio and flag, no validation.
    pub fn from_parts(pair: ShockPair, dual: DualCone, front: Front, rho: f64, unc: bool) -> Self {
        ShockProfile {
            pair,
            dual,
            front,
            rho,
            unc,
            extent: DEFAULT_EXTENT,
        }
    }

    pub fn pair(&self) -> &ShockPair {
        &self.pair
    }
    pub fn dual(&self) -> &DualCone {
        &self.dual
    }
    pub fn front(&self) -> &Front {
        &self.front
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn is_unc(&self) -> bool {
        self.unc
    }
    pub fn velocity(&self) -> &[f64] {
        self.pair.velocity()
    }
    /// Half-width of the H-region sampled by [`estimate_rho`].
    pub fn extent(&self) -> f64 {
        self.extent
    }
    pub fn with_extent(mut self, extent: f64) -> Self {
        self.extent = extent;
        self
    }

    pub fn psi(&self, y: &[f64]) -> f64 {
        self.front.eval(y)
    }

    /// `u-` where `r < psi(y)`, `u+` otherwise (the front itself is `u+`).
    pub fn eval(&self, x: &[f64]) -> f64 {
        let (r, y) = self.dual.frame().coords(x);
        if r < self.front.eval(&y) {
            self.pair.u_minus()
        } else {
            self.pair.u_plus()
        }
    }

    /// Point samples at cell centres.
    pub fn sample(&self, grid: &Grid) -> Field {
        Field::from_fn(grid, |x| self.eval(x))
    }

    /// Cell averages, by quadrature across each cell. When `W` is a grid
    /// axis the fraction of `D-` along `W` is integrated exactly and only
    /// the transverse directions are sampled.
    pub fn cell_averages(&self, grid: &Grid) -> Field {
        const Q: usize = 8;
        let d = grid.dim();
        let dx = grid.dx();
        let frame = self.dual.frame();
        let w = frame.w();
        let axis = (0..d).find(|&k| (w[k].abs() - 1.0).abs() < 1e-12);
        let (um, up) = (self.pair.u_minus(), self.pair.u_plus());
        let offsets: Vec<f64> = (0..Q).map(|q| ((q as f64 + 0.5) / Q as f64 - 0.5) * dx).collect();
        Field::from_fn(grid, |c| {
            let others: Vec<usize> = (0..d).filter(|&k| Some(k) != axis).collect();
            let n = Q.pow(others.len() as u32);
            let mut acc = 0.0;
            let mut x = c.to_vec();
            for q in 0..n {
                let mut rem = q;
                for &k in &others {
                    x[k] = c[k] + offsets[rem % Q];
                    rem /= Q;
                }
                acc += match axis {
                    Some(k) => {
                        x[k] = c[k];
                        let (r, y) = frame.coords(&x);
                        let psi = self.front.eval(&y);
                        // fraction of [r - dx/2, r + dx/2] below psi
                        ((psi - (r - 0.5 * dx)) / dx).clamp(0.0, 1.0)
                    }
                    None => {
                        if self.eval(&x) == um {
                            1.0
                        } else {
                            0.0
                        }
                    }
                };
            }
            up + (um - up) * acc / n as f64
        })
    }

    /// Profile translated by `t v`, as seen in the original frame.
    pub fn eval_moving(&self, t: f64, x: &[f64]) -> f64 {
        let shifted = linalg::axpy(x, -t, self.pair.velocity());
        self.eval(&shifted)
    }

    /// Unit normals `W - grad psi` of the linear pieces (pointing from
    /// `D-` into `D+`).
    pub fn front_normals(&self) -> Vec<Vec<f64>> {
        let grads = if self.front.has_closure() {
            numerical_gradients(&self.front, self.dual.dim() - 1, self.extent)
        } else {
            self.front.piece_gradients(self.dual.dim() - 1)
        };
        let w = self.dual.w();
        let mut out: Vec<Vec<f64>> = Vec::new();
        for g in grads {
            let v = linalg::sub(w, &self.dual.frame().embed(&g));
            if let Some(u) = normalized(&v) {
                if !out.iter().any(|o| norm(&linalg::sub(o, &u)) < 1e-12) {
                    out.push(u);
                }
            }
        }
        out
    }

    fn same_frame(&self, other: &ShockProfile) -> bool {
        self.pair.u_minus() == other.pair.u_minus()
            && self.pair.u_plus() == other.pair.u_plus()
            && self.pair.flux() == other.pair.flux()
            && self.dual.frame() == other.dual.frame()
    }
}

pub fn eval_profile(profile: &ShockProfile, x: &[f64]) -> f64 {
    profile.eval(x)
}

fn numerical_gradients(front: &Front, h_dim: usize, extent: f64) -> Vec<Vec<f64>> {
    let n = 513;
    let h = 2.0 * extent / (n - 1) as f64;
    match h_dim {
        1 => (0..n - 1)
            .map(|i| {
                let y = -extent + i as f64 * h;
                vec![(front.eval(&[y + h]) - front.eval(&[y])) / h]
            })
            .collect(),
        _ => {
            let m = 65;
            let h = 2.0 * extent / (m - 1) as f64;
            let mut out = Vec::new();
            for i in 0..m - 1 {
                for j in 0..m - 1 {
                    let y = [-extent + i as f64 * h, -extent + j as f64 * h];
                    let f0 = front.eval(&y);
                    out.push(vec![
                        (front.eval(&[y[0] + h, y[1]]) - f0) / h,
                        (front.eval(&[y[0], y[1] + h]) - f0) / h,
                    ]);
                }
            }
            out
        }
    }
}

/// Planar shock `{x . nu = offset}` with `D-` on the side `x . nu < offset`.
pub fn make_planar(pair: &ShockPair, dual: &DualCone, nu: &[f64], offset: f64) -> Result<ShockProfile, ProfileError> {
    make_planar_with(pair, dual, nu, offset, &UncPolicy::default())
}

pub fn make_planar_with(
    pair: &ShockPair,
    dual: &DualCone,
    nu: &[f64],
    offset: f64,
    policy: &UncPolicy,
) -> Result<ShockProfile, ProfileError> {
    let nu = normalized(nu).ok_or_else(|| ProfileError::InadmissibleNormal(nu.to_vec()))?;
    if !pair.oleinik(&nu, &OleinikOptions::exact()).admissible {
        return Err(ProfileError::InadmissibleNormal(nu));
    }
    let frame = dual.frame();
    let wn = dot(frame.w(), &nu);
    if wn <= 1e-12 {
        return Err(ProfileError::InadmissibleNormal(nu));
    }
    let slope: Vec<f64> = frame.h().iter().map(|h| -dot(h, &nu) / wn).collect();
    let front = Front::Affine {
        value: offset / wn,
        slope: slope.clone(),
    };
    let rho = linear_rho(dual, &slope);
    let unc = dual.primal_interior() && dual.primal_cone().contains(&nu, policy.angular_margin);
    Ok(ShockProfile::from_parts(pair.clone(), dual.clone(), front, rho, unc))
}

/// Shock whose front is the graph of `front` over H.
pub fn make_graph(pair: &ShockPair, dual: &DualCone, front: Front) -> Result<ShockProfile, ProfileError> {
    make_graph_with(pair, dual, front, &UncPolicy::default(), DEFAULT_EXTENT)
}

pub fn make_graph_with(
    pair: &ShockPair,
    dual: &DualCone,
    front: Front,
    policy: &UncPolicy,
    extent: f64,
) -> Result<ShockProfile, ProfileError> {
    let mut p = ShockProfile::from_parts(pair.clone(), dual.clone(), front, 0.0, false).with_extent(extent);
    let rho = match p.front.rho_bound(dual) {
        Some(r) => r,
        None => estimate_rho(&p, 4096)?,
    };
    if rho > 1.0 + 1e-9 {
        return Err(ProfileError::NotLipschitzInGauge(rho));
    }
    p.rho = rho;
    p.unc = dual.primal_interior() && rho <= policy.rho_max;
    Ok(p)
}

/// Sampled `sup (psi(y') - psi(y)) / psi0(y' - y)` over neighbouring grid
/// pairs inside the profile extent and `n_pairs` random pairs.
pub fn estimate_rho(profile: &ShockProfile, n_pairs: usize) -> Result<f64, ProfileError> {
    let dual = &profile.dual;
    let front = &profile.front;
    let h_dim = dual.dim() - 1;
    let ext = profile.extent;
    let points: Vec<Vec<f64>> = match front {
        Front::Sampled(p) => (0..p.values().len()).map(|i| p.point(i)).collect(),
        _ if h_dim == 1 => {
            let n = 4097;
            (0..n)
                .map(|i| vec![-ext + 2.0 * ext * i as f64 / (n - 1) as f64])
                .collect()
        }
        _ => {
            let n = 129;
            let h = 2.0 * ext / (n - 1) as f64;
            (0..n * n)
                .map(|i| vec![-ext + h * (i / n) as f64, -ext + h * (i % n) as f64])
                .collect()
        }
    };
    let values: Vec<f64> = points.iter().map(|y| front.eval(y)).collect();
    let mut best: f64 = 0.0;
    let mut consider = |i: usize, j: usize| -> Result<(), ProfileError> {
        for (a, b) in [(i, j), (j, i)] {
            let z = linalg::sub(&points[b], &points[a]);
            let dpsi = values[b] - values[a];
            let g = dual.gauge(&z);
            if g <= 1e-14 * norm(&z) {
                if dpsi > 1e-12 * (1.0 + values[a].abs()) {
                    return Err(ProfileError::GaugeZero);
                }
                continue;
            }
            best = best.max(dpsi / g);
        }
        Ok(())
    };
    let n = points.len();
    match (front, h_dim) {
        (Front::Sampled(p), 2) => {
            let (n0, n1) = (p.counts()[0], p.counts()[1]);
            for i in 0..n0 {
                for j in 0..n1 {
                    let c = i * n1 + j;
                    if j + 1 < n1 {
                        consider(c, c + 1)?;
                    }
                    if i + 1 < n0 {
                        consider(c, c + n1)?;
                        if j + 1 < n1 {
                            consider(c, c + n1 + 1)?;
                        }
                        if j > 0 {
                            consider(c, c + n1 - 1)?;
                        }
                    }
                }
            }
        }
        (_, 1) | (Front::Sampled(_), _) => {
            for i in 0..n.saturating_sub(1) {
                consider(i, i + 1)?;
            }
        }
        _ => {
            let m = (n as f64).sqrt().round() as usize;
            for i in 0..m {
                for j in 0..m {
                    let c = i * m + j;
                    if j + 1 < m {
                        consider(c, c + 1)?;
                    }
                    if i + 1 < m {
                        consider(c, c + m)?;
                        if j + 1 < m {
                            consider(c, c + m + 1)?;
                        }
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x0e57_1a7e);
    for _ in 0..n_pairs {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i != j {
            consider(i, j)?;
        }
    }
    Ok(best)
}

/// Re-targets a UNC profile to new end states, keeping front and frame.
pub fn perturb_end_states(
    profile: &ShockProfile,
    u_hat_minus: f64,
    u_hat_plus: f64,
    margin: f64,
) -> Result<ShockProfile, ProfileError> {
    if !profile.unc {
        return Err(ProfileError::NotUnc(profile.rho));
    }
    let pair = ShockPair::new(profile.pair.flux().clone(), u_hat_minus, u_hat_plus)?;
    let cone = admissible_cone(&pair, DEFAULT_RESOLUTION)?;
    if !cone.has_interior() {
        return Err(ProfileError::NotUncAfterPerturbation {
            worst: f64::NEG_INFINITY,
        });
    }
    let worst = profile
        .front_normals()
        .iter()
        .map(|nu| cone.boundary_distance(nu))
        .fold(f64::INFINITY, f64::min);
    if worst < margin {
        return Err(ProfileError::NotUncAfterPerturbation { worst });
    }
    let polar = dual_cone(&cone)?;
    let dual = DualCone::with_frame(
        polar.primal_rays().to_vec(),
        polar.dual_rays().to_vec(),
        profile.dual.frame().clone(),
    )
    .map_err(|_| ProfileError::NotUncAfterPerturbation { worst })?;
    let mut out = ShockProfile::from_parts(pair, dual, profile.front.clone(), 0.0, true).with_extent(profile.extent);
    out.rho = match out.front.rho_bound(&out.dual) {
        Some(r) => r,
        None => estimate_rho(&out, 4096)?,
    };
    Ok(out)
}

/// Axis-aligned box; empty when some `lo > hi`.
#[derive(Clone, Debug, PartialEq)]
pub struct Aabb {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Aabb {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        Aabb { lo, hi }
    }
    pub fn empty(d: usize) -> Self {
        Aabb {
            lo: vec![f64::INFINITY; d],
            hi: vec![f64::NEG_INFINITY; d],
        }
    }
    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(l, h)| l > h)
    }
    pub fn dim(&self) -> usize {
        self.lo.len()
    }
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        !self.is_empty()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| *v >= l - tol && *v <= h + tol)
    }
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        if self.is_empty() {
            return Vec::new();
        }
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| {
                (0..d)
                    .map(|k| if mask >> k & 1 == 1 { self.hi[k] } else { self.lo[k] })
                    .collect()
            })
            .collect()
    }
    pub fn grown(&self, delta: f64) -> Aabb {
        if self.is_empty() {
            return self.clone();
        }
        Aabb {
            lo: self.lo.iter().map(|l| l - delta).collect(),
            hi: self.hi.iter().map(|h| h + delta).collect(),
        }
    }
    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.min(*b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.max(*b)).collect(),
        }
    }
    pub fn bounding(points: &[Vec<f64>]) -> Aabb {
        let d = points.first().map_or(0, Vec::len);
        points.iter().fold(Aabb::empty(d), |b, p| b.union(&Aabb::new(p.clone(), p.clone())))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BumpShape {
    /// `A cos^2(pi |x - c| / (2 R))` inside the ball.
    Cosine,
    Indicator,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bump {
    pub shape: BumpShape,
    pub center: Vec<f64>,
    pub radius: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r = norm(&linalg::sub(x, &self.center));
        if r >= self.radius {
            return 0.0;
        }
        match self.shape {
            BumpShape::Cosine => {
                let c = (std::f64::consts::FRAC_PI_2 * r / self.radius).cos();
                self.amplitude * c * c
            }
            BumpShape::Indicator => self.amplitude,
        }
    }

    pub fn support(&self) -> Aabb {
        Aabb::new(
            self.center.iter().map(|c| c - self.radius).collect(),
            self.center.iter().map(|c| c + self.radius).collect(),
        )
    }
}

/// A compactly supported perturbation: a sum of bumps.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PerturbationSpec {
    pub bumps: Vec<Bump>,
}

impl PerturbationSpec {
    pub fn single(shape: BumpShape, center: Vec<f64>, radius: f64, amplitude: f64) -> Self {
        PerturbationSpec {
            bumps: vec![Bump {
                shape,
                center,
                radius,
                amplitude,
            }],
        }
    }
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.bumps.iter().map(|b| b.eval(x)).sum()
    }
    /// Support box `K`.
    pub fn support(&self, d: usize) -> Aabb {
        self.bumps
            .iter()
            .fold(Aabb::empty(d), |k, b| k.union(&b.support()))
    }
    pub fn is_zero(&self) -> bool {
        self.bumps.iter().all(|b| b.amplitude == 0.0 || b.radius <= 0.0)
    }
}

/// Steady shocks `(lower, upper)` with `lower <= U + phi <= upper` for any
/// `phi` supported in `k` that keeps `U + phi` inside `[u+, u-]`.
///
/// `upper` equals `u-` on `D- U (x+ - A°)` and `lower` equals `u+` on
/// `D+ U (x- + A°)`, with apexes `x+- = +-s W` placed so the cones cover
/// `k` with `pad` to spare.
pub fn sandwich_bounds(profile: &ShockProfile, k: &Aabb, pad: f64) -> Result<(ShockProfile, ShockProfile), ProfileError> {
    if !profile.dual.primal_interior() {
        return Err(ProfileError::EmptyInterior);
    }
    if k.is_empty() {
        return Ok((profile.clone(), profile.clone()));
    }
    let frame = profile.dual.frame();
    let (mut s_lower, mut s_upper) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for v in k.vertices() {
        let (r, y) = frame.coords(&v);
        let minus_y: Vec<f64> = y.iter().map(|c| -c).collect();
        s_lower = s_lower.max(profile.dual.gauge(&y) - r);
        s_upper = s_upper.max(r + profile.dual.gauge(&minus_y));
    }
    let (s_lower, s_upper) = (s_lower + pad, s_upper + pad);
    let h_dim = profile.dual.dim() - 1;
    let zero = vec![0.0; h_dim];
    let upper_front = Front::max(
        profile.front.clone(),
        Front::reflected_gauge(&profile.dual, -1.0, s_upper, zero.clone()),
    );
    let lower_front = Front::min(
        profile.front.clone(),
        Front::gauge(&profile.dual, 1.0, -s_lower, zero),
    );
    let make = |front: Front| {
        let rho = front.rho_bound(&profile.dual).unwrap_or(1.0).max(profile.rho);
        ShockProfile::from_parts(profile.pair.clone(), profile.dual.clone(), front, rho, false).with_extent(profile.extent)
    };
    Ok((make(lower_front), make(upper_front)))
}

/// Fronts `h^ = min(h, max(b, k))` and `k^ = max(k, min(b, h))` for base
/// front `b` and fronts `h` of `r1`, `k` of `r2`; `k^ - h^ = (k - h)+`.
pub fn front_surgery(
    base: &ShockProfile,
    r1: &ShockProfile,
    r2: &ShockProfile,
) -> Result<(ShockProfile, ShockProfile), ProfileError> {
    if !base.same_frame(r1) || !base.same_frame(r2) {
        return Err(ProfileError::FrameMismatch);
    }
    let (b, h, k) = (base.front.clone(), r1.front.clone(), r2.front.clone());
    let h_hat = Front::min(h.clone(), Front::max(b.clone(), k.clone()));
    let k_hat = Front::max(k, Front::min(b, h));
    let rho = base.rho.max(r1.rho).max(r2.rho);
    let unc = base.unc && r1.unc && r2.unc;
    let make = |front: Front| {
        ShockProfile::from_parts(base.pair.clone(), base.dual.clone(), front, rho, unc).with_extent(base.extent)
    };
    Ok((make(h_hat), make(k_hat)))
}

/// Bounds on `D- ∩ (x + A°)` in both frame and Cartesian coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct IntersectionBox {
    /// `psi0(y) <= gauge_radius` on the set.
    pub gauge_radius: f64,
    pub r_lo: f64,
    pub r_hi: f64,
    pub cartesian: Aabb,
}

/// `None` when the bound certifies the intersection empty.
pub fn bounded_intersection(profile: &ShockProfile, x: &[f64]) -> Result<Option<IntersectionBox>, ProfileError> {
    let rho = profile.rho;
    if !profile.unc || rho >= 1.0 {
        return Err(ProfileError::NotUnc(rho));
    }
    let dual = &profile.dual;
    let frame = dual.frame();
    let zero = vec![0.0; dual.dim() - 1];
    let psi0_at = profile.front.eval(&zero);
    let (r0, y0) = frame.coords(x);
    let g0 = dual.gauge(&y0);
    let radius = (psi0_at + g0 - r0) / (1.0 - rho);
    if radius < 0.0 {
        return Ok(None);
    }
    let r_lo = r0 - g0;
    let r_hi = (psi0_at + rho * (g0 - r0)) / (1.0 - rho);
    if r_hi < r_lo {
        return Ok(None);
    }
    let verts = unit_section_vertices(dual).ok_or(ProfileError::EmptyInterior)?;
    let mut corners = Vec::with_capacity(2 * verts.len());
    for v in &verts {
        let y: Vec<f64> = v.iter().map(|c| c * radius).collect();
        corners.push(frame.point(r_lo, &y));
        corners.push(frame.point(r_hi, &y));
    }
    corners.push(frame.point(r_lo, &zero));
    corners.push(frame.point(r_hi, &zero));
    Ok(Some(IntersectionBox {
        gauge_radius: radius,
        r_lo,
        r_hi,
        cartesian: Aabb::bounding(&corners),
    }))
}

/// Front recovered from a field.
#[derive(Clone, Debug)]
pub struct ExtractedFront {
    pub psi: Pwl,
    /// Columns where the mid level was never crossed.
    pub uncrossed: usize,
}

impl ExtractedFront {
    pub fn profile(&self, pair: &ShockPair, dual: &DualCone) -> ShockProfile {
        let front = Front::Sampled(self.psi.clone());
        let rho = front.rho_bound(dual).unwrap_or(f64::INFINITY);
        let extent = self
            .psi
            .origin()
            .iter()
            .map(|o| o.abs())
            .fold(0.0, f64::max);
        ShockProfile::from_parts(pair.clone(), dual.clone(), front, rho, rho <= UncPolicy::default().rho_max)
            .with_extent(extent.max(1.0))
    }
}

/// Grid lines along `W`, indexed like the samples of an extracted front.
struct Columns {
    wk: usize,
    ws: f64,
    hs: Vec<(usize, f64)>,
    h_counts: Vec<usize>,
}

impl Columns {
    fn new(grid: &Grid, dual: &DualCone) -> Result<Self, ProfileError> {
        let d = grid.dim();
        let frame = dual.frame();
        let axis_of = |v: &[f64]| -> Option<(usize, f64)> {
            let k = (0..d).max_by(|&i, &j| v[i].abs().total_cmp(&v[j].abs()))?;
            (v[k].abs() > 1.0 - 1e-12).then(|| (k, v[k].signum()))
        };
        let (wk, ws) = axis_of(frame.w()).ok_or(ProfileError::Unsupported("front extraction needs W along a grid axis"))?;
        let hs: Vec<(usize, f64)> = frame
            .h()
            .iter()
            .map(|h| axis_of(h))
            .collect::<Option<_>>()
            .ok_or(ProfileError::Unsupported("front extraction needs H along grid axes"))?;
        let h_counts = hs.iter().map(|&(a, _)| grid.counts()[a]).collect();
        Ok(Columns { wk, ws, hs, h_counts })
    }

    fn len(&self) -> usize {
        self.h_counts.iter().product()
    }

    /// Flat cell indices of column `flat`, ordered by increasing `r`, with
    /// the `r` coordinate of each cell centre.
    fn column(&self, grid: &Grid, flat: usize) -> Vec<(usize, f64)> {
        let mut rem = flat;
        let mut idx = vec![0usize; grid.dim()];
        for (m, &(a, s)) in self.hs.iter().enumerate().rev() {
            let n = self.h_counts[m];
            let j = rem % n;
            rem /= n;
            idx[a] = if s > 0.0 { j } else { n - 1 - j };
        }
        let n_w = grid.counts()[self.wk];
        (0..n_w)
            .map(|step| {
                let i = if self.ws > 0.0 { step } else { n_w - 1 - step };
                idx[self.wk] = i;
                let r = self.ws * (grid.lo()[self.wk] + (i as f64 + 0.5) * grid.dx());
                (grid.flat_index(&idx), r)
            })
            .collect()
    }

    fn origin(&self, grid: &Grid) -> Vec<f64> {
        let dx = grid.dx();
        self.hs
            .iter()
            .map(|&(a, s)| {
                let first = grid.lo()[a] + 0.5 * dx;
                let last = grid.lo()[a] + (grid.counts()[a] as f64 - 0.5) * dx;
                if s > 0.0 { first } else { -last }
            })
            .collect()
    }
}

/// Last crossing of `(u- + u+)/2` along `W` in every grid column.
///
/// Requires `W` to be a coordinate direction, so each column is a grid
/// line and H-coordinates of columns form a uniform grid.
pub fn extract_front(field: &Field, pair: &ShockPair, dual: &DualCone) -> Result<ExtractedFront, ProfileError> {
    let grid = field.grid();
    let cols = Columns::new(grid, dual)?;
    let mid = 0.5 * (pair.u_minus() + pair.u_plus());
    let dx = grid.dx();
    let total = cols.len();
    let mut values = vec![0.0; total];
    let mut uncrossed = 0;
    let u = field.values();
    for (flat, out) in values.iter_mut().enumerate() {
        let column = cols.column(grid, flat);
        let n_w = column.len();
        let rs: Vec<f64> = column.iter().map(|c| c.1).collect();
        let us: Vec<f64> = column.iter().map(|c| u[c.0]).collect();
        let crossing = (0..n_w - 1).rev().find(|&i| {
            let (a, b) = (us[i] - mid, us[i + 1] - mid);
            (a >= 0.0 && b < 0.0) || (a < 0.0 && b >= 0.0)
        });
        *out = match crossing {
            Some(i) => {
                let frac = (us[i] - mid) / (us[i] - us[i + 1]);
                rs[i] + frac * (rs[i + 1] - rs[i])
            }
            None => {
                uncrossed += 1;
                if us[0] >= mid {
                    rs[n_w - 1] + 0.5 * dx
                } else {
                    rs[0] - 0.5 * dx
                }
            }
        };
    }
    if uncrossed == total {
        return Err(ProfileError::NoCrossing);
    }
    let origin = cols.origin(grid);
    let psi = Pwl::new(origin, dx, cols.h_counts.clone(), values).ok_or(ProfileError::NoCrossing)?;
    Ok(ExtractedFront { psi, uncrossed })
}
