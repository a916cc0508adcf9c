//! Admissibility cones, their duals, the `(r, y)` frame and the gauge.
//!
//! The admissible cone `A` collects the directions in which the two-state
//! discontinuity passes the Oleinik chord test. Its dual `A°` is computed
//! either by polarising `A` or directly as the cone spanned by
//! `Fbar - F(s)`; both routes are kept so they can be compared.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::flux::{OleinikOptions, ShockPair};
use crate::hull::convex_hull_indices;
use crate::linalg::{self, angle, complement_basis, cross, dot, norm, normalized, polar, wrap_angle};

pub const DEFAULT_RESOLUTION: f64 = 1e-4;
pub const DEFAULT_SPHERE_SAMPLES: usize = 4096;
const COARSE_ANGLES: usize = 1024;
const MAX_SPHERE_SAMPLES: usize = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeError {
    #[error("the admissible cone is trivial (only the zero direction)")]
    TrivialCone,
    #[error("cone geometry is only implemented for d = 2 and d = 3 (got d = {0})")]
    UnsupportedDimension(usize),
    #[error("frame direction W is not interior to the dual cone")]
    FrameNotInterior,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConeShape {
    Trivial,
    /// Angles `lo <= hi` with `lo` in `(-pi, pi]`; `hi` is not wrapped.
    Sector { lo: f64, hi: f64 },
    /// Extreme unit rays in counter-clockwise order around their mean.
    Polyhedral { rays: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibleCone {
    dim: usize,
    shape: ConeShape,
    resolution: f64,
    samples: Vec<Vec<f64>>,
}

impl AdmissibleCone {
    pub fn trivial(dim: usize) -> Self {
        AdmissibleCone {
            dim,
            shape: ConeShape::Trivial,
            resolution: 0.0,
            samples: Vec::new(),
        }
    }

    /// Planar sector between the angles `lo` and `hi` (counter-clockwise).
    pub fn sector(lo: f64, hi: f64) -> Self {
        let lo_w = wrap_angle(lo);
        let width = (hi - lo).max(0.0);
        AdmissibleCone {
            dim: 2,
            shape: ConeShape::Sector {
                lo: lo_w,
                hi: lo_w + width,
            },
            resolution: 0.0,
            samples: Vec::new(),
        }
    }

    /// Polyhedral cone from arbitrary generators (hulled).
    pub fn polyhedral(generators: &[Vec<f64>]) -> Self {
        let dim = generators.first().map_or(3, Vec::len);
        match polar_3d(generators) {
            Some(p) => AdmissibleCone {
                dim,
                shape: ConeShape::Polyhedral { rays: p.extreme },
                resolution: 0.0,
                samples: Vec::new(),
            },
            None => AdmissibleCone::trivial(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn shape(&self) -> &ConeShape {
        &self.shape
    }
    pub fn resolution(&self) -> f64 {
        self.resolution
    }
    /// Admissible sphere samples (d = 3 only).
    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self.shape, ConeShape::Trivial)
    }

    pub fn has_interior(&self) -> bool {
        match &self.shape {
            ConeShape::Trivial => false,
            ConeShape::Sector { lo, hi } => hi > lo,
            ConeShape::Polyhedral { rays } => rays.len() >= 3,
        }
    }

    pub fn extreme_rays(&self) -> Vec<Vec<f64>> {
        match &self.shape {
            ConeShape::Trivial => Vec::new(),
            ConeShape::Sector { lo, hi } if hi == lo => vec![polar(*lo)],
            ConeShape::Sector { lo, hi } => vec![polar(*lo), polar(*hi)],
            ConeShape::Polyhedral { rays } => rays.clone(),
        }
    }

    /// Signed distance of the unit direction `nu` to the cone boundary:
    /// an angle for sectors, `asin` of the smallest facet functional for
    /// polyhedra. Negative outside.
    pub fn boundary_distance(&self, nu: &[f64]) -> f64 {
        let Some(nu) = normalized(nu) else {
            return f64::NEG_INFINITY;
        };
        match &self.shape {
            ConeShape::Trivial => f64::NEG_INFINITY,
            ConeShape::Sector { lo, hi } => {
                let width = hi - lo;
                let delta = wrap_angle(angle(&nu) - lo);
                if delta >= 0.0 && delta <= width {
                    delta.min(width - delta)
                } else {
                    // outside: distance to the nearer edge, negated
                    let to_lo = delta.abs();
                    let to_hi = wrap_angle(angle(&nu) - hi).abs();
                    -to_lo.min(to_hi)
                }
            }
            ConeShape::Polyhedral { rays } => {
                if rays.len() < 3 {
                    return f64::NEG_INFINITY;
                }
                facet_normals(rays)
                    .iter()
                    .map(|n| dot(n, &nu).clamp(-1.0, 1.0).asin())
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Membership with an angular margin to the boundary.
    pub fn contains(&self, nu: &[f64], margin: f64) -> bool {
        if let ConeShape::Sector { lo, hi } = &self.shape {
            if margin <= 0.0 && hi == lo {
                return normalized(nu).is_some_and(|n| (wrap_angle(angle(&n) - lo)).abs() <= 1e-12);
            }
        }
        self.boundary_distance(nu) >= margin.max(0.0) - 1e-12
    }
}

pub fn cone_contains(cone: &AdmissibleCone, nu: &[f64], margin: f64) -> bool {
    cone.contains(nu, margin)
}

fn is_admissible(pair: &ShockPair, xi: &[f64]) -> bool {
    pair.oleinik(xi, &OleinikOptions::exact()).admissible
}

/// Computes the admissible cone of `pair`.
///
/// In the plane the sector is localised on a coarse angular scan and its
/// two edges are bisected to `resolution`. In space a Fibonacci sphere with
/// spacing about `resolution` is tested and hulled.
pub fn admissible_cone(pair: &ShockPair, resolution: f64) -> Result<AdmissibleCone, ConeError> {
    match pair.dim() {
        2 => Ok(planar_cone(pair, resolution)),
        3 => Ok(spatial_cone(pair, resolution)),
        d => Err(ConeError::UnsupportedDimension(d)),
    }
}

fn planar_cone(pair: &ShockPair, resolution: f64) -> AdmissibleCone {
    let res = resolution.max(1e-12);
    let step = 2.0 * PI / COARSE_ANGLES as f64;
    let theta = |k: i64| -PI + k as f64 * step;
    let flags: Vec<bool> = (0..COARSE_ANGLES as i64)
        .into_par_iter()
        .map(|k| is_admissible(pair, &polar(theta(k))))
        .collect();

    let start = match flags.iter().position(|&a| a) {
        Some(k) => k as i64,
        None => {
            // A cone thinner than the scan step (a ray, say) can slip through;
            // look around the angle of smallest relative violation.
            match refine_thin_cone(pair, step, res) {
                Some(c) => return c,
                None => return AdmissibleCone::trivial(2),
            }
        }
    };
    let n = COARSE_ANGLES as i64;
    let at = |k: i64| flags[k.rem_euclid(n) as usize];
    let mut lo_k = start;
    while at(lo_k - 1) && start - lo_k < n {
        lo_k -= 1;
    }
    let mut hi_k = start;
    while at(hi_k + 1) && hi_k - start < n {
        hi_k += 1;
    }
    if hi_k - lo_k + 1 >= n {
        // every sampled direction admissible; only possible for degenerate fluxes
        return AdmissibleCone {
            dim: 2,
            shape: ConeShape::Sector { lo: -PI, hi: PI },
            resolution: res,
            samples: Vec::new(),
        };
    }
    let lo = bisect_edge(pair, theta(lo_k), theta(lo_k - 1), res);
    let hi = bisect_edge(pair, theta(hi_k), theta(hi_k + 1), res);
    let lo_w = wrap_angle(lo);
    AdmissibleCone {
        dim: 2,
        shape: ConeShape::Sector {
            lo: lo_w,
            hi: lo_w + (hi - lo).max(0.0),
        },
        resolution: res,
        samples: Vec::new(),
    }
}

/// Bisects between an admissible angle `inside` and an inadmissible angle
/// `outside`, returning the midpoint of the final bracket.
fn bisect_edge(pair: &ShockPair, mut inside: f64, mut outside: f64, res: f64) -> f64 {
    while (outside - inside).abs() > res {
        let mid = 0.5 * (inside + outside);
        if is_admissible(pair, &polar(mid)) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    0.5 * (inside + outside)
}

fn refine_thin_cone(pair: &ShockPair, step: f64, res: f64) -> Option<AdmissibleCone> {
    let rel_violation = |t: f64| {
        let xi = polar(t);
        pair.oleinik(&xi, &OleinikOptions::exact()).worst_violation
    };
    let (mut best, mut best_v) = (0.0, f64::INFINITY);
    for k in 0..COARSE_ANGLES {
        let t = -PI + k as f64 * step;
        let v = rel_violation(t);
        if v < best_v {
            best_v = v;
            best = t;
        }
    }
    let fine = 512;
    for j in 0..=2 * fine {
        let t = best - step + j as f64 * step / fine as f64;
        if is_admissible(pair, &polar(t)) {
            let sub = step / fine as f64;
            let lo = bisect_edge(pair, t, t - sub, res);
            let hi = bisect_edge(pair, t, t + sub, res);
            let lo_w = wrap_angle(lo);
            return Some(AdmissibleCone {
                dim: 2,
                shape: ConeShape::Sector {
                    lo: lo_w,
                    hi: lo_w + (hi - lo).max(0.0),
                },
                resolution: res,
                samples: Vec::new(),
            });
        }
    }
    None
}

/// Quasi-uniform unit vectors on the sphere.
pub fn fibonacci_sphere(n: usize) -> Vec<Vec<f64>> {
    let golden = PI * (3.0 - 5.0_f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - (2 * k + 1) as f64 / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = k as f64 * golden;
            vec![r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Sphere sample count giving nearest-neighbour spacing about `resolution`.
pub fn sphere_samples_for(resolution: f64) -> usize {
    let n = (4.0 * PI / (resolution * resolution)).ceil();
    if n.is_finite() {
        (n as usize).clamp(64, MAX_SPHERE_SAMPLES)
    } else {
        MAX_SPHERE_SAMPLES
    }
}

fn spatial_cone(pair: &ShockPair, resolution: f64) -> AdmissibleCone {
    let dirs = fibonacci_sphere(sphere_samples_for(resolution));
    let samples: Vec<Vec<f64>> = dirs
        .into_par_iter()
        .filter(|xi| is_admissible(pair, xi))
        .collect();
    if samples.is_empty() {
        return AdmissibleCone::trivial(3);
    }
    let shape = match polar_3d(&samples) {
        Some(p) => ConeShape::Polyhedral { rays: p.extreme },
        None => ConeShape::Trivial,
    };
    AdmissibleCone {
        dim: 3,
        shape,
        resolution,
        samples,
    }
}

struct Polar3 {
    /// Extreme generators, counter-clockwise about `axis`.
    extreme: Vec<Vec<f64>>,
    /// Unit inward normals of the facets between consecutive extreme rays;
    /// empty when fewer than three extreme rays exist.
    normals: Vec<Vec<f64>>,
}

/// Extreme rays and facet normals of the cone spanned by `gens` in R^3.
/// Returns `None` when the generators are not contained in an open
/// half-space around their mean (the cone is then not pointed, or empty).
fn polar_3d(gens: &[Vec<f64>]) -> Option<Polar3> {
    let units: Vec<Vec<f64>> = gens.iter().filter_map(|g| normalized(g)).collect();
    if units.is_empty() {
        return None;
    }
    let mean = units
        .iter()
        .fold(vec![0.0; 3], |acc, u| linalg::add(&acc, u));
    let axis = normalized(&mean)?;
    if units.iter().any(|u| dot(u, &axis) <= 1e-12) {
        return None;
    }
    let basis = complement_basis(&axis);
    let (e1, e2) = (&basis[0], &basis[1]);
    let projected: Vec<[f64; 2]> = units
        .iter()
        .map(|u| {
            let s = dot(u, &axis);
            [dot(u, e1) / s, dot(u, e2) / s]
        })
        .collect();
    let hull = convex_hull_indices(&projected);
    // orient counter-clockwise about the axis: e1 x e2 must point along it
    let flip = dot(&cross(e1, e2), &axis) < 0.0;
    let mut extreme: Vec<Vec<f64>> = hull.iter().map(|&i| units[i].clone()).collect();
    if flip {
        extreme.reverse();
    }
    let normals = if extreme.len() >= 3 { facet_normals(&extreme) } else { Vec::new() };
    Some(Polar3 { extreme, normals })
}

/// Inward unit normals `a_i x a_{i+1}` of a counter-clockwise ray cycle.
fn facet_normals(rays: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rays.len();
    let centre = normalized(&rays.iter().fold(vec![0.0; 3], |acc, r| linalg::add(&acc, r)))
        .unwrap_or_else(|| rays[0].clone());
    (0..n)
        .filter_map(|i| {
            let c = cross(&rays[i], &rays[(i + 1) % n]);
            let mut v = normalized(&c)?;
            if dot(&v, &centre) < 0.0 {
                v = linalg::scale(&v, -1.0);
            }
            Some(v)
        })
        .collect()
}

/// The frame `R^d = H (+) R W` with coordinates `x = r W + sum_j y_j h_j`,
/// plus a unit vector `lambda` of the primal cone.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    w: Vec<f64>,
    h: Vec<Vec<f64>>,
    lambda: Vec<f64>,
}

impl Frame {
    pub fn new(w: &[f64], lambda: &[f64]) -> Self {
        let w = normalized(w).expect("frame direction must be nonzero");
        let h = complement_basis(&w);
        Frame {
            w,
            h,
            lambda: normalized(lambda).unwrap_or_default(),
        }
    }
    pub fn w(&self) -> &[f64] {
        &self.w
    }
    pub fn h(&self) -> &[Vec<f64>] {
        &self.h
    }
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }
    pub fn dim(&self) -> usize {
        self.w.len()
    }
    /// `(r, y)` of the point `x`.
    pub fn coords(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (dot(x, &self.w), self.h.iter().map(|h| dot(x, h)).collect())
    }
    /// `sum_j y_j h_j`.
    pub fn embed(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (yj, h) in y.iter().zip(&self.h) {
            for (o, hk) in out.iter_mut().zip(h) {
                *o += yj * hk;
            }
        }
        out
    }
    pub fn point(&self, r: f64, y: &[f64]) -> Vec<f64> {
        linalg::axpy(&self.embed(y), r, &self.w)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualCone {
    dim: usize,
    /// Extreme rays of the primal cone `A`; the dual is `{n : n.a >= 0}`.
    primal_rays: Vec<Vec<f64>>,
    /// Extreme rays of `A°` (empty when `A` has no interior and `A°`
    /// contains a line).
    dual_rays: Vec<Vec<f64>>,
    frame: Frame,
    primal_interior: bool,
}

impl DualCone {
    /// Assembles a dual cone from primal and dual extreme rays and a frame,
    /// checking `W.a > 0` for every primal ray `a`.
    pub fn with_frame(
        primal_rays: Vec<Vec<f64>>,
        dual_rays: Vec<Vec<f64>>,
        frame: Frame,
    ) -> Result<Self, ConeError> {
        if primal_rays.is_empty() {
            return Err(ConeError::TrivialCone);
        }
        if primal_rays.iter().any(|a| dot(a, frame.w()) <= 1e-12) {
            return Err(ConeError::FrameNotInterior);
        }
        let primal_interior = match frame.dim() {
            2 => primal_rays.len() == 2,
            _ => primal_rays.len() >= 3,
        };
        Ok(DualCone {
            dim: frame.dim(),
            primal_rays,
            dual_rays,
            frame,
            primal_interior,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn frame(&self) -> &Frame {
        &self.frame
    }
    pub fn w(&self) -> &[f64] {
        self.frame.w()
    }
    pub fn primal_rays(&self) -> &[Vec<f64>] {
        &self.primal_rays
    }
    pub fn dual_rays(&self) -> &[Vec<f64>] {
        &self.dual_rays
    }
    /// Whether the primal cone has nonempty interior. When it does not,
    /// `A°` is a half-space or wedge and the shock is planar-rigid.
    pub fn primal_interior(&self) -> bool {
        self.primal_interior
    }

    /// Linear pieces of the gauge: `psi0(y) = max_k grad_k . y`.
    pub fn gauge_gradients(&self) -> Vec<Vec<f64>> {
        let w = self.frame.w();
        self.primal_rays
            .iter()
            .map(|a| {
                let s = dot(w, a);
                self.frame.h().iter().map(|h| -dot(h, a) / s).collect()
            })
            .collect()
    }

    /// `psi0(y) = min {r : y + r W in A°}` for `y` in H-coordinates.
    pub fn gauge(&self, y: &[f64]) -> f64 {
        let point = self.frame.embed(y);
        self.gauge_of_vector(&point)
    }

    /// Gauge of the H-component of an arbitrary vector of R^d (its
    /// W-component is ignored).
    pub fn gauge_of_vector(&self, x: &[f64]) -> f64 {
        let w = self.frame.w();
        let rw = dot(x, w);
        let yv = linalg::axpy(x, -rw, w);
        self.primal_rays
            .iter()
            .map(|a| -dot(&yv, a) / dot(w, a))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest `C` with `psi0(y) <= C |y|`.
    pub fn gauge_lipschitz(&self) -> f64 {
        self.gauge_gradients()
            .iter()
            .map(|g| norm(g))
            .fold(0.0, f64::max)
    }

    /// `n . a >= -tol |n|` for every primal ray.
    pub fn contains(&self, n: &[f64], tol: f64) -> bool {
        let nn = norm(n);
        self.primal_rays.iter().all(|a| dot(n, a) >= -tol * nn)
    }

    /// The primal cone recovered from the stored rays.
    pub fn primal_cone(&self) -> AdmissibleCone {
        match self.dim {
            2 => {
                let angles: Vec<f64> = self.primal_rays.iter().map(|a| angle(a)).collect();
                if angles.len() == 1 {
                    AdmissibleCone::sector(angles[0], angles[0])
                } else {
                    let width = wrap_angle(angles[1] - angles[0]).abs();
                    AdmissibleCone::sector(angles[0], angles[0] + width)
                }
            }
            _ => AdmissibleCone::polyhedral(&self.primal_rays),
        }
    }

    /// Dual arc `[lo, hi]` (d = 2). For a primal ray the arc is the
    /// half-plane of width pi.
    pub fn dual_arc(&self) -> Option<(f64, f64)> {
        if self.dim != 2 {
            return None;
        }
        let a0 = angle(&self.primal_rays[0]);
        if self.primal_rays.len() == 1 {
            return Some((a0 - FRAC_PI_2, a0 + FRAC_PI_2));
        }
        let width = wrap_angle(angle(&self.primal_rays[1]) - a0).abs();
        Some((a0 + width - FRAC_PI_2, a0 + FRAC_PI_2))
    }

    /// Unit direction `n` is in the dual; otherwise the angle to it.
    fn angular_distance_to(&self, n: &[f64]) -> f64 {
        let Some(n) = normalized(n) else { return 0.0 };
        if self.contains(&n, 1e-13) {
            return 0.0;
        }
        match self.dim {
            2 => {
                let (lo, hi) = self.dual_arc().expect("planar");
                let t = angle(&n);
                wrap_angle(t - lo).abs().min(wrap_angle(t - hi).abs())
            }
            _ => {
                // closest point of the spherical polygon boundary
                let rays = &self.dual_rays;
                let mut best = f64::INFINITY;
                for (i, a) in rays.iter().enumerate() {
                    best = best.min(dot(a, &n).clamp(-1.0, 1.0).acos());
                    let b = &rays[(i + 1) % rays.len()];
                    if let Some(p) = project_on_arc(&n, a, b) {
                        best = best.min(dot(&p, &n).clamp(-1.0, 1.0).acos());
                    }
                }
                best
            }
        }
    }
}

/// Nearest point to `n` on the great-circle arc from `a` to `b`, if the
/// projection falls strictly inside the arc.
fn project_on_arc(n: &[f64], a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let normal = normalized(&cross(a, b))?;
    let inplane = linalg::axpy(n, -dot(n, &normal), &normal);
    let p = normalized(&inplane)?;
    let ab = cross(a, b);
    let ap = cross(a, &p);
    let pb = cross(&p, b);
    (dot(&ap, &ab) > 0.0 && dot(&pb, &ab) > 0.0).then_some(p)
}

/// Hausdorff distance between the unit-sphere sections of two dual cones,
/// measured along their extreme rays (exact for planar sectors).
pub fn angular_hausdorff(a: &DualCone, b: &DualCone) -> f64 {
    if let (Some((alo, ahi)), Some((blo, bhi))) = (a.dual_arc(), b.dual_arc()) {
        return wrap_angle(alo - blo).abs().max(wrap_angle(ahi - bhi).abs());
    }
    let one_way = |x: &DualCone, y: &DualCone| {
        x.dual_rays
            .iter()
            .map(|r| y.angular_distance_to(r))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Chebyshev-style pick of a unit `lambda` in the primal cone maximising the
/// smallest inner product with the dual generators.
fn pick_lambda(primal: &[Vec<f64>], dual: &[Vec<f64>]) -> Vec<f64> {
    let score = |l: &[f64]| {
        dual.iter()
            .map(|n| dot(l, n))
            .fold(f64::INFINITY, f64::min)
    };
    let d = primal[0].len();
    let mean = normalized(&primal.iter().fold(vec![0.0; d], |acc, a| linalg::add(&acc, a)))
        .unwrap_or_else(|| primal[0].clone());
    if dual.is_empty() {
        return mean;
    }
    let mut candidates = vec![mean];
    candidates.extend(primal.iter().cloned());
    for i in 0..primal.len() {
        let j = (i + 1) % primal.len();
        if let Some(m) = normalized(&linalg::add(&primal[i], &primal[j])) {
            candidates.push(m);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a3b_da00);
    for _ in 0..256 {
        let mut v = vec![0.0; d];
        for a in primal {
            v = linalg::axpy(&v, rng.gen::<f64>(), a);
        }
        if let Some(u) = normalized(&v) {
            candidates.push(u);
        }
    }
    candidates
        .into_iter()
        .max_by(|x, y| score(x).total_cmp(&score(y)))
        .expect("at least one candidate")
}

fn assemble(primal: Vec<Vec<f64>>, dual: Vec<Vec<f64>>) -> Result<DualCone, ConeError> {
    let d = primal[0].len();
    let w = if dual.len() >= 2 {
        let sum = dual.iter().fold(vec![0.0; d], |acc, n| linalg::add(&acc, n));
        normalized(&sum).ok_or(ConeError::TrivialCone)?
    } else {
        normalized(&primal.iter().fold(vec![0.0; d], |acc, a| linalg::add(&acc, a)))
            .ok_or(ConeError::TrivialCone)?
    };
    let lambda = pick_lambda(&primal, &dual);
    DualCone::with_frame(primal, dual, Frame::new(&w, &lambda))
}

/// Dual of an admissible cone by polarisation.
pub fn dual_cone(cone: &AdmissibleCone) -> Result<DualCone, ConeError> {
    match cone.shape() {
        ConeShape::Trivial => Err(ConeError::TrivialCone),
        ConeShape::Sector { lo, hi } => {
            if hi == lo {
                return assemble(vec![polar(*lo)], Vec::new());
            }
            let primal = vec![polar(*lo), polar(*hi)];
            let dual = vec![polar(hi - FRAC_PI_2), polar(lo + FRAC_PI_2)];
            assemble(primal, dual)
        }
        ConeShape::Polyhedral { rays } => {
            if rays.len() >= 3 {
                let normals = facet_normals(rays);
                assemble(rays.clone(), normals)
            } else {
                assemble(rays.clone(), Vec::new())
            }
        }
    }
}

/// Dual cone as the cone spanned by `Fbar - F(s)`, `s` in `(u+, u-)`,
/// together with the limiting directions `F'(u-)` and `-F'(u+)` at the end
/// points where the generators vanish.
pub fn dual_cone_from_flux(pair: &ShockPair, n_samples: usize) -> Result<DualCone, ConeError> {
    let d = pair.dim();
    if d != 2 && d != 3 {
        return Err(ConeError::UnsupportedDimension(d));
    }
    let n = n_samples.max(2);
    let (lo, hi) = (pair.u_plus(), pair.u_minus());
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let reduced = pair.reduced();
    let fbar = pair.f_bar();
    let mut gens: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let s = mid + half * ((2 * k + 1) as f64 * PI / (2 * n) as f64).cos();
            linalg::sub(fbar, &reduced.eval(s, 0))
        })
        .collect();
    gens.push(reduced.eval(hi, 1));
    gens.push(linalg::scale(&reduced.eval(lo, 1), -1.0));
    let scale = gens.iter().map(|g| norm(g)).fold(0.0, f64::max);
    let gens: Vec<Vec<f64>> = gens
        .into_iter()
        .filter(|g| norm(g) > 1e-14 * scale.max(f64::MIN_POSITIVE))
        .collect();
    if gens.is_empty() {
        return Err(ConeError::TrivialCone);
    }

    if d == 2 {
        let mut angles: Vec<f64> = gens.iter().map(|g| angle(g)).collect();
        angles.sort_by(f64::total_cmp);
        let m = angles.len();
        let (mut gap, mut gap_end) = (angles[0] + 2.0 * PI - angles[m - 1], 0);
        for i in 1..m {
            let g = angles[i] - angles[i - 1];
            if g > gap {
                gap = g;
                gap_end = i;
            }
        }
        let arc_lo = angles[gap_end];
        let width = 2.0 * PI - gap;
        let tol = 1e-9;
        if width > PI + tol {
            return Err(ConeError::TrivialCone);
        }
        if width >= PI - tol {
            // dual is a half-plane: A is the ray through the arc midpoint
            return assemble(vec![polar(arc_lo + 0.5 * width)], Vec::new());
        }
        let dual = vec![polar(arc_lo), polar(arc_lo + width)];
        let primal = vec![polar(arc_lo + width - FRAC_PI_2), polar(arc_lo + FRAC_PI_2)];
        assemble(primal, dual)
    } else {
        let p = polar_3d(&gens).ok_or(ConeError::TrivialCone)?;
        if p.normals.is_empty() {
            return Err(ConeError::TrivialCone);
        }
        assemble(p.normals, p.extreme)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::{Flux, ShockPair};
    use std::f64::consts::FRAC_PI_4;

    fn burgers(um: f64, up: f64) -> ShockPair {
        ShockPair::new(Flux::burgers(2), um, up).unwrap()
    }

    #[test]
    fn burgers_symmetric_sector() {
        let cone = admissible_cone(&burgers(1.0, -1.0), 1e-4).unwrap();
        let ConeShape::Sector { lo, hi } = *cone.shape() else { panic!() };
        assert!((lo + FRAC_PI_4).abs() < 1e-4, "{lo}");
        assert!((hi - FRAC_PI_4).abs() < 1e-4, "{hi}");
        assert!(cone.contains(&[1.0, 0.0], 0.5));
        assert!(!cone.contains(&[1.0, 1.0], 0.1));
        assert!(!cone.contains(&[0.0, 1.0], 0.0));
    }

    #[test]
    fn burgers_one_zero_sector() {
        // xi1 + xi2 >= 0 and xi1 + 2 xi2 >= 0
        let cone = admissible_cone(&burgers(1.0, 0.0), 1e-5).unwrap();
        let ConeShape::Sector { lo, hi } = *cone.shape() else { panic!() };
        assert!((lo - (-1.0_f64).atan2(2.0)).abs() < 1e-5, "{lo}");
        assert!((hi - 3.0 * FRAC_PI_4).abs() < 1e-5, "{hi}");
    }

    #[test]
    fn trivial_cone_for_odd_powers() {
        let f = Flux::from_coeffs(vec![
            vec![0.0, 0.0, 0.0, 1.0],
            vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        ])
        .unwrap();
        let pair = ShockPair::new(f, 1.0, -1.0).unwrap();
        let cone = admissible_cone(&pair, 1e-4).unwrap();
        assert!(cone.is_trivial());
        assert_eq!(dual_cone(&cone), Err(ConeError::TrivialCone));
        assert_eq!(dual_cone_from_flux(&pair, 512).map(|_| ()), Err(ConeError::TrivialCone));
    }

    #[test]
    fn self_dual_quarter_sector_and_gauge() {
        let cone = admissible_cone(&burgers(1.0, -1.0), 1e-6).unwrap();
        let dual = dual_cone(&cone).unwrap();
        assert!((dual.w()[0] - 1.0).abs() < 1e-6);
        let (lo, hi) = dual.dual_arc().unwrap();
        assert!((lo + FRAC_PI_4).abs() < 1e-5 && (hi - FRAC_PI_4).abs() < 1e-5);
        for &y in &[-3.0, -0.5, 0.0, 0.2, 7.0] {
            assert!((dual.gauge(&[y]) - y.abs()).abs() < 1e-5 * (1.0 + y.abs()));
        }
        assert!((dual.gauge_lipschitz() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn both_dual_routes_agree() {
        for (um, up) in [(1.0, -1.0), (1.0, 0.0), (0.5, -2.0), (2.0, 1.5)] {
            let pair = burgers(um, up);
            let a = dual_cone(&admissible_cone(&pair, 1e-5).unwrap()).unwrap();
            let b = dual_cone_from_flux(&pair, 4096).unwrap();
            let h = angular_hausdorff(&a, &b);
            assert!(h < 2e-3, "({um},{up}) hausdorff {h}");
        }
    }

    #[test]
    fn one_zero_dual_spanned_by_expected_rays() {
        let d = dual_cone_from_flux(&burgers(1.0, 0.0), 4096).unwrap();
        let (lo, hi) = d.dual_arc().unwrap();
        assert!((lo - 1.0_f64.atan2(1.0)).abs() < 1e-6, "{lo}");
        assert!((hi - 2.0_f64.atan2(1.0)).abs() < 1e-6, "{hi}");
    }

    #[test]
    fn rotated_right_angle_double_dual() {
        let lo = PI / 6.0 - FRAC_PI_4;
        let a = AdmissibleCone::sector(lo, lo + FRAC_PI_2);
        let d = dual_cone(&a).unwrap();
        let (dlo, dhi) = d.dual_arc().unwrap();
        assert!((dlo - (lo + FRAC_PI_2 - FRAC_PI_2)).abs() < 1e-12);
        assert!((dhi - (lo + FRAC_PI_2)).abs() < 1e-12);
        let back = d.primal_cone();
        let ConeShape::Sector { lo: blo, hi: bhi } = *back.shape() else { panic!() };
        assert!((blo - lo).abs() < 1e-12 && (bhi - lo - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn ray_cone_has_half_plane_dual() {
        let a = AdmissibleCone::sector(0.3, 0.3);
        assert!(!a.has_interior());
        let d = dual_cone(&a).unwrap();
        assert!(!d.primal_interior());
        assert!(d.contains(&polar(0.3 + 1.5), 0.0));
        assert!(!d.contains(&polar(0.3 + 1.6), 0.0));
        // gauge is linear
        assert!((d.gauge(&[1.0]) + d.gauge(&[-1.0])).abs() < 1e-12);
    }

    #[test]
    fn spatial_burgers_cone_is_consistent() {
        let pair = ShockPair::new(Flux::burgers(3), 1.0, -1.0).unwrap();
        let cone = admissible_cone(&pair, 0.05).unwrap();
        assert!(cone.has_interior());
        for s in cone.samples() {
            assert!(is_admissible(&pair, s));
        }
        let a = dual_cone(&cone).unwrap();
        let b = dual_cone_from_flux(&pair, 2048).unwrap();
        for n in b.dual_rays() {
            for xi in cone.extreme_rays() {
                assert!(dot(n, &xi) >= -0.1);
            }
        }
        assert!(angular_hausdorff(&a, &b) < 0.2);
        assert!(a.gauge(&[0.0, 0.0]).abs() < 1e-12);
    }
}
