//! Front functions `psi: H -> R` describing two-valued steady shocks.

use std::fmt;
use std::sync::Arc;

use crate::cone::DualCone;
use crate::hull::convex_hull;
use crate::linalg::{dot, norm};

/// Piecewise multilinear samples on a uniform grid over H, extended by the
/// nearest sample outside the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Pwl {
    origin: Vec<f64>,
    step: f64,
    counts: Vec<usize>,
    values: Vec<f64>,
}

impl Pwl {
    pub fn new(origin: Vec<f64>, step: f64, counts: Vec<usize>, values: Vec<f64>) -> Option<Self> {
        let ok = !origin.is_empty()
            && origin.len() == counts.len()
            && origin.len() <= 2
            && step > 0.0
            && counts.iter().all(|&n| n >= 2)
            && counts.iter().product::<usize>() == values.len()
            && values.iter().all(|v| v.is_finite());
        ok.then_some(Pwl {
            origin,
            step,
            counts,
            values,
        })
    }

    /// Samples `f` on the grid `origin + step * j`.
    pub fn from_fn(origin: Vec<f64>, step: f64, counts: Vec<usize>, f: impl Fn(&[f64]) -> f64) -> Option<Self> {
        let total: usize = counts.iter().product();
        let values = (0..total)
            .map(|i| f(&sample_point(&origin, step, &counts, i)))
            .collect();
        Pwl::new(origin, step, counts, values)
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }
    pub fn step(&self) -> f64 {
        self.step
    }
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn h_dim(&self) -> usize {
        self.counts.len()
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        sample_point(&self.origin, self.step, &self.counts, flat)
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        match self.counts.len() {
            1 => {
                let n = self.counts[0];
                let t = ((y[0] - self.origin[0]) / self.step).clamp(0.0, (n - 1) as f64);
                let i = (t.floor() as usize).min(n - 2);
                let f = t - i as f64;
                self.values[i] * (1.0 - f) + self.values[i + 1] * f
            }
            _ => {
                let (n0, n1) = (self.counts[0], self.counts[1]);
                let t0 = ((y[0] - self.origin[0]) / self.step).clamp(0.0, (n0 - 1) as f64);
                let t1 = ((y[1] - self.origin[1]) / self.step).clamp(0.0, (n1 - 1) as f64);
                let i = (t0.floor() as usize).min(n0 - 2);
                let j = (t1.floor() as usize).min(n1 - 2);
                let (f0, f1) = (t0 - i as f64, t1 - j as f64);
                let v = |a: usize, b: usize| self.values[a * n1 + b];
                (1.0 - f0) * ((1.0 - f1) * v(i, j) + f1 * v(i, j + 1))
                    + f0 * ((1.0 - f1) * v(i + 1, j) + f1 * v(i + 1, j + 1))
            }
        }
    }

    /// Gradients of the linear pieces: segment slopes in one variable, the
    /// four corner gradients of every bilinear cell in two.
    pub fn piece_gradients(&self) -> Vec<Vec<f64>> {
        let h = self.step;
        match self.counts.len() {
            1 => self
                .values
                .windows(2)
                .map(|w| vec![(w[1] - w[0]) / h])
                .collect(),
            _ => {
                let (n0, n1) = (self.counts[0], self.counts[1]);
                let v = |a: usize, b: usize| self.values[a * n1 + b];
                let mut out = Vec::with_capacity(4 * (n0 - 1) * (n1 - 1));
                for i in 0..n0 - 1 {
                    for j in 0..n1 - 1 {
                        for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                            let gx = (v(i + 1, j + b) - v(i, j + b)) / h;
                            let gy = (v(i + a, j + 1) - v(i + a, j)) / h;
                            out.push(vec![gx, gy]);
                        }
                    }
                }
                out
            }
        }
    }

    /// Trapezoidal integral over the sample grid.
    pub fn integral(&self) -> f64 {
        let h = self.step;
        match self.counts.len() {
            1 => {
                let v = &self.values;
                h * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[v.len() - 1]))
            }
            _ => {
                let (n0, n1) = (self.counts[0], self.counts[1]);
                let mut s = 0.0;
                for i in 0..n0 {
                    for j in 0..n1 {
                        let wi = if i == 0 || i == n0 - 1 { 0.5 } else { 1.0 };
                        let wj = if j == 0 || j == n1 - 1 { 0.5 } else { 1.0 };
                        s += wi * wj * self.values[i * n1 + j];
                    }
                }
                s * h * h
            }
        }
    }
}

fn sample_point(origin: &[f64], step: f64, counts: &[usize], flat: usize) -> Vec<f64> {
    match counts.len() {
        1 => vec![origin[0] + step * flat as f64],
        _ => {
            let n1 = counts[1];
            vec![
                origin[0] + step * (flat / n1) as f64,
                origin[1] + step * (flat % n1) as f64,
            ]
        }
    }
}

/// `psi0(y) = max_k g_k . y` from the gauge gradients.
#[inline]
pub fn gauge_from_grads(grads: &[Vec<f64>], y: &[f64]) -> f64 {
    grads
        .iter()
        .map(|g| dot(g, y))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// A front function over H-coordinates.
#[derive(Clone)]
pub enum Front {
    /// `value + slope . y`
    Affine { value: f64, slope: Vec<f64> },
    /// `slope * |y|`
    AbsScaled { slope: f64 },
    /// `shift + scale * psi0(s (y - center))` with `s = -1` when reflected.
    Gauge {
        grads: Arc<Vec<Vec<f64>>>,
        scale: f64,
        shift: f64,
        reflect: bool,
        center: Vec<f64>,
    },
    Sampled(Pwl),
    /// An arbitrary closure; its Lipschitz ratio is estimated by sampling.
    Func(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
    Min(Box<Front>, Box<Front>),
    Max(Box<Front>, Box<Front>),
}

impl fmt::Debug for Front {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Front::Affine { value, slope } => write!(f, "Affine({value}, {slope:?})"),
            Front::AbsScaled { slope } => write!(f, "AbsScaled({slope})"),
            Front::Gauge {
                scale,
                shift,
                reflect,
                center,
                ..
            } => write!(f, "Gauge(shift {shift}, scale {scale}, reflect {reflect}, center {center:?})"),
            Front::Sampled(p) => write!(f, "Sampled({:?} samples)", p.counts()),
            Front::Func(_) => f.write_str("Func(..)"),
            Front::Min(a, b) => write!(f, "Min({a:?}, {b:?})"),
            Front::Max(a, b) => write!(f, "Max({a:?}, {b:?})"),
        }
    }
}

impl Front {
    pub fn constant(value: f64, h_dim: usize) -> Front {
        Front::Affine {
            value,
            slope: vec![0.0; h_dim],
        }
    }

    /// `shift + scale * psi0(y - center)` for the gauge of `dual`.
    pub fn gauge(dual: &DualCone, scale: f64, shift: f64, center: Vec<f64>) -> Front {
        Front::Gauge {
            grads: Arc::new(dual.gauge_gradients()),
            scale,
            shift,
            reflect: false,
            center,
        }
    }

    /// `shift + scale * psi0(center - y)`.
    pub fn reflected_gauge(dual: &DualCone, scale: f64, shift: f64, center: Vec<f64>) -> Front {
        Front::Gauge {
            grads: Arc::new(dual.gauge_gradients()),
            scale,
            shift,
            reflect: true,
            center,
        }
    }

    pub fn func(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Front {
        Front::Func(Arc::new(f))
    }

    pub fn min(a: Front, b: Front) -> Front {
        Front::Min(Box::new(a), Box::new(b))
    }

    pub fn max(a: Front, b: Front) -> Front {
        Front::Max(Box::new(a), Box::new(b))
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        match self {
            Front::Affine { value, slope } => value + dot(slope, y),
            Front::AbsScaled { slope } => slope * norm(y),
            Front::Gauge {
                grads,
                scale,
                shift,
                reflect,
                center,
            } => {
                let z: Vec<f64> = y
                    .iter()
                    .zip(center.iter().chain(std::iter::repeat(&0.0)))
                    .map(|(a, c)| if *reflect { c - a } else { a - c })
                    .collect();
                shift + scale * gauge_from_grads(grads, &z)
            }
            Front::Sampled(p) => p.eval(y),
            Front::Func(f) => f(y),
            Front::Min(a, b) => a.eval(y).min(b.eval(y)),
            Front::Max(a, b) => a.eval(y).max(b.eval(y)),
        }
    }

    /// Gradients of the pieces the front is assembled from (a superset of
    /// the gradients that actually occur for `Min`/`Max`).
    pub fn piece_gradients(&self, h_dim: usize) -> Vec<Vec<f64>> {
        match self {
            Front::Affine { slope, .. } => vec![slope.clone()],
            Front::AbsScaled { slope } => {
                if h_dim == 1 {
                    vec![vec![*slope], vec![-slope]]
                } else {
                    (0..64)
                        .map(|k| {
                            let t = k as f64 * std::f64::consts::TAU / 64.0;
                            vec![slope * t.cos(), slope * t.sin()]
                        })
                        .collect()
                }
            }
            Front::Gauge {
                grads,
                scale,
                reflect,
                ..
            } => grads
                .iter()
                .map(|g| {
                    let s = if *reflect { -scale } else { *scale };
                    g.iter().map(|x| s * x).collect()
                })
                .collect(),
            Front::Sampled(p) => p.piece_gradients(),
            Front::Func(_) => Vec::new(),
            Front::Min(a, b) | Front::Max(a, b) => {
                let mut v = a.piece_gradients(h_dim);
                v.extend(b.piece_gradients(h_dim));
                v
            }
        }
    }

    /// Lipschitz ratio against the gauge of `dual`, as the largest ratio of
    /// the linear pieces (`None` for closures). Exact in one variable; for
    /// `Min`/`Max` an upper bound, the maximum over both parts.
    pub fn rho_bound(&self, dual: &DualCone) -> Option<f64> {
        match self {
            Front::AbsScaled { slope } => {
                Some(if *slope == 0.0 { 0.0 } else { slope.abs() / min_gauge_on_unit_sphere(dual) })
            }
            Front::Func(_) => None,
            Front::Min(a, b) | Front::Max(a, b) => Some(a.rho_bound(dual)?.max(b.rho_bound(dual)?)),
            _ => {
                let h_dim = dual.dim() - 1;
                Some(
                    self.piece_gradients(h_dim)
                        .iter()
                        .map(|g| linear_rho(dual, g))
                        .fold(0.0, f64::max),
                )
            }
        }
    }

    pub fn has_closure(&self) -> bool {
        match self {
            Front::Func(_) => true,
            Front::Min(a, b) | Front::Max(a, b) => a.has_closure() || b.has_closure(),
            _ => false,
        }
    }
}

/// Vertices `y_e / r_e` of the unit sublevel set `{psi0 <= 1}` in H, from
/// the dual extreme rays `e = r_e W + y_e`. `None` when some `r_e <= 0` or
/// the dual has no extreme rays.
pub fn unit_section_vertices(dual: &DualCone) -> Option<Vec<Vec<f64>>> {
    if dual.dual_rays().is_empty() {
        return None;
    }
    dual.dual_rays()
        .iter()
        .map(|e| {
            let (r, y) = dual.frame().coords(e);
            (r > 1e-12).then(|| y.iter().map(|v| v / r).collect())
        })
        .collect()
}

/// Smallest `rho >= 0` with `p . z <= rho psi0(z)` for all `z`.
pub fn linear_rho(dual: &DualCone, p: &[f64]) -> f64 {
    if norm(p) == 0.0 {
        return 0.0;
    }
    match unit_section_vertices(dual) {
        Some(verts) => verts.iter().map(|v| dot(p, v)).fold(0.0, f64::max),
        None => {
            // A° with a lineality direction: psi0 is (piecewise) linear and only
            // its own gradients are admissible, with ratio one.
            let grads = dual.gauge_gradients();
            if grads.iter().any(|g| norm(&crate::linalg::sub(g, p)) <= 1e-9 * (1.0 + norm(p))) {
                1.0
            } else {
                f64::INFINITY
            }
        }
    }
}

/// `min_{|z| = 1} psi0(z)`: the distance from the origin to the boundary of
/// the convex hull of the gauge gradients.
pub fn min_gauge_on_unit_sphere(dual: &DualCone) -> f64 {
    let grads = dual.gauge_gradients();
    match grads.first().map(Vec::len) {
        Some(1) => {
            let hi = grads.iter().map(|g| g[0]).fold(f64::NEG_INFINITY, f64::max);
            let lo = grads.iter().map(|g| g[0]).fold(f64::INFINITY, f64::min);
            hi.min(-lo)
        }
        Some(2) => {
            let pts: Vec<[f64; 2]> = grads.iter().map(|g| [g[0], g[1]]).collect();
            let hull = convex_hull(&pts);
            if hull.len() < 3 {
                return 0.0;
            }
            (0..hull.len())
                .map(|k| {
                    let a = hull[k];
                    let b = hull[(k + 1) % hull.len()];
                    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                    // signed distance of the origin to the edge line
                    ((b[0] - a[0]) * (0.0 - a[1]) - (b[1] - a[1]) * (0.0 - a[0])).abs() / len
                })
                .fold(f64::INFINITY, f64::min)
        }
        _ => 0.0,
    }
}
