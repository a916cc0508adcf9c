//! Finite propagation speed: differences of solutions stay in `K + tC`.

use crate::flux::Flux;
use crate::grid::{Field, Grid};
use crate::hull::{convex_hull, polygon_contains, Point2};
use crate::profile::Aabb;
use crate::solver::{Boundary, Member, SchemeConfig, Solver};

use super::{Check, ExperimentError, Verdict};

/// Hull `C` of the chord slopes `(f(s2) - f(s1)) / (s2 - s1)` over `J`.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportHull {
    pub interval: (f64, f64),
    /// CCW polygon for `d = 2`; the raw chord samples otherwise.
    pub vertices: Vec<Vec<f64>>,
    /// `f'` at the lower end of `J`.
    pub center: Vec<f64>,
    /// `sup |f''|` over `J`; `C` lies in the ball of radius
    /// `c_f |J|` around `center`.
    pub c_f: f64,
}

impl SupportHull {
    pub fn radius(&self) -> f64 {
        self.c_f * (self.interval.1 - self.interval.0)
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        match self.vertices.len() {
            0 => false,
            1 => crate::linalg::norm(&crate::linalg::sub(p, &self.vertices[0])) <= tol,
            _ => polygon_contains(&as_points(&self.vertices), [p[0], p[1]], tol),
        }
    }
}

fn as_points(v: &[Vec<f64>]) -> Vec<Point2> {
    v.iter().map(|p| [p[0], p[1]]).collect()
}

pub fn support_hull(flux: &Flux, interval: (f64, f64), n_samples: usize) -> SupportHull {
    let (lo, hi) = interval;
    let n = if hi > lo { n_samples.max(2) } else { 1 };
    let mut s: Vec<f64> = (0..n)
        .map(|i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect();
    if n > 1 {
        s.push(0.5 * (lo + hi));
    }
    let mut pts = Vec::with_capacity(s.len() * s.len());
    for (i, &a) in s.iter().enumerate() {
        pts.push(flux.eval(a, 1));
        for &b in &s[..i] {
            if a != b {
                let fa = flux.eval(a, 0);
                let fb = flux.eval(b, 0);
                pts.push(fa.iter().zip(&fb).map(|(x, y)| (x - y) / (a - b)).collect());
            }
        }
    }
    let vertices = if flux.dim() == 2 && pts.len() > 1 {
        let hull = convex_hull(&as_points(&pts));
        if hull.is_empty() {
            vec![pts[0].clone()]
        } else {
            hull.iter().map(|p| p.to_vec()).collect()
        }
    } else {
        pts
    };
    SupportHull {
        interval,
        vertices,
        center: flux.eval(lo, 1),
        c_f: flux.max_second_derivative(lo, hi),
    }
}

#[derive(Clone, Debug)]
pub struct SupportParams {
    pub horizon: f64,
    pub snapshot_every: f64,
    /// Relative level above which `|u2 - u1|` counts as support.
    pub threshold: f64,
    pub hull_samples: usize,
}

impl Default for SupportParams {
    fn default() -> Self {
        SupportParams {
            horizon: 3.0,
            snapshot_every: 0.25,
            threshold: 1e-3,
            hull_samples: 64,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SupportReport {
    pub hull: SupportHull,
    pub k: Aabb,
    pub amplitude: f64,
    /// `(t, worst distance beyond K + tC minus the margin, margin)`.
    pub snapshots: Vec<(f64, f64, f64)>,
    /// `b1` and `b2` at the horizon.
    pub final_fields: (Field, Field),
    pub verdict: Verdict,
}

impl SupportReport {
    pub fn worst_excess(&self) -> f64 {
        self.snapshots.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `8 sqrt(Lambda dx t) + 4 dx`.
pub fn diffusion_margin(lambda: f64, dx: f64, t: f64) -> f64 {
    8.0 * (lambda * dx * t).sqrt() + 4.0 * dx
}

fn distance_to_polygon(poly: &[Point2], p: Point2) -> f64 {
    if poly.len() >= 3 && polygon_contains(poly, p, 0.0) {
        return 0.0;
    }
    let seg = |a: Point2, b: Point2| {
        let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
        let len2 = ex * ex + ey * ey;
        let t = if len2 > 0.0 {
            (((p[0] - a[0]) * ex + (p[1] - a[1]) * ey) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        ((p[0] - a[0] - t * ex).powi(2) + (p[1] - a[1] - t * ey).powi(2)).sqrt()
    };
    match poly.len() {
        0 => f64::INFINITY,
        1 => seg(poly[0], poly[0]),
        n => (0..n).map(|k| seg(poly[k], poly[(k + 1) % n])).fold(f64::INFINITY, f64::min),
    }
}

pub(super) fn boundary_cells(grid: &Grid) -> Vec<usize> {
    let counts = grid.counts();
    (0..grid.len())
        .filter(|&c| {
            grid.multi_index(c)
                .iter()
                .zip(counts)
                .any(|(&i, &n)| i == 0 || i + 1 == n)
        })
        .collect()
}

/// Evolves `b1` and `b2` with the same boundary and checks that the cells
/// where they differ stay within `K + tC` widened by the diffusion margin.
pub fn support_experiment(
    b1: &Field,
    b2: &Field,
    flux: &Flux,
    scheme: &SchemeConfig,
    boundary: &Boundary,
    params: &SupportParams,
) -> Result<SupportReport, ExperimentError> {
    b1.check_grid(b2)?;
    let grid = b1.grid().clone();
    if grid.dim() != 2 {
        return Err(ExperimentError::BadParameter("support experiment needs d = 2".into()));
    }
    if !(params.horizon > 0.0 && params.snapshot_every > 0.0 && params.threshold > 0.0) {
        return Err(ExperimentError::BadParameter("horizon, snapshot_every and threshold must be positive".into()));
    }
    let dx = grid.dx();
    let diff = b2.zip_map(b1, |a, b| (a - b).abs())?;
    let amplitude = diff.max();
    let lo = b1.min().min(b2.min());
    let hi = b1.max().max(b2.max());
    let hull = support_hull(flux, (lo, hi), params.hull_samples);
    let mut verdict = Verdict::new("support");
    let cells: Vec<usize> = (0..grid.len()).filter(|&c| diff.values()[c] > 0.0).collect();
    let k = Aabb::bounding(&cells.iter().map(|&c| grid.center(c)).collect::<Vec<_>>()).grown(0.5 * dx);
    let mut report = SupportReport {
        hull,
        k,
        amplitude,
        snapshots: Vec::new(),
        final_fields: (b1.clone(), b2.clone()),
        verdict: Verdict::new("support"),
    };
    if amplitude == 0.0 {
        verdict.push(Check::at_most("containment", 0.0, 0.0));
        report.verdict = verdict;
        return Ok(report);
    }
    let solver = Solver::new(flux.clone(), scheme, (lo, hi))?;
    let lambda = solver.max_speed();
    let edge = boundary_cells(&grid);
    let level = params.threshold * amplitude;
    let hull_pts = as_points(&report.hull.vertices);
    let k_pts = as_points(&report.k.vertices());

    let measure = |t: f64, m: &[Member]| -> Result<(f64, f64), ExperimentError> {
        let (u1, u2) = (m[0].field.values(), m[1].field.values());
        if edge.iter().any(|&c| (u2[c] - u1[c]).abs() > level) {
            return Err(ExperimentError::BoundaryContact { t });
        }
        let mut sum = Vec::with_capacity(k_pts.len() * hull_pts.len());
        for kp in &k_pts {
            for cp in &hull_pts {
                sum.push([kp[0] + t * cp[0], kp[1] + t * cp[1]]);
            }
        }
        let poly = convex_hull(&sum);
        let poly = if poly.is_empty() { vec![sum[0]] } else { poly };
        let margin = diffusion_margin(lambda, dx, t);
        let worst = (0..grid.len())
            .filter(|&c| (u2[c] - u1[c]).abs() > level)
            .map(|c| {
                let x = grid.center(c);
                distance_to_polygon(&poly, [x[0], x[1]])
            })
            .fold(0.0, f64::max);
        Ok((worst - margin, margin))
    };

    let mut members = vec![
        Member::new(b1.clone(), boundary.clone()),
        Member::new(b2.clone(), boundary.clone()),
    ];
    let (e0, m0) = measure(0.0, &members)?;
    report.snapshots.push((0.0, e0, m0));
    let mut t = 0.0;
    for stop in crate::solver::snapshot_times(0.0, params.horizon, Some(params.snapshot_every)) {
        t = solver.evolve(&mut members, t, stop, |_, _| Ok(()))?;
        let (e, m) = measure(t, &members)?;
        report.snapshots.push((t, e, m));
    }
    verdict.push(Check::at_most("containment", report.worst_excess(), 0.0));
    verdict.note("amplitude", amplitude);
    verdict.note("max_speed", lambda);
    let b2_final = members.pop().expect("two members").field;
    let b1_final = members.pop().expect("two members").field;
    report.final_fields = (b1_final, b2_final);
    report.verdict = verdict;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_state_hull_is_a_point() {
        let h = support_hull(&Flux::burgers(2), (0.3, 0.3), 16);
        assert_eq!(h.vertices.len(), 1);
        assert!((h.vertices[0][0] - 0.6).abs() < 1e-15 && (h.vertices[0][1] - 0.27).abs() < 1e-15);
        assert!(h.contains(&[0.6, 0.27], 1e-12));
    }

    #[test]
    fn burgers_chord_hull() {
        let h = support_hull(&Flux::burgers(2), (-1.0, 1.0), 65);
        // chords (s1 + s2, s1^2 + s1 s2 + s2^2) lie on or above b = 3a^2/4
        for v in &h.vertices {
            assert!(v[1] >= 0.75 * v[0] * v[0] - 1e-12, "{v:?}");
        }
        assert!(h.contains(&[2.0, 3.0], 1e-12) && h.contains(&[-2.0, 3.0], 1e-12));
        assert!(h.contains(&[0.0, 0.0], 1e-12));
        assert!(!h.contains(&[0.0, -0.01], 1e-12));
        assert!(h.contains(&[0.0, 1.0], 1e-12));
    }

    #[test]
    fn taylor_ball_contains_hull() {
        let f = Flux::burgers(2);
        let h = support_hull(&f, (1.0, 1.05), 33);
        for v in &h.vertices {
            let d = crate::linalg::norm(&crate::linalg::sub(v, &h.center));
            assert!(d <= h.radius() + 1e-12);
        }
    }

    #[test]
    fn polygon_distance() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert_eq!(distance_to_polygon(&sq, [0.5, 0.5]), 0.0);
        assert!((distance_to_polygon(&sq, [2.0, 0.5]) - 1.0).abs() < 1e-15);
        assert!((distance_to_polygon(&sq, [2.0, 2.0]) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn equal_data_is_trivially_contained() {
        let g = Grid::centered(vec![16, 16], 0.25).unwrap();
        let b = Field::constant(&g, 1.0);
        let r = support_experiment(
            &b,
            &b,
            &Flux::burgers(2),
            &SchemeConfig::default_for(2),
            &Boundary::Outflow,
            &SupportParams::default(),
        )
        .unwrap();
        assert!(r.verdict.all_pass());
    }

    #[test]
    fn shifted_data_spreads_at_bounded_speed() {
        let g = Grid::centered(vec![48, 48], 0.25).unwrap();
        let b1 = Field::constant(&g, 1.0);
        let mut b2 = b1.clone();
        let c = g.flat_index(&[24, 24]);
        b2.values_mut()[c] = 1.2;
        let params = SupportParams {
            horizon: 1.0,
            ..SupportParams::default()
        };
        let r = support_experiment(
            &b1,
            &b2,
            &Flux::burgers(2),
            &SchemeConfig::default_for(2),
            &Boundary::Constant(1.0),
            &params,
        )
        .unwrap();
        assert!(r.verdict.all_pass(), "{}", r.verdict.to_text());
    }
}
