//! Planar convex hulls (Andrew's monotone chain).

pub type Point2 = [f64; 2];

#[inline]
fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Indices of the hull vertices of `points` in counter-clockwise order,
/// collinear points dropped. Fewer than three distinct points come back as
/// they are (deduplicated).
pub fn convex_hull_indices(points: &[Point2]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len())
        .filter(|&i| points[i][0].is_finite() && points[i][1].is_finite())
        .collect();
    idx.sort_by(|&i, &j| {
        points[i][0]
            .total_cmp(&points[j][0])
            .then(points[i][1].total_cmp(&points[j][1]))
    });
    idx.dedup_by(|a, b| points[*a] == points[*b]);
    if idx.len() < 3 {
        return idx;
    }
    let scale = idx
        .iter()
        .map(|&i| points[i][0].abs().max(points[i][1].abs()))
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let eps = 1e-14 * scale * scale;

    let mut hull: Vec<usize> = Vec::with_capacity(2 * idx.len());
    for &i in &idx {
        while hull.len() >= 2
            && cross(points[hull[hull.len() - 2]], points[hull[hull.len() - 1]], points[i]) <= eps
        {
            hull.pop();
        }
        hull.push(i);
    }
    let lower_len = hull.len() + 1;
    for &i in idx.iter().rev().skip(1) {
        while hull.len() >= lower_len
            && cross(points[hull[hull.len() - 2]], points[hull[hull.len() - 1]], points[i]) <= eps
        {
            hull.pop();
        }
        hull.push(i);
    }
    hull.pop();
    hull
}

pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    convex_hull_indices(points)
        .into_iter()
        .map(|i| points[i])
        .collect()
}

/// Whether `p` lies in the CCW convex polygon `poly`, with slack `tol`
/// measured as signed distance to each edge line.
pub fn polygon_contains(poly: &[Point2], p: Point2, tol: f64) -> bool {
    match poly.len() {
        0 => false,
        1 => ((p[0] - poly[0][0]).powi(2) + (p[1] - poly[0][1]).powi(2)).sqrt() <= tol,
        _ => (0..poly.len()).all(|k| {
            let a = poly[k];
            let b = poly[(k + 1) % poly.len()];
            let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            if len == 0.0 {
                return true;
            }
            cross(a, b, p) / len >= -tol
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_with_interior_and_collinear_points() {
        let pts = [
            [0.0, 0.0],
            [1.0, 0.0],
            [0.5, 0.0],
            [1.0, 1.0],
            [0.0, 1.0],
            [0.5, 0.5],
            [0.0, 0.0],
        ];
        let h = convex_hull(&pts);
        assert_eq!(h, vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        assert!(polygon_contains(&h, [0.5, 0.5], 0.0));
        assert!(!polygon_contains(&h, [1.5, 0.5], 1e-9));
        assert!(polygon_contains(&h, [1.5, 0.5], 0.6));
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(convex_hull(&[[1.0, 2.0]]), vec![[1.0, 2.0]]);
        assert_eq!(convex_hull(&[[1.0, 2.0], [1.0, 2.0]]).len(), 1);
        // collinear set collapses to its two ends
        let h = convex_hull(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]);
        assert_eq!(h, vec![[0.0, 0.0], [2.0, 2.0]]);
    }
}
