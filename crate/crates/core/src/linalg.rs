//! Small dense-vector helpers on `&[f64]`. Geometry here is at most
//! three-dimensional, so plain slices beat pulling a matrix type through
//! every signature.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Unit vector along `a`, or `None` for (numerically) zero input.
pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    if n <= f64::MIN_POSITIVE || !n.is_finite() {
        return None;
    }
    Some(a.iter().map(|x| x / n).collect())
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + s b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Unit vector at angle `theta` in the plane.
#[inline]
pub fn polar(theta: f64) -> Vec<f64> {
    vec![theta.cos(), theta.sin()]
}

#[inline]
pub fn angle(v: &[f64]) -> f64 {
    v[1].atan2(v[0])
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut t = theta % two_pi;
    if t <= -std::f64::consts::PI {
        t += two_pi;
    } else if t > std::f64::consts::PI {
        t -= two_pi;
    }
    t
}

/// Orthonormal basis of the orthogonal complement of the unit vector `w`.
///
/// In the plane the complement is `w` rotated by +90 degrees. In higher
/// dimensions the standard axes are Gram-Schmidt'ed, skipping the axis most
/// parallel to `w`, so an axis-aligned `w` yields the remaining axes.
pub fn complement_basis(w: &[f64]) -> Vec<Vec<f64>> {
    let d = w.len();
    if d == 2 {
        return vec![vec![-w[1], w[0]]];
    }
    let skip = (0..d)
        .max_by(|&i, &j| w[i].abs().total_cmp(&w[j].abs()))
        .unwrap_or(0);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    for k in (0..d).filter(|&k| k != skip) {
        let mut e = vec![0.0; d];
        e[k] = 1.0;
        let mut v = axpy(&e, -dot(&e, w), w);
        for b in &basis {
            let c = dot(&v, b);
            v = axpy(&v, -c, b);
        }
        if let Some(u) = normalized(&v) {
            basis.push(u);
        }
    }
    basis
}

/// Fixed-shape pairwise summation; the association tree depends only on the
/// length of the input, so results do not depend on how the terms were
/// produced.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if x.len() <= BLOCK {
        return x.iter().sum();
    }
    let mid = x.len() / 2;
    pairwise_sum(&x[..mid]) + pairwise_sum(&x[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_of_axis_is_the_other_axes() {
        let h = complement_basis(&[0.0, 0.0, 1.0]);
        assert_eq!(h, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
        assert_eq!(complement_basis(&[1.0, 0.0]), vec![vec![-0.0, 1.0]]);
    }

    #[test]
    fn complement_is_orthonormal() {
        let w = normalized(&[1.0, 2.0, -0.5]).unwrap();
        let h = complement_basis(&w);
        assert_eq!(h.len(), 2);
        for (i, a) in h.iter().enumerate() {
            assert!(dot(a, &w).abs() < 1e-14);
            assert!((norm(a) - 1.0).abs() < 1e-14);
            for b in &h[i + 1..] {
                assert!(dot(a, b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn wrap() {
        assert!((wrap_angle(3.0 * std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
        assert!((wrap_angle(-0.5) + 0.5).abs() < 1e-15);
    }
}
