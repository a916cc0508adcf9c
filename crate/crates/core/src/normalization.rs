//! Change of unknowns that maps multi-D Burgers solutions around a constant
//! state back to multi-D Burgers solutions around zero.
//!
//! Writing `u = c + w` and expanding `(w + c)^(i+1)` binomially gives
//! `f_i(c + w) = f_i(c) + Z_i w + sum_j B_ij w^(j+1)` with
//! `B_ij = C(i+1, j+1) c^(i-j)` (unit lower-triangular) and
//! `Z_i = (i+1) c^i`. The chain rule then shows that
//! `v(t, x) = u(t, B x + t Z) - c` solves the Burgers equation again, so
//! `M = B`.

use crate::flux::{Flux, FluxError};
use crate::poly::Poly;

#[derive(Clone, Debug, PartialEq)]
pub struct Normalization {
    /// Row-major `d x d`, unit lower-triangular.
    m: Vec<Vec<f64>>,
    z: Vec<f64>,
    u_ref: f64,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// `(M, Z)` for the `d`-dimensional Burgers flux around `u_ref`.
pub fn burgers_normalization(u_ref: f64, d: usize) -> Normalization {
    let mut m = vec![vec![0.0; d]; d];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate().take(i + 1) {
            *entry = binomial(i + 2, j + 2) * u_ref.powi((i - j) as i32);
        }
    }
    let z = (0..d).map(|i| (i + 2) as f64 * u_ref.powi(i as i32 + 1)).collect();
    Normalization { m, z, u_ref }
}

impl Normalization {
    pub fn for_flux(flux: &Flux, u_ref: f64) -> Result<Self, FluxError> {
        if !flux.is_burgers() {
            return Err(FluxError::NotBurgers);
        }
        Ok(burgers_normalization(u_ref, flux.dim()))
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.m
    }

    pub fn shift(&self) -> &[f64] {
        &self.z
    }

    pub fn u_ref(&self) -> f64 {
        self.u_ref
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    /// Point `M x + t Z` at which the original solution is sampled.
    pub fn source_point(&self, t: f64, x: &[f64]) -> Vec<f64> {
        self.m
            .iter()
            .zip(&self.z)
            .map(|(row, zi)| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + t * zi)
            .collect()
    }

    /// `v(t, x) = u(t, M x + t Z) - u_ref`.
    pub fn transform<'a, F>(&'a self, u: F) -> impl Fn(f64, &[f64]) -> f64 + 'a
    where
        F: Fn(f64, &[f64]) -> f64 + 'a,
    {
        move |t, x| u(t, &self.source_point(t, x)) - self.u_ref
    }

    /// Flux `B f^B(w)` obeyed by `w = u - u_ref` in the frame moving with
    /// `Z`; equivalently `f^B(w + c) - f^B(c) - Z w`.
    pub fn comoving_flux(&self) -> Flux {
        let comps = self
            .m
            .iter()
            .map(|row| {
                let mut c = vec![0.0; row.len() + 2];
                for (j, &b) in row.iter().enumerate() {
                    c[j + 2] = b;
                }
                Poly::new(c)
            })
            .collect();
        Flux::new(comps)
            .expect("comoving flux is well formed")
            .with_label(format!("burgers-{}d-comoving({})", self.dim(), self.u_ref))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_reference_is_identity() {
        for d in 1..=4 {
            let n = burgers_normalization(0.0, d);
            for (i, row) in n.matrix().iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    assert_eq!(v, if i == j { 1.0 } else { 0.0 });
                }
            }
            assert!(n.shift().iter().all(|&z| z == 0.0));
        }
    }

    #[test]
    fn two_dimensional_unit_reference() {
        let n = burgers_normalization(1.0, 2);
        assert_eq!(n.shift(), &[2.0, 3.0]);
        assert_eq!(n.matrix(), &[vec![1.0, 0.0], vec![3.0, 1.0]]);
    }

    #[test]
    fn one_dimensional_galilean_shift() {
        let c = 0.7;
        let n = burgers_normalization(c, 1);
        assert_eq!(n.matrix(), &[vec![1.0]]);
        assert_eq!(n.shift(), &[2.0 * c]);
        // Exact travelling solution of u_t + (u^2)_x = 0 linearised at c is
        // not available in closed form, but the flux identity is:
        // (w+c)^2 - c^2 - 2c w = w^2.
        let g = n.comoving_flux();
        assert_eq!(g.component(0), &Poly::new(vec![0.0, 0.0, 1.0]));
    }

    #[test]
    fn comoving_flux_matches_shifted_burgers() {
        let c = -0.4;
        let n = burgers_normalization(c, 3);
        let g = n.comoving_flux();
        let f = Flux::burgers(3);
        let fc = f.eval(c, 0);
        for &w in &[-0.9, -0.1, 0.0, 0.3, 1.7] {
            let lhs = g.eval(w, 0);
            let fw = f.eval(w + c, 0);
            for i in 0..3 {
                let rhs = fw[i] - fc[i] - n.shift()[i] * w;
                assert!((lhs[i] - rhs).abs() < 1e-12, "{i} {w}");
            }
        }
    }

    #[test]
    fn rejects_other_fluxes() {
        let f = Flux::from_coeffs(vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0, 2.0]]).unwrap();
        assert_eq!(Normalization::for_flux(&f, 1.0), Err(FluxError::NotBurgers));
    }
}
