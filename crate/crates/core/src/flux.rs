//! Polynomial fluxes, two-state shock kinematics and the admissibility tests
//! attached to them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::{dot, norm};
use crate::poly::Poly;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FluxError {
    #[error("a flux needs at least one component")]
    EmptyFlux,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("end states coincide (u_minus = u_plus = {0})")]
    EqualStates(f64),
    #[error("end states in the wrong order: need u_plus < u_minus, got u_minus = {u_minus}, u_plus = {u_plus}")]
    WrongOrder { u_minus: f64, u_plus: f64 },
    #[error("flux is not the multi-D Burgers flux (s^2, ..., s^(d+1))")]
    NotBurgers,
}

/// A flux `f: R -> R^d` with polynomial components.
#[derive(Clone, Debug)]
pub struct Flux {
    components: Vec<Poly>,
    first: Vec<Poly>,
    second: Vec<Poly>,
    label: Option<String>,
}

impl PartialEq for Flux {
    fn eq(&self, other: &Self) -> bool {
        self.components == other.components
    }
}

impl Flux {
    pub fn new(components: Vec<Poly>) -> Result<Self, FluxError> {
        if components.is_empty() {
            return Err(FluxError::EmptyFlux);
        }
        if components
            .iter()
            .any(|p| p.coeffs().iter().any(|c| !c.is_finite()))
        {
            return Err(FluxError::NonFinite("flux coefficients"));
        }
        let first: Vec<Poly> = components.iter().map(Poly::derivative).collect();
        let second = first.iter().map(Poly::derivative).collect();
        Ok(Flux {
            components,
            first,
            second,
            label: None,
        })
    }

    pub fn from_coeffs(coeffs: Vec<Vec<f64>>) -> Result<Self, FluxError> {
        Flux::new(coeffs.into_iter().map(Poly::new).collect())
    }

    /// The multi-D Burgers flux `(s^2, s^3, ..., s^(d+1))`.
    pub fn burgers(d: usize) -> Self {
        let comps = (1..=d).map(|i| Poly::monomial(i + 1)).collect();
        let mut f = Flux::new(comps).expect("burgers flux is well formed");
        f.label = Some(format!("burgers-{d}d"));
        f
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Poly {
        &self.components[i]
    }

    pub fn coeffs(&self) -> Vec<Vec<f64>> {
        self.components.iter().map(|p| p.coeffs().to_vec()).collect()
    }

    /// `f(s)`, `f'(s)` or `f''(s)` for `order` 0, 1, 2; higher orders are
    /// differentiated on the fly.
    pub fn eval(&self, s: f64, order: usize) -> Vec<f64> {
        match order {
            0 => self.components.iter().map(|p| p.eval(s)).collect(),
            1 => self.first.iter().map(|p| p.eval(s)).collect(),
            2 => self.second.iter().map(|p| p.eval(s)).collect(),
            k => self
                .components
                .iter()
                .map(|p| (0..k).fold(p.clone(), |q, _| q.derivative()).eval(s))
                .collect(),
        }
    }

    pub fn is_burgers(&self) -> bool {
        self.components.iter().enumerate().all(|(i, p)| {
            let k = i + 2;
            p.degree() == k
                && p
                    .coeffs()
                    .iter()
                    .enumerate()
                    .all(|(j, &c)| if j == k { c == 1.0 } else { c == 0.0 })
        })
    }

    /// `s -> f(s) - s v`.
    pub fn minus_linear(&self, v: &[f64]) -> Flux {
        let comps = self
            .components
            .iter()
            .zip(v)
            .map(|(p, &vi)| p.sub(&Poly::new(vec![0.0, vi])))
            .collect();
        let mut f = Flux::new(comps).expect("shifting keeps the flux well formed");
        f.label = self.label.as_ref().map(|l| format!("{l}-reduced"));
        f
    }

    /// `sup_{s in [lo, hi]} |f''(s)|` (Euclidean norm), exact via the
    /// critical points of `sum_i f_i''^2`.
    pub fn max_second_derivative(&self, lo: f64, hi: f64) -> f64 {
        let sq = self
            .second
            .iter()
            .fold(Poly::zero(), |acc, p| acc.add(&p.mul(p)));
        sq.max_on(lo, hi).0.max(0.0).sqrt()
    }

    /// `max |f_i'|` over `[lo, hi]` for component `i`.
    pub fn max_speed(&self, i: usize, lo: f64, hi: f64) -> f64 {
        self.first[i].max_abs_on(lo, hi)
    }
}

/// Ordered end states `u_plus < u_minus` with their Rankine-Hugoniot
/// velocity and the reduced flux `F(s) = f(s) - s v` that makes the shock
/// steady.
#[derive(Clone, Debug, PartialEq)]
pub struct ShockPair {
    flux: Flux,
    u_minus: f64,
    u_plus: f64,
    velocity: Vec<f64>,
    reduced: Flux,
    f_bar: Vec<f64>,
    /// Excess polynomials `F_i(s) - Fbar_i`.
    excess: Vec<Poly>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OleinikOptions {
    pub n_samples: usize,
    pub tol: f64,
    /// Maximise the excess polynomial through its critical points instead of
    /// sampling.
    pub exact: bool,
}

impl Default for OleinikOptions {
    fn default() -> Self {
        OleinikOptions {
            n_samples: 1024,
            tol: 1e-12,
            exact: false,
        }
    }
}

impl OleinikOptions {
    pub fn exact() -> Self {
        OleinikOptions {
            exact: true,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OleinikVerdict {
    pub admissible: bool,
    /// Largest positive excess found, 0 if none.
    pub worst_violation: f64,
    /// Where the worst excess was found.
    pub worst_at: f64,
    /// `(sigma - xi.f'(u_plus), xi.f'(u_minus) - sigma)`.
    pub lax_margins: (f64, f64),
}

impl ShockPair {
    pub fn new(flux: Flux, u_minus: f64, u_plus: f64) -> Result<Self, FluxError> {
        if !u_minus.is_finite() || !u_plus.is_finite() {
            return Err(FluxError::NonFinite("end states"));
        }
        if u_minus == u_plus {
            return Err(FluxError::EqualStates(u_minus));
        }
        if u_plus > u_minus {
            return Err(FluxError::WrongOrder { u_minus, u_plus });
        }
        let fp = flux.eval(u_plus, 0);
        let fm = flux.eval(u_minus, 0);
        let jump = u_plus - u_minus;
        let velocity: Vec<f64> = fp.iter().zip(&fm).map(|(a, b)| (a - b) / jump).collect();
        let reduced = flux.minus_linear(&velocity);
        let f_bar = reduced.eval(u_minus, 0);
        let excess = reduced
            .components()
            .iter()
            .zip(&f_bar)
            .map(|(p, &c)| p.sub(&Poly::new(vec![c])))
            .collect();
        Ok(ShockPair {
            flux,
            u_minus,
            u_plus,
            velocity,
            reduced,
            f_bar,
            excess,
        })
    }

    pub fn flux(&self) -> &Flux {
        &self.flux
    }
    pub fn u_minus(&self) -> f64 {
        self.u_minus
    }
    pub fn u_plus(&self) -> f64 {
        self.u_plus
    }
    pub fn velocity(&self) -> &[f64] {
        &self.velocity
    }
    pub fn reduced(&self) -> &Flux {
        &self.reduced
    }
    pub fn f_bar(&self) -> &[f64] {
        &self.f_bar
    }
    pub fn dim(&self) -> usize {
        self.flux.dim()
    }
    pub fn jump(&self) -> f64 {
        self.u_minus - self.u_plus
    }

    /// Magnitude used to make tolerances relative.
    pub fn scale(&self) -> f64 {
        let m = self.u_minus.abs().max(self.u_plus.abs());
        1.0_f64
            .max(norm(&self.flux.eval(self.u_minus, 0)))
            .max(norm(&self.flux.eval(self.u_plus, 0)))
            .max(norm(&self.velocity) * m)
    }

    /// `sigma(xi) = xi . v`.
    pub fn normal_speed(&self, xi: &[f64]) -> f64 {
        dot(xi, &self.velocity)
    }

    /// `F_i(s) - Fbar_i` for each component.
    pub fn excess_polys(&self) -> &[Poly] {
        &self.excess
    }

    /// `xi . (F(s) - Fbar)`, the Oleinik excess.
    pub fn excess(&self, xi: &[f64], s: f64) -> f64 {
        self.excess.iter().zip(xi).map(|(p, x)| x * p.eval(s)).sum()
    }

    /// Directional excess as a single polynomial.
    pub fn excess_poly(&self, xi: &[f64]) -> Poly {
        self.excess
            .iter()
            .zip(xi)
            .fold(Poly::zero(), |acc, (p, &x)| acc.add(&p.scaled(x)))
    }

    /// Oleinik chord test in direction `xi`, relative tolerance
    /// `tol * scale * |xi|`.
    pub fn oleinik(&self, xi: &[f64], opts: &OleinikOptions) -> OleinikVerdict {
        let sigma = self.normal_speed(xi);
        let lax = (
            sigma - dot(xi, &self.flux.eval(self.u_plus, 1)),
            dot(xi, &self.flux.eval(self.u_minus, 1)) - sigma,
        );
        let (lo, hi) = (self.u_plus, self.u_minus);
        let (worst, at) = if opts.exact {
            self.excess_poly(xi).max_on(lo, hi)
        } else {
            let n = opts.n_samples.max(2);
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            (0..n)
                .map(|k| {
                    let s = mid
                        + half * ((2 * k + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos();
                    (self.excess(xi, s), s)
                })
                .fold((f64::NEG_INFINITY, mid), |b, c| if c.0 > b.0 { c } else { b })
        };
        let bound = opts.tol * self.scale() * norm(xi);
        OleinikVerdict {
            admissible: worst <= bound,
            worst_violation: worst.max(0.0),
            worst_at: at,
            lax_margins: lax,
        }
    }
}

/// Outcome of the non-degeneracy check.
#[derive(Clone, Debug, PartialEq)]
pub struct NondegeneracyReport {
    pub pass: bool,
    /// Unit vectors `(tau, xi)` for which `tau + f'(s).xi` vanishes
    /// identically: sampled hits first, then a null-space basis.
    pub failures: Vec<Vec<f64>>,
    /// Rank of the coefficient matrix of `(1, f')`.
    pub rank: usize,
}

/// Checks that no `(tau, xi) != 0` makes `tau + f'(s).xi` the zero
/// polynomial.
///
/// The coefficients of that polynomial are `A (tau, xi)` where column 0 of
/// `A` is `e_0` and column `i` holds the coefficients of `f_i'`. The
/// condition fails exactly when `A` has a null vector, which the SVD finds;
/// `n_directions` random directions are also tested directly.
pub fn check_nondegeneracy(flux: &Flux, n_directions: usize) -> NondegeneracyReport {
    let d = flux.dim();
    let derivs: Vec<Poly> = flux.components().iter().map(Poly::derivative).collect();
    let rows = derivs.iter().map(|p| p.coeffs().len()).max().unwrap_or(1).max(1);
    let cols = d + 1;
    let mut a = nalgebra::DMatrix::<f64>::zeros(rows.max(cols), cols);
    a[(0, 0)] = 1.0;
    for (i, p) in derivs.iter().enumerate() {
        for (k, &c) in p.coeffs().iter().enumerate() {
            a[(k, i + 1)] = c;
        }
    }
    let scale = a.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1.0);

    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    for _ in 0..n_directions.max(1) {
        let raw: Vec<f64> = (0..cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let Some(dir) = crate::linalg::normalized(&raw) else {
            continue;
        };
        let v = nalgebra::DVector::from_column_slice(&dir);
        let coeffs = &a * v;
        if coeffs.iter().all(|c| c.abs() <= 1e-14 * scale) {
            failures.push(dir);
        }
    }

    let svd = a.clone().svd(false, true);
    let sigma_max = svd.singular_values.max();
    let tol = 1e-12 * sigma_max.max(1.0);
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    if rank < cols {
        let vt = svd.v_t.expect("requested right singular vectors");
        for (j, &s) in svd.singular_values.iter().enumerate() {
            if s <= tol {
                failures.push(vt.row(j).iter().copied().collect());
            }
        }
        // Singular values beyond the row count are structurally zero.
        for j in svd.singular_values.len()..cols {
            failures.push(vt.row(j).iter().copied().collect());
        }
    }
    NondegeneracyReport {
        pass: failures.is_empty(),
        failures,
        rank,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn burgers_eval_examples() {
        let f2 = Flux::burgers(2);
        assert_eq!(f2.eval(1.0, 0), vec![1.0, 1.0]);
        assert_eq!(f2.eval(0.0, 1), vec![0.0, 0.0]);
        assert_eq!(Flux::burgers(3).eval(2.0, 0), vec![4.0, 8.0, 16.0]);
        assert_eq!(f2.eval(2.0, 2), vec![2.0, 12.0]);
        assert!(f2.is_burgers());
        assert!(!Flux::from_coeffs(vec![vec![0.0, 0.0, 2.0]]).unwrap().is_burgers());
    }

    #[test]
    fn pair_velocity_and_reduced_flux() {
        let p = ShockPair::new(Flux::burgers(2), 1.0, -1.0).unwrap();
        assert_eq!(p.velocity(), &[0.0, 1.0]);
        assert_eq!(p.reduced().component(0), &Poly::new(vec![0.0, 0.0, 1.0]));
        assert_eq!(p.reduced().component(1), &Poly::new(vec![0.0, -1.0, 0.0, 1.0]));
        assert_eq!(p.f_bar(), &[1.0, 0.0]);

        let q = ShockPair::new(Flux::burgers(2), 1.0, 0.0).unwrap();
        assert_eq!(q.velocity(), &[1.0, 1.0]);
        assert_eq!(q.reduced().component(0), &Poly::new(vec![0.0, -1.0, 1.0]));
        assert_eq!(q.reduced().component(1), &Poly::new(vec![0.0, -1.0, 0.0, 1.0]));
    }

    #[test]
    fn pair_errors() {
        assert_eq!(
            ShockPair::new(Flux::burgers(2), 0.3, 0.3).unwrap_err(),
            FluxError::EqualStates(0.3)
        );
        assert!(matches!(
            ShockPair::new(Flux::burgers(2), -1.0, 1.0),
            Err(FluxError::WrongOrder { .. })
        ));
    }

    #[test]
    fn normal_speed_examples() {
        let p = ShockPair::new(Flux::burgers(2), 1.0, -1.0).unwrap();
        assert_eq!(p.normal_speed(&[1.0, 0.0]), 0.0);
        assert_eq!(p.normal_speed(&[0.0, 1.0]), 1.0);
        assert_eq!(p.normal_speed(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn oleinik_examples() {
        let p = ShockPair::new(Flux::burgers(2), 1.0, -1.0).unwrap();
        for opts in [OleinikOptions::default(), OleinikOptions::exact()] {
            let v = p.oleinik(&[1.0, 0.0], &opts);
            assert!(v.admissible);
            assert_abs_diff_eq!(v.lax_margins.0, 2.0, epsilon = 1e-14);
            assert_abs_diff_eq!(v.lax_margins.1, 2.0, epsilon = 1e-14);

            let w = p.oleinik(&[0.0, 1.0], &opts);
            assert!(!w.admissible);
            assert!(w.worst_violation >= 0.37, "{w:?}");

            let z = p.oleinik(&[0.0, 0.0], &opts);
            assert!(z.admissible);
            assert_eq!(z.lax_margins, (0.0, 0.0));
        }
    }

    #[test]
    fn oleinik_sampled_matches_dense_oracle() {
        // Dense uniform sampling of s^3 - s on (-1, 1): max at s = -1/sqrt 3.
        let p = ShockPair::new(Flux::burgers(2), 1.0, -1.0).unwrap();
        let oracle = (1..20000)
            .map(|k| -1.0 + 2.0 * k as f64 / 20000.0)
            .map(|s| s * s * s - s)
            .fold(f64::NEG_INFINITY, f64::max);
        let v = p.oleinik(&[0.0, 1.0], &OleinikOptions::default());
        assert_abs_diff_eq!(v.worst_violation, oracle, epsilon = 1e-6);
        let e = p.oleinik(&[0.0, 1.0], &OleinikOptions::exact());
        assert_abs_diff_eq!(e.worst_violation, 2.0 / (3.0 * 3.0_f64.sqrt()), epsilon = 1e-12);
    }

    #[test]
    fn nondegeneracy_examples() {
        let r = check_nondegeneracy(&Flux::burgers(2), 256);
        assert!(r.pass);
        assert_eq!(r.rank, 3);

        let affine = Flux::from_coeffs(vec![vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let r = check_nondegeneracy(&affine, 64);
        assert!(!r.pass);
        assert_eq!(r.rank, 1);
        // every reported direction annihilates tau + xi1 + xi2
        for f in &r.failures {
            assert!((f[0] + f[1] + f[2]).abs() < 1e-12, "{f:?}");
            assert!((norm(f) - 1.0).abs() < 1e-12);
        }
        // (-2, 1, 1)/norm lies in the reported null space
        let probe = [-2.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt()];
        let residual: f64 = {
            let basis = &r.failures[r.failures.len() - 2..];
            let mut v = probe.to_vec();
            // Gram-Schmidt the two null vectors, then project out.
            let b0 = basis[0].clone();
            let c = dot(&basis[1], &b0);
            let b1 = crate::linalg::normalized(&crate::linalg::axpy(&basis[1], -c, &b0)).unwrap();
            for b in [&b0, &b1] {
                let c = dot(&v, b);
                v = crate::linalg::axpy(&v, -c, b);
            }
            norm(&v)
        };
        assert!(residual < 1e-12);

        let classical = Flux::from_coeffs(vec![vec![0.0, 0.0, 0.5]]).unwrap();
        assert!(check_nondegeneracy(&classical, 64).pass);
    }

    #[test]
    fn second_derivative_bound() {
        // |f''| = |(2, 6s)| on [-1, 1.05] peaks at s = 1.05
        let c = Flux::burgers(2).max_second_derivative(-1.0, 1.05);
        assert_abs_diff_eq!(c, (4.0 + 6.3f64 * 6.3).sqrt(), epsilon = 1e-12);
    }
}
