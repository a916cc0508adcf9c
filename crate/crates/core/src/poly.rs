//! Dense real polynomials in ascending-degree form.
//!
//! Everything the rest of the crate needs from a flux component lives here:
//! Horner evaluation, exact derivatives, and real-root isolation on an
//! interval (used for critical-point maximisation and for the piecewise
//! integrals of the Engquist-Osher flux).

use std::fmt;

/// `coeffs[k]` multiplies `s^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    /// Builds a polynomial, dropping trailing exact zeros; an empty
    /// coefficient list is the zero polynomial.
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut coeffs = coeffs.into();
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly::new(vec![0.0])
    }

    /// `s^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        Poly { coeffs: c }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree ignoring trailing exact zeros (the zero polynomial has degree 0).
    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|&c| c != 0.0)
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Largest coefficient magnitude.
    pub fn scale(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect::<Vec<_>>(),
        )
    }

    /// Antiderivative vanishing at zero.
    pub fn antiderivative(&self) -> Poly {
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(0.0);
        c.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &a)| a / (k as f64 + 1.0)),
        );
        Poly::new(c)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(
            (0..n)
                .map(|k| self.coeff(k) + other.coeff(k))
                .collect::<Vec<_>>(),
        )
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scaled(-1.0))
    }

    pub fn scaled(&self, a: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * a).collect::<Vec<_>>())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut c = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }

    /// `p(s + c)` expanded in powers of `s`.
    pub fn shifted(&self, c: f64) -> Poly {
        // Horner in polynomial arithmetic: p(s+c) = (...(a_n (s+c) + a_{n-1})(s+c) ...).
        let lin = Poly::new(vec![c, 1.0]);
        self.coeffs
            .iter()
            .rev()
            .fold(Poly::zero(), |acc, &a| acc.mul(&lin).add(&Poly::new(vec![a])))
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Real roots in the closed interval `[lo, hi]`, sorted ascending.
    ///
    /// Roots are isolated between consecutive critical points, where the
    /// polynomial is monotone, and polished by bisection. Even-multiplicity
    /// roots show up as critical points where the value is (numerically) zero.
    pub fn real_roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        if !(lo <= hi) || self.is_zero() {
            return Vec::new();
        }
        let deg = self.degree();
        if deg == 0 {
            return Vec::new();
        }
        if deg == 1 {
            let r = -self.coeff(0) / self.coeff(1);
            return if r >= lo && r <= hi { vec![r] } else { Vec::new() };
        }
        let mut knots = vec![lo];
        knots.extend(self.derivative().real_roots_in(lo, hi));
        knots.push(hi);
        knots.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * (1.0 + b.abs()));

        let zero_tol = 1e-13 * self.magnitude_on(lo, hi).max(f64::MIN_POSITIVE);
        let mut roots: Vec<f64> = Vec::new();
        let push = |r: f64, roots: &mut Vec<f64>| {
            if roots
                .last()
                .is_none_or(|&last| (r - last).abs() > 1e-12 * (1.0 + r.abs()))
            {
                roots.push(r);
            }
        };
        for w in knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (self.eval(a), self.eval(b));
            if fa.abs() <= zero_tol {
                push(a, &mut roots);
            }
            if fa.abs() > zero_tol && fb.abs() > zero_tol && (fa < 0.0) != (fb < 0.0) {
                push(self.bisect(a, b, fa), &mut roots);
            }
        }
        let last = *knots.last().unwrap();
        if self.eval(last).abs() <= zero_tol {
            push(last, &mut roots);
        }
        roots
    }

    /// All real roots, using the Cauchy bound to bracket them.
    pub fn real_roots(&self) -> Vec<f64> {
        let deg = self.degree();
        if deg == 0 {
            return Vec::new();
        }
        let lead = self.coeff(deg);
        let bound = 1.0
            + (0..deg)
                .map(|k| (self.coeff(k) / lead).abs())
                .fold(0.0_f64, f64::max);
        self.real_roots_in(-bound, bound)
    }

    /// Maximum of the polynomial over `[lo, hi]` and a point attaining it.
    pub fn max_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut best = (self.eval(lo), lo);
        let candidates = self
            .derivative()
            .real_roots_in(lo, hi)
            .into_iter()
            .chain(std::iter::once(hi));
        for s in candidates {
            let v = self.eval(s);
            if v > best.0 {
                best = (v, s);
            }
        }
        best
    }

    /// `max |p|` over `[lo, hi]`.
    pub fn max_abs_on(&self, lo: f64, hi: f64) -> f64 {
        let (mx, _) = self.max_on(lo, hi);
        let (mn, _) = self.scaled(-1.0).max_on(lo, hi);
        mx.abs().max(mn.abs())
    }

    fn magnitude_on(&self, lo: f64, hi: f64) -> f64 {
        let m = lo.abs().max(hi.abs()).max(1.0);
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.abs() * m.powi(k as i32))
            .sum()
    }

    fn bisect(&self, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = self.eval(m);
            if fm == 0.0 {
                return m;
            }
            if (fm < 0.0) == (fa < 0.0) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}
