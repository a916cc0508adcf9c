//! Finite-difference check that the `(M, Z)` change of unknowns maps
//! Burgers solutions around `u_ref` to Burgers solutions around zero.

use crate::flux::Flux;
use crate::normalization::Normalization;

use super::{Check, Verdict};

#[derive(Clone, Debug)]
pub struct ResidualReport {
    pub steps: Vec<f64>,
    /// Max residual over the probe points for each step.
    pub residuals: Vec<f64>,
    /// Same with the shift sign flipped (`M x - t Z`).
    pub control: Vec<f64>,
    pub verdict: Verdict,
}

impl ResidualReport {
    /// `r(h) / r(h/2)` for consecutive refinements.
    pub fn ratios(&self) -> Vec<f64> {
        self.residuals.windows(2).map(|w| w[0] / w[1]).collect()
    }
    pub fn control_ratios(&self) -> Vec<f64> {
        self.control.windows(2).map(|w| w[0] / w[1]).collect()
    }
}

/// Smooth solution of the Burgers equation with data
/// `u0(x) = c + a exp(-|x|^2)`, from the implicit relation
/// `u = u0(x - t f'(u))` solved by Newton's method.
pub fn implicit_burgers(flux: &Flux, c: f64, a: f64, t: f64, x: &[f64]) -> f64 {
    let u0 = |z: &[f64]| c + a * (-z.iter().map(|v| v * v).sum::<f64>()).exp();
    let mut u = u0(x);
    for _ in 0..60 {
        let fp = flux.eval(u, 1);
        let fpp = flux.eval(u, 2);
        let z: Vec<f64> = x.iter().zip(&fp).map(|(xi, s)| xi - t * s).collect();
        let e = a * (-z.iter().map(|v| v * v).sum::<f64>()).exp();
        let g = u - c - e;
        // d/du of u0(z(u)) = grad u0 . (-t f''(u))
        let dg = 1.0 + t * z.iter().zip(&fpp).map(|(zi, s)| -2.0 * zi * e * s).sum::<f64>();
        let step = g / dg;
        u -= step;
        if step.abs() <= 1e-16 * (1.0 + u.abs()) {
            break;
        }
    }
    u
}

/// Forward-difference residual of `v_t + div f(v)` at `(t, x)`.
fn residual(flux: &Flux, v: &dyn Fn(f64, &[f64]) -> f64, t: f64, x: &[f64], h: f64) -> f64 {
    let v0 = v(t, x);
    let mut r = (v(t + h, x) - v0) / h;
    let f0 = flux.eval(v0, 0);
    for k in 0..x.len() {
        let mut xk = x.to_vec();
        xk[k] += h;
        r += (flux.eval(v(t, &xk), 0)[k] - f0[k]) / h;
    }
    r.abs()
}

/// Residuals of the transformed field for steps `h0 / 2^k`, `k < levels`,
/// together with a negative control using the wrong sign of the shift.
pub fn normalization_residuals(d: usize, u_ref: f64, h0: f64, levels: usize, min_ratio: f64) -> ResidualReport {
    let flux = Flux::burgers(d);
    let norm = crate::normalization::burgers_normalization(u_ref, d);
    let (amp, t) = (0.25, 0.2);
    let exact = |t: f64, x: &[f64]| implicit_burgers(&flux, u_ref, amp, t, x);
    let transformed = norm.transform(exact);
    let wrong = |t: f64, x: &[f64]| {
        let p = flipped_source(&norm, t, x);
        implicit_burgers(&flux, u_ref, amp, t, &p) - u_ref
    };
    let probes: Vec<Vec<f64>> = (0..9)
        .map(|i| {
            let s = i as f64 / 8.0;
            (0..d).map(|k| 0.6 * ((k + 1) as f64 * 2.1 * s).sin() - 0.1 * k as f64).collect()
        })
        .collect();
    let mut steps = Vec::new();
    let mut residuals = Vec::new();
    let mut control = Vec::new();
    for k in 0..levels {
        let h = h0 / 2f64.powi(k as i32);
        steps.push(h);
        let max_over = |v: &dyn Fn(f64, &[f64]) -> f64| {
            probes.iter().map(|x| residual(&flux, v, t, x, h)).fold(0.0, f64::max)
        };
        residuals.push(max_over(&transformed));
        control.push(max_over(&wrong));
    }
    let mut report = ResidualReport {
        steps,
        residuals,
        control,
        verdict: Verdict::new("normalize-check"),
    };
    let mut v = Verdict::new("normalize-check");
    for (i, r) in report.ratios().iter().enumerate() {
        v.push(Check::at_least(format!("refinement_{i}"), *r, min_ratio));
    }
    if u_ref != 0.0 {
        let worst = report.control_ratios().iter().copied().fold(0.0, f64::max);
        v.note("control_max_ratio", worst);
    }
    report.verdict = v;
    report
}

/// `M x - t Z`.
fn flipped_source(norm: &Normalization, t: f64, x: &[f64]) -> Vec<f64> {
    norm.source_point(0.0, x)
        .iter()
        .zip(norm.shift())
        .map(|(b, z)| b - t * z)
        .collect()
}
