//! Sup-norm decay `|v(t)|_inf <= c_d |v0|_1^alpha t^-beta` of compact
//! perturbations of a constant Burgers state.

use crate::flux::{Flux, FluxError};
use crate::grid::{Field, Grid};
use crate::normalization::Normalization;
use crate::profile::PerturbationSpec;
use crate::solver::{Boundary, Member, SchemeConfig, Solver};

use super::support::boundary_cells;
use super::{Check, ExperimentError, Verdict};

/// `(alpha, beta) = (2, 2d) / (d^2 + d + 2)`.
pub fn dispersion_exponents(d: usize) -> (f64, f64) {
    let q = (d * d + d + 2) as f64;
    (2.0 / q, 2.0 * d as f64 / q)
}

#[derive(Clone, Debug)]
pub struct DispersionParams {
    pub u_ref: f64,
    pub t0: f64,
    pub horizon: f64,
    /// Allowed growth of `t^beta |v|_inf` over `[t0, horizon]`.
    pub growth_factor: f64,
    /// Slack on the `2^alpha` ratio of bound constants under mass doubling.
    pub mass_slack: f64,
    /// Relative perturbation level that counts as reaching the boundary.
    pub contact_level: f64,
}

impl Default for DispersionParams {
    fn default() -> Self {
        DispersionParams {
            u_ref: 0.0,
            t0: 10.0,
            horizon: 100.0,
            growth_factor: 2.0,
            mass_slack: 2.0,
            contact_level: 1e-3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DispersionRun {
    pub mass: f64,
    /// `(t, |v(t)|_inf)` after every step.
    pub series: Vec<(f64, f64)>,
    /// `max over [t0, T] of t^beta |v|_inf / (t0^beta |v(t0)|_inf)`.
    pub boundedness_ratio: f64,
    /// `max over [t0, T] of t^beta |v|_inf`.
    pub bound_constant: f64,
    /// Least-squares slope of `log |v|_inf` against `log t` on `[t0, T]`.
    pub fitted_slope: f64,
    /// `v` at the horizon.
    pub final_field: Field,
}

#[derive(Clone, Debug)]
pub struct DispersionReport {
    pub alpha: f64,
    pub beta: f64,
    pub single: DispersionRun,
    pub doubled: DispersionRun,
    /// `bound_constant(2m) / bound_constant(m)`.
    pub mass_ratio: f64,
    pub verdict: Verdict,
}

impl DispersionReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,sup_m,sup_2m\n");
        for (a, b) in self.single.series.iter().zip(&self.doubled.series) {
            s.push_str(&format!("{},{},{}\n", a.0, a.1, b.1));
        }
        s
    }
}

fn run_one(
    flux: &Flux,
    v0: Field,
    scheme: &SchemeConfig,
    params: &DispersionParams,
    beta: f64,
    range: (f64, f64),
) -> Result<DispersionRun, ExperimentError> {
    let mass = v0.mass();
    let amp = v0.sup_deviation(0.0);
    let solver = Solver::new(flux.clone(), scheme, range)?;
    let edge = boundary_cells(v0.grid());
    let mut series = vec![(0.0, amp)];
    let mut contact = None;
    let mut members = vec![Member::new(v0, Boundary::Constant(0.0))];
    let mut probe = |t: f64, m: &[Member]| {
        let u = m[0].field.values();
        if contact.is_none() && edge.iter().any(|&c| u[c].abs() > params.contact_level * amp) {
            contact = Some(t);
        }
        series.push((t, m[0].field.sup_deviation(0.0)));
    };
    solver.evolve(&mut members, 0.0, params.horizon, |t, m| {
        probe(t, m);
        Ok(())
    })?;
    if let Some(t) = contact {
        return Err(ExperimentError::BoundaryContact { t });
    }
    let window: Vec<(f64, f64)> = series.iter().copied().filter(|&(t, _)| t >= params.t0 - 1e-12).collect();
    let (t_first, s_first) = window.first().copied().unwrap_or((params.t0, 0.0));
    let scaled: Vec<f64> = window.iter().map(|&(t, s)| t.powf(beta) * s).collect();
    let bound_constant = scaled.iter().copied().fold(0.0, f64::max);
    let start = t_first.powf(beta) * s_first;
    let boundedness_ratio = if start > 0.0 { bound_constant / start } else { 1.0 };
    let logs: Vec<(f64, f64)> = window
        .iter()
        .filter(|&&(t, s)| t > 0.0 && s > 0.0)
        .map(|&(t, s)| (t.ln(), s.ln()))
        .collect();
    let fitted_slope = least_squares_slope(&logs);
    let final_field = members.pop().expect("one member").field;
    Ok(DispersionRun {
        mass,
        series,
        boundedness_ratio,
        bound_constant,
        fitted_slope,
        final_field,
    })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Evolves `v = u - u_ref` with the co-moving Burgers flux, once for the
/// perturbation `phi` and once for `2 phi`.
pub fn dispersion_experiment(
    flux: &Flux,
    phi: &PerturbationSpec,
    grid: &Grid,
    scheme: &SchemeConfig,
    params: &DispersionParams,
) -> Result<DispersionReport, ExperimentError> {
    if !flux.is_burgers() {
        return Err(FluxError::NotBurgers.into());
    }
    if flux.dim() != grid.dim() {
        return Err(ExperimentError::BadParameter("flux and grid dimensions differ".into()));
    }
    if !(params.t0 > 0.0 && params.horizon > params.t0) {
        return Err(ExperimentError::BadParameter("need 0 < t0 < horizon".into()));
    }
    let d = grid.dim();
    let (alpha, beta) = dispersion_exponents(d);
    let g = Normalization::for_flux(flux, params.u_ref)?.comoving_flux();
    let v0 = Field::from_fn(grid, |x| phi.eval(x));
    let mut verdict = Verdict::new("dispersion");
    if v0.sup_deviation(0.0) == 0.0 {
        let zero = DispersionRun {
            mass: 0.0,
            series: vec![(0.0, 0.0), (params.horizon, 0.0)],
            boundedness_ratio: 1.0,
            bound_constant: 0.0,
            fitted_slope: 0.0,
            final_field: v0.clone(),
        };
        verdict.push(Check::at_most("boundedness", 1.0, params.growth_factor));
        return Ok(DispersionReport {
            alpha,
            beta,
            single: zero.clone(),
            doubled: zero,
            mass_ratio: 1.0,
            verdict,
        });
    }
    // one dissipation for both runs keeps them ordered like their data
    let range = (2.0 * v0.min().min(0.0), 2.0 * v0.max().max(0.0));
    let single = run_one(&g, v0.clone(), scheme, params, beta, range)?;
    let doubled = run_one(&g, v0.map(|v| 2.0 * v), scheme, params, beta, range)?;
    let mass_ratio = doubled.bound_constant / single.bound_constant;
    verdict.push(Check::at_most("boundedness_m", single.boundedness_ratio, params.growth_factor));
    verdict.push(Check::at_most("boundedness_2m", doubled.boundedness_ratio, params.growth_factor));
    verdict.push(Check::at_least("mass_ratio_lower", mass_ratio, 1.0));
    verdict.push(Check::at_most("mass_ratio_upper", mass_ratio, params.mass_slack * 2f64.powf(alpha)));
    verdict.note("alpha", alpha);
    verdict.note("beta", beta);
    verdict.note("fitted_slope_m", single.fitted_slope);
    verdict.note("fitted_slope_2m", doubled.fitted_slope);
    Ok(DispersionReport {
        alpha,
        beta,
        single,
        doubled,
        mass_ratio,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents() {
        let (a, b) = dispersion_exponents(2);
        assert!((a - 0.25).abs() < 1e-15 && (b - 0.5).abs() < 1e-15);
        let (a, b) = dispersion_exponents(3);
        assert!((a - 1.0 / 7.0).abs() < 1e-15 && (b - 3.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn zero_data_is_trivially_bounded() {
        let grid = Grid::centered(vec![16, 16], 0.5).unwrap();
        let r = dispersion_experiment(
            &Flux::burgers(2),
            &PerturbationSpec::default(),
            &grid,
            &SchemeConfig::default_for(2),
            &DispersionParams::default(),
        )
        .unwrap();
        assert!(r.verdict.all_pass());
        assert_eq!(r.single.bound_constant, 0.0);
    }

    #[test]
    fn slope_fit() {
        let pts: Vec<(f64, f64)> = (1..10).map(|i| ((i as f64).ln(), -0.5 * (i as f64).ln() + 3.0)).collect();
        assert!((least_squares_slope(&pts) + 0.5).abs() < 1e-12);
    }
}
