//! Finite-time extinction of the part of the solution outside `[u+, u-]`.

use crate::grid::{Field, Grid};
use crate::linalg::{dot, norm};
use crate::profile::{Aabb, PerturbationSpec, ShockProfile};
use crate::solver::{Boundary, FluxFrame, Member, SchemeConfig, Solver};

use super::{max_increase, steady_boundary, Check, ExperimentError, Verdict};

/// Bound on the time after which an overhead of amplitude `eta` has been
/// swallowed by the shock.
#[derive(Clone, Debug, PartialEq)]
pub struct AbsorptionEstimate {
    pub eta: f64,
    pub rho: f64,
    /// `sup |f''|` over `[u+, u- + eta]`.
    pub c_f: f64,
    /// `F'(u-)` for the reduced flux.
    pub center: Vec<f64>,
    /// Ball radius `2 c_f eta`.
    pub radius: f64,
    /// `g(F'(u-))`.
    pub g_center: f64,
    /// `min g` over the ball.
    pub alpha: f64,
    pub min_g_on_k: f64,
    pub psi_at_origin: f64,
    pub t_star: f64,
}

/// `g(x) = r - rho psi0(y)` is the minimum of the linear forms
/// `W - rho g_k` with `g_k` the gauge gradients, so its minimum over a
/// ball `B(c, R)` is `min_k (w_k . c - R |w_k|)`.
pub fn predicted_absorption_time(
    profile: &ShockProfile,
    k: &Aabb,
    eta: f64,
    rho: Option<f64>,
) -> Result<AbsorptionEstimate, ExperimentError> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(ExperimentError::BadParameter(format!("eta must be non-negative, got {eta}")));
    }
    let rho = rho.unwrap_or(profile.rho()).max(profile.rho());
    if !profile.is_unc() || rho >= 1.0 {
        return Err(ExperimentError::Characteristic(format!("ratio {rho} is not below one")));
    }
    let pair = profile.pair();
    let dual = profile.dual();
    let frame = dual.frame();
    let center = pair.reduced().eval(pair.u_minus(), 1);
    if norm(&center) == 0.0 {
        return Err(ExperimentError::Characteristic("F'(u-) vanishes".into()));
    }
    let forms: Vec<Vec<f64>> = dual
        .gauge_gradients()
        .iter()
        .map(|g| {
            let e = frame.embed(g);
            frame.w().iter().zip(&e).map(|(w, e)| w - rho * e).collect()
        })
        .collect();
    let g_at = |x: &[f64]| forms.iter().map(|w| dot(w, x)).fold(f64::INFINITY, f64::min);
    let g_center = g_at(&center);
    if g_center <= 0.0 {
        return Err(ExperimentError::Characteristic(format!("g(F'(u-)) = {g_center} <= 0")));
    }
    let c_f = pair.flux().max_second_derivative(pair.u_plus(), pair.u_minus() + eta);
    let radius = 2.0 * c_f * eta;
    let alpha = forms
        .iter()
        .map(|w| dot(w, &center) - radius * norm(w))
        .fold(f64::INFINITY, f64::min);
    if alpha <= 0.0 {
        return Err(ExperimentError::EtaTooLarge { alpha });
    }
    let min_g_on_k = if k.is_empty() {
        0.0
    } else {
        k.vertices().iter().map(|v| g_at(v)).fold(f64::INFINITY, f64::min)
    };
    let psi_at_origin = profile.psi(&vec![0.0; dual.dim() - 1]);
    let t_star = ((psi_at_origin - min_g_on_k) / alpha).max(0.0);
    Ok(AbsorptionEstimate {
        eta,
        rho,
        c_f,
        center,
        radius,
        g_center,
        alpha,
        min_g_on_k,
        psi_at_origin,
        t_star,
    })
}

#[derive(Clone, Debug)]
pub struct OverheadParams {
    pub horizon: f64,
    /// Extinction level as a fraction of `u- - u+`.
    pub tolerance_fraction: f64,
    pub eta: f64,
    /// Ratio used in the absorption bound when the profile's own is smaller.
    pub rho: Option<f64>,
    pub monotone_slack: f64,
    pub domination_slack: f64,
}

impl Default for OverheadParams {
    fn default() -> Self {
        OverheadParams {
            horizon: 40.0,
            tolerance_fraction: 0.02,
            eta: 0.05,
            rho: Some(0.1),
            monotone_slack: 1e-12,
            domination_slack: 1e-14,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OverheadReport {
    pub times: Vec<f64>,
    pub overhead_plus: Vec<f64>,
    pub overhead_minus: Vec<f64>,
    /// Largest `S_t a - S_t a+` seen at each time.
    pub domination: Vec<f64>,
    pub extinction_time: Option<f64>,
    /// First time the overhead fell below `eta`.
    pub eta_time: Option<f64>,
    pub estimate: Option<AbsorptionEstimate>,
    pub final_field: Field,
    pub verdict: Verdict,
}

impl OverheadReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,overhead_plus,overhead_minus,domination\n");
        for i in 0..self.times.len() {
            s.push_str(&format!(
                "{},{},{},{}\n",
                self.times[i], self.overhead_plus[i], self.overhead_minus[i], self.domination[i]
            ));
        }
        s
    }
}

/// Evolves `a = U + phi` with `phi` allowed above `u-` or below `u+`, and
/// alongside it `a+ = max(u-, a)` with constant boundary `u-`.
pub fn overhead_experiment(
    profile: &ShockProfile,
    phi: &PerturbationSpec,
    grid: &Grid,
    scheme: &SchemeConfig,
    params: &OverheadParams,
) -> Result<OverheadReport, ExperimentError> {
    let pair = profile.pair();
    if !pair.flux().is_burgers() {
        return Err(crate::flux::FluxError::NotBurgers.into());
    }
    if !profile.is_unc() {
        return Err(crate::profile::ProfileError::NotUnc(profile.rho()).into());
    }
    if scheme.frame != FluxFrame::Reduced {
        return Err(ExperimentError::BadParameter("overhead experiment runs in the reduced frame".into()));
    }
    if !(params.horizon > 0.0) {
        return Err(ExperimentError::BadParameter("horizon must be positive".into()));
    }
    let (um, up) = (pair.u_minus(), pair.u_plus());
    let tol = params.tolerance_fraction * (um - up);
    let base = profile.cell_averages(grid);
    let kick = Field::from_fn(grid, |x| phi.eval(x));
    let a = base.zip_map(&kick, |u, p| u + p)?;
    let a_plus = a.map(|v| v.max(um));
    let range = (up.min(a.min()), um.max(a.max()));
    let solver = Solver::new(pair.reduced().clone(), scheme, range)?;

    let mut report = OverheadReport {
        times: Vec::new(),
        overhead_plus: Vec::new(),
        overhead_minus: Vec::new(),
        domination: Vec::new(),
        extinction_time: None,
        eta_time: None,
        estimate: None,
        final_field: a.clone(),
        verdict: Verdict::new("overhead"),
    };
    let record = |t: f64, m: &[Member], r: &mut OverheadReport| -> Result<(), ExperimentError> {
        let (lo, hi) = m[0].field.range();
        let plus = (hi - um).max(0.0);
        let minus = (up - lo).max(0.0);
        r.times.push(t);
        r.overhead_plus.push(plus);
        r.overhead_minus.push(minus);
        r.domination.push(m[0].field.max_excess_over(&m[1].field)?);
        if r.extinction_time.is_none() && plus <= tol && minus <= tol {
            r.extinction_time = Some(t);
        }
        if r.eta_time.is_none() && plus.max(minus) <= params.eta {
            r.eta_time = Some(t);
        }
        Ok(())
    };
    let mut members = vec![
        Member::new(a, steady_boundary(profile)),
        Member::new(a_plus, Boundary::Constant(um)),
    ];
    record(0.0, &members, &mut report)?;
    let mut failure = None;
    solver.evolve(&mut members, 0.0, params.horizon, |t, m| {
        if let Err(e) = record(t, m, &mut report) {
            failure = Some(e);
        }
        Ok(())
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    report.final_field = members.swap_remove(0).field;

    let mut v = Verdict::new("overhead");
    v.push(Check::at_most("overhead_plus_monotone", max_increase(&report.overhead_plus).max(0.0), params.monotone_slack));
    v.push(Check::at_most("overhead_minus_monotone", max_increase(&report.overhead_minus).max(0.0), params.monotone_slack));
    v.push(Check::at_most(
        "extinction_before_horizon",
        report.extinction_time.unwrap_or(f64::INFINITY),
        params.horizon,
    ));
    v.push(Check::at_most(
        "domination",
        report.domination.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(0.0),
        params.domination_slack,
    ));
    v.note("tolerance", tol);
    if let Some(t) = report.eta_time {
        v.note("eta_time", t);
    }
    match predicted_absorption_time(profile, &phi.support(grid.dim()), params.eta, params.rho) {
        Ok(est) => {
            v.note("predicted_absorption_time", est.t_star);
            v.note("alpha", est.alpha);
            if let (Some(te), Some(tx)) = (report.eta_time, report.extinction_time) {
                v.note("measured_absorption_after_eta", tx - te);
            }
            report.estimate = Some(est);
        }
        Err(e) => v.note("predicted_absorption_time", format!("unavailable ({e})")),
    }
    report.verdict = v;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::dual_cone_from_flux;
    use crate::flux::{Flux, ShockPair};
    use crate::profile::make_planar;

    fn planar(nu: &[f64]) -> ShockProfile {
        let pair = ShockPair::new(Flux::burgers(2), 1.0, -1.0).unwrap();
        let dual = dual_cone_from_flux(&pair, 4096).unwrap();
        make_planar(&pair, &dual, nu, 0.0).unwrap()
    }

    #[test]
    fn absorption_example() {
        let p = planar(&[1.0, 0.0]);
        let k = Aabb::new(vec![-3.0, -1.0], vec![-1.0, 1.0]);
        let est = predicted_absorption_time(&p, &k, 0.05, Some(0.1)).unwrap();
        assert!((est.g_center - 1.8).abs() < 1e-9, "{}", est.g_center);
        let cf = (4.0f64 + 36.0 * 1.05 * 1.05).sqrt();
        assert!((est.c_f - cf).abs() < 1e-9);
        let exact = 1.8 - (1.0f64 + 0.01).sqrt() * 2.0 * cf * 0.05;
        assert!((est.alpha - exact).abs() < 1e-9, "{} {exact}", est.alpha);
        assert!(est.alpha >= 1.8 - 1.1 * 2.0 * cf * 0.05);
        assert!(est.t_star.is_finite() && est.t_star > 0.0);

        let zero = predicted_absorption_time(&p, &k, 0.0, Some(0.1)).unwrap();
        assert!((zero.alpha - zero.g_center).abs() < 1e-12);
        assert!((zero.t_star - (0.0 - zero.min_g_on_k) / zero.g_center).abs() < 1e-12);
    }

    #[test]
    fn absorption_time_is_monotone_in_eta() {
        let p = planar(&[1.0, 0.0]);
        let k = Aabb::new(vec![-3.0, -1.0], vec![-1.0, 1.0]);
        let mut last = 0.0;
        for i in 0..10 {
            let est = predicted_absorption_time(&p, &k, 0.01 * i as f64, Some(0.1)).unwrap();
            assert!(est.t_star >= last);
            last = est.t_star;
        }
        assert!(matches!(
            predicted_absorption_time(&p, &k, 1.0, Some(0.1)),
            Err(ExperimentError::EtaTooLarge { .. })
        ));
    }

    #[test]
    fn characteristic_shock_is_rejected() {
        let p = planar(&[1.0, 1.0]);
        let k = Aabb::new(vec![-1.0, -1.0], vec![0.0, 0.0]);
        assert!(matches!(
            predicted_absorption_time(&p, &k, 0.05, None),
            Err(ExperimentError::Characteristic(_))
        ));
    }

    #[test]
    fn in_range_data_has_no_overhead() {
        let p = planar(&[1.0, 0.0]);
        let grid = Grid::centered(vec![24, 24], 0.25).unwrap();
        let phi = PerturbationSpec::single(crate::profile::BumpShape::Cosine, vec![-1.5, 0.0], 0.8, -0.5);
        let params = OverheadParams {
            horizon: 1.0,
            ..OverheadParams::default()
        };
        let mut scheme = SchemeConfig::default_for(2);
        scheme.frame = FluxFrame::Reduced;
        let r = overhead_experiment(&p, &phi, &grid, &scheme, &params).unwrap();
        assert!(r.overhead_plus.iter().all(|&o| o == 0.0));
        assert!(r.verdict.all_pass(), "{}", r.verdict.to_text());
    }
}
