//! L1 stability of a non-characteristic shock under compact perturbations.

use crate::grid::{l1_distance, Field, Grid};
use crate::profile::{
    extract_front, front_surgery, sandwich_bounds, Aabb, ExtractedFront, Front, PerturbationSpec, Pwl,
    ShockProfile,
};
use crate::solver::{FluxFrame, Member, SchemeConfig, Solver};

use super::{check_range, max_increase, steady_boundary, Check, ExperimentError, Verdict};

#[derive(Clone, Debug)]
pub struct StabilityParams {
    pub horizon: f64,
    /// Spacing of the stored snapshots used for the convergence curve.
    pub snapshot_every: f64,
    /// Time the discrete layer of the recovered limit is allowed to form.
    pub layer_relax: f64,
    /// Per-cell slack on increments of the Lyapunov curves.
    pub lyapunov_slack: f64,
    /// Bound on `|u(T) - U^|_1 / |phi|_1`.
    pub convergence_fraction: f64,
    /// Relative tolerance of the mass identity.
    pub mass_tolerance: f64,
    pub confinement_slack: f64,
}

impl Default for StabilityParams {
    fn default() -> Self {
        StabilityParams {
            horizon: 40.0,
            snapshot_every: 2.0,
            layer_relax: 0.5,
            lyapunov_slack: 1e-10,
            convergence_fraction: 0.05,
            mass_tolerance: 0.02,
            confinement_slack: 1e-14,
        }
    }
}

#[derive(Clone, Debug)]
pub struct StabilityReport {
    pub times: Vec<f64>,
    pub comparison_names: Vec<String>,
    /// `|u(t) - R|_1` per comparison, indexed like `times`.
    pub lyapunov: Vec<Vec<f64>>,
    /// `(t, |u(t) - U^|_1)` at the snapshot times.
    pub convergence: Vec<(f64, f64)>,
    pub phi_mass: f64,
    pub phi_l1: f64,
    /// `(u- - u+) * integral of (psi^ - psi)`.
    pub front_mass: f64,
    /// Recovered front, already corrected for the discrete layer offset.
    pub limit_front: Pwl,
    pub final_field: Field,
    pub verdict: Verdict,
}

impl StabilityReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t");
        for n in &self.comparison_names {
            s.push_str(&format!(",l1_to_{n}"));
        }
        s.push('\n');
        for (i, t) in self.times.iter().enumerate() {
            s.push_str(&t.to_string());
            for l in &self.lyapunov {
                s.push_str(&format!(",{}", l[i]));
            }
            s.push('\n');
        }
        s
    }
}

/// Five shocks coinciding with `profile` outside bounded sets, obtained by
/// front surgery with tent/dip bumps of distinct widths.
pub fn default_comparisons(profile: &ShockProfile, grid: &Grid) -> Result<Vec<(String, ShockProfile)>, ExperimentError> {
    let dual = profile.dual();
    let frame = dual.frame();
    let h_dim = dual.dim() - 1;
    // H- and r-extent of the grid box
    let corners = Aabb::new(grid.lo().to_vec(), grid.hi()).vertices();
    let y_half = (0..h_dim)
        .map(|j| corners.iter().map(|c| frame.coords(c).1[j].abs()).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min);
    let r_half = corners.iter().map(|c| frame.coords(c).0.abs()).fold(0.0, f64::max);
    let kappa = 0.5 * (1.0 + profile.rho());
    let fractions = [-0.5, -0.25, 0.0, 0.25, 0.5];
    let heights = [0.08, 0.12, 0.16, 0.2, 0.24];
    let mut out = Vec::new();
    for i in 0..5 {
        let mut yc = vec![0.0; h_dim];
        yc[0] = fractions[i] * y_half;
        let mut yd = vec![0.0; h_dim];
        yd[0] = fractions[(i + 2) % 5] * y_half;
        let c = heights[i] * r_half;
        let b = profile.front().clone();
        let tent_top = b.eval(&yc) + c;
        let tent = Front::max(b.clone(), Front::reflected_gauge(dual, -kappa, tent_top, yc.clone()));
        let dip_bottom = b.eval(&yd) - heights[(i + 2) % 5] * r_half;
        let dip = Front::min(b.clone(), Front::gauge(dual, kappa, dip_bottom, yd.clone()));
        let rho = profile.rho().max(kappa);
        let mk = |front: Front| ShockProfile::from_parts(profile.pair().clone(), dual.clone(), front, rho, true);
        // with h a dip and k a tent the surgery returns (dip, tent)
        let (h_hat, k_hat) = front_surgery(profile, &mk(dip), &mk(tent))?;
        if i % 2 == 0 {
            out.push((format!("dip{i}"), h_hat));
        } else {
            out.push((format!("tent{i}"), k_hat));
        }
    }
    Ok(out)
}

/// `psi^ - (psi_layer - psi)`: removes the offset between the mid-level
/// crossing of the discrete layer and the front it was started from.
fn corrected_front(raw: &ExtractedFront, layer: &ExtractedFront, profile: &ShockProfile) -> Pwl {
    let p = &raw.psi;
    let values = (0..p.values().len())
        .map(|i| {
            let y = p.point(i);
            p.values()[i] - (layer.psi.values()[i] - profile.psi(&y))
        })
        .collect();
    Pwl::new(p.origin().to_vec(), p.step(), p.counts().to_vec(), values).expect("same layout as the extracted front")
}

/// Evolves `u = U + phi` in the reduced frame with the comparison shocks,
/// the sandwich bounds and `U` itself, then identifies the limit shock.
pub fn stability_experiment(
    profile: &ShockProfile,
    phi: &PerturbationSpec,
    grid: &Grid,
    scheme: &SchemeConfig,
    params: &StabilityParams,
    comparisons: Option<Vec<(String, ShockProfile)>>,
) -> Result<StabilityReport, ExperimentError> {
    if !profile.is_unc() {
        return Err(crate::profile::ProfileError::NotUnc(profile.rho()).into());
    }
    if scheme.frame != FluxFrame::Reduced {
        return Err(ExperimentError::BadParameter("stability experiment runs in the reduced frame".into()));
    }
    if !(params.horizon > 0.0 && params.snapshot_every > 0.0) {
        return Err(ExperimentError::BadParameter("horizon and snapshot_every must be positive".into()));
    }
    let pair = profile.pair();
    let (um, up) = (pair.u_minus(), pair.u_plus());
    let d = grid.dim();
    let dx = grid.dx();
    let base = profile.cell_averages(grid);
    let kick = Field::from_fn(grid, |x| phi.eval(x));
    let u0 = base.zip_map(&kick, |u, p| u + p)?;
    check_range(&u0, up, um)?;
    let phi_mass = kick.mass();
    let phi_l1 = kick.l1_norm();

    let comparisons = match comparisons {
        Some(c) => c,
        None => default_comparisons(profile, grid)?,
    };
    let k = phi.support(d).grown(dx);
    let (lower, upper) = sandwich_bounds(profile, &k, 2.0 * dx)?;

    let solver = Solver::new(pair.reduced().clone(), scheme, (up, um))?;
    let mut members = vec![
        Member::new(u0, steady_boundary(profile)),
        Member::new(base, steady_boundary(profile)),
        Member::new(lower.cell_averages(grid), steady_boundary(&lower)),
        Member::new(upper.cell_averages(grid), steady_boundary(&upper)),
    ];
    for (_, r) in &comparisons {
        members.push(Member::new(r.cell_averages(grid), steady_boundary(r)));
    }
    let n_cmp = comparisons.len();
    let mut times = vec![0.0];
    let mut lyapunov: Vec<Vec<f64>> = (0..n_cmp)
        .map(|i| l1_distance(&members[0].field, &members[4 + i].field).map(|v| vec![v]))
        .collect::<Result<_, _>>()?;
    let mut confinement: f64 = members[2]
        .field
        .max_excess_over(&members[0].field)?
        .max(members[0].field.max_excess_over(&members[3].field)?);
    let mut snapshots = vec![(0.0, members[0].field.clone(), members[1].field.clone())];

    let mut t = 0.0;
    for stop in crate::solver::snapshot_times(0.0, params.horizon, Some(params.snapshot_every)) {
        t = solver.evolve(&mut members, t, stop, |tn, m| {
            times.push(tn);
            for (i, series) in lyapunov.iter_mut().enumerate() {
                series.push(l1_distance(&m[0].field, &m[4 + i].field)?);
            }
            confinement = confinement
                .max(m[2].field.max_excess_over(&m[0].field)?)
                .max(m[0].field.max_excess_over(&m[3].field)?);
            Ok(())
        })?;
        snapshots.push((t, members[0].field.clone(), members[1].field.clone()));
    }
    let u_final = members[0].field.clone();
    let layer_final = members[1].field.clone();
    let outflux_gap = members[0].outflux - members[1].outflux;

    let dual = profile.dual();
    let raw = extract_front(&u_final, pair, dual)?;
    let layer = extract_front(&layer_final, pair, dual)?;
    let limit_front = corrected_front(&raw, &layer, profile);
    let diff: Vec<f64> = raw.psi.values().iter().zip(layer.psi.values()).map(|(a, b)| a - b).collect();
    let diff = Pwl::new(raw.psi.origin().to_vec(), raw.psi.step(), raw.psi.counts().to_vec(), diff)
        .expect("same layout as the extracted front");
    let front_mass = (um - up) * diff.integral();

    // the limit shock on the grid: the co-evolved layer plus the discrete
    // difference between sharp shocks on the extracted fronts of u and U,
    // so slow drift of the base layer is carried along
    let sharp = |psi: &Pwl| ShockProfile::from_parts(pair.clone(), dual.clone(), Front::Sampled(psi.clone()), profile.rho(), true);
    let relaxed = |p: &ShockProfile| solver.relax(&p.cell_averages(grid), &steady_boundary(p), 0.0, params.layer_relax);
    let correction = relaxed(&sharp(&raw.psi))?.zip_map(&relaxed(&sharp(&layer.psi))?, |a, b| a - b)?;
    let convergence: Vec<(f64, f64)> = snapshots
        .iter()
        .map(|(t, f, layer)| {
            let target = layer.zip_map(&correction, |a, b| a + b)?;
            Ok((*t, l1_distance(f, &target)?))
        })
        .collect::<Result<_, ExperimentError>>()?;

    let n_cells = grid.len() as f64;
    let mut v = Verdict::new("stability");
    for (i, (name, _)) in comparisons.iter().enumerate() {
        v.push(Check::at_most(
            format!("lyapunov_{name}"),
            max_increase(&lyapunov[i]).max(0.0),
            params.lyapunov_slack * n_cells,
        ));
    }
    let final_gap = convergence.last().map_or(0.0, |c| c.1);
    if phi_l1 > 0.0 {
        v.push(Check::at_most("convergence_to_limit", final_gap / phi_l1, params.convergence_fraction));
        v.push(Check::at_most(
            "mass_identity",
            (front_mass - phi_mass).abs() / phi_mass.abs().max(f64::MIN_POSITIVE),
            params.mass_tolerance,
        ));
    } else {
        v.note("final_gap", final_gap);
        v.push(Check::at_most("front_unchanged", limit_front_deviation(&limit_front, profile), dx));
    }
    v.push(Check::at_most("confinement", confinement.max(0.0), params.confinement_slack));
    v.note("phi_mass", phi_mass);
    v.note("front_mass", front_mass);
    v.note("phi_l1", phi_l1);
    v.note("boundary_outflux_gap", outflux_gap);
    v.note("uncrossed_columns", raw.uncrossed);

    Ok(StabilityReport {
        times,
        comparison_names: comparisons.into_iter().map(|(n, _)| n).collect(),
        lyapunov,
        convergence,
        phi_mass,
        phi_l1,
        front_mass,
        limit_front,
        final_field: u_final,
        verdict: v,
    })
}

fn limit_front_deviation(front: &Pwl, profile: &ShockProfile) -> f64 {
    (0..front.values().len())
        .map(|i| (front.values()[i] - profile.psi(&front.point(i))).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::dual_cone_from_flux;
    use crate::flux::{Flux, ShockPair};
    use crate::profile::make_planar;

    #[test]
    fn comparisons_differ_from_base_on_bounded_sets() {
        let pair = ShockPair::new(Flux::burgers(2), 1.0, -1.0).unwrap();
        let dual = dual_cone_from_flux(&pair, 4096).unwrap();
        let p = make_planar(&pair, &dual, &[1.0, 0.0], 0.0).unwrap();
        let grid = Grid::centered(vec![64, 128], 0.1).unwrap();
        let cmp = default_comparisons(&p, &grid).unwrap();
        assert_eq!(cmp.len(), 5);
        for (name, r) in &cmp {
            assert!(r.psi(&[-6.3]) == 0.0 && r.psi(&[6.3]) == 0.0, "{name}");
            assert!((-60..=60).any(|j| r.psi(&[j as f64 * 0.1]) != 0.0), "{name}");
        }
    }

    #[test]
    fn unperturbed_shock_is_its_own_limit() {
        let pair = ShockPair::new(Flux::burgers(2), 1.0, -1.0).unwrap();
        let dual = dual_cone_from_flux(&pair, 4096).unwrap();
        let p = make_planar(&pair, &dual, &[1.0, 0.0], 0.0).unwrap();
        let grid = Grid::centered(vec![32, 32], 0.2).unwrap();
        let params = StabilityParams {
            horizon: 2.0,
            snapshot_every: 1.0,
            ..StabilityParams::default()
        };
        let r = stability_experiment(&p, &PerturbationSpec::default(), &grid, &SchemeConfig::default_for(2), &params, None)
            .unwrap();
        assert!(r.verdict.all_pass(), "{}", r.verdict.to_text());
    }
}
