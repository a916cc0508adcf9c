//! Fixtures shared by the benchmarks.

use shocklab_core::cone::dual_cone_from_flux;
use shocklab_core::experiments::steady_boundary;
use shocklab_core::profile::{make_graph, make_planar, BumpShape};
use shocklab_core::{Boundary, Field, Flux, Front, Grid, PerturbationSpec, SchemeConfig, ShockPair, ShockProfile, Solver};

pub fn burgers_pair(d: usize) -> ShockPair {
    ShockPair::new(Flux::burgers(d), 1.0, -1.0).expect("u- > u+")
}

pub fn planar_profile() -> ShockProfile {
    let pair = burgers_pair(2);
    let dual = dual_cone_from_flux(&pair, 4096).expect("d = 2");
    make_planar(&pair, &dual, &[1.0, 0.0], 0.0).expect("normal inside the dual cone")
}

pub fn vee_profile() -> ShockProfile {
    let pair = burgers_pair(2);
    let dual = dual_cone_from_flux(&pair, 4096).expect("d = 2");
    make_graph(&pair, &dual, Front::AbsScaled { slope: 0.5 }).expect("slope inside the cone")
}

/// A perturbed planar shock on an `n x 2n` grid with its solver and boundary.
pub struct StepFixture {
    pub solver: Solver,
    pub field: Field,
    pub boundary: Boundary,
}

pub fn step_fixture(n: usize) -> StepFixture {
    let profile = planar_profile();
    let grid = Grid::centered(vec![n, 2 * n], 12.8 / n as f64).expect("positive counts");
    let phi = PerturbationSpec::single(BumpShape::Cosine, vec![-2.5, -4.0], 1.5, -0.5);
    let field = Field::from_fn(&grid, |x| profile.eval(x) + phi.eval(x));
    let scheme = SchemeConfig::default_for(2);
    let solver = Solver::new(profile.pair().reduced().clone(), &scheme, (-1.0, 1.0)).expect("valid scheme");
    StepFixture {
        solver,
        field,
        boundary: steady_boundary(&profile),
    }
}
