use proptest::prelude::*;

use shocklab_core::cone::{admissible_cone, angular_hausdorff, dual_cone, dual_cone_from_flux};
use shocklab_core::experiments::{predicted_absorption_time, support_hull};
use shocklab_core::flux::{Flux, OleinikOptions, ShockPair};
use shocklab_core::grid::{l1_distance, Field, Grid};
use shocklab_core::io::{decode_snapshot, encode_snapshot, parse_config, FluxSpec, FrontSpec, RunConfig};
use shocklab_core::profile::{front_surgery, make_graph, make_planar, Aabb, BumpShape, Front, Pwl};
use shocklab_core::solver::{Boundary, SchemeConfig, Solver};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// End states `u- > u+` for Burgers with a jump of at least 0.2.
fn burgers_states() -> impl Strategy<Value = (f64, f64)> {
    (-1.5f64..1.5, 0.2f64..2.0).prop_map(|(up, jump)| (up + jump, up))
}

fn field_on(grid: &Grid, values: Vec<f64>) -> Field {
    Field::new(grid.clone(), values).unwrap()
}

fn small_grid() -> Grid {
    Grid::centered(vec![12, 12], 0.1).unwrap()
}

fn pwl_front() -> impl Strategy<Value = Pwl> {
    (-1.0f64..1.0, prop::collection::vec(-0.8f64..0.8, 16)).prop_map(|(v0, slopes)| {
        let step = 0.5;
        let mut v = v0;
        let mut values = vec![v];
        for s in slopes {
            v += step * s;
            values.push(v);
        }
        Pwl::new(vec![-4.0], step, vec![17], values).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reduced_flux_levels_end_states(
        coeffs in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 4), 2),
        (um, up) in burgers_states(),
    ) {
        let Ok(flux) = Flux::from_coeffs(coeffs) else { return Ok(()) };
        let pair = ShockPair::new(flux, um, up).unwrap();
        let a = pair.reduced().eval(um, 0);
        let b = pair.reduced().eval(up, 0);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs().max(y.abs())));
        }
    }

    #[test]
    fn oleinik_is_homogeneous_and_convex(
        (um, up) in burgers_states(),
        t1 in -3.2f64..3.2,
        t2 in -3.2f64..3.2,
        c in 0.1f64..10.0,
    ) {
        let pair = ShockPair::new(Flux::burgers(2), um, up).unwrap();
        let opts = OleinikOptions::default();
        let (x1, x2) = ([t1.cos(), t1.sin()], [t2.cos(), t2.sin()]);
        let a1 = pair.oleinik(&x1, &opts);
        let scaled = pair.oleinik(&[c * x1[0], c * x1[1]], &opts);
        prop_assert_eq!(a1.admissible, scaled.admissible);
        let a2 = pair.oleinik(&x2, &opts);
        if a1.admissible && a2.admissible {
            prop_assert!(pair.oleinik(&[x1[0] + x2[0], x1[1] + x2[1]], &opts).admissible);
        }
        if a1.admissible {
            let tol = 1e-9 * pair.scale();
            prop_assert!(a1.lax_margins.0 >= -tol && a1.lax_margins.1 >= -tol);
        }
    }

    #[test]
    fn dual_cone_is_dual((um, up) in burgers_states()) {
        let pair = ShockPair::new(Flux::burgers(2), um, up).unwrap();
        let cone = admissible_cone(&pair, 1e-4).unwrap();
        prop_assume!(cone.has_interior());
        let dual = dual_cone(&cone).unwrap();
        for n in dual.dual_rays() {
            for xi in cone.extreme_rays() {
                prop_assert!(dot(n, &xi) >= -1e-9);
            }
        }
        let other = dual_cone_from_flux(&pair, 4096).unwrap();
        prop_assert!(angular_hausdorff(&dual, &other) <= 2e-4 + 1e-9);
    }

    #[test]
    fn gauge_is_homogeneous_and_subadditive(
        (um, up) in burgers_states(),
        y1 in -5.0f64..5.0,
        y2 in -5.0f64..5.0,
    ) {
        let pair = ShockPair::new(Flux::burgers(2), um, up).unwrap();
        let dual = dual_cone_from_flux(&pair, 4096).unwrap();
        prop_assume!(dual.primal_interior());
        let g = |y: f64| dual.gauge(&[y]);
        prop_assert!((g(2.0 * y1) - 2.0 * g(y1)).abs() <= 1e-12 * (1.0 + g(y1).abs()));
        prop_assert!(g(y1 + y2) <= g(y1) + g(y2) + 1e-12);
        prop_assert!(g(y1) <= dual.gauge_lipschitz() * y1.abs() + 1e-12);
    }

    #[test]
    fn step_contracts_orders_and_conserves(
        a in prop::collection::vec(-1.0f64..1.0, 144),
        gap in prop::collection::vec(0.0f64..0.6, 144),
        boundary_value in -1.0f64..1.0,
    ) {
        let grid = small_grid();
        let b: Vec<f64> = a.iter().zip(&gap).map(|(x, g)| (x + g).min(1.0)).collect();
        let (a, b) = (field_on(&grid, a), field_on(&grid, b));
        let solver = Solver::new(Flux::burgers(2), &SchemeConfig::default_for(2), (-1.0, 1.0)).unwrap();
        let bc = Boundary::Constant(boundary_value);
        let sa = solver.step(&a, 0.0, &bc).unwrap();
        let sb = solver.advance(&b, sa.dt, 0.0, &bc).unwrap();
        let n = grid.len() as f64;
        prop_assert!(l1_distance(&sa.field, &sb.field).unwrap() <= l1_distance(&a, &b).unwrap() + 1e-12 * n);
        prop_assert!(sa.field.max_excess_over(&sb.field).unwrap() <= 1e-14);
        let (lo, hi) = (a.min().min(boundary_value), a.max().max(boundary_value));
        prop_assert!(sa.field.min() >= lo - 1e-14 && sa.field.max() <= hi + 1e-14);
        let balance = sa.field.mass() - a.mass() + sa.outflux;
        prop_assert!(balance.abs() <= 1e-12 * a.l1_norm().max(1.0));
    }

    #[test]
    fn l1_triangle_inequality(
        a in prop::collection::vec(-1.0f64..1.0, 144),
        b in prop::collection::vec(-1.0f64..1.0, 144),
        c in prop::collection::vec(-1.0f64..1.0, 144),
    ) {
        let grid = small_grid();
        let (a, b, c) = (field_on(&grid, a), field_on(&grid, b), field_on(&grid, c));
        let ab = l1_distance(&a, &b).unwrap();
        prop_assert!(ab <= l1_distance(&a, &c).unwrap() + l1_distance(&c, &b).unwrap() + 1e-14);
        prop_assert_eq!(ab, l1_distance(&b, &a).unwrap());
    }

    #[test]
    fn profiles_are_two_valued_with_cone_property(
        slope in 0.0f64..0.8,
        x in prop::collection::vec(-4.0f64..4.0, 2),
        z in prop::collection::vec(-3.0f64..3.0, 2),
        s in 0.0f64..2.0,
    ) {
        let pair = ShockPair::new(Flux::burgers(2), 1.0, -1.0).unwrap();
        let dual = dual_cone_from_flux(&pair, 4096).unwrap();
        let p = make_graph(&pair, &dual, Front::AbsScaled { slope }).unwrap();
        let u = p.eval(&x);
        prop_assert!(u == 1.0 || u == -1.0);
        let w = dual.w();
        if dual.contains(&z, 0.0) {
            let xz = [x[0] + z[0], x[1] + z[1]];
            let xmz = [x[0] - z[0], x[1] - z[1]];
            if u == -1.0 {
                prop_assert_eq!(p.eval(&xz), -1.0);
            } else {
                prop_assert_eq!(p.eval(&xmz), 1.0);
            }
        }
        // D- shifted along W grows: x in D- implies x + sW in D- + s'W for s < s'
        if p.eval(&[x[0] - s * w[0], x[1] - s * w[1]]) == 1.0 {
            let s2 = s + 0.5;
            prop_assert_eq!(p.eval(&[x[0] - s2 * w[0], x[1] - s2 * w[1]]), 1.0);
        }
    }

    #[test]
    fn surgery_identity(b in pwl_front(), h in pwl_front(), k in pwl_front(), y in -4.0f64..4.0) {
        let pair = ShockPair::new(Flux::burgers(2), 1.0, -1.0).unwrap();
        let dual = dual_cone_from_flux(&pair, 4096).unwrap();
        let mk = |p: Pwl| make_graph(&pair, &dual, Front::Sampled(p)).unwrap();
        let (b, h, k) = (mk(b), mk(h), mk(k));
        let (h_hat, k_hat) = front_surgery(&b, &h, &k).unwrap();
        prop_assert_eq!(k_hat.psi(&[y]) - h_hat.psi(&[y]), (k.psi(&[y]) - h.psi(&[y])).max(0.0));
    }

    #[test]
    fn snapshot_round_trip(values in prop::collection::vec(prop::num::f64::NORMAL, 256), t in 0.0f64..100.0) {
        let grid = Grid::centered(vec![16, 16], 0.125).unwrap();
        let f = field_on(&grid, values);
        let (g, t2) = decode_snapshot(&encode_snapshot(&f, t)).unwrap();
        prop_assert_eq!(t2.to_bits(), t.to_bits());
        prop_assert_eq!(g.grid(), f.grid());
        prop_assert!(g.values().iter().zip(f.values()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn config_round_trip(
        (um, up) in burgers_states(),
        dx in 0.01f64..1.0,
        nx in 4usize..300,
        ny in 4usize..300,
        slope in 0.0f64..0.9,
        horizon in 0.1f64..100.0,
        seed in any::<u64>(),
        abs_front in any::<bool>(),
        poly in any::<bool>(),
    ) {
        let mut c = RunConfig { u_minus: um, u_plus: up, seed, ..RunConfig::default() };
        c.grid.counts = vec![nx, ny];
        c.grid.dx = dx;
        c.experiment.horizon = horizon;
        if abs_front {
            c.front = FrontSpec::AbsScaled { slope };
        }
        if poly {
            c.flux = FluxSpec::Poly(vec![vec![0.0, 0.0, 1.0], vec![0.0, slope, 0.0, 1.0]]);
        }
        let back = parse_config(&c.to_text()).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.to_text(), c.to_text());
    }

    #[test]
    fn support_hull_contains_mid_speed_and_chord(lo in -2.0f64..2.0, width in 0.0f64..2.0) {
        let flux = Flux::burgers(2);
        let hi = lo + width;
        let h = support_hull(&flux, (lo, hi), 64);
        prop_assert!(h.contains(&flux.eval(0.5 * (lo + hi), 1), 1e-9));
        if width > 0.0 {
            let (a, b) = (flux.eval(lo, 0), flux.eval(hi, 0));
            let chord = [(b[0] - a[0]) / width, (b[1] - a[1]) / width];
            prop_assert!(h.contains(&chord, 1e-9));
        }
    }
}

#[test]
fn absorption_time_shrinks_with_overhead() {
    let pair = ShockPair::new(Flux::burgers(2), 1.0, -1.0).unwrap();
    let dual = dual_cone_from_flux(&pair, 4096).unwrap();
    let p = make_planar(&pair, &dual, &[1.0, 0.0], 0.0).unwrap();
    let k = Aabb::new(vec![-4.0, -1.0], vec![-2.0, 1.0]);
    let times: Vec<f64> = [0.01, 0.02, 0.04, 0.08, 0.12]
        .iter()
        .map(|&eta| predicted_absorption_time(&p, &k, eta, Some(0.1)).unwrap().t_star)
        .collect();
    assert!(times.windows(2).all(|w| w[0] <= w[1]), "{times:?}");
    assert!(times.iter().all(|t| t.is_finite() && *t > 0.0));
}

#[test]
fn step_is_independent_of_worker_count() {
    let grid = Grid::centered(vec![64, 64], 0.05).unwrap();
    let f = Field::from_fn(&grid, |x| (3.0 * x[0]).sin() * (2.0 * x[1]).cos());
    let solver = Solver::new(Flux::burgers(2), &SchemeConfig::default_for(2), (-1.0, 1.0)).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let mut u = f.clone();
            let mut t = 0.0;
            for _ in 0..20 {
                let s = solver.step(&u, t, &Boundary::Outflow).unwrap();
                t += s.dt;
                u = s.field;
            }
            u
        })
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a.mass().to_bits(), b.mass().to_bits());
    assert!(a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn bump_support_is_a_box() {
    let b = shocklab_core::profile::PerturbationSpec::single(BumpShape::Indicator, vec![1.0, -1.0], 0.5, 0.3);
    let s = b.support(2);
    assert_eq!(s.lo, vec![0.5, -1.5]);
    assert_eq!(s.hi, vec![1.5, -0.5]);
}
