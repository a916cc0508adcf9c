use criterion::{criterion_group, criterion_main, Criterion};
use shocklab_bench::{burgers_pair, planar_profile, vee_profile};
use shocklab_core::cone::{admissible_cone, dual_cone_from_flux};
use shocklab_core::profile::extract_front;
use shocklab_core::Grid;

fn cones(c: &mut Criterion) {
    let pair2 = burgers_pair(2);
    let pair3 = burgers_pair(3);
    c.bench_function("admissible_cone_d2", |b| b.iter(|| admissible_cone(&pair2, 1e-4).expect("sector")));
    c.bench_function("dual_from_flux_d3", |b| b.iter(|| dual_cone_from_flux(&pair3, 4096).expect("sampled cone")));
}

fn fronts(c: &mut Criterion) {
    let grid = Grid::centered(vec![128, 256], 0.1).expect("positive counts");
    let planar = planar_profile();
    let vee = vee_profile();
    c.bench_function("cell_averages_vee", |b| b.iter(|| vee.cell_averages(&grid)));
    let field = planar.cell_averages(&grid);
    c.bench_function("extract_front_planar", |b| {
        b.iter(|| extract_front(&field, planar.pair(), planar.dual()).expect("front crosses"))
    });
}

criterion_group!(benches, cones, fronts);
criterion_main!(benches);
