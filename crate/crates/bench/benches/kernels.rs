use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use mckit::cir::{cir_eval, CirModel, CircDuct, SphereRx};
use mckit::physics::SpacePoint;
use mckit::rng;
use mckit::rxsignal::{rmse_vs_binomial, CountKind};
use mckit::stochsim::*;

fn cir(c: &mut Criterion) {
    let sphere = CirModel::PassiveSphere(SphereRx { d0: 2e-7, a_rx: 5e-8, diffusion: 1e-11 });
    c.bench_function("cir_eval/passive_sphere", |b| b.iter(|| cir_eval(black_box(&sphere), black_box(6.7e-4))));

    let a_rx: f64 = 0.15e-6;
    let v_rx = 4.0 / 3.0 * PI * a_rx.powi(3);
    let duct = CirModel::CircDuct(CircDuct::new(6.0 * a_rx, [0.0, 0.0, -1.15e-6], [0.0; 3], 1e-10, v_rx, 1e-10, 64, 200));
    // Warm the cached root table so the series itself is measured.
    cir_eval(&duct, 1e-3).unwrap();
    c.bench_function("cir_eval/circ_duct", |b| b.iter(|| cir_eval(black_box(&duct), black_box(2.2e-3))));

    c.bench_function("rmse_vs_binomial/N=1e4", |b| {
        b.iter(|| rmse_vs_binomial(CountKind::Gaussian, black_box(10_000), black_box(0.01)))
    });
}

fn micro(c: &mut Criterion) {
    let (env, _) = build_dumbbell(DUMBBELL_PIPE, 1e-10).unwrap();
    let edge = 32e-6;
    let init = [InitGroup {
        species: 0,
        count: 500,
        placement: Placement::UniformBox { min: SpacePoint::ORIGIN, max: SpacePoint::new(edge, edge, edge) },
    }];
    let particles = place(&env, &init, &mut rng::stream(1, 0)).unwrap();
    c.bench_function("micro_step/dumbbell_500", |b| {
        let mut r = rng::stream(1, 1);
        b.iter_batched_ref(
            || MicroState::new(&env, particles.clone()),
            |state| micro_step(state, &env, 1e-3, &mut r).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn meso(c: &mut Criterion) {
    let grid = MesoGrid {
        dims: [41, 1, 1],
        edge: 1e-6,
        species: vec![Species { name: "A".into(), diffusion: 1e-10 }],
        reactions: vec![MesoReaction { kappa: 0.5, reactants: vec![0], products: vec![], subvolumes: None }],
    };
    let mut init = grid.empty_state();
    init.counts[0][20] = 1000;
    let probes = [MesoProbe { species: 0, subvolumes: vec![20] }];
    // About 2·10⁴ events per run.
    c.bench_function("meso_run/chain_41", |b| b.iter(|| meso_run(&grid, &init, &[0.1], &probes, 3, 0).unwrap()));
}

criterion_group!(benches, cir, micro, meso);
criterion_main!(benches);
