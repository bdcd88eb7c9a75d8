//! Property-based invariants across modules.

use std::f64::consts::PI;
use std::sync::Arc;

use mckit::cir::{absorbed_fraction, bessel_j_prime, bessel_prime_roots, cir_eval, CirModel, PassiveUca, SphereRx};
use mckit::mobile::{rho_tau, MobileChannel};
use mckit::physics::{
    advected_concentration, degradation_decay, poiseuille_speed, reaction_advection_diffusion_concentration,
    PointSource, ReactionSpec, SpacePoint, UniDegradation,
};
use mckit::rxsignal::{count_pmf, deterministic_response, CountKind, CountModel, ReleasePattern};
use mckit::stochsim::*;
use proptest::prelude::*;

fn sp(d: f64) -> Vec<Species> {
    vec![Species { name: "A".into(), diffusion: d }]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cylindrical_round_trip(rho in 0.0..1e-3f64, phi in -PI..PI, z in -1e-3..1e-3f64) {
        let p = SpacePoint::from_cylindrical(rho, phi, z);
        prop_assert!(p.rho() >= 0.0);
        prop_assert!((p.rho() - rho).abs() <= 1e-12 * rho.max(1e-300));
        let back = SpacePoint::from_cylindrical(p.rho(), p.phi(), p.z);
        prop_assert!(back.distance(&p) <= 1e-12 * p.norm().max(1e-300));
    }

    #[test]
    fn concentrations_nonnegative_and_ordered(
        t in 1e-7..1e-2f64, x in -1e-6..1e-6f64, v in -1e-3..1e-3f64, kappa in 0.0..1e4f64,
    ) {
        let src = PointSource::new(1e4, SpacePoint::ORIGIN, 0.0);
        let at = SpacePoint::new(x, 0.5 * x, 0.0);
        let vel = SpacePoint::new(v, 0.0, 0.0);
        let c = advected_concentration(&src, 4.5e-10, vel, at, t).unwrap();
        let spec = ReactionSpec::UniDegradation(UniDegradation { kappa, order: 1 });
        let r = reaction_advection_diffusion_concentration(&src, 4.5e-10, vel, &spec, at, t).unwrap();
        prop_assert!(c.is_finite() && c >= 0.0);
        prop_assert!(r <= c && r >= 0.0);
        prop_assert!(advected_concentration(&src, 4.5e-10, vel, at, -t).is_err());
    }

    #[test]
    fn degradation_orders_bracket(kappa in 1e-3..1e3f64, dt in 0.0..10.0f64) {
        let c = |order| degradation_decay(1.0, UniDegradation { kappa, order }, dt).unwrap();
        prop_assert!(c(0) <= c(1) + 1e-15);
        prop_assert!(c(1) <= c(2) + 1e-15);
    }

    #[test]
    fn poiseuille_within_bounds(v0 in 0.0..1e-2f64, a_c in 1e-6..1e-3f64, f in 0.0..=1.0f64) {
        let s = poiseuille_speed(v0, a_c, f * a_c);
        prop_assert!((0.0..=v0).contains(&s));
    }

    #[test]
    fn sphere_cirs_are_probabilities(ratio in 0.02..0.9f64, t in 1e-6..1.0f64) {
        let d0 = 2e-7;
        let s = SphereRx { d0, a_rx: ratio * d0, diffusion: 1e-11 };
        let h = cir_eval(&CirModel::PassiveSphere(s), t).unwrap();
        prop_assert!((0.0..=1.0).contains(&h));
        let g = absorbed_fraction(&CirModel::AbsorbingSphere(s), t).unwrap();
        let g2 = absorbed_fraction(&CirModel::AbsorbingSphere(s), 2.0 * t).unwrap();
        prop_assert!(0.0 <= g && g <= g2 && g2 <= ratio + 1e-12);
        let u = cir_eval(&CirModel::PassiveUca(PassiveUca { d0, diffusion: 1e-11, v_rx: 4.0 / 3.0 * PI * (ratio * d0).powi(3) }), t).unwrap();
        prop_assert!((0.0..=1.0).contains(&u));
    }

    #[test]
    fn still_uniform_flow_is_uca(d0 in 1e-7..1e-5f64, t in 1e-5..1.0f64) {
        let (diffusion, v_rx) = (1e-10, 1e-21);
        let flow = CirModel::UniformFlow { d0, diffusion, v_rx, v_par: 0.0, v_perp: 0.0 };
        let uca = CirModel::PassiveUca(PassiveUca { d0, diffusion, v_rx });
        prop_assert_eq!(cir_eval(&flow, t).unwrap(), cir_eval(&uca, t).unwrap());
    }

    #[test]
    fn bessel_roots_sorted_and_accurate(n in 0u32..20, a_c in 1e-7..1e-4f64) {
        let roots = bessel_prime_roots(n, a_c, 12).unwrap();
        prop_assert!(roots.windows(2).all(|w| w[1] > w[0]));
        for r in roots {
            prop_assert!(bessel_j_prime(n as i32, r * a_c).abs() < 1e-12);
        }
    }

    #[test]
    fn binomial_pmf_normalized(n in 1u64..2000, h in 1e-4..0.9999f64) {
        let m = CountModel::new(CountKind::Binomial, n, h).unwrap();
        let p: Vec<f64> = (0..=n).map(|k| count_pmf(&m, k as f64).unwrap()).collect();
        let total: f64 = p.iter().sum();
        let mean: f64 = p.iter().enumerate().map(|(k, q)| k as f64 * q).sum();
        let var: f64 = p.iter().enumerate().map(|(k, q)| (k as f64 - mean).powi(2) * q).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!((mean - n as f64 * h).abs() < 1e-10 * (n as f64).max(1.0));
        prop_assert!((var - n as f64 * h * (1.0 - h)).abs() < 1e-9 * (n as f64).max(1.0));
    }

    #[test]
    fn pulse_response_linear_in_rate(scale in 0.1..10.0f64, t in 1e-4..5e-3f64) {
        let h = |s: f64| if s <= 0.0 { 0.0 } else { (-s / 1e-3).exp() * s };
        let base = ReleasePattern::Pulse { g: Arc::new(|s| 1.0 + s * 1e3), t_rls: 2e-3 };
        let scaled = ReleasePattern::Pulse { g: Arc::new(move |s| scale * (1.0 + s * 1e3)), t_rls: 2e-3 };
        let a = deterministic_response(&base, h, t).unwrap();
        let b = deterministic_response(&scaled, h, t).unwrap();
        prop_assert!((b - scale * a).abs() <= 1e-9 * (scale * a).abs());
    }

    #[test]
    fn rho_tau_bounded(ratio in 1e-3..1.0f64, tau1 in 1e-5..1e-1f64, lag in 1e-7..1.0f64, tf in 0.2..5.0f64) {
        let ch = MobileChannel {
            diffusion: 1e-11, d_tx: ratio * 1e-11, d_rx: ratio * 1e-11, d0: 2e-7,
            v_rx: 4.0 / 3.0 * PI * (5e-8f64).powi(3), n_tx: 2000.0,
        };
        let r = rho_tau(&ch, tf * ch.peak_time(), tau1, tau1 + lag).unwrap();
        prop_assert!((-1.0..=1.0).contains(&r), "rho {}", r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn micro_conserves_in_reflective_box(seed in any::<u64>(), d in 1e-11..1e-9f64) {
        let um = 1e-6;
        let env = Environment {
            regions: vec![Region::Box { min: SpacePoint::ORIGIN, max: SpacePoint::new(2.0 * um, um, um) }],
            default_behavior: Some(Behavior::Reflective),
            species: sp(d),
            ..Default::default()
        };
        let init = [InitGroup { species: 0, count: 200, placement: Placement::UniformBox { min: SpacePoint::ORIGIN, max: SpacePoint::new(um, um, um) } }];
        let probes = [Probe::TransparentSphere { center: SpacePoint::new(um, 0.5 * um, 0.5 * um), radius: 0.3 * um, species: None }];
        let opts = MicroOptions { dt: 1e-4, t_end: 2e-2, sample_every: 10, stop_when_empty: true };
        let mut state = MicroState::new(&env, place(&env, &init, &mut mckit::rng::stream(seed, 0)).unwrap());
        let mut r = mckit::rng::stream(seed, 1);
        for step in 1..=50u64 {
            micro_step(&mut state, &env, 1e-4, &mut r).unwrap();
            prop_assert_eq!(state.particles.len(), 200);
            prop_assert!(state.particles.iter().all(|p| env.contains(&p.pos)));
            prop_assert_eq!(state.t, step as f64 * 1e-4);
        }
        let a = micro_run(&env, &init, &probes, &opts, seed, 0).unwrap();
        let b = micro_run(&env, &init, &probes, &opts, seed, 0).unwrap();
        prop_assert_eq!(&a.values, &b.values);
        prop_assert_eq!(&a.arrivals, &b.arrivals);
        let arr = &a.arrivals[0];
        let dep = &a.departures[0];
        prop_assert!(arr.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(dep.windows(2).all(|w| w[0] <= w[1]));
        for &t in &a.times {
            let n_arv = arr.iter().filter(|&&x| x <= t).count();
            let n_dpr = dep.iter().filter(|&&x| x <= t).count();
            prop_assert!(n_dpr <= n_arv);
        }
    }

    #[test]
    fn absorbing_probe_is_monotone(seed in any::<u64>()) {
        let (env, surface) = build_dumbbell(5e-6, 1e-9).unwrap();
        let init = [InitGroup { species: 0, count: 50, placement: Placement::UniformBox { min: SpacePoint::new(30e-6, 0.0, 0.0), max: SpacePoint::new(32e-6, 32e-6, 32e-6) } }];
        let probes = [Probe::AbsorbingSurface { surface }];
        let opts = MicroOptions { dt: 1e-3, t_end: 2.0, sample_every: 50, stop_when_empty: true };
        let s = micro_run(&env, &init, &probes, &opts, seed, 0).unwrap();
        prop_assert!(s.values[0].windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(s.arrivals[0].windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(s.arrivals[0].len() as f64, *s.values[0].last().unwrap());
        prop_assert!(s.values[0].iter().all(|&v| v <= 50.0));
    }

    #[test]
    fn meso_conserves_without_reactions(seed in any::<u64>(), nx in 1usize..6, ny in 1usize..4, count in 0u64..300) {
        let grid = MesoGrid { dims: [nx, ny, 2], edge: 1e-6, species: sp(1e-10), reactions: vec![] };
        let mut init = grid.empty_state();
        init.counts[0][0] = count;
        let all: Vec<usize> = (0..grid.len()).collect();
        let probes = [MesoProbe { species: 0, subvolumes: all }];
        let out = meso_run(&grid, &init, &[0.0, 0.01, 0.05, 0.2], &probes, seed, 0).unwrap();
        prop_assert!(out.values[0].iter().all(|&v| v == count as f64));
        let again = meso_run(&grid, &init, &[0.0, 0.01, 0.05, 0.2], &probes, seed, 0).unwrap();
        prop_assert_eq!(out.values, again.values);
    }

    #[test]
    fn meso_adjacency_symmetric(nx in 1usize..6, ny in 1usize..6, nz in 1usize..6) {
        let grid = MesoGrid { dims: [nx, ny, nz], edge: 2e-6, species: sp(1e-10), reactions: vec![] };
        prop_assert!((grid.volume() - 8e-18).abs() < 1e-30);
        for m in 0..grid.len() {
            for q in 0..6 {
                if let Some(n) = grid.neighbor(m, q) {
                    prop_assert_eq!(grid.neighbor(n, q ^ 1), Some(m));
                }
            }
        }
    }

    #[test]
    fn meso_counts_stay_nonnegative_with_reactions(seed in any::<u64>(), kappa in 0.1..20.0f64) {
        let grid = MesoGrid {
            dims: [3, 1, 1],
            edge: 1e-6,
            species: vec![Species { name: "A".into(), diffusion: 1e-10 }, Species { name: "B".into(), diffusion: 5e-11 }],
            reactions: vec![
                MesoReaction { kappa, reactants: vec![0], products: vec![1], subvolumes: None },
                MesoReaction { kappa: kappa * 1e-18, reactants: vec![0, 1], products: vec![], subvolumes: None },
            ],
        };
        let mut state = grid.empty_state();
        state.counts[0][1] = 200;
        let probes = [MesoProbe { species: 0, subvolumes: vec![0, 1, 2] }, MesoProbe { species: 1, subvolumes: vec![0, 1, 2] }];
        let mut r = mckit::rng::stream(seed, 0);
        let out = meso_run_from(&grid, &mut state, &[0.05, 0.1, 0.5], &probes, &mut r).unwrap();
        prop_assert!(out.values.iter().flatten().all(|&v| v >= 0.0));
        for j in 0..3 {
            prop_assert!(out.values[0][j] + out.values[1][j] <= 200.0);
        }
    }
}
