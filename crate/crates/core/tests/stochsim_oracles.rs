//! Simulator checks against independent analytic oracles.

use mckit::physics::SpacePoint;
use mckit::rng;
use mckit::special::erf;
use mckit::stochsim::*;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn species(d: f64) -> Vec<Species> {
    vec![Species { name: "A".into(), diffusion: d }]
}

/// Upper-tail chi-square critical value at significance `alpha`.
fn chi2_critical(df: usize, alpha: f64) -> f64 {
    ChiSquared::new(df as f64).unwrap().inverse_cdf(1.0 - alpha)
}

/// Goodness of fit of observed counts to expected probabilities, pooling
/// adjacent bins until each expected count is at least 5.
fn chi2_gof(observed: &[f64], probs: &[f64], n: f64) -> (f64, usize) {
    let (mut chi, mut bins) = (0.0, 0usize);
    let (mut o, mut e) = (0.0, 0.0);
    for (ob, p) in observed.iter().zip(probs) {
        o += ob;
        e += p * n;
        if e >= 5.0 {
            chi += (o - e).powi(2) / e;
            bins += 1;
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 {
        chi += (o - e).powi(2) / e.max(1e-300);
        bins += 1;
    }
    (chi, bins.saturating_sub(1))
}

#[test]
fn half_life_reaction_fraction() {
    let mut env = Environment::unbounded(species(0.0));
    env.reactions = vec![FirstOrderReaction { reactant: 0, product: None, kappa: std::f64::consts::LN_2 }];
    let n = 1_000_000;
    let mut state = MicroState::new(&env, vec![Particle::new(0, SpacePoint::ORIGIN); n]);
    let mut r = rng::stream(11, 0);
    micro_step(&mut state, &env, 1.0, &mut r).unwrap();
    let frac = 1.0 - state.particles.len() as f64 / n as f64;
    assert!((frac - 0.5).abs() < 0.005, "fraction {frac}");
}

#[test]
fn reflective_plane_matches_image_solution() {
    let big = 1.0;
    let env = Environment {
        regions: vec![Region::Box { min: SpacePoint::new(0.0, -big, -big), max: SpacePoint::new(big, big, big) }],
        default_behavior: Some(Behavior::Reflective),
        species: species(1e-10),
        ..Default::default()
    };
    let x0 = 1e-6;
    let n = 20_000;
    let init = [InitGroup { species: 0, count: n, placement: Placement::Point { at: SpacePoint::new(x0, 0.0, 0.0) } }];
    let mut state = MicroState::new(&env, place(&env, &init, &mut rng::stream(1, 0)).unwrap());
    let mut r = rng::stream(1, 1);
    let (dt, steps) = (1e-5, 1000);
    for _ in 0..steps {
        micro_step(&mut state, &env, dt, &mut r).unwrap();
    }
    assert_eq!(state.particles.len(), n);
    assert!(state.particles.iter().all(|p| p.pos.x >= 0.0));
    // Image density on x >= 0: N(x; x0, s²) + N(x; −x0, s²).
    let s = (2.0 * 1e-10 * dt * steps as f64).sqrt();
    let cdf = |x: f64| {
        let phi = |m: f64| 0.5 * (1.0 + erf((x - m) / (s * std::f64::consts::SQRT_2)));
        phi(x0) + phi(-x0) - 1.0
    };
    let w = 0.25e-6;
    let nb = 24;
    let mut obs = vec![0.0; nb + 1];
    for p in &state.particles {
        obs[((p.pos.x / w) as usize).min(nb)] += 1.0;
    }
    let mut probs: Vec<f64> = (0..nb).map(|k| cdf((k + 1) as f64 * w) - cdf(k as f64 * w)).collect();
    probs.push(1.0 - cdf(nb as f64 * w));
    let (chi, df) = chi2_gof(&obs, &probs, n as f64);
    assert!(chi < chi2_critical(df, 1e-3), "chi2 {chi} df {df}");
}

#[test]
fn meso_chain_matches_discretized_gaussian() {
    let edge = 1e-6;
    let d = 1e-10;
    let grid = MesoGrid { dims: [101, 1, 1], edge, species: species(d), reactions: vec![] };
    let mut init = grid.empty_state();
    let n = 10_000u64;
    init.counts[0][50] = n;
    let s = 8.0 * edge;
    let t = s * s / (2.0 * d);
    let probes: Vec<MesoProbe> = (0..101).map(|m| MesoProbe { species: 0, subvolumes: vec![m] }).collect();
    let out = meso_run(&grid, &init, &[t], &probes, 21, 0).unwrap();
    let obs: Vec<f64> = out.values.iter().map(|v| v[0]).collect();
    assert_eq!(obs.iter().sum::<f64>(), n as f64);
    let cdf = |x: f64| 0.5 * (1.0 + erf(x / (s * std::f64::consts::SQRT_2)));
    let probs: Vec<f64> = (0..101)
        .map(|m| {
            let c = (m as f64 - 50.0) * edge;
            cdf(c + 0.5 * edge) - cdf(c - 0.5 * edge)
        })
        .collect();
    let (chi, df) = chi2_gof(&obs, &probs, n as f64);
    assert!(chi < chi2_critical(df, 1e-3), "chi2 {chi} df {df}");
}

#[test]
fn micro_and_meso_agree_in_reflective_box() {
    // Box 4 × 1 × 1 µm, molecules start uniformly in the first 1 µm slab.
    let d = 1e-10;
    let um = 1e-6;
    let n = 5000usize;
    let t: f64 = 0.02;
    let env = Environment {
        regions: vec![Region::Box { min: SpacePoint::ORIGIN, max: SpacePoint::new(4.0 * um, um, um) }],
        default_behavior: Some(Behavior::Reflective),
        species: species(d),
        ..Default::default()
    };
    let init = [InitGroup {
        species: 0,
        count: n,
        placement: Placement::UniformBox { min: SpacePoint::ORIGIN, max: SpacePoint::new(um, um, um) },
    }];
    let mut state = MicroState::new(&env, place(&env, &init, &mut rng::stream(5, 0)).unwrap());
    let mut r = rng::stream(5, 1);
    let dt: f64 = 2e-6;
    for _ in 0..(t / dt).round() as usize {
        micro_step(&mut state, &env, dt, &mut r).unwrap();
    }
    let mut micro = [0.0; 4];
    for p in &state.particles {
        micro[((p.pos.x / um) as usize).min(3)] += 1.0;
    }

    let edge = 0.25 * um;
    let grid = MesoGrid { dims: [16, 4, 4], edge, species: species(d), reactions: vec![] };
    let mut st = grid.empty_state();
    let mut r = rng::stream(6, 0);
    for _ in 0..n {
        let m = grid.index(r.random_range(0..4), r.random_range(0..4), r.random_range(0..4));
        st.counts[0][m] += 1;
    }
    let probes: Vec<MesoProbe> = (0..4)
        .map(|b| MesoProbe {
            species: 0,
            subvolumes: (4 * b..4 * b + 4).flat_map(|i| (0..4).flat_map(move |j| (0..4).map(move |k| (i * 4 + j) * 4 + k))).collect(),
        })
        .collect();
    let out = meso_run(&grid, &st, &[t], &probes, 6, 1).unwrap();
    let meso: Vec<f64> = out.values.iter().map(|v| v[0]).collect();

    // Two-sample homogeneity test on the four slabs.
    let mut chi = 0.0;
    for b in 0..4 {
        let pooled = (micro[b] + meso[b]) / 2.0;
        chi += (micro[b] - pooled).powi(2) / pooled + (meso[b] - pooled).powi(2) / pooled;
    }
    assert!(chi < chi2_critical(3, 1e-3), "chi2 {chi}: micro {micro:?} meso {meso:?}");
    // Both must have spread beyond the first slab.
    assert!(micro[0] < 0.6 * n as f64 && meso[0] < 0.6 * n as f64);
}

#[test]
fn transparent_sphere_free_space_matches_cir() {
    use mckit::cir::{cir_eval, CirModel, SphereRx};
    let (a, d0, d) = (50e-9, 200e-9, 1e-11);
    let mut env = Environment::unbounded(species(d));
    env.surfaces.clear();
    let n_tx = 500;
    let init = [InitGroup { species: 0, count: n_tx, placement: Placement::Point { at: SpacePoint::new(d0, 0.0, 0.0) } }];
    let probes = [Probe::TransparentSphere { center: SpacePoint::ORIGIN, radius: a, species: None }];
    let opts = MicroOptions { dt: 5e-4, t_end: 2.5e-3, sample_every: 1, stop_when_empty: true };
    let runs = rng::par_indexed(2000, |i| micro_run(&env, &init, &probes, &opts, 17, i).unwrap());
    let est = estimate_cir(&runs, 0, n_tx as f64).unwrap();
    let model = CirModel::PassiveSphere(SphereRx { d0, a_rx: a, diffusion: d });
    for j in 1..est.times.len() {
        let h = cir_eval(&model, est.times[j]).unwrap();
        assert!((est.mean[j] - h).abs() < 3.0 * est.se[j], "t={} mc {} ± {} vs {h}", est.times[j], est.mean[j], est.se[j]);
    }
}

#[test]
fn se_scales_with_realizations() {
    let env = Environment::unbounded(species(1e-11));
    let init = [InitGroup { species: 0, count: 200, placement: Placement::Point { at: SpacePoint::new(2e-7, 0.0, 0.0) } }];
    let probes = [Probe::TransparentSphere { center: SpacePoint::ORIGIN, radius: 1e-7, species: None }];
    let opts = MicroOptions { dt: 1e-3, t_end: 2e-3, sample_every: 1, stop_when_empty: true };
    let runs = rng::par_indexed(4000, |i| micro_run(&env, &init, &probes, &opts, 2, i).unwrap());
    let half = estimate_cir(&runs[..2000], 0, 200.0).unwrap();
    let full = estimate_cir(&runs, 0, 200.0).unwrap();
    let ratio = full.se[2] / half.se[2];
    assert!((ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.05, "ratio {ratio}");
    // Deterministic constant series: SE 0.
    let c = RealizationSeries { times: vec![0.0, 1.0], values: vec![vec![4.0, 4.0]], ..RealizationSeries::new(1) };
    let e = estimate_cir(&[c.clone(), c], 0, 2.0).unwrap();
    assert_eq!(e.mean, vec![2.0, 2.0]);
    assert_eq!(e.se, vec![0.0, 0.0]);
}
