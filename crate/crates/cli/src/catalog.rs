//! Built-in named scenarios.

use std::f64::consts::PI;

use mckit::cir::{
    ArisTaylorMode, CirModel, CircDuct, DispersionDuct, FlowDominantDuct, PassiveUca, Release, SphereRx,
};
use mckit::physics::SpacePoint;
use mckit::stochsim::{MesoGrid, MesoProbe, MesoReaction, Species};

use crate::config::*;

pub struct Entry {
    pub name: &'static str,
    pub description: &'static str,
    pub scenario: Scenario,
}

fn grid(t_start: f64, t_end: f64, points: usize, spacing: Spacing) -> Option<TimeGrid> {
    Some(TimeGrid { t_start, t_end, points, spacing })
}

fn x(d: f64) -> SpacePoint {
    SpacePoint::new(d, 0.0, 0.0)
}

fn scenario(name: &str, kind: Kind, time: Option<TimeGrid>, realizations: usize, params: Params) -> Scenario {
    Scenario { name: name.into(), kind, seed: 1, realizations, time, params }
}

fn concentration_fig(name: &str, curves: Vec<ConcentrationCurve>) -> Scenario {
    scenario(
        name,
        Kind::Concentration,
        grid(1e-6, 3e-4, 300, Spacing::Linear),
        1,
        Params::Concentration(ConcentrationParams { n: 1e4, diffusion: 4.5e-10, source: SpacePoint::ORIGIN, curves }),
    )
}

fn curve(label: &str, at: f64, v: f64, kappa: f64) -> ConcentrationCurve {
    ConcentrationCurve { label: label.into(), at: x(at), velocity: x(v), kappa }
}

fn fig_dispersion() -> Scenario {
    let (d, a_c, d_z, l_z) = (1e-11, 10e-6, 50e-6, 1e-6);
    let dispersive = |v0: f64| CirModel::DispersionDuct(DispersionDuct {
        a_c,
        v_eff: 0.5 * v0,
        diffusion: d,
        d_z,
        l_rho: a_c,
        l_phi: 2.0 * PI,
        l_z,
        uca: false,
        mode: ArisTaylorMode::Classic,
    });
    let curves = vec![
        CirCurve {
            label: "flow_dominant_v0_1e-2".into(),
            model: CirModel::FlowDominantDuct(FlowDominantDuct {
                a_c,
                v_eff: 0.5e-2,
                d_z,
                l_rho: a_c,
                l_phi: 2.0 * PI,
                l_z,
                release: Release::Uniform,
            }),
            quantity: CirQuantity::Cir,
        },
        CirCurve { label: "dispersion_v0_1e-3".into(), model: dispersive(1e-3), quantity: CirQuantity::Cir },
        CirCurve { label: "dispersion_v0_1e-4".into(), model: dispersive(1e-4), quantity: CirQuantity::Cir },
    ];
    scenario("fig-dispersion", Kind::Cir, grid(1e-3, 1e2, 400, Spacing::Log), 1, Params::Cir(CirParams { curves }))
}

fn fig_duct() -> Scenario {
    let (a_rx, d0, d) = (0.15e-6, 1.15e-6, 1e-10);
    let v_rx = 4.0 / 3.0 * PI * a_rx * a_rx * a_rx;
    let mut curves = vec![CirCurve {
        label: "unbounded".into(),
        model: CirModel::PassiveUca(PassiveUca { d0, diffusion: d, v_rx }),
        quantity: CirQuantity::Cir,
    }];
    for k in [5u32, 6, 9, 12] {
        curves.push(CirCurve {
            label: format!("duct_{k}a_rx"),
            model: CirModel::CircDuct(CircDuct::new(
                k as f64 * a_rx,
                [0.0, 0.0, -d0],
                [0.0, 0.0, 0.0],
                d,
                v_rx,
                mckit::cir::duct::default_series_tol(),
                mckit::cir::duct::default_max_n(),
                mckit::cir::duct::default_max_roots(),
            )),
            quantity: CirQuantity::Cir,
        });
    }
    scenario("fig-duct-vs-unbounded", Kind::Cir, grid(1e-4, 3e-2, 200, Spacing::Log), 1, Params::Cir(CirParams { curves }))
}

fn dumbbell() -> Scenario {
    scenario(
        "dumbbell",
        Kind::SimulateMicro,
        None,
        4,
        Params::SimulateMicro(MicroParams {
            environment: EnvConfig::Dumbbell {
                pipe_length: mckit::stochsim::DUMBBELL_PIPE,
                diffusion: 1e-10,
                molecules: 500,
            },
            init: Vec::new(),
            probes: Vec::new(),
            dt: 1e-3,
            t_end: 1000.0,
            sample_every: 1000,
            n_tx: None,
        }),
    )
}

fn meso_chain() -> Scenario {
    let n = 41;
    let grid_ = MesoGrid {
        dims: [n, 1, 1],
        edge: 1e-6,
        species: vec![Species { name: "A".into(), diffusion: 1e-10 }],
        reactions: vec![MesoReaction { kappa: 0.5, reactants: vec![0], products: vec![], subvolumes: None }],
    };
    scenario(
        "meso-chain",
        Kind::SimulateMeso,
        grid(0.0, 2.0, 41, Spacing::Linear),
        50,
        Params::SimulateMeso(MesoParams {
            grid: grid_,
            init: vec![MesoInit { species: 0, subvolume: n / 2, count: 1000 }],
            probes: vec![
                MesoProbe { species: 0, subvolumes: vec![n / 2] },
                MesoProbe { species: 0, subvolumes: (0..n).collect() },
            ],
            n_tx: None,
        }),
    )
}

fn isi_example() -> Scenario {
    let base = CirModel::PassiveSphere(SphereRx { d0: 2e-7, a_rx: 5e-8, diffusion: 1e-10 });
    scenario(
        "isi-example",
        Kind::Isi,
        None,
        3,
        Params::Isi(IsiParams {
            model: CirModel::Degraded { base: Box::new(base), kappa: 2e3 },
            n_tx: 2000.0,
            t_symb: 2e-4,
            samples_per_symbol: 10,
            memory: 5,
            r_int: 2.0,
            symbols: vec![1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0],
            noise: mckit::rxsignal::NoiseModel::Poisson,
        }),
    )
}

/// Every built-in scenario.
pub fn catalog() -> Vec<Entry> {
    vec![
        Entry {
            name: "fig-diffusion",
            description: "free-space concentration at 300, 400 and 500 nm from a point release",
            scenario: concentration_fig(
                "fig-diffusion",
                vec![curve("300nm", 300e-9, 0.0, 0.0), curve("400nm", 400e-9, 0.0, 0.0), curve("500nm", 500e-9, 0.0, 0.0)],
            ),
        },
        Entry {
            name: "fig-advection",
            description: "concentration at 400 nm under uniform flow of 0, 2 and 5 mm/s",
            scenario: concentration_fig(
                "fig-advection",
                vec![curve("v0", 400e-9, 0.0, 0.0), curve("v2e-3", 400e-9, 2e-3, 0.0), curve("v5e-3", 400e-9, 5e-3, 0.0)],
            ),
        },
        Entry {
            name: "fig-reaction",
            description: "concentration at 400 nm with 1 mm/s flow and degradation rates 0, 1e4, 2e4 1/s",
            scenario: concentration_fig(
                "fig-reaction",
                vec![
                    curve("k0", 400e-9, 1e-3, 0.0),
                    curve("k1e4", 400e-9, 1e-3, 1e4),
                    curve("k2e4", 400e-9, 1e-3, 2e4),
                ],
            ),
        },
        Entry {
            name: "fig-dispersion",
            description: "duct CIRs in the flow-dominant and dispersive regimes",
            scenario: fig_dispersion(),
        },
        Entry {
            name: "fig-rmse",
            description: "CDF RMSE of the Gaussian and Poisson approximations against the Binomial",
            scenario: scenario(
                "fig-rmse",
                Kind::Rmse,
                None,
                1,
                Params::Rmse(RmseParams { n_tx: vec![100, 1000, 10_000, 100_000], h_min: 1e-3, h_max: 0.5, points: 30 }),
            ),
        },
        Entry {
            name: "fig-duct-vs-unbounded",
            description: "circular-duct CIR for growing duct radius against the unbounded CIR",
            scenario: fig_duct(),
        },
        Entry {
            name: "fig-rho-t",
            description: "Monte Carlo correlation of counts at the peak time and a later time",
            scenario: scenario(
                "fig-rho-t",
                Kind::Correlation,
                grid(0.0, 5e-4, 11, Spacing::Linear),
                1000,
                Params::Correlation(CorrelationParams {
                    n_tx: 2000,
                    d0: 2e-7,
                    a_rx: 5e-8,
                    diffusions: vec![1e-11, 5e-11, 1e-10],
                    t1: None,
                }),
            ),
        },
        Entry {
            name: "fig-rho-tau",
            description: "release-time correlation for mobile transceivers, analytic and Monte Carlo",
            scenario: scenario(
                "fig-rho-tau",
                Kind::Mobile,
                grid(1e-5, 1.0, 26, Spacing::Log),
                20_000,
                Params::Mobile(MobileParams {
                    diffusion: 1e-11,
                    d0: 2e-7,
                    a_rx: 5e-8,
                    n_tx: 2000.0,
                    ratios: vec![0.01, 0.05, 0.1],
                    tau1: 1e-3,
                    t: None,
                    monte_carlo: true,
                }),
            ),
        },
        Entry {
            name: "dumbbell",
            description: "particle simulation of two chambers joined by a 60 um pipe; absorbed fraction",
            scenario: dumbbell(),
        },
        Entry {
            name: "meso-chain",
            description: "subvolume simulation of diffusion with decay along a 1D chain",
            scenario: meso_chain(),
        },
        Entry {
            name: "isi-example",
            description: "sampled counts for an on-off symbol sequence with degradation",
            scenario: isi_example(),
        },
    ]
}

pub fn find(name: &str) -> Option<Scenario> {
    catalog().into_iter().find(|e| e.name == name).map(|e| e.scenario)
}
