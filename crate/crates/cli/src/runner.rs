//! Executes scenarios and assembles their CSV tables.

use std::f64::consts::PI;
use std::io::BufReader;

use mckit::cir::{absorbed_fraction, cir_eval};
use mckit::mobile::{mobile_mc, mobile_mean, rho_tau, MobileChannel};
use mckit::physics::{
    point_source_concentration, reaction_advection_diffusion_concentration, PointSource, ReactionSpec,
    SpacePoint, UniDegradation,
};
use mckit::rng::{par_indexed, stream};
use mckit::rxsignal::{
    fit_sat_drift, read_trace_csv, rmse_vs_binomial, sample_correlation_mc, sample_isi, CorrelationScenario,
    CountKind, FitOptions, IsiChannel,
};
use mckit::stochsim::{
    build_dumbbell, estimate_cir, meso_run, micro_run, Environment, InitGroup, MicroOptions, Placement, Probe,
    RealizationSeries,
};

use crate::config::*;
use crate::csv::CsvTable;
use crate::error::CliError;

/// Table plus informational lines for standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub table: CsvTable,
    pub notes: Vec<String>,
}

impl From<CsvTable> for Output {
    fn from(table: CsvTable) -> Self {
        Self { table, notes: Vec::new() }
    }
}

fn core<T>(location: &str, r: mckit::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::from_core(location, e))
}

pub fn run_scenario(s: &Scenario) -> Result<Output, CliError> {
    s.validate()?;
    let times = s.time.map(|g| g.values()).unwrap_or_default();
    match &s.params {
        Params::Concentration(p) => concentration(p, &times).map(Into::into),
        Params::Cir(p) => cir(p, &times).map(Into::into),
        Params::Rmse(p) => rmse(p).map(Into::into),
        Params::Isi(p) => isi(p, s.realizations, s.seed).map(Into::into),
        Params::Correlation(p) => correlation(p, &times, s.realizations, s.seed).map(Into::into),
        Params::Mobile(p) => mobile(p, &times, s.realizations, s.seed).map(Into::into),
        Params::SimulateMicro(p) => micro(p, s.realizations, s.seed).map(Into::into),
        Params::SimulateMeso(p) => meso(p, &times, s.realizations, s.seed).map(Into::into),
        Params::Fit(p) => fit(p),
    }
}

fn concentration(p: &ConcentrationParams, times: &[f64]) -> Result<CsvTable, CliError> {
    let mut header = vec!["t_seconds".to_string()];
    header.extend(p.curves.iter().map(|c| format!("c_{}", c.label)));
    let mut table = CsvTable::new(header);
    let src = PointSource::new(p.n, p.source, 0.0);
    for &t in times {
        let mut row = vec![t];
        for (i, c) in p.curves.iter().enumerate() {
            let loc = format!("params.curves.{i} at t={t}");
            let v = if c.kappa == 0.0 && c.velocity == SpacePoint::ORIGIN {
                point_source_concentration(&src, p.diffusion, c.at, t)
            } else {
                let spec = ReactionSpec::UniDegradation(UniDegradation { kappa: c.kappa, order: 1 });
                reaction_advection_diffusion_concentration(&src, p.diffusion, c.velocity, &spec, c.at, t)
            };
            row.push(core(&loc, v)?);
        }
        table.push(row);
    }
    Ok(table)
}

fn cir(p: &CirParams, times: &[f64]) -> Result<CsvTable, CliError> {
    let mut header = vec!["t_seconds".to_string()];
    header.extend(p.curves.iter().map(|c| match c.quantity {
        CirQuantity::Cir => format!("h_{}", c.label),
        CirQuantity::AbsorbedFraction => format!("absorbed_{}", c.label),
    }));
    let columns = p
        .curves
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let loc = format!("params.curves.{i}");
            core(&loc, c.model.validate())?;
            let vals = par_indexed(times.len(), |j| {
                let t = times[j as usize];
                match c.quantity {
                    CirQuantity::Cir => cir_eval(&c.model, t),
                    CirQuantity::AbsorbedFraction => absorbed_fraction(&c.model, t),
                }
            });
            vals.into_iter().collect::<mckit::Result<Vec<f64>>>().map_err(|e| CliError::from_core(&loc, e))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = CsvTable::new(header);
    for (j, &t) in times.iter().enumerate() {
        let mut row = vec![t];
        row.extend(columns.iter().map(|c| c[j]));
        table.push(row);
    }
    Ok(table)
}

fn rmse(p: &RmseParams) -> Result<CsvTable, CliError> {
    let grid = TimeGrid { t_start: p.h_min, t_end: p.h_max, points: p.points, spacing: Spacing::Log }.values();
    let mut header = vec!["h".to_string()];
    for n in &p.n_tx {
        header.push(format!("rmse_gauss_{n}"));
        header.push(format!("rmse_poisson_{n}"));
    }
    let rows = par_indexed(grid.len(), |j| {
        let h = grid[j as usize];
        let mut row = vec![h];
        for &n in &p.n_tx {
            row.push(rmse_vs_binomial(CountKind::Gaussian, n, h)?);
            row.push(rmse_vs_binomial(CountKind::Poisson, n, h)?);
        }
        Ok(row)
    });
    let mut table = CsvTable::new(header);
    for r in rows {
        table.push(core("params", r)?);
    }
    Ok(table)
}

fn isi(p: &IsiParams, realizations: usize, seed: u64) -> Result<CsvTable, CliError> {
    if p.samples_per_symbol == 0 {
        return Err(CliError::Validation { location: "params.samples_per_symbol".into(), message: "must be >= 1".into() });
    }
    let dt = p.t_symb / p.samples_per_symbol as f64;
    let ch = core(
        "params",
        IsiChannel::from_cir(p.memory, p.t_symb, dt, p.samples_per_symbol, p.n_tx, p.r_int, |t| cir_eval(&p.model, t)),
    )?;
    let mean = core("params.symbols", ch.mean(&p.symbols))?;
    let draws = par_indexed(realizations, |i| sample_isi(&ch, &p.symbols, p.noise, &mut stream(seed, i)));
    let draws = draws.into_iter().collect::<mckit::Result<Vec<_>>>().map_err(|e| CliError::from_core("params", e))?;
    let mut header = vec!["t_seconds".to_string(), "expected".to_string()];
    header.extend((1..=realizations).map(|r| format!("r_{r}")));
    let mut table = CsvTable::new(header);
    for (k, row) in mean.iter().enumerate() {
        for (m, &mu) in row.iter().enumerate() {
            let mut out = vec![k as f64 * p.t_symb + (m + 1) as f64 * dt, mu];
            out.extend(draws.iter().map(|d| d[k][m]));
            table.push(out);
        }
    }
    Ok(table)
}

fn correlation(p: &CorrelationParams, lags: &[f64], realizations: usize, seed: u64) -> Result<CsvTable, CliError> {
    let mut header = vec!["t_seconds".to_string()];
    header.extend(p.diffusions.iter().map(|d| format!("rho_D{d:e}")));
    let mut cols = Vec::new();
    for (i, &d) in p.diffusions.iter().enumerate() {
        let loc = format!("params.diffusions.{i}");
        let sc = CorrelationScenario { n_tx: p.n_tx, d0: p.d0, a_rx: p.a_rx, diffusion: d };
        let t1 = p.t1.unwrap_or(p.d0 * p.d0 / (6.0 * d));
        let col = lags
            .iter()
            .map(|&lag| Ok(sample_correlation_mc(&sc, t1, t1 + lag, realizations, seed)?.rho.abs()))
            .collect::<mckit::Result<Vec<f64>>>()
            .map_err(|e| CliError::from_core(&loc, e))?;
        cols.push(col);
    }
    let mut table = CsvTable::new(header);
    for (j, &lag) in lags.iter().enumerate() {
        let mut row = vec![lag];
        row.extend(cols.iter().map(|c| c[j]));
        table.push(row);
    }
    Ok(table)
}

fn mobile(p: &MobileParams, lags: &[f64], realizations: usize, seed: u64) -> Result<CsvTable, CliError> {
    let mut header = vec!["t_seconds".to_string()];
    for r in &p.ratios {
        header.push(format!("rho_r{r}"));
        header.push(format!("mean_r{r}"));
        if p.monte_carlo {
            header.push(format!("rho_mc_r{r}"));
            header.push(format!("rho_mc_se_r{r}"));
        }
    }
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for (i, &r) in p.ratios.iter().enumerate() {
        let loc = format!("params.ratios.{i}");
        let ch = MobileChannel {
            diffusion: p.diffusion,
            d_tx: r * p.diffusion,
            d_rx: r * p.diffusion,
            d0: p.d0,
            v_rx: 4.0 / 3.0 * PI * p.a_rx.powi(3),
            n_tx: p.n_tx,
        };
        core(&loc, ch.validate())?;
        let t = p.t.unwrap_or_else(|| ch.peak_time());
        let width = if p.monte_carlo { 4 } else { 2 };
        let mut block = vec![Vec::with_capacity(lags.len()); width];
        for &lag in lags {
            let tau2 = p.tau1 + lag;
            block[0].push(core(&loc, rho_tau(&ch, t, p.tau1, tau2))?);
            block[1].push(core(&loc, mobile_mean(&ch, t, tau2))?);
            if p.monte_carlo {
                if lag > 0.0 {
                    let mc = core(&loc, mobile_mc(&ch, t, p.tau1, tau2, realizations, seed))?;
                    block[2].push(mc.rho);
                    block[3].push(mc.se_rho);
                } else {
                    block[2].push(1.0);
                    block[3].push(0.0);
                }
            }
        }
        cols.extend(block);
    }
    let mut table = CsvTable::new(header);
    for (j, &lag) in lags.iter().enumerate() {
        let mut row = vec![lag];
        row.extend(cols.iter().map(|c| c[j]));
        table.push(row);
    }
    Ok(table)
}

fn series_table(runs: &[RealizationSeries], n_probes: usize, n_tx: f64) -> Result<CsvTable, CliError> {
    let mut header = vec!["t_seconds".to_string()];
    for k in 0..n_probes {
        header.push(format!("probe{k}_mean"));
        header.push(format!("probe{k}_se"));
    }
    let ests = (0..n_probes)
        .map(|k| core(&format!("params.probes.{k}"), estimate_cir(runs, k, n_tx)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = CsvTable::new(header);
    let times = &runs[0].times;
    for (j, &t) in times.iter().enumerate() {
        let mut row = vec![t];
        for e in &ests {
            row.push(e.mean[j]);
            row.push(e.se[j]);
        }
        table.push(row);
    }
    Ok(table)
}

/// Environment, initial molecules and probes of a particle scenario.
pub fn micro_setup(p: &MicroParams) -> Result<(Environment, Vec<InitGroup>, Vec<Probe>), CliError> {
    match &p.environment {
        EnvConfig::Dumbbell { pipe_length, diffusion, molecules } => {
            let (env, surface) = core("params.environment", build_dumbbell(*pipe_length, *diffusion))?;
            let init = if p.init.is_empty() {
                let edge = 32e-6;
                vec![InitGroup {
                    species: 0,
                    count: *molecules,
                    placement: Placement::UniformBox { min: SpacePoint::ORIGIN, max: SpacePoint::new(edge, edge, edge) },
                }]
            } else {
                p.init.clone()
            };
            let probes = if p.probes.is_empty() { vec![Probe::AbsorbingSurface { surface }] } else { p.probes.clone() };
            Ok((env, init, probes))
        }
        EnvConfig::Custom { regions, surfaces, default_behavior, species, reactions, flow } => {
            let env = Environment {
                regions: regions.clone(),
                surfaces: surfaces.clone(),
                default_behavior: *default_behavior,
                flow: flow.field(),
                species: species.clone(),
                reactions: reactions.clone(),
            };
            core("params.environment", env.validate())?;
            Ok((env, p.init.clone(), p.probes.clone()))
        }
    }
}

fn micro(p: &MicroParams, realizations: usize, seed: u64) -> Result<CsvTable, CliError> {
    let (env, init, probes) = micro_setup(p)?;
    let opts = MicroOptions { dt: p.dt, t_end: p.t_end, sample_every: p.sample_every, stop_when_empty: true };
    let runs = par_indexed(realizations, |i| micro_run(&env, &init, &probes, &opts, seed, i));
    let runs = runs.into_iter().collect::<mckit::Result<Vec<_>>>().map_err(|e| CliError::from_core("params", e))?;
    let n_tx = p.n_tx.unwrap_or_else(|| init.iter().map(|g| g.count).sum::<usize>() as f64);
    series_table(&runs, probes.len(), n_tx)
}

fn meso(p: &MesoParams, times: &[f64], realizations: usize, seed: u64) -> Result<CsvTable, CliError> {
    core("params.grid", p.grid.validate())?;
    let mut state = p.grid.empty_state();
    for (i, g) in p.init.iter().enumerate() {
        let slot = state
            .counts
            .get_mut(g.species)
            .and_then(|c| c.get_mut(g.subvolume))
            .ok_or_else(|| CliError::Validation {
                location: format!("params.init.{i}"),
                message: "species or subvolume out of range".into(),
            })?;
        *slot += g.count;
    }
    let runs = par_indexed(realizations, |i| meso_run(&p.grid, &state, times, &p.probes, seed, i));
    let runs = runs.into_iter().collect::<mckit::Result<Vec<_>>>().map_err(|e| CliError::from_core("params", e))?;
    let n_tx = p.n_tx.unwrap_or_else(|| p.init.iter().map(|g| g.count).sum::<u64>().max(1) as f64);
    series_table(&runs, p.probes.len(), n_tx)
}

fn fit(p: &FitParams) -> Result<Output, CliError> {
    let samples: Vec<(f64, f64)> = match &p.trace {
        Some(path) => {
            let loc = format!("params.trace ({})", path.display());
            let file = std::fs::File::open(path).map_err(|e| CliError::io(&loc, e))?;
            core(&loc, read_trace_csv(BufReader::new(file)))?
        }
        None => p.samples.iter().map(|s| (s[0], s[1])).collect(),
    };
    let mut opts = FitOptions::default();
    if let Some(n) = p.max_iterations {
        opts.max_iterations = n;
    }
    let result = core("params", fit_sat_drift(&samples, &p.segments, opts))?;
    let mut table = CsvTable::new(vec!["t_seconds".into(), "observed".into(), "fitted".into()]);
    for &(t, c) in &samples {
        table.push(vec![t, c, core("params.segments", result.eval(&p.segments, t))?]);
    }
    let mut notes = vec![format!("rms residual {:.6e} after {} iterations", result.residual, result.iterations)];
    for (i, m) in result.models.iter().enumerate() {
        notes.push(format!(
            "segment {i}: c_t0={:.6e} c_inf={:.6e} tau_on={:.6e} tau_off={:.6e} t0={:.6e} m_d={:.6e}",
            m.c_t0, m.c_inf, m.tau_on, m.tau_off, m.t0, m.m_d
        ));
    }
    Ok(Output { table, notes })
}
