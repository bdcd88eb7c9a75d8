//! Fixed-step particle simulator.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::geometry::{Environment, MoveOutcome, Patch};
use super::series::RealizationSeries;
use crate::error::{domain, require_positive, Error, Result};
use crate::physics::{brownian_step, SpacePoint};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub species: usize,
    pub pos: SpacePoint,
    /// Bit `k` is set while the particle is inside transparent probe `k`.
    inside: u64,
}

impl Particle {
    pub fn new(species: usize, pos: SpacePoint) -> Self {
        Self { species, pos, inside: 0 }
    }
}

/// Initial placement of a group of molecules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Placement {
    Point { at: SpacePoint },
    /// Uniform in the box, restricted by rejection to the accessible domain.
    UniformBox { min: SpacePoint, max: SpacePoint },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitGroup {
    pub species: usize,
    pub count: usize,
    pub placement: Placement,
}

/// Observation attached to a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Probe {
    /// Number of molecules inside a sphere that does not affect motion.
    TransparentSphere { center: SpacePoint, radius: f64, species: Option<usize> },
    /// Cumulative number of molecules absorbed by `surfaces[surface]`.
    AbsorbingSurface { surface: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MicroOptions {
    pub dt: f64,
    pub t_end: f64,
    /// Record probes every this many steps.
    pub sample_every: usize,
    /// Stop stepping once no molecules remain; later samples repeat the last state.
    #[serde(default = "yes")]
    pub stop_when_empty: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Default)]
pub struct MicroState {
    pub t: f64,
    pub steps: u64,
    pub particles: Vec<Particle>,
    /// Absorption times per surface index.
    pub absorbed: Vec<Vec<f64>>,
    /// Molecules absorbed by faces without a listed surface.
    pub absorbed_unlisted: u64,
}

impl MicroState {
    pub fn new(env: &Environment, particles: Vec<Particle>) -> Self {
        Self { particles, absorbed: vec![Vec::new(); env.surfaces.len()], ..Default::default() }
    }
}

/// Places the initial molecules.
pub fn place<R: Rng + ?Sized>(env: &Environment, groups: &[InitGroup], rng: &mut R) -> Result<Vec<Particle>> {
    let mut out = Vec::with_capacity(groups.iter().map(|g| g.count).sum());
    for g in groups {
        if g.species >= env.species.len() {
            return Err(domain!("init group refers to missing species {}", g.species));
        }
        match g.placement {
            Placement::Point { at } => {
                if !env.contains(&at) {
                    return Err(Error::Geometry(format!("release point {at:?} is outside the domain")));
                }
                out.extend(std::iter::repeat_n(Particle::new(g.species, at), g.count));
            }
            Placement::UniformBox { min, max } => {
                let mut placed = 0;
                let mut tries = 0u64;
                while placed < g.count {
                    tries += 1;
                    if tries > 1000 * (g.count as u64 + 1) {
                        return Err(Error::Geometry("uniform placement box barely overlaps the domain".into()));
                    }
                    let p = SpacePoint::new(
                        rng.random_range(min.x..=max.x),
                        rng.random_range(min.y..=max.y),
                        rng.random_range(min.z..=max.z),
                    );
                    if env.contains(&p) {
                        out.push(Particle::new(g.species, p));
                        placed += 1;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Advances every molecule by one step of length `dt`.
///
/// Per molecule: a first-order reaction coin flip with probability
/// `1 − exp(−κ·dt)`, then a Gaussian displacement plus `v·dt`, then the
/// boundary rules of [`Environment::resolve_move`].
pub fn micro_step<R: Rng + ?Sized>(state: &mut MicroState, env: &Environment, dt: f64, rng: &mut R) -> Result<()> {
    let mut k_tot = Vec::new();
    if !env.reactions.is_empty() {
        k_tot = vec![0.0; env.species.len()];
        for r in &env.reactions {
            k_tot[r.reactant] += r.kappa;
        }
    }
    let p_react: Vec<f64> = k_tot.iter().map(|k| -(-k * dt).exp_m1()).collect();
    let t = state.t;
    let t_after = (state.steps + 1) as f64 * dt;
    let mut i = 0;
    while i < state.particles.len() {
        let mut part = state.particles[i];
        if p_react.get(part.species).is_some_and(|&p| p > 0.0 && rng.random::<f64>() < p) {
            let mut u = rng.random::<f64>() * k_tot[part.species];
            let mut chosen = None;
            for r in env.reactions.iter().filter(|r| r.reactant == part.species) {
                chosen = Some(r);
                if u < r.kappa {
                    break;
                }
                u -= r.kappa;
            }
            match chosen.and_then(|r| r.product) {
                Some(p) => part.species = p,
                None => {
                    state.particles.swap_remove(i);
                    continue;
                }
            }
        }
        let mut new = brownian_step(part.pos, env.species[part.species].diffusion, dt, rng);
        if !env.flow.is_none() {
            new = new + env.flow.velocity(&part.pos, t)? * dt;
        }
        match env.resolve_move(part.pos, new)? {
            MoveOutcome::Moved(p) => {
                part.pos = p;
                state.particles[i] = part;
                i += 1;
            }
            MoveOutcome::Absorbed(idx) => {
                match idx {
                    Some(k) => state.absorbed[k].push(t_after),
                    None => state.absorbed_unlisted += 1,
                }
                state.particles.swap_remove(i);
            }
        }
    }
    state.steps += 1;
    state.t = t_after;
    Ok(())
}

fn validate_probes(env: &Environment, probes: &[Probe]) -> Result<()> {
    if probes.len() > 64 {
        return Err(domain!("at most 64 probes supported"));
    }
    for p in probes {
        match *p {
            Probe::TransparentSphere { radius, species, .. } => {
                require_positive("probe radius", radius)?;
                if species.is_some_and(|s| s >= env.species.len()) {
                    return Err(domain!("probe refers to a missing species"));
                }
            }
            Probe::AbsorbingSurface { surface } => {
                let ok = env.surfaces.get(surface).is_some_and(|s| {
                    s.behavior == super::geometry::Behavior::Absorbing
                        && matches!(s.patch, Patch::RegionFace { .. } | Patch::Sphere { .. })
                });
                if !ok {
                    return Err(domain!("probe surface {surface} is not an absorbing surface"));
                }
            }
        }
    }
    Ok(())
}

/// Records every probe at the current time; updates arrival and departure
/// times of transparent probes from membership changes since the last sample.
/// Molecules inside at the first sample count as arriving then.
fn record(state: &mut MicroState, probes: &[Probe], series: &mut RealizationSeries) {
    series.times.push(state.t);
    for (k, probe) in probes.iter().enumerate() {
        let value = match *probe {
            Probe::TransparentSphere { center, radius, species } => {
                let r2 = radius * radius;
                let bit = 1u64 << k;
                let mut count = 0usize;
                for p in state.particles.iter_mut() {
                    let inside = species.is_none_or(|s| s == p.species) && (p.pos - center).norm_sq() <= r2;
                    let was = p.inside & bit != 0;
                    if inside {
                        count += 1;
                        p.inside |= bit;
                    } else {
                        p.inside &= !bit;
                    }
                    if inside && !was {
                        series.arrivals[k].push(state.t);
                    } else if !inside && was {
                        series.departures[k].push(state.t);
                    }
                }
                count as f64
            }
            Probe::AbsorbingSurface { surface } => state.absorbed[surface].len() as f64,
        };
        series.values[k].push(value);
    }
}

/// One realization on a fixed step, seeded by `(seed, index)`.
pub fn micro_run(
    env: &Environment,
    init: &[InitGroup],
    probes: &[Probe],
    opts: &MicroOptions,
    seed: u64,
    index: u64,
) -> Result<RealizationSeries> {
    env.validate()?;
    validate_probes(env, probes)?;
    require_positive("dt", opts.dt)?;
    require_positive("t_end", opts.t_end)?;
    if opts.sample_every == 0 {
        return Err(domain!("sample_every must be >= 1"));
    }
    let n_steps = (opts.t_end / opts.dt - 1e-9).ceil() as u64;
    let mut rng = rng::stream(seed, index);
    let particles = place(env, init, &mut rng)?;
    let mut state = MicroState::new(env, particles);
    let mut series = RealizationSeries::new(probes.len());
    record(&mut state, probes, &mut series);
    let every = opts.sample_every as u64;
    let mut stopped = false;
    for step in 1..=n_steps {
        if !stopped {
            micro_step(&mut state, env, opts.dt, &mut rng)?;
            stopped = opts.stop_when_empty && state.particles.is_empty();
        } else {
            state.steps = step;
            state.t = step as f64 * opts.dt;
        }
        if step % every == 0 {
            record(&mut state, probes, &mut series);
        }
    }
    // Transparent arrivals are only observed at sample times, so departures never exceed arrivals.
    Ok(series_with_absorptions(series, &state, probes))
}

fn series_with_absorptions(mut series: RealizationSeries, state: &MicroState, probes: &[Probe]) -> RealizationSeries {
    for (k, p) in probes.iter().enumerate() {
        if let Probe::AbsorbingSurface { surface } = *p {
            series.arrivals[k] = state.absorbed[surface].clone();
        }
    }
    series
}
