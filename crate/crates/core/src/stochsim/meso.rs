//! Subvolume stochastic simulation on a cubic lattice (direct method).

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::geometry::Species;
use super::series::RealizationSeries;
use crate::error::{domain, require_non_negative, require_positive, Error, Result};
use crate::rng;

/// Reaction of order 0, 1 or 2 in every subvolume (or only in `subvolumes`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MesoReaction {
    pub kappa: f64,
    pub reactants: Vec<usize>,
    pub products: Vec<usize>,
    #[serde(default)]
    pub subvolumes: Option<Vec<usize>>,
}

/// Lattice of cubic subvolumes of edge `edge`, indexed `(i·ny + j)·nz + k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MesoGrid {
    pub dims: [usize; 3],
    pub edge: f64,
    pub species: Vec<Species>,
    #[serde(default)]
    pub reactions: Vec<MesoReaction>,
}

/// Molecule counts `counts[species][subvolume]` at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MesoState {
    pub t: f64,
    pub counts: Vec<Vec<u64>>,
}

/// Count of one species summed over a set of subvolumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MesoProbe {
    pub species: usize,
    pub subvolumes: Vec<usize>,
}

/// All propensities of a grid: `alpha[s][q][m]` for a jump of species `s`
/// from subvolume `m` in direction `q` (−x, +x, −y, +y, −z, +z), `beta[m][p]`
/// for reaction `p` in subvolume `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Propensities {
    pub alpha: Vec<Vec<Vec<f64>>>,
    pub beta: Vec<Vec<f64>>,
    pub gamma_tot: f64,
}

impl MesoGrid {
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn volume(&self) -> f64 {
        self.edge.powi(3)
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    /// Neighbor of `m` in direction `q`, if inside the lattice.
    pub fn neighbor(&self, m: usize, q: usize) -> Option<usize> {
        let [_, ny, nz] = self.dims;
        let (i, j, k) = (m / (ny * nz), (m / nz) % ny, m % nz);
        let mut c = [i, j, k];
        let axis = q / 2;
        if q % 2 == 0 {
            c[axis] = c[axis].checked_sub(1)?;
        } else {
            c[axis] += 1;
            if c[axis] >= self.dims[axis] {
                return None;
            }
        }
        Some(self.index(c[0], c[1], c[2]))
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("edge", self.edge)?;
        if self.is_empty() {
            return Err(domain!("grid must have at least one subvolume"));
        }
        if self.species.is_empty() {
            return Err(domain!("at least one species required"));
        }
        for s in &self.species {
            require_non_negative("D", s.diffusion)?;
        }
        for r in &self.reactions {
            require_non_negative("kappa", r.kappa)?;
            if r.reactants.len() > 2 {
                return Err(domain!("reactions above second order are not supported"));
            }
            if r.reactants.iter().chain(&r.products).any(|&s| s >= self.species.len()) {
                return Err(domain!("reaction refers to a missing species"));
            }
            if let Some(sv) = &r.subvolumes {
                if sv.iter().any(|&m| m >= self.len()) {
                    return Err(domain!("reaction refers to a missing subvolume"));
                }
            }
        }
        Ok(())
    }

    pub fn empty_state(&self) -> MesoState {
        MesoState { t: 0.0, counts: vec![vec![0; self.len()]; self.species.len()] }
    }

    fn check_state(&self, state: &MesoState) -> Result<()> {
        if state.counts.len() != self.species.len() || state.counts.iter().any(|c| c.len() != self.len()) {
            return Err(domain!("state shape does not match the grid"));
        }
        Ok(())
    }

    fn reaction_applies(&self, r: &MesoReaction, m: usize) -> bool {
        r.subvolumes.as_ref().is_none_or(|sv| sv.contains(&m))
    }

    fn beta(&self, r: &MesoReaction, counts: &[Vec<u64>], m: usize) -> f64 {
        let v = self.volume();
        match r.reactants.as_slice() {
            [] => r.kappa * v,
            [a] => r.kappa * counts[*a][m] as f64,
            [a, b] if a == b => {
                let u = counts[*a][m] as f64;
                r.kappa * u * (u - 1.0).max(0.0) / v
            }
            [a, b] => r.kappa * counts[*a][m] as f64 * counts[*b][m] as f64 / v,
            _ => 0.0,
        }
    }
}

/// Evaluates every propensity from scratch.
pub fn meso_propensities(grid: &MesoGrid, state: &MesoState) -> Result<Propensities> {
    grid.validate()?;
    grid.check_state(state)?;
    let n = grid.len();
    let l2 = grid.edge * grid.edge;
    let mut gamma = 0.0;
    let mut alpha = vec![vec![vec![0.0; n]; 6]; grid.species.len()];
    for (s, sp) in grid.species.iter().enumerate() {
        for (q, row) in alpha[s].iter_mut().enumerate() {
            for (m, a) in row.iter_mut().enumerate() {
                if grid.neighbor(m, q).is_some() {
                    *a = sp.diffusion / l2 * state.counts[s][m] as f64;
                    gamma += *a;
                }
            }
        }
    }
    let mut beta = vec![vec![0.0; grid.reactions.len()]; n];
    for (m, row) in beta.iter_mut().enumerate() {
        for (p, r) in grid.reactions.iter().enumerate() {
            if grid.reaction_applies(r, m) {
                row[p] = grid.beta(r, &state.counts, m);
                gamma += row[p];
            }
        }
    }
    Ok(Propensities { alpha, beta, gamma_tot: gamma })
}

/// Waiting time to the next event, `−ln(u)/γ`; `None` when `γ = 0`.
pub fn meso_next_event<R: Rng + ?Sized>(gamma_tot: f64, rng: &mut R) -> Option<f64> {
    if gamma_tot > 0.0 && gamma_tot.is_finite() {
        let u: f64 = 1.0 - rng.random::<f64>();
        Some(-u.ln() / gamma_tot)
    } else {
        None
    }
}

/// Index `i` chosen with probability proportional to `props[i]` by inverting
/// the cumulative sum (first `i` with `u·Σ < cum_i`); `None` if all are zero.
pub fn meso_select_event<R: Rng + ?Sized>(props: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = props.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let target = rng.random::<f64>() * total;
    select_with(props, target)
}

fn select_with(props: &[f64], target: f64) -> Option<usize> {
    let mut cum = 0.0;
    let mut last = None;
    for (i, &p) in props.iter().enumerate() {
        if p > 0.0 {
            cum += p;
            last = Some(i);
            if target < cum {
                return Some(i);
            }
        }
    }
    // Rounding can leave target at the total; fall back to the last non-zero entry.
    last
}

/// Checks that `ℓ` is well below `√(2·n·D·t_r)` and `2·D/|v|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeCheck {
    pub ok: bool,
    /// `ℓ/√(2·n·D·t_r)`.
    pub diffusion_ratio: f64,
    /// `ℓ·|v|/(2·D)`.
    pub flow_ratio: f64,
}

pub const DEFAULT_SIZE_MARGIN: f64 = 0.1;

pub fn subvolume_size_check(edge: f64, dim: u32, d: f64, t_r: f64, v: f64, margin: f64) -> Result<SizeCheck> {
    require_positive("edge", edge)?;
    require_positive("D", d)?;
    require_positive("t_r", t_r)?;
    require_positive("margin", margin)?;
    if !(1..=3).contains(&dim) {
        return Err(domain!("dimension must be 1, 2 or 3, got {dim}"));
    }
    let diffusion_ratio = edge / (2.0 * dim as f64 * d * t_r).sqrt();
    let flow_ratio = edge * v.abs() / (2.0 * d);
    Ok(SizeCheck { ok: diffusion_ratio < margin && flow_ratio < margin, diffusion_ratio, flow_ratio })
}

/// Incrementally maintained per-subvolume totals for the direct method.
struct Cache {
    per_sub: Vec<f64>,
    total: f64,
    n_nbr: Vec<u8>,
    active: Vec<Vec<usize>>,
}

impl Cache {
    fn new(grid: &MesoGrid, counts: &[Vec<u64>]) -> Self {
        let n = grid.len();
        let n_nbr = (0..n).map(|m| (0..6).filter(|&q| grid.neighbor(m, q).is_some()).count() as u8).collect();
        let active = (0..n)
            .map(|m| (0..grid.reactions.len()).filter(|&p| grid.reaction_applies(&grid.reactions[p], m)).collect())
            .collect();
        let mut c = Self { per_sub: vec![0.0; n], total: 0.0, n_nbr, active };
        c.refresh_all(grid, counts);
        c
    }

    fn sub_total(&self, grid: &MesoGrid, counts: &[Vec<u64>], m: usize) -> f64 {
        let l2 = grid.edge * grid.edge;
        let mut a = 0.0;
        for (s, sp) in grid.species.iter().enumerate() {
            a += sp.diffusion / l2 * counts[s][m] as f64 * self.n_nbr[m] as f64;
        }
        for &p in &self.active[m] {
            a += grid.beta(&grid.reactions[p], counts, m);
        }
        a
    }

    fn refresh_all(&mut self, grid: &MesoGrid, counts: &[Vec<u64>]) {
        for m in 0..grid.len() {
            self.per_sub[m] = self.sub_total(grid, counts, m);
        }
        self.total = self.per_sub.iter().sum();
    }

    fn update(&mut self, grid: &MesoGrid, counts: &[Vec<u64>], m: usize) {
        let new = self.sub_total(grid, counts, m);
        self.total += new - self.per_sub[m];
        self.per_sub[m] = new;
    }
}

enum Event {
    Jump { species: usize, from: usize, to: usize },
    React { reaction: usize, at: usize },
}

fn pick_event<R: Rng + ?Sized>(grid: &MesoGrid, counts: &[Vec<u64>], cache: &Cache, rng: &mut R) -> Option<Event> {
    let m = select_with(&cache.per_sub, rng.random::<f64>() * cache.total)?;
    let mut target = rng.random::<f64>() * cache.per_sub[m];
    let l2 = grid.edge * grid.edge;
    let mut last = None;
    for (s, sp) in grid.species.iter().enumerate() {
        let a = sp.diffusion / l2 * counts[s][m] as f64;
        if a <= 0.0 {
            continue;
        }
        for q in 0..6 {
            if let Some(to) = grid.neighbor(m, q) {
                last = Some(Event::Jump { species: s, from: m, to });
                if target < a {
                    return last;
                }
                target -= a;
            }
        }
    }
    for &p in &cache.active[m] {
        let b = grid.beta(&grid.reactions[p], counts, m);
        if b > 0.0 {
            last = Some(Event::React { reaction: p, at: m });
            if target < b {
                return last;
            }
            target -= b;
        }
    }
    last
}

fn decrement(counts: &mut [Vec<u64>], s: usize, m: usize) -> Result<()> {
    let c = &mut counts[s][m];
    *c = c.checked_sub(1).ok_or_else(|| Error::Numeric(format!("count underflow of species {s} in subvolume {m}")))?;
    Ok(())
}

fn record(state: &MesoState, probes: &[MesoProbe], t: f64, series: &mut RealizationSeries) {
    series.times.push(t);
    for (k, p) in probes.iter().enumerate() {
        let v: u64 = p.subvolumes.iter().map(|&m| state.counts[p.species][m]).sum();
        series.values[k].push(v as f64);
    }
}

const RECHECK_EVERY: u64 = 10_000;

/// Runs the direct method from `state` and records probes at each of `times`
/// (ascending, not before `state.t`). Leaves `state` at the last sample time.
pub fn meso_run_from<R: Rng + ?Sized>(
    grid: &MesoGrid,
    state: &mut MesoState,
    times: &[f64],
    probes: &[MesoProbe],
    rng: &mut R,
) -> Result<RealizationSeries> {
    grid.validate()?;
    grid.check_state(state)?;
    for p in probes {
        if p.species >= grid.species.len() || p.subvolumes.iter().any(|&m| m >= grid.len()) {
            return Err(domain!("probe refers to a missing species or subvolume"));
        }
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < state.t) {
        return Err(domain!("sample times must be ascending and not before the current time"));
    }
    let mut series = RealizationSeries::new(probes.len());
    let Some(&t_end) = times.last() else {
        return Ok(series);
    };
    let mut cache = Cache::new(grid, &state.counts);
    let mut next_sample = 0;
    let mut events = 0u64;
    loop {
        let dt = meso_next_event(cache.total, rng);
        let t_next = dt.map_or(f64::INFINITY, |dt| state.t + dt);
        while next_sample < times.len() && times[next_sample] < t_next {
            record(state, probes, times[next_sample], &mut series);
            next_sample += 1;
        }
        if t_next > t_end {
            break;
        }
        if t_next <= state.t {
            return Err(Error::Numeric(format!("event clock stalled at t = {}", state.t)));
        }
        state.t = t_next;
        match pick_event(grid, &state.counts, &cache, rng) {
            Some(Event::Jump { species, from, to }) => {
                decrement(&mut state.counts, species, from)?;
                state.counts[species][to] += 1;
                cache.update(grid, &state.counts, from);
                cache.update(grid, &state.counts, to);
            }
            Some(Event::React { reaction, at }) => {
                let r = &grid.reactions[reaction];
                for &s in &r.reactants {
                    decrement(&mut state.counts, s, at)?;
                }
                for &s in &r.products {
                    state.counts[s][at] += 1;
                }
                cache.update(grid, &state.counts, at);
            }
            None => return Err(Error::Numeric("no event selectable despite positive total propensity".into())),
        }
        events += 1;
        if events % RECHECK_EVERY == 0 {
            let incremental = cache.total;
            cache.refresh_all(grid, &state.counts);
            debug_assert!(
                (incremental - cache.total).abs() <= 1e-9 * cache.total.max(1.0),
                "propensity cache drifted: {incremental} vs {}",
                cache.total
            );
        }
    }
    state.t = t_end;
    Ok(series)
}

/// One realization from `init`, seeded by `(seed, index)`.
pub fn meso_run(
    grid: &MesoGrid,
    init: &MesoState,
    times: &[f64],
    probes: &[MesoProbe],
    seed: u64,
    index: u64,
) -> Result<RealizationSeries> {
    let mut state = init.clone();
    let mut rng = rng::stream(seed, index);
    meso_run_from(grid, &mut state, times, probes, &mut rng)
}
