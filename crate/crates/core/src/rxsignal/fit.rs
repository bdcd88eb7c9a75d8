//! Saturation plus linear-drift model for measured concentration traces, with
//! a damped Gauss–Newton (Levenberg–Marquardt) least-squares fit.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{domain, require_positive, Error, Result};

/// `c(t) = c_t0 + (c_inf − c_t0)(1 − e^{−(t−t0)/τ}) + m_d (t − t0)`,
/// with `τ = tau_on` while the stimulus is on and `tau_off` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SatDriftModel {
    pub c_t0: f64,
    pub c_inf: f64,
    pub tau_on: f64,
    pub tau_off: f64,
    pub t0: f64,
    pub m_d: f64,
}

impl SatDriftModel {
    pub fn tau(&self, light_on: bool) -> f64 {
        if light_on {
            self.tau_on
        } else {
            self.tau_off
        }
    }
}

/// Concentration at `t ≥ t0`.
pub fn eval_sat_drift(m: &SatDriftModel, t: f64, light_on: bool) -> Result<f64> {
    let tau = m.tau(light_on);
    require_positive("tau", tau)?;
    if !(t >= m.t0) {
        return Err(domain!("t={t} precedes t0={}", m.t0));
    }
    let dt = t - m.t0;
    let e = if dt.is_infinite() { 0.0 } else { (-dt / tau).exp() };
    Ok(m.c_t0 * e + m.c_inf * (1.0 - e) + if m.m_d == 0.0 { 0.0 } else { m.m_d * dt })
}

/// Interval `[t_start, t_end)` with a constant stimulus state. The last segment
/// of a fit also includes its end point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub light_on: bool,
}

/// Fit result: one model per segment, sharing `tau_on`, `tau_off` and `m_d`.
/// Each segment's `t0` is its start time. A time constant with no segment in
/// its state is reported as NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct SatDriftFit {
    pub models: Vec<SatDriftModel>,
    /// Root-mean-square residual in data units.
    pub residual: f64,
    pub iterations: usize,
    /// Sum of squares after each accepted step (normalized units).
    pub history: Vec<f64>,
}

impl SatDriftFit {
    /// Evaluates the fitted trace at `t` using the segment that contains it.
    pub fn eval(&self, segments: &[Segment], t: f64) -> Result<f64> {
        let idx = segment_of(segments, t).ok_or_else(|| domain!("t={t} lies in no segment"))?;
        eval_sat_drift(&self.models[idx], t, segments[idx].light_on)
    }
}

/// Controls for [`fit_sat_drift`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Stop when an accepted step lowers the sum of squares by less than this fraction.
    pub rel_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iterations: 500, rel_tol: 1e-15 }
    }
}

fn segment_of(segments: &[Segment], t: f64) -> Option<usize> {
    let last = segments.len().checked_sub(1)?;
    segments
        .iter()
        .position(|s| t >= s.t_start && t < s.t_end)
        .or_else(|| (t == segments[last].t_end).then_some(last))
}

/// Sample in normalized units.
struct Point {
    seg: usize,
    tn: f64,
    y: f64,
}

/// Layout of the normalized parameter vector:
/// `[ln τ_on]?, [ln τ_off]?, m, (c_t0, c_inf) per segment`.
struct Layout {
    on: Option<usize>,
    off: Option<usize>,
    m: usize,
    first_seg: usize,
    n: usize,
}

impl Layout {
    fn new(segments: &[Segment]) -> Self {
        let mut k = 0;
        let on = segments.iter().any(|s| s.light_on).then(|| {
            k += 1;
            k - 1
        });
        let off = segments.iter().any(|s| !s.light_on).then(|| {
            k += 1;
            k - 1
        });
        Self { on, off, m: k, first_seg: k + 1, n: k + 1 + 2 * segments.len() }
    }

    fn tau_index(&self, light_on: bool) -> usize {
        if light_on {
            self.on.expect("on segment present")
        } else {
            self.off.expect("off segment present")
        }
    }
}

struct Problem<'a> {
    points: Vec<Point>,
    segments: &'a [Segment],
    layout: Layout,
}

impl Problem<'_> {
    fn residuals(&self, p: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for pt in &self.points {
            let tau = p[self.layout.tau_index(self.segments[pt.seg].light_on)].exp();
            let c0 = p[self.layout.first_seg + 2 * pt.seg];
            let ci = p[self.layout.first_seg + 2 * pt.seg + 1];
            let e = (-pt.tn / tau).exp();
            out.push(c0 * e + ci * (1.0 - e) + p[self.layout.m] * pt.tn - pt.y);
        }
    }

    fn sse(&self, p: &[f64], buf: &mut Vec<f64>) -> f64 {
        self.residuals(p, buf);
        buf.iter().map(|r| r * r).sum()
    }

    /// Rows of the Jacobian of the residuals.
    fn jacobian(&self, p: &[f64]) -> Vec<Vec<f64>> {
        self.points
            .iter()
            .map(|pt| {
                let mut row = vec![0.0; self.layout.n];
                let ti = self.layout.tau_index(self.segments[pt.seg].light_on);
                let tau = p[ti].exp();
                let c0 = p[self.layout.first_seg + 2 * pt.seg];
                let ci = p[self.layout.first_seg + 2 * pt.seg + 1];
                let e = (-pt.tn / tau).exp();
                row[ti] = (c0 - ci) * e * pt.tn / tau;
                row[self.layout.m] = pt.tn;
                row[self.layout.first_seg + 2 * pt.seg] = e;
                row[self.layout.first_seg + 2 * pt.seg + 1] = 1.0 - e;
                row
            })
            .collect()
    }

    /// Best linear parameters for fixed time constants, returning the full vector and its SSE.
    fn linear_solve(&self, ln_taus: (f64, f64), buf: &mut Vec<f64>) -> Option<(Vec<f64>, f64)> {
        let mut p = vec![0.0; self.layout.n];
        if let Some(i) = self.layout.on {
            p[i] = ln_taus.0;
        }
        if let Some(i) = self.layout.off {
            p[i] = ln_taus.1;
        }
        let lin: Vec<usize> = (self.layout.m..self.layout.n).collect();
        let jac = self.jacobian(&p);
        let k = lin.len();
        let mut a = vec![vec![0.0; k]; k];
        let mut b = vec![0.0; k];
        for (row, pt) in jac.iter().zip(&self.points) {
            for (i, &li) in lin.iter().enumerate() {
                b[i] += row[li] * pt.y;
                for (j, &lj) in lin.iter().enumerate() {
                    a[i][j] += row[li] * row[lj];
                }
            }
        }
        let x = solve_linear(a, b)?;
        for (i, &li) in lin.iter().enumerate() {
            p[li] = x[i];
        }
        let s = self.sse(&p, buf);
        s.is_finite().then_some((p, s))
    }
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Least-squares fit of the saturation plus drift model to `(t, c)` samples.
///
/// Time constants and the drift slope are shared across segments; each
/// segment has its own `c_t0` and `c_inf` and starts at `t0 = t_start`.
/// On non-convergence the error carries the best-so-far parameters as
/// `[tau_on, tau_off, m_d, c_t0_1, c_inf_1, …]` in data units.
pub fn fit_sat_drift(samples: &[(f64, f64)], segments: &[Segment], opts: FitOptions) -> Result<SatDriftFit> {
    if segments.is_empty() {
        return Err(domain!("at least one segment required"));
    }
    for s in segments {
        if !(s.t_end > s.t_start) || !s.t_start.is_finite() || !s.t_end.is_finite() {
            return Err(domain!("segment [{}, {}) is empty or not finite", s.t_start, s.t_end));
        }
    }
    if segments.windows(2).any(|w| w[1].t_start < w[0].t_end) {
        return Err(domain!("segments must be ordered and non-overlapping"));
    }
    let t_span = segments.last().map(|s| s.t_end).unwrap_or(0.0) - segments[0].t_start;
    let c_scale = samples.iter().fold(0.0f64, |m, s| m.max(s.1.abs()));
    let c_scale = if c_scale > 0.0 { c_scale } else { 1.0 };
    let mut counts = vec![0usize; segments.len()];
    let mut points = Vec::with_capacity(samples.len());
    for &(t, c) in samples {
        if !(t.is_finite() && c.is_finite()) {
            return Err(domain!("non-finite sample ({t}, {c})"));
        }
        if let Some(seg) = segment_of(segments, t) {
            counts[seg] += 1;
            points.push(Point { seg, tn: (t - segments[seg].t_start) / t_span, y: c / c_scale });
        }
    }
    if let Some(i) = counts.iter().position(|&n| n < 3) {
        return Err(domain!("segment {i} has {} samples, at least 3 required", counts[i]));
    }
    let problem = Problem { points, segments, layout: Layout::new(segments) };
    let mut buf = Vec::new();

    // Time constants enter nonlinearly; scan them on a grid with the linear
    // parameters solved exactly, then refine everything jointly.
    let grid: Vec<f64> = (0..25).map(|i| (1e-4f64).ln() + i as f64 * (1e5f64).ln() / 24.0).collect();
    let on_grid: &[f64] = if problem.layout.on.is_some() { &grid } else { &[0.0] };
    let off_grid: &[f64] = if problem.layout.off.is_some() { &grid } else { &[0.0] };
    let mut best: Option<(Vec<f64>, f64)> = None;
    for &a in on_grid {
        for &b in off_grid {
            if let Some((p, s)) = problem.linear_solve((a, b), &mut buf) {
                if best.as_ref().is_none_or(|(_, bs)| s < *bs) {
                    best = Some((p, s));
                }
            }
        }
    }
    let (mut p, mut sse) = best.ok_or_else(|| Error::Numeric("no admissible starting point".into()))?;

    let n = problem.layout.n;
    let mut lambda = 1e-3;
    let mut history = vec![sse];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iterations {
        iterations += 1;
        problem.residuals(&p, &mut buf);
        let jac = problem.jacobian(&p);
        let mut h = vec![vec![0.0; n]; n];
        let mut g = vec![0.0; n];
        for (row, r) in jac.iter().zip(&buf) {
            for i in 0..n {
                g[i] += row[i] * r;
                for j in 0..n {
                    h[i][j] += row[i] * row[j];
                }
            }
        }
        let mut accepted = false;
        while lambda < 1e20 {
            let mut damped = h.clone();
            for (i, row) in damped.iter_mut().enumerate() {
                row[i] += lambda * h[i][i].max(1e-30);
            }
            let step = solve_linear(damped, g.iter().map(|v| -v).collect());
            if let Some(step) = step {
                let trial: Vec<f64> = p.iter().zip(&step).map(|(a, b)| a + b).collect();
                let s = problem.sse(&trial, &mut buf);
                if s.is_finite() && s <= sse {
                    let small_step = step.iter().zip(&p).all(|(d, v)| d.abs() <= 1e-14 * (v.abs() + 1e-10));
                    let gain = (sse - s) / sse.max(f64::MIN_POSITIVE);
                    p = trial;
                    sse = s;
                    history.push(s);
                    lambda = (lambda / 3.0).max(1e-15);
                    accepted = true;
                    converged = gain < opts.rel_tol || small_step || sse == 0.0;
                    break;
                }
            }
            lambda *= 4.0;
        }
        if !accepted {
            // No descent direction remains: the point is stationary to working precision.
            converged = true;
        }
        if converged {
            break;
        }
    }

    let models = to_models(&problem, &p, t_span, c_scale);
    let residual = (sse / problem.points.len() as f64).sqrt() * c_scale;
    if !converged {
        let first = models[0];
        let mut best = vec![first.tau_on, first.tau_off, first.m_d];
        for m in &models {
            best.extend([m.c_t0, m.c_inf]);
        }
        return Err(Error::Fit { iterations, residual, best });
    }
    Ok(SatDriftFit { models, residual, iterations, history })
}

fn to_models(problem: &Problem<'_>, p: &[f64], t_span: f64, c_scale: f64) -> Vec<SatDriftModel> {
    let l = &problem.layout;
    let tau_on = l.on.map_or(f64::NAN, |i| p[i].exp() * t_span);
    let tau_off = l.off.map_or(f64::NAN, |i| p[i].exp() * t_span);
    let m_d = p[l.m] * c_scale / t_span;
    problem
        .segments
        .iter()
        .enumerate()
        .map(|(k, s)| SatDriftModel {
            c_t0: p[l.first_seg + 2 * k] * c_scale,
            c_inf: p[l.first_seg + 2 * k + 1] * c_scale,
            tau_on,
            tau_off,
            t0: s.t_start,
            m_d,
        })
        .collect()
}

/// Reads a two-column `(t_seconds, concentration)` CSV with a header row.
pub fn read_trace_csv<R: BufRead>(reader: R) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| domain!("line {}: {e}", i + 1))?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 2 {
            return Err(domain!("line {}: expected 2 columns, found {}", i + 1, cols.len()));
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|e| domain!("line {}: '{s}': {e}", i + 1));
        out.push((parse(cols[0])?, parse(cols[1])?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eval_limits() {
        let m = SatDriftModel { c_t0: 3.0, c_inf: 9.0, tau_on: 5.0, tau_off: 2.0, t0: 10.0, m_d: 0.0 };
        assert_eq!(eval_sat_drift(&m, 10.0, true).unwrap(), 3.0);
        assert_relative_eq!(eval_sat_drift(&m, 1e6, false).unwrap(), 9.0);
        assert!(eval_sat_drift(&m, 9.0, true).is_err());
        let bad = SatDriftModel { tau_on: 0.0, ..m };
        assert!(eval_sat_drift(&bad, 11.0, true).is_err());
    }

    fn synth(noise: &[f64]) -> (Vec<(f64, f64)>, Vec<Segment>, Vec<SatDriftModel>) {
        let segs = vec![
            Segment { t_start: 0.0, t_end: 3240.0, light_on: true },
            Segment { t_start: 3240.0, t_end: 5400.0, light_on: false },
        ];
        let on = SatDriftModel { c_t0: 100.0, c_inf: 180.0, tau_on: 400.0, tau_off: 150.0, t0: 0.0, m_d: -0.01 };
        let off = SatDriftModel { c_t0: 150.0, c_inf: 90.0, t0: 3240.0, ..on };
        let mut data = Vec::new();
        for (i, k) in (0..=1080).enumerate() {
            let t = k as f64 * 5.0;
            let (m, light) = if t < 3240.0 { (&on, true) } else { (&off, false) };
            data.push((t, eval_sat_drift(m, t, light).unwrap() + noise.get(i).copied().unwrap_or(0.0)));
        }
        (data, segs, vec![on, off])
    }

    #[test]
    fn noiseless_round_trip() {
        let (data, segs, truth) = synth(&[]);
        let fit = fit_sat_drift(&data, &segs, FitOptions::default()).unwrap();
        assert!(fit.residual < 1e-9, "{}", fit.residual);
        for (f, t) in fit.models.iter().zip(&truth) {
            assert_relative_eq!(f.c_t0, t.c_t0, max_relative = 1e-8);
            assert_relative_eq!(f.c_inf, t.c_inf, max_relative = 1e-8);
            assert_relative_eq!(f.tau_on, t.tau_on, max_relative = 1e-8);
            assert_relative_eq!(f.tau_off, t.tau_off, max_relative = 1e-8);
            assert_relative_eq!(f.m_d, t.m_d, max_relative = 1e-8);
        }
        assert!(fit.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn too_few_points() {
        let segs = [Segment { t_start: 0.0, t_end: 1.0, light_on: true }];
        assert!(fit_sat_drift(&[(0.0, 1.0), (0.5, 2.0)], &segs, FitOptions::default()).is_err());
    }

    #[test]
    fn csv_ingestion() {
        let text = "t_seconds,concentration\n0,1.5\n1.0, 2.5e1\n\n";
        let rows = read_trace_csv(text.as_bytes()).unwrap();
        assert_eq!(rows, vec![(0.0, 1.5), (1.0, 25.0)]);
        assert!(read_trace_csv("h\n1,2,3\n".as_bytes()).is_err());
        assert!(read_trace_csv("h\n1,x\n".as_bytes()).is_err());
    }
}
