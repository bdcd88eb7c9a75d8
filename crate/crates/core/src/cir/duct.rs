//! Eigenfunction series for reflective rectangular and circular ducts.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::bessel::{bessel_j, BesselRootTable};
use crate::error::{domain, require_positive, Error, Result};

/// Cap on cosine terms per factor of the rectangular series.
pub const RECT_MAX_TERMS: usize = 100_000;

/// Value of a truncated series with the bound on the neglected remainder,
/// relative to the bracketed sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub bound: f64,
}

/// Duct of rectangular cross-section `[0, l_x] × [0, l_y]` along z.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectDuct {
    pub l_x: f64,
    pub l_y: f64,
    /// Transmitter position `(x, y, z)`.
    pub tx: [f64; 3],
    /// Receiver center `(x, y, z)`.
    pub rx: [f64; 3],
    pub diffusion: f64,
    pub v_rx: f64,
    #[serde(default = "default_series_tol")]
    pub series_tol: f64,
}

/// Circular duct of radius `a_c` along z; positions in cylindrical `(ρ, φ, z)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircDuct {
    pub a_c: f64,
    /// Transmitter `(ρ, φ, z)`.
    pub tx: [f64; 3],
    /// Receiver center `(ρ, φ, z)`.
    pub rx: [f64; 3],
    pub diffusion: f64,
    pub v_rx: f64,
    #[serde(default = "default_series_tol")]
    pub series_tol: f64,
    #[serde(default = "default_max_n")]
    pub max_n: u32,
    #[serde(default = "default_max_roots")]
    pub max_roots: usize,
    #[serde(skip)]
    table: OnceLock<BesselRootTable>,
}

impl PartialEq for CircDuct {
    fn eq(&self, o: &Self) -> bool {
        self.a_c == o.a_c
            && self.tx == o.tx
            && self.rx == o.rx
            && self.diffusion == o.diffusion
            && self.v_rx == o.v_rx
            && self.series_tol == o.series_tol
            && self.max_n == o.max_n
            && self.max_roots == o.max_roots
    }
}

pub fn default_series_tol() -> f64 {
    1e-10
}

pub fn default_max_n() -> u32 {
    64
}

pub fn default_max_roots() -> usize {
    200
}

fn check_tol(series_tol: f64) -> Result<()> {
    if series_tol > 0.0 && series_tol <= 1e-3 {
        Ok(())
    } else {
        Err(domain!("series_tol must lie in (0, 1e-3], got {series_tol}"))
    }
}

fn z_gaussian(dz: f64, d: f64, t: f64) -> f64 {
    (-dz * dz / (4.0 * d * t)).exp() / (4.0 * PI * d * t).sqrt()
}

/// `1 + 2 Σ_{n≥1} exp(−D n²π² t / l²) cos(nπ x_rx / l) cos(nπ x_tx / l)`.
fn cosine_factor(l: f64, x_rx: f64, x_tx: f64, d: f64, t: f64, tol: f64) -> Result<SeriesValue> {
    let mut sum = 1.0;
    let rate = d * PI * PI * t / (l * l);
    for n in 1..=RECT_MAX_TERMS {
        let nf = n as f64;
        let envelope = 2.0 * (-rate * nf * nf).exp();
        let term = envelope * (nf * PI * x_rx / l).cos() * (nf * PI * x_tx / l).cos();
        sum += term;
        // The remaining tail is dominated by a geometric series in the envelope.
        let ratio = (-rate * (2.0 * nf + 1.0)).exp();
        let tail = if ratio < 1.0 {
            envelope * ratio / (1.0 - ratio)
        } else {
            f64::INFINITY
        };
        if envelope < tol * sum.abs() && tail < tol * sum.abs() {
            return Ok(SeriesValue {
                value: sum,
                bound: tail / sum.abs(),
            });
        }
    }
    Err(Error::Convergence {
        what: "rectangular duct cosine series".into(),
        bound: 2.0 * (-rate * (RECT_MAX_TERMS as f64).powi(2)).exp() / sum.abs(),
    })
}

impl RectDuct {
    pub fn validate(&self) -> Result<()> {
        require_positive("l_x", self.l_x)?;
        require_positive("l_y", self.l_y)?;
        require_positive("D", self.diffusion)?;
        require_positive("V_rx", self.v_rx)?;
        check_tol(self.series_tol)?;
        for (name, p) in [("tx", self.tx), ("rx", self.rx)] {
            if !(0.0..=self.l_x).contains(&p[0]) || !(0.0..=self.l_y).contains(&p[1]) || !p[2].is_finite() {
                return Err(domain!("{name} = {p:?} lies outside the duct cross-section"));
            }
        }
        Ok(())
    }

    /// Series evaluation with the relative truncation bound.
    pub fn eval_series(&self, t: f64) -> Result<SeriesValue> {
        self.validate()?;
        if t <= 0.0 {
            return coincident_limit(self.tx == self.rx, t);
        }
        let d = self.diffusion;
        let fx = cosine_factor(self.l_x, self.rx[0], self.tx[0], d, t, self.series_tol)?;
        let fy = cosine_factor(self.l_y, self.rx[1], self.tx[1], d, t, self.series_tol)?;
        let dz = self.rx[2] - self.tx[2];
        let value = self.v_rx / (self.l_x * self.l_y) * fx.value * fy.value * z_gaussian(dz, d, t);
        Ok(SeriesValue {
            value,
            bound: fx.bound + fy.bound,
        })
    }
}

fn coincident_limit(coincident: bool, t: f64) -> Result<SeriesValue> {
    if t < 0.0 {
        return Err(domain!("t must be >= 0, got {t}"));
    }
    if coincident {
        return Err(domain!("t = 0 with coincident transmitter and receiver has no finite limit"));
    }
    Ok(SeriesValue { value: 0.0, bound: 0.0 })
}

impl CircDuct {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a_c: f64,
        tx: [f64; 3],
        rx: [f64; 3],
        diffusion: f64,
        v_rx: f64,
        series_tol: f64,
        max_n: u32,
        max_roots: usize,
    ) -> Self {
        Self {
            a_c,
            tx,
            rx,
            diffusion,
            v_rx,
            series_tol,
            max_n,
            max_roots,
            table: OnceLock::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("a_c", self.a_c)?;
        require_positive("D", self.diffusion)?;
        require_positive("V_rx", self.v_rx)?;
        check_tol(self.series_tol)?;
        if self.max_roots == 0 {
            return Err(domain!("max_roots must be >= 1"));
        }
        for (name, p) in [("tx", self.tx), ("rx", self.rx)] {
            if !(0.0..=self.a_c).contains(&p[0]) || !p[1].is_finite() || !p[2].is_finite() {
                return Err(domain!("{name} = {p:?} lies outside the duct"));
            }
        }
        Ok(())
    }

    /// Cached derivative-root table for this radius.
    pub fn root_table(&self) -> &BesselRootTable {
        self.table
            .get_or_init(|| BesselRootTable::new(self.a_c, self.max_n, self.max_roots))
    }

    /// Radial sum over roots for angular order `n`.
    fn order_sum(&self, n: u32, t: f64, total: f64) -> Result<(f64, f64)> {
        let table = self.root_table();
        let a = self.a_c;
        let nf = n as f64;
        let (rho_rx, rho_tx) = (self.rx[0], self.tx[0]);
        let mut sum = 0.0;
        let mut prev_env = f64::INFINITY;
        let mut k = 0;
        loop {
            let Some(alpha) = table.root(n, k)? else {
                return Err(Error::Convergence {
                    what: format!("circular duct series, order {n}"),
                    bound: prev_env / total.abs().max(1.0),
                });
            };
            let jn_wall = bessel_j(n as i32, alpha * a);
            let weight = alpha * alpha / ((alpha * alpha - nf * nf / (a * a)) * jn_wall * jn_wall);
            let env = (-self.diffusion * alpha * alpha * t).exp() * weight;
            let term = env * bessel_j(n as i32, alpha * rho_rx) * bessel_j(n as i32, alpha * rho_tx);
            sum += term;
            let scale = (total + sum).abs().max(1.0);
            // Stop once the envelope has peaked and dropped below tolerance.
            if env < prev_env && env < self.series_tol * scale {
                return Ok((sum, env / scale));
            }
            prev_env = env;
            k += 1;
        }
    }

    /// Series evaluation with the relative truncation bound.
    pub fn eval_series(&self, t: f64) -> Result<SeriesValue> {
        self.validate()?;
        if t <= 0.0 {
            return coincident_limit(self.tx == self.rx, t);
        }
        let dphi = self.rx[1] - self.tx[1];
        let on_axis = self.rx[0] == 0.0 || self.tx[0] == 0.0;
        let mut bracket = 1.0;
        let mut bound = 0.0;
        let mut small_run = 0;
        for n in 0..=self.max_n {
            let (s, b) = self.order_sum(n, t, bracket)?;
            let mult = if n == 0 { 1.0 } else { 2.0 };
            let contrib = mult * (n as f64 * dphi).cos() * s;
            bracket += contrib;
            bound += b;
            if n == 0 && on_axis {
                // J_n(0) = 0 for n ≥ 1, so higher orders vanish identically.
                break;
            }
            if n > 0 && (mult * s).abs() < self.series_tol * bracket.abs() {
                small_run += 1;
                if small_run >= 2 {
                    break;
                }
            } else {
                small_run = 0;
            }
            if n == self.max_n {
                return Err(Error::Convergence {
                    what: "circular duct series, angular orders".into(),
                    bound: (mult * s).abs() / bracket.abs(),
                });
            }
        }
        let a = self.a_c;
        let dz = self.rx[2] - self.tx[2];
        let d = self.diffusion;
        let value = self.v_rx * (-dz * dz / (4.0 * d * t)).exp() / (2.0 * PI * a * a * (PI * d * t).sqrt())
            * bracket;
        Ok(SeriesValue { value, bound })
    }
}
