//! Closed-form channel impulse responses.
//!
//! `h(t)` is the probability that a molecule released impulsively at `t = 0`
//! is observed by the receiver at time `t`. The fully absorbing receiver is
//! the exception: [`cir_eval`] returns its first-arrival density (s⁻¹) and
//! probabilities come from [`absorbed_fraction`] and [`absorbed_window`].

pub mod bessel;
pub mod duct;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use bessel::{bessel_j, bessel_j_prime, bessel_prime_roots, BesselRootTable};
pub use duct::{CircDuct, RectDuct, SeriesValue};

use crate::error::{domain, require_non_negative, require_positive, Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::special::{erf, erfc, q_function};

/// Point transmitter and passive receiver under the uniform concentration assumption.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PassiveUca {
    pub d0: f64,
    pub diffusion: f64,
    pub v_rx: f64,
}

/// Spherical receiver of radius `a_rx` at center distance `d0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereRx {
    pub d0: f64,
    pub a_rx: f64,
    pub diffusion: f64,
}

/// Geometry of a volume transmitter centered at distance `d0` from the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum TxShape {
    /// Molecules uniform in a ball of radius `a_tx`.
    Sphere { a_tx: f64 },
    /// Molecules uniform on a segment of `length` centered on the transmitter,
    /// at `angle` (radians) to the transmitter–receiver axis.
    Segment { length: f64, angle: f64 },
}

/// Effective diffusion coefficient used in the dispersion regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArisTaylorMode {
    /// `1 + (v_eff·a_c)²/(48·D)`, taken literally.
    #[default]
    Printed,
    /// `D·(1 + Pe²/48)` with `Pe = v_eff·a_c/D`.
    Classic,
}

/// Release profile for the flow-dominant duct regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Release {
    /// Uniform over the duct cross-section.
    Uniform,
    /// A single point at radius `rho_tx`.
    Point { rho_tx: f64 },
}

/// Variant of the enzymatic degradation approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnzymaticVariant {
    App1,
    LowerBound,
    App3,
}

/// Circular duct with laminar flow and a receiver occupying the annular
/// sector `a_c − l_rho ≤ ρ ≤ a_c`, angle `l_phi`, axial length `l_z`,
/// centered at axial distance `d_z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionDuct {
    pub a_c: f64,
    pub v_eff: f64,
    pub diffusion: f64,
    pub d_z: f64,
    pub l_rho: f64,
    pub l_phi: f64,
    pub l_z: f64,
    pub uca: bool,
    #[serde(default)]
    pub mode: ArisTaylorMode,
}

/// Duct geometry for the regime where advection dominates diffusion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowDominantDuct {
    pub a_c: f64,
    pub v_eff: f64,
    pub d_z: f64,
    pub l_rho: f64,
    pub l_phi: f64,
    pub l_z: f64,
    pub release: Release,
}

/// Passive UCA receiver with enzymatic degradation of the signaling molecules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnzymaticApprox {
    pub d0: f64,
    pub diffusion: f64,
    pub v_rx: f64,
    pub kappa_f: f64,
    pub kappa_b: f64,
    pub kappa_d: f64,
    /// Free enzyme concentration (App1, LowerBound) or total enzyme concentration (App3).
    pub c_e: f64,
    /// Enzyme–molecule complex concentration (App1 only).
    #[serde(default)]
    pub c_ae: f64,
    pub variant: EnzymaticVariant,
}

/// Catalog of closed-form CIRs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum CirModel {
    PassiveUca(PassiveUca),
    PassiveSphere(SphereRx),
    AbsorbingSphere(SphereRx),
    VolumeTx {
        tx_shape: TxShape,
        base: Box<CirModel>,
    },
    IonChannelTx {
        a_tx: f64,
        d0: f64,
        diffusion: f64,
        v_rx: f64,
    },
    RectDuct(RectDuct),
    CircDuct(CircDuct),
    /// Transmitter on the receiver axis at distance `d0` upstream; flow has a
    /// component `v_par` toward the receiver and `v_perp` across the axis.
    UniformFlow {
        d0: f64,
        diffusion: f64,
        v_rx: f64,
        v_par: f64,
        v_perp: f64,
    },
    DispersionDuct(DispersionDuct),
    FlowDominantDuct(FlowDominantDuct),
    Degraded {
        base: Box<CirModel>,
        kappa: f64,
    },
    EnzymaticApprox(EnzymaticApprox),
}

/// `V_rx / (4πDt)^{3/2} · exp(−d²/(4Dt))`.
fn uca_kernel(d: f64, diff: f64, v_rx: f64, t: f64) -> f64 {
    let four_dt = 4.0 * diff * t;
    v_rx / (PI * four_dt).powf(1.5) * (-d * d / four_dt).exp()
}

impl PassiveUca {
    pub fn validate(&self) -> Result<()> {
        require_positive("d0", self.d0)?;
        require_positive("D", self.diffusion)?;
        require_positive("V_rx", self.v_rx)
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        self.validate()?;
        if t <= 0.0 {
            return zero_limit(t);
        }
        Ok(uca_kernel(self.d0, self.diffusion, self.v_rx, t))
    }
}

fn zero_limit(t: f64) -> Result<f64> {
    if t < 0.0 || t.is_nan() {
        Err(domain!("t must be >= 0, got {t}"))
    } else {
        Ok(0.0)
    }
}

impl SphereRx {
    pub fn validate(&self, absorbing: bool) -> Result<()> {
        require_positive("a_rx", self.a_rx)?;
        require_positive("D", self.diffusion)?;
        if absorbing {
            require_positive("d0", self.d0)?;
            if self.d0 <= self.a_rx {
                return Err(domain!("d0={} must exceed a_rx={}", self.d0, self.a_rx));
            }
        } else {
            require_non_negative("d0", self.d0)?;
        }
        Ok(())
    }

    /// Exact probability of finding the molecule inside a transparent sphere.
    pub fn passive(&self, t: f64) -> Result<f64> {
        self.validate(false)?;
        if t <= 0.0 {
            if self.d0 < self.a_rx && t == 0.0 {
                return Ok(1.0);
            }
            return zero_limit(t);
        }
        Ok(passive_sphere_at(self.d0, self.a_rx, self.diffusion, t))
    }

    /// First-arrival density `k(t)` at a fully absorbing sphere, s⁻¹.
    pub fn absorbing_rate(&self, t: f64) -> Result<f64> {
        self.validate(true)?;
        if t <= 0.0 {
            return zero_limit(t);
        }
        let (a, d0, diff) = (self.a_rx, self.d0, self.diffusion);
        let gap = d0 - a;
        Ok(a * gap / (t * d0 * (4.0 * PI * diff * t).sqrt()) * (-gap * gap / (4.0 * diff * t)).exp())
    }

    /// Probability of absorption by time `t`.
    pub fn absorbed_fraction(&self, t: f64) -> Result<f64> {
        self.validate(true)?;
        if t <= 0.0 {
            return zero_limit(t);
        }
        if t.is_infinite() {
            return Ok(self.a_rx / self.d0);
        }
        let gap = self.d0 - self.a_rx;
        Ok(self.a_rx / self.d0 * erfc(gap / (4.0 * self.diffusion * t).sqrt()))
    }
}

/// Transparent-sphere occupancy probability for center distance `d` (any `d ≥ 0`).
fn passive_sphere_at(d: f64, a: f64, diff: f64, t: f64) -> f64 {
    let s = (4.0 * diff * t).sqrt();
    // erfc form avoids cancelling ±1 when the sphere is far from the source.
    let erf_part = if d > a {
        0.5 * (erfc((d - a) / s) - erfc((d + a) / s))
    } else {
        0.5 * (erf((a - d) / s) + erf((a + d) / s))
    };
    if d == 0.0 {
        // Limit of the exponential bracket over d as d → 0.
        return erf_part - 2.0 * a / (s * PI.sqrt()) * (-a * a / (s * s)).exp();
    }
    let e1 = (-(d - a).powi(2) / (s * s)).exp();
    let e2 = (-(d + a).powi(2) / (s * s)).exp();
    erf_part + (diff * t).sqrt() / (d * PI.sqrt()) * (e2 - e1)
}

/// Probability of absorption by time `t` at a fully absorbing sphere.
pub fn absorbed_fraction(model: &CirModel, t: f64) -> Result<f64> {
    match model {
        CirModel::AbsorbingSphere(s) => s.absorbed_fraction(t),
        other => Err(Error::Unsupported(format!("absorbed_fraction needs AbsorbingSphere, got {other:?}"))),
    }
}

/// Probability of absorption during `[t_l, t_u]`.
pub fn absorbed_window(model: &CirModel, t_l: f64, t_u: f64) -> Result<f64> {
    if !(t_l >= 0.0) || !(t_u >= t_l) {
        return Err(domain!("window requires 0 <= t_l <= t_u, got [{t_l}, {t_u}]"));
    }
    Ok(absorbed_fraction(model, t_u)? - absorbed_fraction(model, t_l)?)
}

impl CirModel {
    /// Parameter checks shared by all evaluators.
    pub fn validate(&self) -> Result<()> {
        match self {
            CirModel::PassiveUca(p) => p.validate(),
            CirModel::PassiveSphere(s) => s.validate(false),
            CirModel::AbsorbingSphere(s) => s.validate(true),
            CirModel::VolumeTx { tx_shape, base } => {
                base.validate()?;
                tx_shape.validate()?;
                distance_only_base(base).map(|_| ())
            }
            CirModel::IonChannelTx { a_tx, d0, diffusion, v_rx } => {
                require_positive("a_tx", *a_tx)?;
                require_positive("d0", *d0)?;
                require_positive("D", *diffusion)?;
                require_positive("V_rx", *v_rx)
            }
            CirModel::RectDuct(r) => r.validate(),
            CirModel::CircDuct(c) => c.validate(),
            CirModel::UniformFlow { d0, diffusion, v_rx, v_par, v_perp } => {
                PassiveUca { d0: *d0, diffusion: *diffusion, v_rx: *v_rx }.validate()?;
                if !(v_par.is_finite() && v_perp.is_finite()) {
                    return Err(domain!("flow components must be finite"));
                }
                Ok(())
            }
            CirModel::DispersionDuct(m) => m.validate(),
            CirModel::FlowDominantDuct(m) => m.validate(),
            CirModel::Degraded { base, kappa } => {
                require_non_negative("kappa", *kappa)?;
                base.validate()
            }
            CirModel::EnzymaticApprox(m) => m.validate(),
        }
    }
}

/// Evaluates `h(t)` (or the first-arrival density for [`CirModel::AbsorbingSphere`]).
pub fn cir_eval(model: &CirModel, t: f64) -> Result<f64> {
    match model {
        CirModel::PassiveUca(p) => p.eval(t),
        CirModel::PassiveSphere(s) => s.passive(t),
        CirModel::AbsorbingSphere(s) => s.absorbing_rate(t),
        CirModel::VolumeTx { tx_shape, base } => cir_volume_tx(tx_shape, base, t),
        &CirModel::IonChannelTx { a_tx, d0, diffusion, v_rx } => {
            model.validate()?;
            if t <= 0.0 {
                return zero_limit(t);
            }
            // Average of the UCA kernel over a transparent spherical shell of radius a_tx.
            let four_dt = 4.0 * diffusion * t;
            let e1 = (-(d0 - a_tx).powi(2) / four_dt).exp();
            let e2 = (-(d0 + a_tx).powi(2) / four_dt).exp();
            Ok(v_rx / (4.0 * PI * a_tx * d0 * (PI * four_dt).sqrt()) * (e1 - e2))
        }
        CirModel::RectDuct(r) => checked_probability(r.eval_series(t)?),
        CirModel::CircDuct(c) => checked_probability(c.eval_series(t)?),
        &CirModel::UniformFlow { d0, diffusion, v_rx, v_par, v_perp } => {
            model.validate()?;
            if t <= 0.0 {
                return zero_limit(t);
            }
            let along = d0 - v_par * t;
            let across = v_perp * t;
            Ok(uca_kernel((along * along + across * across).sqrt(), diffusion, v_rx, t))
        }
        CirModel::DispersionDuct(m) => dispersion_regime_cir(m, t),
        CirModel::FlowDominantDuct(m) => flow_dominant_cir(m, t),
        CirModel::Degraded { base, kappa } => {
            require_non_negative("kappa", *kappa)?;
            let h = cir_eval(base, t)?;
            Ok(if *kappa == 0.0 { h } else { h * (-kappa * t).exp() })
        }
        CirModel::EnzymaticApprox(m) => enzymatic_cir(m, t),
    }
}

/// Clamps tiny truncation overshoot into `[0, 1]`; larger violations are errors.
fn checked_probability(s: SeriesValue) -> Result<f64> {
    const SLACK: f64 = 1e-9;
    if s.value < -SLACK || s.value > 1.0 + SLACK || !s.value.is_finite() {
        return Err(Error::Convergence {
            what: format!("series value {} outside [0, 1]", s.value),
            bound: s.bound,
        });
    }
    Ok(s.value.clamp(0.0, 1.0))
}

impl TxShape {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TxShape::Sphere { a_tx } => require_non_negative("a_tx", a_tx),
            TxShape::Segment { length, angle } => {
                require_non_negative("length", length)?;
                if angle.is_finite() {
                    Ok(())
                } else {
                    Err(domain!("angle must be finite"))
                }
            }
        }
    }

    /// Closest and farthest receiver distance over the transmitter.
    fn distance_range(&self, d0: f64) -> (f64, f64) {
        match *self {
            TxShape::Sphere { a_tx } => ((d0 - a_tx).max(0.0), d0 + a_tx),
            TxShape::Segment { length, angle } => {
                let h = 0.5 * length;
                let dist = |u: f64| (d0 * d0 + u * u + 2.0 * d0 * u * angle.cos()).max(0.0).sqrt();
                let u_star = (-d0 * angle.cos()).clamp(-h, h);
                (dist(u_star), dist(-h).max(dist(h)))
            }
        }
    }
}

/// Returns the center distance of a base CIR that depends on distance only.
fn distance_only_base(base: &CirModel) -> Result<f64> {
    match base {
        CirModel::PassiveUca(p) => Ok(p.d0),
        CirModel::PassiveSphere(s) | CirModel::AbsorbingSphere(s) => Ok(s.d0),
        other => Err(Error::Unsupported(format!(
            "volume transmitter needs a distance-only base CIR, got {other:?}"
        ))),
    }
}

/// Base CIR evaluated with the center distance replaced by `d`.
fn base_at_distance(base: &CirModel, d: f64, t: f64) -> f64 {
    match base {
        CirModel::PassiveUca(p) => uca_kernel(d, p.diffusion, p.v_rx, t),
        CirModel::PassiveSphere(s) => passive_sphere_at(d, s.a_rx, s.diffusion, t),
        CirModel::AbsorbingSphere(s) => SphereRx { d0: d, ..*s }.absorbing_rate(t).unwrap_or(0.0),
        _ => f64::NAN,
    }
}

/// Uniform average of a distance-only base CIR over the transmitter region.
///
/// A spherical transmitter reduces to one integral over the receiver distance
/// `s`, whose density for a ball of radius `a` centered at `d0` is
/// `3s(a² − (s − d0)²)/(4a³d0)` on the cap-intersection range plus `3s²/a³`
/// on any range fully inside the ball.
pub fn cir_volume_tx(shape: &TxShape, base: &CirModel, t: f64) -> Result<f64> {
    base.validate()?;
    shape.validate()?;
    let d0 = distance_only_base(base)?;
    let degenerate = match *shape {
        TxShape::Sphere { a_tx } => a_tx == 0.0,
        TxShape::Segment { length, .. } => length == 0.0,
    };
    if degenerate {
        return cir_eval(base, t);
    }
    let (d_min, _) = shape.distance_range(d0);
    if let CirModel::AbsorbingSphere(s) = base {
        if d_min <= s.a_rx {
            return Err(domain!("transmitter overlaps the absorbing receiver"));
        }
    }
    if t <= 0.0 {
        return zero_limit(t);
    }
    let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-8, max_intervals: 4000 };
    let value = match *shape {
        TxShape::Sphere { a_tx: a } => {
            let shell = |s: f64| 3.0 * s * (a * a - (s - d0).powi(2)) / (4.0 * a.powi(3) * d0);
            let mut total = 0.0;
            if d0 < a {
                let inner = a - d0;
                total += integrate(|s| 3.0 * s * s / a.powi(3) * base_at_distance(base, s, t), 0.0, inner, opts)?.0;
                total += integrate(|s| shell(s) * base_at_distance(base, s, t), inner, a + d0, opts)?.0;
            } else {
                total += integrate(|s| shell(s) * base_at_distance(base, s, t), d0 - a, d0 + a, opts)?.0;
            }
            total
        }
        TxShape::Segment { length, angle } => {
            let h = 0.5 * length;
            let c = angle.cos();
            let f = |u: f64| base_at_distance(base, (d0 * d0 + u * u + 2.0 * d0 * u * c).max(0.0).sqrt(), t);
            integrate(f, -h, h, opts)?.0 / length
        }
    };
    if !value.is_finite() {
        return Err(Error::Convergence { what: "volume transmitter quadrature".into(), bound: f64::INFINITY });
    }
    Ok(value)
}

impl DispersionDuct {
    pub fn validate(&self) -> Result<()> {
        require_positive("a_c", self.a_c)?;
        require_positive("D", self.diffusion)?;
        require_positive("l_rho", self.l_rho)?;
        require_positive("l_phi", self.l_phi)?;
        require_positive("l_z", self.l_z)?;
        require_non_negative("v_eff", self.v_eff)?;
        if self.l_rho > self.a_c {
            return Err(domain!("l_rho={} exceeds a_c={}", self.l_rho, self.a_c));
        }
        if self.l_phi > 2.0 * PI + 1e-12 {
            return Err(domain!("l_phi={} exceeds 2π", self.l_phi));
        }
        if !self.d_z.is_finite() {
            return Err(domain!("d_z must be finite"));
        }
        Ok(())
    }

    /// Effective axial diffusion coefficient.
    pub fn d_eff(&self) -> f64 {
        let va = self.v_eff * self.a_c;
        match self.mode {
            ArisTaylorMode::Printed => 1.0 + va * va / (48.0 * self.diffusion),
            ArisTaylorMode::Classic => self.diffusion + va * va / (48.0 * self.diffusion),
        }
    }

    /// Fraction of the cross-section covered by the receiver.
    pub fn area_fraction(&self) -> f64 {
        area_fraction(self.a_c, self.l_rho, self.l_phi)
    }

    /// Receiver volume.
    pub fn v_rx(&self) -> f64 {
        self.area_fraction() * PI * self.a_c * self.a_c * self.l_z
    }
}

fn area_fraction(a_c: f64, l_rho: f64, l_phi: f64) -> f64 {
    l_phi * (2.0 * a_c * l_rho - l_rho * l_rho) / (2.0 * PI * a_c * a_c)
}

/// Aris–Taylor dispersion-regime CIR.
pub fn dispersion_regime_cir(m: &DispersionDuct, t: f64) -> Result<f64> {
    m.validate()?;
    if t <= 0.0 {
        return zero_limit(t);
    }
    let de = m.d_eff();
    let mean = m.v_eff * t;
    if m.uca {
        let pref = m.v_rx() / (PI * m.a_c * m.a_c);
        Ok(pref * (-(m.d_z - mean).powi(2) / (4.0 * de * t)).exp() / (4.0 * PI * de * t).sqrt())
    } else {
        let s = (2.0 * de * t).sqrt();
        let lo = q_function((m.d_z - 0.5 * m.l_z - mean) / s);
        let hi = q_function((m.d_z + 0.5 * m.l_z - mean) / s);
        Ok(m.area_fraction() * (lo - hi))
    }
}

impl FlowDominantDuct {
    pub fn validate(&self) -> Result<()> {
        require_positive("a_c", self.a_c)?;
        require_positive("v_eff", self.v_eff)?;
        require_positive("l_rho", self.l_rho)?;
        require_positive("l_phi", self.l_phi)?;
        require_positive("l_z", self.l_z)?;
        if self.l_rho > self.a_c {
            return Err(domain!("l_rho={} exceeds a_c={}", self.l_rho, self.a_c));
        }
        if self.d_z - 0.5 * self.l_z < 0.0 {
            return Err(domain!("receiver must lie downstream of the release plane"));
        }
        if let Release::Point { rho_tx } = self.release {
            if rho_tx < self.a_c - self.l_rho || rho_tx > self.a_c {
                return Err(domain!(
                    "point release rho_tx={rho_tx} must lie in [a_c - l_rho, a_c] = [{}, {}]",
                    self.a_c - self.l_rho,
                    self.a_c
                ));
            }
        }
        Ok(())
    }

    /// Times at which the receiver's near and far faces are first reached by the
    /// fastest molecules of the receiver's radial band.
    pub fn hit_times(&self) -> (f64, f64) {
        let band = 1.0 - (1.0 - self.l_rho / self.a_c).powi(2);
        let denom = 2.0 * self.v_eff * band;
        ((self.d_z - 0.5 * self.l_z) / denom, (self.d_z + 0.5 * self.l_z) / denom)
    }
}

/// Flow-dominant-regime CIR (diffusion neglected).
pub fn flow_dominant_cir(m: &FlowDominantDuct, t: f64) -> Result<f64> {
    m.validate()?;
    if t < 0.0 || t.is_nan() {
        return Err(domain!("t must be >= 0, got {t}"));
    }
    match m.release {
        Release::Uniform => {
            let (t1, t2) = m.hit_times();
            if t <= t1 {
                return Ok(0.0);
            }
            let sector = m.l_phi / (2.0 * PI);
            if t < t2 {
                Ok(area_fraction(m.a_c, m.l_rho, m.l_phi)
                    - sector * (m.d_z - 0.5 * m.l_z) / (2.0 * m.v_eff * t))
            } else {
                Ok(sector * m.l_z / (2.0 * m.v_eff * t))
            }
        }
        Release::Point { rho_tx } => {
            let z = crate::physics::poiseuille_speed(2.0 * m.v_eff, m.a_c, rho_tx) * t;
            let u = (z - m.d_z) / m.l_z;
            Ok(if u.abs() <= 0.5 { 1.0 } else { 0.0 })
        }
    }
}

impl EnzymaticApprox {
    pub fn validate(&self) -> Result<()> {
        PassiveUca { d0: self.d0, diffusion: self.diffusion, v_rx: self.v_rx }.validate()?;
        for (name, v) in [
            ("kappa_f", self.kappa_f),
            ("kappa_b", self.kappa_b),
            ("kappa_d", self.kappa_d),
            ("c_E", self.c_e),
            ("c_AE", self.c_ae),
        ] {
            require_non_negative(name, v)?;
        }
        Ok(())
    }

    /// Effective first-order degradation rate of the exponential factor.
    pub fn effective_rate(&self) -> f64 {
        match self.variant {
            EnzymaticVariant::App1 | EnzymaticVariant::LowerBound => self.kappa_f * self.c_e,
            EnzymaticVariant::App3 => {
                let denom = self.kappa_b + self.kappa_d;
                if denom == 0.0 {
                    0.0
                } else {
                    self.kappa_f * self.kappa_d / denom * self.c_e
                }
            }
        }
    }
}

/// CIR of a passive UCA receiver under enzymatic degradation.
pub fn enzymatic_cir(m: &EnzymaticApprox, t: f64) -> Result<f64> {
    m.validate()?;
    if t <= 0.0 {
        return zero_limit(t);
    }
    let decayed = uca_kernel(m.d0, m.diffusion, m.v_rx, t) * (-m.effective_rate() * t).exp();
    Ok(match m.variant {
        EnzymaticVariant::App1 => decayed + m.kappa_b * m.c_ae * t,
        EnzymaticVariant::LowerBound | EnzymaticVariant::App3 => decayed,
    })
}
