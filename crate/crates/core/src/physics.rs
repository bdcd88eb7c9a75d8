//! Transport and reaction primitives: particle steps, closed-form
//! concentration fields, regime numbers and reaction kinetics.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, require_non_negative, require_positive, Error, Result};

/// Boltzmann constant in J/K, fixed at three significant digits.
pub const K_B: f64 = 1.38e-23;

/// Cartesian position or vector in meters (or any SI vector quantity).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpacePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Vectors share the point representation.
pub type Vec3 = SpacePoint;

impl SpacePoint {
    pub const ORIGIN: SpacePoint = SpacePoint { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Builds a point from cylindrical coordinates about the z axis.
    pub fn from_cylindrical(rho: f64, phi: f64, z: f64) -> Self {
        Self::new(rho * phi.cos(), rho * phi.sin(), z)
    }

    /// Radial distance from the z axis.
    pub fn rho(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Azimuth in `(-π, π]`.
    pub fn phi(&self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn dot(&self, o: &SpacePoint) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn distance(&self, o: &SpacePoint) -> f64 {
        (*self - *o).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Component along axis 0, 1 or 2.
    pub fn axis(&self, k: usize) -> f64 {
        match k {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    pub fn set_axis(&mut self, k: usize, v: f64) {
        match k {
            0 => self.x = v,
            1 => self.y = v,
            _ => self.z = v,
        }
    }
}

impl Add for SpacePoint {
    type Output = SpacePoint;
    fn add(self, o: SpacePoint) -> SpacePoint {
        SpacePoint::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for SpacePoint {
    fn add_assign(&mut self, o: SpacePoint) {
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
    }
}

impl Sub for SpacePoint {
    type Output = SpacePoint;
    fn sub(self, o: SpacePoint) -> SpacePoint {
        SpacePoint::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for SpacePoint {
    type Output = SpacePoint;
    fn mul(self, s: f64) -> SpacePoint {
        SpacePoint::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for SpacePoint {
    type Output = SpacePoint;
    fn neg(self) -> SpacePoint {
        SpacePoint::new(-self.x, -self.y, -self.z)
    }
}

/// Properties of the fluid carrying the signaling molecules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidMedium {
    /// Diffusion coefficient, m²/s.
    pub d: f64,
    /// Dynamic viscosity, kg/(m·s).
    pub eta: f64,
    /// Temperature, K.
    pub temperature: f64,
    /// Kinematic viscosity, m²/s.
    pub nu: f64,
    /// Friction coefficient, kg/s. Derived from `zeta·D = k_B·T` when absent.
    pub zeta: Option<f64>,
}

impl FluidMedium {
    pub fn validate(&self) -> Result<()> {
        require_positive("D", self.d)?;
        require_positive("eta", self.eta)?;
        require_positive("T", self.temperature)?;
        require_positive("nu", self.nu)?;
        if let Some(z) = self.zeta {
            require_positive("zeta", z)?;
        }
        Ok(())
    }

    /// Friction coefficient, explicit or from the Einstein relation.
    pub fn friction(&self) -> Result<f64> {
        match self.zeta {
            Some(z) => Ok(z),
            None => friction_from_diffusion(self.d, self.temperature),
        }
    }
}

/// Velocity field of the medium.
#[derive(Clone, Default)]
pub enum FlowField {
    #[default]
    None,
    UniformConstant {
        v: Vec3,
    },
    UniformTimeVarying(Arc<dyn Fn(f64) -> Vec3 + Send + Sync>),
    /// Laminar profile along +z inside a duct of radius `a_c` centered on the z axis.
    Poiseuille {
        v0: f64,
        a_c: f64,
    },
}

impl fmt::Debug for FlowField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowField::None => write!(f, "None"),
            FlowField::UniformConstant { v } => write!(f, "UniformConstant {{ v: {v:?} }}"),
            FlowField::UniformTimeVarying(_) => write!(f, "UniformTimeVarying(<fn>)"),
            FlowField::Poiseuille { v0, a_c } => write!(f, "Poiseuille {{ v0: {v0}, a_c: {a_c} }}"),
        }
    }
}

impl FlowField {
    pub fn validate(&self) -> Result<()> {
        if let FlowField::Poiseuille { v0, a_c } = self {
            require_positive("a_c", *a_c)?;
            if !v0.is_finite() {
                return Err(domain!("v0 must be finite"));
            }
        }
        Ok(())
    }

    pub fn is_none(&self) -> bool {
        matches!(self, FlowField::None)
    }

    /// Velocity at `pos` and time `t`.
    pub fn velocity(&self, pos: &SpacePoint, t: f64) -> Result<Vec3> {
        match self {
            FlowField::None => Ok(Vec3::ORIGIN),
            FlowField::UniformConstant { v } => Ok(*v),
            FlowField::UniformTimeVarying(f) => Ok(f(t)),
            FlowField::Poiseuille { v0, a_c } => {
                let rho = pos.rho();
                if rho > *a_c {
                    return Err(domain!("Poiseuille flow evaluated at rho={rho} > a_c={a_c}"));
                }
                Ok(Vec3::new(0.0, 0.0, poiseuille_speed(*v0, *a_c, rho)))
            }
        }
    }
}

/// Axial speed of the Poiseuille profile at radius `rho`.
pub fn poiseuille_speed(v0: f64, a_c: f64, rho: f64) -> f64 {
    v0 * (1.0 - (rho / a_c).powi(2))
}

/// Unimolecular degradation `A → ∅` of order 0, 1 or 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniDegradation {
    pub kappa: f64,
    pub order: u8,
}

/// Reaction mechanisms acting on the signaling molecules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ReactionSpec {
    UniDegradation(UniDegradation),
    /// `A + B ⇌ AB` with forward `kappa_f` and backward `kappa_b`.
    Bimolecular { kappa_f: f64, kappa_b: f64 },
    /// `A + E ⇌ AE → E + product`.
    Enzymatic { kappa_f: f64, kappa_b: f64, kappa_d: f64 },
}

impl ReactionSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ReactionSpec::UniDegradation(u) => {
                require_non_negative("kappa", u.kappa)?;
                if u.order > 2 {
                    return Err(domain!("degradation order must be 0, 1 or 2, got {}", u.order));
                }
            }
            ReactionSpec::Bimolecular { kappa_f, kappa_b } => {
                require_non_negative("kappa_f", kappa_f)?;
                require_non_negative("kappa_b", kappa_b)?;
            }
            ReactionSpec::Enzymatic { kappa_f, kappa_b, kappa_d } => {
                require_non_negative("kappa_f", kappa_f)?;
                require_non_negative("kappa_b", kappa_b)?;
                require_non_negative("kappa_d", kappa_d)?;
            }
        }
        Ok(())
    }
}

/// Instantaneous release of `n` molecules at `d0` and time `t0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSource {
    pub n: f64,
    pub d0: SpacePoint,
    pub t0: f64,
}

impl PointSource {
    pub fn new(n: f64, d0: SpacePoint, t0: f64) -> Self {
        Self { n, d0, t0 }
    }

    fn elapsed(&self, t: f64) -> Result<f64> {
        require_non_negative("N", self.n)?;
        let dt = t - self.t0;
        if dt.is_nan() || dt <= 0.0 {
            return Err(domain!("evaluation time t={t} must exceed release time t0={}", self.t0));
        }
        Ok(dt)
    }
}

/// Diffusion coefficient of a sphere of radius `r` in a fluid of viscosity `eta` at temperature `t`.
pub fn einstein_diffusion(t: f64, eta: f64, r: f64) -> Result<f64> {
    require_positive("T", t)?;
    require_positive("eta", eta)?;
    require_positive("R", r)?;
    Ok(K_B * t / (6.0 * PI * eta * r))
}

/// Friction coefficient from `zeta·D = k_B·T`.
pub fn friction_from_diffusion(d: f64, t: f64) -> Result<f64> {
    require_positive("D", d)?;
    require_positive("T", t)?;
    Ok(K_B * t / d)
}

/// One Brownian step: independent `N(0, 2·D·dt)` increments per axis.
pub fn brownian_step<R: Rng + ?Sized>(pos: SpacePoint, d: f64, dt: f64, rng: &mut R) -> SpacePoint {
    let s = (2.0 * d * dt).sqrt();
    if s == 0.0 {
        return pos;
    }
    let gx: f64 = rng.sample(StandardNormal);
    let gy: f64 = rng.sample(StandardNormal);
    let gz: f64 = rng.sample(StandardNormal);
    SpacePoint::new(pos.x + s * gx, pos.y + s * gy, pos.z + s * gz)
}

/// Advective displacement `pos + v(pos, t)·dt`.
pub fn advect_step(pos: SpacePoint, flow: &FlowField, t: f64, dt: f64) -> Result<SpacePoint> {
    if flow.is_none() {
        return Ok(pos);
    }
    Ok(pos + flow.velocity(&pos, t)? * dt)
}

/// Free-space concentration after an impulsive point release.
pub fn point_source_concentration(src: &PointSource, d: f64, at: SpacePoint, t: f64) -> Result<f64> {
    advected_concentration(src, d, Vec3::ORIGIN, at, t)
}

/// Concentration in a circular duct of radius `a_c` when the release is spread over the cross-section.
pub fn duct_cross_section_concentration(
    n: f64,
    a_c: f64,
    z0: f64,
    t0: f64,
    d: f64,
    z: f64,
    t: f64,
) -> Result<f64> {
    require_positive("a_c", a_c)?;
    require_positive("D", d)?;
    let dt = PointSource::new(n, SpacePoint::new(0.0, 0.0, z0), t0).elapsed(t)?;
    let four_dt = 4.0 * d * dt;
    Ok(n / (PI * a_c * a_c * (PI * four_dt).sqrt()) * (-(z - z0).powi(2) / four_dt).exp())
}

/// Concentration under a constant uniform flow `v`.
pub fn advected_concentration(src: &PointSource, d: f64, v: Vec3, at: SpacePoint, t: f64) -> Result<f64> {
    require_positive("D", d)?;
    let dt = src.elapsed(t)?;
    let four_dt = 4.0 * d * dt;
    let offset = at - v * dt - src.d0;
    Ok(src.n / (PI * four_dt).powf(1.5) * (-offset.norm_sq() / four_dt).exp())
}

/// Concentration with uniform flow and first-order degradation.
pub fn reaction_advection_diffusion_concentration(
    src: &PointSource,
    d: f64,
    v: Vec3,
    reaction: &ReactionSpec,
    at: SpacePoint,
    t: f64,
) -> Result<f64> {
    let kappa = match reaction {
        ReactionSpec::UniDegradation(UniDegradation { kappa, order: 1 }) => *kappa,
        other => {
            return Err(Error::Unsupported(format!(
                "closed-form solution requires first-order degradation, got {other:?}"
            )))
        }
    };
    require_non_negative("kappa", kappa)?;
    let base = advected_concentration(src, d, v, at, t)?;
    Ok(base * (-kappa * (t - src.t0)).exp())
}

/// Well-mixed concentration after degrading for `dt`.
pub fn degradation_decay(c0: f64, spec: UniDegradation, dt: f64) -> Result<f64> {
    require_non_negative("c0", c0)?;
    require_non_negative("dt", dt)?;
    require_non_negative("kappa", spec.kappa)?;
    match spec.order {
        0 => Ok((c0 - spec.kappa * dt).max(0.0)),
        1 => Ok(c0 * (-spec.kappa * dt).exp()),
        2 => {
            if c0 == 0.0 {
                Ok(0.0)
            } else {
                Ok(1.0 / (spec.kappa * dt + 1.0 / c0))
            }
        }
        o => Err(domain!("degradation order must be 0, 1 or 2, got {o}")),
    }
}

/// Drift velocity of a particle under force `f` with friction `zeta`.
pub fn stokes_velocity(f: Vec3, zeta: f64) -> Result<Vec3> {
    require_positive("zeta", zeta)?;
    Ok(f * (1.0 / zeta))
}

/// Dimensionless numbers characterizing a flow channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeNumbers {
    /// Reynolds number.
    pub re: f64,
    /// Péclet number over the length `d_c`.
    pub pe: f64,
    /// Dispersion factor.
    pub alpha_d: f64,
}

/// Reynolds, Péclet and dispersion numbers.
///
/// `d_eff` is the characteristic length for Re, `d_c` the cross-section
/// length and `d_z` the axial transmitter–receiver distance.
pub fn regime_numbers(v_eff: f64, d_eff: f64, d_c: f64, d_z: f64, d: f64, nu: f64) -> Result<RegimeNumbers> {
    require_positive("nu", nu)?;
    require_positive("D", d)?;
    require_positive("d_c", d_c)?;
    require_positive("v_eff", v_eff.abs())?;
    Ok(RegimeNumbers {
        re: d_eff * v_eff / nu,
        pe: v_eff * d_c / d,
        alpha_d: d * d_z / (v_eff * d_c * d_c),
    })
}

/// Rate law `κ·∏ c_i^{ε_i}`.
pub fn reaction_rate(kappa: f64, concentrations: &[f64], orders: &[u32]) -> Result<f64> {
    if concentrations.len() != orders.len() {
        return Err(domain!(
            "{} concentrations but {} orders",
            concentrations.len(),
            orders.len()
        ));
    }
    require_non_negative("kappa", kappa)?;
    let mut rate = kappa;
    for (&c, &e) in concentrations.iter().zip(orders) {
        require_non_negative("concentration", c)?;
        rate *= c.powi(e as i32);
    }
    Ok(rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use approx::assert_relative_eq;

    #[test]
    fn einstein_example() {
        let d = einstein_diffusion(293.0, 1e-3, 1e-9).unwrap();
        assert_relative_eq!(d, 1.38e-23 * 293.0 / (6.0 * PI * 1e-12), max_relative = 1e-14);
        assert!((d - 2.145e-10).abs() < 1e-13);
        let d2 = einstein_diffusion(293.0, 1e-3, 2e-9).unwrap();
        assert_relative_eq!(d2, d / 2.0, max_relative = 1e-14);
        assert!(einstein_diffusion(0.0, 1e-3, 1e-9).is_err());
    }

    #[test]
    fn friction_consistency() {
        let d = einstein_diffusion(293.0, 1e-3, 1e-9).unwrap();
        let zeta = friction_from_diffusion(d, 293.0).unwrap();
        assert_relative_eq!(zeta, 6.0 * PI * 1e-3 * 1e-9, max_relative = 1e-12);
        let v = stokes_velocity(Vec3::new(2e-12, 0.0, 0.0), zeta).unwrap();
        let v2 = stokes_velocity(Vec3::new(4e-12, 0.0, 0.0), zeta).unwrap();
        assert_relative_eq!(v2.x, 2.0 * v.x, max_relative = 1e-15);
        assert_eq!(stokes_velocity(Vec3::ORIGIN, zeta).unwrap(), Vec3::ORIGIN);
        assert!(stokes_velocity(Vec3::ORIGIN, 0.0).is_err());
    }

    #[test]
    fn zero_step_is_identity() {
        let mut rng = stream(1, 0);
        let p = SpacePoint::new(1.0, 2.0, 3.0);
        assert_eq!(brownian_step(p, 1e-9, 0.0, &mut rng), p);
    }

    #[test]
    fn brownian_variance() {
        let mut rng = stream(2, 0);
        let (d, dt) = (1e-9, 1e-3);
        let n = 1_000_000;
        let (mut sx, mut sxx, mut msd) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let p = brownian_step(SpacePoint::ORIGIN, d, dt, &mut rng);
            sx += p.x;
            sxx += p.x * p.x;
            msd += p.norm_sq();
        }
        let nf = n as f64;
        let var = sxx / nf - (sx / nf).powi(2);
        assert_relative_eq!(var, 2.0 * d * dt, max_relative = 0.01);
        assert_relative_eq!(msd / nf, 6.0 * d * dt, max_relative = 0.01);
    }

    #[test]
    fn advection_examples() {
        let p = SpacePoint::new(0.1, 0.2, 0.3);
        assert_eq!(advect_step(p, &FlowField::None, 0.0, 1.0).unwrap(), p);
        let q = advect_step(
            p,
            &FlowField::UniformConstant { v: Vec3::new(1e-3, 0.0, 0.0) },
            0.0,
            1.0,
        )
        .unwrap();
        assert_relative_eq!(q.x - p.x, 1e-3, max_relative = 1e-12);
        let flow = FlowField::Poiseuille { v0: 2e-3, a_c: 1e-5 };
        let c = advect_step(SpacePoint::ORIGIN, &flow, 0.0, 0.5).unwrap();
        assert_relative_eq!(c.z, 1e-3, max_relative = 1e-15);
        let w = advect_step(SpacePoint::new(1e-5, 0.0, 0.0), &flow, 0.0, 0.5).unwrap();
        assert_eq!(w.z, 0.0);
        assert!(advect_step(SpacePoint::new(2e-5, 0.0, 0.0), &flow, 0.0, 0.5).is_err());
        let tv = FlowField::UniformTimeVarying(Arc::new(|t| Vec3::new(t, 0.0, 0.0)));
        assert_relative_eq!(advect_step(SpacePoint::ORIGIN, &tv, 2.0, 0.5).unwrap().x, 1.0);
    }

    #[test]
    fn point_source_rejects_t0() {
        let src = PointSource::new(1e4, SpacePoint::ORIGIN, 0.0);
        assert!(point_source_concentration(&src, 1e-9, SpacePoint::ORIGIN, 0.0).is_err());
        assert!(point_source_concentration(&src, 1e-9, SpacePoint::ORIGIN, -1.0).is_err());
    }

    #[test]
    fn advected_reduces_to_diffusion() {
        let src = PointSource::new(1e4, SpacePoint::ORIGIN, 0.0);
        let at = SpacePoint::new(4e-7, 0.0, 0.0);
        for &t in &[1e-5, 5e-5, 2e-4] {
            let a = point_source_concentration(&src, 4.5e-10, at, t).unwrap();
            let b = advected_concentration(&src, 4.5e-10, Vec3::ORIGIN, at, t).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn reaction_factorization() {
        let src = PointSource::new(1e4, SpacePoint::ORIGIN, 0.0);
        let v = Vec3::new(1e-3, 0.0, 0.0);
        let at = SpacePoint::new(4e-7, 1e-8, 0.0);
        for &kappa in &[0.0, 1e4, 2e4] {
            let spec = ReactionSpec::UniDegradation(UniDegradation { kappa, order: 1 });
            for &t in &[1e-5, 6e-5, 3e-4] {
                let r = reaction_advection_diffusion_concentration(&src, 4.5e-10, v, &spec, at, t).unwrap();
                let a = advected_concentration(&src, 4.5e-10, v, at, t).unwrap();
                assert_relative_eq!(r / a, (-kappa * t).exp(), max_relative = 1e-13);
            }
        }
        let order2 = ReactionSpec::UniDegradation(UniDegradation { kappa: 1.0, order: 2 });
        assert!(matches!(
            reaction_advection_diffusion_concentration(&src, 4.5e-10, v, &order2, at, 1e-5),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn duct_concentration_peak() {
        let (n, a, d, t) = (1e3, 1e-5, 1e-10, 2.0);
        let c = duct_cross_section_concentration(n, a, 0.0, 0.0, d, 0.0, t).unwrap();
        assert_relative_eq!(c, n / (PI * a * a * (4.0 * PI * d * t).sqrt()), max_relative = 1e-14);
        let l = duct_cross_section_concentration(n, a, 0.0, 0.0, d, -3e-5, t).unwrap();
        let r = duct_cross_section_concentration(n, a, 0.0, 0.0, d, 3e-5, t).unwrap();
        assert_eq!(l, r);
    }

    #[test]
    fn degradation_examples() {
        for order in 0..=2 {
            let s = UniDegradation { kappa: 1.0, order };
            assert_eq!(degradation_decay(2.0, s, 0.0).unwrap(), 2.0);
        }
        let zero = UniDegradation { kappa: 0.5, order: 0 };
        assert_eq!(degradation_decay(2.0, zero, 4.0).unwrap(), 0.0);
        assert_eq!(degradation_decay(2.0, zero, 10.0).unwrap(), 0.0);
        assert!(degradation_decay(2.0, zero, 3.9).unwrap() > 0.0);
        let first = degradation_decay(1.0, UniDegradation { kappa: 1.0, order: 1 }, 20.0).unwrap();
        let second = degradation_decay(1.0, UniDegradation { kappa: 1.0, order: 2 }, 20.0).unwrap();
        assert!(second > first);
        assert_eq!(degradation_decay(0.0, UniDegradation { kappa: 1.0, order: 2 }, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn regime_examples() {
        let r = regime_numbers(1e-3, 1e-6, 1e-6, 1e-5, 1e-9, 1e-6).unwrap();
        assert_relative_eq!(r.pe, 1.0, max_relative = 1e-12);
        let d_bar = 1e-5 / 1e-6;
        assert_relative_eq!(r.alpha_d, d_bar * d_bar / (1e-3 * 1e-5 / 1e-9), max_relative = 1e-12);
        let a_c = 1e-5;
        let expected = [0.1, 1.0, 10.0];
        for (v0, want) in [1e-2, 1e-3, 1e-4].iter().zip(expected) {
            let r = regime_numbers(v0 / 2.0, 2.0 * a_c, 0.1 * a_c, 5e-5, 1e-11, 1e-6).unwrap();
            assert_relative_eq!(r.alpha_d, want, max_relative = 1e-12);
        }
        assert!(regime_numbers(0.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn rate_law() {
        assert_eq!(reaction_rate(2.0, &[3.0], &[1]).unwrap(), 6.0);
        assert_eq!(reaction_rate(2.0, &[0.0, 5.0], &[1, 2]).unwrap(), 0.0);
        assert!(reaction_rate(2.0, &[-1.0], &[1]).is_err());
        let (kf, ca, cb) = (3.0, 1e-3, 1e3);
        let exact = reaction_rate(kf, &[ca, cb], &[1, 1]).unwrap();
        let pseudo = reaction_rate(kf * cb, &[ca], &[1]).unwrap();
        assert_relative_eq!(exact, pseudo, max_relative = 1e-14);
    }

    #[test]
    fn cylindrical_round_trip() {
        let p = SpacePoint::from_cylindrical(2.5e-6, 1.2, -3e-6);
        let q = SpacePoint::from_cylindrical(p.rho(), p.phi(), p.z);
        assert_relative_eq!(p.x, q.x, max_relative = 1e-12);
        assert_relative_eq!(p.y, q.y, max_relative = 1e-12);
        assert_relative_eq!(p.rho(), 2.5e-6, max_relative = 1e-12);
    }
}
