//! Statistics of the time-variant CIR when transmitter and receiver diffuse.
//!
//! The transmitter–receiver vector performs Brownian motion with coefficient
//! `D2 = D_tx + D_rx` over the release-time scale `τ`, starting at distance
//! `d0`; molecules move relative to the receiver with `D1 = D + D_rx`. The
//! expected count is `r̄ = N_tx·V_rx/(4πD1t)^{3/2}·exp(−d²/(4D1t))`.

use std::f64::consts::PI;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, require_non_negative, require_positive, Error, Result};
use crate::physics::SpacePoint;
use crate::rng::{par_indexed, stream};

/// Mobile transceiver pair with a passive UCA receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MobileChannel {
    /// Diffusion coefficient of the signaling molecules.
    pub diffusion: f64,
    pub d_tx: f64,
    pub d_rx: f64,
    pub d0: f64,
    pub v_rx: f64,
    pub n_tx: f64,
}

impl MobileChannel {
    pub fn d1(&self) -> f64 {
        self.diffusion + self.d_rx
    }

    pub fn d2(&self) -> f64 {
        self.d_tx + self.d_rx
    }

    pub fn validate(&self) -> Result<()> {
        require_non_negative("D", self.diffusion)?;
        require_non_negative("D_tx", self.d_tx)?;
        require_non_negative("D_rx", self.d_rx)?;
        require_positive("D1", self.d1())?;
        require_positive("d0", self.d0)?;
        require_positive("V_rx", self.v_rx)?;
        require_non_negative("N_tx", self.n_tx)
    }

    /// Time of the peak of `r̄(t, τ = 0)`.
    pub fn peak_time(&self) -> f64 {
        self.d0 * self.d0 / (6.0 * self.d1())
    }
}

fn check_times(ch: &MobileChannel, t: f64, tau: f64) -> Result<()> {
    ch.validate()?;
    require_positive("t", t)?;
    require_non_negative("tau", tau)
}

/// Density of the transmitter–receiver vector at release time `tau`,
/// centered at `(d0, 0, 0)`.
pub fn displacement_pdf(ch: &MobileChannel, tau: f64, d: SpacePoint) -> Result<f64> {
    ch.validate()?;
    require_non_negative("tau", tau)?;
    let var = 2.0 * ch.d2() * tau;
    if var == 0.0 {
        return Err(domain!("D2·tau = 0: the displacement is a point mass at d(0)"));
    }
    let dx = d - SpacePoint::new(ch.d0, 0.0, 0.0);
    Ok((-dx.norm_sq() / (2.0 * var)).exp() / (2.0 * PI * var).powf(1.5))
}

/// CIR for a transmitter–receiver distance `d`.
pub fn cir_given_distance(ch: &MobileChannel, t: f64, d: f64) -> Result<f64> {
    ch.validate()?;
    require_positive("t", t)?;
    require_non_negative("d", d)?;
    let s = 4.0 * ch.d1() * t;
    Ok(ch.v_rx / (PI * s).powf(1.5) * (-d * d / s).exp())
}

/// Mean of `r̄(t, τ)` over the transceiver displacement.
pub fn mobile_mean(ch: &MobileChannel, t: f64, tau: f64) -> Result<f64> {
    check_times(ch, t, tau)?;
    let s = ch.d1() * t + ch.d2() * tau;
    Ok(ch.n_tx * ch.v_rx / (4.0 * PI * s).powf(1.5) * (-ch.d0 * ch.d0 / (4.0 * s)).exp())
}

/// Second moment `E[r̄(t, τ)²]`.
pub fn mobile_second_moment(ch: &MobileChannel, t: f64, tau: f64) -> Result<f64> {
    check_times(ch, t, tau)?;
    let a = ch.d1() * t;
    let b = a + 2.0 * ch.d2() * tau;
    Ok(ch.n_tx.powi(2) * ch.v_rx.powi(2) * (-ch.d0 * ch.d0 / (2.0 * b)).exp()
        / ((4.0 * PI * a).powf(1.5) * (4.0 * PI * b).powf(1.5)))
}

/// Variance of `r̄(t, τ)`, floored at zero against rounding.
pub fn mobile_variance(ch: &MobileChannel, t: f64, tau: f64) -> Result<f64> {
    Ok((mobile_second_moment(ch, t, tau)? - mobile_mean(ch, t, tau)?.powi(2)).max(0.0))
}

/// Cross-correlation `E[r̄(t, τ1)·r̄(t, τ2)]`; the arguments may come in either order.
pub fn mobile_cross_correlation(ch: &MobileChannel, t: f64, tau1: f64, tau2: f64) -> Result<f64> {
    check_times(ch, t, tau1)?;
    check_times(ch, t, tau2)?;
    let (t1, t2) = if tau1 <= tau2 { (tau1, tau2) } else { (tau2, tau1) };
    if t1 == t2 || ch.d2() == 0.0 {
        return mobile_second_moment(ch, t, t1);
    }
    if t1 == 0.0 {
        // d(0) is deterministic, so the expectation factorizes.
        return Ok(cir_given_distance(ch, t, ch.d0)? * ch.n_tx * mobile_mean(ch, t, t2)?);
    }
    let d1 = ch.d1();
    let d2 = ch.d2();
    let phi = ch.v_rx / (4.0 * PI * d1 * t).powf(1.5);
    let alpha = 1.0 / (4.0 * d1 * t);
    let b1 = 1.0 / (4.0 * d2 * t1);
    let b2 = 1.0 / (4.0 * d2 * (t2 - t1));
    let theta = (alpha + b1) * (alpha + b2) + alpha * b2;
    // (2π)³·λ(τ1)·λ(Δτ)/(4θ)^{3/2} simplifies to (β1·β2/θ)^{3/2}.
    let pref = (b1 * b2 / theta).powf(1.5);
    let expo = -b1 * ch.d0 * ch.d0 * (1.0 - (alpha + b2) * b1 / theta);
    Ok(ch.n_tx.powi(2) * phi * phi * pref * expo.exp())
}

/// Correlation coefficient of the mean signal at release times `tau1`, `tau2`.
pub fn rho_tau(ch: &MobileChannel, t: f64, tau1: f64, tau2: f64) -> Result<f64> {
    let cross = mobile_cross_correlation(ch, t, tau1, tau2)?;
    let m1 = mobile_mean(ch, t, tau1)?;
    let m2 = mobile_mean(ch, t, tau2)?;
    let s1 = mobile_variance(ch, t, tau1)?.sqrt();
    let s2 = mobile_variance(ch, t, tau2)?.sqrt();
    if s1 == 0.0 || s2 == 0.0 {
        return Err(domain!("correlation undefined: the mean signal has zero variance"));
    }
    Ok(((cross - m1 * m2) / (s1 * s2)).clamp(-1.0, 1.0))
}

/// Smallest `Δτ` with `ρ_τ(τ1, τ1 + Δτ) < zeta`: geometric bracketing from
/// `τ1·1e−6`, then 60 bisection steps.
pub fn coherence_time(ch: &MobileChannel, t: f64, tau1: f64, zeta: f64) -> Result<f64> {
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(domain!("zeta must lie in (0, 1), got {zeta}"));
    }
    require_positive("tau1", tau1)?;
    let rho = |dt: f64| rho_tau(ch, t, tau1, tau1 + dt);
    let mut lo = 0.0;
    let mut hi = tau1 * 1e-6;
    let mut doublings = 0;
    while rho(hi)? >= zeta {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::Convergence { what: "coherence time search horizon".into(), bound: hi });
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if rho(mid)? < zeta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Distribution of `h(t, τ)` used to model the mean signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CirDistribution {
    /// `D2·τ = 0`: the CIR is deterministic.
    PointMass { h: f64 },
    /// `ln h ~ N(mu, sigma2)`; `valid` reports `D2·τ ≤ d0²/200`.
    Lognormal { mu: f64, sigma2: f64, valid: bool },
}

/// Lognormal approximation of the CIR distribution at release time `tau`.
pub fn lognormal_approx(ch: &MobileChannel, t: f64, tau: f64) -> Result<CirDistribution> {
    check_times(ch, t, tau)?;
    let x = ch.d2() * tau;
    if x == 0.0 {
        return Ok(CirDistribution::PointMass { h: cir_given_distance(ch, t, ch.d0)? });
    }
    let d1t = ch.d1() * t;
    let d02 = ch.d0 * ch.d0;
    let mu = (ch.v_rx / (4.0 * PI * d1t).powf(1.5)).ln() - x / (4.0 * d1t) * (6.0 + d02 / x);
    let sigma2 = (x / (2.0 * d1t)).powi(2) * (6.0 + 2.0 * d02 / x);
    Ok(CirDistribution::Lognormal { mu, sigma2, valid: x <= d02 / 200.0 })
}

impl CirDistribution {
    pub fn mean(&self) -> f64 {
        match *self {
            CirDistribution::PointMass { h } => h,
            CirDistribution::Lognormal { mu, sigma2, .. } => (mu + 0.5 * sigma2).exp(),
        }
    }

    /// Density of `h`; errors for a point mass.
    pub fn pdf(&self, h: f64) -> Result<f64> {
        match *self {
            CirDistribution::PointMass { .. } => Err(domain!("point mass has no density")),
            CirDistribution::Lognormal { mu, sigma2, .. } => {
                if h <= 0.0 {
                    return Ok(0.0);
                }
                let z = h.ln() - mu;
                Ok((-z * z / (2.0 * sigma2)).exp() / (h * (2.0 * PI * sigma2).sqrt()))
            }
        }
    }

    /// Density of the mean signal `r̄ = n_tx·h`.
    pub fn mean_signal_pdf(&self, n_tx: f64, r: f64) -> Result<f64> {
        require_positive("N_tx", n_tx)?;
        Ok(self.pdf(r / n_tx)? / n_tx)
    }
}

/// Monte Carlo estimate of the two-time statistics of `r̄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobileMcEstimate {
    pub mean1: f64,
    pub mean2: f64,
    pub second1: f64,
    pub cross: f64,
    pub rho: f64,
    pub se_mean1: f64,
    pub se_mean2: f64,
    pub se_second1: f64,
    pub se_cross: f64,
    /// Grouped-jackknife standard error of `rho`.
    pub se_rho: f64,
}

/// Samples `d(τ1)` and `d(τ2) = d(τ1) + increment` as a Gaussian chain and
/// averages `r̄` products over `realizations`.
pub fn mobile_mc(
    ch: &MobileChannel,
    t: f64,
    tau1: f64,
    tau2: f64,
    realizations: usize,
    seed: u64,
) -> Result<MobileMcEstimate> {
    check_times(ch, t, tau1)?;
    check_times(ch, t, tau2)?;
    if !(tau2 > tau1) {
        return Err(domain!("require tau1 < tau2"));
    }
    const GROUPS: usize = 50;
    if realizations < 2 * GROUPS {
        return Err(domain!("at least {} realizations required", 2 * GROUPS));
    }
    let s1 = (2.0 * ch.d2() * tau1).sqrt();
    let s2 = (2.0 * ch.d2() * (tau2 - tau1)).sqrt();
    let samples = par_indexed(realizations, |i| {
        let mut rng = stream(seed, i);
        let n1 = Normal::new(0.0, s1).expect("finite sigma");
        let n2 = Normal::new(0.0, s2).expect("finite sigma");
        let p1 = SpacePoint::new(ch.d0 + n1.sample(&mut rng), n1.sample(&mut rng), n1.sample(&mut rng));
        let p2 = p1 + SpacePoint::new(n2.sample(&mut rng), n2.sample(&mut rng), n2.sample(&mut rng));
        let r1 = ch.n_tx * cir_given_distance(ch, t, p1.norm()).unwrap_or(f64::NAN);
        let r2 = ch.n_tx * cir_given_distance(ch, t, p2.norm()).unwrap_or(f64::NAN);
        (r1, r2)
    });
    let n = realizations as f64;
    let mean_se = |f: &dyn Fn(&(f64, f64)) -> f64| {
        let m = samples.iter().map(f).sum::<f64>() / n;
        let v = samples.iter().map(|s| (f(s) - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    };
    let (mean1, se_mean1) = mean_se(&|s| s.0);
    let (mean2, se_mean2) = mean_se(&|s| s.1);
    let (second1, se_second1) = mean_se(&|s| s.0 * s.0);
    let (cross, se_cross) = mean_se(&|s| s.0 * s.1);
    let rho_of = |xs: &mut dyn Iterator<Item = &(f64, f64)>| -> f64 {
        let (mut k, mut a, mut b, mut aa, mut bb, mut ab) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for &(x, y) in xs {
            k += 1.0;
            a += x;
            b += y;
            aa += x * x;
            bb += y * y;
            ab += x * y;
        }
        let (ma, mb) = (a / k, b / k);
        (ab / k - ma * mb) / ((aa / k - ma * ma).sqrt() * (bb / k - mb * mb).sqrt())
    };
    let rho = rho_of(&mut samples.iter());
    let group = realizations / GROUPS;
    let leave_out: Vec<f64> = (0..GROUPS)
        .map(|g| {
            rho_of(&mut samples.iter().enumerate().filter(|(i, _)| i / group != g || *i >= group * GROUPS).map(|(_, s)| s))
        })
        .collect();
    let lm = leave_out.iter().sum::<f64>() / GROUPS as f64;
    let g = GROUPS as f64;
    let se_rho = ((g - 1.0) / g * leave_out.iter().map(|r| (r - lm).powi(2)).sum::<f64>()).sqrt();
    if !(mean1.is_finite() && rho.is_finite()) {
        return Err(Error::Numeric("Monte Carlo estimate is not finite".into()));
    }
    Ok(MobileMcEstimate { mean1, mean2, second1, cross, rho, se_mean1, se_mean2, se_second1, se_cross, se_rho })
}
