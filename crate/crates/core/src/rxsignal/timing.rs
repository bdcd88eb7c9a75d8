//! First-arrival delay distributions and the arrival-time density of a release.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, InverseGaussian, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, require_positive, Error, Result};
use crate::special::{erfc, ln_factorial};

/// Delay until first arrival at distance `d` in one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DelayModel {
    /// No flow: Lévy with scale `d²/(2D)`.
    Levy { d: f64, diffusion: f64 },
    /// Drift `v` toward the boundary: inverse Gaussian with mean `d/v` and shape `d²/(2D)`.
    InverseGaussian { d: f64, diffusion: f64, v: f64 },
}

/// `ln erfc(z)`, accurate where `erfc` underflows.
fn ln_erfc(z: f64) -> f64 {
    if z < 25.0 {
        erfc(z).ln()
    } else {
        let z2 = z * z;
        let series = 1.0 - 1.0 / (2.0 * z2) + 3.0 / (4.0 * z2 * z2) - 15.0 / (8.0 * z2 * z2 * z2);
        -z2 - (z * PI.sqrt()).ln() + series.ln()
    }
}

impl DelayModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DelayModel::Levy { d, diffusion } => {
                require_positive("d", d)?;
                require_positive("D", diffusion)
            }
            DelayModel::InverseGaussian { d, diffusion, v } => {
                require_positive("d", d)?;
                require_positive("D", diffusion)?;
                require_positive("v", v)
            }
        }
    }

    /// Shape (IG) or twice the scale (Lévy), `d²/(2D)`.
    fn lambda(&self) -> f64 {
        match *self {
            DelayModel::Levy { d, diffusion } | DelayModel::InverseGaussian { d, diffusion, .. } => {
                d * d / (2.0 * diffusion)
            }
        }
    }

    /// Mean delay; infinite for Lévy.
    pub fn mean(&self) -> f64 {
        match *self {
            DelayModel::Levy { .. } => f64::INFINITY,
            DelayModel::InverseGaussian { d, v, .. } => d / v,
        }
    }

    pub fn pdf(&self, t: f64) -> Result<f64> {
        self.validate()?;
        if t.is_nan() {
            return Err(domain!("t is NaN"));
        }
        if t <= 0.0 || t.is_infinite() {
            return Ok(0.0);
        }
        let lam = self.lambda();
        Ok(match *self {
            DelayModel::Levy { d, diffusion } => {
                d / (4.0 * PI * diffusion * t.powi(3)).sqrt() * (-d * d / (4.0 * diffusion * t)).exp()
            }
            DelayModel::InverseGaussian { .. } => {
                let mu = self.mean();
                (lam / (2.0 * PI * t.powi(3))).sqrt() * (-lam * (t - mu).powi(2) / (2.0 * mu * mu * t)).exp()
            }
        })
    }

    pub fn cdf(&self, t: f64) -> Result<f64> {
        self.validate()?;
        if t.is_nan() {
            return Err(domain!("t is NaN"));
        }
        if t <= 0.0 {
            return Ok(0.0);
        }
        if t.is_infinite() {
            return Ok(1.0);
        }
        let lam = self.lambda();
        Ok(match *self {
            DelayModel::Levy { .. } => erfc((lam / (2.0 * t)).sqrt()),
            DelayModel::InverseGaussian { .. } => {
                let mu = self.mean();
                let s = (lam / t).sqrt();
                // Φ(x) = erfc(−x/√2)/2; the second term is combined in log space.
                let first = 0.5 * erfc(-s * (t / mu - 1.0) / std::f64::consts::SQRT_2);
                let z = s * (t / mu + 1.0) / std::f64::consts::SQRT_2;
                let second = (2.0 * lam / mu + ln_erfc(z)).exp() * 0.5;
                (first + second).min(1.0)
            }
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        self.validate()?;
        match *self {
            DelayModel::Levy { .. } => {
                let z: f64 = rng.sample(StandardNormal);
                Ok(self.lambda() / (z * z))
            }
            DelayModel::InverseGaussian { .. } => Ok(InverseGaussian::new(self.mean(), self.lambda())
                .map_err(|e| Error::Numeric(format!("inverse Gaussian: {e}")))?
                .sample(rng)),
        }
    }
}

/// Joint density of the first `n` ordered arrival times `times` observed by `t`
/// when `n_tx` molecules are released at zero:
/// `n_tx!/(n_tx − n)! · Π f(t_i) · (1 − F(t))^{n_tx − n}`.
pub fn arrival_order_density(n_tx: u64, times: &[f64], t: f64, delay: &DelayModel) -> Result<f64> {
    let n = times.len() as u64;
    if n > n_tx {
        return Err(domain!("{n} arrivals exceed N_tx={n_tx}"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(domain!("arrival times must be ascending"));
    }
    if let Some(&first) = times.first() {
        if !(first > 0.0) {
            return Err(domain!("arrival times must be > 0"));
        }
    }
    if let Some(&last) = times.last() {
        if last > t {
            return Err(domain!("arrival time {last} exceeds observation time {t}"));
        }
    }
    let mut ln = ln_factorial(n_tx) - ln_factorial(n_tx - n);
    if n_tx > n {
        ln += (n_tx - n) as f64 * (1.0 - delay.cdf(t)?).ln();
    }
    for &ti in times {
        ln += delay.pdf(ti)?.ln();
    }
    Ok(ln.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, QuadOptions};
    use crate::rng::stream;
    use approx::assert_relative_eq;

    const LEVY: DelayModel = DelayModel::Levy { d: 1e-6, diffusion: 1e-10 };
    const IG: DelayModel = DelayModel::InverseGaussian { d: 1e-6, diffusion: 1e-10, v: 1e-4 };

    #[test]
    fn levy_cdf_limits() {
        let far = 1e6 * 1e-12 / 1e-10;
        assert!(LEVY.cdf(far).unwrap() > 0.999);
        assert_eq!(LEVY.cdf(0.0).unwrap(), 0.0);
        assert_eq!(LEVY.pdf(-1.0).unwrap(), 0.0);
        assert!(LEVY.pdf(1e-9).unwrap() < 1e-100);
        assert!(IG.pdf(1e-9).unwrap() < 1e-100);
    }

    #[test]
    fn cdf_is_integral_of_pdf() {
        let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-11, max_intervals: 4000 };
        for m in [LEVY, IG] {
            for &t in &[1e-3, 5e-3, 2e-2, 0.1] {
                let (q, _) = integrate(|s| m.pdf(s).unwrap(), 0.0, t, opts).unwrap();
                assert!((q - m.cdf(t).unwrap()).abs() < 1e-9, "{m:?} t={t}");
            }
        }
    }

    #[test]
    fn ig_cdf_far_tail_is_finite() {
        let steep = DelayModel::InverseGaussian { d: 1e-3, diffusion: 1e-12, v: 1e-3 };
        for &t in &[0.5, 1.0, 2.0] {
            let c = steep.cdf(t).unwrap();
            assert!(c.is_finite() && (0.0..=1.0).contains(&c));
        }
    }

    #[test]
    fn ig_sample_mean() {
        let mut rng = stream(9, 0);
        let n = 1_000_000;
        let mean = (0..n).map(|_| IG.sample(&mut rng).unwrap()).sum::<f64>() / n as f64;
        assert!((mean / IG.mean() - 1.0).abs() < 0.01);
    }

    #[test]
    fn arrival_density_examples() {
        let t = 0.01;
        assert_relative_eq!(
            arrival_order_density(5, &[], t, &LEVY).unwrap(),
            (1.0 - LEVY.cdf(t).unwrap()).powi(5),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            arrival_order_density(1, &[0.004], t, &LEVY).unwrap(),
            LEVY.pdf(0.004).unwrap(),
            max_relative = 1e-12
        );
        assert!(arrival_order_density(3, &[0.005, 0.004], t, &LEVY).is_err());
    }

    #[test]
    fn arrival_density_marginal_is_binomial() {
        let (n_tx, t) = (3u64, 0.01);
        let opts = QuadOptions { abs_tol: 1e-12, rel_tol: 1e-9, max_intervals: 2000 };
        let f = LEVY.cdf(t).unwrap();
        let inner = |t1: f64| {
            integrate(|t2| arrival_order_density(n_tx, &[t1, t2], t, &LEVY).unwrap(), t1, t, opts).unwrap().0
        };
        let two = integrate(inner, 0.0, t, opts).unwrap().0;
        assert_relative_eq!(two, 3.0 * f * f * (1.0 - f), max_relative = 1e-6);
        let one = integrate(|t1| arrival_order_density(n_tx, &[t1], t, &LEVY).unwrap(), 0.0, t, opts).unwrap().0;
        assert_relative_eq!(one, 3.0 * f * (1.0 - f).powi(2), max_relative = 1e-7);
    }
}
