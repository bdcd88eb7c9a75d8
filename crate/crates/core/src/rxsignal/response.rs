//! Expected responses to a release pattern and Monte Carlo sample correlation.

use std::fmt;
use std::sync::Arc;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, require_non_negative, require_positive, Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::rng::{par_indexed, stream};

/// Release rate function of a pulse, molecules per second.
pub type RateFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// How molecules leave the transmitter.
#[derive(Clone)]
pub enum ReleasePattern {
    /// `n_tx` molecules at `t = 0`.
    Impulse { n_tx: f64 },
    /// Rate `g(t)` on `[0, t_rls]`, zero elsewhere.
    Pulse { g: RateFn, t_rls: f64 },
}

impl fmt::Debug for ReleasePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReleasePattern::Impulse { n_tx } => f.debug_struct("Impulse").field("n_tx", n_tx).finish(),
            ReleasePattern::Pulse { t_rls, .. } => f.debug_struct("Pulse").field("t_rls", t_rls).finish_non_exhaustive(),
        }
    }
}

impl ReleasePattern {
    /// Constant rate `n_tx / t_rls` over `[0, t_rls]`.
    pub fn rectangular(n_tx: f64, t_rls: f64) -> Result<Self> {
        require_non_negative("N_tx", n_tx)?;
        require_positive("T_rls", t_rls)?;
        let rate = n_tx / t_rls;
        Ok(ReleasePattern::Pulse { g: Arc::new(move |_| rate), t_rls })
    }
}

/// Expected count at `t` for a release pattern through CIR `h`.
pub fn deterministic_response<H: Fn(f64) -> f64>(pattern: &ReleasePattern, h: H, t: f64) -> Result<f64> {
    require_non_negative("t", t)?;
    match pattern {
        ReleasePattern::Impulse { n_tx } => {
            require_non_negative("N_tx", *n_tx)?;
            Ok(n_tx * h(t))
        }
        ReleasePattern::Pulse { g, t_rls } => {
            require_positive("T_rls", *t_rls)?;
            let upper = t.min(*t_rls);
            if upper == 0.0 {
                return Ok(0.0);
            }
            let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-10, max_intervals: 4000 };
            let (v, _) = integrate(|s| g(s) * h(t - s), 0.0, upper, opts)?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Numeric("non-finite convolution".into()))
            }
        }
    }
}

/// Point transmitter and transparent spherical receiver in unbounded space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationScenario {
    pub n_tx: u64,
    pub d0: f64,
    pub a_rx: f64,
    pub diffusion: f64,
}

/// Sample statistics of `r(t1)` and `r(t2)` across realizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationEstimate {
    pub rho: f64,
    pub mean1: f64,
    pub mean2: f64,
    pub var1: f64,
    pub var2: f64,
}

/// Pearson correlation of the counts at `t1` and `t2` over `realizations`
/// independent releases, each realization on its own random stream.
pub fn sample_correlation_mc(
    sc: &CorrelationScenario,
    t1: f64,
    t2: f64,
    realizations: usize,
    seed: u64,
) -> Result<CorrelationEstimate> {
    require_positive("d0", sc.d0)?;
    require_positive("a_rx", sc.a_rx)?;
    require_positive("D", sc.diffusion)?;
    require_positive("t1", t1)?;
    if !(t2 >= t1) || !t2.is_finite() {
        return Err(domain!("require t1 <= t2, got {t1}, {t2}"));
    }
    if realizations < 1000 {
        return Err(domain!("at least 1000 realizations required, got {realizations}"));
    }
    let s1 = (2.0 * sc.diffusion * t1).sqrt();
    let s2 = (2.0 * sc.diffusion * (t2 - t1)).sqrt();
    let a2 = sc.a_rx * sc.a_rx;
    let pairs = par_indexed(realizations, |i| {
        let mut rng = stream(seed, i);
        let n1 = Normal::new(0.0, s1).expect("finite sigma");
        let n2 = Normal::new(0.0, s2).expect("finite sigma");
        let (mut c1, mut c2) = (0u64, 0u64);
        for _ in 0..sc.n_tx {
            let mut p = [sc.d0 + n1.sample(&mut rng), n1.sample(&mut rng), n1.sample(&mut rng)];
            c1 += (p[0] * p[0] + p[1] * p[1] + p[2] * p[2] <= a2) as u64;
            for x in &mut p {
                *x += n2.sample(&mut rng);
            }
            c2 += (p[0] * p[0] + p[1] * p[1] + p[2] * p[2] <= a2) as u64;
        }
        (c1 as f64, c2 as f64)
    });
    pearson(&pairs)
}

/// Pearson correlation with its marginal moments; identical columns give exactly 1.
pub fn pearson(pairs: &[(f64, f64)]) -> Result<CorrelationEstimate> {
    let n = pairs.len() as f64;
    if pairs.len() < 2 {
        return Err(domain!("need at least two samples"));
    }
    let mean1 = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean2 = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut v1, mut v2, mut c) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        v1 += (x - mean1).powi(2);
        v2 += (y - mean2).powi(2);
        c += (x - mean1) * (y - mean2);
    }
    if v1 == 0.0 || v2 == 0.0 {
        return Err(Error::Numeric("correlation undefined: a sample has zero variance".into()));
    }
    let rho = if pairs.iter().all(|p| p.0 == p.1) { 1.0 } else { (c / (v1.sqrt() * v2.sqrt())).clamp(-1.0, 1.0) };
    Ok(CorrelationEstimate { rho, mean1, mean2, var1: v1 / (n - 1.0), var2: v2 / (n - 1.0) })
}
