//! Count statistics of molecule-counting receivers, noise and ISI sampling.

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{domain, require_non_negative, Error, Result};
use crate::special::{gaussian_cdf, gaussian_pdf, ln_factorial};

/// Distribution family of the received count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountKind {
    Binomial,
    Gaussian,
    Poisson,
}

/// Count model for `n_tx` released molecules each observed with probability `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountModel {
    pub kind: CountKind,
    pub n_tx: u64,
    pub h: f64,
}

impl CountModel {
    pub fn new(kind: CountKind, n_tx: u64, h: f64) -> Result<Self> {
        let m = Self { kind, n_tx, h };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.h) {
            return Err(domain!("h must lie in [0, 1], got {}", self.h));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.n_tx as f64 * self.h
    }

    /// Variance; the Poisson model uses its mean.
    pub fn variance(&self) -> f64 {
        match self.kind {
            CountKind::Binomial | CountKind::Gaussian => self.mean() * (1.0 - self.h),
            CountKind::Poisson => self.mean(),
        }
    }
}

fn require_count(n: f64) -> Result<u64> {
    if n >= 0.0 && n.fract() == 0.0 && n.is_finite() {
        Ok(n as u64)
    } else {
        Err(domain!("count must be a non-negative integer, got {n}"))
    }
}

/// `ln n! − ((n + ½)·ln n − n + ln √(2π))`.
fn stirlerr(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let ln_sqrt_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    if n <= 15.0 {
        return ln_factorial(n as u64) - (n + 0.5) * n.ln() + n - ln_sqrt_2pi;
    }
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Deviance term `x·ln(x/m) + m − x`, summed as a series when `x ≈ m`.
fn bd0(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// Saddle-point form of the Binomial log-mass, accurate to a few ulps for large `n_tx`.
fn binomial_ln_pmf(n_tx: u64, h: f64, n: u64) -> f64 {
    if h == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if h == 1.0 {
        return if n == n_tx { 0.0 } else { f64::NEG_INFINITY };
    }
    let q = 1.0 - h;
    if n == 0 {
        return n_tx as f64 * (-h).ln_1p();
    }
    if n == n_tx {
        return n_tx as f64 * h.ln();
    }
    let (nf, x) = (n_tx as f64, n as f64);
    let y = nf - x;
    stirlerr(nf) - stirlerr(x) - stirlerr(y) - bd0(x, nf * h) - bd0(y, nf * q)
        + 0.5 * (nf / (2.0 * std::f64::consts::PI * x * y)).ln()
}

fn poisson_ln_pmf(mean: f64, n: u64) -> f64 {
    if mean == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if n == 0 {
        return -mean;
    }
    let x = n as f64;
    -stirlerr(x) - bd0(x, mean) - 0.5 * (2.0 * std::f64::consts::PI * x).ln()
}

/// Probability mass (Binomial, Poisson) or density (Gaussian) at `n`.
pub fn count_pmf(model: &CountModel, n: f64) -> Result<f64> {
    model.validate()?;
    match model.kind {
        CountKind::Binomial => {
            let k = require_count(n)?;
            if k > model.n_tx {
                return Ok(0.0);
            }
            Ok(binomial_ln_pmf(model.n_tx, model.h, k).exp())
        }
        CountKind::Poisson => Ok(poisson_ln_pmf(model.mean(), require_count(n)?).exp()),
        CountKind::Gaussian => {
            let var = model.variance();
            if var == 0.0 {
                return Err(domain!("Gaussian count model with zero variance has no density"));
            }
            Ok(gaussian_pdf(n, model.mean(), var))
        }
    }
}

/// CDF values `F(0), …, F(n_max)` of a count model at the integers.
pub fn count_cdf_table(model: &CountModel, n_max: u64) -> Result<Vec<f64>> {
    model.validate()?;
    let mut out = Vec::with_capacity(n_max as usize + 1);
    match model.kind {
        CountKind::Gaussian => {
            let (m, v) = (model.mean(), model.variance());
            out.extend((0..=n_max).map(|n| gaussian_cdf(n as f64, m, v)));
        }
        CountKind::Binomial | CountKind::Poisson => {
            let mut acc = 0.0;
            for n in 0..=n_max {
                let lp = match model.kind {
                    CountKind::Binomial if n > model.n_tx => f64::NEG_INFINITY,
                    CountKind::Binomial => binomial_ln_pmf(model.n_tx, model.h, n),
                    _ => poisson_ln_pmf(model.mean(), n),
                };
                acc += lp.exp();
                out.push(acc.min(1.0));
            }
        }
    }
    Ok(out)
}

/// Root-mean-square CDF distance between `kind` and the exact Binomial over `n = 0..=n_tx`.
///
/// The Gaussian CDF is evaluated at the integers without continuity correction.
pub fn rmse_vs_binomial(kind: CountKind, n_tx: u64, h: f64) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return Err(domain!("h must lie in (0, 1), got {h}"));
    }
    let exact = count_cdf_table(&CountModel::new(CountKind::Binomial, n_tx, h)?, n_tx)?;
    let approx = count_cdf_table(&CountModel::new(kind, n_tx, h)?, n_tx)?;
    let sq: f64 = exact.iter().zip(&approx).map(|(a, b)| (a - b).powi(2)).sum();
    Ok((sq / (n_tx as f64 + 1.0)).sqrt())
}

/// Sup-norm distance between the CDFs of `Binomial(n, λ/n)` and `Poisson(λ)`.
pub fn poisson_limit_gap(n: u64, lambda: f64) -> Result<f64> {
    require_non_negative("lambda", lambda)?;
    if lambda > n as f64 {
        return Err(domain!("lambda={lambda} exceeds N={n}"));
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let bin = count_cdf_table(&CountModel::new(CountKind::Binomial, n, lambda / n as f64)?, n)?;
    let poi = CountModel { kind: CountKind::Poisson, n_tx: n, h: lambda / n as f64 };
    let poi = count_cdf_table(&poi, n)?;
    // Beyond n the Binomial CDF is 1 and the Poisson CDF only grows.
    Ok(bin.iter().zip(&poi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// Noise statistics for sampled counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    #[default]
    Poisson,
    /// Gaussian with variance equal to the mean.
    Gaussian,
}

fn draw<R: Rng + ?Sized>(mean: f64, model: NoiseModel, rng: &mut R) -> Result<f64> {
    require_non_negative("mean count", mean)?;
    if mean == 0.0 {
        return Ok(0.0);
    }
    match model {
        NoiseModel::Poisson => Ok(Poisson::new(mean)
            .map_err(|e| Error::Numeric(format!("Poisson({mean}): {e}")))?
            .sample(rng)),
        NoiseModel::Gaussian => Ok(Normal::new(mean, mean.sqrt())
            .map_err(|e| Error::Numeric(format!("Normal({mean}): {e}")))?
            .sample(rng)),
    }
}

/// Number of interfering noise molecules observed in one sample.
pub fn noise_count<R: Rng + ?Sized>(r_int: f64, model: NoiseModel, rng: &mut R) -> Result<f64> {
    draw(r_int, model, rng)
}

/// Time-slotted counting channel with memory of `memory` symbol intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsiChannel {
    pub memory: usize,
    pub t_symb: f64,
    pub dt: f64,
    /// `r_sig[l][m]`: expected count at sample `m` from the symbol sent `l` intervals earlier.
    pub r_sig: Vec<Vec<f64>>,
    pub r_int: f64,
}

/// One sample split into its additive parts; the count is `signal + diffusion + interference + r_int`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsiSample {
    pub signal: f64,
    pub diffusion_noise: f64,
    pub interference_noise: f64,
}

impl IsiChannel {
    /// Builds `r_sig[l][m] = n_tx·h(l·t_symb + (m+1)·dt)` from a CIR.
    pub fn from_cir<F: Fn(f64) -> Result<f64>>(
        memory: usize,
        t_symb: f64,
        dt: f64,
        samples: usize,
        n_tx: f64,
        r_int: f64,
        h: F,
    ) -> Result<Self> {
        let mut r_sig = Vec::with_capacity(memory);
        for l in 0..memory {
            let row = (0..samples)
                .map(|m| Ok(n_tx * h(l as f64 * t_symb + (m + 1) as f64 * dt)?))
                .collect::<Result<Vec<_>>>()?;
            r_sig.push(row);
        }
        let ch = Self { memory, t_symb, dt, r_sig, r_int };
        ch.validate()?;
        Ok(ch)
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.r_sig.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        if self.memory == 0 {
            return Err(domain!("memory L must be >= 1"));
        }
        crate::error::require_positive("T_symb", self.t_symb)?;
        crate::error::require_positive("dt", self.dt)?;
        require_non_negative("r_int", self.r_int)?;
        if self.r_sig.len() != self.memory {
            return Err(domain!("r_sig has {} rows, expected L={}", self.r_sig.len(), self.memory));
        }
        let m = self.samples_per_symbol();
        if m == 0 || self.r_sig.iter().any(|row| row.len() != m) {
            return Err(domain!("r_sig rows must be non-empty and equal length"));
        }
        if m as f64 * self.dt > self.t_symb * (1.0 + 1e-12) {
            return Err(domain!("{m} samples of dt={} exceed T_symb={}", self.dt, self.t_symb));
        }
        for v in self.r_sig.iter().flatten() {
            require_non_negative("r_sig", *v)?;
        }
        Ok(())
    }

    fn check_symbols(symbols: &[f64]) -> Result<()> {
        match symbols.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            Some(s) => Err(domain!("symbol {s} outside [0, 1]")),
            None => Ok(()),
        }
    }

    /// Expected signal component `Σ_l r_sig[l][m]·s[k−l]` (symbols before the first count as zero).
    pub fn signal_mean(&self, symbols: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        Self::check_symbols(symbols)?;
        Ok((0..symbols.len())
            .map(|k| {
                (0..self.samples_per_symbol())
                    .map(|m| (0..self.memory.min(k + 1)).map(|l| self.r_sig[l][m] * symbols[k - l]).sum())
                    .collect()
            })
            .collect())
    }

    /// Expected total counts including interference.
    pub fn mean(&self, symbols: &[f64]) -> Result<Vec<Vec<f64>>> {
        let mut out = self.signal_mean(symbols)?;
        out.iter_mut().flatten().for_each(|v| *v += self.r_int);
        Ok(out)
    }
}

/// Draws received counts `r[k][m]` for a symbol sequence.
pub fn sample_isi<R: Rng + ?Sized>(
    ch: &IsiChannel,
    symbols: &[f64],
    model: NoiseModel,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let mean = ch.mean(symbols)?;
    mean.into_iter()
        .map(|row| row.into_iter().map(|m| draw(m, model, rng)).collect())
        .collect()
}

/// Draws received counts as signal plus zero-mean diffusion and interference noise.
pub fn sample_isi_decomposed<R: Rng + ?Sized>(
    ch: &IsiChannel,
    symbols: &[f64],
    model: NoiseModel,
    rng: &mut R,
) -> Result<Vec<Vec<IsiSample>>> {
    let signal = ch.signal_mean(symbols)?;
    signal
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|s| {
                    Ok(IsiSample {
                        signal: s,
                        diffusion_noise: draw(s, model, rng)? - s,
                        interference_noise: draw(ch.r_int, model, rng)? - ch.r_int,
                    })
                })
                .collect()
        })
        .collect()
}

/// Asymptotic SNR regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrRegime {
    DiffusionLimited,
    InterferenceLimited,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snr {
    pub value: f64,
    pub regime: SnrRegime,
}

/// Default ratio `r_sig / r_int` above which the channel is diffusion-noise limited.
pub const SNR_HIGH_RATIO: f64 = 10.0;
/// Default ratio below which the channel is interference limited.
pub const SNR_LOW_RATIO: f64 = 0.1;

/// `r_sig² / (r_sig + r_int)` with the default regime thresholds.
pub fn snr(r_sig: f64, r_int: f64) -> Result<Snr> {
    snr_with_thresholds(r_sig, r_int, SNR_LOW_RATIO, SNR_HIGH_RATIO)
}

pub fn snr_with_thresholds(r_sig: f64, r_int: f64, low: f64, high: f64) -> Result<Snr> {
    require_non_negative("r_sig", r_sig)?;
    require_non_negative("r_int", r_int)?;
    if r_sig == 0.0 && r_int == 0.0 {
        return Err(domain!("SNR undefined when both expected counts are zero"));
    }
    if !(low > 0.0 && high > low) {
        return Err(domain!("thresholds must satisfy 0 < low < high"));
    }
    let ratio = if r_int == 0.0 { f64::INFINITY } else { r_sig / r_int };
    let regime = if ratio > high {
        SnrRegime::DiffusionLimited
    } else if ratio < low {
        SnrRegime::InterferenceLimited
    } else {
        SnrRegime::Mixed
    };
    Ok(Snr { value: r_sig * r_sig / (r_sig + r_int), regime })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use approx::assert_relative_eq;
    use statrs::distribution::{Binomial, DiscreteCDF, Poisson as SPoisson};

    #[test]
    fn pmf_examples() {
        let b = CountModel::new(CountKind::Binomial, 4, 0.5).unwrap();
        assert_relative_eq!(count_pmf(&b, 2.0).unwrap(), 0.375, max_relative = 1e-13);
        assert_eq!(count_pmf(&b, 5.0).unwrap(), 0.0);
        assert!(count_pmf(&b, 1.5).is_err());
        let p = CountModel::new(CountKind::Poisson, 100, 0.0).unwrap();
        assert_eq!(count_pmf(&p, 0.0).unwrap(), 1.0);
        let g = CountModel::new(CountKind::Gaussian, 1000, 0.2).unwrap();
        let peak = count_pmf(&g, 200.0).unwrap();
        assert_relative_eq!(peak, 1.0 / (2.0 * std::f64::consts::PI * 160.0).sqrt(), max_relative = 1e-14);
        assert!(count_pmf(&g, 199.0).unwrap() < peak);
        assert!(CountModel::new(CountKind::Binomial, 4, 1.5).is_err());
    }

    #[test]
    fn cdf_tables_match_statrs() {
        let t = count_cdf_table(&CountModel::new(CountKind::Binomial, 500, 0.03).unwrap(), 500).unwrap();
        let oracle = Binomial::new(0.03, 500).unwrap();
        for (n, v) in t.iter().enumerate() {
            assert!((v - oracle.cdf(n as u64)).abs() < 1e-12);
        }
        let t = count_cdf_table(&CountModel::new(CountKind::Poisson, 500, 0.03).unwrap(), 60).unwrap();
        let oracle = SPoisson::new(15.0).unwrap();
        for (n, v) in t.iter().enumerate() {
            assert!((v - oracle.cdf(n as u64)).abs() < 1e-12);
        }
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse_vs_binomial(CountKind::Binomial, 1000, 0.1).unwrap(), 0.0);
        let hs = [0.01, 0.05, 0.1, 0.3];
        let p: Vec<f64> = hs.iter().map(|&h| rmse_vs_binomial(CountKind::Poisson, 1000, h).unwrap()).collect();
        let g: Vec<f64> = hs.iter().map(|&h| rmse_vs_binomial(CountKind::Gaussian, 1000, h).unwrap()).collect();
        assert!(p.windows(2).all(|w| w[1] > w[0]), "{p:?}");
        assert!(g.windows(2).all(|w| w[1] < w[0]), "{g:?}");
        let by_n: Vec<f64> =
            [100, 1000, 10_000].iter().map(|&n| rmse_vs_binomial(CountKind::Gaussian, n, 0.05).unwrap()).collect();
        assert!(by_n.windows(2).all(|w| w[1] < w[0]), "{by_n:?}");
        assert!(rmse_vs_binomial(CountKind::Poisson, 10, 0.0).is_err());
    }

    #[test]
    fn poisson_gap_examples() {
        assert!(poisson_limit_gap(10_000, 1.0).unwrap() < 1e-3);
        assert!(poisson_limit_gap(10, 1.0).unwrap() > poisson_limit_gap(1000, 1.0).unwrap());
        assert_eq!(poisson_limit_gap(10, 0.0).unwrap(), 0.0);
        assert!(poisson_limit_gap(10, 11.0).is_err());
    }

    #[test]
    fn snr_examples() {
        let s = snr(7.0, 0.0).unwrap();
        assert_eq!(s.value, 7.0);
        assert_eq!(s.regime, SnrRegime::DiffusionLimited);
        assert_eq!(snr(0.0, 3.0).unwrap().value, 0.0);
        assert_eq!(snr(0.0, 3.0).unwrap().regime, SnrRegime::InterferenceLimited);
        let s = snr(4.0, 4.0).unwrap();
        assert_eq!(s.value, 2.0);
        assert_eq!(s.regime, SnrRegime::Mixed);
        assert!(snr(0.0, 0.0).is_err());
    }

    #[test]
    fn noise_moments() {
        let mut rng = stream(11, 0);
        assert_eq!(noise_count(0.0, NoiseModel::Poisson, &mut rng).unwrap(), 0.0);
        assert!(noise_count(-1.0, NoiseModel::Poisson, &mut rng).is_err());
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| noise_count(20.0, NoiseModel::Poisson, &mut rng).unwrap()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean / 20.0 - 1.0).abs() < 0.02);
        assert!((var / 20.0 - 1.0).abs() < 0.02);
    }

    #[test]
    fn isi_examples() {
        let ch = IsiChannel { memory: 2, t_symb: 1.0, dt: 0.25, r_sig: vec![vec![5.0, 8.0], vec![2.0, 1.0]], r_int: 0.0 };
        let mut rng = stream(3, 0);
        let zero = sample_isi(&ch, &[0.0; 5], NoiseModel::Poisson, &mut rng).unwrap();
        assert!(zero.iter().flatten().all(|&v| v == 0.0));
        let m = ch.mean(&[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(m, vec![vec![5.0, 8.0], vec![2.0, 1.0], vec![5.0, 8.0]]);
        assert!(ch.mean(&[1.5]).is_err());
        let bad = IsiChannel { dt: 0.75, ..ch.clone() };
        assert!(bad.validate().is_err());
        let d = sample_isi_decomposed(&ch, &[1.0, 1.0], NoiseModel::Gaussian, &mut rng).unwrap();
        assert_eq!(d[1][0].signal, 7.0);
        assert_eq!(d[1][0].interference_noise, 0.0);
    }

    #[test]
    fn isi_single_tap_mean() {
        let ch = IsiChannel { memory: 1, t_symb: 1.0, dt: 0.5, r_sig: vec![vec![12.0, 3.0]], r_int: 2.0 };
        let mut rng = stream(5, 0);
        let k = 100_000;
        let r = sample_isi(&ch, &vec![1.0; k], NoiseModel::Poisson, &mut rng).unwrap();
        for (m, expect) in [(0, 14.0), (1, 5.0)] {
            let mean = r.iter().map(|row| row[m]).sum::<f64>() / k as f64;
            assert!((mean / expect - 1.0).abs() < 0.01, "m={m}: {mean}");
        }
    }
}
