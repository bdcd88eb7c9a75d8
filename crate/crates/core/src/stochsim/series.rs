//! Per-realization probe output and ensemble CIR estimates.

use serde::{Deserialize, Serialize};

use crate::error::{domain, require_positive, Error, Result};

/// Probe values of one realization on a shared time grid.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RealizationSeries {
    pub times: Vec<f64>,
    /// `values[probe][sample]`.
    pub values: Vec<Vec<f64>>,
    /// Arrival times per probe (absorption times for absorbing probes).
    pub arrivals: Vec<Vec<f64>>,
    /// Departure times per probe (transparent probes only).
    pub departures: Vec<Vec<f64>>,
}

impl RealizationSeries {
    pub fn new(n_probes: usize) -> Self {
        Self {
            times: Vec::new(),
            values: vec![Vec::new(); n_probes],
            arrivals: vec![Vec::new(); n_probes],
            departures: vec![Vec::new(); n_probes],
        }
    }
}

/// Ensemble mean of a probe normalized by the number of released molecules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CirEstimate {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    /// Standard error of `mean`; NaN for a single realization.
    pub se: Vec<f64>,
    pub realizations: usize,
}

/// Averages probe `probe` over realizations that share one time grid.
pub fn estimate_cir(series: &[RealizationSeries], probe: usize, n_tx: f64) -> Result<CirEstimate> {
    require_positive("n_tx", n_tx)?;
    let first = series.first().ok_or_else(|| domain!("no realizations"))?;
    let n = first.times.len();
    for (i, s) in series.iter().enumerate() {
        let aligned = s.times.len() == n
            && s.times.iter().zip(&first.times).all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs().max(1e-300));
        if !aligned {
            return Err(Error::Alignment(format!("realization {i} has a different time grid")));
        }
        match s.values.get(probe) {
            Some(v) if v.len() == n => {}
            _ => return Err(Error::Alignment(format!("realization {i} lacks samples for probe {probe}"))),
        }
    }
    let r = series.len() as f64;
    let mut mean = vec![0.0; n];
    let mut se = vec![f64::NAN; n];
    for j in 0..n {
        let m = series.iter().map(|s| s.values[probe][j]).sum::<f64>() / r;
        mean[j] = m / n_tx;
        if series.len() > 1 {
            let var = series.iter().map(|s| (s.values[probe][j] - m).powi(2)).sum::<f64>() / (r - 1.0);
            se[j] = (var / r).sqrt() / n_tx;
        }
    }
    Ok(CirEstimate { times: first.times.clone(), mean, se, realizations: series.len() })
}
