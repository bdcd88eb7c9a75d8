//! Received-signal models for molecule-counting receivers.

pub mod counts;
pub mod fit;
pub mod response;
pub mod timing;

pub use counts::{
    count_cdf_table, count_pmf, noise_count, poisson_limit_gap, rmse_vs_binomial, sample_isi,
    sample_isi_decomposed, snr, snr_with_thresholds, CountKind, CountModel, IsiChannel, IsiSample,
    NoiseModel, Snr, SnrRegime,
};
pub use fit::{eval_sat_drift, fit_sat_drift, read_trace_csv, FitOptions, SatDriftFit, SatDriftModel, Segment};
pub use response::{
    deterministic_response, pearson, sample_correlation_mc, CorrelationEstimate, CorrelationScenario,
    ReleasePattern,
};
pub use timing::{arrival_order_density, DelayModel};
