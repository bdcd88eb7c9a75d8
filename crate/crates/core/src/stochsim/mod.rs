//! Particle-based and subvolume-based stochastic simulators with receiver probes.

pub mod geometry;
pub mod meso;
pub mod micro;
pub mod series;

pub use geometry::{
    build_dumbbell, Behavior, Environment, Face, FirstOrderReaction, MoveOutcome, Patch, Region, Species, Surface,
    DUMBBELL_PIPE,
};
pub use meso::{
    meso_next_event, meso_propensities, meso_run, meso_run_from, meso_select_event, subvolume_size_check, MesoGrid,
    MesoProbe, MesoReaction, MesoState, Propensities, SizeCheck, DEFAULT_SIZE_MARGIN,
};
pub use micro::{micro_run, micro_step, place, InitGroup, MicroOptions, MicroState, Particle, Placement, Probe};
pub use series::{estimate_cir, CirEstimate, RealizationSeries};
