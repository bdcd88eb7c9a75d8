//! Channel models and stochastic simulators for diffusive molecular communication.
//!
//! Modules:
//! - [`physics`]: transport primitives, reaction kinetics and regime numbers.
//! - [`cir`]: closed-form channel impulse responses.
//! - [`rxsignal`]: received-count statistics, noise, delays and signal fitting.
//! - [`mobile`]: time-varying CIR statistics for diffusing transmitter and receiver.
//! - [`stochsim`]: particle and subvolume simulators.

pub mod cir;
pub mod error;
pub mod mobile;
pub mod physics;
pub mod quad;
pub mod rng;
pub mod rxsignal;
pub mod special;
pub mod stochsim;

pub use cir::{absorbed_fraction, absorbed_window, cir_eval, CirModel};
pub use error::{Error, Result};
pub use physics::{FlowField, FluidMedium, SpacePoint};
