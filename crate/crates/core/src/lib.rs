//! Fast-light pulse propagation through four-wave-mixing gain media.
//!
//! A [`medium::MediumChannel`] is a sum of signed Lorentzian lines. Pulses are
//! propagated in the frequency domain relative to a vacuum reference, and the
//! resulting traces are reduced to peak advancement, gain and distortion.
//! The conjugate beam of a four-wave-mixing process is modelled as the
//! phase-conjugated seed, scaled by a coupling κ and filtered by its own channel.
//!
//! The numerical core is generic over [`scalar::Real`] (`f32` or `f64`);
//! configuration, experiments and I/O work in `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod fourwm;
pub mod io;
pub mod medium;
pub mod metrics;
pub mod propagate;
pub mod pulse;
pub mod scalar;

pub use config::{load_config, save_config, RunConfig};
pub use error::{Error, Result};
pub use scalar::Real;

pub type LineComponent = medium::LineComponent<f64>;
pub type MediumChannel = medium::MediumChannel<f64>;
pub type PulseSpec = pulse::PulseSpec<f64>;
pub type GridSpec = pulse::GridSpec<f64>;
pub type SampledTrace = pulse::SampledTrace<f64>;
pub type Envelope = pulse::Envelope<f64>;
pub type Spectrum = pulse::Spectrum<f64>;
pub type PropagationResult = propagate::PropagationResult<f64>;
pub type AdvancementMetrics = metrics::AdvancementMetrics<f64>;
pub type FourWmGeometry = fourwm::FourWmGeometry<f64>;
pub type FitResult = fit::FitResult<f64>;
pub type LogLawFit = fit::LogLawFit<f64>;

pub type LineComponentF32 = medium::LineComponent<f32>;
pub type MediumChannelF32 = medium::MediumChannel<f32>;
pub type SampledTraceF32 = pulse::SampledTrace<f32>;
