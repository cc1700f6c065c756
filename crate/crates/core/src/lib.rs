//! Microwave phase-noise models for pulsed and cw spin magnetometers.
//!
//! The deterministic math (constants, spectra, filter functions, closed-form
//! sensitivities) is generic over [`Real`] so it runs in `f32` or `f64`;
//! the stochastic simulators and the FFT pipeline are `f64` only.

// `!(x > 0)` is how NaN gets rejected along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic_sensitivity;
pub mod constants;
pub mod error;
pub mod noise_models;
pub mod pulse_sequences;
pub mod quadrature;
pub mod rng;
pub mod scalar;
pub mod signal_pipeline;
pub mod spin_simulator;
pub mod stats;
pub mod units;

pub use constants::{resonance_frequencies, Constants, GAMMA_NV, ZERO_FIELD_SPLITTING};
pub use error::{Error, Result};
pub use noise_models::NoiseProcess;
pub use rng::StreamKey;
pub use scalar::Real;
pub use units::*;

pub type PulseSequence = pulse_sequences::PulseSequence<f64>;
pub type FilterFunction = pulse_sequences::FilterFunction<f64>;
pub type PhaseNoiseSpectrum = noise_models::PhaseNoiseSpectrum<f64>;

pub type PulseSequenceF32 = pulse_sequences::PulseSequence<f32>;
pub type FilterFunctionF32 = pulse_sequences::FilterFunction<f32>;
pub type PhaseNoiseSpectrumF32 = noise_models::PhaseNoiseSpectrum<f32>;
