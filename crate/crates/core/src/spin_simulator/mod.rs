//! Time-domain Monte Carlo of the spin phase under noisy microwave pulses.

mod cw;
mod double_quantum;
mod gradiometer;
mod monte_carlo;
mod phase;

pub use cw::{simulate_cw_trace, CwTrace};
pub use double_quantum::{dq_noise_suppression, dq_ramsey_probability, DqSuppression};
pub use gradiometer::{simulate_gradiometer, GradiometerConfig, GradiometerStreams, TestTone};
pub use monte_carlo::{monte_carlo_sigma_phi, phase_to_tesla, sequence_phases, MonteCarloResult};
pub use phase::{propagate_phase, realize_sequence, SequenceRealization};
