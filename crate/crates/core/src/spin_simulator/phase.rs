use crate::error::{Error, Result};
use crate::pulse_sequences::PulseSequence;
use crate::scalar::Real;

/// Total spin phase after the π-pulse train and the final π/2 pulse.
///
/// Each π pulse about an axis at angle `a_i` reflects the equatorial phase,
/// `φ_i = 2·a_i − φ_{i−1}` with `φ_0 = 0`; the final π/2 pulse subtracts its
/// own axis angle. An empty train reduces to a Ramsey sequence.
pub fn propagate_phase<T: Real>(axes: &[T], alpha_f: T) -> T {
    let phi = axes.iter().fold(T::zero(), |prev, &a| T::lit(2.0) * a - prev);
    phi - alpha_f
}

/// Phase errors and resulting total phase of one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceRealization {
    /// Drive-phase error of each π pulse relative to its nominal axis.
    pub pulse_phase_errors: Vec<f64>,
    pub final_pulse_error: f64,
    /// Phase from the magnetic field, already weighted by the toggling sign.
    pub field_phase: f64,
    pub phi_tot: f64,
}

/// Runs the recursion with the nominal XY8/CPMG axes plus the given errors.
///
/// The nominal Y-pulse contributions cancel within each XY8 block, so the
/// result depends only on the errors.
pub fn realize_sequence(
    seq: &PulseSequence<f64>,
    pulse_phase_errors: &[f64],
    final_pulse_error: f64,
    field_phase: f64,
) -> Result<SequenceRealization> {
    if pulse_phase_errors.len() != seq.n_pi as usize {
        return Err(Error::param(
            "pulse_phase_errors",
            format!("expected {} errors, got {}", seq.n_pi, pulse_phase_errors.len()),
        ));
    }
    let axes: Vec<f64> = seq
        .desired_phases()
        .iter()
        .zip(pulse_phase_errors)
        .map(|(d, e)| d + e)
        .collect();
    Ok(SequenceRealization {
        pulse_phase_errors: pulse_phase_errors.to_vec(),
        final_pulse_error,
        field_phase,
        phi_tot: propagate_phase(&axes, final_pulse_error) + field_phase,
    })
}
