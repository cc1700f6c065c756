use crate::analytic_sensitivity::{eta_phi, sigma_phi_filter};
use crate::constants::GAMMA_NV;
use crate::error::Result;
use crate::noise_models::{mix_spectra, MixMode, PhaseNoiseSpectrum};
use crate::pulse_sequences::PulseSequence;
use crate::scalar::Real;

/// Bright-state population after a double-quantum Ramsey sequence.
///
/// `delta_alpha` and `delta_alpha_prime` are the phase differences between
/// the two tones of the first and second pulse; `p = cos²((Δα′−Δα)/2 − 2πγ b τ)`.
pub fn dq_ramsey_probability<T: Real>(delta_alpha: T, delta_alpha_prime: T, b_z: T, tau: T) -> T {
    let arg = (delta_alpha_prime - delta_alpha) / T::lit(2.0) - T::lit(2.0) * T::PI() * T::lit(GAMMA_NV) * b_z * tau;
    let c = arg.cos();
    c * c
}

/// Phase-noise-limited sensitivities with and without the double-quantum mixer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DqSuppression<T> {
    /// Only the local oscillator contributes.
    pub eta_dq: T,
    /// A single tone synthesized by mixing carrier and LO.
    pub eta_single: T,
    /// The carrier alone, as if driven directly.
    pub eta_carrier_only: T,
}

impl<T: Real> DqSuppression<T> {
    /// `eta_single / eta_dq`.
    pub fn single_ratio(&self) -> T {
        self.eta_single / self.eta_dq
    }

    /// `eta_carrier_only / eta_dq`; equals `f_car/f_LO` when L scales with carrier.
    pub fn carrier_ratio(&self) -> T {
        self.eta_carrier_only / self.eta_dq
    }
}

pub fn dq_noise_suppression<T: Real>(
    lo_spectrum: &PhaseNoiseSpectrum<T>,
    carrier_spectrum: &PhaseNoiseSpectrum<T>,
    seq: &PulseSequence<T>,
    f_cutoff: T,
) -> Result<DqSuppression<T>> {
    let eta = |s: &PhaseNoiseSpectrum<T>| -> Result<T> { Ok(eta_phi(sigma_phi_filter(s, seq, f_cutoff)?, seq)) };
    let mixed = mix_spectra(carrier_spectrum, lo_spectrum, MixMode::Sum)?;
    Ok(DqSuppression {
        eta_dq: eta(lo_spectrum)?,
        eta_single: eta(&mixed)?,
        eta_carrier_only: eta(carrier_spectrum)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;
    use num_complex::Complex64;
    use rand::Rng;

    /// Three-level oracle: the first pulse prepares `(e^{iα₊}|+1⟩ + e^{iα₋}|−1⟩)/√2`,
    /// free evolution adds `±2πγbτ`, the second pulse projects onto its own
    /// bright state.
    fn state_vector(plus: (f64, f64), minus: (f64, f64), b: f64, tau: f64) -> f64 {
        let th = 2.0 * std::f64::consts::PI * GAMMA_NV * b * tau;
        let up = Complex64::from_polar(1.0, plus.0 + th) * Complex64::from_polar(1.0, -plus.1);
        let dn = Complex64::from_polar(1.0, minus.0 - th) * Complex64::from_polar(1.0, -minus.1);
        ((up + dn) / 2.0).norm_sqr()
    }

    #[test]
    fn trivial_cases() {
        assert!((dq_ramsey_probability(0.3f64, 0.3, 0.0, 1e-6) - 1.0).abs() < 1e-15);
        assert!(dq_ramsey_probability(0.0f64, std::f64::consts::PI, 0.0, 1e-6).abs() < 1e-15);
    }

    #[test]
    fn matches_state_vector_and_is_carrier_invariant() {
        let mut rng = StreamKey::new(21, 0).rng();
        for _ in 0..1000 {
            let (car, car2, lo, lo2): (f64, f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen(), rng.gen());
            let b = rng.gen_range(-1e-6..1e-6);
            let tau = 1e-6;
            let p = state_vector((car + lo, car2 + lo2), (car - lo, car2 - lo2), b, tau);
            let q = dq_ramsey_probability(2.0 * lo, 2.0 * lo2, b, tau);
            assert!((p - q).abs() < 1e-12);
            let beta: f64 = rng.gen_range(-10.0..10.0);
            let shifted = state_vector((car + beta + lo, car2 + beta + lo2), (car + beta - lo, car2 + beta - lo2), b, tau);
            assert!((shifted - p).abs() < 1e-12);
        }
    }

    #[test]
    fn suppression_follows_carrier_ratio() {
        let seq = PulseSequence::xy8(8, 458e3, 48e-9, 0.0).unwrap();
        let car = crate::noise_models::preset("g1-2.5ghz").unwrap().scaled_to_carrier(2.87e9).unwrap();
        let lo = car.scaled_to_carrier(0.61e9).unwrap();
        let r = dq_noise_suppression(&lo, &car, &seq, 1e8).unwrap();
        let ratio = 2.87 / 0.61;
        assert!((r.carrier_ratio() / ratio - 1.0).abs() < 0.01);
        assert!((r.single_ratio() / (1.0 + ratio * ratio).sqrt() - 1.0).abs() < 0.01);
    }

    #[test]
    fn noiseless_edges() {
        let seq = PulseSequence::xy8(8, 458e3, 48e-9, 0.0).unwrap();
        let lo = crate::noise_models::preset("g1-1ghz").unwrap();
        let quiet = PhaseNoiseSpectrum::silent(2.87e9).unwrap();
        let r = dq_noise_suppression(&lo, &quiet, &seq, 1e8).unwrap();
        assert!((r.single_ratio() - 1.0).abs() < 1e-9);
        let r = dq_noise_suppression(&PhaseNoiseSpectrum::silent(0.6e9).unwrap(), &lo, &seq, 1e8).unwrap();
        assert_eq!(r.eta_dq, 0.0);
    }
}
