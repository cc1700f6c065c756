use super::phase::propagate_phase;
use crate::analytic_sensitivity::eta_phi;
use crate::constants::GAMMA_NV;
use crate::error::{Error, Result};
use crate::noise_models::NoiseProcess;
use crate::pulse_sequences::PulseSequence;
use crate::rng::StreamKey;
use crate::stats::std_dev;
use rayon::prelude::*;

/// Minimum realization count accepted by [`monte_carlo_sigma_phi`].
const MIN_REALIZATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloResult {
    pub n_realizations: usize,
    pub sigma_phi_empirical: f64,
    /// `σ/√(2n)`, the standard error of a Gaussian standard deviation.
    pub standard_error: f64,
    pub seed: u64,
}

impl MonteCarloResult {
    pub fn eta(&self, seq: &PulseSequence<f64>) -> f64 {
        eta_phi(self.sigma_phi_empirical, seq)
    }
}

/// Small-angle map from total phase to equivalent field, `φ/(4 γ τ_tot)`.
pub fn phase_to_tesla(phi: f64, seq: &PulseSequence<f64>) -> f64 {
    phi / (4.0 * GAMMA_NV * seq.tau_tot())
}

/// `φ_tot` for `n` independent sequences; realization `k` draws from stream
/// `(key.seed, k)` so results do not depend on thread scheduling.
///
/// π pulses are instantaneous: the noise is read at pulse centres and at the
/// final π/2 pulse, relative to its value at the first π/2 pulse.
pub fn sequence_phases(seq: &PulseSequence<f64>, process: &NoiseProcess, n: usize, key: StreamKey) -> Result<Vec<f64>> {
    let mut times = seq.pulse_centers();
    times.push(seq.tau_tot());
    let sampler = process.sampler(&times)?;
    let desired = seq.desired_phases();
    let n_pi = desired.len();
    let phases = (0..n as u64)
        .into_par_iter()
        .map_init(
            || (Vec::with_capacity(n_pi + 1), Vec::with_capacity(n_pi)),
            |(alphas, axes), k| {
                sampler.sample_into(&mut StreamKey::new(key.seed, k).rng(), alphas);
                axes.clear();
                axes.extend(desired.iter().zip(alphas.iter()).map(|(d, a)| d + a));
                propagate_phase(axes, alphas[n_pi])
            },
        )
        .collect();
    Ok(phases)
}

/// Empirical spread of `φ_tot` over `n_realizations` sequences.
pub fn monte_carlo_sigma_phi(
    seq: &PulseSequence<f64>,
    process: &NoiseProcess,
    n_realizations: usize,
    seed: u64,
) -> Result<MonteCarloResult> {
    if n_realizations < MIN_REALIZATIONS {
        return Err(Error::param(
            "n_realizations",
            format!("need at least {MIN_REALIZATIONS}, got {n_realizations}"),
        ));
    }
    let phases = sequence_phases(seq, process, n_realizations, StreamKey::new(seed, 0))?;
    let sigma = std_dev(&phases);
    Ok(MonteCarloResult {
        n_realizations,
        sigma_phi_empirical: sigma,
        standard_error: sigma / (2.0 * n_realizations as f64).sqrt(),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic_sensitivity::{sigma_phi_random_walk, sigma_phi_white};
    use crate::noise_models::WalkMode;
    use crate::pulse_sequences::SequenceKind;

    #[test]
    fn zero_noise_is_zero() {
        let s = PulseSequence::xy8(8, 458e3, 0.0, 0.0).unwrap();
        let r = monte_carlo_sigma_phi(&s, &NoiseProcess::silent(), 200, 1).unwrap();
        assert_eq!(r.sigma_phi_empirical, 0.0);
    }

    #[test]
    fn white_matches_closed_form() {
        let s = PulseSequence::xy8(8, 458e3, 0.0, 0.0).unwrap();
        let r = monte_carlo_sigma_phi(&s, &NoiseProcess::white(0.01), 40_000, 3).unwrap();
        let expect = sigma_phi_white(0.01, 64);
        assert!((r.sigma_phi_empirical / expect - 1.0).abs() < 0.02);
        assert!((r.standard_error / (expect / (8e4f64).sqrt()) - 1.0).abs() < 0.05);
    }

    #[test]
    fn random_walk_matches_closed_form() {
        let s = PulseSequence::xy8_with_total(8, 70e-6, 0.0, 0.0).unwrap();
        let expect = sigma_phi_random_walk(1e-3, 70e-6, 1e6);
        for mode in [WalkMode::Gaussian, WalkMode::DiscreteJumps] {
            let p = NoiseProcess::random_walk(1e-3, 1e6).with_walk_mode(mode);
            let r = monte_carlo_sigma_phi(&s, &p, 40_000, 4).unwrap();
            assert!((r.sigma_phi_empirical / expect - 1.0).abs() < 0.03, "{mode:?}");
        }
    }

    #[test]
    fn deterministic_and_validated() {
        let s = PulseSequence::xy8(2, 458e3, 0.0, 0.0).unwrap();
        let p = NoiseProcess::white(0.02);
        let a = monte_carlo_sigma_phi(&s, &p, 500, 9).unwrap();
        let b = monte_carlo_sigma_phi(&s, &p, 500, 9).unwrap();
        assert_eq!(a, b);
        assert!(monte_carlo_sigma_phi(&s, &p, 50, 9).is_err());
    }

    #[test]
    fn xy8_statistics_equal_cpmg() {
        let s = PulseSequence::xy8(4, 458e3, 0.0, 0.0).unwrap();
        let p = NoiseProcess::white(0.05);
        let a = monte_carlo_sigma_phi(&s, &p, 20_000, 8).unwrap();
        let b = monte_carlo_sigma_phi(&s.with_kind(SequenceKind::Cpmg), &p, 20_000, 8).unwrap();
        assert!((a.sigma_phi_empirical - b.sigma_phi_empirical).abs() < a.standard_error);
    }

    #[test]
    fn phase_scale_matches_eta_phi() {
        let s = PulseSequence::xy8(8, 458e3, 48e-9, 0.0).unwrap();
        let sigma_b = phase_to_tesla(0.01, &s);
        let eta = sigma_b / s.sample_rate().sqrt();
        assert!((eta / eta_phi(0.01, &s) - 1.0).abs() < 1e-12);
    }
}
