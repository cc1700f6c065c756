use crate::analytic_sensitivity::CwModel;
use crate::constants::GAMMA_NV;
use crate::error::{Error, Result};
use crate::noise_models::{synthesize_phase_track, PhaseNoiseSpectrum};
use crate::stats::std_dev;

/// Normalized fluorescence of a cw magnetometer (`F₀ = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct CwTrace {
    pub dt: f64,
    pub fluorescence: Vec<f64>,
    /// Microwave frequency error `(1/2π)·dφ/dt` behind each sample.
    pub delta_f: Vec<f64>,
    slope: f64,
}

impl CwTrace {
    /// Detuning inferred from the fluorescence, `(1 − F)/slope`.
    pub fn inferred_detuning(&self) -> Vec<f64> {
        self.fluorescence.iter().map(|f| (1.0 - f) / self.slope).collect()
    }

    /// Field-equivalent samples averaged over consecutive windows of `tau`.
    pub fn block_average_field(&self, tau: f64) -> Result<Vec<f64>> {
        let m = (tau / self.dt).round() as usize;
        if m == 0 || m > self.fluorescence.len() {
            return Err(Error::param("tau", "window must hold between 1 and all samples"));
        }
        Ok(self
            .inferred_detuning()
            .chunks_exact(m)
            .map(|c| c.iter().sum::<f64>() / m as f64 / GAMMA_NV)
            .collect())
    }

    /// Standard deviation of `tau`-averaged field samples.
    pub fn sigma_b(&self, tau: f64) -> Result<f64> {
        let blocks = self.block_average_field(tau)?;
        if blocks.len() < 2 {
            return Err(Error::param("tau", "need at least two windows"));
        }
        Ok(std_dev(&blocks))
    }
}

/// Simulates `F(t) = 1 − C·(3√3/4)·Δf(t)/Γ` with `Δf = γ·B(t) + δf(t)`.
///
/// `δf` is the finite difference of a phase track synthesized at step `dt`
/// (so the phase-noise bandwidth is `1/(2dt)`); `b_series` holds one field
/// value per output sample and its length sets the duration.
pub fn simulate_cw_trace(
    model: &CwModel<f64>,
    spectrum: &PhaseNoiseSpectrum<f64>,
    b_series: &[f64],
    dt: f64,
    seed: u64,
) -> Result<CwTrace> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", "must be finite and > 0"));
    }
    if b_series.is_empty() {
        return Err(Error::param("b_series", "is empty"));
    }
    let n = b_series.len();
    let track = synthesize_phase_track(spectrum, (n + 1) as f64 * dt, dt, seed)?;
    let delta_f: Vec<f64> = track
        .windows(2)
        .map(|w| (w[1] - w[0]) / (2.0 * std::f64::consts::PI * dt))
        .collect();
    let slope = model.slope();
    let fluorescence = b_series
        .iter()
        .zip(&delta_f)
        .map(|(b, df)| 1.0 - slope * (GAMMA_NV * b + df))
        .collect();
    Ok(CwTrace {
        dt,
        fluorescence,
        delta_f,
        slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic_sensitivity::{cw_sigma_b, cw_sigma_f};
    use crate::stats::power_law_fit;

    fn model() -> CwModel<f64> {
        CwModel::new(0.02, 1e6, 1e6).unwrap()
    }

    #[test]
    fn silent_is_constant() {
        let s = PhaseNoiseSpectrum::silent(1e9).unwrap();
        let t = simulate_cw_trace(&model(), &s, &vec![0.0; 1000], 5e-7, 1).unwrap();
        assert!(t.fluorescence.iter().all(|&f| f == 1.0));
    }

    #[test]
    fn white_noise_sigma_b_goes_as_inverse_tau() {
        let s = PhaseNoiseSpectrum::flat(1e9, -120.0).unwrap();
        let dt = 5e-7;
        let t = simulate_cw_trace(&model(), &s, &vec![0.0; 1 << 20], dt, 2).unwrap();
        let taus = [1e-5, 4e-5, 1.6e-4, 6.4e-4];
        let sig: Vec<f64> = taus.iter().map(|&tau| t.sigma_b(tau).unwrap()).collect();
        let fit = power_law_fit(&taus, &sig);
        assert!((fit.slope + 1.0).abs() < 0.05, "{}", fit.slope);
        let analytic = cw_sigma_b(cw_sigma_f(&s, 1.6e-4, 1e6).unwrap());
        assert!((sig[2] / analytic - 1.0).abs() < 0.1, "{} vs {analytic}", sig[2]);
    }

    #[test]
    fn sine_recovered_after_averaging() {
        let s = PhaseNoiseSpectrum::silent(1e9).unwrap();
        let dt = 1e-6;
        let tau = 1e-4;
        let f = 1.0 / (20.0 * tau);
        let amp = 1e-9;
        let b: Vec<f64> = (0..200_000).map(|k| amp * (2.0 * std::f64::consts::PI * f * k as f64 * dt).sin()).collect();
        let t = simulate_cw_trace(&model(), &s, &b, dt, 3).unwrap();
        let blocks = t.block_average_field(tau).unwrap();
        let peak = blocks.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!((peak / amp - 1.0).abs() < 0.02, "{}", peak / amp);
    }
}
