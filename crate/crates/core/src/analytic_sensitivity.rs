//! Closed-form and quadrature sensitivity predictions.
//!
//! Every `eta_*` function returns an equivalent magnetic sensitivity in
//! T·s^1/2. Functions that take a duty cycle divide by `√duty`.

use crate::constants::GAMMA_NV;
use crate::error::{Error, Result};
use crate::noise_models::PhaseNoiseSpectrum;
use crate::pulse_sequences::{FilterFunction, PulseSequence};
use crate::quadrature::{integrate_panels, panel_edges, QuadOptions};
use crate::scalar::Real;

/// Default upper offset for pulsed filter-function integrals.
pub const PULSED_F_CUTOFF: f64 = 0.1e9;
/// Default upper offset for the cw frequency-noise integral.
pub const CW_F_CUTOFF: f64 = 1.0e6;
/// Ratio between a mean-magnitude FFT floor and η for white noise, `√(π/2)`.
pub const FFT_FLOOR_FACTOR: f64 = 1.253_314_137_315_500_3;

/// Cap on quadrature panels for the cw integral.
const MAX_CW_PANELS: f64 = 4_194_304.0;

/// Optical readout parameters for the photoelectron shot-noise limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutModel<T> {
    pub contrast_c: T,
    /// Photoelectrons collected per readout.
    pub n_ph: T,
    /// Signal (readout) window.
    pub t_r: T,
    /// Normalization (reference) window.
    pub t_n: T,
}

impl<T: Real> ReadoutModel<T> {
    pub fn new(contrast_c: T, n_ph: T, t_r: T, t_n: T) -> Result<Self> {
        if !(contrast_c > T::zero() && contrast_c < T::one()) {
            return Err(Error::param("contrast_c", format!("must lie in (0, 1), got {contrast_c}")));
        }
        if !(n_ph > T::zero() && n_ph.is_finite()) {
            return Err(Error::param("n_ph", "must be finite and > 0"));
        }
        if !(t_r > T::zero() && t_n > T::zero() && t_r.is_finite() && t_n.is_finite()) {
            return Err(Error::param("t_r", "readout windows must be finite and > 0"));
        }
        Ok(Self { contrast_c, n_ph, t_r, t_n })
    }

    /// Balanced-detection excess noise factor `√(2(1 + t_r/t_n))`.
    pub fn xi(&self) -> T {
        (T::lit(2.0) * (T::one() + self.t_r / self.t_n)).sqrt()
    }
}

/// Lorentzian cw-ODMR readout model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CwModel<T> {
    pub contrast_c: T,
    /// Full width at half maximum of the resonance.
    pub linewidth_gamma: T,
    pub f_cutoff: T,
}

impl<T: Real> CwModel<T> {
    pub fn new(contrast_c: T, linewidth_gamma: T, f_cutoff: T) -> Result<Self> {
        if !(contrast_c > T::zero() && contrast_c < T::one()) {
            return Err(Error::param("contrast_c", "must lie in (0, 1)"));
        }
        if !(linewidth_gamma > T::zero() && linewidth_gamma.is_finite()) {
            return Err(Error::param("linewidth_gamma", "must be finite and > 0"));
        }
        if !(f_cutoff > T::zero() && f_cutoff.is_finite()) {
            return Err(Error::param("f_cutoff", "must be finite and > 0"));
        }
        Ok(Self {
            contrast_c,
            linewidth_gamma,
            f_cutoff,
        })
    }

    /// Fluorescence slope `−dF/F₀ per Hz` at the steepest point of the line.
    pub fn slope(&self) -> T {
        self.contrast_c * T::lit(0.75) * T::lit(3.0).sqrt() / self.linewidth_gamma
    }
}

fn gamma<T: Real>() -> T {
    T::lit(GAMMA_NV)
}

fn check_duty<T: Real>(duty: T) -> Result<()> {
    if duty > T::zero() && duty <= T::one() {
        Ok(())
    } else {
        Err(Error::param("duty", format!("must lie in (0, 1], got {duty}")))
    }
}

fn check_nonneg<T: Real>(name: &'static str, v: T) -> Result<()> {
    if v >= T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and >= 0, got {v}")))
    }
}

fn check_cutoff<T: Real>(f_cutoff: T) -> Result<()> {
    if f_cutoff > T::zero() && f_cutoff.is_finite() {
        Ok(())
    } else {
        Err(Error::param("f_cutoff", format!("must be finite and > 0, got {f_cutoff}")))
    }
}

/// RMS phase error `√(∫₀^{f_cutoff} S_φ(f) F(f) df)` of `seq` (finite pulses).
pub fn sigma_phi_filter<T: Real>(spectrum: &PhaseNoiseSpectrum<T>, seq: &PulseSequence<T>, f_cutoff: T) -> Result<T> {
    sigma_phi_filter_with(spectrum, &seq.filter(), f_cutoff)
}

/// As [`sigma_phi_filter`] with an explicit filter function.
pub fn sigma_phi_filter_with<T: Real>(
    spectrum: &PhaseNoiseSpectrum<T>,
    filter: &FilterFunction<T>,
    f_cutoff: T,
) -> Result<T> {
    check_cutoff(f_cutoff)?;
    let edges = filter.panel_edges(T::zero(), f_cutoff, &spectrum.nodes());
    let var = integrate_panels(
        |f| spectrum.psd_unchecked(f) * filter.value(f),
        &edges,
        &QuadOptions::default(),
    )?;
    Ok(var.max(T::zero()).sqrt())
}

/// `η = σ_φ/(4 γ √τ_tot)·√(1 + t_dead/τ_tot)`.
pub fn eta_phi<T: Real>(sigma_phi: T, seq: &PulseSequence<T>) -> T {
    let tt = seq.tau_tot();
    sigma_phi / (T::lit(4.0) * gamma::<T>() * tt.sqrt()) * (T::one() + seq.t_dead / tt).sqrt()
}

/// White per-pulse phase noise: `η = (σ_wh/γ)·√(f_xy8/2)/√duty`.
pub fn eta_white<T: Real>(sigma_wh: T, f_xy8: T, duty: T) -> Result<T> {
    check_duty(duty)?;
    check_nonneg("sigma_wh", sigma_wh)?;
    Ok(sigma_wh / gamma::<T>() * (f_xy8 / T::lit(2.0)).sqrt() / duty.sqrt())
}

/// Random-walk phase noise: `η = σ_rw·√R_samp/(4γ)/√duty`.
pub fn eta_random_walk<T: Real>(sigma_rw: T, r_samp: T, duty: T) -> Result<T> {
    check_duty(duty)?;
    check_nonneg("sigma_rw", sigma_rw)?;
    Ok(sigma_rw * r_samp.sqrt() / (T::lit(4.0) * gamma::<T>()) / duty.sqrt())
}

/// Total-phase spread for i.i.d. per-pulse errors, `2σ_wh·√(N + 1/4)`.
pub fn sigma_phi_white<T: Real>(sigma_wh: T, n_pi: u32) -> T {
    T::lit(2.0) * sigma_wh * (T::from_u32(n_pi).unwrap() + T::lit(0.25)).sqrt()
}

/// Total-phase spread for a random walk, `σ_rw·√(τ_tot·R_samp)`.
pub fn sigma_phi_random_walk<T: Real>(sigma_rw: T, tau_tot: T, r_samp: T) -> T {
    sigma_rw * (tau_tot * r_samp).sqrt()
}

/// Photoelectron shot-noise limit `(ξ/√δ)/(4 γ C √(τ_tot N_ph))`.
pub fn eta_shot_noise<T: Real>(model: &ReadoutModel<T>, seq: &PulseSequence<T>) -> T {
    let tt = seq.tau_tot();
    model.xi() / seq.duty().sqrt() / (T::lit(4.0) * gamma::<T>() * model.contrast_c * (tt * model.n_ph).sqrt())
}

/// Pulsed sensitivity floor set by a flat oscillator phase-noise level.
pub fn eta_johnson_pulsed<T: Real>(l_min_dbc: T, n_pi: u32, tau_tot: T, f_cutoff: T) -> Result<T> {
    if n_pi == 0 {
        return Err(Error::param("n_pi", "must be at least 1"));
    }
    check_cutoff(f_cutoff)?;
    let n1 = T::from_u32(n_pi).unwrap() + T::one();
    let lin = T::lit(10.0).powf(l_min_dbc / T::lit(10.0));
    Ok((T::PI() * f_cutoff * n1 * lin / (T::lit(2.0) * tau_tot)).sqrt() / gamma::<T>())
}

/// RMS frequency error of a `tau`-averaged cw measurement,
/// `√(∫₀^{f_cutoff} f² S_φ(f) sinc²(π f τ) df)`.
pub fn cw_sigma_f<T: Real>(spectrum: &PhaseNoiseSpectrum<T>, tau: T, f_cutoff: T) -> Result<T> {
    if !(tau > T::zero() && tau.is_finite()) {
        return Err(Error::param("tau", "must be finite and > 0"));
    }
    check_cutoff(f_cutoff)?;
    let natural = T::one() / (T::lit(4.0) * tau);
    let width = natural.max(f_cutoff / T::lit(MAX_CW_PANELS));
    let edges = panel_edges(T::zero(), f_cutoff, &spectrum.nodes(), width);
    let pt = T::PI() * tau;
    let var = integrate_panels(
        |f| {
            let s = (pt * f).sin() / pt;
            spectrum.psd_unchecked(f) * s * s
        },
        &edges,
        &QuadOptions::default(),
    )?;
    Ok(var.max(T::zero()).sqrt())
}

/// `η_f = σ_f·√τ/γ`.
pub fn cw_eta_f<T: Real>(sigma_f: T, tau: T) -> T {
    sigma_f * tau.sqrt() / gamma::<T>()
}

/// Equivalent field spread of a single cw sample, `σ_f/γ`.
pub fn cw_sigma_b<T: Real>(sigma_f: T) -> T {
    sigma_f / gamma::<T>()
}

/// cw sensitivity for a flat level `l_dbc`: `(1/(πγ))·√(S₀ f_cutoff/(2τ))`.
pub fn eta_johnson_cw<T: Real>(l_dbc: T, tau: T, f_cutoff: T) -> T {
    let s0 = T::lit(2.0) * T::lit(10.0).powf(l_dbc / T::lit(10.0));
    (s0 * f_cutoff / (T::lit(2.0) * tau)).sqrt() / (T::PI() * gamma::<T>())
}

/// Shortest meaningful sampling interval behind a lock-in, `1/(2·f_enbw)`.
pub fn lockin_min_interval<T: Real>(f_enbw: T) -> T {
    T::one() / (T::lit(2.0) * f_enbw)
}

/// Rejects sampling intervals shorter than the lock-in filter allows.
pub fn check_lockin_interval<T: Real>(tau: T, f_enbw: T) -> Result<()> {
    if !(f_enbw > T::zero()) {
        return Err(Error::param("lockin_enbw", "must be > 0"));
    }
    let tau_min = lockin_min_interval(f_enbw);
    if tau < tau_min {
        return Err(Error::param(
            "tau",
            format!("{tau} s is shorter than the lock-in minimum {tau_min} s"),
        ));
    }
    Ok(())
}

/// Mean-magnitude FFT floor expected for white noise of sensitivity `eta`.
pub fn fft_floor<T: Real>(eta: T) -> T {
    eta * T::lit(FFT_FLOOR_FACTOR)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{FilterFunction, PhaseNoiseSpectrum, PulseSequence};

    fn table_a1() -> PulseSequence {
        PulseSequence::xy8(8, 458e3, 48e-9, 15e-6).unwrap()
    }

    #[test]
    fn zero_inputs_give_zero() {
        let seq = table_a1();
        let silent = PhaseNoiseSpectrum::silent(1e9).unwrap();
        assert_eq!(sigma_phi_filter(&silent, &seq, 1e8).unwrap(), 0.0);
        assert_eq!(eta_phi(0.0, &seq), 0.0);
        assert_eq!(eta_white(0.0, 458e3, 1.0).unwrap(), 0.0);
        assert_eq!(eta_random_walk(0.0, 1e6, 1.0).unwrap(), 0.0);
        assert_eq!(cw_sigma_f(&silent, 1e-3, 1e6).unwrap(), 0.0);
        assert_eq!(cw_eta_f(0.0, 1e-3), 0.0);
    }

    #[test]
    fn eta_phi_example() {
        let seq = PulseSequence::xy8_with_total(8, 70e-6, 0.0, 0.0).unwrap();
        let eta = eta_phi(8.37e-3, &seq);
        let by_hand = 8.37e-3 / (4.0 * 2.803e10 * 7e-5f64.sqrt());
        assert!((eta / by_hand - 1.0).abs() < 1e-12);
        assert!((eta * 1e12 - 8.9).abs() < 0.05);
        // same number via the random-walk closed form
        let rw = eta_random_walk(1e-3, 1e6, 1.0).unwrap();
        assert!((rw / eta - 1.0).abs() < 2e-3);
    }

    #[test]
    fn white_and_random_walk_examples() {
        let w: f64 = eta_white(0.01, 458e3, 1.0).unwrap();
        assert!((w * 1e12 - 171.0).abs() < 1.0);
        let rw: f64 = eta_random_walk(1e-3, 1e6, 1.0).unwrap();
        assert!((rw * 1e12 - 8.92).abs() < 0.01);
        assert!(eta_white(0.01, 458e3, 0.0).is_err());
        assert!(eta_random_walk(0.01, 1e6, 1.5).is_err());
    }

    #[test]
    fn white_doubles_n_grows_root_two() {
        let a = PulseSequence::xy8_with_total(4, 70e-6, 0.0, 0.0).unwrap();
        let b = PulseSequence::xy8_with_total(8, 70e-6, 0.0, 0.0).unwrap();
        let ea = eta_white(0.01, a.center_frequency(), 1.0).unwrap();
        let eb = eta_white(0.01, b.center_frequency(), 1.0).unwrap();
        assert!((eb / ea - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn closed_forms_agree_with_eta_phi() {
        for (n_r, td) in [(1u32, 0.0), (8, 15e-6), (17, 3e-6)] {
            let seq = PulseSequence::xy8_with_total(n_r, 70e-6, 0.0, td).unwrap();
            let sigma_wh = 0.013;
            let via_phi = eta_phi(2.0 * sigma_wh * seq.n().sqrt(), &seq);
            let direct = eta_white(sigma_wh, seq.center_frequency(), seq.duty()).unwrap();
            assert!((via_phi / direct - 1.0).abs() < 1e-12);
            let via_phi = eta_phi(sigma_phi_random_walk(2e-3, seq.tau_tot(), 3e5), &seq);
            let direct = eta_random_walk(2e-3, 3e5, seq.duty()).unwrap();
            assert!((via_phi / direct - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn duty_factor() {
        let d: f64 = 0.37;
        let pairs = [
            (eta_white(0.01, 4e5, d).unwrap(), eta_white(0.01, 4e5, 1.0).unwrap()),
            (eta_random_walk(0.01, 4e5, d).unwrap(), eta_random_walk(0.01, 4e5, 1.0).unwrap()),
        ];
        for (a, b) in pairs {
            assert!((a - b / d.sqrt()).abs() < 1e-12 * a);
        }
        let seq = PulseSequence::xy8_with_total(8, 70e-6, 0.0, 0.0).unwrap();
        let tt = seq.tau_tot();
        let dead = seq.with_t_dead(tt * (1.0 / d - 1.0));
        assert!((eta_phi(0.1, &dead) / eta_phi(0.1, &seq) - 1.0 / d.sqrt()).abs() < 1e-12);
        let m = ReadoutModel::new(0.013, 1.23e9, 1.5e-6, 4e-6).unwrap();
        assert!((eta_shot_noise(&m, &dead) / eta_shot_noise(&m, &seq) - 1.0 / d.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn shot_noise_example() {
        let seq = PulseSequence::from_timing(crate::pulse_sequences::SequenceKind::Xy8, 64, 0.522e-6, 48e-9, 15e-6)
            .unwrap();
        let m = ReadoutModel::new(0.013, 1.23e9, 1.5e-6, 4e-6).unwrap();
        let eta: f64 = eta_shot_noise(&m, &seq) * 1e12;
        assert!((eta / 4.3 - 1.0).abs() < 0.03, "{eta}");
        assert!((fft_floor(eta) / 5.4 - 1.0).abs() < 0.03);
        let m2 = ReadoutModel::new(0.026, 1.23e9, 1.5e-6, 4e-6).unwrap();
        assert!((eta_shot_noise(&m2, &seq) * 1e12 / eta - 0.5).abs() < 1e-12);
        let m4 = ReadoutModel::new(0.013, 4.0 * 1.23e9, 1.5e-6, 4e-6).unwrap();
        assert!((eta_shot_noise(&m4, &seq) * 1e12 / eta - 0.5).abs() < 1e-12);
        assert!(ReadoutModel::new(1.2, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn johnson_pulsed_example() {
        let eta = eta_johnson_pulsed(-177.0, 40, 50e-6, 10e6).unwrap();
        let by_hand = (std::f64::consts::PI * 1e7 * 41.0 * 10f64.powf(-17.7) / 1e-4).sqrt() / 28.03e9;
        assert!((eta / by_hand - 1.0).abs() < 1e-12);
        assert!((eta / 1.8e-13 - 1.0).abs() < 0.05);
        let e10 = eta_johnson_pulsed(-177.0, 40, 50e-6, 1e8).unwrap();
        assert!((e10 / eta - 10f64.sqrt()).abs() < 1e-9);
        let e4 = eta_johnson_pulsed(-177.0, 163, 50e-6, 10e6).unwrap();
        assert!((e4 / eta - 2.0).abs() < 1e-9);
    }

    #[test]
    fn cw_flat_matches_closed_form() {
        let s0 = 2.0 * 10f64.powf(-17.7);
        let spec = PhaseNoiseSpectrum::flat_psd(1e9, s0).unwrap();
        for tau in [1e-4, 1e-3, 1e-2] {
            let fc = 1e6;
            let sf = cw_sigma_f(&spec, tau, fc).unwrap();
            let closed = (2.0 * s0 * fc).sqrt() / (2.0 * std::f64::consts::PI * tau);
            assert!((sf / closed - 1.0).abs() < 0.05, "{tau}: {sf} vs {closed}");
            let eta = cw_eta_f(sf, tau);
            assert!((eta / eta_johnson_cw(-177.0, tau, fc) - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn johnson_cw_scales() {
        let a: f64 = eta_johnson_cw(-177.0, 5e-6, 1e6);
        let b = eta_johnson_cw(-177.0, 20e-6, 1e6);
        assert!((a / b - 2.0).abs() < 1e-12);
        assert!(a > 3e-15 && a < 3e-14);
    }

    #[test]
    fn lockin_guard() {
        assert!((lockin_min_interval(1e3f64) - 5e-4).abs() < 1e-18);
        assert!(check_lockin_interval(1e-3, 1e3).is_ok());
        assert!(check_lockin_interval(1e-4, 1e3).is_err());
    }

    #[test]
    fn flat_filter_integral_tracks_mean() {
        // delta pulses: mean of F is 4N + 2
        let seq = PulseSequence::xy8(1, 458e3, 0.0, 0.0).unwrap();
        let s0 = 1e-12;
        let spec = PhaseNoiseSpectrum::flat_psd(1e9, s0).unwrap();
        let ff = FilterFunction::delta_pulses(seq);
        let sig = sigma_phi_filter_with(&spec, &ff, 1e8).unwrap();
        let expect = (s0 * (4.0 * seq.n() + 2.0) * 1e8).sqrt();
        assert!((sig / expect - 1.0).abs() < 0.02);
    }

    #[test]
    fn f32_agrees() {
        let s32 = crate::pulse_sequences::PulseSequence::<f32>::xy8(8, 458e3, 48e-9, 15e-6).unwrap();
        let s64 = table_a1();
        let a = eta_phi(0.01f32, &s32) as f64;
        let b = eta_phi(0.01, &s64);
        assert!((a / b - 1.0).abs() < 1e-5);
        let spec32 = crate::noise_models::PhaseNoiseSpectrum::<f32>::flat(1e9, -120.0).unwrap();
        let spec64 = PhaseNoiseSpectrum::flat(1e9, -120.0).unwrap();
        let a = sigma_phi_filter(&spec32, &s32, 1e7).unwrap() as f64;
        let b = sigma_phi_filter(&spec64, &s64, 1e7).unwrap();
        assert!((a / b - 1.0).abs() < 1e-2);
    }
}
