use mwnoise::analytic_sensitivity::{eta_phi, sigma_phi_filter};
use mwnoise::noise_models::{preset, preset_names};
use mwnoise::pulse_sequences::SequenceKind;
use mwnoise::signal_pipeline::{alias_frequency, amplitude_spectrum, calibration_model, excess_noise, ReadoutStream, SpectrumOptions};
use mwnoise::spin_simulator::{dq_ramsey_probability, simulate_gradiometer, GradiometerConfig, TestTone};
use mwnoise::{
    resonance_frequencies, FilterFunction, NoiseProcess, PhaseNoiseSpectrum, PulseSequence, PulseSequenceF32,
    StreamKey, GAMMA_NV, ZERO_FIELD_SPLITTING,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

/// Direct evaluation of `|1 + (−1)^{N+1} e^{iωT} + 2 Σ (−1)^j e^{iω(j−½)T/N} G|²`.
fn filter_by_sum(n_pi: u32, tau_tot: f64, t_pi: f64, f: f64) -> f64 {
    let w = 2.0 * PI * f;
    let g = (PI * f * t_pi).cos();
    let sign_end = if n_pi.is_multiple_of(2) { -1.0 } else { 1.0 };
    let mut acc = Complex64::new(1.0, 0.0) + sign_end * Complex64::from_polar(1.0, w * tau_tot);
    for j in 1..=n_pi {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let t = (j as f64 - 0.5) / n_pi as f64 * tau_tot;
        acc += 2.0 * sign * g * Complex64::from_polar(1.0, w * t);
    }
    acc.norm_sqr()
}

proptest! {
    #[test]
    fn resonances_straddle_d(b0 in 0.0f64..1.0) {
        let (lo, hi) = resonance_frequencies(b0);
        prop_assert!(hi >= lo);
        prop_assert!((hi - ZERO_FIELD_SPLITTING - GAMMA_NV * b0).abs() <= 1e-6 * hi);
        prop_assert!((lo - (ZERO_FIELD_SPLITTING - GAMMA_NV * b0)).abs() <= 1e-6 * hi);
    }

    #[test]
    fn xy8_timing_identities(n_r in 1u32..40, f_khz in 50.0f64..2000.0, t_pi_ns in 0.0f64..80.0) {
        let f = f_khz * 1e3;
        let t_pi = t_pi_ns * 1e-9;
        prop_assume!(1.0 / (2.0 * f) > t_pi);
        let s = PulseSequence::xy8(n_r, f, t_pi, 10e-6).unwrap();
        prop_assert_eq!(s.n_pi, 8 * n_r);
        prop_assert!((s.tau_tot() - s.n_pi as f64 * (2.0 * s.tau + t_pi)).abs() < 1e-15);
        prop_assert!((s.center_frequency() / f - 1.0).abs() < 1e-12);
        prop_assert!((s.center_frequency() * 2.0 * (2.0 * s.tau + t_pi) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn filter_matches_direct_sum(n_r in 1u32..6, f in 0.0f64..5e6, t_pi_ns in 0.0f64..60.0) {
        let s = PulseSequence::xy8(n_r, 458e3, t_pi_ns * 1e-9, 0.0).unwrap();
        let want = filter_by_sum(s.n_pi, s.tau_tot(), s.t_pi, f);
        let got = s.filter().value(f);
        prop_assert!(got >= 0.0);
        prop_assert!((got - want).abs() <= 1e-8 * (1.0 + want), "{got} vs {want}");
    }

    #[test]
    fn filter_bounded_by_coherent_sum(n_pi in 1u32..200, f in 0.0f64..1e8) {
        let s = PulseSequence::from_timing(SequenceKind::Cpmg, n_pi, 300e-9, 40e-9, 0.0).unwrap();
        let bound = (2.0 * n_pi as f64 + 2.0).powi(2);
        prop_assert!(s.filter().value(f) <= bound * (1.0 + 1e-12));
        prop_assert!(FilterFunction::delta_pulses(s).value(f) <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn f32_filter_tracks_f64(n_r in 1u32..4, ratio in 0.05f64..3.0) {
        let s64 = PulseSequence::xy8(n_r, 458e3, 48e-9, 0.0).unwrap();
        let s32 = PulseSequenceF32::xy8(n_r, 458e3, 48e-9, 0.0).unwrap();
        let f = ratio * 458e3;
        let peak = 4.0 * (s64.n_pi as f64).powi(2);
        let diff = (s64.filter().value(f) - s32.filter().value(f as f32) as f64).abs();
        prop_assert!(diff <= 1e-3 * peak, "{diff}");
    }

    #[test]
    fn alias_lies_in_first_zone(f in 0.0f64..1e7, fs in 1.0f64..1e5) {
        let (alias, f_ref) = alias_frequency(f, fs).unwrap();
        prop_assert!(alias <= fs / 2.0 * (1.0 + 1e-12));
        let k = f_ref / fs;
        prop_assert!((k - k.round()).abs() < 1e-9);
    }

    #[test]
    fn excess_noise_is_a_quadrature_difference(off in 0.0f64..1e-10, extra in 0.0f64..1e-10) {
        let on = (off * off + extra * extra).sqrt();
        let ex = excess_noise(on, off).unwrap();
        prop_assert!((ex.value - extra).abs() <= 1e-9 * (on + 1e-30));
        prop_assert!(!ex.on_below_off || on < off);
    }

    #[test]
    fn calibration_model_is_bounded(v in -10.0f64..10.0, vmax in 0.0f64..2.0, kappa in 1e-9f64..1e-6) {
        let y = calibration_model(v, vmax, kappa, 70e-6);
        prop_assert!((0.0..=vmax).contains(&y));
    }

    #[test]
    fn dq_probability_is_a_probability(a in -10.0f64..10.0, b in -10.0f64..10.0, bz in -1e-5f64..1e-5) {
        let p = dq_ramsey_probability(a, b, bz, 1e-6);
        prop_assert!((0.0..=1.0 + 1e-15).contains(&p));
    }

    #[test]
    fn sigma_scales_with_root_psd(k in 0.01f64..100.0) {
        let s = PulseSequence::xy8(2, 458e3, 48e-9, 15e-6).unwrap();
        let spec = PhaseNoiseSpectrum::flat(1e9, -120.0).unwrap();
        let base = sigma_phi_filter(&spec, &s, 1e7).unwrap();
        let scaled = sigma_phi_filter(&spec.scaled_psd(k), &s, 1e7).unwrap();
        prop_assert!((scaled / (base * k.sqrt()) - 1.0).abs() < 1e-9);
        prop_assert!((eta_phi(scaled, &s) / eta_phi(base, &s) - k.sqrt()).abs() < 1e-9 * k.sqrt());
    }
}

#[test]
fn spectra_are_nonnegative_and_uniform() {
    let mut rng = StreamKey::new(5, 0).rng();
    let samples: Vec<f64> = (0..4096).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let stream = ReadoutStream::new(samples, 1000.0).unwrap();
    let spec = amplitude_spectrum(&stream, &SpectrumOptions::new(1.024)).unwrap();
    assert!(spec.asd.iter().all(|&a| a >= 0.0));
    assert_eq!(spec.freqs.first(), Some(&0.0));
    assert!((spec.freqs.last().unwrap() - 500.0).abs() < 1e-9);
    assert!(spec.freqs.windows(2).all(|w| ((w[1] - w[0]) - spec.bin_width).abs() < 1e-9));
}

#[test]
fn presets_are_positive_everywhere() {
    for name in preset_names() {
        let spec = preset(name).unwrap();
        for f in [1.0, 10.0, 1e3, 1e5, 1e7, 1e9] {
            let s = spec.psd(f).unwrap();
            assert!(s > 0.0 && s.is_finite(), "{name} at {f}");
        }
    }
}

#[test]
fn pure_common_mode_cancels_exactly() {
    let seq = PulseSequence::xy8(7, 394e3, 48e-9, 15e-6).unwrap();
    let cfg = GradiometerConfig::new(seq, NoiseProcess::white(0.1), 2000, 3).with_uniform(TestTone::new(1e-9, 394e3));
    let out = simulate_gradiometer(&cfg).unwrap();
    assert!(out.diff.samples.iter().all(|&d| d == 0.0));
    assert!(out.ch1.samples.iter().any(|&x| x != 0.0));
}

#[test]
fn realizations_are_reproducible() {
    let seq = PulseSequence::xy8(4, 458e3, 48e-9, 15e-6).unwrap();
    let spec = preset("g2-2.1ghz").unwrap();
    for process in [
        NoiseProcess::white(0.01),
        NoiseProcess::random_walk(1e-3, 1e6),
        NoiseProcess::psd_driven(spec, 1e8),
    ] {
        let cfg = GradiometerConfig::new(seq, process, 64, 11).with_shot_sigma(0.01);
        assert_eq!(simulate_gradiometer(&cfg).unwrap(), simulate_gradiometer(&cfg).unwrap());
    }
}
