use super::spectrum::PhaseNoiseSpectrum;
use crate::error::{Error, Result};
use crate::rng::StreamKey;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Upper bound on synthesized track length.
pub const MAX_TRACK_SAMPLES: usize = 1 << 26;

/// Gaussian phase tracks with a prescribed one-sided PSD, by random-phase
/// inverse FFT. The track is periodic in `n_fft·dt`.
#[derive(Clone)]
pub struct TrackSynthesizer {
    n_fft: usize,
    dt: f64,
    amps: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for TrackSynthesizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TrackSynthesizer")
            .field("n_fft", &self.n_fft)
            .field("dt", &self.dt)
            .finish()
    }
}

impl TrackSynthesizer {
    /// Bins above `f_max` (and DC) carry no power.
    pub fn new(spectrum: &PhaseNoiseSpectrum<f64>, n_fft: usize, dt: f64, f_max: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", "must be finite and > 0"));
        }
        if !(2..=MAX_TRACK_SAMPLES).contains(&n_fft) {
            return Err(Error::param("n_fft", format!("{n_fft} outside [2, 2^26]")));
        }
        let df = 1.0 / (n_fft as f64 * dt);
        let amps = (0..=n_fft / 2)
            .map(|k| {
                let f = k as f64 * df;
                if k == 0 || f > f_max {
                    0.0
                } else {
                    (spectrum.psd_unchecked(f) * df).sqrt()
                }
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_inverse(n_fft);
        Ok(Self { n_fft, dt, amps, fft })
    }

    pub fn n_fft(&self) -> usize {
        self.n_fft
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Fills `buf` (resized to `n_fft`) with one realization; the track is the
    /// real part.
    pub fn fill<R: Rng>(&self, rng: &mut R, buf: &mut Vec<Complex64>) {
        buf.clear();
        buf.resize(self.n_fft, Complex64::new(0.0, 0.0));
        let nyq = self.n_fft / 2;
        for (k, &amp) in self.amps.iter().enumerate().skip(1) {
            let a: f64 = rng.sample(StandardNormal);
            if k == nyq && self.n_fft.is_multiple_of(2) {
                buf[k] = Complex64::new(amp * a, 0.0);
            } else {
                let b: f64 = rng.sample(StandardNormal);
                buf[k] = Complex64::new(amp * a, -amp * b);
            }
        }
        self.fft.process(buf);
    }
}

/// Synthesizes `round(duration/dt)` samples of a phase track with one-sided
/// PSD `S_φ` up to the Nyquist frequency `1/(2·dt)`.
pub fn synthesize_phase_track(
    spectrum: &PhaseNoiseSpectrum<f64>,
    duration: f64,
    dt: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    if !(dt > 0.0 && duration > 0.0) {
        return Err(Error::param("dt", "dt and duration must be > 0"));
    }
    let len = (duration / dt).round();
    if !(len >= 1.0 && len <= MAX_TRACK_SAMPLES as f64) {
        return Err(Error::param("duration", format!("{len} samples outside [1, 2^26]")));
    }
    let len = len as usize;
    let n_fft = len.next_power_of_two().max(2);
    let synth = TrackSynthesizer::new(spectrum, n_fft, dt, f64::INFINITY)?;
    let mut buf = Vec::new();
    synth.fill(&mut StreamKey::new(seed, 0).rng(), &mut buf);
    Ok(buf[..len].iter().map(|c| c.re).collect())
}
