use super::stream::ReadoutStream;
use crate::error::{Error, Result};
use crate::stats::NeumaierSum;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

/// How per-interval spectra are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Averaging {
    /// Root of the mean squared magnitude.
    Rms,
    /// Mean magnitude.
    Magnitude,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    /// Length of each FFT interval in seconds.
    pub interval: f64,
    pub averaging: Averaging,
    /// Hann window, with sine amplitudes preserved.
    pub hann: bool,
}

impl SpectrumOptions {
    pub fn new(interval: f64) -> Self {
        Self {
            interval,
            averaging: Averaging::Rms,
            hann: false,
        }
    }

    pub fn with_averaging(mut self, averaging: Averaging) -> Self {
        self.averaging = averaging;
        self
    }

    pub fn with_hann(mut self, hann: bool) -> Self {
        self.hann = hann;
        self
    }
}

/// One-sided amplitude spectral density in T·s^1/2.
///
/// `asd[j]·√bin_width` is the RMS amplitude of a sinusoid in bin `j`; without
/// a window, `Σ asd²·bin_width` is the mean square of the interval.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSpectrum {
    pub freqs: Vec<f64>,
    pub asd: Vec<f64>,
    pub bin_width: f64,
    pub n_chunks: usize,
    pub averaging: Averaging,
    pub noise_floor: Option<f64>,
    pub spike_bins: Vec<usize>,
}

impl AmplitudeSpectrum {
    /// Index of the bin nearest `f`.
    pub fn bin_of(&self, f: f64) -> usize {
        ((f / self.bin_width).round() as usize).min(self.freqs.len().saturating_sub(1))
    }

    /// RMS amplitude of the bin nearest `f`.
    pub fn amplitude_at(&self, f: f64) -> f64 {
        self.asd[self.bin_of(f)] * self.bin_width.sqrt()
    }

    /// Converts a floor read off this spectrum into a white-noise sensitivity.
    pub fn eta_from_floor(&self, floor: f64) -> f64 {
        floor / white_floor_factor(self.averaging, self.n_chunks)
    }
}

/// Splits `stream` into whole intervals, transforms each and averages.
pub fn amplitude_spectrum(stream: &ReadoutStream, opts: &SpectrumOptions) -> Result<AmplitudeSpectrum> {
    if !(opts.interval > 0.0 && opts.interval.is_finite()) {
        return Err(Error::param("interval", "must be finite and > 0"));
    }
    let len = (opts.interval * stream.f_samp).round() as usize;
    if len < 2 {
        return Err(Error::param("interval", "shorter than two samples"));
    }
    let n_chunks = stream.len() / len;
    if n_chunks == 0 {
        return Err(Error::param(
            "interval",
            format!("interval {} s exceeds stream duration {} s", opts.interval, stream.duration()),
        ));
    }
    let fft = FftPlanner::new().plan_fft_forward(len);
    let window: Vec<f64> = if opts.hann {
        (0..len)
            .map(|n| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / len as f64).cos())
            .collect()
    } else {
        vec![1.0; len]
    };
    let gain: f64 = window.iter().sum::<f64>();
    let n_bins = len / 2 + 1;
    let bin_width = stream.f_samp / len as f64;
    let per_chunk: Vec<Vec<f64>> = stream
        .samples
        .par_chunks_exact(len)
        .map(|chunk| {
            let mut buf: Vec<Complex64> = chunk.iter().zip(&window).map(|(x, w)| Complex64::new(x * w, 0.0)).collect();
            fft.process(&mut buf);
            (0..n_bins)
                .map(|j| {
                    let one_sided = if j == 0 || (len.is_multiple_of(2) && j == len / 2) { 1.0 } else { 2f64.sqrt() };
                    one_sided * buf[j].norm() / gain / bin_width.sqrt()
                })
                .collect()
        })
        .collect();
    let asd = (0..n_bins)
        .map(|j| {
            let mut acc = NeumaierSum::new();
            match opts.averaging {
                Averaging::Rms => {
                    per_chunk.iter().for_each(|c| acc.add(c[j] * c[j]));
                    (acc.total() / n_chunks as f64).sqrt()
                }
                Averaging::Magnitude => {
                    per_chunk.iter().for_each(|c| acc.add(c[j]));
                    acc.total() / n_chunks as f64
                }
            }
        })
        .collect();
    Ok(AmplitudeSpectrum {
        freqs: (0..n_bins).map(|j| j as f64 * bin_width).collect(),
        asd,
        bin_width,
        n_chunks,
        averaging: opts.averaging,
        noise_floor: None,
        spike_bins: Vec::new(),
    })
}

/// Median spectrum level of white noise with sensitivity η, in units of η,
/// after averaging `n_chunks` unwindowed intervals.
///
/// Each bin is `√2·η` times a unit-power Rayleigh variable. RMS averaging
/// gives `√2·√(median Gamma(M)/M)` (Wilson–Hilferty for M > 1); magnitude
/// averaging tends to `√(π/2)`.
pub fn white_floor_factor(averaging: Averaging, n_chunks: usize) -> f64 {
    let m = n_chunks.max(1) as f64;
    match averaging {
        Averaging::Rms if n_chunks <= 1 => (2.0 * std::f64::consts::LN_2).sqrt(),
        Averaging::Rms => (2.0 * (1.0 - 1.0 / (9.0 * m)).powi(3)).sqrt(),
        Averaging::Magnitude if n_chunks <= 1 => (2.0 * std::f64::consts::LN_2).sqrt(),
        Averaging::Magnitude => (std::f64::consts::PI / 2.0).sqrt() - 0.0689 / m,
    }
}

/// Converts a per-bin RMS amplitude into a density in T·s^1/2.
pub fn sensitivity_from_floor(floor_per_bin: f64, bin_width: f64) -> Result<f64> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::param("bin_width", "must be finite and > 0"));
    }
    Ok(floor_per_bin / bin_width.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;
    use crate::stats::median;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn white(eta: f64, f_samp: f64, duration: f64, seed: u64) -> ReadoutStream {
        let mut rng = StreamKey::new(seed, 0).rng();
        let n = (duration * f_samp) as usize;
        let sigma = eta * f_samp.sqrt();
        ReadoutStream::new((0..n).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect(), f_samp).unwrap()
    }

    #[test]
    fn sine_reads_rms_amplitude() {
        let fs = 1000.0;
        let a = 212e-12;
        let s: Vec<f64> = (0..4000)
            .map(|k| a * 2f64.sqrt() * (2.0 * std::f64::consts::PI * 124.0 * k as f64 / fs + 0.3).sin())
            .collect();
        let stream = ReadoutStream::new(s, fs).unwrap();
        for hann in [false, true] {
            let sp = amplitude_spectrum(&stream, &SpectrumOptions::new(1.0).with_hann(hann)).unwrap();
            assert!((sp.amplitude_at(124.0) / a - 1.0).abs() < 1e-9, "hann={hann}");
        }
        let sp = amplitude_spectrum(&stream, &SpectrumOptions::new(0.25)).unwrap();
        assert!((sp.amplitude_at(124.0) / a - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_input_zero_spectrum() {
        let stream = ReadoutStream::new(vec![0.0; 256], 100.0).unwrap();
        let sp = amplitude_spectrum(&stream, &SpectrumOptions::new(1.0)).unwrap();
        assert!(sp.asd.iter().all(|&x| x == 0.0));
        assert_eq!(sp.freqs.len(), 51);
        assert!(amplitude_spectrum(&stream, &SpectrumOptions::new(10.0)).is_err());
    }

    #[test]
    fn parseval() {
        let stream = white(1.0, 1000.0, 1.0, 3);
        let m = crate::stats::mean(&stream.samples);
        let centred = ReadoutStream::new(stream.samples.iter().map(|x| x - m).collect(), 1000.0).unwrap();
        let sp = amplitude_spectrum(&centred, &SpectrumOptions::new(1.0)).unwrap();
        let power: f64 = sp.asd.iter().map(|a| a * a * sp.bin_width).sum();
        let var = centred.samples.iter().map(|x| x * x).sum::<f64>() / centred.len() as f64;
        assert!((power / var - 1.0).abs() < 1e-6);
    }

    #[test]
    fn white_floor_factors() {
        for (avg, m) in [(Averaging::Rms, 1usize), (Averaging::Rms, 20), (Averaging::Magnitude, 20), (Averaging::Magnitude, 1)] {
            let stream = white(1.0, 2000.0, m as f64, 10 + m as u64);
            let sp = amplitude_spectrum(&stream, &SpectrumOptions::new(1.0).with_averaging(avg)).unwrap();
            let med = median(&sp.asd[1..]);
            let expect = white_floor_factor(avg, m);
            assert!((med / expect - 1.0).abs() < 0.03, "{avg:?} {m}: {med} vs {expect}");
        }
    }

    #[test]
    fn magnitude_floor_is_1253() {
        let stream = white(6.0e-12, 2000.0, 150.0, 5);
        let sp = amplitude_spectrum(&stream, &SpectrumOptions::new(1.0).with_averaging(Averaging::Magnitude)).unwrap();
        let floor = median(&sp.asd[1..]);
        assert!((floor / 6.0e-12 / 1.253 - 1.0).abs() < 0.01, "{}", floor / 6.0e-12);
    }

    #[test]
    fn interval_normalization_invariance() {
        let stream = white(1.0, 1000.0, 16.0, 4);
        let a = amplitude_spectrum(&stream, &SpectrumOptions::new(1.0)).unwrap();
        let b = amplitude_spectrum(&stream, &SpectrumOptions::new(0.25)).unwrap();
        let ea = a.eta_from_floor(median(&a.asd[1..]));
        let eb = b.eta_from_floor(median(&b.asd[1..]));
        assert!((ea / eb - 1.0).abs() < 0.03);
        assert_eq!(sensitivity_from_floor(3.0, 1.0).unwrap(), 3.0);
        let per_bin = median(&b.asd[1..]) * b.bin_width.sqrt();
        assert!((sensitivity_from_floor(per_bin, b.bin_width).unwrap() / median(&b.asd[1..]) - 1.0).abs() < 1e-12);
    }
}
