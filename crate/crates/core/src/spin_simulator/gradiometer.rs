use super::monte_carlo::{phase_to_tesla, sequence_phases};
use crate::error::{Error, Result};
use crate::noise_models::NoiseProcess;
use crate::pulse_sequences::PulseSequence;
use crate::rng::StreamKey;
use crate::signal_pipeline::ReadoutStream;
use rand::Rng;
use rand_distr::StandardNormal;

/// Sinusoidal test field `√2·A_rms·cos(2π f t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestTone {
    pub amplitude_rms: f64,
    pub frequency: f64,
}

impl TestTone {
    pub fn new(amplitude_rms: f64, frequency: f64) -> Self {
        Self {
            amplitude_rms,
            frequency,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        2f64.sqrt() * self.amplitude_rms * (2.0 * std::f64::consts::PI * self.frequency * t).cos()
    }
}

/// Two sensing spots driven by one microwave source.
#[derive(Debug, Clone)]
pub struct GradiometerConfig {
    pub seq: PulseSequence<f64>,
    /// Phase noise shared by both channels.
    pub process: NoiseProcess,
    /// Field seen identically by both spots.
    pub uniform: Option<TestTone>,
    /// Field seen with opposite signs by the two spots.
    pub gradient: Option<TestTone>,
    /// Independent per-channel readout noise, in radians of phase.
    pub shot_sigma: f64,
    /// Readout scale of each channel.
    pub gains: [f64; 2],
    pub n_sequences: usize,
    pub seed: u64,
}

impl GradiometerConfig {
    pub fn new(seq: PulseSequence<f64>, process: NoiseProcess, n_sequences: usize, seed: u64) -> Self {
        Self {
            seq,
            process,
            uniform: None,
            gradient: None,
            shot_sigma: 0.0,
            gains: [1.0, 1.0],
            n_sequences,
            seed,
        }
    }

    pub fn with_uniform(mut self, tone: TestTone) -> Self {
        self.uniform = Some(tone);
        self
    }

    pub fn with_gradient(mut self, tone: TestTone) -> Self {
        self.gradient = Some(tone);
        self
    }

    pub fn with_shot_sigma(mut self, shot_sigma: f64) -> Self {
        self.shot_sigma = shot_sigma;
        self
    }

    pub fn with_gains(mut self, gains: [f64; 2]) -> Self {
        self.gains = gains;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradiometerStreams {
    pub ch1: ReadoutStream,
    pub ch2: ReadoutStream,
    /// `ch1 − ch2`: common-mode terms cancel, gradients add.
    pub diff: ReadoutStream,
}

const NOISE_LABEL: u64 = 1;
const SHOT_LABELS: [u64; 2] = [2, 3];

pub fn simulate_gradiometer(cfg: &GradiometerConfig) -> Result<GradiometerStreams> {
    if cfg.n_sequences < 2 {
        return Err(Error::param("n_sequences", "need at least 2"));
    }
    if !(cfg.shot_sigma >= 0.0 && cfg.shot_sigma.is_finite()) {
        return Err(Error::param("shot_sigma", "must be finite and >= 0"));
    }
    let seq = &cfg.seq;
    let f_samp = seq.sample_rate();
    let root = StreamKey::new(cfg.seed, 0);
    let common = sequence_phases(seq, &cfg.process, cfg.n_sequences, root.derive(NOISE_LABEL))?;
    let shot_t = phase_to_tesla(cfg.shot_sigma, seq);
    let channel = |sign: f64, gain: f64, label: u64| -> Vec<f64> {
        let mut rng = root.derive(label).rng();
        common
            .iter()
            .enumerate()
            .map(|(k, &phi)| {
                let t = k as f64 / f_samp;
                let uniform = cfg.uniform.map_or(0.0, |u| u.value(t));
                let grad = cfg.gradient.map_or(0.0, |g| g.value(t));
                let shot = if shot_t > 0.0 { shot_t * rng.sample::<f64, _>(StandardNormal) } else { 0.0 };
                gain * (phase_to_tesla(phi, seq) + uniform + sign * grad) + shot
            })
            .collect()
    };
    let s1 = channel(1.0, cfg.gains[0], SHOT_LABELS[0]);
    let s2 = channel(-1.0, cfg.gains[1], SHOT_LABELS[1]);
    let d: Vec<f64> = s1.iter().zip(&s2).map(|(a, b)| a - b).collect();
    let tag = |s: ReadoutStream, name: &str| s.with_meta("channel", name).with_meta("seed", cfg.seed);
    Ok(GradiometerStreams {
        ch1: tag(ReadoutStream::new(s1, f_samp)?, "ch1"),
        ch2: tag(ReadoutStream::new(s2, f_samp)?, "ch2"),
        diff: tag(ReadoutStream::new(d, f_samp)?, "diff"),
    })
}
