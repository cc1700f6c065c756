use crate::error::{Error, Result};
use crate::noise_models::NoiseProcess;
use crate::pulse_sequences::PulseSequence;
use crate::rng::StreamKey;
use crate::spin_simulator::{phase_to_tesla, sequence_phases, TestTone};
use crate::analytic_sensitivity::{eta_shot_noise, ReadoutModel};
use rand::Rng;
use rand_distr::StandardNormal;
use std::collections::BTreeMap;

/// Per-sequence readouts in tesla-equivalent units.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutStream {
    pub samples: Vec<f64>,
    pub f_samp: f64,
    /// `key=value` provenance carried into CSV headers.
    pub metadata: BTreeMap<String, String>,
}

impl ReadoutStream {
    pub fn new(samples: Vec<f64>, f_samp: f64) -> Result<Self> {
        if !(f_samp > 0.0 && f_samp.is_finite()) {
            return Err(Error::param("f_samp", format!("must be finite and > 0, got {f_samp}")));
        }
        Ok(Self {
            samples,
            f_samp,
            metadata: BTreeMap::new(),
        })
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.f_samp
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 / self.f_samp
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|x| x * factor).collect(),
            f_samp: self.f_samp,
            metadata: self.metadata.clone(),
        }
    }
}

/// Apparent frequency of `f` sampled at `f_samp`: `(|f − f_ref|, f_ref)` with
/// `f_ref` the nearest multiple of `f_samp` (exact half-multiples go down).
pub fn alias_frequency(f: f64, f_samp: f64) -> Result<(f64, f64)> {
    if !(f >= 0.0 && f.is_finite()) {
        return Err(Error::param("f", "must be finite and >= 0"));
    }
    if !(f_samp > 0.0 && f_samp.is_finite()) {
        return Err(Error::param("f_samp", "must be finite and > 0"));
    }
    let x = f / f_samp;
    let k = if x - x.floor() > 0.5 { x.ceil() } else { x.floor() };
    let f_ref = k * f_samp;
    Ok(((f - f_ref).abs(), f_ref))
}

/// Readout noise independent of the microwave phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShotNoise {
    None,
    /// Per-sequence Gaussian phase noise in radians.
    PhaseSigma(f64),
    /// White readout noise specified by its sensitivity in T·s^1/2.
    Eta(f64),
    /// Photoelectron shot noise of an optical readout.
    Readout(ReadoutModel<f64>),
}

impl ShotNoise {
    /// Per-sample standard deviation in tesla.
    pub fn sigma_tesla(&self, seq: &PulseSequence<f64>) -> f64 {
        let f_samp = seq.sample_rate();
        match *self {
            ShotNoise::None => 0.0,
            ShotNoise::PhaseSigma(s) => phase_to_tesla(s, seq),
            ShotNoise::Eta(eta) => eta * f_samp.sqrt(),
            ShotNoise::Readout(m) => eta_shot_noise(&m, seq) * f_samp.sqrt(),
        }
    }
}

/// Inputs of [`synthesize_stream`].
#[derive(Debug, Clone)]
pub struct StreamConfig {
    pub seq: PulseSequence<f64>,
    pub process: NoiseProcess,
    /// Physical test field; aliasing follows from sampling at sequence starts.
    pub tone: Option<TestTone>,
    pub shot: ShotNoise,
    pub duration: f64,
    pub seed: u64,
}

const NOISE_LABEL: u64 = 1;
const SHOT_LABEL: u64 = 2;

/// Synthesizes a synchronized series of sequences.
///
/// Readout `k` is the test field at the start of sequence `k`, plus the
/// microwave-phase contribution `φ_tot/(4γτ_tot)` and the readout noise.
/// Each sequence draws an independent noise realization.
pub fn synthesize_stream(cfg: &StreamConfig) -> Result<ReadoutStream> {
    let f_samp = cfg.seq.sample_rate();
    if !(cfg.duration * f_samp >= 10.0) {
        return Err(Error::param("duration", "must cover at least 10 sequences"));
    }
    let n = (cfg.duration * f_samp).round() as usize;
    let root = StreamKey::new(cfg.seed, 0);
    let phases = sequence_phases(&cfg.seq, &cfg.process, n, root.derive(NOISE_LABEL))?;
    let shot = cfg.shot.sigma_tesla(&cfg.seq);
    let mut rng = root.derive(SHOT_LABEL).rng();
    let samples = phases
        .iter()
        .enumerate()
        .map(|(k, &phi)| {
            let t = k as f64 / f_samp;
            let field = cfg.tone.map_or(0.0, |tone| tone.value(t));
            let noise = if shot > 0.0 { shot * rng.sample::<f64, _>(StandardNormal) } else { 0.0 };
            field + phase_to_tesla(phi, &cfg.seq) + noise
        })
        .collect();
    let mut stream = ReadoutStream::new(samples, f_samp)?
        .with_meta("seed", cfg.seed)
        .with_meta("f_samp_hz", f_samp)
        .with_meta("n_pi", cfg.seq.n_pi)
        .with_meta("tau_s", cfg.seq.tau)
        .with_meta("t_pi_s", cfg.seq.t_pi)
        .with_meta("t_dead_s", cfg.seq.t_dead)
        .with_meta("shot_sigma_t", shot);
    if let Some(tone) = cfg.tone {
        stream = stream
            .with_meta("test_amp_rms_t", tone.amplitude_rms)
            .with_meta("test_freq_hz", tone.frequency);
    }
    Ok(stream)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alias_examples() {
        let (a, r) = alias_frequency(1000.0, 1000.0).unwrap();
        assert_eq!((a, r), (0.0, 1000.0));
        let (a, r) = alias_frequency(457.9e3, 11.78e3).unwrap();
        assert!((r - 459.42e3).abs() < 1.0);
        assert!((a - 1.52e3).abs() < 1.0);
        let (a, r) = alias_frequency(1500.0, 1000.0).unwrap();
        assert_eq!((a, r), (500.0, 1000.0));
        assert!(alias_frequency(-1.0, 1.0).is_err());
    }

    #[test]
    fn paper_reference_alias() {
        // 459.3 kHz reference from a 11.776 kHz sequence rate (39 × f_samp)
        let f_samp = 459.3e3 / 39.0;
        let (a, r) = alias_frequency(457.9e3, f_samp).unwrap();
        assert!((r - 459.3e3).abs() < 1e-6);
        assert!((a - 1.4e3).abs() < 1e-6);
    }

    #[test]
    fn exact_reference_gives_constant_stream() {
        let seq = PulseSequence::xy8(8, 458e3, 48e-9, 15e-6).unwrap();
        let f_samp = seq.sample_rate();
        let cfg = StreamConfig {
            seq,
            process: NoiseProcess::silent(),
            tone: Some(TestTone::new(100e-12, 39.0 * f_samp)),
            shot: ShotNoise::None,
            duration: 0.05,
            seed: 1,
        };
        let s = synthesize_stream(&cfg).unwrap();
        assert!(s.samples.iter().all(|&x| (x - s.samples[0]).abs() < 1e-9 * 100e-12));
        assert_eq!(s.len(), (0.05 * f_samp).round() as usize);
    }

    #[test]
    fn deterministic_in_seed() {
        let seq = PulseSequence::xy8(1, 458e3, 48e-9, 15e-6).unwrap();
        let cfg = StreamConfig {
            seq,
            process: NoiseProcess::white(0.01),
            tone: None,
            shot: ShotNoise::Eta(6e-12),
            duration: 0.01,
            seed: 77,
        };
        assert_eq!(synthesize_stream(&cfg).unwrap(), synthesize_stream(&cfg).unwrap());
        let other = StreamConfig { seed: 78, ..cfg.clone() };
        assert_ne!(synthesize_stream(&cfg).unwrap(), synthesize_stream(&other).unwrap());
    }
}
