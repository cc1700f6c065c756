use super::spectrum::PhaseNoiseSpectrum;
use super::synthesis::{TrackSynthesizer, MAX_TRACK_SAMPLES};
use crate::error::{Error, Result};
use crate::quadrature::panel_edges;
use crate::rng::StreamKey;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use std::collections::HashMap;

/// Bandwidth attenuation of the injection hardware on white-noise levels.
pub const WHITE_INJECTION_GAIN: f64 = 0.8;
/// Bandwidth attenuation of the injection hardware on random-walk jumps.
pub const RANDOM_WALK_INJECTION_GAIN: f64 = 0.85;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkMode {
    /// Gaussian increments with variance `σ_rw²·R_samp·Δt`.
    Gaussian,
    /// Discrete `N(0, σ_rw²)` jumps on a grid of rate `R_samp` with a random
    /// offset per realization.
    DiscreteJumps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsdSampling {
    /// Read values off a synthesized phase track.
    Track,
    /// Draw the pulse-time values directly from their exact joint Gaussian
    /// law (covariance from the PSD). Much cheaper for long streams.
    Covariance,
}

/// Generative model of MW phase errors.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseProcess {
    White {
        sigma_wh: f64,
    },
    RandomWalk {
        sigma_rw: f64,
        r_samp: f64,
        mode: WalkMode,
    },
    PsdDriven {
        spectrum: PhaseNoiseSpectrum<f64>,
        f_cutoff: f64,
        sampling: PsdSampling,
    },
}

impl NoiseProcess {
    pub fn white(sigma_wh: f64) -> Self {
        Self::White { sigma_wh }
    }

    pub fn random_walk(sigma_rw: f64, r_samp: f64) -> Self {
        Self::RandomWalk {
            sigma_rw,
            r_samp,
            mode: WalkMode::Gaussian,
        }
    }

    pub fn psd_driven(spectrum: PhaseNoiseSpectrum<f64>, f_cutoff: f64) -> Self {
        Self::PsdDriven {
            spectrum,
            f_cutoff,
            sampling: PsdSampling::Track,
        }
    }

    pub fn silent() -> Self {
        Self::white(0.0)
    }

    pub fn with_walk_mode(self, mode: WalkMode) -> Self {
        match self {
            Self::RandomWalk { sigma_rw, r_samp, .. } => Self::RandomWalk { sigma_rw, r_samp, mode },
            other => other,
        }
    }

    pub fn with_psd_sampling(self, sampling: PsdSampling) -> Self {
        match self {
            Self::PsdDriven { spectrum, f_cutoff, .. } => Self::PsdDriven {
                spectrum,
                f_cutoff,
                sampling,
            },
            other => other,
        }
    }

    /// Applies the injection-hardware gains (white ×0.8, random walk ×0.85).
    pub fn with_injection_attenuation(self) -> Self {
        match self {
            Self::White { sigma_wh } => Self::White {
                sigma_wh: sigma_wh * WHITE_INJECTION_GAIN,
            },
            Self::RandomWalk { sigma_rw, r_samp, mode } => Self::RandomWalk {
                sigma_rw: sigma_rw * RANDOM_WALK_INJECTION_GAIN,
                r_samp,
                mode,
            },
            other => other,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::White { sigma_wh } if !(*sigma_wh >= 0.0 && sigma_wh.is_finite()) => {
                Err(Error::param("sigma_wh", "must be finite and >= 0"))
            }
            Self::RandomWalk { sigma_rw, .. } if !(*sigma_rw >= 0.0 && sigma_rw.is_finite()) => {
                Err(Error::param("sigma_rw", "must be finite and >= 0"))
            }
            Self::RandomWalk { r_samp, .. } if !(*r_samp > 0.0 && r_samp.is_finite()) => {
                Err(Error::param("r_samp", "must be finite and > 0"))
            }
            Self::PsdDriven { f_cutoff, .. } if !(*f_cutoff > 0.0 && f_cutoff.is_finite()) => {
                Err(Error::param("f_cutoff", "must be finite and > 0"))
            }
            _ => Ok(()),
        }
    }

    /// Prepares a sampler for a fixed list of nondecreasing times.
    pub fn sampler(&self, times: &[f64]) -> Result<PhaseSampler> {
        self.validate()?;
        if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::param("pulse_times", "times must be finite and >= 0"));
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::param("pulse_times", "times must be nondecreasing"));
        }
        let kind = match self {
            Self::White { sigma_wh } => SamplerKind::White { sigma: *sigma_wh },
            Self::RandomWalk { sigma_rw, r_samp, mode: WalkMode::Gaussian } => {
                let mut prev = 0.0;
                let scales = times
                    .iter()
                    .map(|&t| {
                        let s = sigma_rw * (r_samp * (t - prev)).sqrt();
                        prev = t;
                        s
                    })
                    .collect();
                SamplerKind::Walk { scales }
            }
            Self::RandomWalk { sigma_rw, r_samp, mode: WalkMode::DiscreteJumps } => SamplerKind::Jumps {
                sigma: *sigma_rw,
                rate: *r_samp,
            },
            Self::PsdDriven { spectrum, f_cutoff, sampling: PsdSampling::Track } => {
                SamplerKind::Track(TrackReader::new(spectrum, *f_cutoff, times)?)
            }
            Self::PsdDriven { spectrum, f_cutoff, sampling: PsdSampling::Covariance } => {
                SamplerKind::Covariance(covariance_factor(spectrum, *f_cutoff, times)?)
            }
        };
        Ok(PhaseSampler {
            times: times.to_vec(),
            kind,
        })
    }
}

/// A [`NoiseProcess`] bound to a list of sample times.
///
/// Random-walk and PSD-driven values are referenced to the process value at
/// `t = 0` (the frame set by the first π/2 pulse); white values are
/// independent per time by definition.
#[derive(Debug, Clone)]
pub struct PhaseSampler {
    times: Vec<f64>,
    kind: SamplerKind,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    White { sigma: f64 },
    Walk { scales: Vec<f64> },
    Jumps { sigma: f64, rate: f64 },
    Track(TrackReader),
    Covariance(DMatrix<f64>),
}

impl PhaseSampler {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Writes one realization into `out` (resized to the number of times).
    pub fn sample_into<R: Rng>(&self, rng: &mut R, out: &mut Vec<f64>) {
        out.clear();
        match &self.kind {
            SamplerKind::White { sigma } => {
                out.extend(self.times.iter().map(|_| sigma * rng.sample::<f64, _>(StandardNormal)));
            }
            SamplerKind::Walk { scales } => {
                let mut acc = 0.0;
                for s in scales {
                    acc += s * rng.sample::<f64, _>(StandardNormal);
                    out.push(acc);
                }
            }
            SamplerKind::Jumps { sigma, rate } => {
                let offset: f64 = rng.gen();
                let mut acc = 0.0;
                let mut prev = 0.0;
                for &t in &self.times {
                    let jumps = (t * rate - offset).floor() - (prev * rate - offset).floor();
                    if jumps > 0.0 {
                        acc += sigma * jumps.sqrt() * rng.sample::<f64, _>(StandardNormal);
                    }
                    prev = t;
                    out.push(acc);
                }
            }
            SamplerKind::Track(reader) => reader.sample_into(rng, out),
            SamplerKind::Covariance(l) => {
                let z = DVector::from_iterator(l.ncols(), (0..l.ncols()).map(|_| rng.sample(StandardNormal)));
                out.extend((l * z).iter().copied());
            }
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.times.len());
        self.sample_into(rng, &mut v);
        v
    }
}

/// One realization of the process at `pulse_times`.
pub fn sample_pulse_phases(process: &NoiseProcess, pulse_times: &[f64], key: StreamKey) -> Result<Vec<f64>> {
    Ok(process.sampler(pulse_times)?.sample(&mut key.rng()))
}

/// Oversampling of the synthesized track period relative to the span of the
/// requested times; keeps the frequency grid fine enough for sharp filters.
const TRACK_PERIOD_FACTOR: usize = 8;

#[derive(Debug, Clone)]
struct TrackReader {
    synth: TrackSynthesizer,
    positions: Vec<Position>,
}

#[derive(Debug, Clone, Copy)]
enum Position {
    Exact(usize),
    Between(usize, f64),
}

impl TrackReader {
    fn new(spectrum: &PhaseNoiseSpectrum<f64>, f_cutoff: f64, times: &[f64]) -> Result<Self> {
        let t_max = times.iter().copied().fold(0.0, f64::max);
        let nyquist_dt = 1.0 / (2.0 * f_cutoff);
        let dt = match common_step(times) {
            Some(h) => h / (h / nyquist_dt).ceil().max(1.0),
            None => nyquist_dt,
        };
        let span = (t_max / dt).ceil() as usize + 2;
        let n_fft = (span * TRACK_PERIOD_FACTOR).next_power_of_two();
        if n_fft > MAX_TRACK_SAMPLES {
            return Err(Error::param(
                "f_cutoff",
                format!("track of {n_fft} samples exceeds 2^26; lower f_cutoff"),
            ));
        }
        let synth = TrackSynthesizer::new(spectrum, n_fft, dt, f_cutoff)?;
        let positions = times
            .iter()
            .map(|&t| {
                let x = t / dt;
                let k = x.round();
                if (x - k).abs() < 1e-6 {
                    Position::Exact(k as usize)
                } else {
                    Position::Between(x.floor() as usize, x - x.floor())
                }
            })
            .collect();
        Ok(Self { synth, positions })
    }

    fn sample_into<R: Rng>(&self, rng: &mut R, out: &mut Vec<f64>) {
        let mut buf = Vec::new();
        self.synth.fill(rng, &mut buf);
        let origin = buf[0].re;
        out.extend(self.positions.iter().map(|p| match *p {
            Position::Exact(k) => buf[k].re - origin,
            Position::Between(k, w) => (1.0 - w) * buf[k].re + w * buf[k + 1].re - origin,
        }));
    }
}

/// Largest `h` such that every time is (numerically) an integer multiple of
/// `h`, taken as the smallest positive gap including the origin.
fn common_step(times: &[f64]) -> Option<f64> {
    let mut pts: Vec<f64> = std::iter::once(0.0).chain(times.iter().copied()).collect();
    pts.sort_by(f64::total_cmp);
    let h = pts
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !h.is_finite() {
        return None;
    }
    let on_grid = times.iter().all(|&t| {
        let x = t / h;
        (x - x.round()).abs() < 1e-7 * x.max(1.0)
    });
    on_grid.then_some(h)
}

/// Lower Cholesky factor of `Cov(x(t_i) − x(0), x(t_j) − x(0))`.
fn covariance_factor(spectrum: &PhaseNoiseSpectrum<f64>, f_cutoff: f64, times: &[f64]) -> Result<DMatrix<f64>> {
    let n = times.len();
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let width = if t_max > 0.0 { 1.0 / (4.0 * t_max) } else { f_cutoff };
    let edges = panel_edges(0.0, f_cutoff, &spectrum.nodes(), width);
    let (nodes, weights) = fixed_gk15_nodes(&edges);
    let weighted: Vec<f64> = nodes
        .iter()
        .zip(&weights)
        .map(|(&f, &w)| w * spectrum.psd_unchecked(f))
        .collect();
    let mut cache: HashMap<i64, f64> = HashMap::new();
    let mut autocov = |lag: f64| -> f64 {
        let key = (lag.abs() * 1e15).round() as i64;
        *cache.entry(key).or_insert_with(|| {
            let w = 2.0 * std::f64::consts::PI * lag.abs();
            nodes.iter().zip(&weighted).map(|(&f, &s)| s * (w * f).cos()).sum()
        })
    };
    let r0 = autocov(0.0);
    let mut c = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = autocov(times[i] - times[j]) - autocov(times[i]) - autocov(times[j]) + r0;
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    let scale = (0..n).map(|i| c[(i, i)]).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(DMatrix::zeros(n, n));
    }
    let mut jitter = 0.0;
    for _ in 0..12 {
        let mut m = c.clone();
        for i in 0..n {
            m[(i, i)] += jitter;
        }
        if let Some(ch) = m.cholesky() {
            return Ok(ch.l());
        }
        jitter = if jitter == 0.0 { scale * 1e-14 } else { jitter * 10.0 };
    }
    Err(Error::Integration("phase covariance is not positive definite".into()))
}

fn fixed_gk15_nodes(edges: &[f64]) -> (Vec<f64>, Vec<f64>) {
    const X: [f64; 8] = [
        0.991_455_371_120_812_6,
        0.949_107_912_342_758_5,
        0.864_864_423_359_769_1,
        0.741_531_185_599_394_4,
        0.586_087_235_467_691_1,
        0.405_845_151_377_397_2,
        0.207_784_955_007_898_5,
        0.0,
    ];
    const W: [f64; 8] = [
        0.022_935_322_010_529_22,
        0.063_092_092_629_978_55,
        0.104_790_010_322_250_2,
        0.140_653_259_715_525_9,
        0.169_004_726_639_267_9,
        0.190_350_578_064_785_4,
        0.204_432_940_075_298_9,
        0.209_482_141_084_727_8,
    ];
    let mut nodes = Vec::with_capacity(edges.len() * 15);
    let mut weights = Vec::with_capacity(edges.len() * 15);
    for w in edges.windows(2) {
        let half = 0.5 * (w[1] - w[0]);
        let mid = w[0] + half;
        for j in 0..8 {
            if X[j] == 0.0 {
                nodes.push(mid);
                weights.push(W[j] * half);
            } else {
                nodes.push(mid - half * X[j]);
                nodes.push(mid + half * X[j]);
                weights.push(W[j] * half);
                weights.push(W[j] * half);
            }
        }
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{linear_fit, std_dev};

    #[test]
    fn silent_white_is_zero() {
        let v = sample_pulse_phases(&NoiseProcess::white(0.0), &[1.0, 2.0, 3.0], StreamKey::new(1, 0)).unwrap();
        assert_eq!(v, vec![0.0; 3]);
    }

    #[test]
    fn walk_increment_std() {
        let p = NoiseProcess::random_walk(1e-3, 1e6);
        let s = p.sampler(&[10e-6, 80e-6]).unwrap();
        let mut rng = StreamKey::new(5, 0).rng();
        let inc: Vec<f64> = (0..100_000)
            .map(|_| {
                let v = s.sample(&mut rng);
                v[1] - v[0]
            })
            .collect();
        let expected = 1e-3 * (1e6 * 70e-6f64).sqrt();
        assert!((std_dev(&inc) / expected - 1.0).abs() < 0.02);
    }

    #[test]
    fn jump_mode_matches_gaussian_when_dense() {
        let p = NoiseProcess::random_walk(1e-3, 1e6).with_walk_mode(WalkMode::DiscreteJumps);
        let s = p.sampler(&[70e-6]).unwrap();
        let mut rng = StreamKey::new(9, 0).rng();
        let x: Vec<f64> = (0..50_000).map(|_| s.sample(&mut rng)[0]).collect();
        assert!((std_dev(&x) / (1e-3 * 70f64.sqrt()) - 1.0).abs() < 0.02);
    }

    #[test]
    fn white_lag_one_autocorrelation() {
        let times: Vec<f64> = (0..1_000_000).map(|i| i as f64).collect();
        let v = sample_pulse_phases(&NoiseProcess::white(1.0), &times, StreamKey::new(11, 0)).unwrap();
        let num: f64 = v.windows(2).map(|w| w[0] * w[1]).sum();
        let den: f64 = v.iter().map(|x| x * x).sum();
        assert!((num / den).abs() < 0.01);
    }

    #[test]
    fn walk_variance_linear_in_time() {
        let times: Vec<f64> = (1..=10).map(|i| i as f64 * 1e-5).collect();
        let s = NoiseProcess::random_walk(2e-3, 5e5).sampler(&times).unwrap();
        let mut rng = StreamKey::new(2, 0).rng();
        let mut acc = vec![0.0; times.len()];
        let n = 100_000;
        for _ in 0..n {
            for (a, x) in acc.iter_mut().zip(s.sample(&mut rng)) {
                *a += x * x;
            }
        }
        let var: Vec<f64> = acc.iter().map(|a| a / n as f64).collect();
        assert!(linear_fit(&times, &var).r_squared > 0.999);
    }

    #[test]
    fn flat_psd_per_sample_variance() {
        // per-sample variance of x(t) - x(0) for a flat band-limited PSD is 2·S·f_c
        let s0 = 1e-10;
        let fc = 1e6;
        let spec = PhaseNoiseSpectrum::flat_psd(1e9, s0).unwrap();
        let p = NoiseProcess::psd_driven(spec, fc);
        let sampler = p.sampler(&[3e-6, 7e-6]).unwrap();
        let mut rng = StreamKey::new(4, 0).rng();
        let x: Vec<f64> = (0..10_000).map(|_| sampler.sample(&mut rng)[1]).collect();
        let var = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        assert!((var / (2.0 * s0 * fc) - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn covariance_and_track_agree() {
        let spec = PhaseNoiseSpectrum::new(1e9, &[(1e3, -100.0), (1e5, -110.0), (1e6, -130.0)]).unwrap();
        let times: Vec<f64> = (1..=8).map(|j| (j as f64 - 0.5) * 2e-6).chain([16e-6]).collect();
        let phi = |v: &[f64]| -> f64 {
            let n = v.len() - 1;
            -v[n] + (0..n).map(|i| if (n - 1 - i).is_multiple_of(2) { 2.0 * v[i] } else { -2.0 * v[i] }).sum::<f64>()
        };
        let mut out = Vec::new();
        for sampling in [PsdSampling::Track, PsdSampling::Covariance] {
            let s = NoiseProcess::psd_driven(spec.clone(), 1e7).with_psd_sampling(sampling).sampler(&times).unwrap();
            let mut rng = StreamKey::new(8, 0).rng();
            let x: Vec<f64> = (0..4000).map(|_| phi(&s.sample(&mut rng))).collect();
            out.push(std_dev(&x));
        }
        assert!((out[0] / out[1] - 1.0).abs() < 0.06, "{out:?}");
    }

    #[test]
    fn deterministic_and_validated() {
        let p = NoiseProcess::random_walk(1e-3, 1e6);
        let a = sample_pulse_phases(&p, &[1e-6, 2e-6], StreamKey::new(3, 7)).unwrap();
        let b = sample_pulse_phases(&p, &[1e-6, 2e-6], StreamKey::new(3, 7)).unwrap();
        assert_eq!(a, b);
        assert!(p.sampler(&[2e-6, 1e-6]).is_err());
        assert!(NoiseProcess::random_walk(1e-3, 0.0).validate().is_err());
        assert!(NoiseProcess::white(-1.0).validate().is_err());
    }

    #[test]
    fn injection_gains() {
        assert_eq!(
            NoiseProcess::white(1.0).with_injection_attenuation(),
            NoiseProcess::white(0.8)
        );
        match NoiseProcess::random_walk(1.0, 1.0).with_injection_attenuation() {
            NoiseProcess::RandomWalk { sigma_rw, .. } => assert_eq!(sigma_rw, 0.85),
            _ => unreachable!(),
        }
    }
}
