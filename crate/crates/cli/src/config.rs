//! Run configuration: a TOML document with `[sequence]`, `[noise]`,
//! `[readout]`, `[sweep]`, `[filter]`, `[montecarlo]`, `[pipeline]` and `[cw]`
//! sections. Flags and sweep points are applied to the raw table before it is
//! deserialized, so every value goes through the same validation.

use crate::error::{CliError, Result};
use mwnoise::analytic_sensitivity::ReadoutModel;
use mwnoise::noise_models::{parse_spectrum_table, preset, PsdSampling, WalkMode};
use mwnoise::pulse_sequences::SequenceKind;
use mwnoise::signal_pipeline::{Averaging, FloorParams, ShotNoise};
use mwnoise::{ghz_to_hz, khz_to_hz, ns_to_s, pt_to_t, us_to_s, NoiseProcess, PhaseNoiseSpectrum, PulseSequence};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use toml::{Table, Value};

/// Parameters that `--sweep` and `[sweep] axis` may name.
pub const SWEEP_KEYS: [&str; 14] = [
    "sequence.n_r",
    "sequence.n_pi",
    "sequence.t_pi_ns",
    "sequence.tau_ns",
    "sequence.tau_tot_us",
    "sequence.t_dead_us",
    "sequence.f_xy8_khz",
    "noise.carrier_ghz",
    "noise.shift_db",
    "noise.sigma_wh",
    "noise.sigma_rw",
    "noise.r_samp_hz",
    "noise.f_cutoff_mhz",
    "cw.tau_ms",
];

const TIMING_KEYS: [&str; 3] = ["tau_ns", "tau_tot_us", "f_xy8_khz"];
const INTEGER_KEYS: [&str; 2] = ["n_r", "n_pi"];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub sequence: SequenceSection,
    #[serde(default)]
    pub noise: NoiseSection,
    pub readout: Option<ReadoutSection>,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub filter: FilterSection,
    #[serde(default)]
    pub montecarlo: MonteCarloSection,
    #[serde(default)]
    pub pipeline: PipelineSection,
    pub cw: Option<CwSection>,
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SequenceSection {
    pub kind: String,
    pub n_r: u32,
    /// π-pulse count of a CPMG sequence.
    pub n_pi: Option<u32>,
    pub t_pi_ns: f64,
    pub t_dead_us: f64,
    pub tau_ns: Option<f64>,
    pub tau_tot_us: Option<f64>,
    pub f_xy8_khz: Option<f64>,
}

impl Default for SequenceSection {
    fn default() -> Self {
        Self {
            kind: "xy8".into(),
            n_r: 8,
            n_pi: None,
            t_pi_ns: 48.0,
            t_dead_us: 14.85,
            tau_ns: None,
            tau_tot_us: None,
            f_xy8_khz: None,
        }
    }
}

/// Free precession per half spacing when no timing key is given.
const DEFAULT_TAU_NS: f64 = 522.0;

impl SequenceSection {
    pub fn build(&self) -> Result<PulseSequence> {
        let kind = match self.kind.to_ascii_lowercase().as_str() {
            "xy8" => SequenceKind::Xy8,
            "cpmg" => SequenceKind::Cpmg,
            other => return Err(CliError::config(format!("sequence.kind `{other}`: expected xy8 or cpmg"))),
        };
        let n_pi = match kind {
            SequenceKind::Xy8 => {
                if self.n_pi.is_some() {
                    return Err(CliError::config("sequence.n_pi applies to cpmg; use n_r for xy8"));
                }
                8 * self.n_r
            }
            SequenceKind::Cpmg => self.n_pi.unwrap_or(8 * self.n_r),
        };
        if n_pi == 0 {
            return Err(CliError::config("sequence needs at least one π pulse"));
        }
        let t_pi = ns_to_s(self.t_pi_ns);
        let t_dead = us_to_s(self.t_dead_us);
        let spacing = match (self.tau_ns, self.tau_tot_us, self.f_xy8_khz) {
            (None, None, None) => ns_to_s(2.0 * DEFAULT_TAU_NS) + t_pi,
            (Some(tau), None, None) => ns_to_s(2.0 * tau) + t_pi,
            (None, Some(tt), None) => us_to_s(tt) / n_pi as f64,
            (None, None, Some(f)) => 1.0 / (2.0 * khz_to_hz(f)),
            _ => return Err(CliError::config("give only one of sequence.tau_ns, tau_tot_us, f_xy8_khz")),
        };
        let tau = (spacing - t_pi) / 2.0;
        Ok(PulseSequence::from_timing(kind, n_pi, tau, t_pi, t_dead)?)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    pub preset: Option<String>,
    pub spectrum_file: Option<PathBuf>,
    pub flat_dbc: Option<f64>,
    pub sigma_wh: Option<f64>,
    pub sigma_rw: Option<f64>,
    pub r_samp_hz: f64,
    /// `gaussian` or `jumps`.
    pub walk_mode: String,
    /// Rescales a spectrum to this carrier (L + 20·log10 ratio).
    pub carrier_ghz: Option<f64>,
    pub shift_db: f64,
    pub f_cutoff_mhz: f64,
    pub finite_pulses: bool,
    /// `covariance` or `track`.
    pub sampling: String,
    /// Flat level used for the Johnson column of `predict`.
    pub johnson_dbc: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            preset: None,
            spectrum_file: None,
            flat_dbc: None,
            sigma_wh: None,
            sigma_rw: None,
            r_samp_hz: 1.0e6,
            walk_mode: "gaussian".into(),
            carrier_ghz: None,
            shift_db: 0.0,
            f_cutoff_mhz: 100.0,
            finite_pulses: true,
            sampling: "covariance".into(),
            johnson_dbc: -177.0,
        }
    }
}

#[derive(Debug, Clone)]
pub enum NoiseSource {
    Spectrum(PhaseNoiseSpectrum),
    White(f64),
    RandomWalk { sigma_rw: f64, r_samp: f64, mode: WalkMode },
}

impl NoiseSection {
    pub fn f_cutoff(&self) -> f64 {
        self.f_cutoff_mhz * 1e6
    }

    /// The single configured source, or `None` if there is none.
    pub fn source(&self, base_dir: &Path) -> Result<Option<NoiseSource>> {
        let given = [
            self.preset.is_some(),
            self.spectrum_file.is_some(),
            self.flat_dbc.is_some(),
            self.sigma_wh.is_some(),
            self.sigma_rw.is_some(),
        ];
        if given.iter().filter(|&&g| g).count() > 1 {
            return Err(CliError::config(
                "exactly one of noise.preset, spectrum_file, flat_dbc, sigma_wh, sigma_rw may be set",
            ));
        }
        let spectrum = if let Some(name) = &self.preset {
            Some(preset(name).map_err(|e| CliError::config(e.to_string()))?)
        } else if let Some(file) = &self.spectrum_file {
            let path = base_dir.join(file);
            let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            let carrier = self.carrier_ghz.map(ghz_to_hz);
            Some(parse_spectrum_table(&text, carrier).map_err(|source| CliError::Input { path, source })?)
        } else if let Some(level) = self.flat_dbc {
            Some(PhaseNoiseSpectrum::flat(self.carrier_ghz.map_or(1e9, ghz_to_hz), level)?)
        } else {
            None
        };
        if let Some(spec) = spectrum {
            let spec = match self.carrier_ghz {
                Some(c) => spec.scaled_to_carrier(ghz_to_hz(c))?,
                None => spec,
            };
            return Ok(Some(NoiseSource::Spectrum(spec.shifted_db(self.shift_db))));
        }
        if let Some(s) = self.sigma_wh {
            return Ok(Some(NoiseSource::White(s)));
        }
        if let Some(s) = self.sigma_rw {
            let mode = match self.walk_mode.to_ascii_lowercase().as_str() {
                "gaussian" => WalkMode::Gaussian,
                "jumps" => WalkMode::DiscreteJumps,
                other => return Err(CliError::config(format!("noise.walk_mode `{other}`: expected gaussian or jumps"))),
            };
            return Ok(Some(NoiseSource::RandomWalk {
                sigma_rw: s,
                r_samp: self.r_samp_hz,
                mode,
            }));
        }
        Ok(None)
    }

    pub fn required_source(&self, base_dir: &Path) -> Result<NoiseSource> {
        self.source(base_dir)?.ok_or_else(|| {
            CliError::config("no noise source: set one of noise.preset, spectrum_file, flat_dbc, sigma_wh, sigma_rw")
        })
    }

    pub fn process(&self, source: &NoiseSource) -> Result<NoiseProcess> {
        let process = match source {
            NoiseSource::Spectrum(spec) => {
                let sampling = match self.sampling.to_ascii_lowercase().as_str() {
                    "covariance" => PsdSampling::Covariance,
                    "track" => PsdSampling::Track,
                    other => {
                        return Err(CliError::config(format!("noise.sampling `{other}`: expected covariance or track")))
                    }
                };
                NoiseProcess::psd_driven(spec.clone(), self.f_cutoff()).with_psd_sampling(sampling)
            }
            NoiseSource::White(s) => NoiseProcess::white(*s),
            NoiseSource::RandomWalk { sigma_rw, r_samp, mode } => {
                NoiseProcess::random_walk(*sigma_rw, *r_samp).with_walk_mode(*mode)
            }
        };
        process.validate()?;
        Ok(process)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReadoutSection {
    pub contrast: f64,
    pub n_ph: f64,
    pub t_r_us: f64,
    pub t_n_us: f64,
    /// Overrides the photon model with a fixed white floor.
    pub eta_shot_pt: Option<f64>,
}

impl Default for ReadoutSection {
    fn default() -> Self {
        Self {
            contrast: 0.013,
            n_ph: 1.23e9,
            t_r_us: 1.5,
            t_n_us: 4.0,
            eta_shot_pt: None,
        }
    }
}

impl ReadoutSection {
    pub fn shot(&self) -> Result<ShotNoise> {
        match self.eta_shot_pt {
            Some(eta) => Ok(ShotNoise::Eta(pt_to_t(eta))),
            None => Ok(ShotNoise::Readout(self.model()?)),
        }
    }

    pub fn model(&self) -> Result<ReadoutModel<f64>> {
        Ok(ReadoutModel::new(self.contrast, self.n_ph, us_to_s(self.t_r_us), us_to_s(self.t_n_us))?)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterSection {
    pub f_max_mhz: f64,
    pub points: usize,
}

impl Default for FilterSection {
    fn default() -> Self {
        Self {
            f_max_mhz: 5.0,
            points: 2001,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloSection {
    pub realizations: usize,
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        Self { realizations: 10_000 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineSection {
    /// `stream`, `excess`, `gradiometer` or `calibrate`.
    pub scenario: String,
    pub duration_s: f64,
    pub interval_s: f64,
    /// `rms` or `magnitude`.
    pub averaging: String,
    pub hann: bool,
    pub f_test_khz: Option<f64>,
    pub test_amp_pt: f64,
    pub low_cut_hz: f64,
    pub test_half_width_hz: f64,
    pub trim_fraction: f64,
    pub spike_sigma: f64,
    pub floor_off_pt: f64,
    pub floors_on_pt: Vec<f64>,
    pub shot_sigma_rad: f64,
    /// Common-mode phase noise as a multiple of the difference-channel shot floor.
    pub common_mode_ratio: f64,
    pub uniform_amp_pt: f64,
    pub gradient_amp_pt: f64,
    pub kappa_t_per_v: f64,
    pub v_max: f64,
    pub calibration_points: usize,
    pub calibration_noise: f64,
    pub calibration_file: Option<PathBuf>,
}

impl Default for PipelineSection {
    fn default() -> Self {
        Self {
            scenario: "stream".into(),
            duration_s: 2.0,
            interval_s: 0.1,
            averaging: "rms".into(),
            hann: false,
            f_test_khz: None,
            test_amp_pt: 0.0,
            low_cut_hz: 1.0e3,
            test_half_width_hz: 0.5e3,
            trim_fraction: 0.1,
            spike_sigma: 4.0,
            floor_off_pt: 6.0,
            floors_on_pt: vec![7.6, 13.3],
            shot_sigma_rad: 0.01,
            common_mode_ratio: 10.0,
            uniform_amp_pt: 6300.0,
            gradient_amp_pt: 7500.0,
            kappa_t_per_v: 1e-8,
            v_max: 1.0,
            calibration_points: 41,
            calibration_noise: 0.01,
            calibration_file: None,
        }
    }
}

impl PipelineSection {
    pub fn averaging(&self) -> Result<Averaging> {
        match self.averaging.to_ascii_lowercase().as_str() {
            "rms" => Ok(Averaging::Rms),
            "magnitude" => Ok(Averaging::Magnitude),
            other => Err(CliError::config(format!("pipeline.averaging `{other}`: expected rms or magnitude"))),
        }
    }

    pub fn floor_params(&self) -> FloorParams {
        FloorParams {
            low_cut_hz: self.low_cut_hz,
            test_half_width_hz: self.test_half_width_hz,
            trim_fraction: self.trim_fraction,
            spike_sigma: self.spike_sigma,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CwSection {
    /// Sampling interval; the reported bandwidth is `1/(2τ)`.
    pub tau_ms: f64,
    pub f_cutoff_mhz: f64,
}

impl Default for CwSection {
    fn default() -> Self {
        Self {
            tau_ms: 0.5,
            f_cutoff_mhz: 1.0,
        }
    }
}

/// Raw configuration document plus the directory relative paths resolve against.
#[derive(Debug, Clone)]
pub struct ConfigDoc {
    pub table: Table,
    pub base_dir: PathBuf,
}

impl ConfigDoc {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self {
                table: Table::new(),
                base_dir: PathBuf::from("."),
            });
        };
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::config(format!("{}: {}", path.display(), e.message())))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        Ok(Self { table, base_dir })
    }

    /// Applies `section.key=value`; the value is read as TOML, falling back to a string.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("override `{assignment}` is not KEY=VALUE")))?;
        let value = parse_value(raw.trim());
        self.set(key.trim(), value)
    }

    pub fn set(&mut self, dotted: &str, value: Value) -> Result<()> {
        let (section, key) = match dotted.split_once('.') {
            Some((s, k)) => (Some(s), k),
            None => (None, dotted),
        };
        let target = match section {
            None => &mut self.table,
            Some(s) => self
                .table
                .entry(s)
                .or_insert_with(|| Value::Table(Table::new()))
                .as_table_mut()
                .ok_or_else(|| CliError::config(format!("`{s}` is not a section")))?,
        };
        if section == Some("sequence") && TIMING_KEYS.contains(&key) {
            for other in TIMING_KEYS.iter().filter(|k| **k != key) {
                target.remove(*other);
            }
        }
        target.insert(key.to_string(), value);
        Ok(())
    }

    pub fn parse(&self) -> Result<RunConfig> {
        RunConfig::deserialize(self.table.clone()).map_err(|e| CliError::config(e.message().to_string()))
    }

    /// `key=value` lines describing the effective document.
    pub fn flattened(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        flatten("", &self.table, &mut out);
        out
    }
}

fn flatten(prefix: &str, table: &Table, out: &mut Vec<(String, String)>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => out.push((key, other.to_string())),
        }
    }
}

fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Maps a sweep axis name (`n_r` or `sequence.n_r`) to its dotted key.
pub fn resolve_axis(name: &str) -> Result<&'static str> {
    SWEEP_KEYS
        .iter()
        .copied()
        .find(|k| *k == name || k.rsplit('.').next() == Some(name))
        .ok_or_else(|| {
            CliError::config(format!(
                "sweep axis `{name}` is not a parameter; expected one of {}",
                SWEEP_KEYS.map(|k| k.rsplit('.').next().unwrap_or(k)).join(", ")
            ))
        })
}

/// TOML value for a sweep point, integral for counting parameters.
pub fn axis_value(axis: &str, v: f64) -> Result<Value> {
    let key = axis.rsplit('.').next().unwrap_or(axis);
    if INTEGER_KEYS.contains(&key) {
        if v < 0.0 || v.fract() != 0.0 {
            return Err(CliError::config(format!("sweep value {v} for `{key}` must be a non-negative integer")));
        }
        Ok(Value::Integer(v as i64))
    } else {
        Ok(Value::Float(v))
    }
}

/// Parses `axis=v1,v2,...` from the command line.
pub fn parse_sweep_flag(flag: &str) -> Result<SweepSection> {
    let (axis, list) = flag
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("--sweep `{flag}` is not AXIS=V1,V2,...")))?;
    let values = list
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::config(format!("--sweep value `{v}` is not a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepSection {
        axis: axis.trim().to_string(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(text: &str) -> ConfigDoc {
        ConfigDoc {
            table: text.parse().unwrap(),
            base_dir: PathBuf::from("."),
        }
    }

    #[test]
    fn defaults_give_xy8_8() {
        let cfg = doc("").parse().unwrap();
        let seq = cfg.sequence.build().unwrap();
        assert_eq!(seq.n_pi, 64);
        assert!((seq.tau - 522e-9).abs() < 1e-15);
        assert!((seq.tau_tot() - 69.888e-6).abs() < 1e-12);
    }

    #[test]
    fn timing_override_replaces_siblings() {
        let mut d = doc("[sequence]\ntau_ns = 500.0\n");
        d.apply_override("sequence.tau_tot_us=70").unwrap();
        let seq = d.parse().unwrap().sequence.build().unwrap();
        assert!((seq.tau_tot() - 70e-6).abs() < 1e-15);
    }

    #[test]
    fn two_timings_rejected() {
        let d = doc("[sequence]\ntau_ns = 500.0\nf_xy8_khz = 458.0\n");
        assert!(d.parse().unwrap().sequence.build().is_err());
    }

    #[test]
    fn one_noise_source() {
        let d = doc("[noise]\npreset = \"g1-1ghz\"\nsigma_wh = 0.01\n");
        assert!(d.parse().unwrap().noise.source(Path::new(".")).is_err());
        let d = doc("[noise]\nsigma_wh = 0.01\n");
        assert!(matches!(
            d.parse().unwrap().noise.required_source(Path::new(".")).unwrap(),
            NoiseSource::White(_)
        ));
        assert!(doc("").parse().unwrap().noise.required_source(Path::new(".")).is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(doc("[sequence]\nnr = 3\n").parse().is_err());
    }

    #[test]
    fn axes() {
        assert_eq!(resolve_axis("n_r").unwrap(), "sequence.n_r");
        assert_eq!(resolve_axis("noise.sigma_wh").unwrap(), "noise.sigma_wh");
        assert!(resolve_axis("bogus").is_err());
        assert_eq!(axis_value("n_r", 4.0).unwrap(), Value::Integer(4));
        assert!(axis_value("n_r", 4.5).is_err());
        let s = parse_sweep_flag("sigma_wh=0.01, 0.02").unwrap();
        assert_eq!(s.values, vec![0.01, 0.02]);
    }
}
