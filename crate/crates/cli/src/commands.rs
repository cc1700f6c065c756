use crate::config::{axis_value, resolve_axis, ConfigDoc, NoiseSource, RunConfig, SweepSection};
use crate::error::{CliError, Result};
use crate::output::{col, Column, Quantity, Row, Table, Units};
use mwnoise::analytic_sensitivity::{
    check_lockin_interval, cw_eta_f, cw_sigma_f, eta_johnson_cw, eta_johnson_pulsed, eta_phi, eta_random_walk,
    eta_shot_noise, eta_white, sigma_phi_filter_with, sigma_phi_random_walk, sigma_phi_white,
};
use mwnoise::signal_pipeline::{
    alias_frequency, amplitude_spectrum, calibration_model, estimate_noise_floor, excess_noise, fit_calibration,
    synthesize_stream, write_stream_csv, AmplitudeSpectrum, ReadoutStream, ShotNoise, SpectrumOptions, StreamConfig,
};
use mwnoise::spin_simulator::{monte_carlo_sigma_phi, phase_to_tesla, simulate_gradiometer, GradiometerConfig, TestTone};
use mwnoise::{khz_to_hz, pt_to_t, FilterFunction, NoiseProcess, PhaseNoiseSpectrum, PulseSequence, GAMMA_NV};
use rayon::prelude::*;
use std::path::{Path, PathBuf};

/// Everything a command needs besides its own flags.
#[derive(Debug, Clone)]
pub struct Context {
    pub command: &'static str,
    pub doc: ConfigDoc,
    pub sweep_flag: Option<SweepSection>,
    pub units: Units,
    pub lockin_enbw: Option<f64>,
}

/// One evaluation point: the sweep value (if any) and its configuration.
struct Point {
    value: Option<f64>,
    cfg: RunConfig,
}

impl Context {
    fn base(&self) -> Result<RunConfig> {
        self.doc.parse()
    }

    fn sweep(&self) -> Result<Option<(&'static str, Vec<f64>)>> {
        let sweep = match &self.sweep_flag {
            Some(s) => Some(s.clone()),
            None => self.base()?.sweep,
        };
        sweep
            .map(|s| {
                if s.values.is_empty() {
                    return Err(CliError::config("sweep.values is empty"));
                }
                Ok((resolve_axis(&s.axis)?, s.values))
            })
            .transpose()
    }

    fn points(&self) -> Result<Vec<Point>> {
        match self.sweep()? {
            None => Ok(vec![Point {
                value: None,
                cfg: self.base()?,
            }]),
            Some((axis, values)) => values
                .iter()
                .map(|&v| {
                    let mut doc = self.doc.clone();
                    doc.set(axis, axis_value(axis, v)?)?;
                    Ok(Point {
                        value: Some(v),
                        cfg: doc.parse()?,
                    })
                })
                .collect(),
        }
    }

    fn axis_column(&self) -> Result<Option<Column>> {
        Ok(self.sweep()?.map(|(axis, _)| {
            let leaf = axis.rsplit('.').next().unwrap_or(axis);
            let q = if leaf == "n_r" || leaf == "n_pi" { Quantity::Count } else { Quantity::Plain };
            col(leaf, q)
        }))
    }

    fn table(&self, mut columns: Vec<Column>) -> Result<Table> {
        if let Some(c) = self.axis_column()? {
            columns.insert(0, c);
        }
        let mut t = Table::new(columns);
        t.meta("tool", format!("mwnoise {}", env!("CARGO_PKG_VERSION")));
        t.meta("command", self.command);
        t.meta(
            "units",
            match self.units {
                Units::Si => "si",
                Units::Paper => "paper",
            },
        );
        t.meta("seed", self.base()?.seed);
        for (k, v) in self.doc.flattened() {
            t.meta(&format!("config.{k}"), v);
        }
        if let Some((axis, values)) = self.sweep()? {
            t.meta("sweep.axis", axis);
            t.meta("sweep.values", values.iter().map(f64::to_string).collect::<Vec<_>>().join(" "));
        }
        if let Some(enbw) = self.lockin_enbw {
            t.meta("lockin_enbw_hz", enbw);
        }
        Ok(t)
    }

    fn base_dir(&self) -> &Path {
        &self.doc.base_dir
    }
}

fn prefixed(value: Option<f64>, mut row: Row) -> Row {
    if let Some(v) = value {
        row.insert(0, Some(v));
    }
    row
}

fn filter_for(cfg: &RunConfig, seq: PulseSequence) -> FilterFunction {
    if cfg.noise.finite_pulses {
        seq.filter()
    } else {
        FilterFunction::delta_pulses(seq)
    }
}

/// `F(f)` on a uniform grid with its running integral.
pub fn filter_fn(ctx: &Context) -> Result<Table> {
    let points = ctx.points()?;
    let blocks: Vec<Vec<Row>> = points
        .par_iter()
        .map(|p| {
            let grid = &p.cfg.filter;
            if grid.points < 2 || !(grid.f_max_mhz > 0.0 && grid.f_max_mhz.is_finite()) {
                return Err(CliError::config("filter grid needs points >= 2 and f_max_mhz > 0"));
            }
            let ff = filter_for(&p.cfg, p.cfg.sequence.build()?);
            let step = grid.f_max_mhz * 1e6 / (grid.points - 1) as f64;
            let mut integral = 0.0;
            let mut rows = Vec::with_capacity(grid.points);
            for k in 0..grid.points {
                let f = k as f64 * step;
                if k > 0 {
                    integral += ff.integral(f - step, f)?;
                }
                rows.push(prefixed(p.value, vec![Some(f), Some(ff.value(f)), Some(integral)]));
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let mut t = ctx.table(vec![
        col("f", Quantity::Frequency),
        col("filter", Quantity::Plain),
        col("integral", Quantity::Frequency),
    ])?;
    t.rows = blocks.into_iter().flatten().collect();
    Ok(t)
}

/// Phase-noise spread and sensitivity of one source with finite or δ pulses.
fn analytic_phase(cfg: &RunConfig, source: &NoiseSource, seq: &PulseSequence, finite: bool) -> Result<(f64, f64)> {
    Ok(match source {
        NoiseSource::Spectrum(spec) => {
            let ff = if finite { seq.filter() } else { FilterFunction::delta_pulses(*seq) };
            let sigma = sigma_phi_filter_with(spec, &ff, cfg.noise.f_cutoff())?;
            (sigma, eta_phi(sigma, seq))
        }
        NoiseSource::White(s) => (
            sigma_phi_white(*s, seq.n_pi),
            eta_white(*s, seq.center_frequency(), seq.duty())?,
        ),
        NoiseSource::RandomWalk { sigma_rw, r_samp, .. } => (
            sigma_phi_random_walk(*sigma_rw, seq.tau_tot(), *r_samp),
            eta_random_walk(*sigma_rw, *r_samp, seq.duty())?,
        ),
    })
}

/// Closed-form and filter-function sensitivities per sweep point.
pub fn predict(ctx: &Context) -> Result<Table> {
    let points = ctx.points()?;
    let want_cw = points.iter().any(|p| p.cfg.cw.is_some());
    if ctx.lockin_enbw.is_some() && !want_cw {
        return Err(CliError::config("--lockin-enbw needs a [cw] section"));
    }
    let rows: Vec<Row> = points
        .par_iter()
        .map(|p| {
            let cfg = &p.cfg;
            let seq = cfg.sequence.build()?;
            let source = cfg.noise.source(ctx.base_dir())?;
            let phase = source
                .as_ref()
                .map(|s| analytic_phase(cfg, s, &seq, cfg.noise.finite_pulses))
                .transpose()?;
            let pick = |want: fn(&NoiseSource) -> bool| match (&source, phase) {
                (Some(s), Some((_, eta))) if want(s) => Some(eta),
                _ => None,
            };
            let shot = cfg.readout.as_ref().map(|r| r.model()).transpose()?.map(|m| eta_shot_noise(&m, &seq));
            let johnson = eta_johnson_pulsed(cfg.noise.johnson_dbc, seq.n_pi, seq.tau_tot(), cfg.noise.f_cutoff())?;
            let total = match (phase, shot) {
                (None, None) => None,
                (a, b) => Some(
                    (a.map_or(0.0, |(_, e)| e * e) + b.map_or(0.0, |e| e * e)).sqrt(),
                ),
            };
            let mut row = vec![
                Some(seq.n_pi as f64),
                Some(seq.tau_tot()),
                Some(seq.center_frequency()),
                Some(seq.duty()),
                phase.map(|(s, _)| s),
                pick(|s| matches!(s, NoiseSource::Spectrum(_))),
                pick(|s| matches!(s, NoiseSource::White(_))),
                pick(|s| matches!(s, NoiseSource::RandomWalk { .. })),
                shot,
                Some(johnson),
                total,
            ];
            if want_cw {
                row.extend(cw_columns(ctx, cfg, source.as_ref())?);
            }
            Ok(prefixed(p.value, row))
        })
        .collect::<Result<_>>()?;
    let mut columns = vec![
        col("n_pi", Quantity::Count),
        col("tau_tot", Quantity::Time),
        col("f_xy8", Quantity::Frequency),
        col("duty", Quantity::Plain),
        col("sigma_phi", Quantity::Radians),
        col("eta_filter", Quantity::Sensitivity),
        col("eta_white", Quantity::Sensitivity),
        col("eta_rw", Quantity::Sensitivity),
        col("eta_shot", Quantity::Sensitivity),
        col("eta_johnson", Quantity::Sensitivity),
        col("eta_total", Quantity::Sensitivity),
    ];
    if want_cw {
        columns.extend([
            col("cw_bandwidth", Quantity::Frequency),
            col("eta_cw", Quantity::Sensitivity),
            col("eta_cw_johnson", Quantity::Sensitivity),
        ]);
    }
    let mut t = ctx.table(columns)?;
    t.rows = rows;
    Ok(t)
}

fn cw_columns(ctx: &Context, cfg: &RunConfig, source: Option<&NoiseSource>) -> Result<Vec<Option<f64>>> {
    let Some(cw) = &cfg.cw else {
        return Ok(vec![None; 3]);
    };
    let tau = cw.tau_ms * 1e-3;
    if !(tau > 0.0) {
        return Err(CliError::config("cw.tau_ms must be > 0"));
    }
    if let Some(enbw) = ctx.lockin_enbw {
        check_lockin_interval(tau, enbw)?;
    }
    let f_cutoff = cw.f_cutoff_mhz * 1e6;
    let eta = match source {
        Some(NoiseSource::Spectrum(spec)) => Some(cw_eta_f(cw_sigma_f(spec, tau, f_cutoff)?, tau)),
        _ => None,
    };
    Ok(vec![
        Some(1.0 / (2.0 * tau)),
        eta,
        Some(eta_johnson_cw(cfg.noise.johnson_dbc, tau, f_cutoff)),
    ])
}

/// Empirical σ_φ from simulated sequences next to the analytic value.
///
/// Every sweep point reuses the run seed, so differences between points are
/// not masked by sampling noise.
pub fn montecarlo(ctx: &Context) -> Result<Table> {
    let points = ctx.points()?;
    let rows: Vec<Row> = points
        .iter()
        .map(|p| {
            let cfg = &p.cfg;
            let seq = cfg.sequence.build()?;
            let source = cfg.noise.required_source(ctx.base_dir())?;
            let process = cfg.noise.process(&source)?;
            let mc = monte_carlo_sigma_phi(&seq, &process, cfg.montecarlo.realizations, cfg.seed)?;
            let (sigma, eta) = analytic_phase(cfg, &source, &seq, false)?;
            Ok(prefixed(
                p.value,
                vec![
                    Some(seq.n_pi as f64),
                    Some(seq.tau_tot()),
                    Some(mc.n_realizations as f64),
                    Some(mc.sigma_phi_empirical),
                    Some(mc.standard_error),
                    Some(sigma),
                    Some(mc.eta(&seq)),
                    Some(eta_phi(mc.standard_error, &seq)),
                    Some(eta),
                ],
            ))
        })
        .collect::<Result<_>>()?;
    let mut t = ctx.table(vec![
        col("n_pi", Quantity::Count),
        col("tau_tot", Quantity::Time),
        col("realizations", Quantity::Count),
        col("sigma_phi_mc", Quantity::Radians),
        col("sigma_phi_se", Quantity::Radians),
        col("sigma_phi_analytic", Quantity::Radians),
        col("eta_mc", Quantity::Sensitivity),
        col("eta_se", Quantity::Sensitivity),
        col("eta_analytic", Quantity::Sensitivity),
    ])?;
    t.rows = rows;
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Scenario {
    /// Configured noise plus readout noise, with and without the microwaves.
    Stream,
    /// Injected phase noise scaled to hit target on-resonance floors.
    Excess,
    /// Two channels sharing the microwave phase noise.
    Gradiometer,
    /// Test-coil calibration fit.
    Calibrate,
}

impl Scenario {
    fn parse(name: &str) -> Result<Self> {
        <Self as clap::ValueEnum>::from_str(name, true)
            .map_err(|_| CliError::config(format!("pipeline.scenario `{name}`: expected stream, excess, gradiometer or calibrate")))
    }
}

/// Report lines plus the table that goes to the output.
pub struct PipelineOutput {
    pub table: Table,
    pub report: Vec<(String, String)>,
    pub stream: Option<ReadoutStream>,
}

pub fn pipeline(ctx: &Context, scenario: Option<Scenario>) -> Result<PipelineOutput> {
    if ctx.sweep_flag.is_some() || ctx.base()?.sweep.is_some() {
        return Err(CliError::config("pipeline does not take a sweep"));
    }
    let cfg = ctx.base()?;
    let scenario = match scenario {
        Some(s) => s,
        None => Scenario::parse(&cfg.pipeline.scenario)?,
    };
    let mut out = match scenario {
        Scenario::Stream => stream_scenario(ctx, &cfg)?,
        Scenario::Excess => excess_scenario(ctx, &cfg)?,
        Scenario::Gradiometer => gradiometer_scenario(ctx, &cfg)?,
        Scenario::Calibrate => calibrate_scenario(ctx, &cfg)?,
    };
    out.table.meta("scenario", format!("{scenario:?}").to_lowercase());
    for (k, v) in &out.report {
        out.table.meta(&format!("report.{k}"), v);
    }
    Ok(out)
}

fn spectrum_of(cfg: &RunConfig, stream: &ReadoutStream) -> Result<AmplitudeSpectrum> {
    let opts = SpectrumOptions::new(cfg.pipeline.interval_s)
        .with_averaging(cfg.pipeline.averaging()?)
        .with_hann(cfg.pipeline.hann);
    Ok(amplitude_spectrum(stream, &opts)?)
}

fn floor_of(cfg: &RunConfig, spec: &AmplitudeSpectrum, f_alias: Option<f64>) -> Result<(f64, f64)> {
    let est = estimate_noise_floor(spec, f_alias, &cfg.pipeline.floor_params())?;
    Ok((est.floor, spec.eta_from_floor(est.floor)))
}

fn tone_of(cfg: &RunConfig, amp_pt: f64) -> Option<TestTone> {
    match cfg.pipeline.f_test_khz {
        Some(f) if amp_pt > 0.0 => Some(TestTone::new(pt_to_t(amp_pt), khz_to_hz(f))),
        _ => None,
    }
}

fn alias_of(tone: Option<TestTone>, seq: &PulseSequence) -> Result<Option<f64>> {
    tone.map(|t| alias_frequency(t.frequency, seq.sample_rate()).map(|(a, _)| a))
        .transpose()
        .map_err(Into::into)
}

fn fmt(v: f64) -> String {
    crate::output::number(v)
}

fn spectra_table(ctx: &Context, names: &[&str], spectra: &[&AmplitudeSpectrum]) -> Result<Table> {
    let mut columns = vec![col("f", Quantity::Frequency)];
    columns.extend(names.iter().map(|n| col(n, Quantity::Sensitivity)));
    let mut t = ctx.table(columns)?;
    let first = spectra[0];
    t.rows = (0..first.freqs.len())
        .map(|j| {
            let mut row = vec![Some(first.freqs[j])];
            row.extend(spectra.iter().map(|s| s.asd.get(j).copied()));
            row
        })
        .collect();
    Ok(t)
}

fn stream_scenario(ctx: &Context, cfg: &RunConfig) -> Result<PipelineOutput> {
    let seq = cfg.sequence.build()?;
    let source = cfg.noise.source(ctx.base_dir())?;
    let process = match &source {
        Some(s) => cfg.noise.process(s)?,
        None => NoiseProcess::silent(),
    };
    let shot = cfg.readout.clone().unwrap_or_default().shot()?;
    let tone = tone_of(cfg, cfg.pipeline.test_amp_pt);
    let alias = alias_of(tone, &seq)?;
    let make = |process: NoiseProcess, seed: u64| StreamConfig {
        seq,
        process,
        tone,
        shot,
        duration: cfg.pipeline.duration_s,
        seed,
    };
    let on = synthesize_stream(&make(process, cfg.seed))?;
    let off = synthesize_stream(&make(NoiseProcess::silent(), cfg.seed.wrapping_add(1)))?;
    let spec_on = spectrum_of(cfg, &on)?;
    let spec_off = spectrum_of(cfg, &off)?;
    let (floor_on, eta_on) = floor_of(cfg, &spec_on, alias)?;
    let (floor_off, eta_off) = floor_of(cfg, &spec_off, alias)?;
    let ex = excess_noise(eta_on, eta_off)?;
    let mut report = vec![
        ("f_samp_hz".into(), fmt(seq.sample_rate())),
        ("n_chunks".into(), spec_on.n_chunks.to_string()),
        ("bin_width_hz".into(), fmt(spec_on.bin_width)),
        ("floor_on_t_sqrts".into(), fmt(floor_on)),
        ("floor_off_t_sqrts".into(), fmt(floor_off)),
        ("eta_on_t_sqrts".into(), fmt(eta_on)),
        ("eta_off_t_sqrts".into(), fmt(eta_off)),
        ("eta_excess_t_sqrts".into(), fmt(ex.value)),
        ("on_below_off".into(), ex.on_below_off.to_string()),
    ];
    if let Some(a) = alias {
        report.push(("alias_hz".into(), fmt(a)));
        report.push(("test_peak_rms_t".into(), fmt(spec_on.amplitude_at(a))));
    }
    Ok(PipelineOutput {
        table: spectra_table(ctx, &["asd_on", "asd_off"], &[&spec_on, &spec_off])?,
        report,
        stream: Some(on),
    })
}

fn excess_scenario(ctx: &Context, cfg: &RunConfig) -> Result<PipelineOutput> {
    let seq = cfg.sequence.build()?;
    let NoiseSource::Spectrum(base) = cfg.noise.required_source(ctx.base_dir())? else {
        return Err(CliError::config("excess needs a spectral noise source (preset, spectrum_file or flat_dbc)"));
    };
    let p = &cfg.pipeline;
    let shot = ShotNoise::Eta(pt_to_t(p.floor_off_pt));
    let tone = tone_of(cfg, p.test_amp_pt);
    let alias = alias_of(tone, &seq)?;
    let f_cutoff = cfg.noise.f_cutoff();
    let base_eta = eta_phi(sigma_phi_filter_with(&base, &FilterFunction::delta_pulses(seq), f_cutoff)?, &seq);
    let run = |process: NoiseProcess, seed: u64| -> Result<AmplitudeSpectrum> {
        let stream = synthesize_stream(&StreamConfig {
            seq,
            process,
            tone,
            shot,
            duration: p.duration_s,
            seed,
        })?;
        spectrum_of(cfg, &stream)
    };
    let off = run(NoiseProcess::silent(), cfg.seed)?;
    let (_, eta_off) = floor_of(cfg, &off, alias)?;
    let mut report = vec![("eta_off_t_sqrts".to_string(), fmt(eta_off))];
    let mut spectra = vec![off];
    for (i, &on_pt) in p.floors_on_pt.iter().enumerate() {
        if on_pt <= p.floor_off_pt {
            return Err(CliError::config("pipeline.floors_on_pt must exceed floor_off_pt"));
        }
        let target = pt_to_t((on_pt * on_pt - p.floor_off_pt * p.floor_off_pt).sqrt());
        let shift_db = 20.0 * (target / base_eta).log10();
        let process = cfg.noise.process(&NoiseSource::Spectrum(base.shifted_db(shift_db)))?;
        let spec = run(process, cfg.seed.wrapping_add(1 + i as u64))?;
        let (_, eta_on) = floor_of(cfg, &spec, alias)?;
        let ex = excess_noise(eta_on, eta_off)?;
        let k = i + 1;
        report.push((format!("on{k}.shift_db"), fmt(shift_db)));
        report.push((format!("on{k}.eta_on_t_sqrts"), fmt(eta_on)));
        report.push((format!("on{k}.eta_excess_t_sqrts"), fmt(ex.value)));
        report.push((format!("on{k}.eta_excess_expected_t_sqrts"), fmt(target)));
        spectra.push(spec);
    }
    let names: Vec<String> = std::iter::once("asd_off".to_string())
        .chain((1..spectra.len()).map(|k| format!("asd_on{k}")))
        .collect();
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let spec_refs: Vec<&AmplitudeSpectrum> = spectra.iter().collect();
    Ok(PipelineOutput {
        table: spectra_table(ctx, &name_refs, &spec_refs)?,
        report,
        stream: None,
    })
}

/// Physical test frequency of the gradiometer scenario when none is configured.
const GRADIOMETER_TEST_KHZ: f64 = 394.0;

fn gradiometer_scenario(ctx: &Context, cfg: &RunConfig) -> Result<PipelineOutput> {
    let seq = cfg.sequence.build()?;
    let p = &cfg.pipeline;
    let diff_shot = 2f64.sqrt() * p.shot_sigma_rad;
    let process = match cfg.noise.source(ctx.base_dir())? {
        Some(source) => cfg.noise.process(&source)?,
        None => NoiseProcess::white(p.common_mode_ratio * diff_shot / (2.0 * (seq.n_pi as f64 + 0.25).sqrt())),
    };
    let n = (p.duration_s * seq.sample_rate()).round() as usize;
    let f_test = khz_to_hz(p.f_test_khz.unwrap_or(GRADIOMETER_TEST_KHZ));
    let (alias, _) = alias_frequency(f_test, seq.sample_rate())?;
    let base = GradiometerConfig::new(seq, process, n, cfg.seed).with_shot_sigma(p.shot_sigma_rad);
    let uniform = simulate_gradiometer(&base.clone().with_uniform(TestTone::new(pt_to_t(p.uniform_amp_pt), f_test)))?;
    let gradient = simulate_gradiometer(&base.with_gradient(TestTone::new(pt_to_t(p.gradient_amp_pt), f_test)))?;
    let [u1, u2, ud, g1, gd] = [&uniform.ch1, &uniform.ch2, &uniform.diff, &gradient.ch1, &gradient.diff]
        .map(|s| spectrum_of(cfg, s));
    let (u1, u2, ud, g1, gd) = (u1?, u2?, ud?, g1?, gd?);
    let (_, eta_single) = floor_of(cfg, &u1, Some(alias))?;
    let (_, eta_diff) = floor_of(cfg, &ud, Some(alias))?;
    let shot_limited = phase_to_tesla(diff_shot, &seq) / seq.sample_rate().sqrt();
    let report = vec![
        ("alias_hz".into(), fmt(alias)),
        ("eta_single_t_sqrts".into(), fmt(eta_single)),
        ("eta_diff_t_sqrts".into(), fmt(eta_diff)),
        ("eta_shot_limited_t_sqrts".into(), fmt(shot_limited)),
        ("suppression".into(), fmt(eta_single / eta_diff)),
        ("uniform_peak_single_t".into(), fmt(u1.amplitude_at(alias))),
        ("uniform_peak_diff_t".into(), fmt(ud.amplitude_at(alias))),
        ("gradient_peak_single_t".into(), fmt(g1.amplitude_at(alias))),
        ("gradient_peak_diff_t".into(), fmt(gd.amplitude_at(alias))),
        ("gradient_peak_ratio".into(), fmt(gd.amplitude_at(alias) / g1.amplitude_at(alias))),
    ];
    Ok(PipelineOutput {
        table: spectra_table(
            ctx,
            &["uniform_ch1", "uniform_ch2", "uniform_diff", "gradient_ch1", "gradient_diff"],
            &[&u1, &u2, &ud, &g1, &gd],
        )?,
        report,
        stream: None,
    })
}

/// Reads `v_test,v_nv` rows; `#` lines and a non-numeric header are skipped.
fn read_calibration(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut v_test = Vec::new();
    let mut v_nv = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Option<Vec<f64>> = cols.iter().map(|c| c.parse().ok()).collect();
        match parsed.as_deref() {
            Some([a, b]) => {
                v_test.push(*a);
                v_nv.push(*b);
            }
            None if v_test.is_empty() && i == 0 => continue,
            _ => {
                return Err(CliError::Input {
                    path: path.to_path_buf(),
                    source: mwnoise::Error::Parse {
                        line: i + 1,
                        reason: "expected two numeric columns v_test,v_nv".into(),
                    },
                })
            }
        }
    }
    Ok((v_test, v_nv))
}

fn calibrate_scenario(ctx: &Context, cfg: &RunConfig) -> Result<PipelineOutput> {
    use rand::Rng;
    use rand_distr::StandardNormal;
    let seq = cfg.sequence.build()?;
    let p = &cfg.pipeline;
    let (v_test, v_nv, truth) = match &p.calibration_file {
        Some(file) => {
            let path: PathBuf = ctx.base_dir().join(file);
            let (a, b) = read_calibration(&path)?;
            (a, b, None)
        }
        None => {
            if !(p.kappa_t_per_v > 0.0) || p.calibration_points < 2 {
                return Err(CliError::config("calibration needs kappa_t_per_v > 0 and at least 2 points"));
            }
            let scale = 4.0 * 2f64.sqrt() * GAMMA_NV * seq.tau_tot();
            let v_top = 2.5 * std::f64::consts::PI / (scale * p.kappa_t_per_v);
            let mut rng = mwnoise::StreamKey::new(cfg.seed, 0).rng();
            let last = (p.calibration_points - 1) as f64;
            let v_test: Vec<f64> = (0..p.calibration_points).map(|k| v_top * k as f64 / last).collect();
            let v_nv = v_test
                .iter()
                .map(|&v| {
                    calibration_model(v, p.v_max, p.kappa_t_per_v, seq.tau_tot())
                        + p.calibration_noise * p.v_max * rng.sample::<f64, _>(StandardNormal)
                })
                .collect();
            (v_test, v_nv, Some(p.kappa_t_per_v))
        }
    };
    let fit = fit_calibration(&v_test, &v_nv, &seq)?;
    let mut t = ctx.table(vec![
        col("v_test", Quantity::Volts),
        col("v_nv", Quantity::Volts),
        col("v_fit", Quantity::Volts),
    ])?;
    t.rows = v_test
        .iter()
        .zip(&v_nv)
        .map(|(&v, &y)| vec![Some(v), Some(y), Some(calibration_model(v, fit.v_max, fit.kappa, seq.tau_tot()))])
        .collect();
    let mut report = vec![
        ("kappa_t_per_v".into(), fmt(fit.kappa)),
        ("v_max".into(), fmt(fit.v_max)),
        ("residual_rms".into(), fmt(fit.residual_rms)),
    ];
    if let Some(k) = truth {
        report.push(("kappa_true_t_per_v".into(), fmt(k)));
        report.push(("kappa_rel_error".into(), fmt(fit.kappa / k - 1.0)));
    }
    Ok(PipelineOutput {
        table: t,
        report,
        stream: None,
    })
}

/// Writes the raw stream of the `stream` scenario.
pub fn stream_csv(stream: &ReadoutStream) -> String {
    write_stream_csv(stream)
}

/// Lists preset names, or prints one preset as a spectrum table.
pub fn presets(name: Option<&str>) -> Result<String> {
    match name {
        None => Ok(mwnoise::noise_models::preset_names().join("\n") + "\n"),
        Some(n) => {
            let spec: PhaseNoiseSpectrum =
                mwnoise::noise_models::preset(n).map_err(|e| CliError::config(e.to_string()))?;
            Ok(mwnoise::noise_models::write_spectrum_table(&spec))
        }
    }
}
