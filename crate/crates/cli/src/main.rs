// Negated float comparisons reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use clap::{Args, Parser, Subcommand};
use commands::{Context, Scenario};
use config::{parse_sweep_flag, ConfigDoc};
use error::{CliError, Result};
use output::{emit, Format, Units};
use std::path::PathBuf;
use std::process::ExitCode;

/// Microwave phase-noise predictions and simulations for pulsed NV magnetometers.
#[derive(Debug, Parser)]
#[command(name = "mwnoise", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set sequence.n_r=4`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Sweep one parameter, e.g. `--sweep n_r=1,2,4,8`.
    #[arg(long, value_name = "AXIS=V1,V2,...", global = true)]
    sweep: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (stdout if absent).
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    #[arg(long, value_enum, default_value_t = Units::Si, global = true)]
    units: Units,
    /// Lock-in equivalent noise bandwidth in Hz; rejects cw intervals below 1/(2·ENBW).
    #[arg(long, global = true)]
    lockin_enbw: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Filter function F(f) and its running integral.
    FilterFn,
    /// Analytic sensitivities per sweep point.
    Predict,
    /// Simulated σ_φ and η next to their analytic values.
    Montecarlo,
    /// Synthesized readout, spectra and noise-floor report.
    Pipeline {
        #[arg(long, value_enum)]
        scenario: Option<Scenario>,
        /// Also write the synthesized stream (stream scenario).
        #[arg(long)]
        stream_out: Option<PathBuf>,
    },
    /// List presets, or print one as a spectrum table.
    Presets { name: Option<String> },
}

fn context(cli: &Cli, command: &'static str) -> Result<Context> {
    let c = &cli.common;
    let mut doc = ConfigDoc::load(c.config.as_deref())?;
    for o in &c.overrides {
        doc.apply_override(o)?;
    }
    if let Some(seed) = c.seed {
        let seed = i64::try_from(seed).map_err(|_| CliError::config("--seed must fit in a signed 64-bit integer"))?;
        doc.set("seed", toml::Value::Integer(seed))?;
    }
    if let Some(enbw) = c.lockin_enbw {
        if !(enbw > 0.0 && enbw.is_finite()) {
            return Err(CliError::config("--lockin-enbw must be > 0"));
        }
    }
    Ok(Context {
        command,
        doc,
        sweep_flag: c.sweep.as_deref().map(parse_sweep_flag).transpose()?,
        units: c.units,
        lockin_enbw: c.lockin_enbw,
    })
}

fn run(cli: &Cli) -> Result<()> {
    let out = cli.common.out.as_deref();
    let units = cli.common.units;
    match &cli.command {
        Command::FilterFn => emit(&commands::filter_fn(&context(cli, "filter-fn")?)?.render(units), out),
        Command::Predict => emit(&commands::predict(&context(cli, "predict")?)?.render(units), out),
        Command::Montecarlo => emit(&commands::montecarlo(&context(cli, "montecarlo")?)?.render(units), out),
        Command::Pipeline { scenario, stream_out } => {
            let result = commands::pipeline(&context(cli, "pipeline")?, *scenario)?;
            for (k, v) in &result.report {
                eprintln!("{k}: {v}");
            }
            if let (Some(path), Some(stream)) = (stream_out, &result.stream) {
                emit(&commands::stream_csv(stream), Some(path))?;
            }
            emit(&result.table.render(units), out)
        }
        Command::Presets { name } => emit(&commands::presets(name.as_deref())?, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
