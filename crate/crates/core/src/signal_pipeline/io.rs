use super::spectrum::{AmplitudeSpectrum, Averaging};
use super::stream::ReadoutStream;
use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::fmt::Write;

pub const STREAM_HEADER: &str = "t_s,readout_t";
pub const SPECTRUM_HEADER: &str = "f_hz,asd_t_sqrts";

fn write_meta(out: &mut String, meta: &BTreeMap<String, String>) {
    for (k, v) in meta {
        let _ = writeln!(out, "# {k}={v}");
    }
}

/// Splits a CSV body into `# key=value` metadata and numeric rows.
type Meta = BTreeMap<String, String>;

fn parse_rows(text: &str, header: &str) -> Result<(Meta, Vec<(f64, f64)>)> {
    let mut meta = BTreeMap::new();
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = i + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            if let Some((k, v)) = c.trim().split_once('=') {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        if !seen_header {
            if line != header {
                return Err(Error::Parse {
                    line: lineno,
                    reason: format!("expected header `{header}`"),
                });
            }
            seen_header = true;
            continue;
        }
        let (a, b) = line.split_once(',').ok_or_else(|| Error::Parse {
            line: lineno,
            reason: "expected two comma-separated columns".into(),
        })?;
        let parse = |s: &str| {
            s.trim().parse::<f64>().map_err(|e| Error::Parse {
                line: lineno,
                reason: format!("`{}`: {e}", s.trim()),
            })
        };
        rows.push((parse(a)?, parse(b)?));
    }
    if !seen_header {
        return Err(Error::Parse {
            line: 0,
            reason: format!("missing header `{header}`"),
        });
    }
    Ok((meta, rows))
}

pub fn write_stream_csv(stream: &ReadoutStream) -> String {
    let mut out = String::new();
    write_meta(&mut out, &stream.metadata);
    let _ = writeln!(out, "# f_samp={}", stream.f_samp);
    let _ = writeln!(out, "{STREAM_HEADER}");
    for (k, x) in stream.samples.iter().enumerate() {
        let _ = writeln!(out, "{},{}", stream.time(k), x);
    }
    out
}

/// Reads a stream; `f_samp` comes from the metadata or the time column.
pub fn read_stream_csv(text: &str) -> Result<ReadoutStream> {
    let (mut meta, rows) = parse_rows(text, STREAM_HEADER)?;
    let f_samp = match meta.remove("f_samp") {
        Some(v) => v.parse::<f64>().map_err(|e| Error::Parse {
            line: 0,
            reason: format!("f_samp: {e}"),
        })?,
        None if rows.len() >= 2 => 1.0 / (rows[1].0 - rows[0].0),
        None => {
            return Err(Error::Parse {
                line: 0,
                reason: "cannot infer f_samp".into(),
            })
        }
    };
    let mut s = ReadoutStream::new(rows.into_iter().map(|r| r.1).collect(), f_samp)?;
    s.metadata = meta;
    Ok(s)
}

pub fn write_spectrum_csv(spec: &AmplitudeSpectrum, meta: &BTreeMap<String, String>) -> String {
    let mut out = String::new();
    write_meta(&mut out, meta);
    let _ = writeln!(out, "# bin_width_hz={}", spec.bin_width);
    let _ = writeln!(out, "# n_chunks={}", spec.n_chunks);
    let avg = match spec.averaging {
        Averaging::Rms => "rms",
        Averaging::Magnitude => "magnitude",
    };
    let _ = writeln!(out, "# averaging={avg}");
    if let Some(f) = spec.noise_floor {
        let _ = writeln!(out, "# noise_floor={f}");
    }
    if !spec.spike_bins.is_empty() {
        let bins: Vec<String> = spec.spike_bins.iter().map(|b| b.to_string()).collect();
        let _ = writeln!(out, "# spike_bins={}", bins.join(" "));
    }
    let _ = writeln!(out, "{SPECTRUM_HEADER}");
    for (f, a) in spec.freqs.iter().zip(&spec.asd) {
        let _ = writeln!(out, "{f},{a}");
    }
    out
}

pub fn read_spectrum_csv(text: &str) -> Result<AmplitudeSpectrum> {
    let (meta, rows) = parse_rows(text, SPECTRUM_HEADER)?;
    let num = |k: &str| meta.get(k).and_then(|v| v.parse::<f64>().ok());
    let bin_width = num("bin_width_hz")
        .or_else(|| (rows.len() >= 2).then(|| rows[1].0 - rows[0].0))
        .ok_or_else(|| Error::Parse {
            line: 0,
            reason: "cannot infer bin width".into(),
        })?;
    let averaging = match meta.get("averaging").map(String::as_str) {
        Some("magnitude") => Averaging::Magnitude,
        _ => Averaging::Rms,
    };
    let spike_bins = meta
        .get("spike_bins")
        .map(|v| v.split_whitespace().filter_map(|b| b.parse().ok()).collect())
        .unwrap_or_default();
    Ok(AmplitudeSpectrum {
        freqs: rows.iter().map(|r| r.0).collect(),
        asd: rows.iter().map(|r| r.1).collect(),
        bin_width,
        n_chunks: num("n_chunks").map_or(1, |n| n as usize),
        averaging,
        noise_floor: num("noise_floor"),
        spike_bins,
    })
}
