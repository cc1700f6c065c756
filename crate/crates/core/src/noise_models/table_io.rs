use super::spectrum::PhaseNoiseSpectrum;
use crate::error::{Error, Result};
use std::fmt::Write as _;

pub const TABLE_HEADER: &str = "offset_hz,l_dbc_per_hz";

/// Parses a phase-noise table.
///
/// The carrier comes from `carrier_override` if given, otherwise from a
/// `# carrier_hz=<value>` comment.
pub fn parse_spectrum_table(text: &str, carrier_override: Option<f64>) -> Result<PhaseNoiseSpectrum<f64>> {
    let mut carrier = None;
    let mut seen_header = false;
    let mut points = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once('=') {
                if k.trim() == "carrier_hz" {
                    carrier = Some(parse_num(v, line_no)?);
                }
            }
            continue;
        }
        if !seen_header {
            let normalized: String = line.chars().filter(|c| !c.is_whitespace()).collect();
            if normalized != TABLE_HEADER {
                return Err(Error::Parse {
                    line: line_no,
                    reason: format!("expected header `{TABLE_HEADER}`"),
                });
            }
            seen_header = true;
            continue;
        }
        let mut cols = line.split(',');
        let (Some(f), Some(l), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(Error::Parse {
                line: line_no,
                reason: "expected two comma-separated columns".into(),
            });
        };
        points.push((parse_num(f, line_no)?, parse_num(l, line_no)?));
    }
    let carrier = carrier_override.or(carrier).ok_or(Error::Parse {
        line: 0,
        reason: "carrier frequency missing (`# carrier_hz=` or override)".into(),
    })?;
    PhaseNoiseSpectrum::new(carrier, &points)
}

pub fn write_spectrum_table(spec: &PhaseNoiseSpectrum<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# carrier_hz={}", spec.carrier_hz());
    let _ = writeln!(out, "{TABLE_HEADER}");
    for (f, l) in spec.points() {
        let _ = writeln!(out, "{f},{l}");
    }
    out
}

fn parse_num(s: &str, line: usize) -> Result<f64> {
    let s = s.trim();
    match s {
        "-inf" | "-Inf" | "-INF" => Ok(f64::NEG_INFINITY),
        _ => s.parse::<f64>().map_err(|e| Error::Parse {
            line,
            reason: format!("`{s}`: {e}"),
        }),
    }
}
