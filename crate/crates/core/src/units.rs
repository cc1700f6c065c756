//! Semantic scalar aliases and I/O-boundary unit conversions.
//!
//! Everything inside the crate is SI; these helpers exist for parsing and
//! printing the lab units used in configuration files.

pub type FrequencyHz = f64;
pub type TimeSeconds = f64;
pub type Radians = f64;
pub type Tesla = f64;
/// Equivalent magnetic sensitivity in T_rms·s^1/2.
pub type SensitivityTeslaSqrtS = f64;
pub type PsdRad2PerHz = f64;
pub type DbcPerHz = f64;

pub fn pt_to_t(x: f64) -> Tesla {
    x * 1e-12
}

pub fn t_to_pt(x: Tesla) -> f64 {
    x * 1e12
}

pub fn khz_to_hz(x: f64) -> FrequencyHz {
    x * 1e3
}

pub fn hz_to_khz(x: FrequencyHz) -> f64 {
    x * 1e-3
}

pub fn ghz_to_hz(x: f64) -> FrequencyHz {
    x * 1e9
}

pub fn us_to_s(x: f64) -> TimeSeconds {
    x * 1e-6
}

pub fn s_to_us(x: TimeSeconds) -> f64 {
    x * 1e6
}

pub fn ns_to_s(x: f64) -> TimeSeconds {
    x * 1e-9
}

pub fn s_to_ns(x: TimeSeconds) -> f64 {
    x * 1e9
}

pub fn dbm_to_watts(p_dbm: f64) -> f64 {
    1e-3 * 10f64.powf(p_dbm / 10.0)
}

pub fn watts_to_dbm(p: f64) -> f64 {
    10.0 * (p / 1e-3).log10()
}

/// Single-sideband level in dBc/Hz to a one-sided phase PSD in rad²/Hz.
pub fn dbc_to_psd(l_dbc: DbcPerHz) -> PsdRad2PerHz {
    2.0 * 10f64.powf(l_dbc / 10.0)
}

pub fn psd_to_dbc(s: PsdRad2PerHz) -> DbcPerHz {
    10.0 * (s / 2.0).log10()
}
