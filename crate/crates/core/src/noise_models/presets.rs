//! Approximate generator phase-noise curves.
//!
//! These are piecewise log-log sketches, not digitized data: the G1 curves
//! are flat-ish from ~50 kHz to ~0.5 MHz and fall roughly as 1/f² out to a few
//! MHz; G2 is ~20 dB quieter near 20 kHz with a higher relative far-out floor.
//! Levels at a 1 GHz carrier and 20 kHz offset match the datasheet points
//! (−114 and −134 dBc/Hz). Plateau levels above 50 kHz are set so that an
//! XY8-8 sequence (τ = 522 ns, t_π = 48 ns, t_dead = 14.85 µs) sees roughly
//! 30, 58 and 130 pT·s^1/2 for G1 and 4.1, 7.4 and 13.9 pT·s^1/2 for G2.

use super::spectrum::PhaseNoiseSpectrum;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    G1At1Ghz,
    G1At2p5Ghz,
    G1At6Ghz,
    G2At0p85Ghz,
    G2At2p1Ghz,
    G2At5p7Ghz,
    Johnson300K,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::G1At1Ghz,
        Preset::G1At2p5Ghz,
        Preset::G1At6Ghz,
        Preset::G2At0p85Ghz,
        Preset::G2At2p1Ghz,
        Preset::G2At5p7Ghz,
        Preset::Johnson300K,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::G1At1Ghz => "g1-1ghz",
            Preset::G1At2p5Ghz => "g1-2.5ghz",
            Preset::G1At6Ghz => "g1-6ghz",
            Preset::G2At0p85Ghz => "g2-0.85ghz",
            Preset::G2At2p1Ghz => "g2-2.1ghz",
            Preset::G2At5p7Ghz => "g2-5.7ghz",
            Preset::Johnson300K => "johnson-300k",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(name))
            .ok_or_else(|| {
                Error::param(
                    "preset",
                    format!("unknown preset `{name}`; expected one of {}", preset_names().join(", ")),
                )
            })
    }

    pub fn spectrum(self) -> PhaseNoiseSpectrum<f64> {
        let (carrier, table): (f64, &[(f64, f64)]) = match self {
            Preset::G1At1Ghz => (1.0e9, &G1_1GHZ),
            Preset::G1At2p5Ghz => (2.5e9, &G1_2P5GHZ),
            Preset::G1At6Ghz => (6.0e9, &G1_6GHZ),
            Preset::G2At0p85Ghz => (0.85e9, &G2_0P85GHZ),
            Preset::G2At2p1Ghz => (2.1e9, &G2_2P1GHZ),
            Preset::G2At5p7Ghz => (5.7e9, &G2_5P7GHZ),
            Preset::Johnson300K => (1.0e9, &[(1.0, -177.0)]),
        };
        PhaseNoiseSpectrum::new(carrier, table).expect("preset tables are valid")
    }
}

pub fn preset(name: &str) -> Result<PhaseNoiseSpectrum<f64>> {
    Preset::from_name(name).map(Preset::spectrum)
}

pub fn preset_names() -> Vec<&'static str> {
    Preset::ALL.iter().map(|p| p.name()).collect()
}

const G1_1GHZ: [(f64, f64); 14] = [
    (10.0, -80.0),
    (100.0, -96.0),
    (1e3, -106.0),
    (1e4, -113.0),
    (2e4, -114.0),
    (5e4, -115.5),
    (2e5, -118.0),
    (5e5, -120.0),
    (7e5, -121.5),
    (1e6, -124.5),
    (2e6, -130.5),
    (5e6, -138.5),
    (1e7, -143.5),
    (1e8, -150.5),
];

const G1_2P5GHZ: [(f64, f64); 14] = [
    (10.0, -74.3),
    (100.0, -90.3),
    (1e3, -100.3),
    (1e4, -107.3),
    (2e4, -108.3),
    (5e4, -109.8),
    (2e5, -112.3),
    (5e5, -114.3),
    (7e5, -115.8),
    (1e6, -118.8),
    (2e6, -124.8),
    (5e6, -132.8),
    (1e7, -137.8),
    (1e8, -144.8),
];

const G1_6GHZ: [(f64, f64); 14] = [
    (10.0, -67.3),
    (100.0, -83.3),
    (1e3, -93.3),
    (1e4, -100.3),
    (2e4, -101.3),
    (5e4, -102.8),
    (2e5, -105.3),
    (5e5, -107.3),
    (7e5, -108.8),
    (1e6, -111.8),
    (2e6, -117.8),
    (5e6, -125.8),
    (1e7, -130.8),
    (1e8, -137.8),
];

const G2_0P85GHZ: [(f64, f64); 10] = [
    (10.0, -70.0),
    (100.0, -92.0),
    (1e3, -114.0),
    (1e4, -133.0),
    (2e4, -135.5),
    (1e5, -139.2),
    (5e5, -141.2),
    (1e6, -144.2),
    (1e7, -155.2),
    (1e8, -156.2),
];

const G2_2P1GHZ: [(f64, f64); 10] = [
    (10.0, -62.0),
    (100.0, -84.0),
    (1e3, -106.0),
    (1e4, -125.0),
    (2e4, -127.5),
    (1e5, -132.3),
    (5e5, -134.8),
    (1e6, -137.8),
    (1e7, -151.3),
    (1e8, -152.8),
];

const G2_5P7GHZ: [(f64, f64); 10] = [
    (10.0, -53.5),
    (100.0, -75.5),
    (1e3, -97.5),
    (1e4, -116.5),
    (2e4, -119.0),
    (1e5, -125.3),
    (5e5, -127.8),
    (1e6, -130.8),
    (1e7, -148.8),
    (1e8, -150.8),
];
