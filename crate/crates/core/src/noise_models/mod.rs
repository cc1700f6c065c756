//! Oscillator phase-noise spectra, phase-error processes and mixer algebra.

mod presets;
mod process;
mod spectrum;
mod synthesis;
mod table_io;

pub use presets::{preset, preset_names, Preset};
pub use process::{
    sample_pulse_phases, NoiseProcess, PhaseSampler, PsdSampling, WalkMode, RANDOM_WALK_INJECTION_GAIN,
    WHITE_INJECTION_GAIN,
};
pub use spectrum::{mix_spectra, ssb_to_psd, MixMode, PhaseNoiseSpectrum, SsbTable, EXTRAPOLATION_FLOOR_DBC};
pub use synthesis::{synthesize_phase_track, TrackSynthesizer, MAX_TRACK_SAMPLES};
pub use table_io::{parse_spectrum_table, write_spectrum_table, TABLE_HEADER};
