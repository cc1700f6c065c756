//! Acquisition and analysis chain: synchronized readout streams, amplitude
//! spectra, the spike-rejecting noise-floor estimator and calibration fits.

mod calibration;
mod floor;
mod io;
mod spectrum;
mod stream;

pub use calibration::{calibration_model, fit_calibration, CalibrationFit, CALIBRATION_MIN_POINTS};
pub use floor::{estimate_noise_floor, excess_noise, ExcessNoise, FloorEstimate, FloorParams};
pub use io::{read_spectrum_csv, read_stream_csv, write_spectrum_csv, write_stream_csv, SPECTRUM_HEADER, STREAM_HEADER};
pub use spectrum::{amplitude_spectrum, sensitivity_from_floor, white_floor_factor, AmplitudeSpectrum, Averaging, SpectrumOptions};
pub use stream::{alias_frequency, synthesize_stream, ReadoutStream, ShotNoise, StreamConfig};
