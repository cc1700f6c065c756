use super::spectrum::AmplitudeSpectrum;
use crate::error::{Error, Result};
use crate::stats::{median, std_dev};

/// Thresholds of the noise-floor estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloorParams {
    /// Bins at or below this frequency are ignored.
    pub low_cut_hz: f64,
    /// Half width of the band excluded around the test frequency.
    pub test_half_width_hz: f64,
    /// Fraction of the highest bins left out of the median/std statistics.
    pub trim_fraction: f64,
    /// Spike threshold in standard deviations above the median.
    pub spike_sigma: f64,
}

impl Default for FloorParams {
    fn default() -> Self {
        Self {
            low_cut_hz: 1.0e3,
            test_half_width_hz: 0.5e3,
            trim_fraction: 0.1,
            spike_sigma: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloorEstimate {
    pub floor: f64,
    pub spike_bins: Vec<usize>,
    /// Median and standard deviation of the trimmed set.
    pub median: f64,
    pub std: f64,
    pub n_included: usize,
}

/// Median noise floor with spike rejection.
///
/// Bins at low frequency and near `f_test` are dropped; median and standard
/// deviation come from the lowest `1 − trim_fraction` of the rest; bins above
/// `median + spike_sigma·std` are spikes; the floor is the median of the
/// remaining bins.
pub fn estimate_noise_floor(spec: &AmplitudeSpectrum, f_test: Option<f64>, params: &FloorParams) -> Result<FloorEstimate> {
    if spec.asd.is_empty() {
        return Err(Error::param("spectrum", "is empty"));
    }
    let included: Vec<usize> = spec
        .freqs
        .iter()
        .enumerate()
        .filter(|&(_, &f)| f > params.low_cut_hz)
        .filter(|&(_, &f)| f_test.is_none_or(|ft| (f - ft).abs() > params.test_half_width_hz))
        .map(|(j, _)| j)
        .collect();
    if included.len() < 3 {
        return Err(Error::param("spectrum", "exclusions leave fewer than three bins"));
    }
    let mut values: Vec<f64> = included.iter().map(|&j| spec.asd[j]).collect();
    values.sort_by(f64::total_cmp);
    let keep = (((1.0 - params.trim_fraction) * values.len() as f64).round() as usize).clamp(2, values.len());
    let trimmed = &values[..keep];
    let med = median(trimmed);
    let sd = std_dev(trimmed);
    let threshold = med + params.spike_sigma * sd;
    let (spikes, rest): (Vec<usize>, Vec<usize>) = included.iter().partition(|&&j| spec.asd[j] > threshold);
    let rest_values: Vec<f64> = rest.iter().map(|&j| spec.asd[j]).collect();
    Ok(FloorEstimate {
        floor: median(&rest_values),
        spike_bins: spikes,
        median: med,
        std: sd,
        n_included: included.len(),
    })
}

/// Quadrature difference of on- and off-resonance floors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcessNoise {
    pub value: f64,
    /// Set when `eta_on < eta_off`, which only a statistical fluctuation explains.
    pub on_below_off: bool,
}

pub fn excess_noise(eta_on: f64, eta_off: f64) -> Result<ExcessNoise> {
    if !(eta_on >= 0.0 && eta_off >= 0.0) {
        return Err(Error::param("eta_on", "floors must be >= 0"));
    }
    Ok(ExcessNoise {
        value: (eta_on * eta_on - eta_off * eta_off).max(0.0).sqrt(),
        on_below_off: eta_on < eta_off,
    })
}
