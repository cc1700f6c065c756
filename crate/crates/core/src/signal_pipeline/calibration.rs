use crate::constants::GAMMA_NV;
use crate::error::{Error, Result};
use crate::pulse_sequences::PulseSequence;

pub const CALIBRATION_MIN_POINTS: usize = 6;
/// Residual RMS above this fraction of `v_max` marks the fit as untrusted.
const TRUST_LIMIT: f64 = 0.1;
const GRID_POINTS: usize = 4000;
/// Range of the sine argument at the largest test voltage spanned by the grid.
const GRID_ARG_LO: f64 = std::f64::consts::FRAC_PI_4;
const GRID_ARG_HI: f64 = 50.0 * std::f64::consts::PI;

/// Fitted test-coil calibration `V_nv = V_max·|sin(4√2·κ·V_test·γ·τ_tot)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationFit {
    pub v_max: f64,
    /// Field per volt applied to the test coil.
    pub kappa: f64,
    pub residual_rms: f64,
}

pub fn calibration_model(v_test: f64, v_max: f64, kappa: f64, tau_tot: f64) -> f64 {
    v_max * (4.0 * 2f64.sqrt() * kappa * v_test * GAMMA_NV * tau_tot).sin().abs()
}

/// Best `V_max` for fixed `κ` (linear least squares) and the residual RMS.
fn profile(v_test: &[f64], v_nv: &[f64], scale: f64, kappa: f64) -> (f64, f64) {
    let basis: Vec<f64> = v_test.iter().map(|v| (scale * kappa * v).sin().abs()).collect();
    let sbb: f64 = basis.iter().map(|b| b * b).sum();
    let sby: f64 = basis.iter().zip(v_nv).map(|(b, y)| b * y).sum();
    let v_max = if sbb > 0.0 { sby / sbb } else { 0.0 };
    let ss: f64 = basis.iter().zip(v_nv).map(|(b, y)| (y - v_max * b).powi(2)).sum();
    (v_max, (ss / v_test.len() as f64).sqrt())
}

/// Least-squares fit of `(V_max, κ)`.
///
/// `V_max` is eliminated in closed form; `κ` is located on a logarithmic grid
/// spanning sine arguments from π/4 to 50π at the largest test voltage, then
/// refined by golden-section search around the best grid point.
pub fn fit_calibration(v_test: &[f64], v_nv: &[f64], seq: &PulseSequence<f64>) -> Result<CalibrationFit> {
    if v_test.len() != v_nv.len() {
        return Err(Error::param("v_nv", "length differs from v_test"));
    }
    if v_test.len() < CALIBRATION_MIN_POINTS {
        return Err(Error::param(
            "v_test",
            format!("need at least {CALIBRATION_MIN_POINTS} points, got {}", v_test.len()),
        ));
    }
    if v_test.iter().chain(v_nv).any(|v| !v.is_finite()) {
        return Err(Error::param("v_test", "values must be finite"));
    }
    let v_hi = v_test.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if v_hi == 0.0 {
        return Err(Error::param("v_test", "all test voltages are zero"));
    }
    let scale = 4.0 * 2f64.sqrt() * GAMMA_NV * seq.tau_tot();
    let k_lo = GRID_ARG_LO / (scale * v_hi);
    let ratio = (GRID_ARG_HI / GRID_ARG_LO).ln();
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| k_lo * (ratio * i as f64 / (GRID_POINTS - 1) as f64).exp())
        .collect();
    let cost = |k: f64| profile(v_test, v_nv, scale, k).1;
    let best = (0..GRID_POINTS)
        .map(|i| (i, cost(grid[i])))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .expect("grid is nonempty");
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(GRID_POINTS - 1)];
    let kappa = golden_section(cost, lo, hi, 1e-12);
    let (v_max, residual_rms) = profile(v_test, v_nv, scale, kappa);
    if scale * kappa * v_hi < std::f64::consts::FRAC_PI_2 {
        return Err(Error::param("v_test", "data do not reach the first extremum"));
    }
    let limit = TRUST_LIMIT * v_max.abs();
    if !(residual_rms <= limit) {
        return Err(Error::FitNotTrusted { residual_rms, limit });
    }
    Ok(CalibrationFit { v_max, kappa, residual_rms })
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, rel_tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= rel_tol * (a.abs() + b.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn seq() -> PulseSequence<f64> {
        PulseSequence::xy8(8, 458e3, 48e-9, 15e-6).unwrap()
    }

    #[test]
    fn model_edges() {
        let tt = seq().tau_tot();
        let kappa = 1e-9;
        let v_peak = std::f64::consts::FRAC_PI_2 / (4.0 * 2f64.sqrt() * kappa * GAMMA_NV * tt);
        assert!((calibration_model(v_peak, 0.8, kappa, tt) - 0.8).abs() < 1e-12);
        assert_eq!(calibration_model(0.0, 0.8, kappa, tt), 0.0);
    }

    #[test]
    fn recovers_kappa_with_noise() {
        let s = seq();
        let tt = s.tau_tot();
        let mut rng = StreamKey::new(12, 0).rng();
        for kappa in [3e-10, 3e-9, 3e-8] {
            let v_first = std::f64::consts::FRAC_PI_2 / (4.0 * 2f64.sqrt() * kappa * GAMMA_NV * tt);
            let v_test: Vec<f64> = (0..25).map(|i| 2.5 * v_first * i as f64 / 24.0).collect();
            let v_nv: Vec<f64> = v_test
                .iter()
                .map(|&v| calibration_model(v, 0.5, kappa, tt) + 0.005 * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let fit = fit_calibration(&v_test, &v_nv, &s).unwrap();
            assert!((fit.kappa / kappa - 1.0).abs() < 0.01, "{kappa}: {}", fit.kappa);
            assert!((fit.v_max / 0.5 - 1.0).abs() < 0.02);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let s = seq();
        assert!(fit_calibration(&[1.0; 3], &[1.0; 3], &s).is_err());
        let v: Vec<f64> = (0..10).map(|i| i as f64).collect();
        // a constant response has no |sin| shape
        let junk = vec![1.0; 10];
        assert!(matches!(fit_calibration(&v, &junk, &s), Err(Error::FitNotTrusted { .. })));
    }
}
