//! NV constants and the spin resonance condition.

use crate::scalar::Real;

/// NV gyromagnetic ratio in Hz/T.
pub const GAMMA_NV: f64 = 28.03e9;

/// Ground-state zero-field splitting in Hz.
pub const ZERO_FIELD_SPLITTING: f64 = 2.87e9;

/// Bundle of the physical constants used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants<T> {
    pub gamma_nv: T,
    pub zero_field_splitting_d: T,
}

impl<T: Real> Default for Constants<T> {
    fn default() -> Self {
        Self {
            gamma_nv: T::lit(GAMMA_NV),
            zero_field_splitting_d: T::lit(ZERO_FIELD_SPLITTING),
        }
    }
}

/// Returns `(f_minus, f_plus)` for a bias field `b0` along the NV axis.
///
/// Negative fields are folded onto their magnitude; the two transitions are
/// symmetric about `D`.
pub fn resonance_frequencies<T: Real>(b0: T) -> (T, T) {
    let c = Constants::<T>::default();
    let shift = c.gamma_nv * b0.abs();
    (c.zero_field_splitting_d - shift, c.zero_field_splitting_d + shift)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_is_degenerate() {
        assert_eq!(resonance_frequencies(0.0_f64), (2.87e9, 2.87e9));
    }

    #[test]
    fn measured_bias_field() {
        let (fm, fp) = resonance_frequencies(81e-3_f64);
        assert!((fp / 5.14e9 - 1.0).abs() < 0.01);
        assert!((fm / 0.60e9 - 1.0).abs() < 0.01);
        let (_, fp) = resonance_frequencies(76e-3_f64);
        assert!((fp / 5.00e9 - 1.0).abs() < 0.01);
    }

    #[test]
    fn f32_agrees_with_f64() {
        let (a, b) = resonance_frequencies(0.05_f32);
        let (c, d) = resonance_frequencies(0.05_f64);
        assert!((a as f64 / c - 1.0).abs() < 1e-6);
        assert!((b as f64 / d - 1.0).abs() < 1e-6);
    }
}
