//! Multipulse sequence timing and frequency-domain filter functions.

use crate::error::{Error, Result};
use crate::quadrature::{integrate_panels, panel_edges, QuadOptions};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SequenceKind {
    Xy8,
    Cpmg,
}

/// Timing of an equally spaced π-pulse train between two π/2 pulses.
///
/// π pulses are centred at `(j − 1/2)·(2τ + t_π)` for `j = 1..=N`, the final
/// π/2 pulse sits at `τ_tot = N·(2τ + t_π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSequence<T> {
    pub kind: SequenceKind,
    /// Number of XY8 blocks (XY8) or the π-pulse count (CPMG).
    pub n_repeats: u32,
    pub n_pi: u32,
    pub t_pi: T,
    pub tau: T,
    pub t_dead: T,
}

const XY8_PATTERN: [bool; 8] = [false, true, false, true, true, false, true, false];

impl<T: Real> PulseSequence<T> {
    /// XY8-`n_repeats` with centre frequency `f_xy8`.
    pub fn xy8(n_repeats: u32, f_xy8: T, t_pi: T, t_dead: T) -> Result<Self> {
        if n_repeats == 0 {
            return Err(Error::param("n_repeats", "must be at least 1"));
        }
        let tau = half_spacing(f_xy8, t_pi)?;
        Self::from_timing(SequenceKind::Xy8, 8 * n_repeats, tau, t_pi, t_dead)
    }

    /// CPMG with `n_pi` pulses and centre frequency `f_c`.
    pub fn cpmg(n_pi: u32, f_c: T, t_pi: T, t_dead: T) -> Result<Self> {
        let tau = half_spacing(f_c, t_pi)?;
        Self::from_timing(SequenceKind::Cpmg, n_pi, tau, t_pi, t_dead)
    }

    /// XY8-`n_repeats` whose total length is `tau_tot`; `f_xy8` follows.
    pub fn xy8_with_total(n_repeats: u32, tau_tot: T, t_pi: T, t_dead: T) -> Result<Self> {
        if n_repeats == 0 {
            return Err(Error::param("n_repeats", "must be at least 1"));
        }
        let n = T::from_u32(8 * n_repeats).unwrap();
        let tau = (tau_tot / n - t_pi) / T::lit(2.0);
        Self::from_timing(SequenceKind::Xy8, 8 * n_repeats, tau, t_pi, t_dead)
    }

    /// Builds a sequence from explicit timing (as listed in lab notebooks).
    pub fn from_timing(kind: SequenceKind, n_pi: u32, tau: T, t_pi: T, t_dead: T) -> Result<Self> {
        if n_pi == 0 {
            return Err(Error::param("n_pi", "must be at least 1"));
        }
        if kind == SequenceKind::Xy8 && !n_pi.is_multiple_of(8) {
            return Err(Error::param("n_pi", "XY8 needs a multiple of 8 pulses"));
        }
        for (name, v) in [("tau", tau), ("t_pi", t_pi), ("t_dead", t_dead)] {
            if !(v.is_finite() && v >= T::zero()) {
                return Err(Error::param(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if tau <= T::zero() {
            return Err(Error::param("tau", "pulses overlap (tau must be > 0)"));
        }
        let n_repeats = match kind {
            SequenceKind::Xy8 => n_pi / 8,
            SequenceKind::Cpmg => n_pi,
        };
        Ok(Self {
            kind,
            n_repeats,
            n_pi,
            t_pi,
            tau,
            t_dead,
        })
    }

    pub fn with_kind(mut self, kind: SequenceKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_t_pi(self, t_pi: T) -> Result<Self> {
        Self::from_timing(self.kind, self.n_pi, self.tau, t_pi, self.t_dead)
    }

    pub fn with_t_dead(mut self, t_dead: T) -> Self {
        self.t_dead = t_dead;
        self
    }

    pub fn n(&self) -> T {
        T::from_u32(self.n_pi).unwrap()
    }

    /// Centre-to-centre spacing of consecutive π pulses.
    pub fn spacing(&self) -> T {
        T::lit(2.0) * self.tau + self.t_pi
    }

    pub fn tau_tot(&self) -> T {
        self.n() * self.spacing()
    }

    /// Centre detection frequency `N/(2·τ_tot)`.
    pub fn center_frequency(&self) -> T {
        self.n() / (T::lit(2.0) * self.tau_tot())
    }

    /// Readout duty cycle `τ_tot/(τ_tot + t_dead)`.
    pub fn duty(&self) -> T {
        self.tau_tot() / (self.tau_tot() + self.t_dead)
    }

    /// Sequence repetition rate `1/(τ_tot + t_dead)`.
    pub fn sample_rate(&self) -> T {
        T::one() / (self.tau_tot() + self.t_dead)
    }

    /// Centres of the π pulses measured from the first π/2 pulse.
    pub fn pulse_centers(&self) -> Vec<T> {
        let s = self.spacing();
        (1..=self.n_pi)
            .map(|j| (T::from_u32(j).unwrap() - T::lit(0.5)) * s)
            .collect()
    }

    /// Nominal drive phase of every π pulse (0 for X, π/2 for Y).
    pub fn desired_phases(&self) -> Vec<T> {
        (0..self.n_pi as usize)
            .map(|j| match self.kind {
                SequenceKind::Xy8 if XY8_PATTERN[j % 8] => T::FRAC_PI_2(),
                _ => T::zero(),
            })
            .collect()
    }

    pub fn filter(&self) -> FilterFunction<T> {
        FilterFunction::new(*self)
    }
}

fn half_spacing<T: Real>(f: T, t_pi: T) -> Result<T> {
    if !(f.is_finite() && f > T::zero()) {
        return Err(Error::param("f_xy8", format!("must be > 0, got {f}")));
    }
    let half_period = T::one() / (T::lit(2.0) * f);
    if t_pi >= half_period {
        return Err(Error::param(
            "t_pi",
            format!("pulses overlap: t_pi = {t_pi} >= 1/(2 f) = {half_period}"),
        ));
    }
    Ok((half_period - t_pi) / T::lit(2.0))
}

/// Phase-noise filter function of a [`PulseSequence`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterFunction<T> {
    pub sequence: PulseSequence<T>,
    pub finite_pulse_correction: bool,
}

impl<T: Real> FilterFunction<T> {
    /// Filter function with the finite-pulse correction enabled.
    pub fn new(sequence: PulseSequence<T>) -> Self {
        Self {
            sequence,
            finite_pulse_correction: true,
        }
    }

    pub fn delta_pulses(sequence: PulseSequence<T>) -> Self {
        Self {
            sequence,
            finite_pulse_correction: false,
        }
    }

    /// Finite-pulse weighting `cos(π f t_π)` of the π-pulse terms.
    pub fn pulse_weight(&self, f: T) -> T {
        if self.finite_pulse_correction {
            (T::PI() * f * self.sequence.t_pi).cos()
        } else {
            T::one()
        }
    }

    /// `F(f)`; nonnegative for every `f ≥ 0`.
    ///
    /// The pulse sum is a geometric series. With `β = π f τ_tot / N` written as
    /// `(m + 1/2)π + δ`, `|y|² = 4·(sin Nδ + (−1)^m G sin Nδ / sin δ)²`, which
    /// stays well conditioned at the harmonic peaks `δ → 0`.
    pub fn value(&self, f: T) -> T {
        let n = self.sequence.n();
        let beta = T::PI() * f * self.sequence.tau_tot() / n;
        let m = (beta / T::PI()).floor();
        let delta = beta - (m + T::lit(0.5)) * T::PI();
        let odd = m.to_i64().map(|k| k.rem_euclid(2) == 1).unwrap_or(false);
        let sin_nd = (n * delta).sin();
        let sd = delta.sin();
        let dirichlet = if sd == T::zero() { n } else { sin_nd / sd };
        let g = self.pulse_weight(f);
        let g = if odd { -g } else { g };
        let y = sin_nd + g * dirichlet;
        T::lit(4.0) * y * y
    }

    /// Frequencies where `F` has structure: harmonic peaks and their first
    /// nulls, cell boundaries and a logarithmic grid below the first peak.
    pub fn breakpoints(&self, f_hi: T) -> Vec<T> {
        let tt = self.sequence.tau_tot();
        let fc = self.sequence.center_frequency();
        let lobe = T::one() / tt;
        let mut pts = Vec::new();
        let mut k = 1u32;
        loop {
            let h = fc * T::from_u32(k).unwrap();
            if h - lobe > f_hi {
                break;
            }
            pts.push(h);
            if k % 2 == 1 {
                pts.push(h - lobe);
                pts.push(h + lobe);
            }
            k += 1;
        }
        let mut f = fc;
        for _ in 0..24 {
            f = f / T::lit(2.0);
            pts.push(f);
        }
        pts
    }

    /// Panel edges on `[f_lo, f_hi]` that resolve the `1/τ_tot` oscillation.
    pub fn panel_edges(&self, f_lo: T, f_hi: T, extra: &[T]) -> Vec<T> {
        let mut pts = self.breakpoints(f_hi);
        pts.extend_from_slice(extra);
        let width = T::one() / (T::lit(4.0) * self.sequence.tau_tot());
        panel_edges(f_lo, f_hi, &pts, width)
    }

    /// `∫ F(f) df` over `[f_lo, f_hi]`.
    pub fn integral(&self, f_lo: T, f_hi: T) -> Result<T> {
        filter_function_integral(self, f_lo, f_hi)
    }
}

pub fn make_xy8<T: Real>(n_repeats: u32, f_xy8: T, t_pi: T, t_dead: T) -> Result<PulseSequence<T>> {
    PulseSequence::xy8(n_repeats, f_xy8, t_pi, t_dead)
}

pub fn filter_function_value<T: Real>(ff: &FilterFunction<T>, f: T) -> T {
    ff.value(f)
}

/// `∫_{f_lo}^{f_hi} F(f) df` by panel-wise adaptive Gauss–Kronrod.
pub fn filter_function_integral<T: Real>(ff: &FilterFunction<T>, f_lo: T, f_hi: T) -> Result<T> {
    if !(f_lo.is_finite() && f_hi.is_finite()) {
        return Err(Error::param("f_hi", "integration bounds must be finite"));
    }
    if f_lo < T::zero() || f_hi < f_lo {
        return Err(Error::param("f_lo", "need 0 <= f_lo <= f_hi"));
    }
    if f_lo == f_hi {
        return Ok(T::zero());
    }
    let edges = ff.panel_edges(f_lo, f_hi, &[]);
    integrate_panels(|f| ff.value(f), &edges, &QuadOptions::default())
}
