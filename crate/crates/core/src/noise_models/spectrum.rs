use crate::error::{Error, Result};
use crate::scalar::Real;

/// Lowest level produced by extrapolating past the last tabulated offset.
pub const EXTRAPOLATION_FLOOR_DBC: f64 = -200.0;

/// One tabulated single-sideband curve, log-log interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct SsbTable<T> {
    offsets: Vec<T>,
    levels: Vec<T>,
    log_offsets: Vec<T>,
}

impl<T: Real> SsbTable<T> {
    pub fn new(points: &[(T, T)]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::param("points", "spectrum table is empty"));
        }
        for (i, &(f, l)) in points.iter().enumerate() {
            if !(f.is_finite() && f > T::zero()) {
                return Err(Error::param("offset_hz", format!("offset #{i} must be finite and > 0")));
            }
            if l.is_nan() || l == T::infinity() {
                return Err(Error::param("l_dbc_per_hz", format!("level #{i} must be < +inf")));
            }
            if i > 0 && f <= points[i - 1].0 {
                return Err(Error::param("offset_hz", "offsets must be strictly increasing"));
            }
        }
        Ok(Self {
            offsets: points.iter().map(|p| p.0).collect(),
            levels: points.iter().map(|p| p.1).collect(),
            log_offsets: points.iter().map(|p| p.0.log10()).collect(),
        })
    }

    pub fn points(&self) -> Vec<(T, T)> {
        self.offsets.iter().copied().zip(self.levels.iter().copied()).collect()
    }

    pub fn offsets(&self) -> &[T] {
        &self.offsets
    }

    /// `L(f)` in dBc/Hz.
    pub fn level(&self, f: T) -> T {
        let n = self.offsets.len();
        if n == 1 || f <= self.offsets[0] {
            return self.levels[0];
        }
        let lf = f.log10();
        if f >= self.offsets[n - 1] {
            let (l0, l1) = (self.levels[n - 2], self.levels[n - 1]);
            if !(l0.is_finite() && l1.is_finite()) {
                return l1;
            }
            let slope = (l1 - l0) / (self.log_offsets[n - 1] - self.log_offsets[n - 2]);
            let l = l1 + slope * (lf - self.log_offsets[n - 1]);
            let floor = T::lit(EXTRAPOLATION_FLOOR_DBC);
            return if l < floor { floor.min(l1) } else { l };
        }
        let i = self.offsets.partition_point(|&x| x <= f) - 1;
        let (l0, l1) = (self.levels[i], self.levels[i + 1]);
        if !(l0.is_finite() && l1.is_finite()) {
            return T::neg_infinity();
        }
        let t = (lf - self.log_offsets[i]) / (self.log_offsets[i + 1] - self.log_offsets[i]);
        l0 + t * (l1 - l0)
    }

    fn shifted(&self, db: T) -> Self {
        Self {
            offsets: self.offsets.clone(),
            levels: self.levels.iter().map(|&l| l + db).collect(),
            log_offsets: self.log_offsets.clone(),
        }
    }
}

/// Oscillator phase-noise spectrum: a carrier plus one or more independent
/// tabulated contributions whose PSDs add.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseNoiseSpectrum<T> {
    carrier_hz: T,
    components: Vec<SsbTable<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixMode {
    Sum,
    Difference,
}

impl<T: Real> PhaseNoiseSpectrum<T> {
    pub fn new(carrier_hz: T, points: &[(T, T)]) -> Result<Self> {
        check_carrier(carrier_hz)?;
        Ok(Self {
            carrier_hz,
            components: vec![SsbTable::new(points)?],
        })
    }

    /// Constant `L` at every offset.
    pub fn flat(carrier_hz: T, l_dbc: T) -> Result<Self> {
        Self::new(carrier_hz, &[(T::one(), l_dbc)])
    }

    /// A noiseless source.
    pub fn silent(carrier_hz: T) -> Result<Self> {
        Self::flat(carrier_hz, T::neg_infinity())
    }

    /// Flat spectrum with one-sided PSD `s0` in rad²/Hz.
    pub fn flat_psd(carrier_hz: T, s0: T) -> Result<Self> {
        Self::flat(carrier_hz, psd_to_level(s0))
    }

    pub fn carrier_hz(&self) -> T {
        self.carrier_hz
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    /// `L(f)` in dBc/Hz; `f` must be positive.
    pub fn ssb(&self, f: T) -> Result<T> {
        check_offset(f)?;
        Ok(self.level_unchecked(f))
    }

    /// One-sided phase PSD `S_φ(f) = 2·10^(L/10)` in rad²/Hz.
    pub fn psd(&self, f: T) -> Result<T> {
        check_offset(f)?;
        Ok(self.psd_unchecked(f))
    }

    pub(crate) fn psd_unchecked(&self, f: T) -> T {
        let f = f.max(T::min_positive_value());
        let ten = T::lit(10.0);
        self.components
            .iter()
            .map(|c| T::lit(2.0) * ten.powf(c.level(f) / ten))
            .fold(T::zero(), |a, b| a + b)
    }

    pub(crate) fn level_unchecked(&self, f: T) -> T {
        psd_to_level(self.psd_unchecked(f))
    }

    /// All tabulated offsets (useful as quadrature breakpoints).
    pub fn nodes(&self) -> Vec<T> {
        let mut v: Vec<T> = self.components.iter().flat_map(|c| c.offsets().iter().copied()).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup();
        v
    }

    /// `(offset, L)` pairs at every node; exact for single-table spectra.
    pub fn points(&self) -> Vec<(T, T)> {
        if self.components.len() == 1 {
            return self.components[0].points();
        }
        self.nodes().into_iter().map(|f| (f, self.level_unchecked(f))).collect()
    }

    /// Adds `db` to every level.
    pub fn shifted_db(&self, db: T) -> Self {
        Self {
            carrier_hz: self.carrier_hz,
            components: self.components.iter().map(|c| c.shifted(db)).collect(),
        }
    }

    /// Multiplies the PSD by `factor`.
    pub fn scaled_psd(&self, factor: T) -> Self {
        self.shifted_db(T::lit(10.0) * factor.log10())
    }

    /// Re-targets the spectrum to another carrier assuming phase-noise
    /// amplitude proportional to the carrier (`+20·log10` ratio).
    pub fn scaled_to_carrier(&self, carrier_hz: T) -> Result<Self> {
        check_carrier(carrier_hz)?;
        let mut s = self.shifted_db(T::lit(20.0) * (carrier_hz / self.carrier_hz).log10());
        s.carrier_hz = carrier_hz;
        Ok(s)
    }
}

fn psd_to_level<T: Real>(s: T) -> T {
    T::lit(10.0) * (s / T::lit(2.0)).log10()
}

fn check_carrier<T: Real>(c: T) -> Result<()> {
    if c.is_finite() && c > T::zero() {
        Ok(())
    } else {
        Err(Error::param("carrier_hz", format!("must be finite and > 0, got {c}")))
    }
}

fn check_offset<T: Real>(f: T) -> Result<()> {
    if f.is_finite() && f > T::zero() {
        Ok(())
    } else {
        Err(Error::param("f", format!("offset must be finite and > 0, got {f}")))
    }
}

/// `S_φ(f)` of `spec`.
pub fn ssb_to_psd<T: Real>(spec: &PhaseNoiseSpectrum<T>, f: T) -> Result<T> {
    spec.psd(f)
}

/// Phase-noise spectrum of a mixer output for independent inputs.
pub fn mix_spectra<T: Real>(
    a: &PhaseNoiseSpectrum<T>,
    b: &PhaseNoiseSpectrum<T>,
    mode: MixMode,
) -> Result<PhaseNoiseSpectrum<T>> {
    let carrier = match mode {
        MixMode::Sum => a.carrier_hz + b.carrier_hz,
        MixMode::Difference => a.carrier_hz - b.carrier_hz,
    };
    if carrier <= T::zero() {
        return Err(Error::param("carrier_hz", "difference carrier must be > 0"));
    }
    let mut components = a.components.clone();
    components.extend(b.components.iter().cloned());
    Ok(PhaseNoiseSpectrum {
        carrier_hz: carrier,
        components,
    })
}
