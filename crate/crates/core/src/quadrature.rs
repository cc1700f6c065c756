//! Adaptive Gauss–Kronrod quadrature over caller-supplied panels.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::stats::NeumaierSum;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances for [`integrate_panels`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-3,
            abs_tol: 0.0,
            max_depth: 40,
        }
    }
}

fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = (b - a) / T::lit(2.0);
    let mid = a + half;
    let fc = f(mid);
    let mut kron = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let pair = f(mid - dx) + f(mid + dx);
        kron = kron + pair * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + pair * T::lit(WG[j / 2]);
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

fn adapt<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    whole: (T, T),
    opts: &QuadOptions,
    depth: u32,
    acc: &mut NeumaierSum<T>,
) -> Result<()> {
    let (value, err) = whole;
    if !value.is_finite() {
        return Err(Error::Integration(format!(
            "non-finite integrand on [{a:?}, {b:?}]"
        )));
    }
    let tol = T::lit(opts.rel_tol) * value.abs() + T::lit(opts.abs_tol);
    let mid = a + (b - a) / T::lit(2.0);
    if err <= tol || depth >= opts.max_depth || !(mid > a && mid < b) {
        acc.add(value);
        return Ok(());
    }
    let left = gk15(f, a, mid);
    let right = gk15(f, mid, b);
    adapt(f, a, mid, left, opts, depth + 1, acc)?;
    adapt(f, mid, b, right, opts, depth + 1, acc)
}

/// Integrates `f` over consecutive panels `[edges[i], edges[i+1]]`.
///
/// Each panel is refined independently, so the result for a union of panels
/// equals the sum of the per-panel results up to rounding.
pub fn integrate_panels<T: Real, F: Fn(T) -> T>(
    f: F,
    edges: &[T],
    opts: &QuadOptions,
) -> Result<T> {
    let mut acc = NeumaierSum::new();
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::Integration("non-finite panel edge".into()));
        }
        if b <= a {
            continue;
        }
        adapt(&f, a, b, gk15(&f, a, b), opts, 0, &mut acc)?;
    }
    Ok(acc.total())
}

/// Builds sorted, de-duplicated panel edges covering `[lo, hi]`.
///
/// `points` are interior breakpoints (ignored outside the interval); panels
/// wider than `max_width` are split uniformly.
pub fn panel_edges<T: Real>(lo: T, hi: T, points: &[T], max_width: T) -> Vec<T> {
    let mut pts: Vec<T> = points
        .iter()
        .copied()
        .filter(|&p| p > lo && p < hi)
        .collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    pts.dedup();
    let mut edges = Vec::with_capacity(pts.len());
    edges.push(pts[0]);
    for w in pts.windows(2) {
        let span = w[1] - w[0];
        let pieces = if max_width > T::zero() {
            (span / max_width).ceil().to_usize().unwrap_or(1).max(1)
        } else {
            1
        };
        for k in 1..pieces {
            edges.push(w[0] + span * T::from_usize(k).unwrap() / T::from_usize(pieces).unwrap());
        }
        edges.push(w[1]);
    }
    edges
}
