//! Normalized intensity cross-correlation.
//!
//! The estimator is
//!
//! ```text
//! G²(τ) = ⟨δS₁(t) δS₂(t+τ)⟩ / √(⟨δS₁(t)²⟩ ⟨δS₂(t+τ)²⟩)
//! ```
//!
//! with all three averages taken over the same set of valid `t`, so the
//! Cauchy–Schwarz bound holds sample by sample. Delays are integer sample
//! shifts.

use alloc::vec::Vec;

use crate::error::{Error, Result};
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use crate::math::Float;
use crate::math::KahanSum;

/// Two detector channels on a common uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTracePair {
    pub t0: f64,
    pub dt: f64,
    pub ch1: Vec<f64>,
    pub ch2: Vec<f64>,
}

impl FieldTracePair {
    pub fn new(t0: f64, dt: f64, ch1: Vec<f64>, ch2: Vec<f64>) -> Result<Self> {
        if ch1.len() != ch2.len() {
            return Err(Error::InvalidTrace("channels differ in length"));
        }
        if ch1.len() < 2 {
            return Err(Error::InvalidTrace("need at least two samples"));
        }
        if !(dt > 0.0) || !dt.is_finite() || !t0.is_finite() {
            return Err(Error::InvalidTrace("sample interval must be positive"));
        }
        if ch1.iter().chain(&ch2).any(|v| !v.is_finite()) {
            return Err(Error::InvalidTrace("non-finite sample"));
        }
        Ok(Self { t0, dt, ch1, ch2 })
    }

    pub fn len(&self) -> usize {
        self.ch1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ch1.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    /// Same pair with the channels exchanged.
    pub fn swapped(&self) -> Self {
        Self { t0: self.t0, dt: self.dt, ch1: self.ch2.clone(), ch2: self.ch1.clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationFunction {
    pub taus: Vec<f64>,
    pub values: Vec<f64>,
    pub window: f64,
}

impl CorrelationFunction {
    /// Value at the grid point nearest to `tau`.
    pub fn at(&self, tau: f64) -> Option<f64> {
        let k = self
            .taus
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - tau).abs().total_cmp(&(b.1 - tau).abs()))?
            .0;
        Some(self.values[k])
    }

    /// Delay of the largest |G²|.
    pub fn peak(&self) -> Option<(f64, f64)> {
        let k = self
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))?
            .0;
        Some((self.taus[k], self.values[k]))
    }
}

fn window_samples(window: f64, dt: f64) -> Result<usize> {
    let w = (window / dt).round();
    if !(w >= 2.0) {
        return Err(Error::WindowTooShort { window, dt });
    }
    Ok(if w > usize::MAX as f64 { usize::MAX } else { w as usize })
}

/// δS(t) = S(t) − mean of S over [t, t + window).
///
/// Samples whose window would run past the end are dropped. A window of at
/// least the full trace subtracts the global mean from every sample.
pub fn extract_fluctuations(values: &[f64], dt: f64, window: f64) -> Result<Vec<f64>> {
    let w = window_samples(window, dt)?;
    let n = values.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    // offsetting by the first sample makes constant traces exact
    let base = values[0];
    if w >= n {
        let mut acc = KahanSum::default();
        values.iter().for_each(|&v| acc.add(v - base));
        let mean = acc.value() / n as f64;
        return Ok(values.iter().map(|&v| (v - base) - mean).collect());
    }
    let mut prefix = Vec::with_capacity(n + 1);
    let mut acc = KahanSum::default();
    prefix.push(0.0);
    for &v in values {
        acc.add(v - base);
        prefix.push(acc.value());
    }
    Ok((0..=n - w)
        .map(|k| (values[k] - base) - (prefix[k + w] - prefix[k]) / w as f64)
        .collect())
}

fn lag_index(tau: f64, dt: f64) -> Result<i64> {
    let k = (tau / dt).round();
    if !k.is_finite() || k.abs() > i64::MAX as f64 / 2.0 {
        return Err(Error::InvalidParams("delay not representable on the grid"));
    }
    Ok(k as i64)
}

/// G² at one integer shift of already extracted fluctuations.
pub fn correlation_at_shift(d1: &[f64], d2: &[f64], shift: i64) -> Result<f64> {
    let m = d1.len().min(d2.len()) as i64;
    let lo = (-shift).max(0);
    let hi = m.min(m - shift);
    if hi - lo < 2 {
        return Err(Error::InvalidParams("delay leaves fewer than two overlapping samples"));
    }
    let (mut c, mut p1, mut p2) = (KahanSum::default(), KahanSum::default(), KahanSum::default());
    for t in lo..hi {
        let a = d1[t as usize];
        let b = d2[(t + shift) as usize];
        c.add(a * b);
        p1.add(a * a);
        p2.add(b * b);
    }
    let (p1, p2) = (p1.value(), p2.value());
    if p1 == 0.0 {
        return Err(Error::ZeroVariance(1));
    }
    if p2 == 0.0 {
        return Err(Error::ZeroVariance(2));
    }
    // √(p1·p2) gives exactly ±1 for identical or negated channels
    let prod = p1 * p2;
    let norm = if prod.is_normal() { prod.sqrt() } else { p1.sqrt() * p2.sqrt() };
    let g = c.value() / norm;
    Ok(g.clamp(-1.0, 1.0))
}

/// Cross-correlation over delays [tau_min, tau_max], rounded to samples.
pub fn cross_correlation(pair: &FieldTracePair, tau_min: f64, tau_max: f64, window: f64) -> Result<CorrelationFunction> {
    let d1 = extract_fluctuations(&pair.ch1, pair.dt, window)?;
    let d2 = extract_fluctuations(&pair.ch2, pair.dt, window)?;
    correlate_fluctuations(&d1, &d2, pair.dt, tau_min, tau_max, window)
}

/// As [`cross_correlation`] for fluctuation series that are already
/// extracted.
pub fn correlate_fluctuations(
    d1: &[f64],
    d2: &[f64],
    dt: f64,
    tau_min: f64,
    tau_max: f64,
    window: f64,
) -> Result<CorrelationFunction> {
    for (ch, d) in [(1u8, d1), (2u8, d2)] {
        if d.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroVariance(ch));
        }
    }
    let (k0, k1) = (lag_index(tau_min, dt)?, lag_index(tau_max, dt)?);
    if k0 > k1 {
        return Err(Error::InvalidParams("empty delay range"));
    }
    let mut taus = Vec::with_capacity((k1 - k0 + 1) as usize);
    let mut values = Vec::with_capacity(taus.capacity());
    for k in k0..=k1 {
        taus.push(k as f64 * dt);
        values.push(correlation_at_shift(d1, d2, k)?);
    }
    Ok(CorrelationFunction { taus, values, window })
}

/// Moments of the circular-component fluctuations, I± = I₀ + i±,
/// x = i₊ + i₋, s = i₊ − i₋.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationMoments {
    pub i0: f64,
    pub var_x: f64,
    pub var_s: f64,
    pub fourth_s: f64,
}

impl FluctuationMoments {
    /// Sample moments; each intensity is referred to its own mean so that
    /// ⟨x⟩ = ⟨s⟩ = 0.
    pub fn from_intensities(i_plus: &[f64], i_minus: &[f64]) -> Result<Self> {
        let n = i_plus.len();
        if n != i_minus.len() || n == 0 {
            return Err(Error::InvalidTrace("intensity series must be non-empty and equal in length"));
        }
        let mean = |v: &[f64]| {
            let mut acc = KahanSum::default();
            v.iter().for_each(|&x| acc.add(x));
            acc.value() / n as f64
        };
        let (mp, mm) = (mean(i_plus), mean(i_minus));
        let (mut x2, mut s2, mut s4) = (KahanSum::default(), KahanSum::default(), KahanSum::default());
        for (&p, &m) in i_plus.iter().zip(i_minus) {
            let (ip, im) = (p - mp, m - mm);
            let x = ip + im;
            let s = ip - im;
            x2.add(x * x);
            s2.add(s * s);
            s4.add(s * s * s * s);
        }
        let nf = n as f64;
        Ok(Self { i0: 0.5 * (mp + mm), var_x: x2.value() / nf, var_s: s2.value() / nf, fourth_s: s4.value() / nf })
    }

    /// V = (⟨s⁴⟩ − ⟨s²⟩²) / (16 I₀²).
    pub fn s_variance_term(&self) -> f64 {
        (self.fourth_s - self.var_s * self.var_s) / (16.0 * self.i0 * self.i0)
    }
}

/// Sign of the V sin²φ term in the numerator of the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorrelationVariant {
    /// ⟨x²⟩cos²φ + V sin²φ.
    Paper,
    /// ⟨x²⟩cos²φ − V sin²φ, which is what the channel fluctuations give.
    #[default]
    Derived,
}

/// Closed-form G²(0) from the fluctuation moments.
pub fn analytic_correlation(m: &FluctuationMoments, phi: f64, variant: CorrelationVariant) -> Result<f64> {
    let x2 = m.var_x;
    let v = m.s_variance_term();
    if !(x2.is_finite() && v.is_finite()) {
        return Err(Error::DegenerateMoments);
    }
    let (s, c) = phi.sin_cos();
    let (s2, c2) = (s * s, c * c);
    let plus = x2 * c2 + v * s2;
    let denom = (plus * plus + 4.0 * x2 * v * s2 * s2).sqrt();
    if denom == 0.0 {
        return Err(Error::DegenerateMoments);
    }
    let num = match variant {
        CorrelationVariant::Paper => plus,
        CorrelationVariant::Derived => x2 * c2 - v * s2,
    };
    Ok((num / denom).clamp(-1.0, 1.0))
}

/// δI₁,₂ = x(1 ± sin φ) ∓ (s² − ⟨s²⟩) sin φ / (4 I₀).
pub fn delta_channels(x: f64, s: f64, s2_mean: f64, i0: f64, phi: f64) -> (f64, f64) {
    let sn = phi.sin();
    let u = (s * s - s2_mean) / (4.0 * i0) * sn;
    (x * (1.0 + sn) - u, x * (1.0 - sn) + u)
}

/// Full width at half maximum of |G²| around its largest value, with
/// linear interpolation between grid points.
pub fn correlation_peak_width(cf: &CorrelationFunction) -> Result<f64> {
    let a: Vec<f64> = cf.values.iter().map(|v| v.abs()).collect();
    let (k, &peak) = a
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .ok_or(Error::NoPeak)?;
    if !(peak > 0.0) {
        return Err(Error::NoPeak);
    }
    let half = 0.5 * peak;
    let cross = |i: usize, j: usize| {
        // a[i] ≥ half > a[j]
        let f = (a[i] - half) / (a[i] - a[j]);
        cf.taus[i] + f * (cf.taus[j] - cf.taus[i])
    };
    let left = (0..k).rev().find(|&j| a[j] < half).map(|j| cross(j + 1, j));
    let right = (k + 1..a.len()).find(|&j| a[j] < half).map(|j| cross(j - 1, j));
    match (left, right) {
        (Some(l), Some(r)) => Ok(r - l),
        _ => Err(Error::NoPeak),
    }
}
