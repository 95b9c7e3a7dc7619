//! Linear-polarization detection of the transmitted beam.
//!
//! After the cell a half-wave plate and a polarizing splitter send the beam
//! to two detectors, balanced when the polarization is unrotated. The
//! circular components then split as
//!
//! ```text
//! I₁,₂ = ½ (I₊ + I₋ ± 2 √(I₊ I₋) sin φ)
//! ```

use core::f64::consts::{FRAC_PI_2, PI};

use crate::atom::FieldAmplitudes;
use crate::error::{Error, Result};
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use crate::math::Float;

/// Signals with and without resonant absorption.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionRecord {
    pub s1: f64,
    pub s2: f64,
    pub s01: f64,
    pub s02: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityPair {
    pub i_plus: f64,
    pub i_minus: f64,
    pub phi: f64,
}

/// T = (S₁ + S₂)/(S₀₁ + S₀₂).
pub fn transmission(rec: &DetectionRecord) -> Result<f64> {
    let reference = rec.s01 + rec.s02;
    if !(reference > 0.0) {
        return Err(Error::InvalidReference(reference));
    }
    Ok((rec.s1 + rec.s2) / reference)
}

/// φ = arcsin((S₁ − S₂)/(S₁ + S₂)).
pub fn rotation_angle(s1: f64, s2: f64) -> Result<f64> {
    let total = s1 + s2;
    if !(total > 0.0) {
        return Err(Error::InvalidSignals(total));
    }
    Ok(((s1 - s2) / total).clamp(-1.0, 1.0).asin())
}

pub fn detection_channels(pair: &IntensityPair) -> (f64, f64) {
    let sum = pair.i_plus + pair.i_minus;
    let cross = (pair.i_plus * pair.i_minus).sqrt() * pair.phi.sin();
    let i1 = 0.5 * sum + cross;
    // I₂ from the sum keeps I₁ + I₂ = I₊ + I₋ exact in floating point
    (i1, sum - i1)
}

/// Wrap an angle into [−π/2, π/2] (rotation by π is the same polarization).
fn wrap_half(phi: f64) -> f64 {
    let w = phi - PI * (phi / PI).round();
    w.clamp(-FRAC_PI_2, FRAC_PI_2)
}

/// Rotation of the linear polarization between input and output,
/// φ = ½ arg(Ω₊Ω₋*)|out − ½ arg(Ω₊Ω₋*)|in, plus a constant background
/// `offset`.
pub fn rotation_from_fields(input: &FieldAmplitudes, output: &FieldAmplitudes, offset: f64) -> Result<f64> {
    for f in [input, output] {
        if f.omega_minus.norm() == 0.0 || f.omega_plus.norm() == 0.0 {
            return Err(Error::ZeroField);
        }
    }
    let rel = |f: &FieldAmplitudes| f.omega_plus * f.omega_minus.conj();
    // phase of the ratio avoids a spurious 2π jump between the two args
    let turn = (rel(output) * rel(input).conj()).arg();
    Ok(wrap_half(0.5 * turn + offset))
}

/// Detector intensities for output fields, with |Ω|² standing in for the
/// intensity of each circular component.
pub fn intensities(input: &FieldAmplitudes, output: &FieldAmplitudes, offset: f64) -> Result<IntensityPair> {
    Ok(IntensityPair {
        i_plus: output.omega_plus.norm_sqr(),
        i_minus: output.omega_minus.norm_sqr(),
        phi: rotation_from_fields(input, output, offset)?,
    })
}
