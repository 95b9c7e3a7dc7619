//! Steady state for equal field magnitudes via the saturation coefficients
//! A, B and C.
//!
//! With Ω₋ = Ω₊ = Ω (real) and γ_ab = γ_ca the optical linewidths take the
//! form Γ_ab = Γ + iδ and Γ_ca = Γ − iδ with the shared value
//! Γ = γ + iω_cb/2, the ground coherence can be eliminated exactly, and the
//! populations follow from two linear balance equations
//!
//! ```text
//! g n_a + A_b n_ab + C n_cb = 0
//! g n_a + A_c n_ac + C n_bc = 0
//! ```
//!
//! with `g` the branch repopulation rate and `A_b = A + δB`,
//! `A_c = A − δB`. The sign of δB is the one produced by eliminating the
//! coherences from the Liouville equation; it also makes the n_cb formula
//! `2 g B δ / D` hold.

use num_complex::Complex64;

use super::{
    DetuningSet, FieldAmplitudes, LambdaAtomParams, SteadyStateSolution, DEFAULT_DEGENERACY_EPS,
};
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Complex optical and ground-state linewidths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexLinewidths {
    pub gamma_ab: Complex64,
    pub gamma_ca: Complex64,
    pub gamma_cb: Complex64,
    /// Shared optical value Γ with Γ_ab = Γ + iδ and Γ_ca = Γ − iδ; the mean
    /// of the two when γ_ab ≠ γ_ca.
    pub shared: Complex64,
}

pub fn complex_linewidths(params: &LambdaAtomParams, det: &DetuningSet) -> ComplexLinewidths {
    let gamma_ab = Complex64::new(params.gamma_ab, det.minus_detuning());
    let gamma_ca = Complex64::new(params.gamma_ca, -det.plus_detuning());
    let gamma_cb = Complex64::new(params.gamma_cb, det.raman_detuning());
    ComplexLinewidths { gamma_ab, gamma_ca, gamma_cb, shared: 0.5 * (gamma_ab + gamma_ca) }
}

/// Saturation coefficients. A, B and C are real: each is a sum of a complex
/// number and its conjugate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationCoefficients {
    pub a: f64,
    pub b_coef: f64,
    pub c: f64,
    pub a_b: f64,
    pub a_c: f64,
    /// Γ̃_cb = Γ_cb(δ² + Γ²) + 2ΓΩ².
    pub gamma_tilde: Complex64,
    /// Common field magnitude |Ω|.
    pub omega: f64,
    pub delta: f64,
}

pub fn saturation_coefficients(
    lw: &ComplexLinewidths,
    fields: &FieldAmplitudes,
    det: &DetuningSet,
) -> Result<SaturationCoefficients> {
    saturation_coefficients_eps(lw, fields, det, DEFAULT_DEGENERACY_EPS)
}

pub fn saturation_coefficients_eps(
    lw: &ComplexLinewidths,
    fields: &FieldAmplitudes,
    det: &DetuningSet,
    eps: f64,
) -> Result<SaturationCoefficients> {
    let omega = common_magnitude(fields)?;
    let delta = det.delta();
    let g = lw.shared;
    let g_cb = lw.gamma_cb;
    let om2 = omega * omega;

    let gamma_tilde = g_cb * (delta * delta + g * g) + 2.0 * g * om2;
    if gamma_tilde.norm() <= eps {
        return Err(Error::DegenerateDenominator {
            context: "Γ̃_cb",
            magnitude: gamma_tilde.norm(),
        });
    }
    let inv = gamma_tilde.inv();
    let a = 2.0 * (g_cb * g * inv).re * om2;
    let b_coef = 2.0 * (g_cb * inv).im * om2;
    let c = 2.0 * inv.re * om2 * om2;
    Ok(SaturationCoefficients {
        a,
        b_coef,
        c,
        a_b: a + delta * b_coef,
        a_c: a - delta * b_coef,
        gamma_tilde,
        omega,
        delta,
    })
}

fn common_magnitude(fields: &FieldAmplitudes) -> Result<f64> {
    let m = fields.omega_minus.norm();
    let p = fields.omega_plus.norm();
    if (m - p).abs() > 1e-12 * m.max(p) {
        return Err(Error::UnequalFields { minus: m, plus: p });
    }
    Ok(0.5 * (m + p))
}

impl SaturationCoefficients {
    /// Denominator D = 3A_bA_c + C(3A_b + 3A_c + 4g) + g(A_b + A_c).
    pub fn denominator(&self, branch_rate: f64) -> f64 {
        let g = branch_rate;
        3.0 * self.a_b * self.a_c + self.c * (3.0 * self.a_b + 3.0 * self.a_c + 4.0 * g)
            + g * (self.a_b + self.a_c)
    }

    /// n_cb in the form 2gBδ/D.
    pub fn raman_population_difference(&self, branch_rate: f64) -> f64 {
        2.0 * branch_rate * self.b_coef * self.delta / self.denominator(branch_rate)
    }
}

/// Populations and population differences from the saturation coefficients.
pub fn steady_state_populations(
    coeffs: &SaturationCoefficients,
    params: &LambdaAtomParams,
) -> Result<SteadyStateSolution> {
    steady_state_populations_eps(coeffs, params, DEFAULT_DEGENERACY_EPS)
}

pub fn steady_state_populations_eps(
    coeffs: &SaturationCoefficients,
    params: &LambdaAtomParams,
    eps: f64,
) -> Result<SteadyStateSolution> {
    let g = params.branch_rate();
    let (ab, ac, c) = (coeffs.a_b, coeffs.a_c, coeffs.c);
    let d = coeffs.denominator(g);
    if d.abs() <= eps {
        return Err(Error::DegenerateDenominator { context: "population system", magnitude: d.abs() });
    }
    let n_a = (ab * ac + c * (ab + ac)) / d;
    let n_b = (ab * ac + c * (ab + ac + 2.0 * g) + ac * g) / d;
    let n_c = (ab * ac + c * (ab + ac + 2.0 * g) + ab * g) / d;
    let mut sol = SteadyStateSolution::from_populations(n_a, n_b, n_c);
    // differences straight from their own numerators, not by subtraction
    sol.n_ab = -g * (ac + 2.0 * c) / d;
    sol.n_ca = g * (ab + 2.0 * c) / d;
    sol.n_cb = g * (ab - ac) / d;
    Ok(sol)
}

/// Fill in the coherences of a population solution.
///
/// Field phases are handled by a gauge transformation of |b⟩ and |c⟩: the
/// closed form is evaluated for real Ω and the phases are restored at the
/// end.
pub fn steady_state_coherences(
    sol: &SteadyStateSolution,
    coeffs: &SaturationCoefficients,
    lw: &ComplexLinewidths,
    fields: &FieldAmplitudes,
    det: &DetuningSet,
) -> Result<SteadyStateSolution> {
    steady_state_coherences_eps(sol, coeffs, lw, fields, det, DEFAULT_DEGENERACY_EPS)
}

pub fn steady_state_coherences_eps(
    sol: &SteadyStateSolution,
    coeffs: &SaturationCoefficients,
    lw: &ComplexLinewidths,
    fields: &FieldAmplitudes,
    _det: &DetuningSet,
    eps: f64,
) -> Result<SteadyStateSolution> {
    let mut out = *sol;
    let omega = coeffs.omega;
    if omega == 0.0 {
        out.rho_ab = Complex64::new(0.0, 0.0);
        out.rho_ca = Complex64::new(0.0, 0.0);
        out.rho_cb = Complex64::new(0.0, 0.0);
        return Ok(out);
    }
    let g = lw.shared;
    let delta = coeffs.delta;
    let om2 = omega * omega;
    let inv = coeffs.gamma_tilde.inv();

    let rho_ab = I * omega * (lw.gamma_cb * (g - I * delta) * sol.n_ab + sol.n_cb * om2) * inv;
    let rho_ca = I * omega * (lw.gamma_cb * (g + I * delta) * sol.n_ca + sol.n_cb * om2) * inv;
    let rho_cb = if lw.gamma_cb.norm() > eps {
        (I * rho_ca * omega - I * rho_ab * omega) / lw.gamma_cb
    } else {
        // Γ_cb = 0: take ρ_cb from the ρ_ab balance instead
        (I * rho_ab * lw.gamma_ab + sol.n_ab * omega) / omega
    };

    let alpha = fields.omega_minus.arg();
    let beta = fields.omega_plus.arg();
    out.rho_ab = rho_ab * Complex64::from_polar(1.0, alpha);
    out.rho_ca = rho_ca * Complex64::from_polar(1.0, -beta);
    out.rho_cb = rho_cb * Complex64::from_polar(1.0, alpha - beta);
    Ok(out)
}

/// Convenience: linewidths, coefficients, populations and coherences.
pub fn steady_state_closed_form(
    params: &LambdaAtomParams,
    det: &DetuningSet,
    fields: &FieldAmplitudes,
) -> Result<SteadyStateSolution> {
    let lw = complex_linewidths(params, det);
    let coeffs = saturation_coefficients(&lw, fields, det)?;
    let pops = steady_state_populations(&coeffs, params)?;
    steady_state_coherences(&pops, &coeffs, &lw, fields, det)
}
