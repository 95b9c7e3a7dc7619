//! Leading-order expressions for weak fields inside the EIT window.

use super::{DetuningSet, FieldAmplitudes, LambdaAtomParams};
use crate::error::{Error, Result};

/// Dimensionless measures of how far a parameter set is from the
/// perturbative regime Ω ≪ γ, |δ| ≲ Ω²/γ, γ_cb ≪ γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeCheck {
    /// |Ω| / γ, should be ≤ 0.1.
    pub field_ratio: f64,
    /// |δ| γ / |Ω|², should be ≤ 1.
    pub window_ratio: f64,
    /// γ_cb / γ, should be ≤ 0.1.
    pub ground_ratio: f64,
}

impl RegimeCheck {
    pub fn in_regime(&self) -> bool {
        self.field_ratio <= 0.1 && self.window_ratio <= 1.0 && self.ground_ratio <= 0.1
    }

    /// Soft error when any condition is missed by more than a factor 10.
    pub fn violation(&self) -> Option<Error> {
        let bad = self.field_ratio > 1.0 || self.window_ratio > 10.0 || self.ground_ratio > 1.0;
        bad.then_some(Error::RegimeViolation {
            field_ratio: self.field_ratio,
            window_ratio: self.window_ratio,
            ground_ratio: self.ground_ratio,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxSolution {
    pub n_cb: f64,
    pub im_rho_ab: f64,
    pub im_rho_ac: f64,
    pub regime: RegimeCheck,
}

/// n_cb ≈ Δδ/|Ω|², Im ρ_ab ≈ (γ_cb γ + Δδ)/(γ|Ω|), Im ρ_ac ≈ (γ_cb γ − Δδ)/(γ|Ω|),
/// with γ the optical coherence decay and Δ the two-photon detuning.
pub fn approximate_solution(
    params: &LambdaAtomParams,
    det: &DetuningSet,
    fields: &FieldAmplitudes,
) -> Result<ApproxSolution> {
    let omega = 0.5 * (fields.omega_minus.norm() + fields.omega_plus.norm());
    if omega == 0.0 {
        return Err(Error::InvalidParams("perturbative formulas need a nonzero field"));
    }
    let gamma = 0.5 * (params.gamma_ab + params.gamma_ca);
    let delta = det.delta();
    let raman = det.raman_detuning();
    let raman_term = raman * delta;
    Ok(ApproxSolution {
        n_cb: raman_term / (omega * omega),
        im_rho_ab: (params.gamma_cb * gamma + raman_term) / (gamma * omega),
        im_rho_ac: (params.gamma_cb * gamma - raman_term) / (gamma * omega),
        regime: RegimeCheck {
            field_ratio: omega / gamma,
            window_ratio: delta.abs() * gamma / (omega * omega),
            ground_ratio: params.gamma_cb / gamma,
        },
    })
}
