//! Driven three-level Λ system: |a⟩ excited, |b⟩ and |c⟩ ground sublevels
//! coupled to |a⟩ by the σ₋ and σ₊ components of a single laser.
//!
//! Everything here is written in the frame rotating at the laser frequency,
//! with the interaction `H = Ω₋|a⟩⟨b| + Ω₊|a⟩⟨c| + h.c.` (ħ = 1). Coherences
//! are the slowly varying envelopes, so `rho_ab` below is the quantity that
//! drives the σ₋ field and `rho_ca` (together with its conjugate `rho_ac`)
//! the σ₊ field.
//!
//! Three routes to the steady state are provided:
//!
//! * [`closed_form`]: the saturation-coefficient solution for equal field
//!   magnitudes, including the population formulas of the two linear
//!   population balance equations;
//! * [`steady`]: direct elimination for arbitrary complex Ω₋, Ω₊ (used by the
//!   propagation code, where the two modes drift apart);
//! * [`liouville`]: brute-force time integration of the full density matrix,
//!   kept as an independent oracle.

pub mod approx;
pub mod closed_form;
pub mod liouville;
pub mod steady;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use approx::{approximate_solution, ApproxSolution, RegimeCheck};
pub use closed_form::{
    complex_linewidths, saturation_coefficients, steady_state_closed_form,
    steady_state_coherences, steady_state_populations, ComplexLinewidths, SaturationCoefficients,
};
pub use liouville::{liouville_oracle, DensityMatrix, LiouvilleRhs, OracleOptions, OracleOutcome};
pub use steady::solve_steady_state;

/// Default absolute threshold below which a denominator is treated as zero.
pub const DEFAULT_DEGENERACY_EPS: f64 = 1e-300;

/// Relaxation rates and transition frequencies of the Λ atom.
///
/// `gamma_a` is the total population decay rate of |a⟩; the decay is split
/// equally between |b⟩ and |c⟩, so each ground sublevel is repopulated at
/// `gamma_a / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaAtomParams {
    pub gamma_ab: f64,
    pub gamma_ca: f64,
    pub gamma_cb: f64,
    pub gamma_a: f64,
    pub omega_ab: f64,
    pub omega_ac: f64,
}

impl LambdaAtomParams {
    /// Symmetric Λ atom with optical coherence decay `gamma`, radiatively
    /// limited population decay `2 * gamma`, and both transitions centred on
    /// `line_center` at zero field.
    pub fn symmetric(gamma: f64, gamma_cb: f64, line_center: f64) -> Self {
        Self {
            gamma_ab: gamma,
            gamma_ca: gamma,
            gamma_cb,
            gamma_a: 2.0 * gamma,
            omega_ab: line_center,
            omega_ac: line_center,
        }
    }

    /// Place the two transitions symmetrically around `line_center` with a
    /// ground-state splitting `omega_cb = ω_c − ω_b`.
    pub fn with_splitting(mut self, line_center: f64, omega_cb: f64) -> Self {
        self.omega_ab = line_center + 0.5 * omega_cb;
        self.omega_ac = line_center - 0.5 * omega_cb;
        self
    }

    /// Ground-state splitting ω_cb = ω_ab − ω_ac.
    pub fn omega_cb(&self) -> f64 {
        self.omega_ab - self.omega_ac
    }

    /// Rate at which each ground sublevel is repopulated from |a⟩.
    pub fn branch_rate(&self) -> f64 {
        0.5 * self.gamma_a
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [self.gamma_ab, self.gamma_ca, self.gamma_cb, self.gamma_a];
        if rates.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::InvalidParams("relaxation rates must be finite and non-negative"));
        }
        if !self.omega_ab.is_finite() || !self.omega_ac.is_finite() {
            return Err(Error::InvalidParams("transition frequencies must be finite"));
        }
        // small slack for parameter sets built as gamma_a = 2 * gamma
        let radiative = 0.5 * self.gamma_a * (1.0 - 1e-12);
        if self.gamma_ab < radiative || self.gamma_ca < radiative {
            return Err(Error::InvalidParams(
                "optical coherence decay must be at least half the population decay",
            ));
        }
        Ok(())
    }

    /// True when the ground coherence is not much slower than the optical
    /// ones; valid but outside the regime where EIT is narrow.
    pub fn has_fast_ground_decoherence(&self) -> bool {
        self.gamma_cb > 0.1 * self.gamma_ab.min(self.gamma_ca)
    }
}

/// Laser frequency relative to the atomic transitions.
///
/// Both circular components come from one laser, so a single frequency `nu`
/// serves as ν₋ = ν₊. All detunings are derived on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetuningSet {
    pub nu: f64,
    omega_ab: f64,
    omega_ac: f64,
}

impl DetuningSet {
    pub fn new(params: &LambdaAtomParams, nu: f64) -> Self {
        Self { nu, omega_ab: params.omega_ab, omega_ac: params.omega_ac }
    }

    pub fn nu_minus(&self) -> f64 {
        self.nu
    }

    pub fn nu_plus(&self) -> f64 {
        self.nu
    }

    pub fn omega_cb(&self) -> f64 {
        self.omega_ab - self.omega_ac
    }

    /// Detuning of the σ₋ transition, ω_ab − ν₋.
    pub fn minus_detuning(&self) -> f64 {
        self.omega_ab - self.nu
    }

    /// Detuning of the σ₊ transition, ω_ac − ν₊.
    pub fn plus_detuning(&self) -> f64 {
        self.omega_ac - self.nu
    }

    /// Symmetrized one-photon detuning δ = ω_ab − ν₋ − ω_cb/2.
    pub fn delta(&self) -> f64 {
        self.minus_detuning() - 0.5 * self.omega_cb()
    }

    /// Two-photon (Raman) detuning ω_cb − ν₋ + ν₊; the Δ of the
    /// perturbative formulas.
    pub fn raman_detuning(&self) -> f64 {
        self.omega_cb() - self.nu_minus() + self.nu_plus()
    }
}

/// Complex Rabi frequencies of the σ₋ (a–b) and σ₊ (a–c) components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldAmplitudes {
    pub omega_minus: Complex64,
    pub omega_plus: Complex64,
}

impl FieldAmplitudes {
    pub fn new(omega_minus: Complex64, omega_plus: Complex64) -> Self {
        Self { omega_minus, omega_plus }
    }

    /// Linearly polarized input: equal real amplitudes in both modes.
    pub fn equal(omega: f64) -> Self {
        Self::new(Complex64::new(omega, 0.0), Complex64::new(omega, 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.omega_minus.is_finite() && self.omega_plus.is_finite()
    }

    pub fn max_norm(&self) -> f64 {
        self.omega_minus.norm().max(self.omega_plus.norm())
    }
}

/// Populations, population differences and coherences of the steady state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateSolution {
    pub n_a: f64,
    pub n_b: f64,
    pub n_c: f64,
    pub n_ab: f64,
    pub n_ca: f64,
    pub n_cb: f64,
    pub rho_ab: Complex64,
    pub rho_ca: Complex64,
    pub rho_cb: Complex64,
}

impl SteadyStateSolution {
    pub(crate) fn from_populations(n_a: f64, n_b: f64, n_c: f64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self {
            n_a,
            n_b,
            n_c,
            n_ab: n_a - n_b,
            n_ca: n_c - n_a,
            n_cb: n_c - n_b,
            rho_ab: zero,
            rho_ca: zero,
            rho_cb: zero,
        }
    }

    pub fn rho_ba(&self) -> Complex64 {
        self.rho_ab.conj()
    }

    pub fn rho_ac(&self) -> Complex64 {
        self.rho_ca.conj()
    }

    pub fn rho_bc(&self) -> Complex64 {
        self.rho_cb.conj()
    }

    pub fn trace(&self) -> f64 {
        self.n_a + self.n_b + self.n_c
    }

    /// Full density matrix in the (a, b, c) basis.
    pub fn density_matrix(&self) -> DensityMatrix {
        let r = |x: f64| Complex64::new(x, 0.0);
        DensityMatrix([
            [r(self.n_a), self.rho_ab, self.rho_ac()],
            [self.rho_ba(), r(self.n_b), self.rho_bc()],
            [self.rho_ca, self.rho_cb, r(self.n_c)],
        ])
    }

    /// Read populations and coherences off a density matrix.
    pub fn from_density_matrix(rho: &DensityMatrix) -> Self {
        let m = &rho.0;
        let mut sol = Self::from_populations(m[0][0].re, m[1][1].re, m[2][2].re);
        sol.rho_ab = m[0][1];
        sol.rho_ca = m[2][0];
        sol.rho_cb = m[2][1];
        sol
    }
}
