//! Propagation of the two circular components through the vapor cell.
//!
//! ```text
//! dΩ₋/dz = −i η_b ρ_ab,   dΩ₊/dz = −i η_c ρ_ac
//! ```
//!
//! with the atomic coherences taken from the steady state at the local
//! fields (quasi-static medium). Integration is classic RK4 in z.
//!
//! [`MaxwellBloch`] is the time-domain alternative: each slab carries its own
//! density matrix, which is stepped in time under the local fields instead of
//! being replaced by its steady state.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::atom::{
    solve_steady_state, DensityMatrix, DetuningSet, FieldAmplitudes, LambdaAtomParams, LiouvilleRhs,
};
use crate::error::{Error, Result};
use crate::units::{EPSILON_0, HBAR, SPEED_OF_LIGHT};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Refinement stops once doubling the slab count changes the output by less
/// than this (relative).
pub const SLAB_TOLERANCE: f64 = 1e-8;
const MAX_SLABS: usize = 1 << 16;
const DIVERGENCE_FACTOR: f64 = 10.0;

/// How the medium responds to the local fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MediumResponse {
    /// Full Λ-system steady state.
    #[default]
    Steady,
    /// Ground populations pinned at 1/2 each and no ground coherence: each
    /// transition absorbs as an independent two-level line.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellParams {
    /// m
    pub length: f64,
    /// m⁻³
    pub density: f64,
    /// rad/(s·m) per unit Rabi frequency.
    pub eta_b: f64,
    pub eta_c: f64,
    pub n_slabs: usize,
    /// Single slab, single stage: the medium responds to the input fields
    /// only.
    pub thin_medium: bool,
    pub response: MediumResponse,
}

impl CellParams {
    /// η = ν N ℘² / (2 ħ ε₀ c) with the same dipole moment on both legs.
    pub fn from_density(length: f64, density: f64, dipole: f64, nu: f64) -> Self {
        let eta = nu * density * dipole * dipole / (2.0 * HBAR * EPSILON_0 * SPEED_OF_LIGHT);
        Self::with_eta(length, density, eta)
    }

    /// Coupling that gives a weak single field on an unpumped (n_b = 1/2)
    /// transition the intensity attenuation `exp(−od)` at line center.
    pub fn from_optical_depth(length: f64, od: f64, gamma_ab: f64) -> Self {
        Self::with_eta(length, f64::NAN, od * gamma_ab / length)
    }

    fn with_eta(length: f64, density: f64, eta: f64) -> Self {
        Self {
            length,
            density,
            eta_b: eta,
            eta_c: eta,
            n_slabs: 64,
            thin_medium: false,
            response: MediumResponse::Steady,
        }
    }

    pub fn optical_depth(&self, gamma_ab: f64) -> f64 {
        self.eta_b * self.length / gamma_ab
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(Error::InvalidParams("cell length must be positive"));
        }
        if self.density < 0.0 {
            return Err(Error::InvalidParams("density must be non-negative"));
        }
        if !(self.eta_b >= 0.0 && self.eta_c >= 0.0) || !(self.eta_b + self.eta_c).is_finite() {
            return Err(Error::InvalidParams("coupling constants must be finite and non-negative"));
        }
        if self.n_slabs == 0 {
            return Err(Error::InvalidParams("need at least one slab"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult {
    pub omega_minus_out: Complex64,
    pub omega_plus_out: Complex64,
    pub n_slabs: usize,
    /// Fields at the slab boundaries, input first; empty unless requested.
    pub snapshots: Vec<FieldAmplitudes>,
}

impl PropagationResult {
    pub fn fields(&self) -> FieldAmplitudes {
        FieldAmplitudes::new(self.omega_minus_out, self.omega_plus_out)
    }
}

/// Photon flux up to a common factor, |Ω₋|²/η_b + |Ω₊|²/η_c; legs with zero
/// coupling are counted with unit weight.
pub fn photon_flux(fields: &FieldAmplitudes, cell: &CellParams) -> f64 {
    let w = |eta: f64| if eta > 0.0 { 1.0 / eta } else { 1.0 };
    fields.omega_minus.norm_sqr() * w(cell.eta_b) + fields.omega_plus.norm_sqr() * w(cell.eta_c)
}

struct Medium<'a> {
    atom: &'a LambdaAtomParams,
    det: &'a DetuningSet,
    cell: &'a CellParams,
}

impl Medium<'_> {
    fn derivative(&self, f: &FieldAmplitudes) -> Result<[Complex64; 2]> {
        let (rho_ab, rho_ac) = match self.cell.response {
            MediumResponse::Steady => {
                let s = solve_steady_state(self.atom, self.det, f)?;
                (s.rho_ab, s.rho_ca.conj())
            }
            MediumResponse::Linear => {
                let lw = crate::atom::complex_linewidths(self.atom, self.det);
                (-I * 0.5 * f.omega_minus / lw.gamma_ab, -I * 0.5 * f.omega_plus / lw.gamma_ca.conj())
            }
        };
        Ok([-I * self.cell.eta_b * rho_ab, -I * self.cell.eta_c * rho_ac])
    }

    fn rk4(&self, y: FieldAmplitudes, h: f64) -> Result<FieldAmplitudes> {
        let shift = |d: &[Complex64; 2], s: f64| {
            FieldAmplitudes::new(y.omega_minus + d[0] * s, y.omega_plus + d[1] * s)
        };
        let k1 = self.derivative(&y)?;
        let k2 = self.derivative(&shift(&k1, 0.5 * h))?;
        let k3 = self.derivative(&shift(&k2, 0.5 * h))?;
        let k4 = self.derivative(&shift(&k3, h))?;
        let step = |i: usize| (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
        Ok(FieldAmplitudes::new(y.omega_minus + step(0), y.omega_plus + step(1)))
    }

    fn run(&self, input: &FieldAmplitudes, n: usize, keep: bool) -> Result<PropagationResult> {
        let limit = DIVERGENCE_FACTOR * input.max_norm();
        let h = self.cell.length / n as f64;
        let mut y = *input;
        let mut snapshots = Vec::new();
        if keep {
            snapshots.reserve(n + 1);
            snapshots.push(y);
        }
        for _ in 0..n {
            y = self.rk4(y, h)?;
            let grown = y.max_norm();
            if !(grown <= limit) {
                return Err(Error::SolverDiverged { ratio: grown / input.max_norm() });
            }
            if keep {
                snapshots.push(y);
            }
        }
        Ok(PropagationResult { omega_minus_out: y.omega_minus, omega_plus_out: y.omega_plus, n_slabs: n, snapshots })
    }
}

fn relative_change(a: &PropagationResult, b: &PropagationResult, scale: f64) -> f64 {
    let d = (a.omega_minus_out - b.omega_minus_out).norm().max((a.omega_plus_out - b.omega_plus_out).norm());
    d / scale
}

/// Propagate with automatic slab refinement: the slab count starts at
/// `cell.n_slabs` and doubles until the output moves by less than
/// [`SLAB_TOLERANCE`] relative to the input amplitude. The finer of the last
/// two runs is returned.
pub fn propagate(
    fields_in: &FieldAmplitudes,
    atom: &LambdaAtomParams,
    det: &DetuningSet,
    cell: &CellParams,
) -> Result<PropagationResult> {
    cell.validate()?;
    if !fields_in.is_finite() {
        return Err(Error::InvalidParams("input fields must be finite"));
    }
    let medium = Medium { atom, det, cell };
    let scale = fields_in.max_norm();
    if cell.thin_medium || scale == 0.0 || (cell.eta_b == 0.0 && cell.eta_c == 0.0) {
        return propagate_with_slabs(fields_in, atom, det, cell, 1);
    }
    let mut n = cell.n_slabs;
    let mut coarse = medium.run(fields_in, n, false)?;
    loop {
        let fine = medium.run(fields_in, 2 * n, false)?;
        if relative_change(&coarse, &fine, scale) < SLAB_TOLERANCE || 2 * n >= MAX_SLABS {
            if relative_change(&coarse, &fine, scale) >= SLAB_TOLERANCE {
                return Err(Error::NotConverged {
                    reason: "slab refinement",
                    residual: relative_change(&coarse, &fine, scale),
                });
            }
            return Ok(fine);
        }
        n *= 2;
        coarse = fine;
    }
}

/// Propagate with a fixed slab count and no refinement check.
pub fn propagate_with_slabs(
    fields_in: &FieldAmplitudes,
    atom: &LambdaAtomParams,
    det: &DetuningSet,
    cell: &CellParams,
    n_slabs: usize,
) -> Result<PropagationResult> {
    cell.validate()?;
    if n_slabs == 0 {
        return Err(Error::InvalidParams("need at least one slab"));
    }
    let medium = Medium { atom, det, cell };
    if cell.thin_medium {
        // first-order response to the input fields
        let d = medium.derivative(fields_in)?;
        let out = FieldAmplitudes::new(
            fields_in.omega_minus + d[0] * cell.length,
            fields_in.omega_plus + d[1] * cell.length,
        );
        return Ok(PropagationResult {
            omega_minus_out: out.omega_minus,
            omega_plus_out: out.omega_plus,
            n_slabs: 1,
            snapshots: Vec::new(),
        });
    }
    medium.run(fields_in, n_slabs, false)
}

/// As [`propagate_with_slabs`], also returning the fields at every slab
/// boundary.
pub fn propagate_profile(
    fields_in: &FieldAmplitudes,
    atom: &LambdaAtomParams,
    det: &DetuningSet,
    cell: &CellParams,
    n_slabs: usize,
) -> Result<PropagationResult> {
    cell.validate()?;
    Medium { atom, det, cell }.run(fields_in, n_slabs.max(1), true)
}

fn slab_exit(f: &FieldAmplitudes, rho: &DensityMatrix, cell: &CellParams, h: f64) -> FieldAmplitudes {
    FieldAmplitudes::new(
        f.omega_minus - I * cell.eta_b * h * rho.0[0][1],
        f.omega_plus - I * cell.eta_c * h * rho.0[0][2],
    )
}

const CENTER_ITERATIONS: usize = 100;

/// Time-domain Maxwell–Bloch cell without retardation. Each slab's density
/// matrix is advanced by RK4 in time under the field at the slab center,
/// which is taken halfway between the entering and leaving fields (second
/// order in the slab size).
#[derive(Debug, Clone)]
pub struct MaxwellBloch {
    atom: LambdaAtomParams,
    cell: CellParams,
    slabs: Vec<DensityMatrix>,
    output: FieldAmplitudes,
}

impl MaxwellBloch {
    /// Start from the steady state at the given laser frequency.
    pub fn new(atom: &LambdaAtomParams, cell: &CellParams, input: &FieldAmplitudes, nu: f64) -> Result<Self> {
        cell.validate()?;
        let n = if cell.thin_medium { 1 } else { cell.n_slabs };
        let det = DetuningSet::new(atom, nu);
        let h = cell.length / n as f64;
        let mut slabs = Vec::with_capacity(n);
        let mut f = *input;
        for _ in 0..n {
            // the slab state must be stationary under its own center field
            let mut rho = solve_steady_state(atom, &det, &f)?.density_matrix();
            for _ in 0..CENTER_ITERATIONS {
                let center = slab_exit(&f, &rho, cell, 0.5 * h);
                let next = solve_steady_state(atom, &det, &center)?.density_matrix();
                let change = (next - rho).max_abs();
                rho = next;
                if change < 1e-14 {
                    break;
                }
            }
            f = slab_exit(&f, &rho, cell, h);
            slabs.push(rho);
        }
        Ok(Self { atom: *atom, cell: *cell, slabs, output: f })
    }

    pub fn output(&self) -> FieldAmplitudes {
        self.output
    }

    pub fn n_slabs(&self) -> usize {
        self.slabs.len()
    }

    /// Advance by `dt` at laser frequency `nu`; returns the output fields.
    pub fn step(&mut self, input: &FieldAmplitudes, nu: f64, dt: f64) -> Result<FieldAmplitudes> {
        let det = DetuningSet::new(&self.atom, nu);
        let h = self.cell.length / self.slabs.len() as f64;
        let mut f = *input;
        for rho in self.slabs.iter_mut() {
            let center = slab_exit(&f, rho, &self.cell, 0.5 * h);
            let next_f = slab_exit(&f, rho, &self.cell, h);
            *rho = LiouvilleRhs::new(&self.atom, &det, &center).rk4_step(rho, dt);
            f = next_f;
        }
        if !f.is_finite() || f.max_norm() > DIVERGENCE_FACTOR * input.max_norm() {
            return Err(Error::SolverDiverged { ratio: f.max_norm() / input.max_norm() });
        }
        let h = self.cell.length / self.slabs.len() as f64;
        self.output = self.slabs.iter().fold(*input, |f, rho| slab_exit(&f, rho, &self.cell, h));
        Ok(self.output)
    }
}
