//! Steady state for arbitrary complex Ω₋, Ω₊.
//!
//! The coherence equations are linear in the two population differences, so
//! ρ_ab, ρ_ca and ρ_cb are eliminated in terms of (n_ab, n_ca) and the
//! remaining 3×3 real system (two balance equations plus normalization) is
//! solved directly. For equal real fields this reproduces the
//! saturation-coefficient solution.

use num_complex::Complex64;

use super::{DetuningSet, FieldAmplitudes, LambdaAtomParams, SteadyStateSolution, DEFAULT_DEGENERACY_EPS};
use crate::atom::closed_form::complex_linewidths;
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

struct Coherences {
    ab: Complex64,
    ca: Complex64,
    cb: Complex64,
}

struct Elimination {
    om: Complex64,
    op: Complex64,
    gamma_ab: Complex64,
    gamma_ca: Complex64,
    ground_denominator: Complex64,
}

impl Elimination {
    fn coherences(&self, n_ab: f64, n_ca: f64) -> Coherences {
        // ρ_ab = a1 + a2 ρ_cb, ρ_ca = c1 + c2 ρ_cb
        let a1 = I * n_ab * self.om / self.gamma_ab;
        let a2 = -I * self.op / self.gamma_ab;
        let c1 = I * n_ca * self.op.conj() / self.gamma_ca;
        let c2 = I * self.om.conj() / self.gamma_ca;
        let cb = (I * self.om * c1 - I * self.op.conj() * a1) / self.ground_denominator;
        Coherences { ab: a1 + a2 * cb, ca: c1 + c2 * cb, cb }
    }

    /// Field-induced transfer rates into |b⟩ and |c⟩.
    fn rates(&self, n_ab: f64, n_ca: f64) -> (f64, f64) {
        let c = self.coherences(n_ab, n_ca);
        let into_b = 2.0 * (self.om.conj() * c.ab).im;
        let into_c = -2.0 * (self.op * c.ca).im;
        (into_b, into_c)
    }
}

/// Solve the steady state of the rotating-frame density matrix for any
/// complex field amplitudes.
pub fn solve_steady_state(
    params: &LambdaAtomParams,
    det: &DetuningSet,
    fields: &FieldAmplitudes,
) -> Result<SteadyStateSolution> {
    solve_steady_state_eps(params, det, fields, DEFAULT_DEGENERACY_EPS)
}

pub fn solve_steady_state_eps(
    params: &LambdaAtomParams,
    det: &DetuningSet,
    fields: &FieldAmplitudes,
    eps: f64,
) -> Result<SteadyStateSolution> {
    let lw = complex_linewidths(params, det);
    let (om, op) = (fields.omega_minus, fields.omega_plus);
    if om.norm() == 0.0 && op.norm() == 0.0 {
        // undriven: any ground-state mixture is stationary; take the
        // equal-weight one
        return Ok(SteadyStateSolution::from_populations(0.0, 0.5, 0.5));
    }
    for (g, ctx) in [(lw.gamma_ab, "Γ_ab"), (lw.gamma_ca, "Γ_ca")] {
        if g.norm() <= eps {
            return Err(Error::DegenerateDenominator { context: ctx, magnitude: g.norm() });
        }
    }
    let ground_denominator = lw.gamma_cb + om.norm_sqr() / lw.gamma_ca + op.norm_sqr() / lw.gamma_ab;
    if ground_denominator.norm() <= eps {
        return Err(Error::DegenerateDenominator {
            context: "ground coherence",
            magnitude: ground_denominator.norm(),
        });
    }
    let elim = Elimination { om, op, gamma_ab: lw.gamma_ab, gamma_ca: lw.gamma_ca, ground_denominator };

    // rates are linear in (n_ab, n_ca)
    let (pb1, pc1) = elim.rates(1.0, 0.0);
    let (pb2, pc2) = elim.rates(0.0, 1.0);
    let g = params.branch_rate();

    // unknowns (n_a, n_b, n_c); n_ab = n_a − n_b, n_ca = n_c − n_a
    let m = [
        [g + pb1 - pb2, -pb1, pb2],
        [g + pc1 - pc2, -pc1, pc2],
        [1.0, 1.0, 1.0],
    ];
    let [n_a, n_b, n_c] = solve3(m, [0.0, 0.0, 1.0], eps)?;

    let mut sol = SteadyStateSolution::from_populations(n_a, n_b, n_c);
    let c = elim.coherences(sol.n_ab, sol.n_ca);
    sol.rho_ab = c.ab;
    sol.rho_ca = c.ca;
    sol.rho_cb = c.cb;
    Ok(sol)
}

/// Gaussian elimination with partial pivoting.
fn solve3(mut m: [[f64; 3]; 3], mut rhs: [f64; 3], eps: f64) -> Result<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap_or(col);
        if m[pivot][col].abs() <= eps {
            return Err(Error::DegenerateDenominator {
                context: "population system",
                magnitude: m[pivot][col].abs(),
            });
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = rhs[row];
        for k in row + 1..3 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::steady_state_closed_form;

    fn setup(gamma_cb: f64, omega_cb: f64, delta: f64) -> (LambdaAtomParams, DetuningSet) {
        let p = LambdaAtomParams::symmetric(1.0, gamma_cb, 0.0).with_splitting(0.0, omega_cb);
        (p, DetuningSet::new(&p, -delta))
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn agrees_with_closed_form_for_equal_fields() {
        for &(gcb, wcb, d, om) in &[
            (1e-3, 0.1, 0.05, 0.2),
            (0.01, 0.2, 0.1, 0.3),
            (1e-5, -0.3, 0.4, 0.9),
            (0.05, 0.0, -0.2, 0.05),
        ] {
            let (p, det) = setup(gcb, wcb, d);
            let f = FieldAmplitudes::equal(om);
            let a = solve_steady_state(&p, &det, &f).unwrap();
            let b = steady_state_closed_form(&p, &det, &f).unwrap();
            assert!((a.n_a - b.n_a).abs() < 1e-12, "{a:?} {b:?}");
            assert!((a.n_b - b.n_b).abs() < 1e-12);
            assert!((a.n_c - b.n_c).abs() < 1e-12);
            assert!(close(a.rho_ab, b.rho_ab, 1e-10));
            assert!(close(a.rho_ca, b.rho_ca, 1e-10));
            assert!(close(a.rho_cb, b.rho_cb, 1e-10));
        }
    }

    #[test]
    fn field_phases_are_a_gauge() {
        let (p, det) = setup(1e-3, 0.2, 0.1);
        let f0 = FieldAmplitudes::equal(0.3);
        let f1 = FieldAmplitudes::new(Complex64::from_polar(0.3, 0.7), Complex64::from_polar(0.3, -1.1));
        let a = solve_steady_state(&p, &det, &f0).unwrap();
        let b = solve_steady_state(&p, &det, &f1).unwrap();
        assert!((a.n_cb - b.n_cb).abs() < 1e-13);
        assert!(close(b.rho_ab, a.rho_ab * Complex64::from_polar(1.0, 0.7), 1e-12));
        assert!(close(b.rho_ca, a.rho_ca * Complex64::from_polar(1.0, 1.1), 1e-12));
        let c = steady_state_closed_form(&p, &det, &f1).unwrap();
        assert!(close(b.rho_ab, c.rho_ab, 1e-10));
        assert!(close(b.rho_ca, c.rho_ca, 1e-10));
        assert!(close(b.rho_cb, c.rho_cb, 1e-10));
    }

    #[test]
    fn single_mode_pumps_into_other_ground_state() {
        let (p, det) = setup(0.0, 0.0, 0.0);
        let f = FieldAmplitudes::new(Complex64::new(0.3, 0.0), Complex64::new(0.0, 0.0));
        let s = solve_steady_state(&p, &det, &f).unwrap();
        // σ₋ alone empties |b⟩ into |c⟩
        assert!((s.n_c - 1.0).abs() < 1e-12);
        assert!(s.rho_ab.norm() < 1e-12);
    }

    #[test]
    fn undriven_state() {
        let (p, det) = setup(1e-3, 0.0, 0.0);
        let s = solve_steady_state(&p, &det, &FieldAmplitudes::equal(0.0)).unwrap();
        assert_eq!((s.n_a, s.n_b, s.n_c), (0.0, 0.5, 0.5));
    }
}
