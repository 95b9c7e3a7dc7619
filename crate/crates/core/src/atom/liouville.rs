//! Time integration of the full 3×3 density matrix.
//!
//! The rotating-frame Liouville equation
//!
//! ```text
//! dρ/dt = −i[H, ρ] − relaxation(ρ)
//! ```
//!
//! is integrated with the classic fourth-order Runge–Kutta scheme. The
//! relaxation is trace preserving: |a⟩ decays at `gamma_a` and each ground
//! sublevel is refilled at `gamma_a / 2`; the three coherences decay at
//! their own rates.
//!
//! The equation is linear with constant coefficients, so one RK4 step is the
//! fixed 9×9 matrix polynomial `P = Σ_{k≤4} (hL)^k / k!`. Long runs use
//! `P^n` by repeated squaring; the result is the same as `n` explicit steps
//! up to rounding, which makes steady-state runs over 10⁹ relaxation times
//! cheap.

use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use super::{DetuningSet, FieldAmplitudes, LambdaAtomParams, SteadyStateSolution};
use crate::error::{Error, Result};
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use crate::math::Float;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Density matrix in the (a, b, c) basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(pub [[Complex64; 3]; 3]);

impl DensityMatrix {
    pub fn zero() -> Self {
        Self([[ZERO; 3]; 3])
    }

    /// Populations on the diagonal, no coherences.
    pub fn diagonal(n_a: f64, n_b: f64, n_c: f64) -> Self {
        let mut m = Self::zero();
        m.0[0][0] = Complex64::new(n_a, 0.0);
        m.0[1][1] = Complex64::new(n_b, 0.0);
        m.0[2][2] = Complex64::new(n_c, 0.0);
        m
    }

    /// Equal ground-state populations.
    pub fn thermal_ground() -> Self {
        Self::diagonal(0.0, 0.5, 0.5)
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    /// max |ρ_ij − ρ_ji*|.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.0[i][j] - self.0[j][i].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m: f64, z| m.max(z.norm()))
    }

    fn to_vec(self) -> [Complex64; 9] {
        let mut v = [ZERO; 9];
        for i in 0..3 {
            for j in 0..3 {
                v[3 * i + j] = self.0[i][j];
            }
        }
        v
    }

    fn from_vec(v: &[Complex64; 9]) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = v[3 * i + j];
            }
        }
        m
    }
}

impl Add for DensityMatrix {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] += rhs.0[i][j];
            }
        }
        self
    }
}

impl Sub for DensityMatrix {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] -= rhs.0[i][j];
            }
        }
        self
    }
}

impl Mul<f64> for DensityMatrix {
    type Output = Self;
    fn mul(mut self, k: f64) -> Self {
        for row in self.0.iter_mut() {
            for z in row.iter_mut() {
                *z *= k;
            }
        }
        self
    }
}

/// Right-hand side of the Liouville equation at fixed parameters.
#[derive(Debug, Clone, Copy)]
pub struct LiouvilleRhs {
    h: [[Complex64; 3]; 3],
    gamma_a: f64,
    gamma_ab: f64,
    gamma_ca: f64,
    gamma_cb: f64,
}

impl LiouvilleRhs {
    pub fn new(params: &LambdaAtomParams, det: &DetuningSet, fields: &FieldAmplitudes) -> Self {
        let mut h = [[ZERO; 3]; 3];
        h[1][1] = Complex64::new(-det.minus_detuning(), 0.0);
        h[2][2] = Complex64::new(-det.plus_detuning(), 0.0);
        h[0][1] = fields.omega_minus;
        h[0][2] = fields.omega_plus;
        h[1][0] = fields.omega_minus.conj();
        h[2][0] = fields.omega_plus.conj();
        Self {
            h,
            gamma_a: params.gamma_a,
            gamma_ab: params.gamma_ab,
            gamma_ca: params.gamma_ca,
            gamma_cb: params.gamma_cb,
        }
    }

    pub fn eval(&self, rho: &DensityMatrix) -> DensityMatrix {
        let r = &rho.0;
        let h = &self.h;
        let mut d = [[ZERO; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut comm = ZERO;
                for k in 0..3 {
                    comm += h[i][k] * r[k][j] - r[i][k] * h[k][j];
                }
                d[i][j] = -I * comm;
            }
        }
        let decay = self.gamma_a * r[0][0];
        d[0][0] -= decay;
        d[1][1] += 0.5 * decay;
        d[2][2] += 0.5 * decay;
        for (i, j, g) in [(0, 1, self.gamma_ab), (0, 2, self.gamma_ca), (1, 2, self.gamma_cb)] {
            d[i][j] -= g * r[i][j];
            d[j][i] -= g * r[j][i];
        }
        DensityMatrix(d)
    }

    /// One classic RK4 step.
    pub fn rk4_step(&self, rho: &DensityMatrix, dt: f64) -> DensityMatrix {
        let k1 = self.eval(rho);
        let k2 = self.eval(&(*rho + k1 * (0.5 * dt)));
        let k3 = self.eval(&(*rho + k2 * (0.5 * dt)));
        let k4 = self.eval(&(*rho + k3 * dt));
        *rho + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
    }

    fn matrix(&self) -> Mat9 {
        let mut m = Mat9::zero();
        for col in 0..9 {
            let mut e = [ZERO; 9];
            e[col] = ONE;
            let out = self.eval(&DensityMatrix::from_vec(&e)).to_vec();
            for row in 0..9 {
                m.0[row][col] = out[row];
            }
        }
        m
    }
}

#[derive(Clone, Copy)]
struct Mat9([[Complex64; 9]; 9]);

impl Mat9 {
    fn zero() -> Self {
        Self([[ZERO; 9]; 9])
    }

    fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..9 {
            m.0[i][i] = ONE;
        }
        m
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for i in 0..9 {
            for k in 0..9 {
                let a = self.0[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..9 {
                    out.0[i][j] += a * other.0[k][j];
                }
            }
        }
        out
    }

    fn apply(&self, v: &[Complex64; 9]) -> [Complex64; 9] {
        let mut out = [ZERO; 9];
        for i in 0..9 {
            out[i] = (0..9).map(|k| self.0[i][k] * v[k]).sum();
        }
        out
    }

    fn scaled_plus_identity(&self, k: f64) -> Self {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for z in row.iter_mut() {
                *z *= k;
            }
        }
        for i in 0..9 {
            out.0[i][i] += ONE;
        }
        out
    }

    /// Rank-one correction so that the trace functional stays an exact left
    /// eigenvector. Without it the rounding error of the unit eigenvalue
    /// doubles with every squaring.
    fn restore_trace_preservation(&mut self) {
        const DIAG: [usize; 3] = [0, 4, 8];
        for j in 0..9 {
            let col_trace: Complex64 = DIAG.iter().map(|&d| self.0[d][j]).sum();
            let target = if DIAG.contains(&j) { ONE } else { ZERO };
            let fix = (target - col_trace) / 3.0;
            for &d in &DIAG {
                self.0[d][j] += fix;
            }
        }
    }

    /// RK4 propagator I + hL + (hL)²/2 + (hL)³/6 + (hL)⁴/24, by Horner.
    fn rk4_propagator(l: &Self, dt: f64) -> Self {
        let mut acc = Self::identity();
        for k in [4.0, 3.0, 2.0, 1.0] {
            acc = l.mul(&acc).scaled_plus_identity(dt / k);
        }
        acc
    }
}

/// `n` RK4 steps applied to `v` by binary powering of the one-step matrix.
fn propagate_steps(step: &Mat9, mut n: u64, v: [Complex64; 9]) -> [Complex64; 9] {
    let mut base = *step;
    let mut v = v;
    while n > 0 {
        if n & 1 == 1 {
            v = base.apply(&v);
        }
        n >>= 1;
        if n > 0 {
            base = base.mul(&base);
            base.restore_trace_preservation();
        }
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub t_end: f64,
    /// Initial step; `None` picks half the inverse of the fastest rate.
    pub dt: Option<f64>,
    /// Bound on max |dρ/dt| at `t_end`, relative to the fastest rate.
    pub derivative_tol: f64,
    /// Largest allowed change of the final state when the step is halved.
    pub doubling_tol: f64,
    pub max_halvings: u32,
    pub initial: DensityMatrix,
}

impl OracleOptions {
    pub fn new(t_end: f64) -> Self {
        Self {
            t_end,
            dt: None,
            derivative_tol: 1e-11,
            doubling_tol: 1e-8,
            max_halvings: 12,
            initial: DensityMatrix::thermal_ground(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOutcome {
    pub solution: SteadyStateSolution,
    pub rho: DensityMatrix,
    pub dt: f64,
    pub steps: u64,
    /// max |dρ/dt| at the end, absolute.
    pub derivative_norm: f64,
    /// Change of the final state between the accepted step and twice it.
    pub doubling_change: f64,
}

/// Fastest rate in the problem, used to pick steps and scale tolerances.
pub fn rate_scale(params: &LambdaAtomParams, det: &DetuningSet, fields: &FieldAmplitudes) -> f64 {
    [
        params.gamma_a,
        params.gamma_ab,
        params.gamma_ca,
        params.gamma_cb,
        fields.omega_minus.norm(),
        fields.omega_plus.norm(),
        det.minus_detuning().abs(),
        det.plus_detuning().abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Integrate from `opts.initial` to `opts.t_end` and return the final state.
///
/// The step is halved until halving it once more changes the final state by
/// less than `doubling_tol`; the run fails with `NotConverged` if the time
/// derivative at `t_end` is still above tolerance.
pub fn liouville_oracle(
    params: &LambdaAtomParams,
    det: &DetuningSet,
    fields: &FieldAmplitudes,
    opts: &OracleOptions,
) -> Result<OracleOutcome> {
    if !(opts.t_end > 0.0) || !opts.t_end.is_finite() {
        return Err(Error::InvalidParams("t_end must be positive and finite"));
    }
    let rhs = LiouvilleRhs::new(params, det, fields);
    let scale = rate_scale(params, det, fields).max(f64::MIN_POSITIVE);
    let l = rhs.matrix();
    let v0 = opts.initial.to_vec();

    let mut dt = opts.dt.unwrap_or(0.5 / scale).min(opts.t_end);
    let run = |dt: f64| {
        let n = (opts.t_end / dt).ceil().max(1.0) as u64;
        let h = opts.t_end / n as f64;
        let p = Mat9::rk4_propagator(&l, h);
        (propagate_steps(&p, n, v0), h, n)
    };
    let (mut coarse, _, _) = run(dt);
    for _ in 0..=opts.max_halvings {
        let (fine, h, n) = run(0.5 * dt);
        let change = coarse.iter().zip(fine.iter()).fold(0.0, |m: f64, (a, b)| m.max((a - b).norm()));
        if change < opts.doubling_tol {
            let rho = DensityMatrix::from_vec(&fine);
            let derivative_norm = rhs.eval(&rho).max_abs();
            if derivative_norm > opts.derivative_tol * scale {
                return Err(Error::NotConverged {
                    reason: "time derivative above tolerance at t_end",
                    residual: derivative_norm / scale,
                });
            }
            return Ok(OracleOutcome {
                solution: SteadyStateSolution::from_density_matrix(&rho),
                rho,
                dt: h,
                steps: n,
                derivative_norm,
                doubling_change: change,
            });
        }
        coarse = fine;
        dt *= 0.5;
    }
    Err(Error::NotConverged { reason: "step doubling did not settle", residual: f64::NAN })
}

/// Explicit RK4 trajectory; `observe` sees the state after every step.
pub fn evolve<F>(
    params: &LambdaAtomParams,
    det: &DetuningSet,
    fields: &FieldAmplitudes,
    initial: DensityMatrix,
    dt: f64,
    steps: usize,
    mut observe: F,
) -> DensityMatrix
where
    F: FnMut(f64, &DensityMatrix),
{
    let rhs = LiouvilleRhs::new(params, det, fields);
    let mut rho = initial;
    for k in 0..steps {
        rho = rhs.rk4_step(&rho, dt);
        observe((k + 1) as f64 * dt, &rho);
    }
    rho
}
