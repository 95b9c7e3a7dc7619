use nmor_core::atom::{
    liouville_oracle, solve_steady_state, steady_state_closed_form, DetuningSet, FieldAmplitudes,
    LambdaAtomParams, OracleOptions, SteadyStateSolution,
};
use nmor_core::Complex64;
use proptest::prelude::*;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-9)
}

fn zclose(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1e-9)
}

fn assert_match(cf: &SteadyStateSolution, or: &SteadyStateSolution, tol: f64) {
    for (x, y, name) in [(cf.n_a, or.n_a, "n_a"), (cf.n_b, or.n_b, "n_b"), (cf.n_c, or.n_c, "n_c")] {
        assert!(rel_close(x, y, tol), "{name}: {x:e} vs oracle {y:e}");
    }
    for (x, y, name) in [(cf.rho_ab, or.rho_ab, "rho_ab"), (cf.rho_ca, or.rho_ca, "rho_ca"), (cf.rho_cb, or.rho_cb, "rho_cb")] {
        assert!(zclose(x, y, tol), "{name}: {x} vs oracle {y}");
    }
}

/// γ = 1, γ_a = 1, γ_cb = 1e-3, Ω = 0.2, δ = 0.05, two-photon detuning 0.1.
#[test]
fn closed_form_matches_time_integration() {
    let p = LambdaAtomParams { gamma_a: 1.0, ..LambdaAtomParams::symmetric(1.0, 1e-3, 0.0) }.with_splitting(0.0, 0.1);
    let det = DetuningSet::new(&p, -0.05);
    assert!((det.delta() - 0.05).abs() < 1e-15);
    assert!((det.raman_detuning() - 0.1).abs() < 1e-15);
    let f = FieldAmplitudes::equal(0.2);
    let cf = steady_state_closed_form(&p, &det, &f).unwrap();
    let or = liouville_oracle(&p, &det, &f, &OracleOptions::new(1e9)).unwrap();
    assert_match(&cf, &or.solution, 1e-6);
    assert!(cf.n_cb != 0.0);
}

#[test]
fn general_solver_matches_time_integration_for_unequal_fields() {
    let p = LambdaAtomParams::symmetric(1.0, 2e-3, 0.0).with_splitting(0.0, -0.07);
    let det = DetuningSet::new(&p, 0.3);
    let f = FieldAmplitudes::new(Complex64::new(0.25, 0.1), Complex64::from_polar(0.12, 2.0));
    let gs = solve_steady_state(&p, &det, &f).unwrap();
    let or = liouville_oracle(&p, &det, &f, &OracleOptions::new(1e9)).unwrap();
    assert_match(&gs, &or.solution, 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closed_form_matches_oracle_random(
        omega in 0.01f64..1.0,
        log_gcb in -5.0f64..-1.0,
        delta in -1.0f64..1.0,
        omega_cb in -0.5f64..0.5,
        gamma_a_frac in 0.2f64..1.0,
    ) {
        let gamma_cb = 10f64.powf(log_gcb);
        let p = LambdaAtomParams { gamma_a: 2.0 * gamma_a_frac, ..LambdaAtomParams::symmetric(1.0, gamma_cb, 0.0) }
            .with_splitting(0.0, omega_cb);
        let det = DetuningSet::new(&p, -delta);
        let f = FieldAmplitudes::equal(omega);
        let cf = steady_state_closed_form(&p, &det, &f).unwrap();
        let or = liouville_oracle(&p, &det, &f, &OracleOptions::new(1e10)).unwrap();
        assert_match(&cf, &or.solution, 1e-6);
    }
}
