use std::f64::consts::PI;

use nmor_core::atom::{
    complex_linewidths, saturation_coefficients, solve_steady_state, steady_state_closed_form, DetuningSet,
    FieldAmplitudes, LambdaAtomParams,
};
use nmor_core::correlation::{
    analytic_correlation, correlation_at_shift, cross_correlation, delta_channels, CorrelationVariant, FieldTracePair,
    FluctuationMoments,
};
use nmor_core::noise::{generate_frequency_trace, NoiseParams};
use nmor_core::polarimetry::{detection_channels, intensities, rotation_angle, rotation_from_fields, IntensityPair};
use nmor_core::propagation::{photon_flux, propagate, propagate_profile, CellParams, MediumResponse};
use nmor_core::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

fn atom(gamma_cb: f64, omega_cb: f64, gamma_a: f64) -> LambdaAtomParams {
    LambdaAtomParams { gamma_a, ..LambdaAtomParams::symmetric(1.0, gamma_cb, 0.0) }.with_splitting(0.0, omega_cb)
}

/// A, B, C evaluated term by term from Γ = γ + iω_cb/2, Γ_cb, Γ_bc = Γ_cb*.
fn coefficients_by_hand(gamma: f64, gamma_cb: f64, omega_cb: f64, omega: f64, delta: f64) -> (f64, f64, f64) {
    let g = Complex64::new(gamma, 0.5 * omega_cb);
    let g_cb = Complex64::new(gamma_cb, omega_cb);
    let g_bc = g_cb.conj();
    let om2 = omega * omega;
    let gt = g_cb * (delta * delta + g * g) + 2.0 * g * om2;
    let gtc = gt.conj();
    let a = (g_cb * g / gt + g_bc * g.conj() / gtc) * om2;
    let b = -Complex64::i() * (g_cb / gt - g_bc / gtc) * om2;
    let c = (1.0 / gt + 1.0 / gtc) * om2 * om2;
    for z in [a, b, c] {
        assert!(z.im.abs() <= 1e-15 * z.norm().max(1e-300));
    }
    (a.re, b.re, c.re)
}

#[test]
fn saturation_coefficients_match_direct_evaluation() {
    // γ = 1, γ_cb = 0.01, Ω = 0.3, δ = 0.1, ω_cb = 0.2
    let p = atom(0.01, 0.2, 2.0);
    let det = DetuningSet::new(&p, -0.1);
    assert!((det.delta() - 0.1).abs() < 1e-15);
    let k = saturation_coefficients(&complex_linewidths(&p, &det), &FieldAmplitudes::equal(0.3), &det).unwrap();
    let (a, b, c) = coefficients_by_hand(1.0, 0.01, 0.2, 0.3, 0.1);
    assert!((k.a - a).abs() < 1e-14 * a.abs());
    assert!((k.b_coef - b).abs() < 1e-14 * b.abs());
    assert!((k.c - c).abs() < 1e-14 * c.abs());
}

#[test]
fn gaussian_second_moment_of_linearized_channel() {
    let (i0, sigma, phi, n) = (5.0, 1.0, PI / 6.0, 1_000_000);
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    let mut draw = || sigma * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
    let (ip, im): (Vec<f64>, Vec<f64>) = (0..n).map(|_| (draw(), draw())).unzip();
    let m = FluctuationMoments::from_intensities(&ip, &im).unwrap();
    let d1: Vec<f64> = ip
        .iter()
        .zip(&im)
        .map(|(&p, &q)| delta_channels(p + q, p - q, m.var_s, i0, phi).0)
        .collect();
    let second = d1.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let m = FluctuationMoments { i0, ..m };
    let s = phi.sin();
    let expected = m.var_x * (1.0 + s) * (1.0 + s) + m.s_variance_term() * s * s;
    // fourth moments of Gaussians: relative standard error near 2/sqrt(n)
    assert!((second - expected).abs() < 5.0 * 2.0 / (n as f64).sqrt() * expected, "{second} {expected}");
}

#[test]
fn ou_moments_at_one_million_samples() {
    let p = NoiseParams { linewidth: 2.0, correlation_time: 1.0, seed: 11, dt: 0.1, n_samples: 1_000_000 };
    let t = generate_frequency_trace(&p).unwrap();
    let n = t.len() as f64;
    let var = p.stationary_variance();
    let mean = t.values.iter().sum::<f64>() / n;
    let sample_var = t.values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    // correlated samples: effective count n·dt/(2τ)
    let n_eff = n * p.dt / (2.0 * p.correlation_time);
    assert!(mean.abs() < 5.0 * (var / n_eff).sqrt(), "mean {mean}");
    assert!((sample_var - var).abs() < 5.0 * var * (2.0 / n_eff).sqrt(), "var {sample_var}");
}

#[test]
fn ou_autocorrelation_decays_exponentially() {
    let p = NoiseParams { linewidth: 2.0, correlation_time: 1.0, seed: 12, dt: 0.1, n_samples: 2_000_000 };
    let t = generate_frequency_trace(&p).unwrap();
    let var = p.stationary_variance();
    for lag in [0usize, 5, 10, 20, 30] {
        let tau = lag as f64 * p.dt;
        let m = t.len() - lag;
        let c = (0..m).map(|k| t.values[k] * t.values[k + lag]).sum::<f64>() / m as f64;
        let expected = var * (-tau / p.correlation_time).exp();
        assert!((c - expected).abs() < 0.05 * var, "lag {tau}: {c} vs {expected}");
    }
}

#[test]
fn halving_dt_keeps_single_time_statistics() {
    let base = NoiseParams { linewidth: 2.0, correlation_time: 1.0, seed: 21, dt: 0.1, n_samples: 400_000 };
    let fine = NoiseParams { dt: 0.05, n_samples: 800_000, seed: 22, ..base };
    let var = |p: &NoiseParams| {
        let t = generate_frequency_trace(p).unwrap();
        t.values.iter().map(|x| x * x).sum::<f64>() / t.len() as f64
    };
    let (a, b) = (var(&base), var(&fine));
    assert!((a - b).abs() < 0.05 * base.stationary_variance(), "{a} {b}");
}

#[test]
fn weak_single_field_decays_exponentially() {
    let p = atom(1e-3, 0.0, 2.0);
    let det = DetuningSet::new(&p, 0.0);
    let od = 3.0;
    let cell = CellParams { response: MediumResponse::Linear, ..CellParams::from_optical_depth(1.0, od, 1.0) };
    let f = FieldAmplitudes::new(Complex64::new(1e-4, 0.0), Complex64::new(0.0, 0.0));
    let r = propagate_profile(&f, &p, &det, &cell, 300).unwrap();
    let n = r.snapshots.len() - 1;
    for (k, s) in r.snapshots.iter().enumerate() {
        let z = k as f64 / n as f64;
        let log_i = (s.omega_minus.norm_sqr() / f.omega_minus.norm_sqr()).ln();
        assert!((log_i + od * z).abs() <= 0.01 * od.max(1e-300) * z.max(1e-3), "z {z}: {log_i}");
    }
}

#[test]
fn rotation_is_half_the_differential_phase_on_dark_resonance() {
    for omega_cb in [0.05, 0.2, -0.3] {
        let p = atom(0.0, omega_cb, 2.0);
        let det = DetuningSet::new(&p, 0.0);
        assert_eq!(det.delta(), 0.0);
        let f = FieldAmplitudes::equal(0.3);
        let out = propagate(&f, &p, &det, &CellParams::from_optical_depth(1.0, 0.5, 1.0)).unwrap().fields();
        let turn = (out.omega_plus * out.omega_minus.conj()).arg();
        let phi = rotation_from_fields(&f, &out, 0.0).unwrap();
        assert!((2.0 * phi - turn).abs() < 1e-12);
        let (i1, i2) = detection_channels(&intensities(&f, &out, 0.0).unwrap());
        assert!((rotation_angle(i1, i2).unwrap() - phi).abs() < 1e-9);
    }
}

fn fields_strategy() -> impl Strategy<Value = FieldAmplitudes> {
    (0.01f64..1.0, 0.01f64..1.0, -PI..PI)
        .prop_map(|(m, p, th)| FieldAmplitudes::new(Complex64::new(m, 0.0), Complex64::from_polar(p, th)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn closed_form_populations_are_normalized(
        omega in 0.001f64..3.0,
        log_gcb in -6.0f64..0.0,
        nu in -3.0f64..3.0,
        omega_cb in -2.0f64..2.0,
        gamma_a in 0.1f64..2.0,
    ) {
        let p = atom(10f64.powf(log_gcb), omega_cb, gamma_a);
        let s = steady_state_closed_form(&p, &DetuningSet::new(&p, nu), &FieldAmplitudes::equal(omega)).unwrap();
        prop_assert!((s.trace() - 1.0).abs() <= 1e-12);
        let n_bc = -s.n_cb;
        prop_assert!((s.n_ab + n_bc + s.n_ca).abs() <= 1e-15);
        for n in [s.n_a, s.n_b, s.n_c] {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&n));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn coefficient_identities(
        omega in 0.001f64..3.0,
        gamma_cb in 0.0f64..0.5,
        nu in -3.0f64..3.0,
        omega_cb in -2.0f64..2.0,
    ) {
        let p = atom(gamma_cb, omega_cb, 2.0);
        let det = DetuningSet::new(&p, nu);
        let k = saturation_coefficients(&complex_linewidths(&p, &det), &FieldAmplitudes::equal(omega), &det).unwrap();
        let (_, _, c) = coefficients_by_hand(1.0, gamma_cb, omega_cb, omega, det.delta());
        prop_assert!((k.c - c).abs() <= 1e-12 * c.abs().max(1e-300));
        // away from ω_cb = 0, Re Γ̃ and hence C can turn negative in weak fields
        let p0 = atom(gamma_cb, 0.0, 2.0);
        let d0 = DetuningSet::new(&p0, nu);
        let k0 = saturation_coefficients(&complex_linewidths(&p0, &d0), &FieldAmplitudes::equal(omega), &d0).unwrap();
        prop_assert!(k0.c >= 0.0);
        prop_assert!((k.a_b + k.a_c - 2.0 * k.a).abs() <= 1e-15 * k.a.abs().max(1e-300) * 4.0);
    }

    #[test]
    fn relabeling_ground_states_swaps_the_transitions(
        f in fields_strategy(),
        gamma_cb in 1e-4f64..0.1,
        nu in -1.0f64..1.0,
        omega_cb in -0.5f64..0.5,
    ) {
        let p = atom(gamma_cb, omega_cb, 2.0);
        let q = atom(gamma_cb, -omega_cb, 2.0);
        let s = solve_steady_state(&p, &DetuningSet::new(&p, nu), &f).unwrap();
        let swapped = FieldAmplitudes::new(f.omega_plus, f.omega_minus);
        let t = solve_steady_state(&q, &DetuningSet::new(&q, nu), &swapped).unwrap();
        prop_assert!((t.rho_ab - s.rho_ac()).norm() <= 1e-12);
        prop_assert!((t.rho_ac() - s.rho_ab).norm() <= 1e-12);
        prop_assert!((t.n_cb + s.n_cb).abs() <= 1e-12);
    }

    #[test]
    fn reversing_all_detunings_conjugates(
        f in fields_strategy(),
        gamma_cb in 1e-4f64..0.1,
        nu in -1.0f64..1.0,
        omega_cb in -0.5f64..0.5,
    ) {
        let p = atom(gamma_cb, omega_cb, 2.0);
        let q = atom(gamma_cb, -omega_cb, 2.0);
        let s = solve_steady_state(&p, &DetuningSet::new(&p, nu), &f).unwrap();
        let conj = FieldAmplitudes::new(f.omega_minus.conj(), f.omega_plus.conj());
        let t = solve_steady_state(&q, &DetuningSet::new(&q, -nu), &conj).unwrap();
        prop_assert!((t.rho_ab + s.rho_ab.conj()).norm() <= 1e-12);
        prop_assert!((t.rho_ca + s.rho_ca.conj()).norm() <= 1e-12);
        prop_assert!((t.n_cb - s.n_cb).abs() <= 1e-12);
    }

    #[test]
    fn photon_flux_never_grows(
        omega in 0.05f64..1.0,
        nu in -1.5f64..1.5,
        omega_cb in -0.5f64..0.5,
        od in 0.0f64..20.0,
    ) {
        let p = atom(1e-3, omega_cb, 2.0);
        let cell = CellParams { n_slabs: 32, ..CellParams::from_optical_depth(1.0, od, 1.0) };
        let f = FieldAmplitudes::equal(omega);
        let r = propagate(&f, &p, &DetuningSet::new(&p, nu), &cell).unwrap();
        prop_assert!(photon_flux(&r.fields(), &cell) <= photon_flux(&f, &cell) * (1.0 + 1e-9));
    }

    #[test]
    fn detection_round_trip_and_conservation(
        i in 1e-6f64..1e6,
        j in 0.0f64..1e6,
        phi in -1.5707f64..1.5707,
    ) {
        let (a, b) = detection_channels(&IntensityPair { i_plus: i, i_minus: i, phi });
        prop_assert!((rotation_angle(a, b).unwrap() - phi).abs() <= 1e-12 * (1.0 + 1.0 / phi.cos().powi(2)).max(1.0));
        let (c, d) = detection_channels(&IntensityPair { i_plus: i, i_minus: j, phi });
        prop_assert!((c + d - (i + j)).abs() <= 1e-14 * (i + j));
        prop_assert!(c >= -1e-9 * (i + j) && d >= -1e-9 * (i + j));
    }

    #[test]
    fn rotation_is_antisymmetric(s1 in 0.0f64..10.0, s2 in 0.0f64..10.0) {
        prop_assume!(s1 + s2 > 0.0);
        prop_assert_eq!(rotation_angle(s1, s2).unwrap(), -rotation_angle(s2, s1).unwrap());
    }
}

fn trace_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (50usize..200).prop_flat_map(|n| {
        (prop::collection::vec(-1.0f64..1.0, n), prop::collection::vec(-1.0f64..1.0, n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn correlation_is_bounded_and_symmetric((a, b) in trace_strategy(), window in 2usize..40) {
        let pair = FieldTracePair::new(0.0, 1e-9, a, b).unwrap();
        let w = window as f64 * 1e-9;
        let fwd = cross_correlation(&pair, -10e-9, 10e-9, w).unwrap();
        let rev = cross_correlation(&pair.swapped(), -10e-9, 10e-9, w).unwrap();
        let n = fwd.values.len();
        for k in 0..n {
            prop_assert!(fwd.values[k].abs() <= 1.0 + 1e-9);
            prop_assert!((fwd.values[k] - rev.values[n - 1 - k]).abs() <= 1e-12);
        }
    }

    #[test]
    fn correlation_is_scale_invariant((a, b) in trace_strategy(), c in 0.01f64..100.0) {
        let g = correlation_at_shift(&a, &b, 0).unwrap();
        let scaled: Vec<f64> = b.iter().map(|v| v * c).collect();
        let flipped: Vec<f64> = b.iter().map(|v| -v * c).collect();
        prop_assert!((correlation_at_shift(&a, &scaled, 0).unwrap() - g).abs() <= 1e-12);
        prop_assert!((correlation_at_shift(&a, &flipped, 0).unwrap() + g).abs() <= 1e-12);
    }

    #[test]
    fn closed_form_is_bounded(
        var_x in 0.0f64..10.0,
        var_s in 0.0f64..10.0,
        excess in 0.0f64..10.0,
        i0 in 0.1f64..10.0,
        phi in -1.5f64..1.5,
    ) {
        let m = FluctuationMoments { i0, var_x, var_s, fourth_s: var_s * var_s + excess };
        prop_assume!(var_x > 0.0 || excess > 0.0);
        for v in [CorrelationVariant::Paper, CorrelationVariant::Derived] {
            prop_assert!(analytic_correlation(&m, phi, v).unwrap().abs() <= 1.0);
            prop_assert_eq!(analytic_correlation(&m, 0.0, v).unwrap(), 1.0);
        }
    }
}
