//! Fast self-check run by the `validate` subcommand: a handful of oracle
//! comparisons and identities on small random samples.

use std::f64::consts::PI;

use nmor_core::atom::{
    liouville_oracle, steady_state_closed_form, DetuningSet, FieldAmplitudes, LambdaAtomParams, OracleOptions,
};
use nmor_core::correlation::{correlate_fluctuations, correlation_at_shift, CorrelationFunction};
use nmor_core::noise::{generate_frequency_trace, NoiseParams};
use nmor_core::polarimetry::{detection_channels, rotation_angle, IntensityPair};
use nmor_core::propagation::{propagate, CellParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, worst: f64, tol: f64) -> Check {
    Check { name, passed: worst <= tol, detail: format!("worst {worst:.3e}, tolerance {tol:.0e}") }
}

fn random_atom(rng: &mut ChaCha8Rng) -> (LambdaAtomParams, DetuningSet, FieldAmplitudes) {
    let gamma_cb = 10f64.powf(rng.random_range(-5.0..-1.0));
    let p = LambdaAtomParams { gamma_a: rng.random_range(0.4..2.0), ..LambdaAtomParams::symmetric(1.0, gamma_cb, 0.0) }
        .with_splitting(0.0, rng.random_range(-0.5..0.5));
    let det = DetuningSet::new(&p, rng.random_range(-1.0..1.0));
    (p, det, FieldAmplitudes::equal(rng.random_range(0.02..1.0)))
}

fn normalization(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (p, det, f) = random_atom(rng);
        worst = match steady_state_closed_form(&p, &det, &f) {
            Ok(s) => worst.max((s.trace() - 1.0).abs()),
            Err(_) => f64::INFINITY,
        };
    }
    check("populations sum to one", worst, 1e-12)
}

fn oracle_agreement(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..4 {
        let (p, det, f) = random_atom(rng);
        let err = steady_state_closed_form(&p, &det, &f).ok().zip(liouville_oracle(&p, &det, &f, &OracleOptions::new(1e9)).ok());
        worst = worst.max(match err {
            Some((cf, or)) => {
                let or = or.solution;
                let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-9);
                [rel(cf.n_a, or.n_a), rel(cf.n_b, or.n_b), rel(cf.n_c, or.n_c)]
                    .into_iter()
                    .chain([(cf.rho_ab, or.rho_ab), (cf.rho_ca, or.rho_ca)].map(|(a, b)| (a - b).norm() / b.norm().max(1e-9)))
                    .fold(0.0, f64::max)
            }
            None => f64::INFINITY,
        });
    }
    check("closed form matches time integration", worst, 1e-6)
}

fn dark_state() -> Check {
    let p = LambdaAtomParams::symmetric(1.0, 0.0, 0.0);
    let det = DetuningSet::new(&p, 0.0);
    let f = FieldAmplitudes::equal(0.3);
    let worst = match (steady_state_closed_form(&p, &det, &f), propagate(&f, &p, &det, &CellParams::from_optical_depth(1.0, 20.0, 1.0))) {
        (Ok(s), Ok(r)) => {
            let t = (r.omega_minus_out.norm_sqr() + r.omega_plus_out.norm_sqr()) / (2.0 * 0.09);
            s.rho_ab.im.abs().max(s.rho_ca.im.abs()).max((t - 1.0).abs())
        }
        _ => f64::INFINITY,
    };
    check("dark state is transparent", worst, 1e-6)
}

fn estimator_identities(rng: &mut ChaCha8Rng) -> Check {
    let a: Vec<f64> = (0..500).map(|_| rng.random_range(-1.0..1.0)).collect();
    let neg: Vec<f64> = a.iter().map(|v| -v).collect();
    let same = correlation_at_shift(&a, &a, 0).unwrap_or(f64::NAN);
    let anti = correlation_at_shift(&a, &neg, 0).unwrap_or(f64::NAN);
    let shifted: Vec<f64> = (0..a.len()).map(|k| if k >= 5 { a[k - 5] } else { 0.0 }).collect();
    let peak = correlate_fluctuations(&a, &shifted, 1.0, -10.0, 10.0, f64::NAN)
        .ok()
        .and_then(|cf: CorrelationFunction| cf.peak())
        .map_or(f64::INFINITY, |(tau, _)| (tau - 5.0).abs());
    check("correlation identities", (same - 1.0).abs().max((anti + 1.0).abs()).max(peak), 1e-12)
}

fn detection_round_trip() -> Check {
    let worst = (1..40).fold(0.0f64, |w, k| {
        let phi = -PI / 2.0 + k as f64 * PI / 40.0;
        let (i1, i2) = detection_channels(&IntensityPair { i_plus: 0.7, i_minus: 0.7, phi });
        w.max(rotation_angle(i1, i2).map_or(f64::INFINITY, |p| (p - phi).abs()))
    });
    check("rotation survives detection", worst, 1e-12)
}

fn noise_variance() -> Check {
    let p = NoiseParams { linewidth: 2.0, correlation_time: 1.0, seed: 3, dt: 0.1, n_samples: 400_000 };
    let worst = generate_frequency_trace(&p).map_or(f64::INFINITY, |t| {
        let n = t.len() as f64;
        let m = t.values.iter().sum::<f64>() / n;
        let v = t.values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
        (v / p.stationary_variance() - 1.0).abs()
    });
    check("noise variance", worst, 0.05)
}

pub fn run_checks(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![
        normalization(&mut rng),
        oracle_agreement(&mut rng),
        dark_state(),
        estimator_identities(&mut rng),
        detection_round_trip(),
        noise_variance(),
    ]
}
