//! Laser frequency noise.
//!
//! The instantaneous frequency deviation δν(t) is an Ornstein–Uhlenbeck
//! process with relaxation time `correlation_time` and stationary variance
//! `linewidth / (2 correlation_time)`; for correlation times short against
//! the observation, the integrated phase then diffuses with the requested
//! FWHM linewidth. Samples use the exact discretization
//!
//! ```text
//! x[k+1] = x[k] e^{-dt/τ} + σ sqrt(1 − e^{-2dt/τ}) ξ[k]
//! ```
//!
//! and the first sample is drawn from the stationary law.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use crate::math::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    /// FWHM linewidth in rad/s. Zero gives a noiseless laser.
    pub linewidth: f64,
    /// Frequency-noise correlation time in s.
    pub correlation_time: f64,
    pub seed: u64,
    /// Sample interval in s.
    pub dt: f64,
    pub n_samples: usize,
}

impl NoiseParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.linewidth >= 0.0) || !self.linewidth.is_finite() {
            return Err(Error::InvalidParams("linewidth must be finite and non-negative"));
        }
        if !(self.correlation_time > 0.0) || !self.correlation_time.is_finite() {
            return Err(Error::InvalidParams("correlation time must be positive"));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParams("sample interval must be positive"));
        }
        if self.dt >= self.correlation_time / 5.0 {
            return Err(Error::InvalidParams("sample interval must be below a fifth of the correlation time"));
        }
        Ok(())
    }

    /// σ² = linewidth / (2 τ).
    pub fn stationary_variance(&self) -> f64 {
        self.linewidth / (2.0 * self.correlation_time)
    }
}

/// Uniformly sampled frequency deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTrace {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl FrequencyTrace {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }
}

/// OU generator owning its RNG; each call to [`next`](Self::next) advances
/// the process by one sample interval.
#[derive(Debug, Clone)]
pub struct OuGenerator {
    rng: ChaCha12Rng,
    decay: f64,
    kick: f64,
    state: f64,
}

impl OuGenerator {
    pub fn new(p: &NoiseParams) -> Result<Self> {
        p.validate()?;
        let sigma = p.stationary_variance().sqrt();
        let decay = (-p.dt / p.correlation_time).exp();
        let kick = sigma * (-(-2.0 * p.dt / p.correlation_time).exp_m1()).sqrt();
        let mut rng = ChaCha12Rng::seed_from_u64(p.seed);
        let z: f64 = StandardNormal.sample(&mut rng);
        Ok(Self { rng, decay, kick, state: sigma * z })
    }

    pub fn current(&self) -> f64 {
        self.state
    }

    pub fn next(&mut self) -> f64 {
        let out = self.state;
        let z: f64 = StandardNormal.sample(&mut self.rng);
        self.state = self.state * self.decay + self.kick * z;
        out
    }
}

pub fn generate_frequency_trace(p: &NoiseParams) -> Result<FrequencyTrace> {
    let mut gen = OuGenerator::new(p)?;
    let values = (0..p.n_samples).map(|_| gen.next()).collect();
    Ok(FrequencyTrace { t0: 0.0, dt: p.dt, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, seed: u64) -> NoiseParams {
        NoiseParams { linewidth: 2.0, correlation_time: 1.0, seed, dt: 0.05, n_samples: n }
    }

    fn mean_var(x: &[f64]) -> (f64, f64) {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        (m, x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n)
    }

    #[test]
    fn noiseless_laser() {
        let p = NoiseParams { linewidth: 0.0, ..params(100, 1) };
        assert!(generate_frequency_trace(&p).unwrap().values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(generate_frequency_trace(&NoiseParams { dt: 0.5, ..params(10, 1) }).is_err());
        assert!(generate_frequency_trace(&NoiseParams { linewidth: -1.0, ..params(10, 1) }).is_err());
        assert!(generate_frequency_trace(&NoiseParams { correlation_time: 0.0, ..params(10, 1) }).is_err());
    }

    #[test]
    fn same_seed_same_trace() {
        let a = generate_frequency_trace(&params(1000, 42)).unwrap();
        let b = generate_frequency_trace(&params(1000, 42)).unwrap();
        let c = generate_frequency_trace(&params(1000, 43)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn halves_are_stationary() {
        let t = generate_frequency_trace(&params(400_000, 7)).unwrap();
        let (m1, v1) = mean_var(&t.values[..200_000]);
        let (m2, v2) = mean_var(&t.values[200_000..]);
        // 10⁴ correlation times per half: standard error about 1% of σ²
        assert!((m1 - m2).abs() < 0.1, "{m1} {m2}");
        assert!((v1 - v2).abs() < 0.1 * v1, "{v1} {v2}");
    }
}
