//! Simulation drivers: field sweeps, single time traces and analysis of
//! recorded traces.
//!
//! One realization is one laser-noise record pushed through the cell and the
//! polarimeter. Realization r of every sweep point uses seed `seed + r`, so
//! all fields see the same noise records and sweep curves are smooth in B.

use std::f64::consts::PI;
use std::path::Path;

use nmor_core::atom::{DetuningSet, FieldAmplitudes};
use nmor_core::correlation::{
    analytic_correlation, correlation_at_shift, cross_correlation, extract_fluctuations, CorrelationFunction,
    FieldTracePair, FluctuationMoments,
};
use nmor_core::noise::{generate_frequency_trace, FrequencyTrace};
use nmor_core::polarimetry::{detection_channels, intensities, rotation_angle, transmission, DetectionRecord, IntensityPair};
use nmor_core::propagation::{propagate, MaxwellBloch};
use nmor_core::units::{rad_s_to_mhz, zeeman_splitting};
use rayon::prelude::*;

use crate::config::{Detection, ExperimentConfig, Response};
use crate::io::read_trace_csv;
use crate::HarnessError;

type CoreResult<T> = nmor_core::Result<T>;

/// Circular-component intensities and rotation of one recorded realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub noise: FrequencyTrace,
    pub i_plus: Vec<f64>,
    pub i_minus: Vec<f64>,
    pub phi: Vec<f64>,
}

/// Push one noise record through the cell. Warmup samples are simulated but
/// not kept.
pub fn simulate(cfg: &ExperimentConfig, b_gauss: f64, seed: u64) -> CoreResult<Realization> {
    let atom = cfg.atom_params(b_gauss);
    let input = cfg.input_fields();
    let carrier = cfg.carrier();
    let offset = cfg.model.rotation_offset_rad;
    let full = generate_frequency_trace(&cfg.noise_params(seed))?;
    let warm = cfg.trace.warmup_samples();
    let n = full.len() - warm;
    let mut rec = Realization {
        noise: FrequencyTrace { t0: 0.0, dt: full.dt, values: full.values[warm..].to_vec() },
        i_plus: Vec::with_capacity(n),
        i_minus: Vec::with_capacity(n),
        phi: Vec::with_capacity(n),
    };
    let mut keep = |out: &FieldAmplitudes| -> CoreResult<()> {
        let p = intensities(&input, out, offset)?;
        rec.i_plus.push(p.i_plus);
        rec.i_minus.push(p.i_minus);
        rec.phi.push(p.phi);
        Ok(())
    };
    match cfg.model.response {
        Response::TimeDomain => {
            let mut mb = MaxwellBloch::new(&atom, &cfg.time_domain_cell(), &input, carrier + full.values[0])?;
            for (k, &dnu) in full.values.iter().enumerate() {
                let out = mb.step(&input, carrier + dnu, full.dt)?;
                if k >= warm {
                    keep(&out)?;
                }
            }
        }
        Response::QuasiStatic => {
            let cell = cfg.cell_params();
            for &dnu in &full.values[warm..] {
                let det = DetuningSet::new(&atom, carrier + dnu);
                keep(&propagate(&input, &atom, &det, &cell)?.fields())?;
            }
        }
    }
    Ok(rec)
}

/// Mean polarization direction of a rotation record (angles mod π).
pub fn mean_rotation(phi: &[f64]) -> f64 {
    let (s, c) = phi.iter().fold((0.0, 0.0), |(s, c), p| (s + (2.0 * p).sin(), c + (2.0 * p).cos()));
    0.5 * s.atan2(c)
}

/// Detector signals of a realization, and the analyzer angle used.
pub fn detect(cfg: &ExperimentConfig, r: &Realization) -> (Vec<f64>, Vec<f64>, f64) {
    let phi_bar = mean_rotation(&r.phi);
    let (s1, s2) = r
        .i_plus
        .iter()
        .zip(&r.i_minus)
        .zip(&r.phi)
        .map(|((&i_plus, &i_minus), &phi)| {
            let phi = match cfg.model.detection {
                Detection::MeanRotation => phi_bar,
                Detection::Instantaneous => phi,
            };
            detection_channels(&IntensityPair { i_plus, i_minus, phi })
        })
        .unzip();
    (s1, s2, phi_bar)
}

/// Reference level of each detector without resonant absorption.
fn reference_level(cfg: &ExperimentConfig) -> f64 {
    cfg.rabi() * cfg.rabi()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Time-averaged transmission and rotation from the detector signals.
fn averaged_observables(s1: &[f64], s2: &[f64], s0: f64) -> CoreResult<(f64, f64)> {
    let rec = DetectionRecord { s1: mean(s1), s2: mean(s2), s01: s0, s02: s0 };
    Ok((transmission(&rec)?, rotation_angle(rec.s1, rec.s2)?))
}

/// Relative peak-to-peak spread below which a simulated channel counts as
/// constant; integration round-off alone stays far below it.
pub const FLAT_TOLERANCE: f64 = 1e-10;

/// Channel number (1 or 2) of the first channel that does not fluctuate.
fn flat_channel(s1: &[f64], s2: &[f64]) -> Option<u8> {
    let flat = |v: &[f64]| {
        let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
        hi - lo <= FLAT_TOLERANCE * lo.abs().max(hi.abs())
    };
    if flat(s1) {
        Some(1)
    } else if flat(s2) {
        Some(2)
    } else {
        None
    }
}

/// G²(0) of a detector pair; `None` when a channel does not fluctuate.
fn zero_delay_correlation(s1: &[f64], s2: &[f64], dt: f64, window: f64) -> CoreResult<Option<f64>> {
    if flat_channel(s1, s2).is_some() {
        return Ok(None);
    }
    let d1 = extract_fluctuations(s1, dt, window)?;
    let d2 = extract_fluctuations(s2, dt, window)?;
    match correlation_at_shift(&d1, &d2, 0) {
        Ok(g) => Ok(Some(g)),
        Err(nmor_core::Error::ZeroVariance(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealizationSummary {
    pub transmission: f64,
    pub phi: f64,
    pub g2_zero: Option<f64>,
    pub g2_closed_form: Option<f64>,
}

pub fn summarize(cfg: &ExperimentConfig, r: &Realization) -> CoreResult<RealizationSummary> {
    let (s1, s2, phi_bar) = detect(cfg, r);
    let (t, phi) = averaged_observables(&s1, &s2, reference_level(cfg))?;
    let g2_zero = zero_delay_correlation(&s1, &s2, cfg.trace.dt(), cfg.trace.window())?;
    let g2_closed_form = match flat_channel(&r.i_plus, &r.i_minus) {
        Some(_) => None,
        None => FluctuationMoments::from_intensities(&r.i_plus, &r.i_minus)
            .and_then(|m| analytic_correlation(&m, phi_bar, cfg.model.variant.into()))
            .ok(),
    };
    Ok(RealizationSummary { transmission: t, phi, g2_zero, g2_closed_form })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub b_gauss: f64,
    pub omega_cb_mhz: f64,
    pub transmission: f64,
    pub phi: f64,
    /// Mean over realizations with fluctuating detectors; NaN if none.
    pub g2_zero: f64,
    pub g2_zero_stderr: f64,
    pub g2_closed_form: f64,
}

fn mean_and_stderr(v: &[f64]) -> (f64, f64) {
    match v.len() {
        0 => (f64::NAN, f64::NAN),
        1 => (v[0], f64::NAN),
        n => {
            let m = mean(v);
            let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
            (m, (var / n as f64).sqrt())
        }
    }
}

fn aggregate(b_gauss: f64, runs: &[RealizationSummary]) -> SweepRow {
    let g2: Vec<f64> = runs.iter().filter_map(|r| r.g2_zero).collect();
    let closed: Vec<f64> = runs.iter().filter_map(|r| r.g2_closed_form).collect();
    let (g2_zero, g2_zero_stderr) = mean_and_stderr(&g2);
    SweepRow {
        b_gauss,
        omega_cb_mhz: rad_s_to_mhz(zeeman_splitting(b_gauss)),
        transmission: mean(&runs.iter().map(|r| r.transmission).collect::<Vec<_>>()),
        phi: mean(&runs.iter().map(|r| r.phi).collect::<Vec<_>>()),
        g2_zero,
        g2_zero_stderr,
        g2_closed_form: mean_and_stderr(&closed).0,
    }
}

/// Rows completed before the first failing field, and that failure.
#[derive(Debug)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub failure: Option<HarnessError>,
}

pub fn run_field_sweep(cfg: &ExperimentConfig) -> SweepOutcome {
    run_sweep_points(cfg, &cfg.sweep.fields())
}

/// Sweep over explicit field values. Realizations run in parallel; rows
/// come back in the order of `fields`.
pub fn run_sweep_points(cfg: &ExperimentConfig, fields: &[f64]) -> SweepOutcome {
    let seeds = cfg.seeds();
    let units: Vec<(usize, u64)> =
        (0..fields.len()).flat_map(|i| seeds.iter().map(move |&s| (i, s))).collect();
    let results: Vec<CoreResult<RealizationSummary>> = units
        .par_iter()
        .map(|&(i, seed)| simulate(cfg, fields[i], seed).and_then(|r| summarize(cfg, &r)))
        .collect();
    let mut rows = Vec::with_capacity(fields.len());
    for (&b, chunk) in fields.iter().zip(results.chunks(seeds.len())) {
        let mut runs = Vec::with_capacity(chunk.len());
        for r in chunk {
            match r {
                Ok(s) => runs.push(*s),
                Err(e) => {
                    return SweepOutcome {
                        rows,
                        failure: Some(HarnessError::AtField { b_gauss: b, source: e.clone() }),
                    }
                }
            }
        }
        rows.push(aggregate(b, &runs));
    }
    SweepOutcome { rows, failure: None }
}

/// One simulated detector record.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRun {
    pub b_gauss: f64,
    pub seed: u64,
    pub noise: FrequencyTrace,
    pub pair: FieldTracePair,
    pub transmission: f64,
    pub phi: f64,
}

pub fn run_time_trace(cfg: &ExperimentConfig, b_gauss: f64, seed: u64) -> Result<TraceRun, HarnessError> {
    let at = |source| HarnessError::AtField { b_gauss, source };
    let r = simulate(cfg, b_gauss, seed).map_err(at)?;
    let (s1, s2, _) = detect(cfg, &r);
    let (transmission, phi) = averaged_observables(&s1, &s2, reference_level(cfg)).map_err(at)?;
    let pair = FieldTracePair::new(0.0, r.noise.dt, s1, s2).map_err(at)?;
    Ok(TraceRun { b_gauss, seed, noise: r.noise, pair, transmission, phi })
}

/// G²(τ) of a trace over ±`trace.tau_max_ns`.
pub fn trace_correlation(cfg: &ExperimentConfig, run: &TraceRun) -> Result<CorrelationFunction, HarnessError> {
    let tau = cfg.trace.tau_max();
    if let Some(ch) = flat_channel(&run.pair.ch1, &run.pair.ch2) {
        return Err(HarnessError::AtField { b_gauss: run.b_gauss, source: nmor_core::Error::ZeroVariance(ch) });
    }
    cross_correlation(&run.pair, -tau, tau, cfg.trace.window())
        .map_err(|source| HarnessError::AtField { b_gauss: run.b_gauss, source })
}

/// Summary of a recorded two-channel trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalSummary {
    pub samples: usize,
    pub dt: f64,
    pub g2_zero: f64,
    /// (T, φ) when reference levels were supplied.
    pub transmission: Option<f64>,
    pub phi: Option<f64>,
}

/// Correlate a (t, S1, S2) CSV file. `references` are the detector levels
/// S01, S02 without resonant absorption.
pub fn analyze_external(
    path: &Path,
    window: f64,
    tau_range: (f64, f64),
    references: Option<(f64, f64)>,
) -> Result<(CorrelationFunction, ExternalSummary), HarnessError> {
    let pair = read_trace_csv(path)?;
    let cf = cross_correlation(&pair, tau_range.0, tau_range.1, window)?;
    let g2_zero = correlation_at_shift(
        &extract_fluctuations(&pair.ch1, pair.dt, window)?,
        &extract_fluctuations(&pair.ch2, pair.dt, window)?,
        0,
    )?;
    let (m1, m2) = (mean(&pair.ch1), mean(&pair.ch2));
    let (transmission, phi) = match references {
        Some((s01, s02)) => (
            Some(transmission(&DetectionRecord { s1: m1, s2: m2, s01, s02 })?),
            Some(rotation_angle(m1, m2)?),
        ),
        None => (None, None),
    };
    Ok((cf, ExternalSummary { samples: pair.len(), dt: pair.dt, g2_zero, transmission, phi }))
}

/// Noiseless transmission at each field with the medium in steady state.
pub fn transmission_profile(cfg: &ExperimentConfig, fields: &[f64]) -> Result<Vec<(f64, f64)>, HarnessError> {
    let input = cfg.input_fields();
    let cell = cfg.cell_params();
    fields
        .par_iter()
        .map(|&b| {
            let atom = cfg.atom_params(b);
            let det = DetuningSet::new(&atom, cfg.carrier());
            let out = propagate(&input, &atom, &det, &cell)
                .map_err(|source| HarnessError::AtField { b_gauss: b, source })?
                .fields();
            let total = out.omega_minus.norm_sqr() + out.omega_plus.norm_sqr();
            Ok((b, total / (2.0 * reference_level(cfg))))
        })
        .collect()
}

/// Full width at half height of the transmission peak above the lowest
/// point of the profile, by linear interpolation. `None` if either
/// half-height crossing lies outside the profile.
pub fn resonance_fwhm(profile: &[(f64, f64)]) -> Option<f64> {
    let (k, peak) = profile.iter().enumerate().max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))?;
    let floor = profile.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let half = 0.5 * (peak.1 + floor);
    if !(peak.1 > floor) {
        return None;
    }
    let crossing = |i: usize, j: usize| {
        let (a, b) = (profile[i], profile[j]);
        a.0 + (half - a.1) / (b.1 - a.1) * (b.0 - a.0)
    };
    let right = (k..profile.len() - 1).find(|&i| profile[i + 1].1 <= half).map(|i| crossing(i, i + 1))?;
    let left = (1..=k).rev().find(|&i| profile[i - 1].1 <= half).map(|i| crossing(i, i - 1))?;
    Some(right - left)
}

/// Angle between two linear polarizations, in [0, π/2].
pub fn polarization_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}
