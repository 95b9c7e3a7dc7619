//! Run configuration.
//!
//! One TOML file, every section optional, unknown keys rejected. Frequencies
//! are ordinary frequencies in MHz (converted to rad/s here), fields in
//! gauss, lengths in cm, times in ns or μs as named.
//!
//! ```toml
//! [atom]
//! gamma_mhz = 3.0          # optical coherence decay γ_ab = γ_ca
//! gamma_a_mhz = 6.0        # total decay of the excited state
//! gamma_cb_mhz = 0.001     # ground coherence decay
//!
//! [laser]
//! rabi_mhz = 1.5           # or power_mw, converted with dipole_debye
//! linewidth_mhz = 1.0
//! carrier_detuning_mhz = 0.0
//!
//! [noise]
//! correlation_time_ns = 10.0
//! realizations = 32
//! seed = 1
//!
//! [cell]
//! length_cm = 7.5
//! optical_depth = 10.0     # or density_cm3
//!
//! [model]
//! response = "time-domain" # or "quasi-static"
//! detection = "mean-rotation"
//! variant = "derived"
//!
//! [sweep]
//! b_min_gauss = -1.0
//! b_max_gauss = 1.0
//! step_gauss = 0.05
//!
//! [trace]
//! duration_us = 10.0
//! dt_ns = 1.0
//! ```

use std::f64::consts::PI;
use std::path::Path;

use nmor_core::atom::{FieldAmplitudes, LambdaAtomParams};
use nmor_core::correlation::CorrelationVariant;
use nmor_core::noise::NoiseParams;
use nmor_core::propagation::CellParams;
use nmor_core::units::{mhz_to_rad_s, zeeman_splitting, DEBYE, EPSILON_0, HBAR, SPEED_OF_LIGHT};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

/// Rb D1 line, 795 nm.
pub const LINE_CENTER_THZ: f64 = 377.107;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub atom: AtomConfig,
    pub laser: LaserConfig,
    pub noise: NoiseConfig,
    pub cell: CellConfig,
    pub model: ModelConfig,
    pub sweep: SweepConfig,
    pub trace: TraceConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AtomConfig {
    pub gamma_mhz: f64,
    pub gamma_a_mhz: f64,
    pub gamma_cb_mhz: f64,
}

impl Default for AtomConfig {
    fn default() -> Self {
        Self { gamma_mhz: 3.0, gamma_a_mhz: 6.0, gamma_cb_mhz: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LaserConfig {
    /// Rabi frequency Ω/2π of each circular component.
    pub rabi_mhz: Option<f64>,
    /// Beam power; converted to a Rabi frequency when `rabi_mhz` is absent.
    pub power_mw: Option<f64>,
    pub beam_radius_mm: f64,
    /// Effective dipole moment for the power conversion and for `density_cm3`.
    pub dipole_debye: f64,
    pub linewidth_mhz: f64,
    pub carrier_detuning_mhz: f64,
}

impl Default for LaserConfig {
    fn default() -> Self {
        Self {
            rabi_mhz: None,
            power_mw: None,
            beam_radius_mm: 1.0,
            dipole_debye: 1.0,
            linewidth_mhz: 1.0,
            carrier_detuning_mhz: 0.0,
        }
    }
}

pub const DEFAULT_RABI_MHZ: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub correlation_time_ns: f64,
    pub realizations: usize,
    /// Realization r uses seed + r.
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { correlation_time_ns: 10.0, realizations: 32, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CellConfig {
    pub length_cm: f64,
    /// Weak-field intensity absorption exponent at line center.
    pub optical_depth: Option<f64>,
    /// Atom density; used with `laser.dipole_debye` when no optical depth is
    /// given.
    pub density_cm3: Option<f64>,
    /// Initial slab count of the quasi-static integrator (refined
    /// automatically).
    pub n_slabs: usize,
    /// Fixed slab count of the time-domain integrator.
    pub time_domain_slabs: usize,
    pub thin_medium: bool,
}

impl Default for CellConfig {
    fn default() -> Self {
        Self {
            length_cm: 7.5,
            optical_depth: None,
            density_cm3: None,
            n_slabs: 64,
            time_domain_slabs: 16,
            thin_medium: false,
        }
    }
}

pub const DEFAULT_OPTICAL_DEPTH: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Response {
    /// Density matrices stepped in time along the cell.
    #[default]
    TimeDomain,
    /// Medium in its steady state for every noise sample.
    QuasiStatic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Detection {
    /// Analyzer fixed at the mean rotation of the record.
    #[default]
    MeanRotation,
    /// Split with the instantaneous rotation of every sample.
    Instantaneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Paper,
    #[default]
    Derived,
}

impl From<Variant> for CorrelationVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Paper => CorrelationVariant::Paper,
            Variant::Derived => CorrelationVariant::Derived,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub response: Response,
    pub detection: Detection,
    pub variant: Variant,
    /// Background linear rotation added to every rotation angle.
    pub rotation_offset_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub b_min_gauss: f64,
    pub b_max_gauss: f64,
    pub step_gauss: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { b_min_gauss: -1.0, b_max_gauss: 1.0, step_gauss: 0.05 }
    }
}

impl SweepConfig {
    /// Grid points b_min + k·step up to b_max, snapped so that the end points
    /// survive rounding.
    pub fn fields(&self) -> Vec<f64> {
        let n = ((self.b_max_gauss - self.b_min_gauss) / self.step_gauss + 1e-9).floor() as usize;
        (0..=n).map(|k| self.b_min_gauss + k as f64 * self.step_gauss).map(|b| (b * 1e9).round() / 1e9).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TraceConfig {
    pub duration_us: f64,
    pub dt_ns: f64,
    /// Settling time simulated before recording starts.
    pub warmup_ns: f64,
    /// Averaging window for the fluctuation baseline.
    pub window_us: f64,
    pub tau_max_ns: f64,
    /// Field used by `trace` when none is given on the command line.
    pub field_gauss: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self { duration_us: 10.0, dt_ns: 1.0, warmup_ns: 200.0, window_us: 10.0, tau_max_ns: 200.0, field_gauss: 0.2 }
    }
}

impl TraceConfig {
    pub fn dt(&self) -> f64 {
        self.dt_ns * 1e-9
    }

    pub fn samples(&self) -> usize {
        (self.duration_us * 1e3 / self.dt_ns).round() as usize
    }

    pub fn warmup_samples(&self) -> usize {
        (self.warmup_ns / self.dt_ns).round() as usize
    }

    pub fn window(&self) -> f64 {
        self.window_us * 1e-6
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max_ns * 1e-9
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

fn positive(name: &str, v: f64) -> Result<(), HarnessError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(HarnessError::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<(), HarnessError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(HarnessError::Config(format!("{name} must be finite and non-negative, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Canonical TOML form; the run manifest hashes this.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let a = &self.atom;
        positive("atom.gamma_mhz", a.gamma_mhz)?;
        positive("atom.gamma_a_mhz", a.gamma_a_mhz)?;
        non_negative("atom.gamma_cb_mhz", a.gamma_cb_mhz)?;
        if a.gamma_mhz < 0.5 * a.gamma_a_mhz * (1.0 - 1e-12) {
            return Err(HarnessError::Config("atom.gamma_mhz must be at least gamma_a_mhz / 2".into()));
        }
        let l = &self.laser;
        match (l.rabi_mhz, l.power_mw) {
            (Some(_), Some(_)) => {
                return Err(HarnessError::Config("give laser.rabi_mhz or laser.power_mw, not both".into()))
            }
            (Some(r), None) => positive("laser.rabi_mhz", r)?,
            (None, Some(p)) => {
                positive("laser.power_mw", p)?;
                positive("laser.beam_radius_mm", l.beam_radius_mm)?;
                positive("laser.dipole_debye", l.dipole_debye)?;
            }
            (None, None) => {}
        }
        non_negative("laser.linewidth_mhz", l.linewidth_mhz)?;
        if !l.carrier_detuning_mhz.is_finite() {
            return Err(HarnessError::Config("laser.carrier_detuning_mhz must be finite".into()));
        }
        positive("noise.correlation_time_ns", self.noise.correlation_time_ns)?;
        if self.noise.realizations == 0 {
            return Err(HarnessError::Config("noise.realizations must be at least 1".into()));
        }
        let c = &self.cell;
        positive("cell.length_cm", c.length_cm)?;
        match (c.optical_depth, c.density_cm3) {
            (Some(_), Some(_)) => {
                return Err(HarnessError::Config("give cell.optical_depth or cell.density_cm3, not both".into()))
            }
            (Some(od), None) => non_negative("cell.optical_depth", od)?,
            (None, Some(n)) => {
                non_negative("cell.density_cm3", n)?;
                positive("laser.dipole_debye", l.dipole_debye)?;
            }
            (None, None) => {}
        }
        if c.n_slabs == 0 || c.time_domain_slabs == 0 {
            return Err(HarnessError::Config("slab counts must be at least 1".into()));
        }
        if !self.model.rotation_offset_rad.is_finite() {
            return Err(HarnessError::Config("model.rotation_offset_rad must be finite".into()));
        }
        let s = &self.sweep;
        positive("sweep.step_gauss", s.step_gauss)?;
        if !(s.b_min_gauss.is_finite() && s.b_max_gauss.is_finite() && s.b_min_gauss <= s.b_max_gauss) {
            return Err(HarnessError::Config("sweep range must be finite with b_min_gauss <= b_max_gauss".into()));
        }
        let t = &self.trace;
        positive("trace.duration_us", t.duration_us)?;
        positive("trace.dt_ns", t.dt_ns)?;
        non_negative("trace.warmup_ns", t.warmup_ns)?;
        positive("trace.window_us", t.window_us)?;
        non_negative("trace.tau_max_ns", t.tau_max_ns)?;
        if !t.field_gauss.is_finite() {
            return Err(HarnessError::Config("trace.field_gauss must be finite".into()));
        }
        if t.samples() < 2 {
            return Err(HarnessError::Config("trace must hold at least two samples".into()));
        }
        if t.window() < 2.0 * t.dt() {
            return Err(HarnessError::Config("trace.window_us must span at least two samples".into()));
        }
        if t.dt_ns >= self.noise.correlation_time_ns / 5.0 {
            return Err(HarnessError::Config(
                "trace.dt_ns must be below a fifth of noise.correlation_time_ns".into(),
            ));
        }
        Ok(())
    }

    pub fn gamma(&self) -> f64 {
        mhz_to_rad_s(self.atom.gamma_mhz)
    }

    /// Atom at field `b_gauss`, transitions placed symmetrically about the
    /// origin of the rotating frame.
    pub fn atom_params(&self, b_gauss: f64) -> LambdaAtomParams {
        LambdaAtomParams {
            gamma_ab: self.gamma(),
            gamma_ca: self.gamma(),
            gamma_cb: mhz_to_rad_s(self.atom.gamma_cb_mhz),
            gamma_a: mhz_to_rad_s(self.atom.gamma_a_mhz),
            omega_ab: 0.0,
            omega_ac: 0.0,
        }
        .with_splitting(0.0, zeeman_splitting(b_gauss))
    }

    /// Laser frequency relative to line center, without noise.
    pub fn carrier(&self) -> f64 {
        mhz_to_rad_s(self.laser.carrier_detuning_mhz)
    }

    /// Rabi frequency of each circular component, rad/s.
    pub fn rabi(&self) -> f64 {
        let l = &self.laser;
        match (l.rabi_mhz, l.power_mw) {
            (Some(r), _) => mhz_to_rad_s(r),
            (None, Some(p)) => rabi_from_power(p * 1e-3, l.beam_radius_mm * 1e-3, l.dipole_debye * DEBYE),
            (None, None) => mhz_to_rad_s(DEFAULT_RABI_MHZ),
        }
    }

    pub fn input_fields(&self) -> FieldAmplitudes {
        FieldAmplitudes::equal(self.rabi())
    }

    pub fn optical_depth(&self) -> f64 {
        self.cell_params().optical_depth(self.gamma())
    }

    pub fn cell_params(&self) -> CellParams {
        let c = &self.cell;
        let length = c.length_cm * 1e-2;
        let base = match (c.optical_depth, c.density_cm3) {
            (None, Some(n)) => CellParams::from_density(
                length,
                n * 1e6,
                self.laser.dipole_debye * DEBYE,
                2.0 * PI * LINE_CENTER_THZ * 1e12,
            ),
            (od, _) => CellParams::from_optical_depth(length, od.unwrap_or(DEFAULT_OPTICAL_DEPTH), self.gamma()),
        };
        CellParams { n_slabs: c.n_slabs, thin_medium: c.thin_medium, ..base }
    }

    /// Cell for the time-domain integrator.
    pub fn time_domain_cell(&self) -> CellParams {
        CellParams { n_slabs: self.cell.time_domain_slabs, ..self.cell_params() }
    }

    /// Noise covering warmup and record for realization seed `seed`.
    pub fn noise_params(&self, seed: u64) -> NoiseParams {
        NoiseParams {
            linewidth: mhz_to_rad_s(self.laser.linewidth_mhz),
            correlation_time: self.noise.correlation_time_ns * 1e-9,
            seed,
            dt: self.trace.dt(),
            n_samples: self.trace.warmup_samples() + self.trace.samples(),
        }
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.noise.realizations as u64).map(|r| self.noise.seed.wrapping_add(r)).collect()
    }
}

/// Ω = ℘E/ħ for a flat-top beam of power `power` (W) and radius `radius`
/// (m): E = √(2P / (π r² c ε₀)).
pub fn rabi_from_power(power: f64, radius: f64, dipole: f64) -> f64 {
    let intensity = power / (PI * radius * radius);
    let e_field = (2.0 * intensity / (SPEED_OF_LIGHT * EPSILON_0)).sqrt();
    dipole * e_field / HBAR
}
