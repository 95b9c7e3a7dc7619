use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate denominator in {context} (|value| = {magnitude:e})")]
    DegenerateDenominator {
        context: &'static str,
        magnitude: f64,
    },
    #[error("closed form requires equal field magnitudes (|Ω₋| = {minus:e}, |Ω₊| = {plus:e})")]
    UnequalFields { minus: f64, plus: f64 },
    #[error("Liouville integration not converged: {reason} (residual {residual:e})")]
    NotConverged { reason: &'static str, residual: f64 },
    #[error("outside the perturbative regime: |Ω|/γ = {field_ratio:.3}, |δ|γ/|Ω|² = {window_ratio:.3}, γ_cb/γ = {ground_ratio:.3}")]
    RegimeViolation {
        field_ratio: f64,
        window_ratio: f64,
        ground_ratio: f64,
    },
    #[error("invalid parameter: {0}")]
    InvalidParams(&'static str),
    #[error("propagation diverged: |Ω| reached {ratio:.3}x the input amplitude")]
    SolverDiverged { ratio: f64 },
    #[error("reference signal sum must be positive (got {0:e})")]
    InvalidReference(f64),
    #[error("signal sum must be positive (got {0:e})")]
    InvalidSignals(f64),
    #[error("rotation undefined: zero field amplitude")]
    ZeroField,
    #[error("averaging window {window:e} s shorter than two samples ({dt:e} s each)")]
    WindowTooShort { window: f64, dt: f64 },
    #[error("zero fluctuation power in channel {0}")]
    ZeroVariance(u8),
    #[error("both <x^2> and the s-variance term vanish")]
    DegenerateMoments,
    #[error("no half-maximum crossing around the correlation peak")]
    NoPeak,
    #[error("invalid trace: {0}")]
    InvalidTrace(&'static str),
}
