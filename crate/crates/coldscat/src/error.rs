//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone)]
pub enum Error {
    #[error("units {0} and {1} are dimensionally incompatible")]
    IncompatibleUnits(String, String),

    #[error("unknown unit spelling '{0}'")]
    UnknownUnit(String),

    #[error("intensity must be non-negative, got {0} W/cm^2")]
    NegativeIntensity(f64),

    #[error("tabulated abscissae must be strictly increasing (violation near index {0})")]
    NonMonotoneSamples(usize),

    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("samples end at {last} bohr and do not cover the join region out to {need} bohr")]
    SamplesDontCoverJoin { last: f64, need: f64 },

    #[error("dispersion coefficient must be negative (attractive tail), got {0}")]
    NonNegativeC6(f64),

    #[error("potential join is not smooth: max derivative jump {0} hartree/bohr")]
    JoinNotSmooth(f64),

    #[error("deformation center {center} must lie below the join radius {r_join}")]
    DeformationBeyondJoin { center: f64, r_join: f64 },

    #[error("spin-orbit input curves have different asymptotes ({0} vs {1} hartree)")]
    MismatchedAsymptotes(f64, f64),

    #[error("mapping envelope {e_env} hartree lies below the potential minimum {v_min} hartree")]
    EnvelopeBelowWell { e_env: f64, v_min: f64 },

    #[error("grid of {n} points exceeds the dense-solver cap of {cap}")]
    GridTooLarge { n: usize, cap: usize },

    #[error("grid parameters invalid: {0}")]
    BadGrid(String),

    #[error("symmetric eigensolver failed to converge (n = {0})")]
    EigenFailed(usize),

    #[error("operation requires a Hamiltonian without an absorbing boundary")]
    AbsorberNotSupported,

    #[error("complex eigenpair iteration failed to converge near E = {0} hartree")]
    CapIterationFailed(f64),

    #[error("no box state inside the energy window; nearest available is {nearest} hartree")]
    EmptyEnergyWindow { nearest: f64 },

    #[error("integration step too large at R = {r} bohr: 2mu|E-V|h^2 = {crit} >= 0.5")]
    StepTooLarge { r: f64, crit: f64 },

    #[error("phase-shift fit window is ill-conditioned (spans {0} rad of phase)")]
    PhaseFitIllConditioned(f64),

    #[error("asymptotic fit residual {residual} exceeds {tol} after extending the box: tail not asymptotic")]
    TailNotAsymptotic { residual: f64, tol: f64 },

    #[error("collision energies outside the threshold regime (max k|a| = {0})")]
    OutsideThresholdRegime(f64),

    #[error("excited channel is open at threshold: V_e(inf) - E_f - V_g(inf) = {0} hartree <= 0")]
    ExcitedChannelOpen(f64),

    #[error("no closed-channel level below the ground threshold")]
    NoLevelBelowThreshold,

    #[error(
        "open-channel identification ambiguous: closed-channel asymptotic amplitude ratio {0}"
    )]
    AmbiguousOpenChannel(f64),

    #[error("coupling is zero at the requested radius")]
    ZeroCoupling,

    #[error("wavefunctions live on different grids")]
    GridMismatch,

    #[error("denominator norm vanishes over the requested range")]
    ZeroDenominator,

    #[error("need at least {need} spectrum entries, got {got}")]
    TooFewSpectrumEntries { need: usize, got: usize },

    #[error("no continuum state within {window} hartree of the requested collision energy {e}")]
    NoContinuumNear { e: f64, window: f64 },

    #[error("wall fit failed: best residual {best} cm^-1 exceeds tolerance {tol} cm^-1")]
    FitFailed { best: f64, tol: f64 },

    #[error("target node list is empty")]
    EmptyTargets,

    #[error("scan values do not bracket a sign change")]
    NoBracket,

    #[error("quadrature did not converge: {0}")]
    QuadratureFailed(String),

    #[error("{0}")]
    Invalid(String),
}
