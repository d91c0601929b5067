//! Bundled analytic surrogate curves and dressed systems.
//!
//! The true ab initio Cs₂ curves are user inputs; these surrogates reproduce
//! the structural physics on analytic 12-6 wells: the ground triplet-like
//! curve is tuned so its zero-energy phase integral equals 54.6π for the
//! ¹³³Cs dimer (54 bound levels), and the two dressed systems realize the
//! off-resonant intensity scheme and the optically induced Feshbach scheme.

use crate::constants;
use crate::coupling::{DetuningReference, DipoleFunction, DressedSystem, FieldSpec};
use crate::error::Result;
use crate::mfgm::GridSpec;
use crate::potentials::{
    InnerWallDeformation, ModelForm, PotentialCurve, SoConvention, SpinOrbitModel,
};
use crate::scattering::semiclassical_phase;
use crate::units::{IsotopeSpec, Quantity, Unit};

/// Dispersion coefficient of the default ground surrogate (hartree·bohr⁶).
pub const GROUND_C6: f64 = -6331.0;

/// Well position of the ground surrogate (bohr).
pub const GROUND_R_MIN: f64 = 11.8;

/// Zero-energy phase target for the ¹³³Cs₂ ground surrogate, in units of π.
pub const GROUND_PHI_OVER_PI: f64 = 54.6;

/// Reference inner-wall deformation: shifts the surrogate onto the branch
/// with a ≈ -3.4·10² bohr for ¹³³Cs, the anchor for the bundled node targets.
pub fn reference_deformation() -> InnerWallDeformation {
    InnerWallDeformation {
        amplitude: 3.0e-5,
        center: 10.0,
        sigma: 1.0,
    }
}

/// Reduced mass of the ¹³³Cs dimer in electron masses.
pub fn mu_cs133() -> f64 {
    IsotopeSpec::cs133().reduced_mass_pair_me()
}

/// Ground-state-like 12-6 surrogate with the requested dispersion tail, its
/// depth tuned by bisection so the semiclassical phase over the well equals
/// `phi_over_pi`·π for the given reduced mass.
pub fn ground_tuned(c6: f64, mu: f64, phi_over_pi: f64) -> Result<PotentialCurve> {
    let target = phi_over_pi * std::f64::consts::PI;
    let make = |depth: f64| {
        PotentialCurve::model_c6_well(
            "cs-ground-surrogate",
            depth,
            GROUND_R_MIN,
            c6,
            20.0,
            2.0,
            0.0,
        )
    };
    let (mut lo, mut hi) = (1e-5_f64, 2e-2_f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let phi = semiclassical_phase(&make(mid)?, mu)?.phi;
        if phi < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    make(0.5 * (lo + hi))
}

/// Default ¹³³Cs-like ground surrogate (φ = 54.6π, 54 bound levels).
pub fn cs_ground() -> Result<PotentialCurve> {
    ground_tuned(GROUND_C6, mu_cs133(), GROUND_PHI_OVER_PI)
}

/// Ground surrogate on the branch fitted to the bundled node targets
/// (a ≈ -3.4·10² bohr for ¹³³Cs).
pub fn cs_reference() -> Result<PotentialCurve> {
    cs_ground()?.apply_deformation(reference_deformation())
}

/// Grid for single-channel threshold work on the Cs-like surrogate: box out
/// to 20000 bohr with a 300 μK envelope.
pub fn cs_grid() -> GridSpec {
    GridSpec::new(
        Quantity::new(300.0, Unit::Microkelvin).to_au(),
        9.0,
        20_000.0,
        3.0,
    )
}

/// Box grid for dressed two-channel scans: smaller box, threshold states at
/// a fraction of a μK.
pub fn dressed_grid() -> GridSpec {
    GridSpec::new(
        Quantity::new(40.0, Unit::Microkelvin).to_au(),
        8.6,
        8_000.0,
        2.5,
    )
}

/// Default collision energy for dressed scans (0.4 μK).
pub fn default_collision_energy() -> f64 {
    Quantity::new(0.4, Unit::Microkelvin).to_au()
}

/// Off-resonant intensity scheme: the ground surrogate coupled to a purely
/// repulsive excited branch whose dressed asymptote sits 3 cm⁻¹ above the
/// ground threshold. No closed-channel level exists below threshold, so the
/// intensity scan is free of accidental resonances; the differential light
/// shift removes accumulated phase and drives a from negative through zero.
pub fn scheme_i_system(intensity_w_cm2: f64) -> Result<DressedSystem> {
    let ground = cs_reference()?;
    let a_e = constants::CS_6S_6P32_CM1 / constants::CM1_PER_HARTREE;
    let excited = PotentialCurve::from_model(
        "repulsive-excited-surrogate",
        ModelForm::PowerWell {
            c12: 1.0e7,
            c6_inner: -1.0,
        },
        -500.0,
        20.0,
        2.0,
        a_e,
    );
    let dv = 3.0 / constants::CM1_PER_HARTREE;
    DressedSystem::new(
        ground,
        excited,
        DipoleFunction::Constant(5.0),
        FieldSpec {
            intensity_w_cm2,
            photon_energy: a_e - dv,
            reference: DetuningReference::Atomic6s6p32,
        },
    )
}

/// Default intensity list for the scheme-I scan (W/cm²): monotone rise of a
/// through zero, before the first pole.
pub fn scheme_i_intensities() -> Vec<f64> {
    vec![0.0, 3.0e4, 6.0e4, 1.0e5, 1.5e5, 2.2e5, 3.0e5]
}

/// Optically induced Feshbach scheme: a shallow excited well at 10 bohr whose
/// lowest vibrational level is tuned to sit 90 MHz below the ground threshold
/// at the default photon energy.
pub fn scheme_ii_system(intensity_w_cm2: f64) -> Result<DressedSystem> {
    let ground = cs_reference()?;
    let a_e = constants::CS_6S_6P32_CM1 / constants::CM1_PER_HARTREE;
    let excited = PotentialCurve::model_c6_well(
        "feshbach-excited-surrogate",
        30.0 / constants::CM1_PER_HARTREE,
        10.0,
        -1000.0,
        20.0,
        2.0,
        a_e,
    )?;
    // photon energy anchored just below the v = 0 binding (level a touch
    // under threshold); the caller tunes the exact detuning with
    // coupling::tune_to_detuning
    let e_f = a_e - 26.9 / constants::CM1_PER_HARTREE;
    DressedSystem::new(
        ground,
        excited,
        DipoleFunction::Constant(2.0),
        FieldSpec {
            intensity_w_cm2,
            photon_energy: e_f,
            reference: DetuningReference::Atomic6s6p32,
        },
    )
}

/// Default scheme-II intensity (2.5 kW/cm²).
pub fn scheme_ii_intensity() -> f64 {
    2.5e3
}

/// Spin-orbit model pair for the 0g⁻ construction: Σ- and Π-like wells of a
/// shared 6s+6p asymptote with the Cs atomic spin-orbit constant.
pub fn so_model_0g() -> Result<SpinOrbitModel> {
    let a_e = constants::CS_6S_6P32_CM1 / constants::CM1_PER_HARTREE;
    let v_sigma = PotentialCurve::model_c6_well(
        "sigma-excited-surrogate",
        400.0 / constants::CM1_PER_HARTREE,
        10.5,
        -1.2e4,
        22.0,
        2.0,
        a_e,
    )?;
    let v_pi = PotentialCurve::model_c6_well(
        "pi-excited-surrogate",
        1400.0 / constants::CM1_PER_HARTREE,
        8.5,
        -8.0e3,
        22.0,
        2.0,
        a_e,
    )?;
    Ok(SpinOrbitModel {
        v_sigma,
        v_pi,
        v_so: constants::CS_V_SO_CM1 / constants::CM1_PER_HARTREE,
        convention: SoConvention::default(),
    })
}

/// Lower 0g⁻ branch used as the excited curve for photoassociation spectra.
pub fn excited_0g_lower() -> Result<PotentialCurve> {
    Ok(crate::potentials::so_diagonalize_0g(&so_model_0g()?, 6.5, 4000)?.lower)
}

/// Grid for Franck-Condon work: both wells resolved, box at 500 bohr.
pub fn fc_grid() -> GridSpec {
    GridSpec::new(
        Quantity::new(300.0, Unit::Microkelvin).to_au(),
        7.0,
        500.0,
        2.6,
    )
}
