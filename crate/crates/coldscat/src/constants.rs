//! Frozen physical-constant table (CODATA 2018, atomic masses from AME 2020).
//!
//! Every conversion factor used anywhere in the crate is defined here, once.
//! Internal computations are carried out in Hartree atomic units throughout:
//! energies in hartree, lengths in bohr, masses in electron masses.

/// Provenance tag for the frozen table below.
pub const TABLE_VERSION: &str = "CODATA-2018 + AME-2020";

/// Wavenumbers per hartree, E_h/(h c) in cm⁻¹.
pub const CM1_PER_HARTREE: f64 = 219_474.631_363_2;

/// Boltzmann constant in hartree per kelvin.
pub const KB_HARTREE_PER_KELVIN: f64 = 3.166_811_563_455_6e-6;

/// Frequency equivalent of one hartree, E_h/h in MHz.
pub const MHZ_PER_HARTREE: f64 = 6.579_683_920_502e9;

/// Ångström per bohr radius.
pub const ANGSTROM_PER_BOHR: f64 = 0.529_177_210_903;

/// Electron masses per unified atomic mass unit.
pub const ME_PER_AMU: f64 = 1_822.888_486_209;

/// Atomic unit of field intensity in W/cm²; E_field[a.u.] = sqrt(I / this).
pub const ATOMIC_INTENSITY_W_PER_CM2: f64 = 3.509_447_58e16;

/// Atomic unit of time in seconds.
pub const SECONDS_PER_ATOMIC_TIME: f64 = 2.418_884_326_585_7e-17;

/// Atomic mass of ¹³³Cs in u.
pub const CS133_MASS_AMU: f64 = 132.905_451_933;

/// Atomic mass of ¹³⁵Cs in u.
pub const CS135_MASS_AMU: f64 = 134.905_977_0;

/// Atomic mass of ¹³⁷Cs in u.
pub const CS137_MASS_AMU: f64 = 136.907_089_23;

/// Cs atomic 6s → 6p₃/₂ transition energy in cm⁻¹; anchors the asymptotes of
/// the bundled excited-state surrogate curves.
pub const CS_6S_6P32_CM1: f64 = 11_732.3;

/// Cs₂ spin-orbit interaction constant in cm⁻¹ used by the 0g⁻ surrogate.
pub const CS_V_SO_CM1: f64 = 554.1;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kb_and_wavenumber_consistent() {
        // k_B/(h c) = 0.695034800 cm^-1/K (CODATA); cross-check the two entries.
        let kb_cm1_per_k = KB_HARTREE_PER_KELVIN * CM1_PER_HARTREE;
        assert!((kb_cm1_per_k - 0.695_034_800).abs() < 1e-8);
    }

    #[test]
    fn hertz_and_wavenumber_consistent() {
        // c = 2.99792458e10 cm/s exactly: MHz/hartree = cm1/hartree * c[cm/s] * 1e-6.
        let derived = CM1_PER_HARTREE * 2.997_924_58e10 * 1e-6;
        assert!(((derived - MHZ_PER_HARTREE) / MHZ_PER_HARTREE).abs() < 1e-12);
    }
}
