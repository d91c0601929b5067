//! Unit registry and isotope data.
//!
//! All internal computation is in Hartree atomic units; every I/O boundary
//! declares units explicitly through [`Quantity`]. Temperatures convert to
//! energy via k_B·T and frequencies via h·ν, so μK and MHz are accepted
//! wherever an energy is expected.

use crate::constants;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    Hartree,
    WavenumberCm,
    Kelvin,
    Microkelvin,
    Megahertz,
    Bohr,
    Angstrom,
    AtomicMassUnit,
    ElectronMass,
    WattPerCm2,
    AuField,
    Second,
    Picosecond,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Energy,
    Length,
    Mass,
    Intensity,
    Field,
    Time,
}

impl Unit {
    pub fn dimension(self) -> Dimension {
        use Unit::*;
        match self {
            Hartree | WavenumberCm | Kelvin | Microkelvin | Megahertz => Dimension::Energy,
            Bohr | Angstrom => Dimension::Length,
            AtomicMassUnit | ElectronMass => Dimension::Mass,
            WattPerCm2 => Dimension::Intensity,
            AuField => Dimension::Field,
            Second | Picosecond => Dimension::Time,
        }
    }

    /// Conversion factor to the atomic unit of this unit's dimension.
    pub fn to_au_factor(self) -> f64 {
        use Unit::*;
        match self {
            Hartree => 1.0,
            WavenumberCm => 1.0 / constants::CM1_PER_HARTREE,
            Kelvin => constants::KB_HARTREE_PER_KELVIN,
            Microkelvin => constants::KB_HARTREE_PER_KELVIN * 1e-6,
            Megahertz => 1.0 / constants::MHZ_PER_HARTREE,
            Bohr => 1.0,
            Angstrom => 1.0 / constants::ANGSTROM_PER_BOHR,
            AtomicMassUnit => constants::ME_PER_AMU,
            ElectronMass => 1.0,
            WattPerCm2 => 1.0 / constants::ATOMIC_INTENSITY_W_PER_CM2,
            AuField => 1.0,
            Second => 1.0 / constants::SECONDS_PER_ATOMIC_TIME,
            Picosecond => 1e-12 / constants::SECONDS_PER_ATOMIC_TIME,
        }
    }

    pub fn name(self) -> &'static str {
        use Unit::*;
        match self {
            Hartree => "hartree",
            WavenumberCm => "wavenumber_cm",
            Kelvin => "kelvin",
            Microkelvin => "microkelvin",
            Megahertz => "megahertz",
            Bohr => "bohr",
            Angstrom => "angstrom",
            AtomicMassUnit => "atomic_mass_unit",
            ElectronMass => "electron_mass",
            WattPerCm2 => "watt_per_cm2",
            AuField => "au_field",
            Second => "second",
            Picosecond => "picosecond",
        }
    }

    /// Parse a unit spelling. Aliases with metric prefixes (`kW/cm2`, `MW/cm2`)
    /// carry a scale factor applied to the value.
    pub fn parse(s: &str) -> Result<(Unit, f64)> {
        use Unit::*;
        let t = s.trim();
        let u = match t {
            "hartree" | "Eh" | "Ha" | "au_energy" => (Hartree, 1.0),
            "wavenumber_cm" | "cm-1" | "cm^-1" | "1/cm" | "wavenumber" => (WavenumberCm, 1.0),
            "kelvin" | "K" => (Kelvin, 1.0),
            "microkelvin" | "uK" | "muK" => (Microkelvin, 1.0),
            "megahertz" | "MHz" => (Megahertz, 1.0),
            "GHz" => (Megahertz, 1e3),
            "kHz" => (Megahertz, 1e-3),
            "bohr" | "a0" | "Bohr" => (Bohr, 1.0),
            "angstrom" | "A" | "Angstrom" => (Angstrom, 1.0),
            "atomic_mass_unit" | "amu" | "u" => (AtomicMassUnit, 1.0),
            "electron_mass" | "me" | "m_e" => (ElectronMass, 1.0),
            "watt_per_cm2" | "W/cm2" | "W/cm^2" => (WattPerCm2, 1.0),
            "kW/cm2" | "kW/cm^2" => (WattPerCm2, 1e3),
            "MW/cm2" | "MW/cm^2" => (WattPerCm2, 1e6),
            "au_field" => (AuField, 1.0),
            "second" | "s" => (Second, 1.0),
            "picosecond" | "ps" => (Picosecond, 1.0),
            "ns" => (Picosecond, 1e3),
            _ => return Err(Error::UnknownUnit(t.to_string())),
        };
        Ok(u)
    }
}

/// A dimensioned value. `value` is expressed in `unit`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

impl Quantity {
    pub fn new(value: f64, unit: Unit) -> Self {
        Quantity { value, unit }
    }

    /// Value in the atomic unit of this quantity's dimension.
    pub fn to_au(self) -> f64 {
        self.value * self.unit.to_au_factor()
    }

    /// Wrap an atomic-unit value as a Quantity in `unit`'s dimension.
    pub fn from_au(value_au: f64, unit: Unit) -> Self {
        Quantity {
            value: value_au / unit.to_au_factor(),
            unit,
        }
    }

    /// Parse "value unit", e.g. `"2.5 kW/cm2"` or `"0.4 uK"`.
    pub fn parse(s: &str) -> Result<Quantity> {
        let mut it = s.split_whitespace();
        let v: f64 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Invalid(format!("cannot parse quantity '{s}'")))?;
        let unit_str = it
            .next()
            .ok_or_else(|| Error::Invalid(format!("missing unit in '{s}'")))?;
        let (unit, scale) = Unit::parse(unit_str)?;
        Ok(Quantity::new(v * scale, unit))
    }
}

/// Convert a quantity to a different unit of the same dimension.
pub fn convert(q: Quantity, target: Unit) -> Result<Quantity> {
    if q.unit.dimension() != target.dimension() {
        return Err(Error::IncompatibleUnits(
            q.unit.name().to_string(),
            target.name().to_string(),
        ));
    }
    Ok(Quantity {
        value: q.value * q.unit.to_au_factor() / target.to_au_factor(),
        unit: target,
    })
}

/// One atomic isotope; mass from the frozen AME table or caller-supplied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotopeSpec {
    pub mass_number: u32,
    /// Atomic mass in unified atomic mass units.
    pub atomic_mass_u: f64,
}

impl IsotopeSpec {
    pub fn new(mass_number: u32, atomic_mass_u: f64) -> Self {
        assert!(atomic_mass_u > 0.0, "atomic mass must be positive");
        IsotopeSpec {
            mass_number,
            atomic_mass_u,
        }
    }

    pub fn cs133() -> Self {
        Self::new(133, constants::CS133_MASS_AMU)
    }

    pub fn cs135() -> Self {
        Self::new(135, constants::CS135_MASS_AMU)
    }

    pub fn cs137() -> Self {
        Self::new(137, constants::CS137_MASS_AMU)
    }

    /// Reduced mass of the homonuclear dimer, in electron masses.
    pub fn reduced_mass_pair_me(&self) -> f64 {
        self.atomic_mass_u * constants::ME_PER_AMU / 2.0
    }

    pub fn label(&self) -> String {
        format!("{}", self.mass_number)
    }
}

/// Two-body reduced mass in electron masses.
pub fn reduced_mass(a: &IsotopeSpec, b: &IsotopeSpec) -> f64 {
    assert!(a.atomic_mass_u > 0.0 && b.atomic_mass_u > 0.0);
    let ma = a.atomic_mass_u * constants::ME_PER_AMU;
    let mb = b.atomic_mass_u * constants::ME_PER_AMU;
    ma * mb / (ma + mb)
}

/// Peak electric-field amplitude in atomic units for a CW intensity in W/cm².
pub fn field_amplitude(intensity_w_cm2: f64) -> Result<f64> {
    if intensity_w_cm2 < 0.0 {
        return Err(Error::NegativeIntensity(intensity_w_cm2));
    }
    Ok((intensity_w_cm2 / constants::ATOMIC_INTENSITY_W_PER_CM2).sqrt())
}
