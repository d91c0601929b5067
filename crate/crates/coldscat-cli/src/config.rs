//! Run configuration: a sectioned key = value text file (INI style), parsed
//! and fully validated before any computation starts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use coldscat::constants::CM1_PER_HARTREE;
use coldscat::coupling::{DetuningReference, DipoleFunction, DressedSystem, FieldSpec};
use coldscat::mfgm::GridSpec;
use coldscat::potentials::{InnerWallDeformation, PotentialCurve};
use coldscat::spectra_fit::{DeformationShape, FitBranch, NodeSet};
use coldscat::surrogates;
use coldscat::units::{IsotopeSpec, Quantity, Unit};

/// Raw sections of the config file.
#[derive(Debug, Default, Clone)]
pub struct Ini {
    sections: BTreeMap<String, BTreeMap<String, String>>,
    path: PathBuf,
}

impl Ini {
    pub fn parse_file(path: &Path) -> Result<Ini> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let mut ini = Ini {
            sections: BTreeMap::new(),
            path: path.to_path_buf(),
        };
        let mut current = String::from("global");
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                let name = line
                    .strip_prefix('[')
                    .and_then(|s| s.strip_suffix(']'))
                    .ok_or_else(|| {
                        anyhow!(
                            "{}:{}: malformed section header '{raw}'",
                            path.display(),
                            lineno + 1
                        )
                    })?;
                current = name.trim().to_lowercase();
                ini.sections.entry(current.clone()).or_default();
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                anyhow!(
                    "{}:{}: expected key = value, got '{raw}'",
                    path.display(),
                    lineno + 1
                )
            })?;
            ini.sections
                .entry(current.clone())
                .or_default()
                .insert(k.trim().to_lowercase(), v.trim().to_string());
        }
        Ok(ini)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .get(section)
            .and_then(|s| s.get(key))
            .map(|s| s.as_str())
    }

    fn require(&self, section: &str, key: &str) -> Result<&str> {
        self.get(section, key)
            .ok_or_else(|| anyhow!("missing [{section}] {key} in {}", self.path.display()))
    }

    fn f64_in(&self, section: &str, key: &str, default: f64, lo: f64, hi: f64) -> Result<f64> {
        let v = match self.get(section, key) {
            None => default,
            Some(s) => s
                .parse::<f64>()
                .with_context(|| format!("[{section}] {key}: cannot parse '{s}' as a number"))?,
        };
        if !(v >= lo && v <= hi) {
            bail!("[{section}] {key} = {v} outside the legal range [{lo}, {hi}]");
        }
        Ok(v)
    }

    /// Quantity with units, e.g. "300 uK" or "11729.3 cm-1", converted to au.
    fn energy_au(&self, section: &str, key: &str, default_au: Option<f64>) -> Result<f64> {
        match self.get(section, key) {
            None => default_au.ok_or_else(|| anyhow!("missing [{section}] {key}")),
            Some(s) => {
                let q = Quantity::parse(s).with_context(|| format!("[{section}] {key} = '{s}'"))?;
                if q.unit.dimension() != Unit::Hartree.dimension() {
                    bail!("[{section}] {key}: '{s}' is not an energy");
                }
                Ok(q.to_au())
            }
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

/// Parse a potential data file: '#' comments, a `# units: <length> <energy>`
/// header, then two strictly increasing columns R V.
pub fn parse_potential_file(path: &Path) -> Result<(Vec<(f64, f64)>, Unit, Unit)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read potential file {}", path.display()))?;
    let mut len_unit = Unit::Bohr;
    let mut en_unit = Unit::Hartree;
    let mut seen_units = false;
    let mut samples = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(units) = rest.strip_prefix("units:") {
                let mut it = units.split_whitespace();
                let lu = it.next().ok_or_else(|| {
                    anyhow!(
                        "{}:{}: units header needs two entries",
                        path.display(),
                        lineno + 1
                    )
                })?;
                let eu = it.next().ok_or_else(|| {
                    anyhow!(
                        "{}:{}: units header needs two entries",
                        path.display(),
                        lineno + 1
                    )
                })?;
                len_unit = Unit::parse(lu).map_err(|e| anyhow!("{e}"))?.0;
                en_unit = Unit::parse(eu).map_err(|e| anyhow!("{e}"))?.0;
                seen_units = true;
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let r: f64 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| anyhow!("{}:{}: bad radius column", path.display(), lineno + 1))?;
        let v: f64 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| anyhow!("{}:{}: bad energy column", path.display(), lineno + 1))?;
        samples.push((r, v));
    }
    if !seen_units {
        bail!(
            "{}: missing '# units: <length> <energy>' header",
            path.display()
        );
    }
    if samples.len() < 4 {
        bail!("{}: need at least 4 samples", path.display());
    }
    for w in samples.windows(2) {
        if w[1].0 <= w[0].0 {
            bail!(
                "{}: radii must be strictly increasing (violation near R = {})",
                path.display(),
                w[1].0
            );
        }
    }
    let lf = len_unit.to_au_factor();
    let ef = en_unit.to_au_factor();
    let converted: Vec<(f64, f64)> = samples.iter().map(|&(r, v)| (r * lf, v * ef)).collect();
    Ok((converted, len_unit, en_unit))
}

/// Parse a target-node file: one detuning per line in cm⁻¹, '#' comments.
pub fn parse_targets_file(path: &Path) -> Result<NodeSet> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read target file {}", path.display()))?;
    let mut detunings = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let d: f64 = line
            .parse()
            .with_context(|| format!("{}:{}: bad detuning '{line}'", path.display(), lineno + 1))?;
        detunings.push(d);
    }
    NodeSet::from_targets(detunings).map_err(|e| anyhow!("{e}"))
}

/// Fully validated run configuration.
pub struct RunConfig {
    pub ground: PotentialCurve,
    pub excited: Option<PotentialCurve>,
    pub isotopes: Vec<IsotopeSpec>,
    pub grid: GridSpec,
    pub zero_opts: coldscat::scattering::ZeroEnergyOpts,
    pub phase_energies: Vec<f64>,
    pub method: ScatterMethod,
    pub dressed: Option<DressedConfig>,
    pub fit: Option<FitConfig>,
    pub e_collision_fcf: f64,
    pub dump_levels: DumpLevels,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScatterMethod {
    Node,
    Phase,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DumpLevels {
    None,
    All,
    Some(Vec<usize>),
}

pub struct DressedConfig {
    pub system: DressedSystem,
    pub intensities: Vec<f64>,
    pub deltas: Vec<f64>,
    pub target_detuning: f64,
    pub detuning_tol: f64,
    pub e_collision: f64,
}

pub struct FitConfig {
    pub targets: NodeSet,
    pub shape: DeformationShape,
    pub branch: FitBranch,
    pub tolerance_cm1: f64,
    pub max_detuning_cm1: f64,
    pub prominence: f64,
    pub e_collision: f64,
}

fn curve_from(ini: &Ini, role: &str) -> Result<Option<PotentialCurve>> {
    let Some(kind) = ini.get("curves", role) else {
        return Ok(None);
    };
    let kind = kind.to_lowercase();
    let base_dir = ini
        .path()
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let get_or = |key: &str, default: f64, lo: f64, hi: f64| -> Result<f64> {
        ini.f64_in("curves", &format!("{role}_{key}"), default, lo, hi)
    };
    let curve = match kind.as_str() {
        "surrogate" => surrogates::cs_ground().map_err(|e| anyhow!("{e}"))?,
        "surrogate-reference" => surrogates::cs_reference().map_err(|e| anyhow!("{e}"))?,
        "so-lower" => surrogates::excited_0g_lower().map_err(|e| anyhow!("{e}"))?,
        "scheme-i" => surrogates::scheme_i_system(0.0).map_err(|e| anyhow!("{e}"))?.excited,
        "scheme-ii" => surrogates::scheme_ii_system(0.0).map_err(|e| anyhow!("{e}"))?.excited,
        "c6_well" => {
            let depth = ini.energy_au("curves", &format!("{role}_depth"), None)?;
            let r_min = get_or("r_min", 11.8, 0.5, 1e4)?;
            let c6 = get_or("c6", surrogates::GROUND_C6, -1e9, -1e-9)?;
            let r_join = get_or("r_join", 20.0, r_min, 1e5)?;
            let blend = get_or("blend", 2.0, 0.0, r_join)?;
            let asym = ini.energy_au("curves", &format!("{role}_asymptote"), Some(0.0))?;
            PotentialCurve::model_c6_well(role, depth, r_min, c6, r_join, blend, asym)
                .map_err(|e| anyhow!("{e}"))?
        }
        "morse" => {
            let depth = ini.energy_au("curves", &format!("{role}_depth"), None)?;
            let r_e = get_or("r_e", 8.0, 0.1, 1e4)?;
            let alpha = get_or("alpha", 0.7, 1e-4, 1e3)?;
            PotentialCurve::morse(role, depth, r_e, alpha)
        }
        "square_well" => {
            let depth = ini.energy_au("curves", &format!("{role}_depth"), None)?;
            let radius = get_or("radius", 10.0, 1e-6, 1e6)?;
            let asym = ini.energy_au("curves", &format!("{role}_asymptote"), Some(0.0))?;
            PotentialCurve::from_model(
                role,
                coldscat::potentials::ModelForm::SquareWell { depth, radius },
                0.0,
                radius,
                0.0,
                asym,
            )
        }
        "hard_sphere" => {
            let radius = get_or("radius", 10.0, 1e-6, 1e6)?;
            PotentialCurve::hard_sphere(role, radius)
        }
        "free" => PotentialCurve::free(role),
        "file" => {
            let rel = ini.require("curves", &format!("{role}_file"))?;
            let path = base_dir.join(rel);
            let (samples, _, _) = parse_potential_file(&path)?;
            let c6 = get_or("c6", surrogates::GROUND_C6, -1e9, -1e-9)?;
            let r_join = get_or("r_join", 20.0, 0.0, 1e6)?;
            let blend = get_or("blend", 2.0, 0.0, 1e4)?;
            let asym = ini.energy_au("curves", &format!("{role}_asymptote"), Some(0.0))?;
            PotentialCurve::build_tabulated(role, &samples, c6, r_join, asym, blend)
                .map_err(|e| anyhow!("{e}"))?
        }
        other => bail!(
            "[curves] {role} = '{other}' is not one of surrogate, surrogate-reference, so-lower, c6_well, morse, square_well, hard_sphere, free, file"
        ),
    };
    // optional inner-wall deformation on any curve
    if let Some(lam) = ini.get("curves", &format!("{role}_deform_lambda")) {
        let lam: f64 = lam
            .parse()
            .with_context(|| format!("[curves] {role}_deform_lambda"))?;
        let center = get_or("deform_center", 10.0, 0.0, 1e4)?;
        let sigma = get_or("deform_sigma", 1.0, 1e-3, 1e3)?;
        return Ok(Some(
            curve
                .apply_deformation(InnerWallDeformation {
                    amplitude: lam,
                    center,
                    sigma,
                })
                .map_err(|e| anyhow!("{e}"))?,
        ));
    }
    Ok(Some(curve))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let ini = Ini::parse_file(path)?;

        let ground =
            curve_from(&ini, "ground")?.ok_or_else(|| anyhow!("missing [curves] ground"))?;
        let excited = curve_from(&ini, "excited")?;

        // isotopes
        let mut isotopes = Vec::new();
        if let Some(list) = ini.get("masses", "isotopes") {
            for tok in list.split(',') {
                let tok = tok.trim();
                match tok {
                    "133" => isotopes.push(IsotopeSpec::cs133()),
                    "135" => isotopes.push(IsotopeSpec::cs135()),
                    "137" => isotopes.push(IsotopeSpec::cs137()),
                    other => {
                        bail!("[masses] isotopes: unknown isotope '{other}' (know 133, 135, 137)")
                    }
                }
            }
        }
        if let Some(m) = ini.get("masses", "mass_u") {
            let m: f64 = m.parse().context("[masses] mass_u")?;
            if !(1e-3..1e4).contains(&m) {
                bail!("[masses] mass_u = {m} outside the legal range [1e-3, 1e4]");
            }
            isotopes.push(IsotopeSpec::new(0, m));
        }
        if isotopes.is_empty() {
            isotopes.push(IsotopeSpec::cs133());
        }

        // grid
        let defaults = surrogates::cs_grid();
        let r_min = ini.f64_in("grid", "r_min", defaults.r_min, 1e-3, 1e6)?;
        let r_max = ini.f64_in("grid", "r_max", defaults.r_max, r_min + 1.0, 1e7)?;
        let e_env = ini.energy_au("grid", "e_env", Some(defaults.e_env))?;
        let beta = ini.f64_in("grid", "beta", defaults.beta, 1.0, 16.0)?;
        let mut grid = GridSpec::new(e_env, r_min, r_max, beta);
        grid.e_floor_frac = ini.f64_in("grid", "e_floor_frac", 1e-3, 1e-9, 1.0)?;
        grid.n_cap = ini.f64_in("grid", "n_cap", 4096.0, 16.0, 16384.0)? as usize;

        // scattering options
        let mut zero_opts = coldscat::scattering::ZeroEnergyOpts {
            r_max,
            ..Default::default()
        };
        zero_opts.residual_tol = ini.f64_in("scatter", "residual_tol", 1e-5, 1e-14, 1.0)?;
        zero_opts.oversample = ini.f64_in("scatter", "oversample", 8.0, 2.0, 1e4)?;
        let method = match ini.get("scatter", "method").unwrap_or("node") {
            "node" => ScatterMethod::Node,
            "phase" => ScatterMethod::Phase,
            "both" => ScatterMethod::Both,
            other => bail!("[scatter] method = '{other}' is not one of node, phase, both"),
        };
        let mut phase_energies = Vec::new();
        if let Some(list) = ini.get("scatter", "energies") {
            for tok in list.split(',') {
                let q =
                    Quantity::parse(tok.trim()).map_err(|e| anyhow!("[scatter] energies: {e}"))?;
                let e = q.to_au();
                if e <= 0.0 {
                    bail!("[scatter] energies must be positive");
                }
                phase_energies.push(e);
            }
        }
        if phase_energies.is_empty() {
            phase_energies = vec![
                Quantity::new(0.2, Unit::Microkelvin).to_au(),
                Quantity::new(0.4, Unit::Microkelvin).to_au(),
            ];
        }

        // dressed-system configuration
        let dressed = if let Some(excited_curve) = excited.clone() {
            let kind = ini.get("curves", "excited").unwrap_or("").to_lowercase();
            let default_dipole = match kind.as_str() {
                "scheme-i" => 5.0,
                _ => 2.0,
            };
            let dipole = ini.f64_in("field", "dipole_au", default_dipole, 0.0, 1e3)?;
            let intensity0 = ini.f64_in("field", "intensity", 0.0, 0.0, 1e12)?;
            let default_ef = match kind.as_str() {
                "scheme-ii" => {
                    surrogates::scheme_ii_system(0.0)
                        .map_err(|e| anyhow!("{e}"))?
                        .field
                        .photon_energy
                }
                _ => excited_curve.asymptote() - 3.0 / CM1_PER_HARTREE,
            };
            let e_f = match ini.get("field", "e_f") {
                Some(_) => ini.energy_au("field", "e_f", None)?,
                None => default_ef,
            };
            let system = DressedSystem::new(
                ground.clone(),
                excited_curve,
                DipoleFunction::Constant(dipole),
                FieldSpec {
                    intensity_w_cm2: intensity0,
                    photon_energy: e_f,
                    reference: DetuningReference::GroundThreshold,
                },
            )
            .map_err(|e| anyhow!("{e}"))?;
            let mut intensities = Vec::new();
            if let Some(list) = ini.get("field", "intensities") {
                for tok in list.split(',') {
                    let tok = tok.trim();
                    let v = if let Ok(q) = Quantity::parse(tok) {
                        if q.unit != Unit::WattPerCm2 {
                            bail!("[field] intensities: '{tok}' is not an intensity");
                        }
                        q.value
                    } else {
                        tok.parse::<f64>()
                            .with_context(|| format!("[field] intensities: '{tok}'"))?
                    };
                    if v < 0.0 {
                        bail!("[field] intensities must be non-negative");
                    }
                    intensities.push(v);
                }
            } else {
                intensities = surrogates::scheme_i_intensities();
            }
            let mut deltas = Vec::new();
            if let Some(list) = ini.get("field", "deltas") {
                for tok in list.split(',') {
                    let q =
                        Quantity::parse(tok.trim()).map_err(|e| anyhow!("[field] deltas: {e}"))?;
                    deltas.push(q.to_au());
                }
            }
            let target_detuning = ini.energy_au(
                "field",
                "target_detuning",
                Some(Quantity::new(90.0, Unit::Megahertz).to_au()),
            )?;
            let detuning_tol = ini.energy_au(
                "field",
                "detuning_tol",
                Some(Quantity::new(1.0, Unit::Megahertz).to_au()),
            )?;
            let e_collision = ini.energy_au(
                "field",
                "e_collision",
                Some(surrogates::default_collision_energy()),
            )?;
            Some(DressedConfig {
                system,
                intensities,
                deltas,
                target_detuning,
                detuning_tol,
                e_collision,
            })
        } else {
            None
        };

        // wall-fit configuration
        let fit = if let Some(rel) = ini.get("fit", "targets_file") {
            let base_dir = ini
                .path()
                .parent()
                .map(Path::to_path_buf)
                .unwrap_or_default();
            let targets = parse_targets_file(&base_dir.join(rel))?;
            let branch = match ini.get("fit", "branch").unwrap_or("removed") {
                "removed" => FitBranch::PhaseRemoved,
                "added" => FitBranch::PhaseAdded,
                other => bail!("[fit] branch = '{other}' is not one of removed, added"),
            };
            Some(FitConfig {
                targets,
                shape: DeformationShape {
                    center: ini.f64_in("fit", "r0", 10.0, 0.1, 1e3)?,
                    sigma: ini.f64_in("fit", "sigma", 1.0, 1e-3, 1e2)?,
                },
                branch,
                tolerance_cm1: ini.f64_in("fit", "tolerance_cm1", 0.05, 1e-9, 1e3)?,
                max_detuning_cm1: ini.f64_in("fit", "max_detuning_cm1", 5.0, 1e-3, 1e6)?,
                prominence: ini.f64_in("fit", "prominence", 10.0, 1.0, 1e6)?,
                e_collision: ini.energy_au(
                    "fit",
                    "e_collision",
                    Some(Quantity::new(200.0, Unit::Microkelvin).to_au()),
                )?,
            })
        } else {
            None
        };

        let e_collision_fcf = ini.energy_au(
            "fcf",
            "e_collision",
            Some(Quantity::new(200.0, Unit::Microkelvin).to_au()),
        )?;

        let dump_levels = match ini.get("output", "dump_levels") {
            None | Some("none") => DumpLevels::None,
            Some("all") => DumpLevels::All,
            Some(list) => {
                let mut v = Vec::new();
                for tok in list.split(',') {
                    v.push(
                        tok.trim()
                            .parse::<usize>()
                            .with_context(|| format!("[output] dump_levels: '{tok}'"))?,
                    );
                }
                DumpLevels::Some(v)
            }
        };

        Ok(RunConfig {
            ground,
            excited,
            isotopes,
            grid,
            zero_opts,
            phase_energies,
            method,
            dressed,
            fit,
            e_collision_fcf,
            dump_levels,
        })
    }
}
