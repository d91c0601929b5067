//! Subcommand implementations. Each builds its outputs in memory, prints a
//! short report to stdout, and writes files (plus manifest) only on success.

use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Result};
use coldscat::constants::{CM1_PER_HARTREE, MHZ_PER_HARTREE};
use coldscat::coupling;
use coldscat::mfgm::{build_hamiltonian, solve_bound, MappedGrid};
use coldscat::scattering;
use coldscat::spectra_fit;
use coldscat::surrogates;

use crate::config::{DumpLevels, RunConfig, ScatterMethod};
use crate::output::{fmt, OutputSet};

const UK_PER_HARTREE: f64 = 1.0 / (3.166_811_563_455_6e-12);

fn uk(e_au: f64) -> f64 {
    e_au * UK_PER_HARTREE
}

/// Numerical failures map to exit code 2 through this error wrapper.
pub fn numerical(e: impl std::fmt::Display) -> anyhow::Error {
    anyhow!("numerical failure: {e}")
}

pub fn cmd_phase(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let mut out = OutputSet::new(out_dir);
    let mut rows = Vec::new();
    for iso in &cfg.isotopes {
        let mu = iso.reduced_mass_pair_me();
        let res = scattering::semiclassical_phase(&cfg.ground, mu).map_err(numerical)?;
        println!(
            "isotope {}: phi_over_pi = {:.6}, count = {}, r_inner = {:.4} bohr",
            iso.label(),
            res.phi / std::f64::consts::PI,
            res.bound_count_semiclassical,
            res.r_inner
        );
        rows.push(vec![
            iso.label(),
            fmt(res.phi),
            fmt(res.phi / std::f64::consts::PI),
            res.bound_count_semiclassical.to_string(),
            fmt(res.r_inner),
        ]);
    }
    out.add_csv(
        "phase.csv",
        &[format!("curve: {}", cfg.ground.label)],
        "isotope,phi_rad,phi_over_pi,bound_count_semiclassical,r_inner_bohr",
        &rows,
    );
    out.write_all()
}

pub fn cmd_bound(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let mut out = OutputSet::new(out_dir);
    let iso = cfg.isotopes[0];
    let mu = iso.reduced_mass_pair_me();
    let g = cfg.ground.clone();
    let grid =
        Arc::new(MappedGrid::build(move |r| g.eval_rel(r), mu, &cfg.grid).map_err(numerical)?);
    let h = build_hamiltonian(&grid, &cfg.ground);
    let spectrum = solve_bound(&h).map_err(numerical)?;
    let mut rows = Vec::new();
    let mut plot = Vec::new();
    for l in &spectrum.levels {
        rows.push(vec![
            l.v.to_string(),
            fmt(l.energy),
            fmt(l.energy * CM1_PER_HARTREE),
        ]);
        plot.push((l.v as f64, l.energy * CM1_PER_HARTREE));
    }
    out.add_csv(
        "levels.csv",
        &[
            format!("curve: {}", cfg.ground.label),
            format!("isotope: {}", iso.label()),
            format!("grid_n: {}", grid.n),
        ],
        "v,E_hartree,E_cm1",
        &rows,
    );
    out.add_plot("levels.dat", &plot);

    let report = scattering::bound_count_consistency(&cfg.ground, mu, &cfg.grid, &cfg.zero_opts)
        .map_err(numerical)?;
    println!(
        "count = {} (grid), {} (zero-energy nodes), {} (semiclassical, phi_over_pi = {:.4})",
        report.grid_diagonalization,
        report.zero_energy_nodes,
        report.semiclassical,
        report.phi_over_pi
    );
    if !report.disagreements.is_empty() {
        println!(
            "count disagreement beyond one level: {:?}",
            report.disagreements
        );
    }

    match &cfg.dump_levels {
        DumpLevels::None => {}
        sel => {
            for l in &spectrum.levels {
                let wanted = match sel {
                    DumpLevels::All => true,
                    DumpLevels::Some(list) => list.contains(&l.v),
                    DumpLevels::None => false,
                };
                if !wanted {
                    continue;
                }
                let mut s = String::new();
                s.push_str(&format!("# energy_hartree: {}\n", fmt(l.energy)));
                s.push_str(&format!("# energy_uK: {}\n", fmt(uk(l.energy))));
                s.push_str("# normalization: unit_box\n");
                s.push_str("# columns: R_bohr psi\n");
                for (j, &r) in grid.r().iter().enumerate() {
                    s.push_str(&format!("{} {}\n", fmt(r), fmt(l.wf.channels[0][j])));
                }
                out.add(&format!("wf_v{:03}.dat", l.v), s);
            }
        }
    }
    out.write_all()
}

pub fn cmd_alen(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let mut out = OutputSet::new(out_dir);
    let mut rows = Vec::new();
    for iso in &cfg.isotopes {
        let mu = iso.reduced_mass_pair_me();
        if cfg.method != ScatterMethod::Phase {
            let r = scattering::scattering_length_zero_energy(&cfg.ground, mu, &cfg.zero_opts)
                .map_err(numerical)?;
            println!(
                "isotope {}: a = {:.4} bohr ({})",
                iso.label(),
                r.a,
                r.method.name()
            );
            rows.push(vec![
                iso.label(),
                r.method.name().to_string(),
                fmt(r.a),
                fmt(uk(r.e_used)),
                fmt(r.fit_residual),
                r.node_count.to_string(),
                r.warnings.join(";"),
            ]);
        }
        if cfg.method != ScatterMethod::Node {
            let opts = scattering::PhaseOpts {
                r_max: cfg.zero_opts.r_max,
                ..Default::default()
            };
            let r =
                scattering::scattering_length_phase(&cfg.ground, mu, &cfg.phase_energies, &opts)
                    .map_err(numerical)?;
            println!(
                "isotope {}: a = {:.4} bohr ({})",
                iso.label(),
                r.a,
                r.method.name()
            );
            rows.push(vec![
                iso.label(),
                r.method.name().to_string(),
                fmt(r.a),
                fmt(uk(r.e_used)),
                fmt(r.fit_residual),
                r.node_count.to_string(),
                r.warnings.join(";"),
            ]);
        }
    }
    out.add_csv(
        "scattering_length.csv",
        &[format!("curve: {}", cfg.ground.label)],
        "isotope,method,a_bohr,E_used_uK,residual,node_count,warnings",
        &rows,
    );
    out.write_all()
}

pub fn cmd_isotopes(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let mut out = OutputSet::new(out_dir);
    let results = scattering::isotope_scan(&cfg.ground, &cfg.isotopes, &cfg.zero_opts);
    let mut rows = Vec::new();
    for (iso, res) in &results {
        let mu = iso.reduced_mass_pair_me();
        let phase = scattering::semiclassical_phase(&cfg.ground, mu).map_err(numerical)?;
        match res {
            Ok(r) => {
                println!(
                    "isotope {}: a = {:.4} bohr, {} nodes, phi_over_pi = {:.4}",
                    iso.label(),
                    r.a,
                    r.node_count,
                    phase.phi / std::f64::consts::PI
                );
                rows.push(vec![
                    iso.label(),
                    r.method.name().to_string(),
                    fmt(r.a),
                    fmt(uk(r.e_used)),
                    fmt(r.fit_residual),
                    r.node_count.to_string(),
                    fmt(phase.phi / std::f64::consts::PI),
                ]);
            }
            Err(e) => bail!(numerical(e)),
        }
    }
    out.add_csv(
        "isotopes.csv",
        &[format!("curve: {}", cfg.ground.label)],
        "isotope,method,a_bohr,E_used_uK,residual,node_count,phi_over_pi",
        &rows,
    );
    out.write_all()
}

pub fn cmd_fcf(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let excited = cfg
        .excited
        .clone()
        .ok_or_else(|| anyhow!("fcf needs [curves] excited"))?;
    let mut out = OutputSet::new(out_dir);
    let iso = cfg.isotopes[0];
    let mu = iso.reduced_mass_pair_me();
    let spectrum =
        spectra_fit::fc_spectrum(&excited, &cfg.ground, mu, cfg.e_collision_fcf, &cfg.grid)
            .map_err(numerical)?;
    let nodes = spectra_fit::detect_nodes(&spectrum, 10.0).map_err(numerical)?;
    let mut rows = Vec::new();
    let mut plot = Vec::new();
    for e in &spectrum.entries {
        rows.push(vec![e.v.to_string(), fmt(e.detuning_cm1), fmt(e.fc)]);
        plot.push((e.detuning_cm1, e.fc));
    }
    out.add_csv(
        "fc_spectrum.csv",
        &[
            format!("ground: {}", cfg.ground.label),
            format!("excited: {}", excited.label),
            format!(
                "collision_energy_uK: {}",
                fmt(uk(spectrum.collision_energy))
            ),
        ],
        "v,detuning_cm1,fc_relative",
        &rows,
    );
    out.add_plot("fc_spectrum.dat", &plot);
    let node_rows: Vec<Vec<String>> = nodes
        .detunings
        .iter()
        .zip(&nodes.pronounced)
        .map(|(&d, &p)| vec![fmt(d), (p as u8).to_string()])
        .collect();
    out.add_csv("fc_nodes.csv", &[], "detuning_cm1,pronounced", &node_rows);
    println!(
        "{} levels, {} spectral nodes (collision energy {:.2} uK)",
        spectrum.entries.len(),
        nodes.detunings.len(),
        uk(spectrum.collision_energy)
    );
    out.write_all()
}

pub fn cmd_fit_wall(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let excited = cfg
        .excited
        .clone()
        .ok_or_else(|| anyhow!("fit-wall needs [curves] excited"))?;
    let fit_cfg = cfg
        .fit
        .as_ref()
        .ok_or_else(|| anyhow!("fit-wall needs [fit] targets_file"))?;
    let mut out = OutputSet::new(out_dir);
    let iso = cfg.isotopes[0];
    let mu = iso.reduced_mass_pair_me();
    let problem = spectra_fit::FitProblem {
        ground: cfg.ground.clone(),
        excited,
        mu,
        e_collision: fit_cfg.e_collision,
        targets: fit_cfg.targets.clone(),
        shape: fit_cfg.shape,
        branch: fit_cfg.branch,
        grid: cfg.grid.clone(),
        tolerance_cm1: fit_cfg.tolerance_cm1,
        prominence: fit_cfg.prominence,
        max_detuning_cm1: fit_cfg.max_detuning_cm1,
    };
    let fit = spectra_fit::fit_inner_wall(&problem).map_err(numerical)?;
    let a = scattering::scattering_length_zero_energy(&fit.fitted_curve, mu, &cfg.zero_opts)
        .map_err(numerical)?;
    println!(
        "lambda_star = {:.6e} hartree ({}), bound_count = {}, node_residual = {:.4} cm-1, a = {:.2} bohr",
        fit.lambda_star,
        fit.branch.name(),
        fit.bound_count,
        fit.node_residual_cm1,
        a.a
    );
    out.add_csv(
        "wall_fit.csv",
        &[format!("branch: {}", fit.branch.name())],
        "lambda_star_hartree,bound_count,node_residual_cm1,a_bohr",
        &[vec![
            fmt(fit.lambda_star),
            fit.bound_count.to_string(),
            fmt(fit.node_residual_cm1),
            fmt(a.a),
        ]],
    );
    let target_rows: Vec<Vec<String>> = fit_cfg
        .targets
        .detunings
        .iter()
        .map(|&d| vec![fmt(d)])
        .collect();
    out.add_csv("fit_targets.csv", &[], "detuning_cm1", &target_rows);
    out.write_all()
}

pub fn cmd_dress_scan(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let dressed = cfg
        .dressed
        .as_ref()
        .ok_or_else(|| anyhow!("dress-scan needs [curves] excited"))?;
    let mut out = OutputSet::new(out_dir);
    let iso = cfg.isotopes[0];
    let mu = iso.reduced_mass_pair_me();
    let scan = coupling::intensity_scan(
        &dressed.system,
        &dressed.intensities,
        mu,
        dressed.e_collision,
        &cfg.grid,
    )
    .map_err(numerical)?;
    let mut rows = Vec::new();
    let mut plot = Vec::new();
    for p in &scan.points {
        rows.push(vec![
            scan.axis.name().to_string(),
            fmt(p.x),
            fmt(p.a),
            fmt(p.excited_population),
            p.warnings.join(";"),
        ]);
        if p.a.is_finite() {
            plot.push((p.x, p.a));
        }
    }
    let mut comments = vec![format!(
        "collision_energy_uK: {}",
        fmt(uk(dressed.e_collision))
    )];
    if let Some(x) = scan.sign_change {
        comments.push(format!("sign_change_w_cm2: {}", fmt(x)));
        println!("scattering length crosses zero at {:.4} kW/cm2", x / 1e3);
    }
    out.add_csv(
        "dress_scan.csv",
        &comments,
        "axis_name,axis_value,a_bohr,excited_population,warning",
        &rows,
    );
    out.add_plot("dress_scan.dat", &plot);
    // adiabatic branches at the largest intensity for plotting
    let top = dressed.intensities.last().copied().unwrap_or(0.0);
    let pair = coupling::adiabatic_potentials(
        &dressed.system.with_intensity(top),
        cfg.grid.r_min,
        80.0,
        1500,
    );
    let lower: Vec<(f64, f64)> = pair
        .r
        .iter()
        .zip(&pair.lower)
        .map(|(&r, &v)| (r, v * CM1_PER_HARTREE))
        .collect();
    let upper: Vec<(f64, f64)> = pair
        .r
        .iter()
        .zip(&pair.upper)
        .map(|(&r, &v)| (r, v * CM1_PER_HARTREE))
        .collect();
    out.add_plot("adiabatic_lower.dat", &lower);
    out.add_plot("adiabatic_upper.dat", &upper);
    for p in &scan.points {
        println!(
            "I = {:>12.3} W/cm2: a = {:>10.2} bohr, population = {:.3e}",
            p.x, p.a, p.excited_population
        );
    }
    out.write_all()
}

pub fn cmd_feshbach_scan(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let dressed = cfg
        .dressed
        .as_ref()
        .ok_or_else(|| anyhow!("feshbach-scan needs [curves] excited"))?;
    let mut out = OutputSet::new(out_dir);
    let iso = cfg.isotopes[0];
    let mu = iso.reduced_mass_pair_me();
    let (sys, lev) = coupling::tune_to_detuning(
        &dressed.system,
        mu,
        dressed.target_detuning,
        dressed.detuning_tol,
    )
    .map_err(numerical)?;
    println!(
        "resonance level v = {} tuned to {:.3} MHz below threshold (E_f = {:.4} cm-1)",
        lev.v,
        lev.detuning * MHZ_PER_HARTREE,
        sys.field.photon_energy * CM1_PER_HARTREE
    );
    let deltas = if dressed.deltas.is_empty() {
        // default window around the tuned detuning
        [
            -300.0, -150.0, -60.0, -25.0, -10.0, 10.0, 25.0, 60.0, 150.0, 300.0,
        ]
        .iter()
        .map(|d| lev.detuning + d / MHZ_PER_HARTREE)
        .collect()
    } else {
        dressed.deltas.clone()
    };
    let scan = coupling::detuning_scan(&sys, &deltas, mu, dressed.e_collision, &cfg.grid)
        .map_err(numerical)?;
    let mut rows = Vec::new();
    let mut plot = Vec::new();
    for p in &scan.points {
        rows.push(vec![
            scan.axis.name().to_string(),
            fmt(p.x * MHZ_PER_HARTREE),
            fmt(p.a),
            fmt(p.excited_population),
            p.warnings.join(";"),
        ]);
        if p.a.is_finite() {
            plot.push((p.x * MHZ_PER_HARTREE, p.a));
        }
    }
    let mut comments = vec![format!(
        "intensity_w_cm2: {}",
        fmt(sys.field.intensity_w_cm2)
    )];
    if let Some(fit) = &scan.fit {
        comments.push(format!("fit_a_bg_bohr = {}", fmt(fit.a_bg)));
        comments.push(format!(
            "fit_delta0_mhz = {}",
            fmt(fit.delta_0 * MHZ_PER_HARTREE)
        ));
        comments.push(format!(
            "fit_gamma_mhz = {}",
            fmt(fit.gamma * MHZ_PER_HARTREE)
        ));
        comments.push(format!(
            "fit_rms_rel_residual = {}",
            fmt(fit.rms_rel_residual)
        ));
        println!(
            "fit: a_bg = {:.2} bohr, delta0 = {:.3} MHz, gamma = {:.3} MHz (residual {:.2e})",
            fit.a_bg,
            fit.delta_0 * MHZ_PER_HARTREE,
            fit.gamma * MHZ_PER_HARTREE,
            fit.rms_rel_residual
        );
    }
    out.add_csv(
        "feshbach_scan.csv",
        &comments,
        "axis_name,axis_value_mhz,a_bohr,excited_population,warning",
        &rows,
    );
    out.add_plot("feshbach_scan.dat", &plot);
    for p in &scan.points {
        println!(
            "Delta = {:>9.3} MHz: a = {:>11.2} bohr, population = {:.3e}",
            p.x * MHZ_PER_HARTREE,
            p.a,
            p.excited_population
        );
    }
    out.write_all()
}

/// Bundled reference configuration files, written next to the outputs so a
/// run is reproducible from its own directory.
pub fn write_example_config(out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let cfg = format!(
        "# coldscat run configuration\n\
         [curves]\n\
         ground = surrogate-reference\n\
         excited = so-lower\n\n\
         [masses]\n\
         isotopes = 133,135,137\n\n\
         [grid]\n\
         r_min = 9.0\n\
         r_max = 20000\n\
         e_env = 300 uK\n\
         beta = 3.0\n\n\
         [scatter]\n\
         method = both\n\
         energies = 0.2 uK, 0.4 uK\n\n\
         [field]\n\
         dipole_au = {}\n\
         intensities = 0, 3e4, 6e4, 1e5\n\
         target_detuning = 90 MHz\n\
         e_collision = 0.4 uK\n\n\
         [fcf]\n\
         e_collision = 200 uK\n",
        2.0
    );
    std::fs::write(out_dir.join("example.cfg"), cfg)?;
    let _ = surrogates::cs_grid();
    Ok(())
}
