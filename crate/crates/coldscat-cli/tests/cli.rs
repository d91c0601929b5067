//! End-to-end command tests: exit codes, output files, determinism.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_coldscat")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("coldscat-cli-test-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(path: &Path, content: &str) {
    std::fs::write(path, content).unwrap();
}

#[test]
fn phase_on_tuned_surrogate_reports_headline_numbers() {
    let dir = tmp("phase");
    let cfg = dir.join("run.cfg");
    write(
        &cfg,
        "[curves]\nground = surrogate\n[masses]\nisotopes = 133\n",
    );
    let out = dir.join("out");
    let res = Command::new(bin())
        .args(["phase", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(res.status.success());
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.contains("phi_over_pi = 54.6"), "stdout: {stdout}");
    assert!(stdout.contains("count = 54"), "stdout: {stdout}");
    assert!(out.join("phase.csv").exists());
    assert!(out.join("manifest.txt").exists());
}

#[test]
fn bound_morse_matches_analytic_count_and_is_deterministic() {
    let dir = tmp("bound");
    let cfg = dir.join("run.cfg");
    // Morse well: depth 2e-3 Eh, alpha 0.7, mu from mass_u -> lambda fixes the count
    write(
        &cfg,
        "[curves]\n\
         ground = morse\n\
         ground_depth = 2e-3 hartree\n\
         ground_r_e = 8.0\n\
         ground_alpha = 0.7\n\
         [masses]\n\
         mass_u = 21.944866\n\
         [grid]\n\
         r_min = 3.0\n\
         r_max = 60.0\n\
         e_env = 1e-4 hartree\n\
         beta = 3.0\n\
         [scatter]\n\
         oversample = 10\n",
    );
    let out1 = dir.join("out1");
    let out2 = dir.join("out2");
    for out in [&out1, &out2] {
        let res = Command::new(bin())
            .args(["bound", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .output()
            .unwrap();
        assert!(
            res.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&res.stderr)
        );
    }
    // mass 21.944866 u -> mu = 20000 m_e: lambda = sqrt(2*20000*2e-3)/0.7 = 12.78 -> 13 levels
    let levels = std::fs::read_to_string(out1.join("levels.csv")).unwrap();
    let n_rows = levels
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('v'))
        .count();
    assert_eq!(n_rows, 13, "levels:\n{levels}");
    // byte-identical rerun
    let a = std::fs::read(out1.join("levels.csv")).unwrap();
    let b = std::fs::read(out2.join("levels.csv")).unwrap();
    assert_eq!(a, b);
    let ma = std::fs::read(out1.join("manifest.txt")).unwrap();
    let mb = std::fs::read(out2.join("manifest.txt")).unwrap();
    assert_eq!(ma, mb);
}

#[test]
fn alen_square_well_closed_form() {
    let dir = tmp("alen");
    let cfg = dir.join("run.cfg");
    write(
        &cfg,
        "[curves]\n\
         ground = square_well\n\
         ground_depth = 1.6e-3 hartree\n\
         ground_radius = 10.0\n\
         [masses]\n\
         mass_u = 0.0548579909\n\
         [scatter]\n\
         method = node\n\
         residual_tol = 1e-4\n\
         oversample = 400\n",
    );
    let out = dir.join("out");
    let res = Command::new(bin())
        .args(["alen", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(
        res.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
    let csv = std::fs::read_to_string(out.join("scattering_length.csv")).unwrap();
    let row = csv.lines().last().unwrap();
    let a: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    // mass 0.0548579909 u = 100 m_e dimer -> mu = 50: gamma = 4, a = 10(1 - tan4/4)
    let gamma = 4.0_f64;
    let exact = 10.0 * (1.0 - gamma.tan() / gamma);
    assert!(((a - exact) / exact).abs() < 1e-4, "a = {a} vs {exact}");
}

#[test]
fn wavefunction_dump_format() {
    let dir = tmp("dump");
    let cfg = dir.join("run.cfg");
    write(
        &cfg,
        "[curves]\n\
         ground = morse\n\
         ground_depth = 2e-3 hartree\n\
         ground_r_e = 8.0\n\
         ground_alpha = 0.7\n\
         [masses]\n\
         mass_u = 21.944866\n\
         [grid]\n\
         r_min = 3.0\n\
         r_max = 60.0\n\
         e_env = 1e-4 hartree\n\
         beta = 3.0\n\
         [output]\n\
         dump_levels = 0,2\n",
    );
    let out = dir.join("out");
    let res = Command::new(bin())
        .args(["bound", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(
        res.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
    for v in ["wf_v000.dat", "wf_v002.dat"] {
        let text = std::fs::read_to_string(out.join(v)).unwrap();
        assert!(text.contains("# energy_hartree:"));
        assert!(text.contains("# energy_uK:"));
        assert!(text.contains("# normalization: unit_box"));
        let data_lines = text.lines().filter(|l| !l.starts_with('#')).count();
        assert!(data_lines > 100);
    }
    assert!(!out.join("wf_v001.dat").exists());
}

#[test]
fn usage_and_config_errors_exit_one() {
    // missing --config
    let res = Command::new(bin()).arg("phase").output().unwrap();
    assert_eq!(res.status.code(), Some(1));
    // unknown curve kind
    let dir = tmp("badcfg");
    let cfg = dir.join("run.cfg");
    write(&cfg, "[curves]\nground = warp_drive\n");
    let res = Command::new(bin())
        .args(["phase", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("warp_drive"), "stderr: {stderr}");
    // out-of-range field names the field and range
    let cfg2 = dir.join("run2.cfg");
    write(&cfg2, "[curves]\nground = surrogate\n[grid]\nbeta = 99\n");
    let res = Command::new(bin())
        .args(["phase", "--config"])
        .arg(&cfg2)
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(
        stderr.contains("beta") && stderr.contains("16"),
        "stderr: {stderr}"
    );
}

#[test]
fn numerical_failure_exits_two() {
    let dir = tmp("numfail");
    let cfg = dir.join("run.cfg");
    // a grid cap far below what the surrogate needs
    write(&cfg, "[curves]\nground = surrogate\n[grid]\nn_cap = 64\n");
    let res = Command::new(bin())
        .args(["bound", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(
        res.status.code(),
        Some(2),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
}

#[test]
fn dress_scan_at_zero_intensity_matches_alen() {
    let dir = tmp("dresszero");
    let cfg = dir.join("run.cfg");
    // toy dressed pair: the scan row at I = 0 must reproduce the bare
    // phase-method scattering length
    write(
        &cfg,
        "[curves]\n\
         ground = c6_well\n\
         ground_depth = 1.6e-3 hartree\n\
         ground_r_min = 10.0\n\
         ground_c6 = -500\n\
         ground_r_join = 20.0\n\
         ground_blend = 2.0\n\
         excited = square_well\n\
         excited_depth = 1e-4 hartree\n\
         excited_radius = 8.0\n\
         excited_asymptote = 1000 cm-1\n\
         [masses]\n\
         mass_u = 0.0548579909\n\
         [grid]\n\
         r_min = 6.0\n\
         r_max = 2000\n\
         e_env = 1e-6 hartree\n\
         beta = 3.5\n\
         [scatter]\n\
         method = phase\n\
         energies = 2.467e-8 hartree\n\
         [field]\n\
         dipole_au = 1.0\n\
         e_f = 997 cm-1\n\
         intensities = 0\n\
         e_collision = 2.467e-8 hartree\n",
    );
    let out_a = dir.join("alen");
    let res = Command::new(bin())
        .args(["alen", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_a)
        .output()
        .unwrap();
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let out_d = dir.join("dress");
    let res = Command::new(bin())
        .args(["dress-scan", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_d)
        .output()
        .unwrap();
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let a_alen: f64 = std::fs::read_to_string(out_a.join("scattering_length.csv"))
        .unwrap()
        .lines()
        .last()
        .unwrap()
        .split(',')
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    let a_dress: f64 = std::fs::read_to_string(out_d.join("dress_scan.csv"))
        .unwrap()
        .lines()
        .find(|l| !l.starts_with('#') && !l.starts_with("axis"))
        .unwrap()
        .split(',')
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    assert!(
        ((a_dress - a_alen) / a_alen).abs() < 5e-3,
        "dress {a_dress} vs alen {a_alen}"
    );
}

#[test]
fn potential_file_round_trip() {
    let dir = tmp("potfile");
    // tabulate a pure dispersion tail in angstrom / cm-1 and check alen runs
    let mut body = String::from("# units: angstrom cm-1\n");
    let c6_au = -6331.0_f64;
    let cm1 = 219474.6313632;
    let bohr_per_angstrom = 1.0 / 0.529177210903;
    for i in 0..1200 {
        let r_bohr = 7.0 + i as f64 * 0.025;
        let r_ang = r_bohr * 0.529177210903;
        let v_cm1 = c6_au / r_bohr.powi(6) * cm1;
        body.push_str(&format!("{r_ang:.9} {v_cm1:.9e}\n"));
    }
    let _ = bohr_per_angstrom;
    let pot = dir.join("tail.dat");
    write(&pot, &body);
    let cfg = dir.join("run.cfg");
    write(
        &cfg,
        "[curves]\n\
         ground = file\n\
         ground_file = tail.dat\n\
         ground_c6 = -6331.0\n\
         ground_r_join = 20.0\n\
         ground_blend = 2.0\n\
         [masses]\n\
         isotopes = 133\n\
         [scatter]\n\
         method = node\n\
         residual_tol = 1e-3\n",
    );
    let res = Command::new(bin())
        .args(["phase", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert!(
        res.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
}
