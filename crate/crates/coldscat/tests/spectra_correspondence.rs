//! Node-wavefunction correspondence: every detected spectral node maps to an
//! excited level whose Condon radius falls within one local de Broglie
//! half-wavelength of a zero of the ground continuum wavefunction.

use coldscat::constants::CM1_PER_HARTREE;
use coldscat::spectra_fit::{condon_radius, detect_nodes, FcEngine};
use coldscat::surrogates;
use coldscat::units::{Quantity, Unit};

#[test]
fn nodes_sit_at_continuum_zeros() {
    let mu = surrogates::mu_cs133();
    let ground = surrogates::cs_reference().unwrap();
    let excited = surrogates::excited_0g_lower().unwrap();
    let mut grid = surrogates::fc_grid();
    grid.r_max = 360.0;
    grid.beta = 2.3;
    let e_coll = Quantity::new(200.0, Unit::Microkelvin).to_au();
    let engine = FcEngine::new(
        &excited,
        &surrogates::cs_ground().unwrap(),
        mu,
        e_coll,
        &grid,
    )
    .unwrap();
    let spectrum = engine.spectrum(&ground).unwrap().truncated(5.0);
    let nodes = detect_nodes(&spectrum, 10.0).unwrap();
    assert!(
        nodes.detunings.len() >= 3,
        "need several nodes, got {:?}",
        nodes.detunings
    );

    // zeros of the continuum state by sign-change interpolation
    let cont = engine.ground_continuum(&ground).unwrap();
    let r = cont.grid.r();
    let u = &cont.channels[0];
    let mut zeros = Vec::new();
    for j in 1..r.len() {
        if u[j - 1] != 0.0 && u[j] != 0.0 && (u[j - 1] < 0.0) != (u[j] < 0.0) {
            let t = u[j - 1] / (u[j - 1] - u[j]);
            zeros.push(r[j - 1] + t * (r[j] - r[j - 1]));
        }
    }
    assert!(!zeros.is_empty());

    let e_cont = cont.energy;
    for &d in &nodes.detunings {
        let e_rel = -d / CM1_PER_HARTREE;
        let rc = condon_radius(&excited, e_rel).expect("outer turning point");
        let nearest = zeros
            .iter()
            .map(|&z| (z - rc).abs())
            .fold(f64::INFINITY, f64::min);
        let k_loc = (2.0 * mu * (e_cont - ground.eval_rel(rc))).sqrt();
        let half_wavelength = std::f64::consts::PI / k_loc;
        assert!(
            nearest <= half_wavelength,
            "node at {d:.3} cm-1: Condon radius {rc:.2} is {nearest:.2} bohr from a zero (half-wavelength {half_wavelength:.2})"
        );
    }
}
