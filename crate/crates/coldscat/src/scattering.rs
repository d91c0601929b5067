//! Scattering-length extraction, semiclassical phase analysis, bound-level
//! counting, and isotope scans.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mfgm::{self, GridSpec, MappedGrid};
use crate::numerov;
use crate::potentials::PotentialCurve;
use crate::quadrature;
use crate::units::IsotopeSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ZeroEnergyNode,
    PhaseExtrapolation,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ZeroEnergyNode => "zero_energy_node",
            Method::PhaseExtrapolation => "phase_extrapolation",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScatteringResult {
    /// s-wave scattering length in bohr.
    pub a: f64,
    pub method: Method,
    /// Collision energy used (0 for the node method), hartree.
    pub e_used: f64,
    pub fit_window: (f64, f64),
    /// rms of the asymptotic-fit residual relative to the local amplitude.
    pub fit_residual: f64,
    /// Node count of the underlying radial solution.
    pub node_count: usize,
    /// Effective range from the k·cotδ fit, when available (bohr).
    pub effective_range: Option<f64>,
    pub warnings: Vec<String>,
}

/// Options for the zero-energy extractor.
#[derive(Debug, Clone)]
pub struct ZeroEnergyOpts {
    pub r_max: f64,
    /// Relative rms threshold on the affine fit.
    pub residual_tol: f64,
    /// Numerov oversampling relative to the de Broglie criterion.
    pub oversample: f64,
    pub fit_window_frac: (f64, f64),
    /// Extend the box once when |a| approaches the box scale. Scans that only
    /// need the sign of 1/a near a divergence turn this off.
    pub allow_extension: bool,
}

impl Default for ZeroEnergyOpts {
    fn default() -> Self {
        ZeroEnergyOpts {
            r_max: 20_000.0,
            residual_tol: 1e-5,
            oversample: 8.0,
            fit_window_frac: (0.6, 0.9),
            allow_extension: true,
        }
    }
}

fn propagate_zero(
    curve: &PotentialCurve,
    mu: f64,
    r_max: f64,
    oversample: f64,
) -> Result<numerov::PropagationResult> {
    let start = numerov::inner_start(curve, mu, 0.0, curve.hard_core().unwrap_or(0.0), 30.0);
    let h = step_for(curve, mu, 0.0, start, r_max, oversample);
    numerov::zero_energy_solution(curve, mu, start, r_max, h)
}

/// De Broglie step with a sample-count cap for scale-free potentials and the
/// tail-start radius snapped onto the grid (a curve discontinuity straddling
/// a step would degrade the propagation order).
fn step_for(
    curve: &PotentialCurve,
    mu: f64,
    e: f64,
    start: f64,
    r_max: f64,
    oversample: f64,
) -> f64 {
    let scan_hi = r_max.min(curve.tail_from() * 4.0).max(start * 2.0 + 1.0);
    let mut h = numerov::auto_step(curve, mu, e, start, scan_hi, oversample);
    h = h.min((r_max - start) / 4000.0);
    let edge = curve.tail_from();
    if edge.is_finite() && edge > start && edge < r_max {
        let steps = ((edge - start) / h).ceil().max(1.0);
        h = (edge - start) / steps;
    }
    h
}

/// Fit u(R) = c·(R - a) over the window; returns (a, relative rms residual).
fn affine_fit(rs: &[f64], us: &[f64]) -> (f64, f64) {
    let n = rs.len() as f64;
    let (mut sr, mut srr, mut su, mut sru) = (0.0, 0.0, 0.0, 0.0);
    for (i, &r) in rs.iter().enumerate() {
        sr += r;
        srr += r * r;
        su += us[i];
        sru += r * us[i];
    }
    let det = n * srr - sr * sr;
    let c = (n * sru - sr * su) / det;
    let d = (srr * su - sr * sru) / det;
    let a = -d / c;
    let mut res2 = 0.0;
    let mut u2 = 0.0;
    for (i, &r) in rs.iter().enumerate() {
        let e = us[i] - (c * r + d);
        res2 += e * e;
        u2 += us[i] * us[i];
    }
    (a, (res2 / u2.max(1e-300)).sqrt())
}

/// Scattering length from the exact zero-energy solution: propagate u at
/// E = 0 and fit the asymptotic affine form. The box is extended once if the
/// first estimate demands it (|a| comparable to the box).
pub fn scattering_length_zero_energy(
    curve: &PotentialCurve,
    mu: f64,
    opts: &ZeroEnergyOpts,
) -> Result<ScatteringResult> {
    let mut r_max = opts.r_max.max(20.0 * curve.tail_from());
    let mut warnings = Vec::new();
    for attempt in 0..2 {
        let res = propagate_zero(curve, mu, r_max, opts.oversample)?;
        let (lo, hi) = (
            opts.fit_window_frac.0 * r_max,
            opts.fit_window_frac.1 * r_max,
        );
        let (rs, us) = res.window(lo, hi);
        if rs.len() < 16 {
            return Err(Error::Invalid(
                "affine fit window contains too few samples".into(),
            ));
        }
        let (a, residual) = affine_fit(&rs, &us);
        let box_ok = 20.0 * a.abs() <= r_max || !opts.allow_extension;
        if box_ok || attempt == 1 {
            if 20.0 * a.abs() > r_max {
                warnings.push(format!("box {r_max} bohr below 20|a|"));
            }
            if residual > opts.residual_tol {
                if attempt == 0 {
                    r_max *= 2.0;
                    continue;
                }
                return Err(Error::TailNotAsymptotic {
                    residual,
                    tol: opts.residual_tol,
                });
            }
            return Ok(ScatteringResult {
                a,
                method: Method::ZeroEnergyNode,
                e_used: 0.0,
                fit_window: (lo, hi),
                fit_residual: residual,
                node_count: res.node_count,
                effective_range: None,
                warnings,
            });
        }
        r_max = (20.0 * a.abs()).max(2.0 * r_max);
    }
    unreachable!()
}

/// Options for the finite-energy phase extractor.
#[derive(Debug, Clone)]
pub struct PhaseOpts {
    pub r_max: f64,
    pub oversample: f64,
    pub fit_window_frac: (f64, f64),
}

impl Default for PhaseOpts {
    fn default() -> Self {
        PhaseOpts {
            r_max: 20_000.0,
            oversample: 8.0,
            fit_window_frac: (0.6, 0.9),
        }
    }
}

/// Scattering length from finite-energy phase shifts: δ₀(k) per energy, then
/// k·cotδ = -1/a + r_eff k²/2. One energy gives a = -tanδ/k without the
/// effective-range term.
pub fn scattering_length_phase(
    curve: &PotentialCurve,
    mu: f64,
    energies: &[f64],
    opts: &PhaseOpts,
) -> Result<ScatteringResult> {
    if energies.is_empty() {
        return Err(Error::Invalid("need at least one collision energy".into()));
    }
    let mut warnings = Vec::new();
    let r_floor = curve.hard_core().unwrap_or(0.0);
    let e_max = energies.iter().cloned().fold(f64::MIN, f64::max);
    let (lo, hi) = (
        opts.fit_window_frac.0 * opts.r_max,
        opts.fit_window_frac.1 * opts.r_max,
    );
    let mut kcot = Vec::with_capacity(energies.len());
    let mut node_count = 0;
    let mut fit_residual = 0.0_f64;
    for &e in energies {
        if e <= 0.0 {
            return Err(Error::Invalid(
                "phase method needs positive collision energies".into(),
            ));
        }
        let k = (2.0 * mu * e).sqrt();
        let start = numerov::inner_start(curve, mu, e, r_floor, 30.0);
        let h = step_for(curve, mu, e_max, start, opts.r_max, opts.oversample);
        let res = numerov::propagate(curve, mu, e, start, opts.r_max, h)?;
        let ps = numerov::phase_shift(&res, k, lo)?;
        node_count = node_count.max(ps.pi_count);
        fit_residual = fit_residual.max(ps.fit_residual);
        kcot.push((k, k / ps.reduced.tan()));
    }
    let (a, r_eff) = if kcot.len() == 1 {
        (-1.0 / kcot[0].1, None)
    } else {
        // linear fit y = -1/a + (r/2) x with x = k², y = k·cotδ
        let n = kcot.len() as f64;
        let (mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for &(k, y) in &kcot {
            let x = k * k;
            sx += x;
            sxx += x * x;
            sy += y;
            sxy += x * y;
        }
        let det = n * sxx - sx * sx;
        let slope = (n * sxy - sx * sy) / det;
        let icept = (sxx * sy - sx * sxy) / det;
        (-1.0 / icept, Some(2.0 * slope))
    };
    let k_max = (2.0 * mu * e_max).sqrt();
    if k_max * a.abs() > 0.3 {
        warnings.push(format!(
            "k|a| = {:.3} outside the threshold regime",
            k_max * a.abs()
        ));
    }
    Ok(ScatteringResult {
        a,
        method: Method::PhaseExtrapolation,
        e_used: e_max,
        fit_window: (lo, hi),
        fit_residual,
        node_count,
        effective_range: r_eff,
        warnings,
    })
}

/// Scattering length from the mapped-grid box spectrum: phase shifts of the
/// two lowest box-discretized continuum states, extrapolated through the
/// effective-range relation. This is the grid-side counterpart of the
/// Numerov-based extractors.
pub fn scattering_length_mfgm(
    curve: &PotentialCurve,
    mu: f64,
    grid_spec: &GridSpec,
) -> Result<ScatteringResult> {
    let c = curve.clone();
    let grid = std::sync::Arc::new(MappedGrid::build(move |r| c.eval_rel(r), mu, grid_spec)?);
    let h = mfgm::build_hamiltonian(&grid, curve);
    let sol = h.diagonalize()?;
    let (lo, hi) = (0.6 * grid_spec.r_max, 0.9 * grid_spec.r_max);
    let mut kcot = Vec::new();
    let mut node_count = 0usize;
    let mut residual = 0.0_f64;
    let mut e_used = 0.0_f64;
    for i in 0..sol.len() {
        let e = sol.energy(i);
        if e <= 0.0 {
            continue;
        }
        let wf = sol.state(i);
        let k = (2.0 * mu * e).sqrt();
        let (delta, res) = quadrature::sine_phase_fit(grid.r(), &wf.channels[0], k, lo, hi)?;
        kcot.push((k * k, k / delta.tan()));
        residual = residual.max(res);
        e_used = e;
        node_count = node_count.max(
            wf.channels[0]
                .windows(2)
                .filter(|w| w[0] != 0.0 && w[1] != 0.0 && (w[0] < 0.0) != (w[1] < 0.0))
                .count(),
        );
        if kcot.len() == 2 {
            break;
        }
    }
    if kcot.len() < 2 {
        return Err(Error::EmptyEnergyWindow { nearest: f64::NAN });
    }
    let (x1, y1) = kcot[0];
    let (x2, y2) = kcot[1];
    let slope = (y2 - y1) / (x2 - x1);
    let icept = y1 - slope * x1;
    Ok(ScatteringResult {
        a: -1.0 / icept,
        method: Method::PhaseExtrapolation,
        e_used,
        fit_window: (lo, hi),
        fit_residual: residual,
        node_count,
        effective_range: Some(2.0 * slope),
        warnings: Vec::new(),
    })
}

#[derive(Debug, Clone)]
pub struct PhaseResult {
    /// Accumulated zero-energy phase ∫ sqrt(-2μV) dR over the well, radians.
    pub phi: f64,
    /// Inner turning point at zero energy (bohr).
    pub r_inner: f64,
    /// Semiclassical level count with the -5/8 threshold offset for a
    /// -C6/R⁶ tail.
    pub bound_count_semiclassical: i64,
}

/// Semiclassical phase integral and the implied bound-level count.
pub fn semiclassical_phase(curve: &PotentialCurve, mu: f64) -> Result<PhaseResult> {
    // locate the classically allowed region at zero energy; a well reaching
    // the origin has its inner edge at R = 0
    let r_lo = curve.hard_core().unwrap_or(1e-6).max(1e-6);
    let r_probe_hi = curve.tail_from().min(1e6);
    let n = 20_000;
    let ratio = (r_probe_hi / r_lo).ln() / n as f64;
    let mut r_inner = None;
    let mut prev = r_lo;
    if curve.eval_rel(prev) < 0.0 {
        r_inner = Some(if curve.hard_core().is_none() {
            0.0
        } else {
            prev
        });
    } else {
        for i in 1..=n {
            let r = r_lo * (ratio * i as f64).exp();
            if curve.eval_rel(r) < 0.0 {
                let root = quadrature::bisect(|x| curve.eval_rel(x), prev, r, 90);
                r_inner = Some(root);
                break;
            }
            prev = r;
        }
    }
    let Some(ri) = r_inner else {
        return Ok(PhaseResult {
            phi: 0.0,
            r_inner: f64::NAN,
            bound_count_semiclassical: 0,
        });
    };

    let integrand = |r: f64| {
        let v = curve.eval_rel(r);
        if v < 0.0 {
            (-2.0 * mu * v).sqrt()
        } else {
            0.0
        }
    };
    // endpoint substitution R = ri + t² regularizes the sqrt singularity
    let t_max = (0.5_f64)
        .min((curve.tail_from() - ri).abs() / 4.0)
        .max(1e-3)
        .sqrt();
    let head =
        quadrature::adaptive_simpson(|t| 2.0 * t * integrand(ri + t * t), 0.0, t_max, 1e-12, 0.0)?;
    let mut phi = head;
    let mut r_from = ri + t_max * t_max;
    if curve.c6() < 0.0 {
        // integrate to where the dispersion tail is exact, then analytic rest
        let r_t = curve.tail_from().max(r_from);
        phi += quadrature::adaptive_simpson(&integrand, r_from, r_t, 1e-12, 0.0)?;
        phi += (2.0 * mu * (-curve.c6())).sqrt() / (2.0 * r_t * r_t);
    } else {
        // no dispersion tail: extend until the remainder is negligible
        loop {
            let r_next = (r_from * 2.0).max(r_from + 10.0);
            phi += quadrature::adaptive_simpson(&integrand, r_from, r_next, 1e-12, 0.0)?;
            let k_tail = integrand(r_next);
            if k_tail * r_next < 1e-12 * phi.max(1e-300) || r_next > 1e7 {
                break;
            }
            r_from = r_next;
        }
    }
    let count = if phi <= 0.0 {
        0
    } else {
        ((phi / std::f64::consts::PI - 0.625).floor() as i64 + 1).max(0)
    };
    Ok(PhaseResult {
        phi,
        r_inner: ri,
        bound_count_semiclassical: count,
    })
}

/// Same curve, reduced mass swapped per isotope; embarrassingly parallel.
pub fn isotope_scan(
    curve: &PotentialCurve,
    isotopes: &[IsotopeSpec],
    opts: &ZeroEnergyOpts,
) -> Vec<(IsotopeSpec, Result<ScatteringResult>)> {
    isotopes
        .par_iter()
        .map(|iso| {
            let mu = iso.reduced_mass_pair_me();
            (*iso, scattering_length_zero_energy(curve, mu, opts))
        })
        .collect()
}

/// Three-way bound-count cross-check: semiclassical, zero-energy node count,
/// and the mapped-grid diagonalization.
#[derive(Debug, Clone)]
pub struct CountReport {
    pub semiclassical: i64,
    pub zero_energy_nodes: usize,
    pub grid_diagonalization: usize,
    pub phi_over_pi: f64,
    /// Pairs of method names whose counts differ by more than one.
    pub disagreements: Vec<(String, String)>,
}

pub fn bound_count_consistency(
    curve: &PotentialCurve,
    mu: f64,
    grid: &GridSpec,
    opts: &ZeroEnergyOpts,
) -> Result<CountReport> {
    let phase = semiclassical_phase(curve, mu)?;
    let zero = propagate_zero(curve, mu, opts.r_max, opts.oversample)?;
    let g = std::sync::Arc::new(MappedGrid::build(|r| curve.eval_rel(r), mu, grid)?);
    let h = mfgm::build_hamiltonian(&g, curve);
    let spec = mfgm::solve_bound(&h)?;
    let counts = [
        ("semiclassical".to_string(), phase.bound_count_semiclassical),
        ("zero_energy_nodes".to_string(), zero.node_count as i64),
        ("grid_diagonalization".to_string(), spec.count() as i64),
    ];
    let mut disagreements = Vec::new();
    for i in 0..counts.len() {
        for j in (i + 1)..counts.len() {
            if (counts[i].1 - counts[j].1).abs() > 1 {
                disagreements.push((counts[i].0.clone(), counts[j].0.clone()));
            }
        }
    }
    Ok(CountReport {
        semiclassical: phase.bound_count_semiclassical,
        zero_energy_nodes: zero.node_count,
        grid_diagonalization: spec.count(),
        phi_over_pi: phase.phi / std::f64::consts::PI,
        disagreements,
    })
}
