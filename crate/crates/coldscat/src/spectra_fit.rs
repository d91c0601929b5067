//! Photoassociation Franck-Condon spectra, spectral-node detection,
//! inner-wall fitting to target node positions, and the sensitivity scans
//! (node displacement, critical dispersion coefficient).

use std::sync::Arc;

use rayon::prelude::*;

use crate::constants::CM1_PER_HARTREE;
use crate::error::{Error, Result};
use crate::mfgm::{build_hamiltonian, GridSpec, MappedGrid, WavefunctionOnGrid};
use crate::potentials::{InnerWallDeformation, PotentialCurve};
use crate::quadrature;
use crate::scattering::{self, semiclassical_phase, ZeroEnergyOpts};

#[derive(Debug, Clone, Copy)]
pub struct FcEntry {
    /// Vibrational index of the excited level.
    pub v: usize,
    /// Binding energy of the level below its asymptote (cm⁻¹, positive).
    pub detuning_cm1: f64,
    /// Relative Franck-Condon factor (max normalized to 1).
    pub fc: f64,
}

#[derive(Debug, Clone)]
pub struct FCSpectrum {
    /// Entries ordered by increasing detuning.
    pub entries: Vec<FcEntry>,
    /// Collision energy of the continuum state used (hartree).
    pub collision_energy: f64,
}

impl FCSpectrum {
    /// Keep only entries with detuning at or below the cutoff (cm⁻¹),
    /// renormalized so the largest retained factor is 1.
    pub fn truncated(&self, max_detuning_cm1: f64) -> FCSpectrum {
        let mut entries: Vec<FcEntry> = self
            .entries
            .iter()
            .filter(|e| e.detuning_cm1 <= max_detuning_cm1)
            .cloned()
            .collect();
        let max = entries.iter().map(|e| e.fc).fold(0.0_f64, f64::max);
        if max > 0.0 {
            for e in entries.iter_mut() {
                e.fc /= max;
            }
        }
        FCSpectrum {
            entries,
            collision_energy: self.collision_energy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeProvenance {
    Computed,
    ExperimentalTarget,
}

#[derive(Debug, Clone)]
pub struct NodeSet {
    /// Node detunings in cm⁻¹, strictly increasing.
    pub detunings: Vec<f64>,
    /// False marks a shallow minimum below the prominence threshold.
    pub pronounced: Vec<bool>,
    pub provenance: NodeProvenance,
}

impl NodeSet {
    pub fn from_targets(detunings: Vec<f64>) -> Result<Self> {
        if detunings.is_empty() {
            return Err(Error::EmptyTargets);
        }
        let mut d = detunings;
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = d.len();
        Ok(NodeSet {
            detunings: d,
            pronounced: vec![true; n],
            provenance: NodeProvenance::ExperimentalTarget,
        })
    }
}

/// Franck-Condon factors between every bound level of the excited curve and
/// the ground continuum state nearest `e_collision` (box-discretized), on a
/// shared mapped grid. Factors are relative; the global scale is arbitrary.
pub fn fc_spectrum(
    excited: &PotentialCurve,
    ground: &PotentialCurve,
    mu: f64,
    e_collision: f64,
    grid_spec: &GridSpec,
) -> Result<FCSpectrum> {
    let engine = FcEngine::new(excited, ground, mu, e_collision, grid_spec)?;
    engine.spectrum(ground)
}

/// Caches the grid and the excited-level solve so that a wall-fit iteration
/// only re-solves the ground channel.
pub struct FcEngine {
    grid: Arc<MappedGrid>,
    excited_levels: Vec<(usize, f64, WavefunctionOnGrid)>,
    e_collision: f64,
}

impl FcEngine {
    pub fn new(
        excited: &PotentialCurve,
        ground: &PotentialCurve,
        mu: f64,
        e_collision: f64,
        grid_spec: &GridSpec,
    ) -> Result<Self> {
        if e_collision <= 0.0 {
            return Err(Error::Invalid("collision energy must be positive".into()));
        }
        let g = ground.clone();
        let e = excited.clone();
        let grid = Arc::new(MappedGrid::build(
            move |r| g.eval_rel(r).min(e.eval_rel(r)),
            mu,
            grid_spec,
        )?);
        let h_e = build_hamiltonian(&grid, excited);
        let levels = crate::mfgm::solve_bound(&h_e)?;
        let excited_levels = levels
            .levels
            .into_iter()
            .map(|l| (l.v, l.energy, l.wf))
            .collect();
        Ok(FcEngine {
            grid,
            excited_levels,
            e_collision,
        })
    }

    /// Continuum state of the (possibly deformed) ground curve nearest the
    /// engine's collision energy.
    fn continuum_state(&self, ground: &PotentialCurve) -> Result<WavefunctionOnGrid> {
        let h_g = build_hamiltonian(&self.grid, ground);
        let sol = h_g.diagonalize()?;
        let idx = sol
            .nearest_above(self.e_collision, 0.0)
            .ok_or(Error::NoContinuumNear {
                e: self.e_collision,
                window: self.e_collision,
            })?;
        let e = sol.energy(idx);
        if (e - self.e_collision).abs() > 4.0 * self.e_collision.max(sol.level_spacing(idx)) {
            return Err(Error::NoContinuumNear {
                e: self.e_collision,
                window: (e - self.e_collision).abs(),
            });
        }
        Ok(sol.state(idx))
    }

    pub fn spectrum(&self, ground: &PotentialCurve) -> Result<FCSpectrum> {
        let cont = self.continuum_state(ground)?;
        let mut entries: Vec<FcEntry> = self
            .excited_levels
            .iter()
            .map(|(v, e_rel, wf)| {
                let ov = crate::mfgm::overlap_with(wf, 0, &cont, 0, |_| 1.0).unwrap_or(0.0);
                FcEntry {
                    v: *v,
                    detuning_cm1: -e_rel * CM1_PER_HARTREE,
                    fc: ov * ov,
                }
            })
            .collect();
        entries.sort_by(|a, b| a.detuning_cm1.partial_cmp(&b.detuning_cm1).unwrap());
        let max = entries.iter().map(|e| e.fc).fold(0.0_f64, f64::max);
        if max > 0.0 {
            for e in entries.iter_mut() {
                e.fc /= max;
            }
        }
        Ok(FCSpectrum {
            entries,
            collision_energy: cont.energy,
        })
    }

    pub fn grid(&self) -> &Arc<MappedGrid> {
        &self.grid
    }

    pub fn excited_level(&self, v: usize) -> Option<&(usize, f64, WavefunctionOnGrid)> {
        self.excited_levels.get(v)
    }

    pub fn ground_continuum(&self, ground: &PotentialCurve) -> Result<WavefunctionOnGrid> {
        self.continuum_state(ground)
    }
}

/// Local minima of the FC factors against detuning, refined by a parabola
/// through each minimum and its neighbors. Shallow minima (less than
/// `prominence` below the adjacent maxima) are flagged, not dropped.
pub fn detect_nodes(spectrum: &FCSpectrum, prominence: f64) -> Result<NodeSet> {
    let e = &spectrum.entries;
    if e.len() < 5 {
        return Err(Error::TooFewSpectrumEntries {
            need: 5,
            got: e.len(),
        });
    }
    let mut detunings = Vec::new();
    let mut pronounced = Vec::new();
    for i in 1..e.len() - 1 {
        if !(e[i].fc <= e[i - 1].fc && e[i].fc <= e[i + 1].fc) {
            continue;
        }
        if e[i].fc == e[i - 1].fc && e[i].fc == e[i + 1].fc {
            continue; // flat stretch, no bracketed minimum
        }
        // parabolic refinement through (x0,y0),(x1,y1),(x2,y2)
        let (x0, y0) = (e[i - 1].detuning_cm1, e[i - 1].fc);
        let (x1, y1) = (e[i].detuning_cm1, e[i].fc);
        let (x2, y2) = (e[i + 1].detuning_cm1, e[i + 1].fc);
        let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
        let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
        let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
        let x_min = if a > 0.0 { -b / (2.0 * a) } else { x1 };
        let x_min = x_min.clamp(x0, x2);
        // prominence against the nearest local maxima on either side
        let mut left_max = y0;
        for j in (0..i).rev() {
            left_max = left_max.max(e[j].fc);
            if j > 0 && e[j].fc >= e[j - 1].fc && e[j].fc >= e[j + 1].fc {
                break;
            }
        }
        let mut right_max = y2;
        for j in i + 1..e.len() {
            right_max = right_max.max(e[j].fc);
            if j + 1 < e.len() && e[j].fc >= e[j + 1].fc && e[j].fc >= e[j - 1].fc {
                break;
            }
        }
        detunings.push(x_min);
        pronounced.push(y1 * prominence <= left_max.min(right_max));
    }
    Ok(NodeSet {
        detunings,
        pronounced,
        provenance: NodeProvenance::Computed,
    })
}

/// rms distance between computed and target node detunings under one-to-one
/// greedy nearest matching (cm⁻¹). Unmatched targets contribute a penalty.
pub fn node_rms(computed: &NodeSet, targets: &NodeSet) -> f64 {
    if computed.detunings.is_empty() || targets.detunings.is_empty() {
        return f64::INFINITY;
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (ti, &t) in targets.detunings.iter().enumerate() {
        for (ci, &c) in computed.detunings.iter().enumerate() {
            pairs.push(((t - c).abs(), ti, ci));
        }
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut used_t = vec![false; targets.detunings.len()];
    let mut used_c = vec![false; computed.detunings.len()];
    let mut acc = 0.0;
    let mut matched = 0usize;
    for (d, ti, ci) in pairs {
        if used_t[ti] || used_c[ci] {
            continue;
        }
        used_t[ti] = true;
        used_c[ci] = true;
        acc += d * d;
        matched += 1;
    }
    let unmatched = targets.detunings.len() - matched;
    if unmatched > 0 {
        // a missing node is worse than any plausible displacement
        acc += unmatched as f64 * 1e6;
    }
    (acc / targets.detunings.len() as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitBranch {
    /// λ < 0: deeper well, one extra bound level.
    PhaseAdded,
    /// λ > 0: shallower well, one level fewer.
    PhaseRemoved,
}

impl FitBranch {
    pub fn name(self) -> &'static str {
        match self {
            FitBranch::PhaseAdded => "phase_added",
            FitBranch::PhaseRemoved => "phase_removed",
        }
    }
}

/// Deformation shape (center, width); the amplitude is the fit parameter.
#[derive(Debug, Clone, Copy)]
pub struct DeformationShape {
    pub center: f64,
    pub sigma: f64,
}

/// Everything needed to fit the ground inner wall to target node positions.
#[derive(Clone)]
pub struct FitProblem {
    pub ground: PotentialCurve,
    pub excited: PotentialCurve,
    pub mu: f64,
    pub e_collision: f64,
    pub targets: NodeSet,
    pub shape: DeformationShape,
    pub branch: FitBranch,
    pub grid: GridSpec,
    /// Node rms tolerance in cm⁻¹.
    pub tolerance_cm1: f64,
    /// Prominence factor handed to node detection.
    pub prominence: f64,
    /// Only spectrum entries up to this detuning participate in the fit.
    /// Near-dissociation nodes sample the long-range wavefunction, where a
    /// short-range phase change acts rigidly; deeper nodes do not realign
    /// across the ±π branches.
    pub max_detuning_cm1: f64,
}

#[derive(Debug, Clone)]
pub struct WallFitResult {
    pub lambda_star: f64,
    pub branch: FitBranch,
    pub bound_count: usize,
    pub node_residual_cm1: f64,
    pub fitted_curve: PotentialCurve,
}

fn deformed(p: &FitProblem, lambda: f64) -> Result<PotentialCurve> {
    p.ground.apply_deformation(InnerWallDeformation {
        amplitude: lambda,
        center: p.shape.center,
        sigma: p.shape.sigma,
    })
}

/// Amplitude at which the semiclassical phase has moved by `dphi` radians
/// (sign of λ chosen by the branch), found by expansion and bisection.
fn lambda_for_phase_shift(p: &FitProblem, dphi: f64) -> Result<f64> {
    let phi0 = semiclassical_phase(&p.ground, p.mu)?.phi;
    let sign = match p.branch {
        FitBranch::PhaseRemoved => 1.0,
        FitBranch::PhaseAdded => -1.0,
    };
    let target = dphi.abs();
    let mut hi = 1e-6;
    for _ in 0..40 {
        let phi = semiclassical_phase(&deformed(p, sign * hi)?, p.mu)?.phi;
        if (phi - phi0).abs() >= target {
            break;
        }
        hi *= 2.0;
    }
    let lam = quadrature::bisect(
        |l| {
            let phi = semiclassical_phase(&deformed(p, sign * l).unwrap(), p.mu)
                .map(|r| r.phi)
                .unwrap_or(phi0);
            (phi - phi0).abs() - target
        },
        0.0,
        hi,
        70,
    );
    Ok(sign * lam)
}

/// Caching fitter: the node positions at a given amplitude are independent of
/// the target list, so sensitivity refits against displaced targets reuse
/// every spectrum computed so far.
pub struct WallFitter {
    problem: FitProblem,
    engine: FcEngine,
    cache: std::sync::Mutex<std::collections::HashMap<u64, NodeSet>>,
}

impl WallFitter {
    pub fn new(problem: FitProblem) -> Result<Self> {
        let engine = FcEngine::new(
            &problem.excited,
            &problem.ground,
            problem.mu,
            problem.e_collision,
            &problem.grid,
        )?;
        Ok(WallFitter {
            problem,
            engine,
            cache: std::sync::Mutex::new(std::collections::HashMap::new()),
        })
    }

    pub fn problem(&self) -> &FitProblem {
        &self.problem
    }

    fn nodes_at(&self, lambda: f64) -> Result<NodeSet> {
        let key = lambda.to_bits();
        if let Some(n) = self.cache.lock().unwrap().get(&key) {
            return Ok(n.clone());
        }
        let p = &self.problem;
        let spectrum = self.engine.spectrum(&deformed(p, lambda)?)?;
        let nodes = detect_nodes(&spectrum.truncated(p.max_detuning_cm1), p.prominence)?;
        self.cache.lock().unwrap().insert(key, nodes.clone());
        Ok(nodes)
    }

    fn rms_against(&self, lambda: f64, targets: &NodeSet) -> f64 {
        self.nodes_at(lambda)
            .map(|n| node_rms(&n, targets))
            .unwrap_or(f64::INFINITY)
    }

    /// Fit the amplitude against an arbitrary target list (branch and shape
    /// from the stored problem).
    pub fn fit_targets(&self, targets: &NodeSet, tolerance_cm1: f64) -> Result<WallFitResult> {
        if targets.detunings.is_empty() {
            return Err(Error::EmptyTargets);
        }
        let p = &self.problem;
        let lam_edge = lambda_for_phase_shift(p, 1.55 * std::f64::consts::PI)?;
        let n_scan = 41;
        let lams: Vec<f64> = (0..=n_scan)
            .map(|i| lam_edge * i as f64 / n_scan as f64)
            .collect();
        let samples: Vec<(f64, f64)> = lams
            .par_iter()
            .map(|&lam| (lam, self.rms_against(lam, targets)))
            .collect();
        let (mut best_lam, mut best_rms) = samples[0];
        for &(l, r) in &samples {
            if r < best_rms {
                best_lam = l;
                best_rms = r;
            }
        }
        // golden refinement in the bracketing neighborhood
        let step = lam_edge / n_scan as f64;
        let bracket_lo = lam_edge.min(0.0);
        let bracket_hi = lam_edge.max(0.0);
        let lo = (best_lam - step.abs()).max(bracket_lo);
        let hi = (best_lam + step.abs()).min(bracket_hi);
        let (lam_ref, rms_ref) =
            quadrature::golden_min(|l| self.rms_against(l, targets), lo, hi, 40);
        let (lambda_star, node_residual_cm1) = if rms_ref < best_rms {
            (lam_ref, rms_ref)
        } else {
            (best_lam, best_rms)
        };
        if node_residual_cm1 > tolerance_cm1 {
            return Err(Error::FitFailed {
                best: node_residual_cm1,
                tol: tolerance_cm1,
            });
        }
        let fitted_curve = deformed(p, lambda_star)?;
        let zopts = ZeroEnergyOpts::default();
        let count = scattering::scattering_length_zero_energy(&fitted_curve, p.mu, &zopts)
            .map(|r| r.node_count)
            .unwrap_or(0);
        Ok(WallFitResult {
            lambda_star,
            branch: p.branch,
            bound_count: count,
            node_residual_cm1,
            fitted_curve,
        })
    }

    pub fn fit(&self) -> Result<WallFitResult> {
        self.fit_targets(&self.problem.targets.clone(), self.problem.tolerance_cm1)
    }
}

/// One-dimensional least-squares fit of the deformation amplitude so the
/// computed spectral nodes match the targets; the branch selects the λ sign
/// region that adds or removes about π of accumulated phase.
pub fn fit_inner_wall(p: &FitProblem) -> Result<WallFitResult> {
    WallFitter::new(p.clone())?.fit()
}

/// Refit with the designated target node displaced by ±shift (cm⁻¹) and
/// return the scattering lengths for the (-shift, +shift) displacements.
pub fn node_shift_sensitivity(
    p: &FitProblem,
    target_idx: usize,
    shift_cm1: f64,
    zopts: &ZeroEnergyOpts,
) -> Result<(f64, f64)> {
    let fitter = WallFitter::new(p.clone())?;
    node_shift_sensitivity_with(&fitter, target_idx, shift_cm1, zopts)
}

/// Sensitivity run on an existing fitter (reuses all cached spectra).
pub fn node_shift_sensitivity_with(
    fitter: &WallFitter,
    target_idx: usize,
    shift_cm1: f64,
    zopts: &ZeroEnergyOpts,
) -> Result<(f64, f64)> {
    let p = fitter.problem();
    if target_idx >= p.targets.detunings.len() {
        return Err(Error::Invalid(format!(
            "target index {target_idx} out of range"
        )));
    }
    if shift_cm1 == 0.0 {
        let fit = fitter.fit()?;
        let a = scattering::scattering_length_zero_energy(&fit.fitted_curve, p.mu, zopts)?.a;
        return Ok((a, a));
    }
    let run = |s: f64| -> Result<f64> {
        let mut targets = p.targets.clone();
        targets.detunings[target_idx] += s;
        // a displaced node list may need a little more slack
        let tol = p.tolerance_cm1.max(shift_cm1.abs() * 1.5);
        let fit = fitter.fit_targets(&targets, tol)?;
        Ok(scattering::scattering_length_zero_energy(&fit.fitted_curve, p.mu, zopts)?.a)
    };
    let a_minus = run(-shift_cm1)?;
    let a_plus = run(shift_cm1)?;
    Ok((a_minus, a_plus))
}

#[derive(Debug, Clone)]
pub struct CriticalC6Result {
    /// (C6, a) per scanned value.
    pub points: Vec<(f64, f64)>,
    /// C6 where 1/a crosses zero, bisected to 0.1% of the bracket.
    pub transition: Option<f64>,
    pub policy: String,
}

/// Scattering length across a family of curves parameterized by C6; locates
/// the divergence (new bound state) where 1/a passes through zero.
pub fn critical_c6_scan<F>(
    family: F,
    mu: f64,
    c6_values: &[f64],
    zopts: &ZeroEnergyOpts,
    policy: &str,
) -> Result<CriticalC6Result>
where
    F: Fn(f64) -> Result<PotentialCurve> + Sync,
{
    let mut vals: Vec<f64> = c6_values.to_vec();
    vals.dedup();
    let zopts = ZeroEnergyOpts {
        allow_extension: false,
        ..zopts.clone()
    };
    let zopts = &zopts;
    let points: Vec<(f64, f64)> = vals
        .par_iter()
        .map(|&c6| {
            let a = family(c6)
                .and_then(|c| scattering::scattering_length_zero_energy(&c, mu, zopts))
                .map(|r| r.a)
                .unwrap_or(f64::NAN);
            (c6, a)
        })
        .collect();
    let inv = |a: f64| 1.0 / a;
    let mut transition = None;
    for w in points.windows(2) {
        let (c1, a1) = w[0];
        let (c2, a2) = w[1];
        if !a1.is_finite() || !a2.is_finite() {
            continue;
        }
        if inv(a1) * inv(a2) < 0.0 {
            let (mut lo, mut hi) = (c1, c2);
            let mut f_lo = inv(a1);
            let width = (hi - lo).abs();
            while (hi - lo).abs() > 1e-3 * width {
                let mid = 0.5 * (lo + hi);
                let a_mid = family(mid)
                    .and_then(|c| scattering::scattering_length_zero_energy(&c, mu, zopts))
                    .map(|r| r.a)
                    .unwrap_or(f64::NAN);
                if !a_mid.is_finite() {
                    break;
                }
                if (f_lo < 0.0) == (inv(a_mid) < 0.0) {
                    lo = mid;
                    f_lo = inv(a_mid);
                } else {
                    hi = mid;
                }
            }
            transition = Some(0.5 * (lo + hi));
            break;
        }
    }
    Ok(CriticalC6Result {
        points,
        transition,
        policy: policy.to_string(),
    })
}

/// Outer turning point of the excited curve at a binding energy below its
/// asymptote (the Condon radius of the corresponding level).
pub fn condon_radius(excited: &PotentialCurve, e_rel: f64) -> Option<f64> {
    // geometric outward march looking for V_rel crossing e_rel from below
    let r_hi = excited.tail_from() * 8.0;
    let mut prev_r = (excited.r_join() * 0.2).max(1e-3);
    let mut prev = excited.eval_rel(prev_r) - e_rel;
    while prev_r < r_hi {
        let r = (prev_r * 1.0005).min(r_hi);
        let cur = excited.eval_rel(r) - e_rel;
        if prev < 0.0 && cur >= 0.0 {
            return Some(quadrature::bisect(
                |x| excited.eval_rel(x) - e_rel,
                prev_r,
                r,
                80,
            ));
        }
        prev = cur;
        prev_r = r;
        if r >= r_hi {
            break;
        }
    }
    None
}
