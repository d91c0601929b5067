//! Diagonalization: bound spectra, box-discretized continuum states, and
//! complex eigenpairs of the absorbing-boundary Hamiltonian.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::mfgm::grid::MappedGrid;
use crate::mfgm::hamiltonian::{cap_apply, HamiltonianMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormConvention {
    /// Σ ψ_j² w_j = 1 over the box.
    UnitBox,
    /// Scaled by the box density of states, ⟨E|E'⟩ → δ(E - E').
    EnergyNormalized,
}

/// One bound or box-discretized continuum state; one or two channels of
/// radial amplitudes u(R_j) on the shared grid.
#[derive(Debug, Clone)]
pub struct WavefunctionOnGrid {
    /// Energy relative to the open/ground threshold, in hartree.
    pub energy: f64,
    pub channels: Vec<Vec<f64>>,
    pub norm: NormConvention,
    pub grid: Arc<MappedGrid>,
}

impl WavefunctionOnGrid {
    /// Fraction of the total norm carried by one channel.
    pub fn channel_norm_fraction(&self, ch: usize) -> f64 {
        let w = self.grid.weights();
        let part: f64 = self.channels[ch]
            .iter()
            .zip(w)
            .map(|(&u, &wj)| u * u * wj)
            .sum();
        let total: f64 = self
            .channels
            .iter()
            .map(|c| c.iter().zip(w).map(|(&u, &wj)| u * u * wj).sum::<f64>())
            .sum();
        part / total
    }

    /// Norm restricted to R ≤ r_cut, summed over channels.
    pub fn norm_below(&self, r_cut: f64) -> f64 {
        let w = self.grid.weights();
        let r = self.grid.r();
        let mut acc = 0.0;
        for c in &self.channels {
            for j in 0..r.len() {
                if r[j] <= r_cut {
                    acc += c[j] * c[j] * w[j];
                }
            }
        }
        acc
    }

    /// Rescale to energy normalization given the local level spacing dE/dn.
    pub fn to_energy_normalized(&self, de_dn: f64) -> Self {
        let s = 1.0 / de_dn.sqrt();
        let mut out = self.clone();
        for c in out.channels.iter_mut() {
            for v in c.iter_mut() {
                *v *= s;
            }
        }
        out.norm = NormConvention::EnergyNormalized;
        out
    }
}

/// Weighted overlap ⟨a|f(R)|b⟩ over the shared grid (channel-resolved inputs).
pub fn overlap_with<F: Fn(f64) -> f64>(
    a: &WavefunctionOnGrid,
    ch_a: usize,
    b: &WavefunctionOnGrid,
    ch_b: usize,
    f: F,
) -> Result<f64> {
    if !Arc::ptr_eq(&a.grid, &b.grid) && !a.grid.same_as(&b.grid) {
        return Err(Error::GridMismatch);
    }
    let w = a.grid.weights();
    let r = a.grid.r();
    let mut acc = 0.0;
    for j in 0..r.len() {
        acc += a.channels[ch_a][j] * f(r[j]) * b.channels[ch_b][j] * w[j];
    }
    Ok(acc)
}

#[derive(Debug, Clone)]
pub struct BoundLevel {
    pub v: usize,
    /// Energy relative to the open threshold (negative for true bound states).
    pub energy: f64,
    pub wf: WavefunctionOnGrid,
}

#[derive(Debug, Clone)]
pub struct BoundSpectrum {
    pub levels: Vec<BoundLevel>,
}

impl BoundSpectrum {
    pub fn count(&self) -> usize {
        self.levels.len()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }
}

/// Full symmetric eigendecomposition, energies sorted ascending.
pub struct EigenSolution {
    energies_abs: Vec<f64>,
    vectors: DMatrix<f64>,
    grid: Arc<MappedGrid>,
    channels: usize,
    threshold: f64,
    bound_cutoff: f64,
}

impl HamiltonianMatrix {
    pub fn diagonalize(&self) -> Result<EigenSolution> {
        if self.cap().is_some() {
            return Err(Error::AbsorberNotSupported);
        }
        let size = self.size();
        let eig =
            nalgebra::SymmetricEigen::try_new(self.matrix().clone(), f64::EPSILON, 1000 * size)
                .ok_or(Error::EigenFailed(size))?;
        let mut idx: Vec<usize> = (0..size).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let mut energies = Vec::with_capacity(size);
        let mut vectors = DMatrix::<f64>::zeros(size, size);
        for (col, &i) in idx.iter().enumerate() {
            energies.push(eig.eigenvalues[i]);
            let mut v = eig.eigenvectors.column(i).clone_owned();
            // deterministic sign: largest-magnitude component positive
            let mut imax = 0;
            for k in 0..size {
                if v[k].abs() > v[imax].abs() {
                    imax = k;
                }
            }
            if v[imax] < 0.0 {
                vshape_neg(&mut v);
            }
            vectors.set_column(col, &v);
        }
        Ok(EigenSolution {
            energies_abs: energies,
            vectors,
            grid: Arc::clone(self.grid()),
            channels: self.channels(),
            threshold: self.threshold(),
            bound_cutoff: self.bound_cutoff(),
        })
    }
}

fn vshape_neg(v: &mut DVector<f64>) {
    for x in v.iter_mut() {
        *x = -*x;
    }
}

impl EigenSolution {
    pub fn len(&self) -> usize {
        self.energies_abs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies_abs.is_empty()
    }

    /// Energy of state i relative to the open threshold.
    pub fn energy(&self, i: usize) -> f64 {
        self.energies_abs[i] - self.threshold
    }

    /// Materialize state i as channel-resolved radial amplitudes u(R_j),
    /// unit-box normalized.
    pub fn state(&self, i: usize) -> WavefunctionOnGrid {
        let n = self.grid.n;
        let w = self.grid.weights();
        let col = self.vectors.column(i);
        let mut channels = Vec::with_capacity(self.channels);
        for ch in 0..self.channels {
            let mut u = Vec::with_capacity(n);
            for j in 0..n {
                u.push(col[ch * n + j] / w[j].sqrt());
            }
            channels.push(u);
        }
        WavefunctionOnGrid {
            energy: self.energy(i),
            channels,
            norm: NormConvention::UnitBox,
            grid: Arc::clone(&self.grid),
        }
    }

    /// Local box level spacing dE/dn around state i.
    pub fn level_spacing(&self, i: usize) -> f64 {
        let n = self.len();
        if n < 2 {
            return f64::NAN;
        }
        if i == 0 {
            self.energies_abs[1] - self.energies_abs[0]
        } else if i == n - 1 {
            self.energies_abs[n - 1] - self.energies_abs[n - 2]
        } else {
            0.5 * (self.energies_abs[i + 1] - self.energies_abs[i - 1])
        }
    }

    /// All states below the bound cutoff, indexed from v = 0.
    pub fn bound_spectrum(&self) -> BoundSpectrum {
        let mut levels = Vec::new();
        for i in 0..self.len() {
            if self.energies_abs[i] < self.bound_cutoff {
                levels.push(BoundLevel {
                    v: levels.len(),
                    energy: self.energy(i),
                    wf: self.state(i),
                });
            }
        }
        BoundSpectrum { levels }
    }

    /// Indices of states with relative energy in (lo, hi].
    pub fn indices_in_window(&self, lo: f64, hi: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| {
                let e = self.energy(i);
                e > lo && e <= hi
            })
            .collect()
    }

    /// Index of the state nearest the requested relative energy, restricted to
    /// E > lo.
    pub fn nearest_above(&self, e_target: f64, lo: f64) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.len() {
            let e = self.energy(i);
            if e <= lo {
                continue;
            }
            let d = (e - e_target).abs();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        best.map(|(i, _)| i)
    }
}

/// All bound eigenpairs of a Hamiltonian without absorber.
pub fn solve_bound(h: &HamiltonianMatrix) -> Result<BoundSpectrum> {
    Ok(h.diagonalize()?.bound_spectrum())
}

/// Box-discretized continuum states with relative energies in (e_lo, e_hi].
/// An empty window is an error carrying the nearest available box energy.
pub fn threshold_states(
    h: &HamiltonianMatrix,
    e_lo: f64,
    e_hi: f64,
) -> Result<Vec<WavefunctionOnGrid>> {
    if e_lo < 0.0 {
        return Err(Error::Invalid(
            "threshold window must start at or above the asymptote".into(),
        ));
    }
    let sol = h.diagonalize()?;
    let idx = sol.indices_in_window(e_lo.max(0.0), e_hi);
    if idx.is_empty() {
        let nearest = sol
            .nearest_above(0.5 * (e_lo + e_hi), 0.0)
            .map(|i| sol.energy(i))
            .unwrap_or(f64::NAN);
        return Err(Error::EmptyEnergyWindow { nearest });
    }
    Ok(idx.into_iter().map(|i| sol.state(i)).collect())
}

/// Refine one eigenpair by inverse iteration at its computed eigenvalue.
/// The dense solver leaves eigenvector errors of order ε·‖H‖/gap, which for
/// near-threshold box states can dominate asymptotic-phase extractions.
pub fn polish_state(
    h: &HamiltonianMatrix,
    sol: &EigenSolution,
    idx: usize,
) -> Result<WavefunctionOnGrid> {
    if h.cap().is_some() {
        return Err(Error::AbsorberNotSupported);
    }
    let size = h.size();
    let e_abs = sol.energy(idx) + h.threshold();
    let mut a = h.matrix().clone();
    for i in 0..size {
        a[(i, i)] -= e_abs;
    }
    let lu = a.lu();
    let mut v = sol.vectors.column(idx).clone_owned();
    for _ in 0..2 {
        let Some(y) = lu.solve(&v) else { break };
        let nrm = y.norm();
        if !nrm.is_finite() || nrm == 0.0 {
            break;
        }
        v = y / nrm;
    }
    // deterministic sign
    let mut imax = 0;
    for k in 0..size {
        if v[k].abs() > v[imax].abs() {
            imax = k;
        }
    }
    if v[imax] < 0.0 {
        vshape_neg(&mut v);
    }
    let n = h.grid().n;
    let w = h.grid().weights();
    let mut channels = Vec::with_capacity(h.channels());
    for ch in 0..h.channels() {
        let mut u = Vec::with_capacity(n);
        for j in 0..n {
            u.push(v[ch * n + j] / w[j].sqrt());
        }
        channels.push(u);
    }
    Ok(WavefunctionOnGrid {
        energy: sol.energy(idx),
        channels,
        norm: NormConvention::UnitBox,
        grid: Arc::clone(h.grid()),
    })
}

/// One complex eigenpair of the absorbing-boundary Hamiltonian.
#[derive(Debug, Clone)]
pub struct CapState {
    /// Energy relative to the open threshold; Im ≤ 0 for a proper absorber.
    pub energy: Complex<f64>,
    pub channels: Vec<Vec<Complex<f64>>>,
    pub grid: Arc<MappedGrid>,
}

/// Shifted inverse iteration on the complex-symmetric matrix H - iηW, seeded
/// near a relative energy (typically a fixed-boundary eigenvalue).
pub fn cap_state_near(
    h: &HamiltonianMatrix,
    e_guess_rel: f64,
    seed: Option<&WavefunctionOnGrid>,
) -> Result<CapState> {
    let size = h.size();
    let n = h.grid().n;
    let mut sigma = Complex::new(h.threshold() + e_guess_rel, 0.0);
    let scale = h.scale();

    // starting vector: seed wavefunction mapped back to DVR coordinates
    let mut z: DVector<Complex<f64>> = match seed {
        Some(wf) => {
            let w = h.grid().weights();
            let mut v = DVector::zeros(size);
            for ch in 0..h.channels().min(wf.channels.len()) {
                for j in 0..n {
                    v[ch * n + j] = Complex::new(wf.channels[ch][j] * w[j].sqrt(), 0.0);
                }
            }
            v
        }
        None => DVector::from_element(size, Complex::new(1.0, 0.0)),
    };
    normalize_c(&mut z);

    let build = |s: Complex<f64>| -> DMatrix<Complex<f64>> {
        let mut a = DMatrix::<Complex<f64>>::zeros(size, size);
        for i in 0..size {
            for j in 0..size {
                a[(i, j)] = Complex::new(h.matrix()[(i, j)], 0.0);
            }
        }
        if let Some(cap) = h.cap() {
            for ch in 0..h.channels() {
                for j in 0..n {
                    a[(ch * n + j, ch * n + j)] += Complex::new(0.0, -cap.eta * cap.w[j]);
                }
            }
        }
        for i in 0..size {
            a[(i, i)] -= s;
        }
        a
    };

    let mut lu = build(sigma).lu();
    let mut best: Option<(f64, Complex<f64>, DVector<Complex<f64>>)> = None;
    for it in 0..80 {
        let y = lu.solve(&z).ok_or(Error::CapIterationFailed(e_guess_rel))?;
        z = y;
        normalize_c(&mut z);
        // bilinear (complex-symmetric) Rayleigh quotient
        let hz = cap_apply(h, &z);
        let num: Complex<f64> = z.iter().zip(hz.iter()).map(|(a, b)| a * b).sum();
        let den: Complex<f64> = z.iter().map(|a| a * a).sum();
        let lambda = num / den;
        let mut resid = 0.0_f64;
        for i in 0..size {
            resid = resid.max((hz[i] - lambda * z[i]).norm());
        }
        if best.as_ref().map_or(true, |(br, _, _)| resid < *br) {
            best = Some((resid, lambda, z.clone()));
        }
        // near-threshold box states sit 1e-13·scale apart; the eigenvector
        // must be converged to the rounding floor to keep them unmixed
        if resid <= 3e-15 * scale {
            let w = h.grid().weights();
            let mut channels = Vec::with_capacity(h.channels());
            for ch in 0..h.channels() {
                let mut u = Vec::with_capacity(n);
                for j in 0..n {
                    u.push(z[ch * n + j] / Complex::new(w[j].sqrt(), 0.0));
                }
                channels.push(u);
            }
            return Ok(CapState {
                energy: lambda - Complex::new(h.threshold(), 0.0),
                channels,
                grid: Arc::clone(h.grid()),
            });
        }
        // refresh the shift every few sweeps for cubic-ish convergence
        if it % 4 == 3 {
            sigma = lambda;
            lu = build(sigma).lu();
        }
    }
    // accept the best iterate if it reached the practical rounding floor
    if let Some((resid, lambda, z)) = best {
        if resid <= 5e-14 * scale {
            let w = h.grid().weights();
            let n = h.grid().n;
            let mut channels = Vec::with_capacity(h.channels());
            for ch in 0..h.channels() {
                let mut u = Vec::with_capacity(n);
                for j in 0..n {
                    u.push(z[ch * n + j] / Complex::new(w[j].sqrt(), 0.0));
                }
                channels.push(u);
            }
            return Ok(CapState {
                energy: lambda - Complex::new(h.threshold(), 0.0),
                channels,
                grid: Arc::clone(h.grid()),
            });
        }
    }
    Err(Error::CapIterationFailed(e_guess_rel))
}

fn normalize_c(z: &mut DVector<Complex<f64>>) {
    let nrm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for v in z.iter_mut() {
        *v /= nrm;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mfgm::hamiltonian::build_hamiltonian;
    use crate::potentials::PotentialCurve;

    #[test]
    fn particle_in_box_levels() {
        let mu = 50.0;
        let (r0, r1) = (2.0, 14.0);
        let grid = Arc::new(MappedGrid::uniform(128, r0, r1, mu).unwrap());
        let h = build_hamiltonian(&grid, &PotentialCurve::free("v0"));
        let sol = h.diagonalize().unwrap();
        let l = r1 - r0;
        for m in 1..=10 {
            let exact = (m as f64 * std::f64::consts::PI / l).powi(2) / (2.0 * mu);
            let got = sol.energy(m - 1);
            assert!(
                ((got - exact) / exact).abs() < 1e-10,
                "level {m}: {got} vs {exact}"
            );
        }
        // empty box binds nothing
        assert_eq!(solve_bound(&h).unwrap().count(), 0);
    }

    #[test]
    fn bound_states_orthonormal() {
        let mu = 200.0;
        let grid = Arc::new(MappedGrid::uniform(160, 0.5, 40.0, mu).unwrap());
        let curve = PotentialCurve::morse("m", 5e-2, 6.0, 0.6);
        let h = build_hamiltonian(&grid, &curve);
        let spec = solve_bound(&h).unwrap();
        assert!(spec.count() >= 3);
        for a in &spec.levels {
            for b in &spec.levels {
                let ov = overlap_with(&a.wf, 0, &b.wf, 0, |_| 1.0).unwrap();
                let expect = if a.v == b.v { 1.0 } else { 0.0 };
                assert!((ov - expect).abs() < 1e-10, "({},{}) -> {ov}", a.v, b.v);
            }
        }
    }

    #[test]
    fn energy_normalization_scales_by_density_of_states() {
        let mu = 50.0;
        let grid = Arc::new(MappedGrid::uniform(64, 1.0, 11.0, mu).unwrap());
        let h = build_hamiltonian(&grid, &PotentialCurve::free("v0"));
        let sol = h.diagonalize().unwrap();
        let spacing = sol.level_spacing(3);
        let wf = sol.state(3);
        let en = wf.to_energy_normalized(spacing);
        assert_eq!(en.norm, NormConvention::EnergyNormalized);
        for j in 0..grid.n {
            let expect = wf.channels[0][j] / spacing.sqrt();
            assert!((en.channels[0][j] - expect).abs() < 1e-15);
        }
        // analytic check: energy-normalized free states have asymptotic
        // amplitude sqrt(2 mu / (pi k))
        let k = (2.0 * mu * sol.energy(3)).sqrt();
        let amp = en.channels[0].iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
        let expect = (2.0 * mu / (std::f64::consts::PI * k)).sqrt();
        assert!(
            ((amp - expect) / expect).abs() < 1e-3,
            "amp {amp} vs {expect}"
        );
    }

    #[test]
    fn empty_window_reports_nearest() {
        let mu = 50.0;
        let grid = Arc::new(MappedGrid::uniform(64, 1.0, 11.0, mu).unwrap());
        let h = build_hamiltonian(&grid, &PotentialCurve::free("v0"));
        let e1 = (std::f64::consts::PI / 10.0).powi(2) / (2.0 * mu);
        let err = threshold_states(&h, 0.0, 0.5 * e1).unwrap_err();
        match err {
            Error::EmptyEnergyWindow { nearest } => {
                assert!(((nearest - e1) / e1).abs() < 1e-8);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
