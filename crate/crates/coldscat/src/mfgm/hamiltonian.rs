//! Hamiltonian assembly on mapped grids: sine-basis spectral kinetic operator
//! in the symmetrized mapped form, one- and two-channel potential blocks, and
//! the complex absorbing boundary term.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mfgm::grid::MappedGrid;
use crate::potentials::PotentialCurve;

/// Kinetic operator T = (1/2μ)·J^{-1/2} D† J^{-1} D J^{-1/2} with D the sine
/// spectral derivative. The middle quadratic form is evaluated by exact
/// cosine quadrature on the doubled auxiliary grid, which keeps T symmetric
/// positive semidefinite by construction:
///
///   M[m,m'] = (m m' π²/L³)·(ĝ_{|m-m'|} + ĝ_{m+m'}),   ĝ_k = Σ_q w_q g_q cos(πkq/Q)
///
/// with g = 1/J sampled at the doubled points and trapezoid weights w.
pub fn kinetic_matrix(grid: &MappedGrid) -> DMatrix<f64> {
    let n = grid.n;
    let len = (n + 1) as f64 * grid.dx;
    let jac_fine = grid.jacobian_fine();
    let q_max = jac_fine.len() - 1;

    // ĝ_k for k = 0..=2n via direct cosine transform of w·g on the
    // oversampled map table (aliasing pushed far beyond the basis bandwidth)
    let mut ghat = vec![0.0_f64; 2 * n + 1];
    let wq = len / q_max as f64;
    for (k, gh) in ghat.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (q, &jh) in jac_fine.iter().enumerate() {
            let w = if q == 0 || q == q_max { 0.5 * wq } else { wq };
            acc += w / jh * (std::f64::consts::PI * (k * q) as f64 / q_max as f64).cos();
        }
        *gh = acc;
    }

    // basis-space quadratic form
    let pi2_l3 = std::f64::consts::PI * std::f64::consts::PI / (len * len * len);
    let mut m_basis = DMatrix::<f64>::zeros(n, n);
    for a in 1..=n {
        for b in a..=n {
            let v = (a * b) as f64 * pi2_l3 * (ghat[b - a] + ghat[a + b]);
            m_basis[(a - 1, b - 1)] = v;
            m_basis[(b - 1, a - 1)] = v;
        }
    }

    // transform to the DVR (collocation) representation
    let norm = (2.0 / (n as f64 + 1.0)).sqrt();
    let mut phi = DMatrix::<f64>::zeros(n, n);
    for j in 1..=n {
        for m in 1..=n {
            phi[(j - 1, m - 1)] =
                norm * (std::f64::consts::PI * (j * m) as f64 / (n as f64 + 1.0)).sin();
        }
    }
    let mut t = &phi * m_basis * phi.transpose();

    // Jacobian sandwich and the 1/2μ prefactor
    let inv_sqrt_j: Vec<f64> = grid.jacobian().iter().map(|&j| 1.0 / j.sqrt()).collect();
    for i in 0..n {
        for j in 0..n {
            t[(i, j)] *= inv_sqrt_j[i] * inv_sqrt_j[j] / (2.0 * grid.mu);
        }
    }
    // scrub the gemm roundoff asymmetry
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (t[(i, j)] + t[(j, i)]);
            t[(i, j)] = s;
            t[(j, i)] = s;
        }
    }
    t
}

/// Complex absorbing term -i·η·W(R) with a monotone cubic ramp beyond `onset`.
#[derive(Debug, Clone)]
pub struct CapTerm {
    pub eta: f64,
    pub onset: f64,
    /// W at the grid points, in [0, 1].
    pub w: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    mat: DMatrix<f64>,
    grid: Arc<MappedGrid>,
    channels: usize,
    /// Absolute energy of the open/ground threshold; reported energies are
    /// relative to this.
    threshold: f64,
    /// Energy below which eigenstates count as bound.
    bound_cutoff: f64,
    /// Per-channel asymptotic energies in the matrix frame.
    channel_asymptotes: Vec<f64>,
    cap: Option<CapTerm>,
}

impl HamiltonianMatrix {
    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn size(&self) -> usize {
        self.mat.nrows()
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn grid(&self) -> &Arc<MappedGrid> {
        &self.grid
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn bound_cutoff(&self) -> f64 {
        self.bound_cutoff
    }

    pub fn channel_asymptotes(&self) -> &[f64] {
        &self.channel_asymptotes
    }

    pub fn cap(&self) -> Option<&CapTerm> {
        self.cap.as_ref()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    /// Largest |entry| — a cheap scale for convergence thresholds.
    pub fn scale(&self) -> f64 {
        self.mat.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
    }

    /// Max relative asymmetry, should be at rounding level by construction.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        let scale = self.scale();
        for i in 0..self.mat.nrows() {
            for j in (i + 1)..self.mat.ncols() {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)]).abs());
            }
        }
        worst / scale
    }
}

/// Single-channel H = T + diag V.
pub fn build_hamiltonian(grid: &Arc<MappedGrid>, curve: &PotentialCurve) -> HamiltonianMatrix {
    let mut mat = kinetic_matrix(grid);
    for (j, &r) in grid.r().iter().enumerate() {
        mat[(j, j)] += curve.eval(r);
    }
    HamiltonianMatrix {
        mat,
        grid: Arc::clone(grid),
        channels: 1,
        threshold: curve.asymptote(),
        bound_cutoff: curve.dissociation_threshold(),
        channel_asymptotes: vec![curve.asymptote()],
        cap: None,
    }
}

/// Two-channel dressed Hamiltonian
/// [[T + V_g, Ω/2], [Ω/2, T + V_e - E_f]] with the photon energy E_f shifting
/// the excited curve down.
pub fn build_coupled_hamiltonian<F: Fn(f64) -> f64>(
    grid: &Arc<MappedGrid>,
    ground: &PotentialCurve,
    excited: &PotentialCurve,
    rabi: F,
    e_f: f64,
) -> HamiltonianMatrix {
    let n = grid.n;
    let t = kinetic_matrix(grid);
    let mut mat = DMatrix::<f64>::zeros(2 * n, 2 * n);
    mat.view_mut((0, 0), (n, n)).copy_from(&t);
    mat.view_mut((n, n), (n, n)).copy_from(&t);
    for (j, &r) in grid.r().iter().enumerate() {
        mat[(j, j)] += ground.eval(r);
        mat[(n + j, n + j)] += excited.eval(r) - e_f;
        let w = 0.5 * rabi(r);
        mat[(j, n + j)] = w;
        mat[(n + j, j)] = w;
    }
    HamiltonianMatrix {
        mat,
        grid: Arc::clone(grid),
        channels: 2,
        threshold: ground.asymptote(),
        bound_cutoff: ground.asymptote(),
        channel_asymptotes: vec![ground.asymptote(), excited.asymptote() - e_f],
        cap: None,
    }
}

/// Add a complex absorbing boundary -i·η·W(R) for R > onset, W a monotone
/// cubic ramp reaching 1 at the grid edge. The returned Hamiltonian keeps the
/// real part unchanged; complex eigenpairs come from the dedicated solver.
pub fn add_absorber(h: &HamiltonianMatrix, eta: f64, onset: f64) -> Result<HamiltonianMatrix> {
    if onset >= h.grid.r_max {
        return Err(Error::Invalid(format!(
            "absorber onset {onset} must lie inside the grid (r_max = {})",
            h.grid.r_max
        )));
    }
    if eta < 0.0 {
        return Err(Error::Invalid(
            "absorber strength must be non-negative".into(),
        ));
    }
    let mut out = h.clone();
    if eta == 0.0 {
        out.cap = None;
        return Ok(out);
    }
    let span = h.grid.r_max - onset;
    let w: Vec<f64> = h
        .grid
        .r()
        .iter()
        .map(|&r| {
            if r <= onset {
                0.0
            } else {
                let t = (r - onset) / span;
                t * t * t
            }
        })
        .collect();
    out.cap = Some(CapTerm { eta, onset, w });
    Ok(out)
}

/// y = (H_real - i η W) x for the complex-symmetric absorber problem.
pub(crate) fn cap_apply(
    h: &HamiltonianMatrix,
    x: &DVector<num_complex::Complex<f64>>,
) -> DVector<num_complex::Complex<f64>> {
    use num_complex::Complex;
    let n = h.grid.n;
    let re: DVector<f64> = DVector::from_iterator(x.len(), x.iter().map(|c| c.re));
    let im: DVector<f64> = DVector::from_iterator(x.len(), x.iter().map(|c| c.im));
    let yre = &h.mat * re;
    let yim = &h.mat * im;
    let mut y = DVector::from_iterator(
        x.len(),
        yre.iter()
            .zip(yim.iter())
            .map(|(&a, &b)| Complex::new(a, b)),
    );
    if let Some(cap) = &h.cap {
        for ch in 0..h.channels {
            for j in 0..n {
                let idx = ch * n + j;
                // -i η w · x
                y[idx] += Complex::new(0.0, -cap.eta * cap.w[j]) * x[idx];
            }
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinetic_is_symmetric() {
        let grid = Arc::new(MappedGrid::uniform(64, 0.0, 10.0, 1.0).unwrap());
        let curve = PotentialCurve::free("v0");
        let h = build_hamiltonian(&grid, &curve);
        assert!(h.asymmetry() < 1e-13);
    }

    #[test]
    fn absorber_zero_eta_is_identity() {
        let grid = Arc::new(MappedGrid::uniform(32, 0.0, 10.0, 1.0).unwrap());
        let h = build_hamiltonian(&grid, &PotentialCurve::free("v0"));
        let h2 = add_absorber(&h, 0.0, 5.0).unwrap();
        assert!(h2.cap().is_none());
        assert_eq!(h.matrix(), h2.matrix());
    }

    #[test]
    fn degenerate_channels_split_by_rabi() {
        // V_g = V_e - E_f with constant Ω: every eigenpair splits by ±Ω/2
        let mu = 80.0;
        let grid = Arc::new(MappedGrid::uniform(48, 1.0, 25.0, mu).unwrap());
        let g = PotentialCurve::square_well("g", 2e-3, 8.0);
        let e_f = 4e-3;
        let e = PotentialCurve::from_model(
            "e",
            crate::potentials::ModelForm::SquareWell { depth: 2e-3, radius: 8.0 },
            0.0,
            8.0,
            0.0,
            e_f,
        );
        let omega = 3e-4;
        let h1 = build_hamiltonian(&grid, &g);
        let sol1 = h1.diagonalize().unwrap();
        let hc = build_coupled_hamiltonian(&grid, &g, &e, |_| omega, e_f);
        let solc = hc.diagonalize().unwrap();
        for m in 0..10 {
            let lo = solc.energy(2 * m);
            let hi = solc.energy(2 * m + 1);
            let base = sol1.energy(m);
            assert!((lo - (base - 0.5 * omega)).abs() < 1e-12, "m={m}");
            assert!((hi - (base + 0.5 * omega)).abs() < 1e-12, "m={m}");
        }
    }

    #[test]
    fn coupled_blocks_match_singles() {
        let grid = Arc::new(MappedGrid::uniform(24, 1.0, 30.0, 50.0).unwrap());
        let g = PotentialCurve::square_well("g", 1e-3, 8.0);
        let e = PotentialCurve::from_model(
            "e",
            crate::potentials::ModelForm::SquareWell {
                depth: 2e-3,
                radius: 6.0,
            },
            0.0,
            6.0,
            0.0,
            5e-3,
        );
        let hc = build_coupled_hamiltonian(&grid, &g, &e, |_| 0.0, 1e-3);
        let hg = build_hamiltonian(&grid, &g);
        let n = grid.n;
        for i in 0..n {
            for j in 0..n {
                assert_eq!(hc.matrix()[(i, j)], hg.matrix()[(i, j)]);
                assert_eq!(hc.matrix()[(i, n + j)], 0.0);
            }
        }
        assert_eq!(hc.channel_asymptotes()[1], 5e-3 - 1e-3);
    }
}
