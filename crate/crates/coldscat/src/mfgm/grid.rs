//! Adaptive radial grids: points uniform in the local phase coordinate
//! s(R) = ∫ k_env dR, so the density everywhere tracks the local de Broglie
//! wavelength of the envelope energy.

use crate::error::{Error, Result};
use crate::quadrature::CumulativeIntegral;

/// Grid construction parameters. `e_env` must sit above every collision
/// energy of interest; `beta` is the points-per-half-wavelength safety factor.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub e_env: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub beta: f64,
    /// Jacobian regularization floor as a fraction of e_env.
    pub e_floor_frac: f64,
    /// Dense-eigensolver size cap per channel.
    pub n_cap: usize,
}

impl GridSpec {
    pub fn new(e_env: f64, r_min: f64, r_max: f64, beta: f64) -> Self {
        GridSpec {
            e_env,
            r_min,
            r_max,
            beta,
            e_floor_frac: 1e-3,
            n_cap: 4096,
        }
    }
}

/// Oversampling factor of the auxiliary map table relative to the grid step;
/// the kinetic-operator quadrature needs 1/J resolved well beyond the basis
/// bandwidth to keep aliasing below spectral accuracy.
pub(crate) const MAP_OVERSAMPLE: usize = 16;

/// Radial grid with mapping Jacobian. Points live uniformly in the phase
/// coordinate x with spacing `dx`; interior point j (1-based) sits at
/// R(j·dx) with Jacobian J = dR/dx = 1/k_env(R). The fine table carries the
/// oversampled auxiliary map used by the kinetic operator quadrature.
#[derive(Debug, Clone)]
pub struct MappedGrid {
    pub n: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub dx: f64,
    pub mu: f64,
    pub e_env: f64,
    pub beta: f64,
    pub total_phase: f64,
    r: Vec<f64>,
    jac: Vec<f64>,
    /// J at x_q = q·dx/MAP_OVERSAMPLE for q = 0..=MAP_OVERSAMPLE·(n+1).
    jac_fine: Vec<f64>,
    weights: Vec<f64>,
}

impl MappedGrid {
    /// Coupled-problem grid. The open channel contributes its full |E - V|
    /// requirement (evanescent wall structure included); a closed channel
    /// contributes only where it is classically allowed — its amplitude
    /// elsewhere is coupling-fed and varies on the open channel's scale.
    pub fn build_two<F1, F2>(v_open: F1, v_closed: F2, mu: f64, spec: &GridSpec) -> Result<Self>
    where
        F1: Fn(f64) -> f64,
        F2: Fn(f64) -> f64,
    {
        let e_fl = spec.e_floor_frac * spec.e_env;
        let combined = move |r: f64| {
            let g1 = spec.e_env - v_open(r);
            let g2 = spec.e_env - v_closed(r);
            let p1 = (g1 * g1 + e_fl * e_fl).sqrt();
            // smooth positive part of the closed-channel kinetic energy
            let p2 = 0.5 * (g2 + (g2 * g2 + e_fl * e_fl).sqrt());
            spec.e_env - p1.max(p2)
        };
        Self::build(combined, mu, spec)
    }

    /// Build the mapped grid for an envelope potential (energies measured in
    /// the same frame as `e_env`, typically relative to the open threshold).
    pub fn build<F: Fn(f64) -> f64>(v_env: F, mu: f64, spec: &GridSpec) -> Result<Self> {
        if !(spec.r_max > spec.r_min) || !(spec.r_min > 0.0) {
            return Err(Error::BadGrid(format!(
                "need 0 < r_min < r_max, got [{}, {}]",
                spec.r_min, spec.r_max
            )));
        }
        if !(spec.e_env > 0.0) || !(spec.beta >= 1.0) {
            return Err(Error::BadGrid(
                "e_env must be positive and beta >= 1".into(),
            ));
        }
        // envelope sanity: e_env must exceed the sampled minimum of V_env
        let mut v_min = f64::INFINITY;
        let m = 4096;
        for i in 0..=m {
            // logarithmic sampling resolves short-range structure
            let r = spec.r_min * (spec.r_max / spec.r_min).powf(i as f64 / m as f64);
            v_min = v_min.min(v_env(r));
        }
        if spec.e_env <= v_min {
            return Err(Error::EnvelopeBelowWell {
                e_env: spec.e_env,
                v_min,
            });
        }

        let e_fl = spec.e_floor_frac * spec.e_env;
        // |E - V| with a smooth floor: in classically allowed regions this is
        // the local kinetic energy; inside the repulsive wall it is the decay
        // scale, so the point density resolves the evanescent tail too.
        let k_env = |r: f64| {
            let g = spec.e_env - v_env(r);
            let p = (g * g + e_fl * e_fl).sqrt();
            (2.0 * mu * p).sqrt()
        };

        let table = CumulativeIntegral::build(&k_env, spec.r_min, spec.r_max, 1e-12)?;
        let total_phase = table.total();
        // the slope limiter and kink smoothing below can locally widen the
        // spacing; build, measure the worst spacing against the raw
        // criterion, and rebuild once with the point budget scaled up
        let mut n = ((spec.beta * total_phase / std::f64::consts::PI).ceil() as usize).max(8);
        for _pass in 0..3 {
            let grid = Self::assemble(&table, &k_env, mu, spec, total_phase, n)?;
            let worst = grid.worst_criterion_ratio(&k_env);
            if worst <= 1.0 {
                return Ok(grid);
            }
            n = ((n + 1) as f64 * worst * 1.02).ceil() as usize;
            if n > spec.n_cap {
                return Err(Error::GridTooLarge { n, cap: spec.n_cap });
            }
        }
        Self::assemble(&table, &k_env, mu, spec, total_phase, n)
    }

    fn assemble<F: Fn(f64) -> f64>(
        table: &CumulativeIntegral,
        k_env: &F,
        mu: f64,
        spec: &GridSpec,
        total_phase: f64,
        n: usize,
    ) -> Result<Self> {
        if n > spec.n_cap {
            return Err(Error::GridTooLarge { n, cap: spec.n_cap });
        }
        let dx = total_phase / (n + 1) as f64;

        let ovs = MAP_OVERSAMPLE;
        let q_count = ovs * (n + 1) + 1;
        // raw local wavenumber along the phase coordinate
        let mut k_fine = Vec::with_capacity(q_count);
        for q in 0..q_count {
            let target = dx * q as f64 / ovs as f64;
            let rq = if q == 0 {
                spec.r_min
            } else if q == q_count - 1 {
                spec.r_max
            } else {
                table.invert(k_env, target)
            };
            k_fine.push(k_env(rq));
        }
        // k(x) has cube-root cusps at envelope turning points, which would
        // wreck the spectral kinetic operator. Regularize in two steps that
        // leave genuinely smooth profiles untouched:
        //  1. slope-limit ln k to at most `alpha` per grid step (a running
        //     max, so the density never drops below the raw criterion);
        //  2. round the limiter kinks with a narrow Gaussian in ln k.
        let alpha_per_step = 0.5;
        let rho = (alpha_per_step / ovs as f64).exp();
        let mut lnk: Vec<f64> = k_fine.iter().map(|&k| k.ln()).collect();
        for q in 1..q_count {
            let floor = lnk[q - 1] - rho.ln();
            if lnk[q] < floor {
                lnk[q] = floor;
            }
        }
        for q in (0..q_count - 1).rev() {
            let floor = lnk[q + 1] - rho.ln();
            if lnk[q] < floor {
                lnk[q] = floor;
            }
        }
        let lnk_smooth = gaussian_smooth(&lnk, 3 * ovs / 2);
        let mut jac_fine: Vec<f64> = lnk_smooth.iter().map(|&l| (-l).exp()).collect();
        // cumulative Simpson of J over the fine grid (pairs of intervals,
        // with the 4th-order half-panel rule for the midpoints)
        let hq = dx / ovs as f64;
        let mut r_fine = vec![spec.r_min; q_count];
        let mut acc = 0.0;
        for q in (0..q_count - 1).step_by(2) {
            let (j0, j1, j2) = (jac_fine[q], jac_fine[q + 1], jac_fine[q + 2]);
            r_fine[q + 1] = spec.r_min + acc + hq / 12.0 * (5.0 * j0 + 8.0 * j1 - j2);
            acc += hq / 3.0 * (j0 + 4.0 * j1 + j2);
            r_fine[q + 2] = spec.r_min + acc;
        }
        // rescale so the last point lands exactly on r_max
        let gamma = (spec.r_max - spec.r_min) / acc;
        for q in 1..q_count {
            r_fine[q] = spec.r_min + (r_fine[q] - spec.r_min) * gamma;
        }
        for j in jac_fine.iter_mut() {
            *j *= gamma;
        }
        let r: Vec<f64> = (1..=n).map(|j| r_fine[ovs * j]).collect();
        let jac: Vec<f64> = (1..=n).map(|j| jac_fine[ovs * j]).collect();
        let weights: Vec<f64> = jac.iter().map(|&j| j * dx).collect();
        Ok(MappedGrid {
            n,
            r_min: spec.r_min,
            r_max: spec.r_max,
            dx,
            mu,
            e_env: spec.e_env,
            beta: spec.beta,
            total_phase,
            r,
            jac,
            jac_fine,
            weights,
        })
    }

    /// Uniform grid (constant Jacobian), the flat-envelope special case.
    pub fn uniform(n: usize, r_min: f64, r_max: f64, mu: f64) -> Result<Self> {
        if !(r_max > r_min) || n < 4 {
            return Err(Error::BadGrid(
                "uniform grid needs r_max > r_min and n >= 4".into(),
            ));
        }
        let dx = 1.0;
        let j = (r_max - r_min) / (n as f64 + 1.0);
        let r: Vec<f64> = (1..=n).map(|i| r_min + j * i as f64).collect();
        Ok(MappedGrid {
            n,
            r_min,
            r_max,
            dx,
            mu,
            e_env: 0.0,
            beta: 0.0,
            total_phase: 0.0,
            r,
            jac: vec![j; n],
            jac_fine: vec![j; MAP_OVERSAMPLE * (n + 1) + 1],
            weights: vec![j * dx; n],
        })
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn jacobian(&self) -> &[f64] {
        &self.jac
    }

    pub fn jacobian_fine(&self) -> &[f64] {
        &self.jac_fine
    }

    /// Quadrature weights w_j = J_j·dx; Σ ψ_j² w_j approximates ∫ ψ² dR.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn oversample() -> usize {
        MAP_OVERSAMPLE
    }

    /// Worst ΔR / (λ_env/2β) over all adjacent point pairs, boundaries
    /// included; ≤ 1 means the sampling criterion holds everywhere.
    fn worst_criterion_ratio<F: Fn(f64) -> f64>(&self, k_env: &F) -> f64 {
        let mut worst = 0.0_f64;
        let mut prev = self.r_min;
        for j in 0..=self.n {
            let next = if j == self.n { self.r_max } else { self.r[j] };
            let mid = 0.5 * (prev + next);
            let ratio = (next - prev) * k_env(mid) * self.beta / std::f64::consts::PI;
            if ratio > worst {
                worst = ratio;
            }
            prev = next;
        }
        worst
    }

    pub fn same_as(&self, other: &MappedGrid) -> bool {
        self.n == other.n
            && self.r_min == other.r_min
            && self.r_max == other.r_max
            && self.dx == other.dx
            && self.mu == other.mu
    }
}

/// Gaussian smoothing with σ given in samples; kernel truncated at ±4σ and
/// renormalized near the edges.
fn gaussian_smooth(v: &[f64], sigma: usize) -> Vec<f64> {
    if sigma == 0 || v.len() < 3 {
        return v.to_vec();
    }
    let half = 4 * sigma;
    let s2 = (sigma * sigma) as f64;
    let kernel: Vec<f64> = (0..=half)
        .map(|d| (-0.5 * (d * d) as f64 / s2).exp())
        .collect();
    let n = v.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut num = kernel[0] * v[i];
        let mut den = kernel[0];
        for d in 1..=half {
            if i >= d {
                num += kernel[d] * v[i - d];
                den += kernel[d];
            }
            if i + d < n {
                num += kernel[d] * v[i + d];
                den += kernel[d];
            }
        }
        out.push(num / den);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::PotentialCurve;

    #[test]
    fn constant_envelope_gives_uniform_grid() {
        let spec = GridSpec::new(1e-3, 1.0, 101.0, 2.0);
        let g = MappedGrid::build(|_| 0.0, 100.0, &spec).unwrap();
        let dr0 = g.r()[1] - g.r()[0];
        for w in g.r().windows(2) {
            assert!(((w[1] - w[0]) - dr0).abs() < 1e-9 * dr0);
        }
        let j0 = g.jacobian()[0];
        for &j in g.jacobian() {
            assert!(((j - j0) / j0).abs() < 1e-9);
        }
    }

    #[test]
    fn deep_well_concentrates_points() {
        let mu = 1.2e5;
        let curve =
            PotentialCurve::model_c6_well("w", 1.3e-3, 11.0, -6331.0, 20.0, 2.0, 0.0).unwrap();
        let spec = GridSpec::new(1e-9, 6.0, 2000.0, 2.0);
        let g = MappedGrid::build(|r| curve.eval_rel(r), mu, &spec).unwrap();
        let count_in = |lo: f64, hi: f64| g.r().iter().filter(|&&r| r >= lo && r < hi).count();
        let well = count_in(8.0, 40.0) as f64 / 32.0;
        let far = (count_in(1600.0, 2000.0) as f64 / 400.0).max(1e-9);
        assert!(
            well / far > 50.0,
            "well density {well}/bohr vs far {far}/bohr"
        );
    }

    #[test]
    fn sampling_criterion_everywhere() {
        let mu = 1.2e5;
        let curve =
            PotentialCurve::model_c6_well("w", 1.3e-3, 11.0, -6331.0, 20.0, 2.0, 0.0).unwrap();
        let e_env = 1e-9;
        let spec = GridSpec::new(e_env, 6.0, 2000.0, 2.0);
        let g = MappedGrid::build(|r| curve.eval_rel(r), mu, &spec).unwrap();
        let e_fl = 1e-3 * e_env;
        for w in g.r().windows(2) {
            let rm = 0.5 * (w[0] + w[1]);
            let k = (2.0 * mu * (e_env - curve.eval_rel(rm)).max(e_fl)).sqrt();
            let lambda = 2.0 * std::f64::consts::PI / k;
            // ΔR ≤ λ/(2β), small slack for envelope curvature across the step
            assert!(w[1] - w[0] <= lambda / (2.0 * g.beta) * 1.05, "at R = {rm}");
        }
    }

    #[test]
    fn envelope_below_well_rejected() {
        let curve =
            PotentialCurve::model_c6_well("w", 1.3e-3, 11.0, -6331.0, 20.0, 2.0, 0.0).unwrap();
        let spec = GridSpec::new(-2e-3, 6.0, 100.0, 2.0);
        assert!(MappedGrid::build(|r| curve.eval_rel(r), 1e5, &spec).is_err());
    }
}
