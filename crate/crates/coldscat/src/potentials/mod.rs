//! Electronic potential curves: tabulated or analytic short-range bodies joined
//! smoothly to a -|C6|/R⁶ dispersion tail, localized inner-wall deformations,
//! and the spin-orbit construction of the 0g⁻ excited pair.
//!
//! A curve is immutable after construction and evaluation is pure, so curves
//! can be shared freely across worker threads.

mod models;
mod spline;

pub use models::{morse_spectrum, ModelForm};
pub use spline::CubicSpline;

use crate::error::{Error, Result};

/// Rising quintic smoothstep: 0 at t=0, 1 at t=1, with two continuous derivatives.
fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

#[derive(Debug, Clone)]
pub enum CurveBody {
    /// Absolute energies V(R) sampled on strictly increasing abscissae.
    Tabulated(CubicSpline),
    /// Analytic form, relative to the dissociation limit.
    Model(ModelForm),
}

/// Localized Gaussian modification of the inner potential wall. The shape is
/// clamped to zero at the join radius through the curve's blend window, so the
/// dispersion tail is never touched and only accumulated phase changes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerWallDeformation {
    /// Amplitude λ in hartree; λ < 0 deepens the well and adds phase.
    pub amplitude: f64,
    /// Center R0 in bohr; must lie below the join radius.
    pub center: f64,
    /// Gaussian width σ in bohr.
    pub sigma: f64,
}

#[derive(Debug, Clone)]
pub struct PotentialCurve {
    pub label: String,
    body: CurveBody,
    /// Dispersion coefficient in hartree·bohr⁶, negative for an attractive tail.
    c6: f64,
    r_join: f64,
    asymptote: f64,
    blend_width: f64,
    deformations: Vec<InnerWallDeformation>,
}

impl PotentialCurve {
    /// Build a curve from tabulated (R, V) samples plus tail metadata.
    /// Samples must be strictly increasing and reach past R_join + blend_width.
    pub fn build_tabulated(
        label: &str,
        samples: &[(f64, f64)],
        c6: f64,
        r_join: f64,
        asymptote: f64,
        blend_width: f64,
    ) -> Result<Self> {
        if samples.len() < 4 {
            return Err(Error::TooFewSamples {
                need: 4,
                got: samples.len(),
            });
        }
        if c6 >= 0.0 {
            return Err(Error::NonNegativeC6(c6));
        }
        let need = r_join + blend_width;
        let last = samples.last().unwrap().0;
        if last < need {
            return Err(Error::SamplesDontCoverJoin { last, need });
        }
        let x: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let y: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let curve = PotentialCurve {
            label: label.to_string(),
            body: CurveBody::Tabulated(CubicSpline::natural(x, y)?),
            c6,
            r_join,
            asymptote,
            blend_width,
            deformations: Vec::new(),
        };
        curve.check_join_smoothness()?;
        Ok(curve)
    }

    /// Analytic 12-6 surrogate with its minimum at (r_min, -depth) and an
    /// independently chosen dispersion tail, blended near r_join.
    pub fn model_c6_well(
        label: &str,
        depth: f64,
        r_min: f64,
        c6: f64,
        r_join: f64,
        blend_width: f64,
        asymptote: f64,
    ) -> Result<Self> {
        if depth <= 0.0 {
            return Err(Error::Invalid(format!(
                "well depth must be positive, got {depth}"
            )));
        }
        if c6 >= 0.0 {
            return Err(Error::NonNegativeC6(c6));
        }
        Ok(PotentialCurve {
            label: label.to_string(),
            body: CurveBody::Model(ModelForm::power_well_from_minimum(depth, r_min)),
            c6,
            r_join,
            asymptote,
            blend_width,
            deformations: Vec::new(),
        })
    }

    /// Wrap any analytic model. For shapes without a dispersion tail pass
    /// c6 = 0 and a join radius beyond the region of use.
    pub fn from_model(
        label: &str,
        form: ModelForm,
        c6: f64,
        r_join: f64,
        blend_width: f64,
        asymptote: f64,
    ) -> Self {
        PotentialCurve {
            label: label.to_string(),
            body: CurveBody::Model(form),
            c6,
            r_join,
            asymptote,
            blend_width,
            deformations: Vec::new(),
        }
    }

    pub fn morse(label: &str, depth: f64, r_e: f64, alpha: f64) -> Self {
        Self::from_model(
            label,
            ModelForm::Morse { depth, r_e, alpha },
            0.0,
            1e9,
            1.0,
            0.0,
        )
    }

    pub fn harmonic(label: &str, force_k: f64, r_0: f64) -> Self {
        Self::from_model(
            label,
            ModelForm::Harmonic { force_k, r_0 },
            0.0,
            1e9,
            1.0,
            0.0,
        )
    }

    pub fn square_well(label: &str, depth: f64, radius: f64) -> Self {
        Self::from_model(
            label,
            ModelForm::SquareWell { depth, radius },
            0.0,
            radius,
            0.0,
            0.0,
        )
    }

    pub fn hard_sphere(label: &str, radius: f64) -> Self {
        Self::from_model(
            label,
            ModelForm::HardSphere { radius },
            0.0,
            radius,
            0.0,
            0.0,
        )
    }

    pub fn free(label: &str) -> Self {
        Self::from_model(label, ModelForm::Free, 0.0, 1.0, 0.0, 0.0)
    }

    pub fn c6(&self) -> f64 {
        self.c6
    }

    pub fn r_join(&self) -> f64 {
        self.r_join
    }

    pub fn asymptote(&self) -> f64 {
        self.asymptote
    }

    /// Energy below which states are bound. Equals the asymptote except for
    /// confining shapes (harmonic), which bind at every energy.
    pub fn dissociation_threshold(&self) -> f64 {
        match &self.body {
            CurveBody::Model(ModelForm::Harmonic { .. }) => f64::INFINITY,
            _ => self.asymptote,
        }
    }

    pub fn blend_width(&self) -> f64 {
        self.blend_width
    }

    pub fn deformations(&self) -> &[InnerWallDeformation] {
        &self.deformations
    }

    /// Radius beyond which V(R) - asymptote = C6/R⁶ holds exactly.
    pub fn tail_from(&self) -> f64 {
        self.r_join + self.blend_width
    }

    /// Impenetrable-core radius, if the body is a hard sphere.
    pub fn hard_core(&self) -> Option<f64> {
        match &self.body {
            CurveBody::Model(m) => m.hard_core_radius(),
            CurveBody::Tabulated(_) => None,
        }
    }

    fn inner_value(&self, r: f64) -> f64 {
        let base = match &self.body {
            CurveBody::Tabulated(s) => s.eval(r),
            CurveBody::Model(m) => self.asymptote + m.eval(r),
        };
        base + self.deformation_sum(r)
    }

    fn deformation_sum(&self, r: f64) -> f64 {
        if self.deformations.is_empty() || r >= self.r_join {
            return 0.0;
        }
        let lo = self.r_join - self.blend_width;
        let cut = if r <= lo {
            1.0
        } else {
            1.0 - smoothstep((r - lo) / self.blend_width)
        };
        let mut acc = 0.0;
        for d in &self.deformations {
            let t = (r - d.center) / d.sigma;
            acc += d.amplitude * (-t * t).exp();
        }
        acc * cut
    }

    fn tail_value(&self, r: f64) -> f64 {
        self.asymptote + self.c6 / r.powi(6)
    }

    /// Potential energy at radius r (absolute scale).
    pub fn eval(&self, r: f64) -> f64 {
        let lo = self.r_join - self.blend_width;
        let hi = self.r_join + self.blend_width;
        // the lower branch is checked first so that a zero-width blend
        // (hard edge) defers to the body, which owns the edge convention
        if r <= lo {
            self.inner_value(r)
        } else if r >= hi {
            self.tail_value(r)
        } else {
            let s = smoothstep((r - lo) / (hi - lo));
            (1.0 - s) * self.inner_value(r) + s * self.tail_value(r)
        }
    }

    /// Potential relative to the dissociation limit.
    pub fn eval_rel(&self, r: f64) -> f64 {
        self.eval(r) - self.asymptote
    }

    /// Return a copy with an additional inner-wall deformation.
    pub fn apply_deformation(&self, d: InnerWallDeformation) -> Result<Self> {
        if d.center >= self.r_join {
            return Err(Error::DeformationBeyondJoin {
                center: d.center,
                r_join: self.r_join,
            });
        }
        let mut out = self.clone();
        out.deformations.push(d);
        Ok(out)
    }

    /// Numeric C¹ check at the blend boundaries, run on construction of
    /// tabulated curves.
    fn check_join_smoothness(&self) -> Result<()> {
        let eps = 1e-5;
        let mut worst: f64 = 0.0;
        for edge in [
            self.r_join - self.blend_width,
            self.r_join + self.blend_width,
        ] {
            let d_in = (self.eval(edge - eps) - self.eval(edge - 3.0 * eps)) / (2.0 * eps);
            let d_out = (self.eval(edge + 3.0 * eps) - self.eval(edge + eps)) / (2.0 * eps);
            worst = worst.max((d_in - d_out).abs());
        }
        if worst > 1e-8 {
            return Err(Error::JoinNotSmooth(worst));
        }
        Ok(())
    }
}

/// Inputs for the pointwise 0g⁻ diagonalization: the two Hund's case (a)
/// curves of shared asymptote plus the atomic spin-orbit constant.
#[derive(Debug, Clone)]
pub struct SpinOrbitModel {
    pub v_sigma: PotentialCurve,
    pub v_pi: PotentialCurve,
    /// Atomic spin-orbit splitting in hartree.
    pub v_so: f64,
    pub convention: SoConvention,
}

/// Matrix convention for the 2×2 spin-orbit coupling in units of δ = V_so/3:
/// H = [[V_Σ + sigma_shift·δ, coupling·δ], [coupling·δ, V_Π + pi_shift·δ]].
/// The default reproduces an asymptotic branch splitting of exactly V_so.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoConvention {
    pub sigma_shift: f64,
    pub pi_shift: f64,
    pub coupling: f64,
}

impl Default for SoConvention {
    fn default() -> Self {
        SoConvention {
            sigma_shift: 0.0,
            pi_shift: 1.0,
            coupling: std::f64::consts::SQRT_2,
        }
    }
}

/// The two adiabatic 0g⁻ branches plus the R-dependent mixing angle.
#[derive(Debug, Clone)]
pub struct SoBranches {
    pub lower: PotentialCurve,
    pub upper: PotentialCurve,
    /// Raw pointwise eigenvalues (R, lower, upper) before re-interpolation.
    pub samples: Vec<(f64, f64, f64)>,
    /// Samples of (R, θ) with tan 2θ = 2 H12 / (H11 - H22), extended on a
    /// logarithmic tail so the asymptotic angle is visible.
    pub mixing_angle: Vec<(f64, f64)>,
}

/// Pointwise diagonalization of the spin-orbit coupled Σ/Π pair, with the
/// branches continuity-tracked (they never cross for nonzero coupling) and
/// re-expressed as curves with effective dispersion tails.
pub fn so_diagonalize_0g(m: &SpinOrbitModel, r_lo: f64, n_samples: usize) -> Result<SoBranches> {
    let a_sig = m.v_sigma.asymptote();
    let a_pi = m.v_pi.asymptote();
    if (a_sig - a_pi).abs() > 1e-9 {
        return Err(Error::MismatchedAsymptotes(a_sig, a_pi));
    }
    let delta = m.v_so / 3.0;
    let c = m.convention.coupling * delta;
    // rebuild the branches with their join beyond the inputs' tail start, where
    // the pointwise eigenvalues already follow asym + C6_eff/R⁶
    let blend = m.v_sigma.blend_width().max(m.v_pi.blend_width()).max(0.5);
    let r_join = 1.15 * m.v_sigma.tail_from().max(m.v_pi.tail_from());
    let r_hi = r_join + 4.0 * blend;
    let n = n_samples.max(64);
    let eig = |r: f64| {
        let h11 = m.v_sigma.eval(r) + m.convention.sigma_shift * delta;
        let h22 = m.v_pi.eval(r) + m.convention.pi_shift * delta;
        let mean = 0.5 * (h11 + h22);
        let half = 0.5 * (h11 - h22);
        let root = (half * half + c * c).sqrt();
        (
            mean - root,
            mean + root,
            0.5 * f64::atan2(2.0 * c, h11 - h22),
        )
    };
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    let mut samples = Vec::with_capacity(n);
    let mut mixing = Vec::with_capacity(n + 64);
    for i in 0..n {
        let r = r_lo + (r_hi - r_lo) * i as f64 / (n - 1) as f64;
        let (lo, up, th) = eig(r);
        lower.push((r, lo));
        upper.push((r, up));
        samples.push((r, lo, up));
        mixing.push((r, th));
    }
    // logarithmic tail for the mixing angle out to where the residual
    // dispersion splitting is negligible against the coupling
    let far = (r_hi * 64.0).min(1e6);
    for i in 1..=64 {
        let r = r_hi * (far / r_hi).powf(i as f64 / 64.0);
        mixing.push((r, eig(r).2));
    }
    // asymptotic eigenvectors give the first-order effective C6 of each branch
    let s0 = m.convention.sigma_shift * delta;
    let p0 = m.convention.pi_shift * delta;
    let mean0 = 0.5 * (s0 + p0);
    let half0 = 0.5 * (s0 - p0);
    let root0 = (half0 * half0 + c * c).sqrt();
    let (asym_lo, asym_hi) = (a_sig + mean0 - root0, a_sig + mean0 + root0);
    // eigenvector for eigenvalue λ is ∝ (c, λ - s0); Σ weight = c²/(c² + (λ-s0)²)
    let sigma_weight = |lam: f64| {
        let t = lam - s0;
        if c == 0.0 {
            if t.abs() < root0.max(1e-300) {
                1.0
            } else {
                0.0
            }
        } else {
            c * c / (c * c + t * t)
        }
    };
    let (c6_lo, c6_hi) = if root0 == 0.0 {
        // degenerate asymptote: the lower branch follows the deeper tail
        (
            m.v_sigma.c6().min(m.v_pi.c6()),
            m.v_sigma.c6().max(m.v_pi.c6()),
        )
    } else {
        let w_lo = sigma_weight(mean0 - root0);
        let w_hi = sigma_weight(mean0 + root0);
        (
            w_lo * m.v_sigma.c6() + (1.0 - w_lo) * m.v_pi.c6(),
            w_hi * m.v_sigma.c6() + (1.0 - w_hi) * m.v_pi.c6(),
        )
    };
    let make = |label: &str, pts: &[(f64, f64)], c6: f64, asym: f64| {
        PotentialCurve::build_tabulated(label, pts, c6.min(-1e-12), r_join, asym, blend)
    };
    Ok(SoBranches {
        lower: make(
            &format!("{}+{} 0g- lower", m.v_sigma.label, m.v_pi.label),
            &lower,
            c6_lo,
            asym_lo,
        )?,
        upper: make(
            &format!("{}+{} 0g- upper", m.v_sigma.label, m.v_pi.label),
            &upper,
            c6_hi,
            asym_hi,
        )?,
        samples,
        mixing_angle: mixing,
    })
}

/// Max |V(r⁺) - V(r⁻)| over a mesh across the join window: a discontinuity
/// detector used by construction tests.
pub fn max_jump_across_join(curve: &PotentialCurve, mesh: f64) -> f64 {
    let lo = curve.r_join() - 2.0 * curve.blend_width();
    let hi = curve.r_join() + 2.0 * curve.blend_width();
    let eps = 1e-9 * curve.r_join().max(1.0);
    let mut worst: f64 = 0.0;
    let mut r = lo;
    while r <= hi {
        worst = worst.max((curve.eval(r + eps) - curve.eval(r - eps)).abs());
        r += mesh;
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tail_only_curve() -> PotentialCurve {
        let c6 = -6331.0;
        let samples: Vec<(f64, f64)> = (0..2000)
            .map(|i| {
                let r = 6.0 + i as f64 * 0.02;
                (r, c6 / r.powi(6))
            })
            .collect();
        PotentialCurve::build_tabulated("tail-only", &samples, c6, 20.0, 0.0, 2.0).unwrap()
    }

    #[test]
    fn tail_only_matches_dispersion_everywhere() {
        // a few knots in from the table edge the natural-end transient is gone
        let c = tail_only_curve();
        for i in 0..300 {
            let r = 6.5 + i as f64 * 0.12;
            let exact = -6331.0 / r.powi(6);
            let rel = ((c.eval(r) - exact) / exact).abs();
            assert!(rel < 1e-10, "r={r} rel={rel}");
        }
    }

    #[test]
    fn tail_region_exact() {
        let c = tail_only_curve();
        let r = 2.0 * c.tail_from();
        assert_eq!(c.eval(r), c.asymptote() + c.c6() / r.powi(6));
    }

    #[test]
    fn join_is_continuous_on_fine_mesh() {
        let c = tail_only_curve();
        assert!(max_jump_across_join(&c, 1e-3) < 1e-10);
    }

    #[test]
    fn samples_must_cover_join() {
        let samples: Vec<(f64, f64)> = (0..40).map(|i| (6.0 + i as f64 * 0.1, -1.0e-4)).collect();
        let e = PotentialCurve::build_tabulated("short", &samples, -100.0, 20.0, 0.0, 2.0);
        assert!(matches!(e, Err(Error::SamplesDontCoverJoin { .. })));
    }

    #[test]
    fn model_well_minimum_and_tail() {
        let depth = 1.3e-3;
        let r_min = 11.0;
        let c = PotentialCurve::model_c6_well("w", depth, r_min, -6331.0, 20.0, 2.0, 0.0).unwrap();
        // analytic minimum at (r_min, -depth)
        let h = 1e-6;
        let d = (c.eval(r_min + h) - c.eval(r_min - h)) / (2.0 * h);
        assert!(d.abs() < 1e-8);
        assert!((c.eval(r_min) + depth).abs() < 1e-15);
        // exact tail
        let r = 2.0 * c.tail_from();
        assert_eq!(c.eval(r) - c.asymptote(), c.c6() / r.powi(6));
        // vanishes at infinity
        assert!(c.eval(1e6).abs() < 1e-20);
    }

    #[test]
    fn zero_deformation_is_identity() {
        let base = tail_only_curve();
        let def = base
            .apply_deformation(InnerWallDeformation {
                amplitude: 0.0,
                center: 10.0,
                sigma: 1.0,
            })
            .unwrap();
        for i in 0..200 {
            let r = 6.5 + i as f64 * 0.15;
            assert_eq!(base.eval(r), def.eval(r));
        }
    }

    #[test]
    fn deformation_clamped_outside_join() {
        let base = PotentialCurve::model_c6_well("w", 1e-3, 11.0, -6331.0, 20.0, 2.0, 0.0).unwrap();
        let def = base
            .apply_deformation(InnerWallDeformation {
                amplitude: 1e-4,
                center: 10.0,
                sigma: 1.5,
            })
            .unwrap();
        let r = base.r_join() + base.blend_width();
        assert_eq!(base.eval(r), def.eval(r));
        assert_eq!(base.eval(r + 5.0), def.eval(r + 5.0));
        // but it does act inside
        assert!((base.eval(10.0) - def.eval(10.0)).abs() > 1e-6);
    }

    #[test]
    fn deformation_center_must_precede_join() {
        let base = tail_only_curve();
        let e = base.apply_deformation(InnerWallDeformation {
            amplitude: 1e-5,
            center: 25.0,
            sigma: 1.0,
        });
        assert!(matches!(e, Err(Error::DeformationBeyondJoin { .. })));
    }

    #[test]
    fn negative_amplitude_adds_phase() {
        let mu = 1.2e5;
        let base = PotentialCurve::model_c6_well("w", 1e-3, 11.0, -6331.0, 20.0, 2.0, 0.0).unwrap();
        let deeper = base
            .apply_deformation(InnerWallDeformation {
                amplitude: -5e-5,
                center: 10.5,
                sigma: 1.0,
            })
            .unwrap();
        let phi = |c: &PotentialCurve| {
            let integrand = |r: f64| {
                let v = c.eval_rel(r);
                if v < 0.0 {
                    (-2.0 * mu * v).sqrt()
                } else {
                    0.0
                }
            };
            crate::quadrature::adaptive_simpson(integrand, 8.0, 400.0, 1e-9, 0.0).unwrap()
        };
        assert!(phi(&deeper) > phi(&base));
    }

    #[test]
    fn so_asymptotic_splitting_is_v_so() {
        let v_so = 554.1 / crate::constants::CM1_PER_HARTREE;
        let sig = PotentialCurve::model_c6_well("sig", 5e-3, 9.0, -2e4, 20.0, 2.0, 0.0).unwrap();
        let pi = PotentialCurve::model_c6_well("pi", 8e-3, 8.0, -3e4, 20.0, 2.0, 0.0).unwrap();
        let br = so_diagonalize_0g(
            &SpinOrbitModel {
                v_sigma: sig,
                v_pi: pi,
                v_so,
                convention: SoConvention::default(),
            },
            6.0,
            4000,
        )
        .unwrap();
        let split = br.upper.asymptote() - br.lower.asymptote();
        assert!(((split - v_so) / v_so).abs() < 1e-12);
        // analytic asymptotic eigenvalues {2δ, -δ}
        let delta = v_so / 3.0;
        assert!((br.upper.asymptote() - 2.0 * delta).abs() < 1e-15);
        assert!((br.lower.asymptote() + delta).abs() < 1e-15);
        // ordering holds everywhere sampled
        for &(_, lo, up) in &br.samples {
            assert!(lo <= up);
        }
        // mixing angle settles to the asymptotic value on the far tail
        let tail = &br.mixing_angle[br.mixing_angle.len() - 3..];
        let theta_inf = 0.5 * f64::atan2(2.0 * std::f64::consts::SQRT_2 * delta, -delta);
        for &(_, th) in tail {
            assert!((th - theta_inf).abs() < 1e-6, "theta {th} vs {theta_inf}");
        }
    }

    #[test]
    fn so_decoupled_limit_is_pointwise_min_max() {
        let sig = PotentialCurve::model_c6_well("sig", 5e-3, 9.0, -2e4, 20.0, 2.0, 0.0).unwrap();
        let pi = PotentialCurve::model_c6_well("pi", 8e-3, 8.0, -3e4, 20.0, 2.0, 0.0).unwrap();
        let br = so_diagonalize_0g(
            &SpinOrbitModel {
                v_sigma: sig.clone(),
                v_pi: pi.clone(),
                v_so: 0.0,
                convention: SoConvention::default(),
            },
            6.0,
            2000,
        )
        .unwrap();
        // the raw eigenvalue samples are exactly pointwise min/max
        for &(r, lo, up) in &br.samples {
            let (a, b) = (sig.eval(r), pi.eval(r));
            assert!((lo - a.min(b)).abs() < 1e-15, "r={r}");
            assert!((up - a.max(b)).abs() < 1e-15, "r={r}");
        }
        // re-interpolated curves agree away from the diabatic-crossing kink
        for i in 0..200 {
            let r = 6.5 + i as f64 * 0.1;
            let (a, b) = (sig.eval(r), pi.eval(r));
            assert!((br.lower.eval(r) - a.min(b)).abs() < 5e-5, "r={r}");
            assert!((br.upper.eval(r) - a.max(b)).abs() < 5e-5, "r={r}");
        }
    }
}
