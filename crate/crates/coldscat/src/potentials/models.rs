//! Analytic model potentials used as curve bodies: surrogate wells and the
//! standard benchmark shapes (Morse, harmonic, square well, hard sphere).

/// Analytic short-range body, evaluated relative to the dissociation limit.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelForm {
    /// c12/r¹² + c6_inner/r⁶; both coefficients explicit so the well geometry
    /// can be tuned independently of the dispersion tail.
    PowerWell { c12: f64, c6_inner: f64 },
    /// depth·(e^{-2a(r-re)} - 2 e^{-a(r-re)})
    Morse { depth: f64, r_e: f64, alpha: f64 },
    /// ½ k (r - r0)²; no dissociation limit, used for spectral benchmarks.
    Harmonic { force_k: f64, r_0: f64 },
    /// -depth inside `radius`, zero outside.
    SquareWell { depth: f64, radius: f64 },
    /// impenetrable core of given radius, zero outside; propagators start at
    /// the core rather than representing the wall numerically.
    HardSphere { radius: f64 },
    /// identically zero
    Free,
}

impl ModelForm {
    /// 12-6 well with its minimum at (r_min, -depth).
    pub fn power_well_from_minimum(depth: f64, r_min: f64) -> ModelForm {
        assert!(depth > 0.0 && r_min > 0.0);
        let r6 = r_min.powi(6);
        ModelForm::PowerWell {
            c12: depth * r6 * r6,
            c6_inner: -2.0 * depth * r6,
        }
    }

    /// Value relative to the dissociation limit (harmonic: relative to its minimum).
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            ModelForm::PowerWell { c12, c6_inner } => {
                let r6 = r.powi(6);
                c12 / (r6 * r6) + c6_inner / r6
            }
            ModelForm::Morse { depth, r_e, alpha } => {
                let e = (-alpha * (r - r_e)).exp();
                depth * (e * e - 2.0 * e)
            }
            ModelForm::Harmonic { force_k, r_0 } => 0.5 * force_k * (r - r_0) * (r - r_0),
            ModelForm::SquareWell { depth, radius } => {
                // midpoint convention at the edge keeps grid-aligned Numerov
                // propagation at its formal order through the discontinuity
                if (r - radius).abs() <= 4.0 * f64::EPSILON * radius {
                    -0.5 * depth
                } else if r < radius {
                    -depth
                } else {
                    0.0
                }
            }
            ModelForm::HardSphere { .. } => 0.0,
            ModelForm::Free => 0.0,
        }
    }

    pub fn hard_core_radius(&self) -> Option<f64> {
        match *self {
            ModelForm::HardSphere { radius } => Some(radius),
            _ => None,
        }
    }
}

/// Closed-form Morse bound spectrum relative to the dissociation limit.
///
/// E_v = -depth·(1 - (v+½)/λ)² with λ = sqrt(2 μ depth)/α, for v+½ < λ.
pub fn morse_spectrum(depth: f64, alpha: f64, mu: f64) -> Vec<f64> {
    let lambda = (2.0 * mu * depth).sqrt() / alpha;
    let mut out = Vec::new();
    let mut v = 0.0;
    while v + 0.5 < lambda {
        let t = 1.0 - (v + 0.5) / lambda;
        out.push(-depth * t * t);
        v += 1.0;
    }
    out
}
