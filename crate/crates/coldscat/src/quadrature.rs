//! Adaptive quadrature and small root-finding helpers shared across modules.

use crate::error::{Error, Result};

const MAX_DEPTH: usize = 56;

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

struct Adaptive<'a, F: Fn(f64) -> f64> {
    f: &'a F,
    tol: f64,
    // (right edge, contribution) per accepted subinterval, in order
    knots: Option<Vec<(f64, f64)>>,
    evals: usize,
}

impl<'a, F: Fn(f64) -> f64> Adaptive<'a, F> {
    fn run(&mut self, a: f64, b: f64) -> Result<f64> {
        let fa = (self.f)(a);
        let m = 0.5 * (a + b);
        let fm = (self.f)(m);
        let fb = (self.f)(b);
        let whole = simpson(fa, fm, fb, b - a);
        self.recurse(a, b, fa, fm, fb, whole, self.tol, 0)
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        &mut self,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (self.f)(lm);
        let frm = (self.f)(rm);
        self.evals += 2;
        if self.evals > 40_000_000 {
            return Err(Error::QuadratureFailed(
                "evaluation budget exhausted".into(),
            ));
        }
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let refined = left + right;
        if depth >= MAX_DEPTH || (refined - whole).abs() <= 15.0 * tol {
            let correction = (refined - whole) / 15.0;
            if let Some(knots) = self.knots.as_mut() {
                knots.push((m, left + 0.5 * correction));
                knots.push((b, right + 0.5 * correction));
            }
            return Ok(refined + correction);
        }
        let l = self.recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?;
        let r = self.recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?;
        Ok(l + r)
    }
}

/// Adaptive Simpson integral of `f` over [a, b].
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    // rough scale pass to seed the absolute tolerance
    let n = 64;
    let h = (b - a) / n as f64;
    let mut rough = 0.0;
    for i in 0..n {
        let x0 = a + i as f64 * h;
        rough += simpson(f(x0), f(x0 + 0.5 * h), f(x0 + h), h);
    }
    let tol = abs_tol
        .max(rel_tol * rough.abs())
        .max(f64::MIN_POSITIVE * 1e10);
    let mut ad = Adaptive {
        f: &f,
        tol,
        knots: None,
        evals: 0,
    };
    ad.run(a, b)
}

/// Cumulative integral of a non-negative integrand, kept as an ordered knot
/// table so that s(x) can be inverted cheaply.
pub struct CumulativeIntegral {
    /// Knot abscissae, starting at the lower limit.
    pub x: Vec<f64>,
    /// Cumulative integral values at the knots; s[0] = 0.
    pub s: Vec<f64>,
}

impl CumulativeIntegral {
    pub fn build<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<Self> {
        let mut ad = Adaptive {
            f: &f,
            tol: 1.0,
            knots: Some(Vec::new()),
            evals: 0,
        };
        // two passes: first to get the scale, second with the real tolerance
        let rough = {
            let n = 256;
            let h = (b - a) / n as f64;
            let mut acc = 0.0;
            for i in 0..n {
                let x0 = a + i as f64 * h;
                acc += simpson(f(x0), f(x0 + 0.5 * h), f(x0 + h), h);
            }
            acc
        };
        ad.tol = (rel_tol * rough.abs()).max(1e-300);
        ad.knots = Some(Vec::new());
        let total = ad.run(a, b)?;
        let knots = ad.knots.take().unwrap();
        let mut x = Vec::with_capacity(knots.len() + 1);
        let mut s = Vec::with_capacity(knots.len() + 1);
        x.push(a);
        s.push(0.0);
        let mut acc = 0.0;
        for (xr, ds) in knots {
            acc += ds;
            x.push(xr);
            s.push(acc);
        }
        // normalize the accumulated sum to the corrected total
        if acc != 0.0 {
            let scale = total / acc;
            for v in s.iter_mut() {
                *v *= scale;
            }
        }
        Ok(CumulativeIntegral { x, s })
    }

    pub fn total(&self) -> f64 {
        *self.s.last().unwrap()
    }

    /// Solve s(x) = target for x, refining with Newton steps using the exact
    /// integrand derivative. Targets must be within [0, total].
    pub fn invert<F: Fn(f64) -> f64>(&self, f: &F, target: f64) -> f64 {
        let n = self.x.len();
        if target <= 0.0 {
            return self.x[0];
        }
        if target >= self.total() {
            return self.x[n - 1];
        }
        // binary search for the bracketing knot interval
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.s[mid] <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (xa, xb) = (self.x[lo], self.x[hi]);
        let (sa, sb) = (self.s[lo], self.s[hi]);
        let mut x = if sb > sa {
            xa + (xb - xa) * (target - sa) / (sb - sa)
        } else {
            0.5 * (xa + xb)
        };
        // Newton on g(x) = sa + int_{xa}^{x} f - target with 5-pt Gauss per step
        for _ in 0..40 {
            let g = sa + gauss5(f, xa, x) - target;
            let d = f(x).max(1e-300);
            let step = g / d;
            x -= step;
            if x < xa {
                x = xa;
            }
            if x > xb {
                x = xb;
            }
            if step.abs() <= 1e-15 * (1.0 + x.abs()) {
                break;
            }
        }
        x
    }
}

/// 5-point Gauss-Legendre on [a, b].
pub fn gauss5<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    const X: [f64; 5] = [
        -0.906_179_845_938_664,
        -0.538_469_310_105_683,
        0.0,
        0.538_469_310_105_683,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.236_926_885_056_189,
        0.478_628_670_499_366,
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
    ];
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for i in 0..5 {
        acc += W[i] * f(c + h * X[i]);
    }
    acc * h
}

/// Least-squares fit of u ≈ A sin(kR + δ) over samples within [lo, hi];
/// returns (δ, rms residual relative to the fit amplitude).
pub(crate) fn sine_phase_fit(
    rs: &[f64],
    us: &[f64],
    k: f64,
    lo: f64,
    hi: f64,
) -> crate::error::Result<(f64, f64)> {
    use crate::error::Error;
    let (mut ss, mut sc, mut cc, mut su, mut cu) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut count = 0;
    for (i, &r) in rs.iter().enumerate() {
        if r < lo || r > hi {
            continue;
        }
        let (s, c) = (k * r).sin_cos();
        ss += s * s;
        sc += s * c;
        cc += c * c;
        su += s * us[i];
        cu += c * us[i];
        count += 1;
    }
    if count < 8 {
        return Err(Error::PhaseFitIllConditioned(0.0));
    }
    let det = ss * cc - sc * sc;
    if det.abs() < 1e-12 * ss * cc {
        return Err(Error::PhaseFitIllConditioned(k * (hi - lo)));
    }
    let a = (cu * -sc + su * cc) / det;
    let b = (ss * cu - sc * su) / det;
    let amp = (a * a + b * b).sqrt();
    let mut res2 = 0.0;
    let mut n2 = 0.0;
    for (i, &r) in rs.iter().enumerate() {
        if r < lo || r > hi {
            continue;
        }
        let (s, c) = (k * r).sin_cos();
        let d = us[i] - a * s - b * c;
        res2 += d * d;
        n2 += 1.0;
    }
    Ok((f64::atan2(b, a), (res2 / n2).sqrt() / amp.max(1e-300)))
}

/// Bisection root find on [a, b]; f(a) and f(b) must have opposite signs.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let mut fa = f(a);
    for _ in 0..iters {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fa < 0.0) == (fm < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Golden-section minimization on [a, b], returning (x_min, f_min).
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
