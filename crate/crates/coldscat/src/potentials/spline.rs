//! Natural cubic spline interpolation for tabulated potential bodies.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// second derivatives at the knots (natural: zero at both ends)
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 4 {
            return Err(Error::TooFewSamples { need: 4, got: n });
        }
        if x.len() != y.len() {
            return Err(Error::Invalid("abscissa/ordinate length mismatch".into()));
        }
        for i in 1..n {
            if x[i] <= x[i - 1] {
                return Err(Error::NonMonotoneSamples(i));
            }
        }
        // tridiagonal system for the second derivatives, natural boundaries
        let mut m = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let mut upper = vec![0.0; n];
        diag[0] = 1.0;
        diag[n - 1] = 1.0;
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            diag[i] = 2.0 * (h0 + h1);
            upper[i] = h1;
            rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        }
        // forward sweep (lower diagonal of row i is h0 = x[i]-x[i-1])
        for i in 1..n - 1 {
            let lower = if i == 1 { 0.0 } else { x[i] - x[i - 1] };
            if i > 1 {
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
        }
        for i in (1..n - 1).rev() {
            m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
        }
        Ok(CubicSpline { x, y, m })
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.x.last().unwrap()
    }

    fn segment(&self, q: f64) -> usize {
        let n = self.x.len();
        if q <= self.x[0] {
            return 0;
        }
        if q >= self.x[n - 2] {
            return n - 2;
        }
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.x[mid] <= q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Evaluate. Outside the table the end segments extrapolate linearly
    /// with the boundary slope.
    pub fn eval(&self, q: f64) -> f64 {
        let n = self.x.len();
        if q < self.x[0] {
            return self.y[0] + self.derivative(self.x[0]) * (q - self.x[0]);
        }
        if q > self.x[n - 1] {
            return self.y[n - 1] + self.derivative(self.x[n - 1]) * (q - self.x[n - 1]);
        }
        let i = self.segment(q);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - q) / h;
        let b = (q - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn derivative(&self, q: f64) -> f64 {
        let n = self.x.len();
        let qc = q.clamp(self.x[0], self.x[n - 1]);
        let i = self.segment(qc);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - qc) / h;
        let b = (qc - self.x[i]) / h;
        (self.y[i + 1] - self.y[i]) / h
            + ((3.0 * b * b - 1.0) * self.m[i + 1] - (3.0 * a * a - 1.0) * self.m[i]) * h / 6.0
    }
}
