//! Natural cubic spline on a strictly increasing grid.
//!
//! The interpolant is C² so its second derivative is continuous and piecewise
//! linear, which keeps the acoustic curvature of a tabulated profile finite.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    /// Builds a natural spline (zero second derivative at both ends).
    pub fn natural(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n != y.len() {
            return Err(Error::InvalidProfile(format!(
                "grid has {n} depths but {} values",
                y.len()
            )));
        }
        if n < 4 {
            return Err(Error::InvalidProfile(format!(
                "at least 4 grid points are required, got {n}"
            )));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidProfile("non-finite grid value".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidProfile(
                "depth grid must be strictly increasing".into(),
            ));
        }

        // Tridiagonal system for interior second derivatives (Thomas algorithm).
        let mut m = vec![0.0; n];
        let k = n - 2;
        let mut diag = vec![0.0; k];
        let mut upper = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            diag[i - 1] = 2.0 * (h0 + h1);
            upper[i - 1] = h1;
            rhs[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        }
        for i in 1..k {
            let lower = x[i + 1] - x[i];
            let w = lower / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        m[k] = rhs[k - 1] / diag[k - 1];
        for i in (0..k - 1).rev() {
            m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
        }

        Ok(Self { x, y, m })
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    fn interval(&self, xq: f64) -> usize {
        let n = self.x.len();
        match self.x.partition_point(|&v| v <= xq) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        }
    }

    /// Value, first and second derivative at `xq` (caller checks the range).
    pub fn eval(&self, xq: f64) -> (f64, f64, f64) {
        let i = self.interval(xq);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - xq) / h;
        let b = (xq - self.x[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let v = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d = (y1 - y0) / h + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        let dd = a * m0 + b * m1;
        (v, d, dd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_a_cubic_interior_second_derivative_is_linear() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let s = CubicSpline::natural(x, y).unwrap();
        let (v, d, dd) = s.eval(3.3);
        assert!((v - 7.6).abs() < 1e-12);
        assert!((d - 2.0).abs() < 1e-12);
        assert!(dd.abs() < 1e-12);
    }

    #[test]
    fn interpolates_knots_and_has_natural_ends() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| (0.3 * v).sin()).collect();
        let s = CubicSpline::natural(x.clone(), y.clone()).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert!((s.eval(*xi).0 - yi).abs() < 1e-14);
        }
        assert!(s.eval(0.0).2.abs() < 1e-14);
        assert!(s.eval(9.0).2.abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(CubicSpline::natural(vec![0.0, 1.0, 2.0], vec![1.0; 3]).is_err());
        assert!(CubicSpline::natural(vec![0.0, 1.0, 1.0, 2.0], vec![1.0; 4]).is_err());
        assert!(CubicSpline::natural(vec![0.0, 1.0, 2.0, 3.0], vec![1.0; 3]).is_err());
    }
}
