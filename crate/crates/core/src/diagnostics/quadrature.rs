//! Adaptive composite Gauss-Legendre quadrature for vector integrands.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WleError};
use crate::special::{GL12, GL20};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    /// Absolute tolerance on the whole integral, per component.
    pub tol: f64,
    pub max_depth: u32,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            tol: 1e-8,
            max_depth: 40,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadResult {
    pub value: Vec<f64>,
    pub error: f64,
    /// False when some panel hit the depth limit before meeting its share
    /// of the tolerance.
    pub converged: bool,
}

impl QuadResult {
    pub fn into_result(self) -> Result<Vec<f64>> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(WleError::Quadrature(format!("error estimate {:e} above tolerance", self.error)))
        }
    }
}

fn apply<const N: usize>(rule: &[(f64, f64); N], f: &impl Fn(f64) -> Vec<f64>, a: f64, b: f64, out: &mut [f64]) {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    out.iter_mut().for_each(|v| *v = 0.0);
    for &(w, x) in rule {
        for pt in [c + h * x, c - h * x] {
            for (o, v) in out.iter_mut().zip(f(pt)) {
                *o += w * h * v;
            }
        }
    }
}

impl Quadrature {
    pub fn new(tol: f64) -> Self {
        Quadrature {
            tol,
            ..Quadrature::default()
        }
    }

    /// ∫ f over [points[0], points.last()], with panel edges at every point.
    /// `dim` is the length of the vectors `f` returns.
    pub fn integrate_vec(&self, dim: usize, points: &[f64], f: impl Fn(f64) -> Vec<f64>) -> QuadResult {
        let mut pts: Vec<f64> = points.iter().copied().filter(|p| p.is_finite()).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mut value = vec![0.0; dim];
        let mut error = 0.0;
        let mut converged = true;
        if pts.len() < 2 {
            return QuadResult { value, error, converged };
        }
        let total = pts[pts.len() - 1] - pts[0];
        let (mut lo, mut hi) = (vec![0.0; dim], vec![0.0; dim]);
        let mut stack: Vec<(f64, f64, u32)> = pts.windows(2).rev().map(|w| (w[0], w[1], 0)).collect();
        while let Some((a, b, depth)) = stack.pop() {
            apply(&GL12, &f, a, b, &mut lo);
            apply(&GL20, &f, a, b, &mut hi);
            let err = lo.iter().zip(&hi).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
            let share = self.tol * (b - a) / total;
            if err <= share || depth >= self.max_depth || !err.is_finite() {
                if err > share || !err.is_finite() {
                    converged = false;
                }
                for (v, h) in value.iter_mut().zip(&hi) {
                    *v += h;
                }
                error += err;
            } else {
                let m = 0.5 * (a + b);
                stack.push((m, b, depth + 1));
                stack.push((a, m, depth + 1));
            }
        }
        QuadResult { value, error, converged }
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> QuadResult {
        self.integrate_vec(1, &[a, b], |x| vec![f(x)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = Quadrature::default().integrate(0.0, 2.0, |x| x.powi(7));
        assert!((r.value[0] - 32.0).abs() < 1e-12);
        assert!(r.converged);
    }

    #[test]
    fn kink_at_breakpoint() {
        let r = Quadrature::default().integrate_vec(1, &[-1.0, 0.3, 2.0], |x| vec![(x - 0.3).abs()]);
        assert!((r.value[0] - (1.3f64.powi(2) + 1.7f64.powi(2)) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_mass() {
        let r = Quadrature::default().integrate(-10.0, 10.0, crate::special::normal_pdf);
        assert!((r.value[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn depth_limit_reports_failure() {
        let q = Quadrature { tol: 1e-14, max_depth: 2 };
        let r = q.integrate(0.0, 1.0, |x| 1.0 / x.sqrt());
        assert!(!r.converged);
        assert!(r.into_result().is_err());
    }
}
