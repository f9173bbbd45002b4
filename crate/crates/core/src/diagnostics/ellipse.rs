//! Concentration ellipses of fitted bivariate normals.

use serde::{Deserialize, Serialize};

use super::csv_bytes;
use crate::error::{Result, WleError};
use crate::special::chi2_2_quantile;

/// {z : (z−μ)ᵀΣ⁻¹(z−μ) = χ²₂(coverage)}. `angle` (radians) is the direction
/// of the first semi-axis, in (−π/4, π/4].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub center: [f64; 2],
    pub semi_axes: [f64; 2],
    pub angle: f64,
    pub coverage: f64,
}

#[derive(Serialize)]
struct Vertex {
    x: f64,
    y: f64,
}

/// θ = (μ₁, μ₂, σ₁², σ₂², ρ).
pub fn concentration_ellipse(theta: &[f64], coverage: f64) -> Result<Ellipse> {
    if theta.len() != 5 {
        return Err(WleError::Domain(format!("bivariate normal needs 5 parameters, got {}", theta.len())));
    }
    if !(0.0..1.0).contains(&coverage) {
        return Err(WleError::Domain(format!("coverage {coverage} outside [0, 1)")));
    }
    let (a, d, rho) = (theta[2], theta[3], theta[4]);
    if !(a > 0.0 && d > 0.0 && rho.abs() < 1.0) {
        return Err(WleError::Domain("covariance matrix is not positive definite".into()));
    }
    let b = rho * (a * d).sqrt();
    let angle = if a == d {
        if b == 0.0 {
            0.0
        } else {
            b.signum() * std::f64::consts::FRAC_PI_4
        }
    } else {
        0.5 * (2.0 * b / (a - d)).atan()
    };
    let (c, s) = (angle.cos(), angle.sin());
    let along = a * c * c + 2.0 * b * s * c + d * s * s;
    let across = a * s * s - 2.0 * b * s * c + d * c * c;
    let k = chi2_2_quantile(coverage);
    Ok(Ellipse {
        center: [theta[0], theta[1]],
        semi_axes: [(k * along).sqrt(), (k * across.max(0.0)).sqrt()],
        angle,
        coverage,
    })
}

impl Ellipse {
    /// Closed polyline with `n` distinct vertices (the first repeated last).
    pub fn polyline(&self, n: usize) -> Vec<[f64; 2]> {
        let (c, s) = (self.angle.cos(), self.angle.sin());
        (0..=n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * (i % n.max(1)) as f64 / n.max(1) as f64;
                let (u, v) = (self.semi_axes[0] * t.cos(), self.semi_axes[1] * t.sin());
                [self.center[0] + c * u - s * v, self.center[1] + s * u + c * v]
            })
            .collect()
    }

    pub fn polyline_csv(&self, n: usize) -> Result<Vec<u8>> {
        csv_bytes(self.polyline(n).into_iter().map(|[x, y]| Vertex { x, y }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_circle() {
        let e = concentration_ellipse(&[0.0, 0.0, 1.0, 1.0, 0.0], 0.95).unwrap();
        assert!((e.semi_axes[0] - 5.991_464_547_107_979f64.sqrt()).abs() < 1e-10);
        assert_eq!(e.semi_axes[0], e.semi_axes[1]);
    }

    #[test]
    fn axis_aligned() {
        let e = concentration_ellipse(&[1.0, 2.0, 1.0, 4.0, 0.0], 0.5).unwrap();
        assert_eq!(e.angle, 0.0);
        assert!(e.semi_axes[1] > e.semi_axes[0]);
    }

    #[test]
    fn vertices_on_contour() {
        let th = [1.0, -1.0, 2.0, 0.5, 0.6];
        let e = concentration_ellipse(&th, 0.9).unwrap();
        let b = th[4] * (th[2] * th[3]).sqrt();
        let det = th[2] * th[3] - b * b;
        for [x, y] in e.polyline(16) {
            let (u, v) = (x - th[0], y - th[1]);
            let m = (th[3] * u * u - 2.0 * b * u * v + th[2] * v * v) / det;
            assert!((m - chi2_2_quantile(0.9)).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_coverage_is_a_point() {
        let e = concentration_ellipse(&[3.0, 4.0, 1.0, 2.0, 0.3], 0.0).unwrap();
        assert_eq!(e.semi_axes, [0.0, 0.0]);
        assert!(concentration_ellipse(&[0.0, 0.0, 1.0, 1.0, 1.0], 0.5).is_err());
    }
}
