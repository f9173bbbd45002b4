use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{check_dim, check_weights, ParamVector, ParametricFamily, Support};
use crate::error::{Result, WleError};
use crate::residuals::{QuadrantCounter, ResidualConfig};
use crate::special::bvn_quadrants;

/// Divisor of the weighted second moments in the closed-form step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceDivisor {
    /// Σw; with unit weights this is the MLE.
    #[default]
    WeightSum,
    /// Σw − Σw²/Σw, the reliability-weight unbiased form.
    Unbiased,
}

/// Bivariate normal with parameters (μ₁, μ₂, σ₁², σ₂², ρ).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BivariateNormal {
    pub divisor: CovarianceDivisor,
}

impl BivariateNormal {
    pub const fn new(divisor: CovarianceDivisor) -> Self {
        BivariateNormal { divisor }
    }

    /// Model masses of the quadrants around (x, y): ll, lg, gl, gg.
    pub fn quadrant_probabilities(&self, theta: &[f64], point: &[f64; 2]) -> Result<[f64; 4]> {
        self.check_params(theta)?;
        self.check_obs(point)?;
        Ok(self.quadrants_unchecked(theta, point))
    }

    fn quadrants_unchecked(&self, theta: &[f64], point: &[f64; 2]) -> [f64; 4] {
        let h = (point[0] - theta[0]) / theta[2].sqrt();
        let k = (point[1] - theta[1]) / theta[3].sqrt();
        bvn_quadrants(h, k, theta[4])
    }

    pub fn covariance(theta: &[f64]) -> Matrix2<f64> {
        let c = theta[4] * (theta[2] * theta[3]).sqrt();
        Matrix2::new(theta[2], c, c, theta[3])
    }

    /// Parameter vector from mean and covariance entries.
    pub fn from_moments(mean: [f64; 2], var: [f64; 2], cov: f64) -> ParamVector {
        ParamVector::new(vec![mean[0], mean[1], var[0], var[1], cov / (var[0] * var[1]).sqrt()])
    }
}

// Probabilists' Gauss-Hermite rule via the Golub-Welsch eigenproblem.
fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        let b = (i as f64).sqrt();
        j[(i, i - 1)] = b;
        j[(i - 1, i)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let weights = (0..n).map(|i| eig.eigenvectors[(0, i)].powi(2)).collect();
    (eig.eigenvalues.iter().copied().collect(), weights)
}

impl ParametricFamily for BivariateNormal {
    type Obs = [f64; 2];

    fn name(&self) -> &'static str {
        "bivariate_normal"
    }
    fn dim(&self) -> usize {
        5
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["mu1", "mu2", "sigma1_sq", "sigma2_sq", "rho"]
    }
    fn constraint(&self) -> &'static str {
        "sigma1_sq > 0, sigma2_sq > 0, |rho| < 1"
    }
    fn support(&self) -> Support {
        Support::Plane
    }

    fn check_params(&self, theta: &[f64]) -> Result<()> {
        check_dim(theta, 5, "bivariate normal")?;
        if theta[2] <= 0.0 || theta[3] <= 0.0 {
            return Err(WleError::Domain("variances must be positive".into()));
        }
        if theta[4].abs() >= 1.0 {
            return Err(WleError::Domain(format!("correlation {} outside (-1, 1)", theta[4])));
        }
        Ok(())
    }

    fn check_obs(&self, x: &[f64; 2]) -> Result<()> {
        if !(x[0].is_finite() && x[1].is_finite()) {
            return Err(WleError::Domain("observation must be finite".into()));
        }
        Ok(())
    }

    fn log_density(&self, theta: &[f64], x: &[f64; 2]) -> f64 {
        let (s1, s2, r) = (theta[2].sqrt(), theta[3].sqrt(), theta[4]);
        let z1 = (x[0] - theta[0]) / s1;
        let z2 = (x[1] - theta[1]) / s2;
        let one_r2 = 1.0 - r * r;
        let q = z1 * z1 - 2.0 * r * z1 * z2 + z2 * z2;
        -(2.0 * std::f64::consts::PI * s1 * s2).ln() - 0.5 * one_r2.ln() - q / (2.0 * one_r2)
    }

    fn score_unchecked(&self, theta: &[f64], x: &[f64; 2]) -> Vec<f64> {
        let (v1, v2, r) = (theta[2], theta[3], theta[4]);
        let (s1, s2) = (v1.sqrt(), v2.sqrt());
        let z1 = (x[0] - theta[0]) / s1;
        let z2 = (x[1] - theta[1]) / s2;
        let one_r2 = 1.0 - r * r;
        let q = z1 * z1 - 2.0 * r * z1 * z2 + z2 * z2;
        vec![
            (z1 - r * z2) / (s1 * one_r2),
            (z2 - r * z1) / (s2 * one_r2),
            -0.5 / v1 + z1 * (z1 - r * z2) / (2.0 * v1 * one_r2),
            -0.5 / v2 + z2 * (z2 - r * z1) / (2.0 * v2 * one_r2),
            r / one_r2 + z1 * z2 / one_r2 - q * r / (one_r2 * one_r2),
        ]
    }

    /// E[u uᵀ] by a 10×10 Gauss-Hermite product rule, exact here because
    /// the score is a quadratic polynomial in the standardized coordinates.
    fn fisher_information(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        self.check_params(theta)?;
        let chol = Self::covariance(theta)
            .cholesky()
            .ok_or_else(|| WleError::Singular("covariance not positive definite".into()))?;
        let l = chol.l();
        let (nodes, w) = gauss_hermite(10);
        let mut info = DMatrix::<f64>::zeros(5, 5);
        for (a, wa) in nodes.iter().zip(&w) {
            for (b, wb) in nodes.iter().zip(&w) {
                let pt = [
                    theta[0] + l[(0, 0)] * a,
                    theta[1] + l[(1, 0)] * a + l[(1, 1)] * b,
                ];
                let u = DVector::from_vec(self.score_unchecked(theta, &pt));
                info += (wa * wb) * &u * u.transpose();
            }
        }
        Ok(info)
    }

    fn weighted_closed_form(&self, sample: &[[f64; 2]], weights: &[f64]) -> Result<ParamVector> {
        let total = check_weights(sample.len(), weights)?;
        let m1 = sample.iter().zip(weights).map(|(p, w)| w * p[0]).sum::<f64>() / total;
        let m2 = sample.iter().zip(weights).map(|(p, w)| w * p[1]).sum::<f64>() / total;
        let (mut v1, mut v2, mut c) = (0.0, 0.0, 0.0);
        for (p, w) in sample.iter().zip(weights) {
            let (d1, d2) = (p[0] - m1, p[1] - m2);
            v1 += w * d1 * d1;
            v2 += w * d2 * d2;
            c += w * d1 * d2;
        }
        let div = match self.divisor {
            CovarianceDivisor::WeightSum => total,
            CovarianceDivisor::Unbiased => total - weights.iter().map(|w| w * w).sum::<f64>() / total,
        };
        if !(div > 0.0) {
            return Err(WleError::Degenerate("weighted covariance divisor is not positive".into()));
        }
        v1 /= div;
        v2 /= div;
        c /= div;
        if !(v1 > 0.0 && v2 > 0.0) {
            return Err(WleError::Degenerate("weighted marginal variance is zero".into()));
        }
        let rho = c / (v1 * v2).sqrt();
        if !(rho.abs() < 1.0) {
            return Err(WleError::Degenerate("weighted correlation is +-1".into()));
        }
        Ok(ParamVector::new(vec![m1, m2, v1, v2, rho]))
    }

    fn residuals(&self, config: &ResidualConfig, sample: &[[f64; 2]], theta: &[f64]) -> Result<Vec<f64>> {
        self.check_params(theta)?;
        let counter = QuadrantCounter::new(sample)?;
        Ok(sample
            .iter()
            .map(|p| config.quadrant_residual(&counter.masses(p), &self.quadrants_unchecked(theta, p)))
            .collect())
    }

    fn scale_collapsed(&self, sample: &[[f64; 2]], theta: &[f64]) -> bool {
        match self.mle(sample) {
            Ok(m) => theta[2] < 1e-8 * m[2] || theta[3] < 1e-8 * m[3] || 1.0 - theta[4].abs() < 1e-10,
            Err(_) => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_hermite_moments() {
        let (x, w) = gauss_hermite(10);
        let m = |p: i32| x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum::<f64>();
        assert!((m(0) - 1.0).abs() < 1e-13);
        assert!((m(2) - 1.0).abs() < 1e-12);
        assert!((m(4) - 3.0).abs() < 1e-11);
    }

    #[test]
    fn mean_block_of_information_is_precision() {
        let theta = [1.0, -2.0, 4.0, 0.25, 0.6];
        let info = BivariateNormal::default().fisher_information(&theta).unwrap();
        let prec = BivariateNormal::covariance(&theta).try_inverse().unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((info[(i, j)] - prec[(i, j)]).abs() < 1e-10);
            }
            for j in 2..5 {
                assert!(info[(i, j)].abs() < 1e-10);
            }
        }
    }

    #[test]
    fn correlation_information_independent_case() {
        // with rho = 0: I_rho,rho = 1, and rho is orthogonal to the variances
        let info = BivariateNormal::default().fisher_information(&[0.0, 0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!((info[(4, 4)] - 1.0).abs() < 1e-10);
        assert!((info[(2, 2)] - 0.5).abs() < 1e-10);
        assert!(info[(2, 4)].abs() < 1e-10);
    }

    #[test]
    fn quadrants_at_center_of_independent_normal() {
        let q = BivariateNormal::default()
            .quadrant_probabilities(&[0.0, 0.0, 1.0, 1.0, 0.0], &[0.0, 0.0])
            .unwrap();
        for v in q {
            assert!((v - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn boundary_correlation_rejected() {
        assert!(BivariateNormal::default().score(&[0.0, 0.0, 1.0, 1.0, 1.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn unit_weights_recover_moments() {
        let pts = [[0.0, 0.0], [2.0, 1.0], [1.0, 3.0], [3.0, 2.0]];
        let t = BivariateNormal::default().mle(&pts).unwrap();
        assert_eq!(&t[..2], &[1.5, 1.5]);
        assert!((t[2] - 1.25).abs() < 1e-15 && (t[3] - 1.25).abs() < 1e-15);
        assert!((t[4] - 0.4).abs() < 1e-15);
        let u = BivariateNormal::new(CovarianceDivisor::Unbiased).mle(&pts).unwrap();
        assert!((u[2] - 5.0 / 3.0).abs() < 1e-15 && (u[4] - 0.4).abs() < 1e-15);
    }
}
