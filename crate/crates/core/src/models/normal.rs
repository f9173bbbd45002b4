use nalgebra::DMatrix;

use super::{check_dim, check_weights, univariate_residuals, ParamVector, ParametricFamily, Support, UnivariateFamily};
use crate::error::{Result, WleError};
use crate::residuals::ResidualConfig;
use crate::special::{normal_cdf, normal_pdf, normal_sf};

/// Normal(μ, σ²), parametrized by the variance.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Normal;

impl ParametricFamily for Normal {
    type Obs = f64;

    fn name(&self) -> &'static str {
        "normal"
    }
    fn dim(&self) -> usize {
        2
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["mu", "sigma2"]
    }
    fn constraint(&self) -> &'static str {
        "sigma2 > 0"
    }
    fn support(&self) -> Support {
        Support::RealLine
    }

    fn check_params(&self, theta: &[f64]) -> Result<()> {
        check_dim(theta, 2, "normal")?;
        if theta[1] <= 0.0 {
            return Err(WleError::Domain(format!("variance must be positive, got {}", theta[1])));
        }
        Ok(())
    }

    fn check_obs(&self, x: &f64) -> Result<()> {
        if !x.is_finite() {
            return Err(WleError::Domain("observation must be finite".into()));
        }
        Ok(())
    }

    fn log_density(&self, theta: &[f64], x: &f64) -> f64 {
        let (mu, v) = (theta[0], theta[1]);
        -0.5 * (2.0 * std::f64::consts::PI * v).ln() - (x - mu).powi(2) / (2.0 * v)
    }

    fn score_unchecked(&self, theta: &[f64], x: &f64) -> Vec<f64> {
        let (mu, v) = (theta[0], theta[1]);
        let d = x - mu;
        vec![d / v, (d * d - v) / (2.0 * v * v)]
    }

    fn fisher_information(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        self.check_params(theta)?;
        let v = theta[1];
        Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0 / v, 1.0 / (2.0 * v * v)])))
    }

    fn weighted_closed_form(&self, sample: &[f64], weights: &[f64]) -> Result<ParamVector> {
        let total = check_weights(sample.len(), weights)?;
        let mu = sample.iter().zip(weights).map(|(x, w)| w * x).sum::<f64>() / total;
        let var = sample.iter().zip(weights).map(|(x, w)| w * (x - mu).powi(2)).sum::<f64>() / total;
        if !(var > 0.0) {
            return Err(WleError::Degenerate("weighted variance is zero".into()));
        }
        Ok(ParamVector::new(vec![mu, var]))
    }

    fn residuals(&self, config: &ResidualConfig, sample: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
        univariate_residuals(self, config, sample, theta)
    }

    fn scale_collapsed(&self, sample: &[f64], theta: &[f64]) -> bool {
        let spread = self.mle(sample).map(|t| t[1]).unwrap_or(0.0);
        theta[1] < 1e-8 * spread
    }
}

impl UnivariateFamily for Normal {
    fn is_discrete(&self) -> bool {
        false
    }

    fn cdf_and_survival_unchecked(&self, theta: &[f64], x: f64) -> (f64, f64) {
        let z = (x - theta[0]) / theta[1].sqrt();
        (normal_cdf(z), normal_sf(z))
    }

    fn cdf_gradient(&self, theta: &[f64], x: f64) -> Result<Vec<f64>> {
        self.check_params(theta)?;
        let sd = theta[1].sqrt();
        let z = (x - theta[0]) / sd;
        let phi = normal_pdf(z);
        Ok(vec![-phi / sd, -phi * z / (2.0 * theta[1])])
    }

    fn score_jacobian(&self, theta: &[f64], x: f64) -> DMatrix<f64> {
        let (mu, v) = (theta[0], theta[1]);
        let d = x - mu;
        let off = -d / (v * v);
        DMatrix::from_row_slice(2, 2, &[-1.0 / v, off, off, 0.5 / (v * v) - d * d / (v * v * v)])
    }

    fn effective_range(&self, theta: &[f64]) -> (f64, f64) {
        let sd = theta[1].sqrt();
        (theta[0] - 10.0 * sd, theta[0] + 10.0 * sd)
    }

    fn median(&self, theta: &[f64]) -> f64 {
        theta[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_score_at_one() {
        assert_eq!(Normal.score(&[0.0, 1.0], &1.0).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn symmetric_cdf_at_mean() {
        assert_eq!(Normal.cdf_and_survival(&[0.0, 1.0], 0.0).unwrap(), (0.5, 0.5));
    }

    #[test]
    fn mean_gradient_at_zero() {
        let g = Normal.cdf_gradient(&[0.0, 1.0], 0.0).unwrap();
        assert!((g[0] + 0.398_942_280_401_432_7).abs() < 1e-15);
        assert_eq!(g[1], 0.0);
    }

    #[test]
    fn fisher_information_standard() {
        let i = Normal.fisher_information(&[0.0, 1.0]).unwrap();
        assert_eq!(i, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.5]));
    }

    #[test]
    fn weighted_fit_of_two_points() {
        let t = Normal.weighted_closed_form(&[-1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(t.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn constant_sample_is_degenerate() {
        assert!(matches!(
            Normal.weighted_closed_form(&[2.0, 2.0, 2.0], &[1.0; 3]),
            Err(WleError::Degenerate(_))
        ));
    }

    #[test]
    fn rejects_nonpositive_variance() {
        assert!(Normal.score(&[0.0, 0.0], &1.0).is_err());
        assert!(Normal.cdf_and_survival(&[0.0, -1.0], 1.0).is_err());
    }
}
