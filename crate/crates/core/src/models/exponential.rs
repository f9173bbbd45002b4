use nalgebra::DMatrix;

use super::{check_dim, check_weights, univariate_residuals, ParamVector, ParametricFamily, Support, UnivariateFamily};
use crate::error::{Result, WleError};
use crate::residuals::ResidualConfig;

/// Exponential with rate λ: f(x) = λ e^{-λx}, x > 0.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Exponential;

impl ParametricFamily for Exponential {
    type Obs = f64;

    fn name(&self) -> &'static str {
        "exponential"
    }
    fn dim(&self) -> usize {
        1
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["lambda"]
    }
    fn constraint(&self) -> &'static str {
        "lambda > 0"
    }
    fn support(&self) -> Support {
        Support::PositiveHalfLine
    }

    fn check_params(&self, theta: &[f64]) -> Result<()> {
        check_dim(theta, 1, "exponential")?;
        if theta[0] <= 0.0 {
            return Err(WleError::Domain(format!("rate must be positive, got {}", theta[0])));
        }
        Ok(())
    }

    fn check_obs(&self, x: &f64) -> Result<()> {
        if !(x.is_finite() && *x >= 0.0) {
            return Err(WleError::Domain(format!("{x} is outside [0, inf)")));
        }
        Ok(())
    }

    fn log_density(&self, theta: &[f64], x: &f64) -> f64 {
        theta[0].ln() - theta[0] * x
    }

    fn score_unchecked(&self, theta: &[f64], x: &f64) -> Vec<f64> {
        vec![1.0 / theta[0] - x]
    }

    fn fisher_information(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        self.check_params(theta)?;
        Ok(DMatrix::from_element(1, 1, 1.0 / (theta[0] * theta[0])))
    }

    fn weighted_closed_form(&self, sample: &[f64], weights: &[f64]) -> Result<ParamVector> {
        let total = check_weights(sample.len(), weights)?;
        let mean = sample.iter().zip(weights).map(|(x, w)| w * x).sum::<f64>() / total;
        if mean <= 0.0 {
            return Err(WleError::Degenerate("weighted mean is zero".into()));
        }
        Ok(ParamVector::new(vec![1.0 / mean]))
    }

    fn residuals(&self, config: &ResidualConfig, sample: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
        univariate_residuals(self, config, sample, theta)
    }
}

impl UnivariateFamily for Exponential {
    fn is_discrete(&self) -> bool {
        false
    }

    fn cdf_and_survival_unchecked(&self, theta: &[f64], x: f64) -> (f64, f64) {
        let e = -theta[0] * x;
        (-e.exp_m1(), e.exp())
    }

    fn cdf_gradient(&self, theta: &[f64], x: f64) -> Result<Vec<f64>> {
        self.check_params(theta)?;
        self.check_obs(&x)?;
        Ok(vec![x * (-theta[0] * x).exp()])
    }

    fn score_jacobian(&self, theta: &[f64], _x: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, -1.0 / (theta[0] * theta[0]))
    }

    fn effective_range(&self, theta: &[f64]) -> (f64, f64) {
        // e^{-60} ≈ 9e-27
        (0.0, 60.0 / theta[0])
    }

    fn median(&self, theta: &[f64]) -> f64 {
        std::f64::consts::LN_2 / theta[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn score_zero_at_mean() {
        assert_eq!(Exponential.score(&[0.5], &2.0).unwrap(), vec![0.0]);
    }

    #[test]
    fn median_splits_mass() {
        let (f, s) = Exponential.cdf_and_survival(&[1.0], std::f64::consts::LN_2).unwrap();
        assert!((f - 0.5).abs() < 1e-15 && (s - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rate_gradient() {
        let g = Exponential.cdf_gradient(&[1.0], 1.0).unwrap();
        assert!((g[0] - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn zero_weight_observation_ignored() {
        let t = Exponential.weighted_closed_form(&[1.0, 3.0], &[1.0, 0.0]).unwrap();
        assert_eq!(t.as_slice(), &[1.0]);
    }

    #[test]
    fn fisher_information_rate() {
        assert_eq!(Exponential.fisher_information(&[2.0]).unwrap()[(0, 0)], 0.25);
    }

    #[test]
    fn negative_observation_is_domain_error() {
        assert!(Exponential.score(&[1.0], &-0.1).is_err());
    }
}
