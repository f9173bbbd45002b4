use nalgebra::DMatrix;

use super::{check_dim, check_weights, univariate_residuals, ParamVector, ParametricFamily, Support, UnivariateFamily};
use crate::error::{Result, WleError};
use crate::residuals::ResidualConfig;
use crate::special::ln_factorial;

/// Poisson(θ) on {0, 1, 2, ...}.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Poisson;

impl Poisson {
    fn ln_pmf(theta: f64, k: f64) -> f64 {
        if theta == 0.0 {
            return if k == 0.0 { 0.0 } else { f64::NEG_INFINITY };
        }
        k * theta.ln() - theta - ln_factorial(k)
    }

    pub fn pmf(theta: f64, k: f64) -> f64 {
        Self::ln_pmf(theta, k).exp()
    }

    // Direct pmf summation; small counts only ever reach here.
    fn lower_sum(theta: f64, x: f64) -> f64 {
        let mut term = (-theta).exp();
        let mut total = term;
        let mut k = 0.0;
        while k < x {
            k += 1.0;
            term *= theta / k;
            total += term;
        }
        total.min(1.0)
    }

    // Σ_{j >= x} pmf(j), summed upward so deep-tail values keep their precision.
    fn upper_sum(theta: f64, x: f64) -> f64 {
        let mut term = Self::pmf(theta, x);
        let mut total = term;
        let mut k = x;
        while term > total * 1e-17 && term > 0.0 {
            k += 1.0;
            term *= theta / k;
            total += term;
            if k > x + 10_000.0 {
                break;
            }
        }
        total.min(1.0)
    }
}

impl ParametricFamily for Poisson {
    type Obs = f64;

    fn name(&self) -> &'static str {
        "poisson"
    }
    fn dim(&self) -> usize {
        1
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["theta"]
    }
    fn constraint(&self) -> &'static str {
        "theta > 0"
    }
    fn support(&self) -> Support {
        Support::NonNegativeIntegers
    }

    fn check_params(&self, theta: &[f64]) -> Result<()> {
        check_dim(theta, 1, "poisson")?;
        if theta[0] <= 0.0 {
            return Err(WleError::Domain(format!("poisson mean must be positive, got {}", theta[0])));
        }
        Ok(())
    }

    fn check_obs(&self, x: &f64) -> Result<()> {
        if !(x.is_finite() && *x >= 0.0 && x.fract() == 0.0) {
            return Err(WleError::Domain(format!("{x} is not a non-negative integer count")));
        }
        Ok(())
    }

    fn log_density(&self, theta: &[f64], x: &f64) -> f64 {
        Self::ln_pmf(theta[0], *x)
    }

    fn score_unchecked(&self, theta: &[f64], x: &f64) -> Vec<f64> {
        vec![x / theta[0] - 1.0]
    }

    fn fisher_information(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        self.check_params(theta)?;
        Ok(DMatrix::from_element(1, 1, 1.0 / theta[0]))
    }

    fn weighted_closed_form(&self, sample: &[f64], weights: &[f64]) -> Result<ParamVector> {
        let total = check_weights(sample.len(), weights)?;
        let mean = sample.iter().zip(weights).map(|(x, w)| w * x).sum::<f64>() / total;
        if mean <= 0.0 {
            return Err(WleError::Degenerate("weighted mean count is zero".into()));
        }
        Ok(ParamVector::new(vec![mean]))
    }

    fn residuals(&self, config: &ResidualConfig, sample: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
        univariate_residuals(self, config, sample, theta)
    }
}

impl UnivariateFamily for Poisson {
    fn is_discrete(&self) -> bool {
        true
    }

    fn cdf_and_survival_unchecked(&self, theta: &[f64], x: f64) -> (f64, f64) {
        let t = theta[0];
        let cdf = Self::lower_sum(t, x);
        let sf = if x == 0.0 {
            1.0
        } else if x > t {
            Self::upper_sum(t, x)
        } else {
            (1.0 - Self::lower_sum(t, x - 1.0)).max(0.0)
        };
        (cdf, sf)
    }

    fn score_jacobian(&self, theta: &[f64], x: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, -x / (theta[0] * theta[0]))
    }

    fn effective_range(&self, theta: &[f64]) -> (f64, f64) {
        // smallest k with P(X > k) < 1e-12
        let t = theta[0];
        let mut k = t.floor();
        while Self::upper_sum(t, k + 1.0) >= 1e-12 {
            k += 1.0;
        }
        (0.0, k)
    }

    fn median(&self, theta: &[f64]) -> f64 {
        let mut k = 0.0;
        while Self::lower_sum(theta[0], k) < 0.5 {
            k += 1.0;
        }
        k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn score_vanishes_at_mean() {
        assert_eq!(Poisson.score(&[2.0], &2.0).unwrap(), vec![0.0]);
    }

    #[test]
    fn cdf_and_survival_at_zero() {
        let (f, s) = Poisson.cdf_and_survival(&[1.0], 0.0).unwrap();
        assert!((f - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(s, 1.0);
    }

    #[test]
    fn discrete_identity_includes_point_mass() {
        for x in 0..12 {
            let x = x as f64;
            let (f, s) = Poisson.cdf_and_survival(&[3.3], x).unwrap();
            assert!((f + s - 1.0 - Poisson::pmf(3.3, x)).abs() < 1e-14);
        }
    }

    #[test]
    fn deep_tail_survival_is_not_zero() {
        // drosophila outlier at a robust mean: P(X >= 91) ~ 1e-130
        let (_, s) = Poisson.cdf_and_survival(&[0.3948], 91.0).unwrap();
        assert!(s > 0.0 && s < 1e-120);
        let exact = Poisson::pmf(0.3948, 91.0);
        assert!((s / exact - 1.0).abs() < 0.01);
    }

    #[test]
    fn gradient_of_zero_count_cdf() {
        // F_θ(0) = e^{-θ}; derivative -e^{-θ}
        let g = Poisson.cdf_gradient(&[1.0], 0.0).unwrap();
        assert!((g[0] + (-1.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn rejects_non_integer_and_boundary() {
        assert!(Poisson.score(&[1.0], &1.5).is_err());
        assert!(Poisson.score(&[0.0], &1.0).is_err());
        assert!(Poisson.fisher_information(&[-1.0]).is_err());
    }

    #[test]
    fn fisher_information_is_inverse_mean() {
        assert_eq!(Poisson.fisher_information(&[4.0]).unwrap()[(0, 0)], 0.25);
    }
}
