//! Parametric families and the quantities the weighted estimating equation
//! consumes: log-density, score, distribution/survival functions, their
//! parameter gradients, Fisher information and a frozen-weight estimator.

mod bivariate;
mod exponential;
mod normal;
mod poisson;
mod regression;

use std::fmt;
use std::ops::Deref;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WleError};
use crate::residuals::ResidualConfig;

pub use bivariate::{BivariateNormal, CovarianceDivisor};
pub use exponential::Exponential;
pub use normal::Normal;
pub use poisson::Poisson;
pub use regression::{LinearRegression, Record};

/// Weight sums below this are treated as "no data left".
pub const MIN_WEIGHT_SUM: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Self {
        ParamVector(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Sup-norm distance scaled by `1 + max(|a|, |b|)`.
    pub fn relative_distance(&self, other: &ParamVector) -> f64 {
        let diff = self
            .0
            .iter()
            .zip(&other.0)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        diff / (1.0 + self.sup_norm().max(other.sup_norm()))
    }
}

impl Deref for ParamVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(v: Vec<f64>) -> Self {
        ParamVector(v)
    }
}

impl fmt::Display for ParamVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v:.6}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    NonNegativeIntegers,
    PositiveHalfLine,
    RealLine,
    Plane,
}

pub trait ParametricFamily: Sync {
    type Obs: Copy + Send + Sync + fmt::Debug;

    fn name(&self) -> &'static str;
    fn dim(&self) -> usize;
    fn param_names(&self) -> &'static [&'static str];
    /// Human-readable parameter-space constraint, e.g. `sigma2 > 0`.
    fn constraint(&self) -> &'static str;
    fn support(&self) -> Support;

    fn check_params(&self, theta: &[f64]) -> Result<()>;
    fn check_obs(&self, x: &Self::Obs) -> Result<()>;

    fn log_density(&self, theta: &[f64], x: &Self::Obs) -> f64;

    /// Gradient of the log-density in θ. Callers must have validated θ and x.
    fn score_unchecked(&self, theta: &[f64], x: &Self::Obs) -> Vec<f64>;

    fn score(&self, theta: &[f64], x: &Self::Obs) -> Result<Vec<f64>> {
        self.check_params(theta)?;
        self.check_obs(x)?;
        Ok(self.score_unchecked(theta, x))
    }

    fn fisher_information(&self, theta: &[f64]) -> Result<DMatrix<f64>>;

    /// Solves Σ wᵢ u_θ(xᵢ) = 0 for θ with the weights held fixed.
    fn weighted_closed_form(&self, sample: &[Self::Obs], weights: &[f64]) -> Result<ParamVector>;

    fn mle(&self, sample: &[Self::Obs]) -> Result<ParamVector> {
        self.weighted_closed_form(sample, &vec![1.0; sample.len()])
    }

    /// Standardized residuals τ at every observation. Observations that sit
    /// beyond representable tail probability get `f64::INFINITY`.
    fn residuals(&self, config: &ResidualConfig, sample: &[Self::Obs], theta: &[f64]) -> Result<Vec<f64>>;

    /// True when a scale parameter has collapsed relative to the data spread
    /// (a fit through a handful of exactly-aligned points).
    fn scale_collapsed(&self, _sample: &[Self::Obs], _theta: &[f64]) -> bool {
        false
    }

    fn validate_sample(&self, sample: &[Self::Obs]) -> Result<()> {
        if sample.is_empty() {
            return Err(WleError::Domain("sample must contain at least one observation".into()));
        }
        sample.iter().try_for_each(|x| self.check_obs(x))
    }
}

/// Families on the real line (or a lattice in it) with a CDF.
pub trait UnivariateFamily: ParametricFamily<Obs = f64> {
    fn is_discrete(&self) -> bool;

    fn density(&self, theta: &[f64], x: f64) -> f64 {
        self.log_density(theta, &x).exp()
    }

    /// (P(X <= x), P(X >= x)).
    fn cdf_and_survival_unchecked(&self, theta: &[f64], x: f64) -> (f64, f64);

    fn cdf_and_survival(&self, theta: &[f64], x: f64) -> Result<(f64, f64)> {
        self.check_params(theta)?;
        self.check_obs(&x)?;
        Ok(self.cdf_and_survival_unchecked(theta, x))
    }

    /// ∇_θ F_θ(x). Default is a central difference with step
    /// 1e-6·max(1, |θ_j|) per component.
    fn cdf_gradient(&self, theta: &[f64], x: f64) -> Result<Vec<f64>> {
        self.check_params(theta)?;
        self.check_obs(&x)?;
        Ok(central_difference(theta, |t| self.cdf_and_survival_unchecked(t, x).0))
    }

    /// ∇_θ S_θ(x) with S(x) = P(X >= x).
    fn survival_gradient(&self, theta: &[f64], x: f64) -> Result<Vec<f64>> {
        if self.is_discrete() {
            self.check_params(theta)?;
            self.check_obs(&x)?;
            Ok(central_difference(theta, |t| self.cdf_and_survival_unchecked(t, x).1))
        } else {
            Ok(self.cdf_gradient(theta, x)?.into_iter().map(|g| -g).collect())
        }
    }

    /// ∇_θ u_θ(x), the Hessian of the log-density.
    fn score_jacobian(&self, theta: &[f64], x: f64) -> DMatrix<f64>;

    /// Integration window outside which the density mass is below 1e-12
    /// (continuous) or the summation cut-off (discrete).
    fn effective_range(&self, theta: &[f64]) -> (f64, f64);

    /// Median of F_θ, the split point between the lower- and upper-tail regions.
    fn median(&self, theta: &[f64]) -> f64;
}

pub(crate) fn central_difference(theta: &[f64], f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut t = theta.to_vec();
    (0..theta.len())
        .map(|j| {
            let h = 1e-6 * theta[j].abs().max(1.0);
            t[j] = theta[j] + h;
            let up = f(&t);
            t[j] = theta[j] - h;
            let down = f(&t);
            t[j] = theta[j];
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub(crate) fn check_dim(theta: &[f64], d: usize, name: &str) -> Result<()> {
    if theta.len() != d {
        return Err(WleError::Domain(format!(
            "{name} expects {d} parameters, got {}",
            theta.len()
        )));
    }
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(WleError::Domain(format!("{name} parameters must be finite")));
    }
    Ok(())
}

pub(crate) fn check_weights(n: usize, weights: &[f64]) -> Result<f64> {
    if weights.len() != n {
        return Err(WleError::InvalidConfig(format!(
            "{} weights for {n} observations",
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
        return Err(WleError::InvalidConfig("weights must lie in [0, 1]".into()));
    }
    let total: f64 = weights.iter().sum();
    if total < MIN_WEIGHT_SUM {
        return Err(WleError::Degenerate(format!("weight sum {total:e} below {MIN_WEIGHT_SUM:e}")));
    }
    Ok(total)
}

/// Residuals for a univariate family from its sorted empirical functions.
pub(crate) fn univariate_residuals<F: UnivariateFamily + ?Sized>(
    family: &F,
    config: &ResidualConfig,
    sample: &[f64],
    theta: &[f64],
) -> Result<Vec<f64>> {
    family.check_params(theta)?;
    let emp = crate::residuals::EmpiricalFunctions::new(sample)?;
    Ok(sample
        .iter()
        .map(|&x| {
            let (f, s) = family.cdf_and_survival_unchecked(theta, x);
            config.tail_residual(emp.cdf(x), emp.survival(x), f, s)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_distance_uses_scale_guard() {
        let a = ParamVector::new(vec![100.0, 1.0]);
        let b = ParamVector::new(vec![100.5, 1.0]);
        assert!((a.relative_distance(&b) - 0.5 / 101.5).abs() < 1e-15);
    }

    #[test]
    fn check_weights_rejects_zero_mass() {
        assert!(matches!(check_weights(2, &[0.0, 0.0]), Err(WleError::Degenerate(_))));
        assert!(check_weights(2, &[0.0, 1.5]).is_err());
        assert!(check_weights(3, &[1.0, 1.0]).is_err());
    }
}
