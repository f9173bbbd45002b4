//! Population-level analyses: Fisher consistency, first- and second-order
//! influence, the mixture root scan and concentration ellipses.

mod ellipse;
mod influence;
mod mixture;
mod quadrature;

use nalgebra::DMatrix;

use crate::error::{Result, WleError};
use crate::models::{check_dim, check_weights, univariate_residuals, ParamVector, ParametricFamily, Support, UnivariateFamily};
use crate::residuals::ResidualConfig;
use crate::special::{normal_cdf, normal_pdf, normal_sf};

pub use ellipse::{concentration_ellipse, Ellipse};
pub use influence::{
    bias_curve, bias_curve_csv, expectation, fisher_consistency_check, influence_first_order, influence_second_order,
    BiasPoint, InfluenceReport,
};
pub use mixture::{mixture_root_scan, weighted_population_score, MixtureScan, NormalMixture};
pub use quadrature::{QuadResult, Quadrature};

/// N(μ, σ²) with σ² fixed; the scalar location model of the population
/// analyses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalLocation {
    pub variance: f64,
}

impl Default for NormalLocation {
    fn default() -> Self {
        NormalLocation { variance: 1.0 }
    }
}

impl ParametricFamily for NormalLocation {
    type Obs = f64;

    fn name(&self) -> &'static str {
        "normal_location"
    }
    fn dim(&self) -> usize {
        1
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["mu"]
    }
    fn constraint(&self) -> &'static str {
        "mu real"
    }
    fn support(&self) -> Support {
        Support::RealLine
    }

    fn check_params(&self, theta: &[f64]) -> Result<()> {
        check_dim(theta, 1, "normal location")?;
        if !(self.variance > 0.0) {
            return Err(WleError::Domain("known variance must be positive".into()));
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
        -0.5 * (2.0 * std::f64::consts::PI * self.variance).ln() - (x - theta[0]).powi(2) / (2.0 * self.variance)
    }

    fn score_unchecked(&self, theta: &[f64], x: &f64) -> Vec<f64> {
        vec![(x - theta[0]) / self.variance]
    }

    fn fisher_information(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        self.check_params(theta)?;
        Ok(DMatrix::from_element(1, 1, 1.0 / self.variance))
    }

    fn weighted_closed_form(&self, sample: &[f64], weights: &[f64]) -> Result<ParamVector> {
        let total = check_weights(sample.len(), weights)?;
        Ok(ParamVector::new(vec![
            sample.iter().zip(weights).map(|(x, w)| w * x).sum::<f64>() / total,
        ]))
    }

    fn residuals(&self, config: &ResidualConfig, sample: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
        univariate_residuals(self, config, sample, theta)
    }
}

impl UnivariateFamily for NormalLocation {
    fn is_discrete(&self) -> bool {
        false
    }

    fn cdf_and_survival_unchecked(&self, theta: &[f64], x: f64) -> (f64, f64) {
        let z = (x - theta[0]) / self.variance.sqrt();
        (normal_cdf(z), normal_sf(z))
    }

    fn cdf_gradient(&self, theta: &[f64], x: f64) -> Result<Vec<f64>> {
        self.check_params(theta)?;
        let sd = self.variance.sqrt();
        Ok(vec![-normal_pdf((x - theta[0]) / sd) / sd])
    }

    fn score_jacobian(&self, _theta: &[f64], _x: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, -1.0 / self.variance)
    }

    fn effective_range(&self, theta: &[f64]) -> (f64, f64) {
        let sd = self.variance.sqrt();
        (theta[0] - 10.0 * sd, theta[0] + 10.0 * sd)
    }

    fn median(&self, theta: &[f64]) -> f64 {
        theta[0]
    }
}

pub(crate) fn csv_bytes<R: serde::Serialize>(rows: impl IntoIterator<Item = R>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| WleError::Io(e.to_string()))
}
