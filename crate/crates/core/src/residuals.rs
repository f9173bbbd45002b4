//! Standardized residuals comparing empirical and model distribution and
//! survival functions.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WleError};
use crate::models::{BivariateNormal, ParametricFamily, UnivariateFamily};
use crate::special::{normal_cdf, normal_sf};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualKind {
    #[default]
    Univariate,
    Bivariate,
    Regression,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualConfig {
    p: f64,
    beta: f64,
    pub kind: ResidualKind,
}

impl Default for ResidualConfig {
    fn default() -> Self {
        ResidualConfig {
            p: 0.5,
            beta: 1.0,
            kind: ResidualKind::Univariate,
        }
    }
}

impl ResidualConfig {
    /// Tail fraction `p` in (0, 0.5] and denominator exponent `beta` > 0.
    pub fn new(p: f64, beta: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 0.5) {
            return Err(WleError::InvalidConfig(format!("tail fraction {p} outside (0, 0.5]")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(WleError::InvalidConfig(format!("denominator exponent {beta} must be positive")));
        }
        Ok(ResidualConfig {
            p,
            beta,
            kind: ResidualKind::Univariate,
        })
    }

    pub fn with_kind(mut self, kind: ResidualKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Three-branch rule. A zero model tail probability gives `+inf`.
    pub fn tail_residual(&self, emp_cdf: f64, emp_sf: f64, model_cdf: f64, model_sf: f64) -> f64 {
        if model_cdf <= self.p {
            ratio(emp_cdf, model_cdf, self.beta)
        } else if model_cdf >= 1.0 - self.p {
            ratio(emp_sf, model_sf, self.beta)
        } else {
            0.0
        }
    }

    /// Residual in the quadrant of smallest model mass; ties go to the first
    /// in the order ll, lg, gl, gg.
    pub fn quadrant_residual(&self, emp: &[f64; 4], model: &[f64; 4]) -> f64 {
        let mut best = 0;
        for j in 1..4 {
            if model[j] < model[best] {
                best = j;
            }
        }
        ratio(emp[best], model[best], self.beta)
    }
}

fn ratio(emp: f64, model: f64, beta: f64) -> f64 {
    if model <= 0.0 {
        return if emp > 0.0 { f64::INFINITY } else { 0.0 };
    }
    let denom = if beta == 1.0 { model } else { model.powf(beta) };
    emp / denom - 1.0
}

/// Sorted copy of a univariate sample: F_n(x) = #{Xᵢ ≤ x}/n, S_n(x) = #{Xᵢ ≥ x}/n.
#[derive(Clone, Debug)]
pub struct EmpiricalFunctions {
    sorted: Vec<f64>,
}

impl EmpiricalFunctions {
    pub fn new(sample: &[f64]) -> Result<Self> {
        if sample.is_empty() {
            return Err(WleError::Domain("empty sample".into()));
        }
        if sample.iter().any(|x| x.is_nan()) {
            return Err(WleError::Domain("sample contains NaN".into()));
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(EmpiricalFunctions { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|v| *v <= x) as f64 / self.len() as f64
    }

    pub fn survival(&self, x: f64) -> f64 {
        (self.len() - self.sorted.partition_point(|v| *v < x)) as f64 / self.len() as f64
    }
}

/// Empirical quadrant masses around a point, with closed inequalities on
/// both sides (ll: X ≤ x, Y ≤ y; lg: X ≤ x, Y ≥ y; gl; gg).
#[derive(Clone, Debug)]
pub struct QuadrantCounter {
    points: Vec<[f64; 2]>,
}

impl QuadrantCounter {
    pub fn new(sample: &[[f64; 2]]) -> Result<Self> {
        if sample.is_empty() {
            return Err(WleError::Domain("empty sample".into()));
        }
        Ok(QuadrantCounter {
            points: sample.to_vec(),
        })
    }

    pub fn masses(&self, at: &[f64; 2]) -> [f64; 4] {
        let mut c = [0usize; 4];
        for p in &self.points {
            let (lx, gx) = (p[0] <= at[0], p[0] >= at[0]);
            let (ly, gy) = (p[1] <= at[1], p[1] >= at[1]);
            c[0] += (lx && ly) as usize;
            c[1] += (lx && gy) as usize;
            c[2] += (gx && ly) as usize;
            c[3] += (gx && gy) as usize;
        }
        let n = self.points.len() as f64;
        c.map(|v| v as f64 / n)
    }
}

fn finite_or_numeric(tau: f64, what: &str) -> Result<f64> {
    if tau.is_finite() {
        Ok(tau)
    } else {
        Err(WleError::Numeric(format!("{what}: model tail probability is zero")))
    }
}

pub fn tau_univariate<F: UnivariateFamily + ?Sized>(
    config: &ResidualConfig,
    empirical: &EmpiricalFunctions,
    family: &F,
    theta: &[f64],
    x: f64,
) -> Result<f64> {
    let (f, s) = family.cdf_and_survival(theta, x)?;
    if f == 0.0 || s == 0.0 {
        return Err(WleError::Numeric(format!("observation {x} lies beyond representable tail")));
    }
    finite_or_numeric(
        config.tail_residual(empirical.cdf(x), empirical.survival(x), f, s),
        "univariate residual",
    )
}

pub fn tau_bivariate(
    config: &ResidualConfig,
    counter: &QuadrantCounter,
    theta: &[f64],
    point: [f64; 2],
) -> Result<f64> {
    let model = BivariateNormal::default().quadrant_probabilities(theta, &point)?;
    let min = model.iter().copied().fold(f64::INFINITY, f64::min);
    if min < 1e-300 {
        return Err(WleError::Numeric(format!("quadrant probability {min:e} at {point:?}")));
    }
    Ok(config.quadrant_residual(&counter.masses(&point), &model))
}

/// `residuals` are the standardized residuals at the current fit; `z` is the
/// point of evaluation.
pub fn tau_regression(config: &ResidualConfig, residuals: &[f64], z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(WleError::Domain("standardized residual must be finite".into()));
    }
    let emp = EmpiricalFunctions::new(residuals)?;
    finite_or_numeric(
        config.tail_residual(emp.cdf(z), emp.survival(z), normal_cdf(z), normal_sf(z)),
        "regression residual",
    )
}

/// Residuals of a family at θ with the empirical functions replaced by the
/// model itself. Identically zero; used by the population diagnostics.
pub fn population_tail_residual(config: &ResidualConfig, model_cdf: f64, model_sf: f64) -> f64 {
    config.tail_residual(model_cdf, model_sf, model_cdf, model_sf)
}

/// All residuals for a sample, convenience over `ParametricFamily::residuals`.
pub fn residuals<F: ParametricFamily + ?Sized>(
    family: &F,
    config: &ResidualConfig,
    sample: &[F::Obs],
    theta: &[f64],
) -> Result<Vec<f64>> {
    family.validate_sample(sample)?;
    family.residuals(config, sample, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Normal;

    #[test]
    fn empirical_functions_with_ties() {
        let e = EmpiricalFunctions::new(&[1.0, 2.0, 2.0, 3.0]).unwrap();
        assert_eq!(e.cdf(2.0), 0.75);
        assert_eq!(e.survival(2.0), 0.75);
        assert_eq!(e.cdf(0.0), 0.0);
        assert_eq!(e.survival(2.5), 0.25);
        assert_eq!(e.cdf(2.5) + e.survival(2.5), 1.0);
    }

    #[test]
    fn upper_tail_example() {
        let s = [1.0, 2.0, 3.0, 4.0];
        let e = EmpiricalFunctions::new(&s).unwrap();
        let t = tau_univariate(&ResidualConfig::default(), &e, &Normal, &[2.5, 1.0], 4.0).unwrap();
        let sf = 0.066_807_201_268_858_06;
        assert!((t - (0.25 / sf - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn central_region_is_zero() {
        let e = EmpiricalFunctions::new(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let c = ResidualConfig::new(0.25, 1.0).unwrap();
        assert_eq!(tau_univariate(&c, &e, &Normal, &[2.5, 1.0], 2.0).unwrap(), 0.0);
    }

    #[test]
    fn boundary_goes_to_lower_branch() {
        let t = tau_regression(&ResidualConfig::default(), &[0.0; 5], 0.0).unwrap();
        assert_eq!(t, 1.0);
    }

    #[test]
    fn regression_lower_tail() {
        let r = [-3.0, -0.1, 0.0, 0.1, 0.2];
        let t = tau_regression(&ResidualConfig::default(), &r, -3.0).unwrap();
        assert!((t - (0.2 / 0.001_349_898_031_630_094_6 - 1.0)).abs() < 1e-8);
    }

    #[test]
    fn quadrant_tie_picks_ll() {
        let c = ResidualConfig::default();
        assert_eq!(c.quadrant_residual(&[0.5, 0.25, 0.25, 0.25], &[0.25; 4]), 1.0);
    }

    #[test]
    fn quadrant_counter_closed_sides() {
        let q = QuadrantCounter::new(&[[0.0, 0.0], [1.0, 1.0], [-1.0, 2.0]]).unwrap();
        let m = q.masses(&[0.0, 0.0]);
        assert_eq!(m, [1.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0]);
    }

    #[test]
    fn invalid_config() {
        assert!(ResidualConfig::new(0.6, 1.0).is_err());
        assert!(ResidualConfig::new(0.0, 1.0).is_err());
        assert!(ResidualConfig::new(0.5, 0.0).is_err());
    }

    #[test]
    fn zero_model_tail_is_infinite() {
        let c = ResidualConfig::default();
        assert_eq!(c.tail_residual(1.0, 1.0 / 34.0, 1.0, 0.0), f64::INFINITY);
    }
}
