//! Fisher consistency, influence functions and quadratic bias predictions
//! under point-mass contamination of a univariate model.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{csv_bytes, Quadrature};
use crate::error::{Result, WleError};
use crate::models::UnivariateFamily;
use crate::residuals::{population_tail_residual, ResidualConfig};
use crate::weights::WeightSpec;

/// E_θ[g(X)]. Discrete families are summed over their effective range;
/// continuous ones integrated with panel edges at the range ends, the median
/// and every point of `breaks` inside the range.
pub fn expectation<F: UnivariateFamily + ?Sized>(
    family: &F,
    theta: &[f64],
    quad: &Quadrature,
    dim: usize,
    breaks: &[f64],
    g: impl Fn(f64) -> Vec<f64>,
) -> Result<Vec<f64>> {
    family.check_params(theta)?;
    let (lo, hi) = family.effective_range(theta);
    if family.is_discrete() {
        let mut acc = vec![0.0; dim];
        let mut k = lo.max(0.0).floor();
        while k <= hi {
            let p = family.density(theta, k);
            for (a, v) in acc.iter_mut().zip(g(k)) {
                *a += p * v;
            }
            k += 1.0;
        }
        if acc.iter().any(|v| !v.is_finite()) {
            return Err(WleError::Numeric("non-finite summand".into()));
        }
        return Ok(acc);
    }
    let mut pts = vec![lo, hi, family.median(theta)];
    pts.extend(breaks.iter().copied().filter(|b| *b > lo && *b < hi));
    quad.integrate_vec(dim, &pts, |x| {
        let p = family.density(theta, x);
        g(x).into_iter().map(|v| v * p).collect()
    })
    .into_result()
}

/// ∫ H(τ(x)) u_θ(x) dF_θ(x) with the empirical functions replaced by F_θ.
/// Zero for every weight function if the estimator is Fisher-consistent.
pub fn fisher_consistency_check<F: UnivariateFamily + ?Sized>(
    family: &F,
    theta: &[f64],
    residual: &ResidualConfig,
    spec: &WeightSpec,
    quad: &Quadrature,
) -> Result<Vec<f64>> {
    expectation(family, theta, quad, family.dim(), &[], |x| {
        let (f, s) = family.cdf_and_survival_unchecked(theta, x);
        let w = spec.weight(population_tail_residual(residual, f, s));
        family.score_unchecked(theta, &x).into_iter().map(|u| w * u).collect()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasPoint {
    pub epsilon: f64,
    /// εT′(y), the linear prediction shared with the MLE.
    pub mle: f64,
    /// εT′(y) + ε²T″(y)/2.
    pub predicted: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfluenceReport {
    pub y: f64,
    pub t1: Vec<f64>,
    pub d: Vec<Vec<f64>>,
    pub n: Vec<f64>,
    pub t2: Option<f64>,
    pub bias: Vec<BiasPoint>,
}

impl InfluenceReport {
    /// Adds T″ and its bias curve over `epsilons` (scalar models only).
    pub fn with_second_order(mut self, t2: f64, epsilons: &[f64]) -> Result<Self> {
        if self.t1.len() != 1 {
            return Err(WleError::InvalidSpec("second-order analysis needs a scalar parameter".into()));
        }
        self.bias = bias_curve(self.t1[0], t2, epsilons);
        self.t2 = Some(t2);
        Ok(self)
    }
}

fn in_lower(f: f64) -> bool {
    f <= 0.5
}

fn check_point<F: UnivariateFamily + ?Sized>(family: &F, theta: &[f64], y: f64) -> Result<()> {
    family.check_params(theta)?;
    family.check_obs(&y)?;
    if family.is_discrete() && y.fract() != 0.0 {
        return Err(WleError::Domain(format!("{y} is not a lattice point")));
    }
    Ok(())
}

/// T′(y) = D⁻¹N for contamination of F_θ by a point mass at y, with D and N
/// assembled over the regions F_θ ≤ 1/2 and F_θ > 1/2.
pub fn influence_first_order<F: UnivariateFamily + ?Sized>(
    family: &F,
    theta: &[f64],
    spec: &WeightSpec,
    quad: &Quadrature,
    y: f64,
) -> Result<InfluenceReport> {
    check_point(family, theta, y)?;
    let d = family.dim();
    let w0 = spec.weight(0.0);
    let dw0 = spec.weight_derivative(0.0);
    // layout: D (row-major d×d), then the integral part of N
    let acc = expectation(family, theta, quad, d * d + d, &[y], |x| {
        let (f, s) = family.cdf_and_survival_unchecked(theta, x);
        let u = family.score_unchecked(theta, &x);
        let jac = family.score_jacobian(theta, x);
        let lower = in_lower(f);
        let (grad, mass, dev) = if lower {
            let g = family.cdf_gradient(theta, x).unwrap_or_else(|_| vec![f64::NAN; d]);
            (g, f, if x >= y { 1.0 - f } else { -f })
        } else {
            let g = family.survival_gradient(theta, x).unwrap_or_else(|_| vec![f64::NAN; d]);
            (g, s, if x <= y { 1.0 - s } else { -s })
        };
        let mut out = vec![0.0; d * d + d];
        for i in 0..d {
            for j in 0..d {
                out[i * d + j] = -w0 * jac[(i, j)] + dw0 * u[i] * grad[j] / mass;
            }
            out[d * d + i] = dw0 * u[i] * dev / mass - w0 * u[i];
        }
        out
    })?;
    let (f, s) = family.cdf_and_survival_unchecked(theta, y);
    let wy = spec.weight(population_tail_residual(&ResidualConfig::default(), f, s));
    let uy = family.score_unchecked(theta, &y);
    let dm = DMatrix::from_row_slice(d, d, &acc[..d * d]);
    let nv: Vec<f64> = (0..d).map(|i| acc[d * d + i] + wy * uy[i]).collect();
    let t1 = dm
        .clone()
        .lu()
        .solve(&DVector::from_column_slice(&nv))
        .ok_or_else(|| WleError::Singular("influence matrix D".into()))?;
    Ok(InfluenceReport {
        y,
        t1: t1.iter().copied().collect(),
        d: (0..d).map(|i| dm.row(i).iter().copied().collect()).collect(),
        n: nv,
        t2: None,
        bias: Vec::new(),
    })
}

/// T″(y) for a scalar model: the three-part integral expression with
/// c = w″(0), premultiplied by I(θ)⁻¹.
pub fn influence_second_order<F: UnivariateFamily + ?Sized>(
    family: &F,
    theta: &[f64],
    spec: &WeightSpec,
    quad: &Quadrature,
    y: f64,
) -> Result<f64> {
    check_point(family, theta, y)?;
    if family.dim() != 1 {
        return Err(WleError::InvalidSpec("second-order analysis needs a scalar parameter".into()));
    }
    let info = family.fisher_information(theta)?[(0, 0)];
    if !(info > 0.0) {
        return Err(WleError::Singular("Fisher information".into()));
    }
    let t1 = influence_first_order(family, theta, spec, quad, y)?.t1[0];
    let c = spec.second_derivative_at_zero();
    let h = 1e-4 * theta[0].abs().max(1.0);
    let hessian_score = |x: f64| {
        let up = family.score_jacobian(&[theta[0] + h], x)[(0, 0)];
        let dn = family.score_jacobian(&[theta[0] - h], x)[(0, 0)];
        (up - dn) / (2.0 * h)
    };
    // [A, B, C]: the ε², cross and T′² groups
    let acc = expectation(family, theta, quad, 3, &[y], |x| {
        let (f, s) = family.cdf_and_survival_unchecked(theta, x);
        let u = family.score_unchecked(theta, &x)[0];
        let (grad, mass, dev) = if in_lower(f) {
            let g = family.cdf_gradient(theta, x).map(|g| g[0]).unwrap_or(f64::NAN);
            (g, f, if x >= y { 1.0 - f } else { -f })
        } else {
            let g = family.survival_gradient(theta, x).map(|g| g[0]).unwrap_or(f64::NAN);
            (g, s, if x <= y { 1.0 - s } else { -s })
        };
        let ratio = grad / mass;
        vec![
            c * u / mass * dev * dev,
            -c * u * ratio * dev,
            hessian_score(x) + c * u * ratio * ratio * mass,
        ]
    })?;
    let dy = family.score_jacobian(theta, y)[(0, 0)];
    let bracket = acc[0] + 2.0 * t1 * (acc[1] + dy + info) + t1 * t1 * acc[2];
    Ok(bracket / info)
}

pub fn bias_curve(t1: f64, t2: f64, epsilons: &[f64]) -> Vec<BiasPoint> {
    epsilons
        .iter()
        .map(|&e| BiasPoint {
            epsilon: e,
            mle: e * t1,
            predicted: e * t1 + 0.5 * e * e * t2,
        })
        .collect()
}

pub fn bias_curve_csv(points: &[BiasPoint]) -> Result<Vec<u8>> {
    csv_bytes(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::NormalLocation;
    use crate::models::{Exponential, Normal, Poisson};

    #[test]
    fn consistency_normal_exponential_poisson() {
        let q = Quadrature::default();
        let rc = ResidualConfig::default();
        let spec = WeightSpec::gamma(1.5).unwrap();
        let v = fisher_consistency_check(&Normal, &[0.0, 1.0], &rc, &spec, &q).unwrap();
        assert!(v.iter().all(|x| x.abs() < 1e-6), "{v:?}");
        let v = fisher_consistency_check(&Exponential, &[2.0], &rc, &spec, &q).unwrap();
        assert!(v[0].abs() < 1e-6);
        let v = fisher_consistency_check(&Poisson, &[3.0], &rc, &spec, &q).unwrap();
        assert!(v[0].abs() < 1e-8);
    }

    #[test]
    fn model_influence_is_mle_influence() {
        let q = Quadrature::default();
        let spec = WeightSpec::default();
        let r = influence_first_order(&Normal, &[0.0, 1.0], &spec, &q, 2.0).unwrap();
        assert!((r.t1[0] - 2.0).abs() < 1e-6);
        // σ² component: I⁻¹u = 2σ⁴·((y−μ)²−σ²)/(2σ⁴)
        assert!((r.t1[1] - 3.0).abs() < 1e-6);
        let r = influence_first_order(&Exponential, &[1.0], &spec, &q, 3.0).unwrap();
        assert!((r.t1[0] + 2.0).abs() < 1e-6);
        assert!((r.d[0][0] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn likelihood_limit_second_order_is_zero_for_location() {
        let spec = WeightSpec::gamma(1.0 + 1e-12).unwrap();
        let t2 = influence_second_order(&NormalLocation::default(), &[1.0], &spec, &Quadrature::default(), 10.0)
            .unwrap();
        assert!(t2.abs() < 1e-6, "{t2}");
    }

    #[test]
    fn larger_alpha_lowers_prediction() {
        let q = Quadrature::default();
        let model = NormalLocation::default();
        let at = |alpha: f64| {
            let spec = WeightSpec::gamma(alpha).unwrap();
            let t1 = influence_first_order(&model, &[1.0], &spec, &q, 10.0).unwrap().t1[0];
            let t2 = influence_second_order(&model, &[1.0], &spec, &q, 10.0).unwrap();
            bias_curve(t1, t2, &[0.05])[0]
        };
        let (b2, b3, b5) = (at(2.0), at(3.0), at(5.0));
        assert!(b2.predicted < b2.mle);
        // signed: the quadratic term overshoots zero for α = 5 at ε = 0.05
        assert!(b5.predicted < b3.predicted && b3.predicted < b2.predicted);
    }

    #[test]
    fn csv_has_header() {
        let bytes = bias_curve_csv(&bias_curve(1.0, -2.0, &[0.0, 0.1])).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.starts_with("epsilon,mle,predicted"));
    }
}
