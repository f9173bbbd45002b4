//! Roots of the population weighted score of N(μ, 1) under a two-component
//! normal mixture.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{csv_bytes, Quadrature};
use crate::error::{Result, WleError};
use crate::residuals::ResidualConfig;
use crate::special::{normal_cdf, normal_pdf, normal_sf};
use crate::weights::WeightSpec;

/// (1−ε)N(0, 1) + εN(c, 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalMixture {
    pub epsilon: f64,
    pub contaminant_mean: f64,
}

impl NormalMixture {
    pub fn new(epsilon: f64, contaminant_mean: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(WleError::InvalidSpec(format!("mixing weight {epsilon} outside [0, 1]")));
        }
        if !contaminant_mean.is_finite() {
            return Err(WleError::InvalidSpec("contaminant mean must be finite".into()));
        }
        Ok(NormalMixture {
            epsilon,
            contaminant_mean,
        })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        (1.0 - self.epsilon) * normal_pdf(x) + self.epsilon * normal_pdf(x - self.contaminant_mean)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        (1.0 - self.epsilon) * normal_cdf(x) + self.epsilon * normal_cdf(x - self.contaminant_mean)
    }

    pub fn sf(&self, x: f64) -> f64 {
        (1.0 - self.epsilon) * normal_sf(x) + self.epsilon * normal_sf(x - self.contaminant_mean)
    }
}

fn standard_normal_quantile(p: f64) -> f64 {
    let (mut lo, mut hi) = (-40.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// ∫ w(τ_m(x)) (x − μ) f_m(x) dx, τ_m comparing the mixture with N(μ, 1).
pub fn weighted_population_score(
    mix: &NormalMixture,
    spec: &WeightSpec,
    residual: &ResidualConfig,
    mu: f64,
    quad: &Quadrature,
) -> Result<f64> {
    let c = mix.contaminant_mean;
    let lo = (-10.0_f64).min(c - 10.0).min(mu - 10.0);
    let hi = 10.0_f64.max(c + 10.0).max(mu + 10.0);
    let q = standard_normal_quantile(residual.p());
    let pts = [lo, mu + q, mu, mu - q, hi];
    let r = quad.integrate_vec(1, &pts, |x| {
        let tau = residual.tail_residual(mix.cdf(x), mix.sf(x), normal_cdf(x - mu), normal_sf(x - mu));
        vec![spec.weight(tau) * (x - mu) * mix.pdf(x)]
    });
    Ok(r.into_result()?[0])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureScan {
    pub grid: Vec<f64>,
    pub score: Vec<f64>,
    pub roots: Vec<f64>,
}

#[derive(Serialize)]
struct ScanRow {
    mu: f64,
    score: f64,
}

impl MixtureScan {
    /// Score-versus-μ curve as CSV.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        csv_bytes(self.grid.iter().zip(&self.score).map(|(&mu, &score)| ScanRow { mu, score }))
    }
}

/// Evaluates the score on `grid`, brackets each sign change and bisects it
/// to width 1e-6.
pub fn mixture_root_scan(
    mix: &NormalMixture,
    spec: &WeightSpec,
    residual: &ResidualConfig,
    grid: &[f64],
    quad: &Quadrature,
) -> Result<MixtureScan> {
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(WleError::InvalidConfig("grid must be strictly increasing".into()));
    }
    let eval = |mu: f64| weighted_population_score(mix, spec, residual, mu, quad);
    let score = grid.par_iter().map(|&mu| eval(mu)).collect::<Result<Vec<f64>>>()?;
    let mut roots = Vec::new();
    for i in 0..grid.len() {
        if score[i] == 0.0 {
            roots.push(grid[i]);
            continue;
        }
        if i + 1 < grid.len() && score[i + 1] != 0.0 && score[i].signum() != score[i + 1].signum() {
            let (mut a, mut b, mut fa) = (grid[i], grid[i + 1], score[i]);
            while b - a > 1e-6 {
                let m = 0.5 * (a + b);
                let fm = eval(m)?;
                if fm == 0.0 {
                    a = m;
                    b = m;
                } else if fm.signum() == fa.signum() {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
    }
    Ok(MixtureScan {
        grid: grid.to_vec(),
        score,
        roots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        (0..=160).map(|i| -2.0 + 0.05 * i as f64).collect()
    }

    #[test]
    fn quantile_inverts_cdf() {
        assert!((standard_normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-10);
        assert!(standard_normal_quantile(0.5).abs() < 1e-12);
    }

    #[test]
    fn clean_model_has_one_root() {
        let mix = NormalMixture::new(0.0, 5.0).unwrap();
        let s = mixture_root_scan(
            &mix,
            &WeightSpec::gamma(1.05).unwrap(),
            &ResidualConfig::default(),
            &grid(),
            &Quadrature::default(),
        )
        .unwrap();
        assert_eq!(s.roots.len(), 1);
        assert!(s.roots[0].abs() < 1e-3);
    }

    #[test]
    fn heavy_contamination_three_roots() {
        let mix = NormalMixture::new(0.2, 5.0).unwrap();
        let s = mixture_root_scan(
            &mix,
            &WeightSpec::gamma(1.05).unwrap(),
            &ResidualConfig::default(),
            &grid(),
            &Quadrature::default(),
        )
        .unwrap();
        assert_eq!(s.roots.len(), 3, "{:?}", s.roots);
    }
}
