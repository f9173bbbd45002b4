//! Mode-normalized weight functions H(τ) = g(τ + a + 1) / g(a + 1).
//!
//! Every kernel is evaluated through its log so that tuning parameters close
//! to the likelihood limit give weights close to 1 without cancellation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WleError};

pub const DEFAULT_ALPHA: f64 = 1.01;
pub const DEFAULT_K: f64 = 1.01;
pub const DEFAULT_XI: f64 = 10.0;
pub const DEFAULT_D1: f64 = 2.1;
pub const DEFAULT_D2: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WeightSpec {
    /// Gamma kernel with shape α > 1 and rate α − 1.
    Gamma { alpha: f64 },
    /// Weibull kernel with shape k > 1 and scale ((k−1)/k)^{−1/k}.
    Weibull { k: f64 },
    /// Generalized extreme value kernel with shape ξ > 0.
    Gev { xi: f64 },
    /// Scaled F kernel with d₁ > 2, d₂ > 0.
    ScaledF { d1: f64, d2: f64 },
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec::Gamma { alpha: DEFAULT_ALPHA }
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Gamma { alpha } => write!(f, "gamma(alpha={alpha})"),
            WeightSpec::Weibull { k } => write!(f, "weibull(k={k})"),
            WeightSpec::Gev { xi } => write!(f, "gev(xi={xi})"),
            WeightSpec::ScaledF { d1, d2 } => write!(f, "scaled_f(d1={d1}, d2={d2})"),
        }
    }
}

impl WeightSpec {
    pub fn gamma(alpha: f64) -> Result<Self> {
        WeightSpec::Gamma { alpha }.validated()
    }

    pub fn weibull(k: f64) -> Result<Self> {
        WeightSpec::Weibull { k }.validated()
    }

    pub fn gev(xi: f64) -> Result<Self> {
        WeightSpec::Gev { xi }.validated()
    }

    pub fn scaled_f(d1: f64, d2: f64) -> Result<Self> {
        WeightSpec::ScaledF { d1, d2 }.validated()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(WleError::InvalidSpec(msg));
        match *self {
            WeightSpec::Gamma { alpha } if !(alpha > 1.0 && alpha.is_finite()) => {
                bad(format!("gamma kernel needs alpha > 1, got {alpha}"))
            }
            WeightSpec::Weibull { k } if !(k > 1.0 && k.is_finite()) => {
                bad(format!("weibull kernel needs k > 1, got {k}"))
            }
            WeightSpec::Gev { xi } if !(xi > 0.0 && xi.is_finite()) => {
                bad(format!("gev kernel needs xi > 0, got {xi}"))
            }
            WeightSpec::ScaledF { d1, d2 } if !(d1 > 2.0 && d1.is_finite() && d2 > 0.0 && d2.is_finite()) => {
                bad(format!("scaled F kernel needs d1 > 2 and d2 > 0, got ({d1}, {d2})"))
            }
            _ => Ok(()),
        }
    }

    fn validated(self) -> Result<Self> {
        self.validate().map(|_| self)
    }

    /// Rate of the gamma kernel, α − 1.
    pub fn gamma_rate(alpha: f64) -> f64 {
        alpha - 1.0
    }

    /// Scale of the Weibull kernel that puts its mode at 1.
    pub fn weibull_scale(k: f64) -> f64 {
        ((k - 1.0) / k).powf(-1.0 / k)
    }

    /// Location and scale (μ, β) of the GEV kernel that put its mode at 0.
    pub fn gev_location_scale(xi: f64) -> (f64, f64) {
        let c = (1.0 + xi).powf(xi);
        (c - 1.0, xi * c)
    }

    /// Scale constant a of the scaled F kernel that puts its mode at 1.
    pub fn scaled_f_constant(d1: f64, d2: f64) -> f64 {
        d1 * (d2 + 2.0) / ((d1 - 2.0) * d2)
    }

    /// ln H(τ); −∞ at τ ≤ −1 and at τ = +∞.
    pub fn log_weight(&self, tau: f64) -> f64 {
        if tau.is_nan() || tau <= -1.0 || tau == f64::INFINITY {
            return f64::NEG_INFINITY;
        }
        let v = match *self {
            WeightSpec::Gamma { alpha } => (alpha - 1.0) * (tau.ln_1p() - tau),
            WeightSpec::Weibull { k } => {
                (k - 1.0) * tau.ln_1p() - (k * tau.ln_1p()).exp_m1() * (k - 1.0) / k
            }
            WeightSpec::Gev { xi } => {
                // t(τ) = (1+ξ)(1+τ)^{-1/ξ}, g ∝ t^{1+ξ} e^{-t}
                let l = tau.ln_1p();
                -(1.0 + xi) / xi * l - (1.0 + xi) * (-l / xi).exp_m1()
            }
            WeightSpec::ScaledF { d1, d2 } => {
                let c = (d1 - 2.0) / (d2 + 2.0);
                (0.5 * d1 - 1.0) * tau.ln_1p() - 0.5 * (d1 + d2) * (c * tau / (1.0 + c)).ln_1p()
            }
        };
        // the kernels are unimodal at τ = 0; clip rounding above it
        v.min(0.0)
    }

    /// H(τ) ∈ [0, 1]. Residuals below −1 or infinite map to 0.
    pub fn weight(&self, tau: f64) -> f64 {
        self.log_weight(tau).exp()
    }

    /// d ln H / dτ for τ > −1.
    pub fn log_weight_derivative(&self, tau: f64) -> f64 {
        let x = 1.0 + tau;
        match *self {
            WeightSpec::Gamma { alpha } => (alpha - 1.0) * (1.0 / x - 1.0),
            WeightSpec::Weibull { k } => (k - 1.0) / x - (k - 1.0) * x.powf(k - 1.0),
            WeightSpec::Gev { xi } => (1.0 + xi) / (xi * x) * (x.powf(-1.0 / xi) - 1.0),
            WeightSpec::ScaledF { d1, d2 } => {
                let c = (d1 - 2.0) / (d2 + 2.0);
                (0.5 * d1 - 1.0) / x - 0.5 * (d1 + d2) * c / (1.0 + c * x)
            }
        }
    }

    /// H′(τ); 0 wherever H vanishes.
    pub fn weight_derivative(&self, tau: f64) -> f64 {
        let w = self.weight(tau);
        if w == 0.0 {
            0.0
        } else {
            w * self.log_weight_derivative(tau)
        }
    }

    /// H″(0). Closed forms for the gamma and scaled F kernels, central
    /// differences with h = 1e-4 for the others.
    pub fn second_derivative_at_zero(&self) -> f64 {
        match *self {
            WeightSpec::Gamma { alpha } => 1.0 - alpha,
            WeightSpec::ScaledF { d1, d2 } => (2.0 - d1) * (d2 + 2.0) / (2.0 * (d1 + d2)),
            _ => {
                let h = 1e-4;
                debug_assert!(self.first_derivative_at_zero_fd().abs() < 1e-6);
                (self.weight(h) - 2.0 + self.weight(-h)) / (h * h)
            }
        }
    }

    /// Central-difference estimate of H′(0), which should vanish.
    pub fn first_derivative_at_zero_fd(&self) -> f64 {
        let h = 1e-4;
        (self.weight(h) - self.weight(-h)) / (2.0 * h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all() -> [WeightSpec; 4] {
        [
            WeightSpec::gamma(2.0).unwrap(),
            WeightSpec::weibull(2.0).unwrap(),
            WeightSpec::gev(1.0).unwrap(),
            WeightSpec::scaled_f(3.0, 1.0).unwrap(),
        ]
    }

    #[test]
    fn unit_at_zero_and_zero_at_minus_one() {
        for s in all() {
            assert_eq!(s.weight(0.0), 1.0, "{s}");
            assert_eq!(s.weight(-1.0), 0.0, "{s}");
            assert_eq!(s.weight(-1.5), 0.0, "{s}");
            assert_eq!(s.weight(f64::INFINITY), 0.0, "{s}");
        }
    }

    #[test]
    fn point_values() {
        let e = std::f64::consts::E;
        let c = [2.0 / e, 2.0 * (-1.5f64).exp(), e / 4.0, 16.0 * 2f64.sqrt() / 25.0];
        for (s, v) in all().iter().zip(c) {
            assert!((s.weight(1.0) - v).abs() < 1e-14, "{s}");
        }
    }

    #[test]
    fn closed_form_second_derivatives() {
        assert_eq!(WeightSpec::gamma(1.5).unwrap().second_derivative_at_zero(), -0.5);
        assert_eq!(WeightSpec::scaled_f(3.0, 1.0).unwrap().second_derivative_at_zero(), -0.375);
    }

    #[test]
    fn finite_difference_second_derivatives() {
        // analytic oracles: Weibull −k(k−1), GEV −(1+ξ)/ξ²
        let w = WeightSpec::weibull(2.0).unwrap().second_derivative_at_zero();
        assert!((w + 2.0).abs() < 1e-5);
        let g = WeightSpec::gev(1.0).unwrap().second_derivative_at_zero();
        assert!((g + 2.0).abs() < 1e-5);
    }

    #[test]
    fn log_derivative_matches_difference() {
        for s in all() {
            for tau in [-0.7, -0.2, 0.3, 2.0, 7.5] {
                let h = 1e-6;
                let fd = (s.log_weight(tau + h) - s.log_weight(tau - h)) / (2.0 * h);
                assert!((fd - s.log_weight_derivative(tau)).abs() < 1e-6, "{s} {tau}");
            }
        }
    }

    #[test]
    fn rejects_out_of_range_tuning() {
        assert!(WeightSpec::gamma(1.0).is_err());
        assert!(WeightSpec::weibull(0.5).is_err());
        assert!(WeightSpec::gev(0.0).is_err());
        assert!(WeightSpec::scaled_f(2.0, 1.0).is_err());
        assert!(WeightSpec::scaled_f(3.0, -1.0).is_err());
    }

    #[test]
    fn derived_constants() {
        assert_eq!(WeightSpec::gev_location_scale(1.0), (1.0, 2.0));
        assert_eq!(WeightSpec::scaled_f_constant(3.0, 1.0), 9.0);
        assert!((WeightSpec::weibull_scale(2.0) - 2f64.sqrt()).abs() < 1e-15);
    }
}
