//! Fixed-point solution of the weighted score equation Σ wᵢ u_θ(Xᵢ) = 0,
//! bootstrap multi-root search, and root selection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WleError};
use crate::models::{ParamVector, ParametricFamily};
use crate::residuals::ResidualConfig;
use crate::weights::WeightSpec;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Stop when every |Δθ_j| / (1 + |θ_j|) falls below this.
    pub tol: f64,
    pub max_iter: usize,
    pub bootstrap_b: usize,
    pub bootstrap_m: usize,
    /// Relative sup-norm distance under which two roots are the same.
    pub root_tol: f64,
    /// Share of n the second-heaviest root needs to be selected.
    pub min_weight_share: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-8,
            max_iter: 500,
            bootstrap_b: 50,
            bootstrap_m: 3,
            root_tol: 1e-4,
            min_weight_share: 0.25,
            seed: 0x5eed,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |m: String| Err(WleError::InvalidConfig(m));
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return bad("tolerance and iteration limit must be positive".into());
        }
        if self.bootstrap_b == 0 {
            return bad("bootstrap restart count must be at least 1".into());
        }
        if self.bootstrap_m < dim {
            return bad(format!(
                "bootstrap subsample size {} below parameter dimension {dim}",
                self.bootstrap_m
            ));
        }
        for (name, v) in [("root_tol", self.root_tol), ("min_weight_share", self.min_weight_share)] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("{name} = {v} outside (0, 1)"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub theta: ParamVector,
    pub weights: Vec<f64>,
    pub weight_sum: f64,
    pub iterations: usize,
    pub converged: bool,
    /// ‖Σ wᵢ u_θ(Xᵢ)‖∞ at the returned θ and weights.
    pub objective: f64,
    /// A scale parameter collapsed onto a few exactly-fitted points.
    pub degenerate: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    Single,
    SecondHighest,
    /// Second root below the weight-share threshold; highest taken instead.
    FallbackHighest,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub restarts: usize,
    pub skipped_subsamples: usize,
    pub non_converged: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    /// Distinct converged roots, heaviest weight sum first.
    pub roots: Vec<Root>,
    pub selected: usize,
    pub selection: Selection,
    pub stats: SearchStats,
    pub non_converged: Vec<Root>,
}

impl RootSet {
    /// Sorts and selects. Roots are assumed already distinct.
    pub fn from_roots(mut roots: Vec<Root>, config: &SolverConfig) -> Result<Self> {
        if roots.is_empty() {
            return Err(WleError::NotFound("no converged root".into()));
        }
        roots.sort_by(|a, b| b.weight_sum.total_cmp(&a.weight_sum));
        let (selected, selection) = selection_rule(&roots, config.min_weight_share);
        Ok(RootSet {
            roots,
            selected,
            selection,
            stats: SearchStats::default(),
            non_converged: Vec::new(),
        })
    }

    pub fn selected_root(&self) -> &Root {
        &self.roots[self.selected]
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

fn selection_rule(sorted: &[Root], share: f64) -> (usize, Selection) {
    if sorted.len() < 2 {
        return (0, Selection::Single);
    }
    let second = &sorted[1];
    if second.weight_sum >= share * second.weights.len() as f64 {
        (1, Selection::SecondHighest)
    } else {
        (0, Selection::FallbackHighest)
    }
}

/// Applies the selection rule afresh, e.g. under a different threshold.
pub fn select_root<'a>(set: &'a RootSet, config: &SolverConfig) -> &'a Root {
    &set.roots[selection_rule(&set.roots, config.min_weight_share).0]
}

pub fn weights_at<F: ParametricFamily + ?Sized>(
    family: &F,
    sample: &[F::Obs],
    residual_config: &ResidualConfig,
    spec: &WeightSpec,
    theta: &[f64],
) -> Result<Vec<f64>> {
    Ok(family
        .residuals(residual_config, sample, theta)?
        .into_iter()
        .map(|t| spec.weight(t))
        .collect())
}

/// ‖Σ wᵢ u_θ(Xᵢ)‖∞.
pub fn weighted_score_norm<F: ParametricFamily + ?Sized>(
    family: &F,
    sample: &[F::Obs],
    weights: &[f64],
    theta: &[f64],
) -> f64 {
    let mut total = vec![0.0; family.dim()];
    for (x, w) in sample.iter().zip(weights) {
        if *w > 0.0 {
            for (t, u) in total.iter_mut().zip(family.score_unchecked(theta, x)) {
                *t += w * u;
            }
        }
    }
    total.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Largest weighted-score norm per observation accepted at convergence.
pub const OBJECTIVE_LIMIT: f64 = 1e-6;

/// Iteratively reweighted closed-form estimation from `theta0`.
pub fn solve_from<F: ParametricFamily + ?Sized>(
    family: &F,
    sample: &[F::Obs],
    residual_config: &ResidualConfig,
    spec: &WeightSpec,
    config: &SolverConfig,
    theta0: &ParamVector,
) -> Result<Root> {
    family.validate_sample(sample)?;
    family.check_params(theta0)?;
    spec.validate()?;
    let mut theta = theta0.clone();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_iter {
        iterations += 1;
        let w = weights_at(family, sample, residual_config, spec, &theta)?;
        let next = family.weighted_closed_form(sample, &w)?;
        let step = theta
            .iter()
            .zip(next.iter())
            .fold(0.0_f64, |m, (a, b)| m.max((b - a).abs() / (1.0 + a.abs())));
        theta = next;
        if step < config.tol {
            converged = true;
            break;
        }
    }
    let weights = weights_at(family, sample, residual_config, spec, &theta)?;
    let weight_sum = weights.iter().sum();
    let objective = weighted_score_norm(family, sample, &weights, &theta);
    let degenerate = family.scale_collapsed(sample, &theta);
    // a small step alone can hide a slow crawl; collapsed fits have
    // unbounded scores and are judged on the step only
    let converged = converged && (degenerate || objective < OBJECTIVE_LIMIT * sample.len() as f64);
    Ok(Root {
        objective,
        degenerate,
        theta,
        weights,
        weight_sum,
        iterations,
        converged,
    })
}

enum Outcome {
    Skipped,
    Failed,
    Done(Root),
}

/// Restart `index` (≥ 1) uses its own ChaCha8 stream of `seed`, so the
/// search is independent of scheduling.
pub fn bootstrap_indices(seed: u64, index: u64, n: usize, m: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    (0..m).map(|_| rng.gen_range(0..n)).collect()
}

pub fn bootstrap_root_search<F: ParametricFamily + ?Sized>(
    family: &F,
    sample: &[F::Obs],
    residual_config: &ResidualConfig,
    spec: &WeightSpec,
    config: &SolverConfig,
) -> Result<RootSet> {
    family.validate_sample(sample)?;
    config.validate(family.dim())?;
    spec.validate()?;
    if sample.len() < config.bootstrap_m {
        return Err(WleError::InvalidConfig(format!(
            "sample of {} smaller than bootstrap subsample size {}",
            sample.len(),
            config.bootstrap_m
        )));
    }
    let outcomes: Vec<Outcome> = (0..=config.bootstrap_b)
        .into_par_iter()
        .map(|i| {
            let start = if i == 0 {
                family.mle(sample)
            } else {
                let sub: Vec<F::Obs> = bootstrap_indices(config.seed, i as u64, sample.len(), config.bootstrap_m)
                    .into_iter()
                    .map(|j| sample[j])
                    .collect();
                family.mle(&sub)
            };
            match start.and_then(|t| family.check_params(&t).map(|_| t)) {
                Err(_) => Outcome::Skipped,
                Ok(t0) => match solve_from(family, sample, residual_config, spec, config, &t0) {
                    Ok(root) => Outcome::Done(root),
                    Err(_) => Outcome::Failed,
                },
            }
        })
        .collect();

    let mut stats = SearchStats {
        restarts: outcomes.len(),
        ..SearchStats::default()
    };
    let mut distinct: Vec<Root> = Vec::new();
    let mut non_converged = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Skipped => stats.skipped_subsamples += 1,
            Outcome::Failed => stats.failed += 1,
            Outcome::Done(root) if !root.converged => {
                stats.non_converged += 1;
                non_converged.push(root);
            }
            Outcome::Done(root) => {
                if !distinct
                    .iter()
                    .any(|r| r.theta.relative_distance(&root.theta) < config.root_tol)
                {
                    distinct.push(root);
                }
            }
        }
    }
    let mut set = RootSet::from_roots(distinct, config)?;
    set.stats = stats;
    set.non_converged = non_converged;
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Normal, Poisson};

    fn root_with(w: f64, n: usize) -> Root {
        Root {
            theta: ParamVector::new(vec![w]),
            weights: vec![1.0; n],
            weight_sum: w,
            iterations: 1,
            converged: true,
            objective: 0.0,
            degenerate: false,
        }
    }

    #[test]
    fn selection_second_when_heavy_enough() {
        let c = SolverConfig::default();
        let set = RootSet::from_roots(vec![root_with(12.0, 30), root_with(28.5, 30)], &c).unwrap();
        assert_eq!(set.selected_root().weight_sum, 12.0);
        assert_eq!(set.selection, Selection::SecondHighest);
    }

    #[test]
    fn selection_falls_back() {
        let c = SolverConfig::default();
        let set = RootSet::from_roots(vec![root_with(29.1, 30), root_with(5.0, 30)], &c).unwrap();
        assert_eq!(set.selected_root().weight_sum, 29.1);
        assert_eq!(set.selection, Selection::FallbackHighest);
        let single = RootSet::from_roots(vec![root_with(3.0, 30)], &c).unwrap();
        assert_eq!(single.selection, Selection::Single);
    }

    #[test]
    fn empty_root_list_is_error() {
        assert!(RootSet::from_roots(vec![], &SolverConfig::default()).is_err());
    }

    #[test]
    fn drosophila_robust_root() {
        let mut x = vec![0.0; 23];
        x.extend([1.0; 7]);
        x.extend([2.0; 3]);
        x.push(91.0);
        let start = Poisson.mle(&x[..33]).unwrap();
        let r = solve_from(
            &Poisson,
            &x,
            &ResidualConfig::default(),
            &WeightSpec::default(),
            &SolverConfig::default(),
            &start,
        )
        .unwrap();
        assert!(r.converged);
        // independent fixed-point oracle (scipy Poisson cdf/sf)
        assert!((r.theta[0] - 0.393_516_016_785_35).abs() < 1e-9, "{}", r.theta);
        assert_eq!(r.weights[33], 0.0);
    }

    #[test]
    fn invalid_start_rejected() {
        let r = solve_from(
            &Normal,
            &[1.0, 2.0],
            &ResidualConfig::default(),
            &WeightSpec::default(),
            &SolverConfig::default(),
            &ParamVector::new(vec![0.0, -1.0]),
        );
        assert!(matches!(r, Err(WleError::Domain(_))));
    }

    #[test]
    fn streams_differ_per_restart() {
        assert_ne!(bootstrap_indices(1, 1, 1000, 5), bootstrap_indices(1, 2, 1000, 5));
        assert_eq!(bootstrap_indices(1, 7, 1000, 5), bootstrap_indices(1, 7, 1000, 5));
    }
}
