//! Monte-Carlo contamination studies: mean squared error of the MLE and of
//! weighted likelihood estimators under mixture contamination.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal as Gaussian};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::REPORT_VERSION;
use crate::error::{Result, WleError};
use crate::models::{Exponential, Normal, ParametricFamily};
use crate::residuals::ResidualConfig;
use crate::solver::{bootstrap_root_search, SolverConfig};
use crate::weights::WeightSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// (1−ε)N(0, 1) + εN(0, 25), normal model.
    Scale,
    /// (1−ε)N(0, 1) + εN(5, 1), normal model.
    Location,
    /// (1−ε)Exp(1) + εExp(1/5), exponential model.
    Exponential,
}

impl Scheme {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "scale" => Ok(Scheme::Scale),
            "location" => Ok(Scheme::Location),
            "exponential" => Ok(Scheme::Exponential),
            other => Err(WleError::InvalidSpec(format!("unknown contamination scheme `{other}`"))),
        }
    }

    /// First component of the true parameter.
    pub fn target(self) -> f64 {
        match self {
            Scheme::Scale | Scheme::Location => 0.0,
            Scheme::Exponential => 1.0,
        }
    }

    fn draw(self, eps: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let unit = Gaussian::new(0.0, 1.0).expect("unit normal");
        let wide = Gaussian::new(0.0, 5.0).expect("wide normal");
        let (e1, e5) = (Exp::new(1.0).expect("rate 1"), Exp::new(0.2).expect("rate 1/5"));
        (0..n)
            .map(|_| {
                let bad = rng.gen::<f64>() < eps;
                match (self, bad) {
                    (Scheme::Scale, false) | (Scheme::Location, false) => unit.sample(rng),
                    (Scheme::Scale, true) => wide.sample(rng),
                    (Scheme::Location, true) => 5.0 + unit.sample(rng),
                    (Scheme::Exponential, false) => e1.sample(rng),
                    (Scheme::Exponential, true) => e5.sample(rng),
                }
            })
            .collect()
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Scale => "scale",
            Scheme::Location => "location",
            Scheme::Exponential => "exponential",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Estimator {
    Mle,
    Wle { weight: WeightSpec },
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Estimator::Mle => f.write_str("mle"),
            Estimator::Wle { weight } => write!(f, "wle {weight}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationPlan {
    pub scheme: Scheme,
    pub epsilons: Vec<f64>,
    pub n: usize,
    pub reps: usize,
    pub estimators: Vec<Estimator>,
    pub seed: u64,
    pub solver: SolverConfig,
    pub residual: ResidualConfig,
}

impl SimulationPlan {
    /// The tabulated design: ε ∈ {0, 0.1, …, 0.5}, n = 30, R = 1000, MLE and
    /// gamma-kernel WLEs at α = 1.01 and 1.02.
    pub fn standard(scheme: Scheme, seed: u64) -> Self {
        SimulationPlan {
            scheme,
            epsilons: (0..=5).map(|i| i as f64 / 10.0).collect(),
            n: 30,
            reps: 1000,
            estimators: vec![
                Estimator::Mle,
                Estimator::Wle {
                    weight: WeightSpec::Gamma { alpha: 1.01 },
                },
                Estimator::Wle {
                    weight: WeightSpec::Gamma { alpha: 1.02 },
                },
            ],
            seed,
            solver: SolverConfig::default(),
            residual: ResidualConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilons.iter().any(|e| !(0.0..=0.5).contains(e)) {
            return Err(WleError::InvalidConfig("contamination levels must lie in [0, 0.5]".into()));
        }
        if self.reps == 0 || self.estimators.is_empty() {
            return Err(WleError::InvalidConfig("need at least one replication and one estimator".into()));
        }
        if self.n < self.solver.bootstrap_m.max(2) {
            return Err(WleError::InvalidConfig(format!("sample size {} too small", self.n)));
        }
        for e in &self.estimators {
            if let Estimator::Wle { weight } = e {
                weight.validate()?;
            }
        }
        let dim = match self.scheme {
            Scheme::Exponential => 1,
            _ => 2,
        };
        self.solver.validate(dim)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub epsilon: f64,
    pub rep: usize,
    pub estimator: usize,
    /// First component of the selected root; `None` if the fit failed.
    pub estimate: Option<f64>,
    pub root_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub epsilon: f64,
    pub estimator: Estimator,
    /// `None` when every replication failed.
    pub mse: Option<f64>,
    /// Monte-Carlo standard error of `mse`.
    pub mc_se: f64,
    pub failures: usize,
    pub mean_root_count: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub version: u32,
    pub plan: SimulationPlan,
    pub cells: Vec<Cell>,
    pub replications: Vec<Replication>,
}

impl SimulationReport {
    pub fn cell(&self, epsilon: f64, estimator: usize) -> Option<&Cell> {
        let per = self.plan.estimators.len();
        self.cells
            .iter()
            .enumerate()
            .find(|(i, c)| i % per == estimator && (c.epsilon - epsilon).abs() < 1e-12)
            .map(|(_, c)| c)
    }
}

fn fit<F: ParametricFamily<Obs = f64>>(
    family: &F,
    sample: &[f64],
    est: &Estimator,
    plan: &SimulationPlan,
    seed: u64,
) -> Result<(f64, usize)> {
    match est {
        Estimator::Mle => Ok((family.mle(sample)?[0], 1)),
        Estimator::Wle { weight } => {
            let config = SolverConfig { seed, ..plan.solver };
            let set = bootstrap_root_search(family, sample, &plan.residual, weight, &config)?;
            Ok((set.selected_root().theta[0], set.len()))
        }
    }
}

/// Replication `r` at level index `e` draws from ChaCha8 stream
/// `(e << 32) | r` of the plan seed, so the report does not depend on
/// thread count or scheduling.
pub fn run_simulation(plan: &SimulationPlan) -> Result<SimulationReport> {
    plan.validate()?;
    let jobs: Vec<(usize, usize)> = (0..plan.epsilons.len())
        .flat_map(|e| (0..plan.reps).map(move |r| (e, r)))
        .collect();
    let replications: Vec<Replication> = jobs
        .par_iter()
        .flat_map_iter(|&(e, r)| {
            let eps = plan.epsilons[e];
            let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
            rng.set_stream(((e as u64) << 32) | r as u64);
            let sample = plan.scheme.draw(eps, plan.n, &mut rng);
            let boot_seed: u64 = rng.gen();
            plan.estimators
                .iter()
                .enumerate()
                .map(|(k, est)| {
                    let out = match plan.scheme {
                        Scheme::Exponential => fit(&Exponential, &sample, est, plan, boot_seed),
                        _ => fit(&Normal, &sample, est, plan, boot_seed),
                    };
                    let (estimate, root_count) = match out {
                        Ok((v, c)) => (Some(v), c),
                        Err(_) => (None, 0),
                    };
                    Replication {
                        epsilon: eps,
                        rep: r,
                        estimator: k,
                        estimate,
                        root_count,
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();

    let target = plan.scheme.target();
    let mut cells = Vec::with_capacity(plan.epsilons.len() * plan.estimators.len());
    for &eps in &plan.epsilons {
        for (k, est) in plan.estimators.iter().enumerate() {
            let rows: Vec<&Replication> = replications
                .iter()
                .filter(|r| r.estimator == k && r.epsilon == eps)
                .collect();
            let sq: Vec<f64> = rows.iter().filter_map(|r| r.estimate).map(|v| (v - target).powi(2)).collect();
            let m = sq.len() as f64;
            let mse = sq.iter().sum::<f64>() / m.max(1.0);
            let var = if sq.len() > 1 {
                sq.iter().map(|s| (s - mse).powi(2)).sum::<f64>() / (m - 1.0)
            } else {
                0.0
            };
            let ok: Vec<&&Replication> = rows.iter().filter(|r| r.estimate.is_some()).collect();
            cells.push(Cell {
                epsilon: eps,
                estimator: *est,
                mse: (!sq.is_empty()).then_some(mse),
                mc_se: (var / m.max(1.0)).sqrt(),
                failures: rows.len() - sq.len(),
                mean_root_count: ok.iter().map(|r| r.root_count as f64).sum::<f64>() / (ok.len().max(1) as f64),
            });
        }
    }
    Ok(SimulationReport {
        version: REPORT_VERSION,
        plan: plan.clone(),
        cells,
        replications,
    })
}

/// Variance ratio var(WLE)/var(MLE) of the first component on clean N(0, 1)
/// samples, each WLE solved from its sample's MLE.
pub fn efficiency_ratio(spec: &WeightSpec, n: usize, reps: usize, seed: u64) -> Result<f64> {
    let solver = SolverConfig::default();
    let rc = ResidualConfig::default();
    let pairs = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let x = Scheme::Scale.draw(0.0, n, &mut rng);
            let mle = Normal.mle(&x)?;
            let root = crate::solver::solve_from(&Normal, &x, &rc, spec, &solver, &mle)?;
            Ok((mle[0], root.theta[0]))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let var = |v: Vec<f64>| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)
    };
    let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok(var(b) / var(a))
}
