use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use wle::diagnostics::{
    bias_curve_csv, concentration_ellipse, influence_first_order, influence_second_order, mixture_root_scan,
    NormalLocation, NormalMixture, Quadrature,
};
use wle::harness::{export_report, load_dataset, reproduce_table, run_simulation, Dataset, Estimator, Format, Scheme, SimulationPlan};
use wle::models::{
    BivariateNormal, CovarianceDivisor, Exponential, LinearRegression, Normal, ParametricFamily, Poisson, Record,
};
use wle::residuals::{ResidualConfig, ResidualKind};
use wle::solver::{bootstrap_root_search, solve_from, SolverConfig};
use wle::weights::WeightSpec;
use wle::{Result, WleError};

#[derive(Parser)]
#[command(name = "wle", version, about = "Weighted likelihood estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the weighted score equation from the MLE.
    Fit(FitArgs),
    /// Bootstrap search for every root, with the selected one marked.
    Roots {
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long, default_value_t = 50)]
        bootstrap_b: usize,
        #[arg(long, default_value_t = 3)]
        bootstrap_m: usize,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
    },
    /// Contamination Monte Carlo; prints the report.
    Simulate {
        #[arg(long)]
        scheme: String,
        /// Comma-separated contamination levels.
        #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.4,0.5")]
        eps_grid: Vec<f64>,
        #[arg(long, default_value_t = 30)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        #[arg(long, default_value_t = 20_240_601)]
        seed: u64,
        /// Gamma-kernel tunings of the WLE columns.
        #[arg(long, value_delimiter = ',', default_value = "1.01,1.02")]
        alphas: Vec<f64>,
        /// json or csv.
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Population diagnostics as plot-ready CSV.
    Diagnose(DiagnoseArgs),
    /// Rerun a published table and compare.
    Reproduce {
        table_id: String,
        /// json or csv.
        #[arg(long, default_value = "json")]
        format: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelName {
    Poisson,
    Exponential,
    Normal,
    BivariateNormal,
    Regression,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightFn {
    Gamma,
    Weibull,
    Gev,
    ScaledF,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long, value_enum)]
    model: ModelName,
    /// CSV file, or the name of a bundled dataset.
    #[arg(long)]
    data: String,
    /// Columns to use; defaults to the first numeric ones.
    #[arg(long, value_delimiter = ',')]
    columns: Vec<String>,
    #[arg(long, value_enum, default_value_t = WeightFn::Gamma)]
    weight_fn: WeightFn,
    #[arg(long, default_value_t = 1.01)]
    alpha: f64,
    #[arg(long, default_value_t = 1.01)]
    k: f64,
    #[arg(long, default_value_t = 10.0)]
    xi: f64,
    #[arg(long, default_value_t = 2.1)]
    d1: f64,
    #[arg(long, default_value_t = 1.0)]
    d2: f64,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 1.0)]
    beta_exp: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Take natural logs of every used column first.
    #[arg(long)]
    log: bool,
    /// Bivariate covariance divisor: Σw, or the unbiased Σw − Σw²/Σw.
    #[arg(long)]
    unbiased: bool,
}

impl FitArgs {
    fn weight(&self) -> Result<WeightSpec> {
        match self.weight_fn {
            WeightFn::Gamma => WeightSpec::gamma(self.alpha),
            WeightFn::Weibull => WeightSpec::weibull(self.k),
            WeightFn::Gev => WeightSpec::gev(self.xi),
            WeightFn::ScaledF => WeightSpec::scaled_f(self.d1, self.d2),
        }
    }

    fn residual(&self, kind: ResidualKind) -> Result<ResidualConfig> {
        Ok(ResidualConfig::new(self.p, self.beta_exp)?.with_kind(kind))
    }

    fn solver(&self) -> SolverConfig {
        SolverConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            ..SolverConfig::default()
        }
    }

    fn dataset(&self) -> Result<Dataset> {
        let path = Path::new(&self.data);
        if path.exists() {
            let text = std::fs::read_to_string(path)?;
            Dataset::parse(&self.data, "user file", &text)
        } else {
            load_dataset(&self.data)
        }
    }

    fn transform(&self, v: Vec<f64>) -> Vec<f64> {
        if self.log {
            v.into_iter().map(f64::ln).collect()
        } else {
            v
        }
    }

    fn numeric_columns(&self, ds: &Dataset, want: usize) -> Result<Vec<String>> {
        let cols: Vec<String> = if self.columns.is_empty() {
            ds.columns.iter().filter(|c| ds.column(c).is_ok()).take(want).cloned().collect()
        } else {
            self.columns.clone()
        };
        if cols.len() != want {
            return Err(WleError::InvalidConfig(format!("model needs {want} numeric column(s), got {}", cols.len())));
        }
        Ok(cols)
    }
}

#[derive(Args)]
#[command(group(ArgGroup::new("what").required(true).args(["bias_curve", "mixture_scan", "ellipse"])))]
struct DiagnoseArgs {
    /// T′ and T″ of the unit-variance normal location model at a point mass y.
    #[arg(long, value_name = "Y")]
    bias_curve: Option<f64>,
    /// Population weighted score of N(μ, 1) under (1−ε)N(0,1) + εN(c,1), given as ε,c.
    #[arg(long, value_name = "EPS,C", value_delimiter = ',')]
    mixture_scan: Option<Vec<f64>>,
    /// Concentration ellipse of μ₁,μ₂,σ₁²,σ₂²,ρ.
    #[arg(long, value_name = "THETA", value_delimiter = ',')]
    ellipse: Option<Vec<f64>>,
    #[command(flatten)]
    opts: DiagnoseOpts,
}

#[derive(Args)]
struct DiagnoseOpts {
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 0.95)]
    coverage: f64,
    #[arg(long, default_value_t = 200)]
    vertices: usize,
}

fn emit<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

fn fit_with<F: ParametricFamily>(family: &F, sample: &[F::Obs], rc: &ResidualConfig, args: &FitArgs) -> Result<Vec<u8>> {
    let start = family.mle(sample)?;
    let root = solve_from(family, sample, rc, &args.weight()?, &args.solver(), &start)?;
    emit(&root)
}

fn roots_with<F: ParametricFamily>(
    family: &F,
    sample: &[F::Obs],
    rc: &ResidualConfig,
    args: &FitArgs,
    config: &SolverConfig,
) -> Result<Vec<u8>> {
    emit(&bootstrap_root_search(family, sample, rc, &args.weight()?, config)?)
}

fn dispatch(args: &FitArgs, config: Option<&SolverConfig>) -> Result<Vec<u8>> {
    let ds = args.dataset()?;
    macro_rules! run {
        ($family:expr, $sample:expr, $kind:expr) => {{
            let rc = args.residual($kind)?;
            match config {
                Some(c) => roots_with(&$family, &$sample, &rc, args, c),
                None => fit_with(&$family, &$sample, &rc, args),
            }
        }};
    }
    match args.model {
        ModelName::Poisson | ModelName::Exponential | ModelName::Normal => {
            let col = args.numeric_columns(&ds, 1)?;
            let x = args.transform(ds.column(&col[0])?);
            match args.model {
                ModelName::Poisson => run!(Poisson, x, ResidualKind::Univariate),
                ModelName::Exponential => run!(Exponential, x, ResidualKind::Univariate),
                _ => run!(Normal, x, ResidualKind::Univariate),
            }
        }
        ModelName::BivariateNormal => {
            let col = args.numeric_columns(&ds, 2)?;
            let (a, b) = (args.transform(ds.column(&col[0])?), args.transform(ds.column(&col[1])?));
            let pairs: Vec<[f64; 2]> = a.into_iter().zip(b).map(|(a, b)| [a, b]).collect();
            let divisor = if args.unbiased {
                CovarianceDivisor::Unbiased
            } else {
                CovarianceDivisor::WeightSum
            };
            run!(BivariateNormal::new(divisor), pairs, ResidualKind::Bivariate)
        }
        ModelName::Regression => {
            let col = args.numeric_columns(&ds, 2)?;
            let (x, y) = (args.transform(ds.column(&col[0])?), args.transform(ds.column(&col[1])?));
            let recs: Vec<Record> = x.into_iter().zip(y).map(|(x, y)| Record::new(x, y)).collect();
            run!(LinearRegression::with_design(&recs), recs, ResidualKind::Regression)
        }
    }
}

fn diagnose(args: &DiagnoseArgs) -> Result<Vec<u8>> {
    let o = &args.opts;
    let rc = ResidualConfig::new(o.p, 1.0)?;
    let quad = Quadrature::default();
    if let Some(y) = args.bias_curve {
        let spec = WeightSpec::gamma(o.alpha)?;
        let model = NormalLocation::default();
        let t2 = influence_second_order(&model, &[0.0], &spec, &quad, y)?;
        let report = influence_first_order(&model, &[0.0], &spec, &quad, y)?;
        let eps: Vec<f64> = (0..=20).map(|i| 0.005 * i as f64).collect();
        return bias_curve_csv(&report.with_second_order(t2, &eps)?.bias);
    }
    if let Some(v) = &args.mixture_scan {
        if v.len() != 2 {
            return Err(WleError::InvalidConfig("--mixture-scan takes ε,c".into()));
        }
        let mix = NormalMixture::new(v[0], v[1])?;
        let spec = WeightSpec::gamma(o.alpha)?;
        let hi = v[1].max(0.0) + 3.0;
        let lo = v[1].min(0.0) - 3.0;
        let steps = ((hi - lo) / 0.05).round() as usize;
        let grid: Vec<f64> = (0..=steps).map(|i| lo + 0.05 * i as f64).collect();
        return mixture_root_scan(&mix, &spec, &rc, &grid, &quad)?.to_csv();
    }
    if let Some(theta) = &args.ellipse {
        return concentration_ellipse(theta, o.coverage)?.polyline_csv(o.vertices);
    }
    Err(WleError::InvalidConfig("nothing to diagnose".into()))
}

fn run(cli: Cli) -> Result<(Vec<u8>, bool)> {
    match cli.command {
        Command::Fit(args) => Ok((dispatch(&args, None)?, true)),
        Command::Roots {
            fit,
            bootstrap_b,
            bootstrap_m,
            seed,
        } => {
            let config = SolverConfig {
                bootstrap_b,
                bootstrap_m,
                seed,
                ..fit.solver()
            };
            Ok((dispatch(&fit, Some(&config))?, true))
        }
        Command::Simulate {
            scheme,
            eps_grid,
            n,
            reps,
            seed,
            alphas,
            format,
        } => {
            let mut plan = SimulationPlan::standard(Scheme::parse(&scheme)?, seed);
            plan.epsilons = eps_grid;
            plan.n = n;
            plan.reps = reps;
            plan.estimators = std::iter::once(Ok(Estimator::Mle))
                .chain(alphas.iter().map(|&a| WeightSpec::gamma(a).map(|weight| Estimator::Wle { weight })))
                .collect::<Result<_>>()?;
            Ok((export_report(&run_simulation(&plan)?, Format::parse(&format)?)?, true))
        }
        Command::Diagnose(args) => Ok((diagnose(&args)?, true)),
        Command::Reproduce { table_id, format } => {
            let report = reproduce_table(&table_id)?;
            let pass = report.pass();
            Ok((export_report(&report, Format::parse(&format)?)?, pass))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok((bytes, pass)) => {
            if let Err(e) = std::io::stdout().write_all(&bytes) {
                eprintln!("wle: {e}");
                return ExitCode::FAILURE;
            }
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("wle: {e}");
            ExitCode::FAILURE
        }
    }
}
