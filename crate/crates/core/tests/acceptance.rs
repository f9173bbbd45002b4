//! One test per acceptance criterion. Each prints a single PASS/FAIL line
//! (run with `--nocapture` to see them) and fails when the criterion fails.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal as Gaussian};

use wle::diagnostics::{
    bias_curve, fisher_consistency_check, influence_first_order, influence_second_order, NormalLocation,
    Quadrature,
};
use wle::harness::{reproduce_table, Comparison, TableReport};
use wle::models::{Exponential, Normal, ParamVector, ParametricFamily, Poisson};
use wle::residuals::ResidualConfig;
use wle::solver::{bootstrap_root_search, solve_from, SolverConfig};
use wle::weights::WeightSpec;

fn verdict(id: u32, name: &str, failures: &[String]) {
    if failures.is_empty() {
        println!("PASS criterion {id}: {name}");
    } else {
        println!("FAIL criterion {id}: {name}: {}", failures.join("; "));
    }
    assert!(failures.is_empty(), "criterion {id} failed: {failures:?}");
}

fn describe(c: &Comparison) -> String {
    format!("{} = {:.5}, expected {} ± {}", c.label, c.computed, c.expected, c.tolerance)
}

fn timed(id: &str) -> (TableReport, Duration) {
    let t = Instant::now();
    let r = reproduce_table(id).unwrap();
    (r, t.elapsed())
}

fn table_failures(r: &TableReport) -> Vec<String> {
    r.failures().map(describe).collect()
}

fn budget(failures: &mut Vec<String>, what: &str, took: Duration, limit: Duration) {
    if took > limit {
        failures.push(format!("{what} took {took:.2?}, budget {limit:?}"));
    }
}

#[test]
fn criterion_01_drosophila() {
    let (r, took) = timed("table2");
    let mut f = table_failures(&r);
    budget(&mut f, "table2", took, Duration::from_secs(1));
    verdict(1, "Poisson WLE fits to the drosophila counts", &f);
}

#[test]
fn criterion_02_newcomb() {
    let (r, took) = timed("table3");
    let mut f = table_failures(&r);
    budget(&mut f, "table3", took, Duration::from_secs(5));
    verdict(2, "normal WLE fits to the speed-of-light data", &f);
}

#[test]
fn criterion_03_rainfall() {
    let (r, _) = timed("table4");
    verdict(3, "exponential WLE fit to the rainfall data", &table_failures(&r));
}

#[test]
fn criterion_04_lubischew() {
    let mut f = table_failures(&timed("table5").0);
    f.extend(table_failures(&timed("table6").0));
    verdict(4, "three beetle roots and the concinna weight pattern", &f);
}

#[test]
fn criterion_05_mixture_roots() {
    verdict(5, "population roots under normal mixtures", &table_failures(&timed("figure5").0));
}

#[test]
fn criterion_06_simulations() {
    let start = Instant::now();
    let mut f = Vec::new();
    for id in ["table7", "table8", "table9"] {
        let (r, took) = timed(id);
        println!("  {id}: {took:.1?}");
        f.extend(r.failures().map(|c| format!("{id}: {}", describe(c))));
    }
    budget(&mut f, "tables 7-9", start.elapsed(), Duration::from_secs(600));
    verdict(6, "contamination Monte Carlo mean squared errors", &f);
}

#[test]
fn criterion_07_star_cluster() {
    verdict(7, "bivariate WLE of the star cluster", &table_failures(&timed("table10").0));
}

#[test]
fn criterion_08_beetle_bivariate() {
    verdict(8, "three bivariate beetle roots", &table_failures(&timed("table11").0));
}

#[test]
fn criterion_09_regression() {
    let mut f = table_failures(&timed("table12").0);
    f.extend(table_failures(&timed("table13").0));
    verdict(9, "regression roots for the animals and voltage data", &f);
}

fn check(f: &mut Vec<String>, ok: bool, what: impl FnOnce() -> String) {
    if !ok {
        f.push(what());
    }
}

#[test]
fn criterion_10_properties() {
    let mut f = Vec::new();
    let specs = [
        WeightSpec::gamma(1.01).unwrap(),
        WeightSpec::gamma(3.0).unwrap(),
        WeightSpec::weibull(1.01).unwrap(),
        WeightSpec::weibull(4.0).unwrap(),
        WeightSpec::gev(0.5).unwrap(),
        WeightSpec::gev(10.0).unwrap(),
        WeightSpec::scaled_f(2.1, 1.0).unwrap(),
        WeightSpec::scaled_f(5.0, 8.0).unwrap(),
    ];

    // weight functions
    for s in &specs {
        let in_range = (0..=2000).all(|i| {
            let tau = -1.0 + (i as f64 / 2000.0).powi(4) * 1e6;
            (0.0..=1.0).contains(&s.weight(tau))
        });
        check(&mut f, in_range, || format!("{s} leaves [0, 1]"));
        check(&mut f, (s.weight(0.0) - 1.0).abs() < 1e-12, || format!("{s}: w(0) != 1"));
        check(&mut f, s.weight(-1.0) == 0.0, || format!("{s}: w(-1) != 0"));
        let h = 1e-7;
        let d = (s.weight(h) - s.weight(-h)) / (2.0 * h);
        check(&mut f, d.abs() < 1e-6, || format!("{s}: w'(0) = {d:e}"));
    }
    let at5 = |s: WeightSpec| s.weight(5.0);
    let gamma: Vec<f64> = [1.01, 2.0, 5.0].map(|a| at5(WeightSpec::gamma(a).unwrap())).to_vec();
    let weib: Vec<f64> = [1.01, 2.0, 5.0].map(|k| at5(WeightSpec::weibull(k).unwrap())).to_vec();
    let gev: Vec<f64> = [0.5, 2.0, 10.0].map(|x| at5(WeightSpec::gev(x).unwrap())).to_vec();
    check(&mut f, gamma.windows(2).all(|w| w[1] < w[0]), || format!("gamma not decreasing in alpha: {gamma:?}"));
    check(&mut f, weib.windows(2).all(|w| w[1] < w[0]), || format!("weibull not decreasing in k: {weib:?}"));
    check(&mut f, gev.windows(2).all(|w| w[1] > w[0]), || format!("gev not increasing in xi: {gev:?}"));
    let limit = WeightSpec::gamma(1.0 + 1e-8).unwrap();
    check(&mut f, [-0.9, 0.0, 5.0].iter().all(|&t| (limit.weight(t) - 1.0).abs() < 1e-6), || {
        "likelihood limit".into()
    });

    // residual population-zero property
    for p in [0.1, 0.25, 0.5] {
        let rc = ResidualConfig::new(p, 1.0).unwrap();
        let zero = (1..1000).all(|i| {
            let u = i as f64 / 1000.0;
            rc.tail_residual(u, 1.0 - u, u, 1.0 - u).abs() < 1e-12
        });
        check(&mut f, zero, || format!("population residual nonzero at p = {p}"));
    }

    // Fisher consistency
    let q = Quadrature::default();
    let rc = ResidualConfig::default();
    for s in &specs {
        let v = [
            fisher_consistency_check(&Normal, &[0.5, 2.0], &rc, s, &q).unwrap(),
            fisher_consistency_check(&Exponential, &[1.3], &rc, s, &q).unwrap(),
            fisher_consistency_check(&Poisson, &[3.5], &rc, s, &q).unwrap(),
        ];
        let worst = v.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()));
        check(&mut f, worst < 1e-6, || format!("{s}: Fisher consistency residual {worst:e}"));
    }

    // influence at the model equals the MLE influence
    for s in &specs[..4] {
        for y in [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0] {
            let r = influence_first_order(&Normal, &[0.0, 1.0], s, &q, y).unwrap();
            let want = [y, y * y - 1.0];
            let err = r.t1.iter().zip(want).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            check(&mut f, err < 1e-5, || format!("{s}: normal influence off by {err:e} at y = {y}"));
        }
        for y in [0.5, 1.0, 2.0, 3.0] {
            // I(λ)⁻¹u_λ(y) = λ²(1/λ − y)
            let r = influence_first_order(&Exponential, &[2.0], s, &q, y).unwrap();
            let want = 4.0 * (0.5 - y);
            check(&mut f, (r.t1[0] - want).abs() < 1e-5, || format!("{s}: exponential influence at y = {y}"));
        }
    }

    // location-scale equivariance
    let spec = WeightSpec::default();
    let tight = SolverConfig {
        tol: 1e-13,
        max_iter: 5000,
        ..SolverConfig::default()
    };
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Gaussian::new(0.0, 1.0).unwrap();
        let x: Vec<f64> = (0..30).map(|_| g.sample(&mut rng)).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 + 2.0 * v).collect();
        let t0 = Normal.mle(&x).unwrap();
        let s0 = ParamVector::new(vec![3.0 + 2.0 * t0[0], 4.0 * t0[1]]);
        let (rx, ry) = match (
            solve_from(&Normal, &x, &rc, &spec, &tight, &t0),
            solve_from(&Normal, &y, &rc, &spec, &tight, &s0),
        ) {
            (Ok(a), Ok(b)) => (a, b),
            (a, b) => {
                f.push(format!("equivariance seed {seed}: {:?} / {:?}", a.err(), b.err()));
                continue;
            }
        };
        let want = [3.0 + 2.0 * rx.theta[0], 4.0 * rx.theta[1]];
        let ok = ry.theta.iter().zip(want).all(|(g, w)| (g - w).abs() <= 1e-8 * (1.0 + w.abs()));
        check(&mut f, ok, || format!("equivariance seed {seed}: {:?} vs {want:?}", ry.theta));
    }

    // seed determinism
    let data: Vec<f64> = {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let g = Gaussian::new(0.0, 1.0).unwrap();
        (0..30).map(|i| g.sample(&mut rng) + if i < 8 { 5.0 } else { 0.0 }).collect()
    };
    let cfg = SolverConfig {
        seed: 99,
        ..SolverConfig::default()
    };
    let a = bootstrap_root_search(&Normal, &data, &rc, &WeightSpec::gamma(1.05).unwrap(), &cfg).unwrap();
    let b = bootstrap_root_search(&Normal, &data, &rc, &WeightSpec::gamma(1.05).unwrap(), &cfg).unwrap();
    check(&mut f, a == b, || "root search differs between identical runs".into());

    // second-order bias below the MLE line
    let model = NormalLocation::default();
    let eps: Vec<f64> = (1..=20).map(|i| 0.005 * i as f64).collect();
    for alpha in [2.0, 3.0, 5.0] {
        let s = WeightSpec::gamma(alpha).unwrap();
        let t1 = influence_first_order(&model, &[1.0], &s, &q, 10.0).unwrap().t1[0];
        let t2 = influence_second_order(&model, &[1.0], &s, &q, 10.0).unwrap();
        let below = bias_curve(t1, t2, &eps).iter().all(|p| p.predicted < p.mle);
        check(&mut f, below, || format!("alpha = {alpha}: bias curve not below the MLE line"));
    }

    verdict(10, "property suites", &f);
}
