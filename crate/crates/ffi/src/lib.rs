//! C ABI over the `wle` crate.
//!
//! Every entry point returns a [`WleStatus`]; on failure the message is
//! available from [`wle_last_error`] on the same thread. Results live behind
//! the opaque [`WleFit`] handle and are released with [`wle_fit_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wle::models::{Exponential, LinearRegression, Normal, ParametricFamily, Poisson, Record};
use wle::residuals::{ResidualConfig, ResidualKind};
use wle::solver::{bootstrap_root_search, solve_from, RootSet, SolverConfig};
use wle::weights::WeightSpec;
use wle::WleError;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WleStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    InvalidSpec = 3,
    InvalidConfig = 4,
    Numeric = 5,
    NotFound = 6,
    OutOfRange = 7,
    Panic = 8,
    Other = 9,
}

/// Passing a value outside the listed constants is undefined behaviour.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WleModel {
    Poisson = 0,
    Exponential = 1,
    Normal = 2,
}

/// Passing a value outside the listed constants is undefined behaviour.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WleWeightKind {
    Gamma = 0,
    Weibull = 1,
    Gev = 2,
    ScaledF = 3,
}

/// `a` is α, k, ξ or d₁ by kind; `b` is d₂ and ignored otherwise.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct WleWeight {
    pub kind: WleWeightKind,
    pub a: f64,
    pub b: f64,
}

/// Roots of one fit, heaviest weight sum first.
pub struct WleFit {
    set: RootSet,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &WleError) -> WleStatus {
    match e {
        WleError::Domain(_) | WleError::Degenerate(_) => WleStatus::Domain,
        WleError::InvalidSpec(_) => WleStatus::InvalidSpec,
        WleError::InvalidConfig(_) => WleStatus::InvalidConfig,
        WleError::Numeric(_) | WleError::Singular(_) | WleError::Quadrature(_) => WleStatus::Numeric,
        WleError::NotFound(_) => WleStatus::NotFound,
        _ => WleStatus::Other,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (WleStatus, String)>) -> WleStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            WleStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            WleStatus::Panic
        }
    }
}

fn lift<T>(r: wle::Result<T>) -> Result<T, (WleStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (WleStatus, String) {
    (WleStatus::NullPointer, format!("{what} is null"))
}

impl WleWeight {
    fn spec(&self) -> wle::Result<WeightSpec> {
        match self.kind {
            WleWeightKind::Gamma => WeightSpec::gamma(self.a),
            WleWeightKind::Weibull => WeightSpec::weibull(self.a),
            WleWeightKind::Gev => WeightSpec::gev(self.a),
            WleWeightKind::ScaledF => WeightSpec::scaled_f(self.a, self.b),
        }
    }
}

/// # Safety
/// `data` must point to `n` readable values (or be null with `n == 0`).
unsafe fn slice<'a, T>(data: *const T, n: usize, what: &str) -> Result<&'a [T], (WleStatus, String)> {
    if data.is_null() {
        return if n == 0 { Ok(&[]) } else { Err(null(what)) };
    }
    Ok(std::slice::from_raw_parts(data, n))
}

fn fit_family<F: ParametricFamily>(
    family: &F,
    sample: &[F::Obs],
    rc: &ResidualConfig,
    spec: &WeightSpec,
    config: Option<&SolverConfig>,
) -> wle::Result<RootSet> {
    match config {
        Some(c) => bootstrap_root_search(family, sample, rc, spec, c),
        None => {
            let c = SolverConfig::default();
            let start = family.mle(sample)?;
            let root = solve_from(family, sample, rc, spec, &c, &start)?;
            if !root.converged {
                return Err(WleError::Numeric(format!("no convergence in {} iterations", root.iterations)));
            }
            RootSet::from_roots(vec![root], &c)
        }
    }
}

fn univariate(model: WleModel, x: &[f64], rc: &ResidualConfig, spec: &WeightSpec, config: Option<&SolverConfig>) -> wle::Result<RootSet> {
    match model {
        WleModel::Poisson => fit_family(&Poisson, x, rc, spec, config),
        WleModel::Exponential => fit_family(&Exponential, x, rc, spec, config),
        WleModel::Normal => fit_family(&Normal, x, rc, spec, config),
    }
}

unsafe fn store(out: *mut *mut WleFit, set: RootSet) {
    *out = Box::into_raw(Box::new(WleFit { set }));
}

/// w(τ) for a weight specification.
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn wle_weight_eval(weight: WleWeight, tau: f64, out: *mut f64) -> WleStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = lift(weight.spec())?;
        *out = spec.weight(tau);
        Ok(())
    })
}

/// Single root of a univariate model, iterated from the MLE.
///
/// # Safety
/// `data` must hold `n` doubles and `out` must be writable. On success
/// `*out` owns a handle for [`wle_fit_free`].
#[no_mangle]
pub unsafe extern "C" fn wle_fit_univariate(
    model: WleModel,
    data: *const f64,
    n: usize,
    weight: WleWeight,
    p: f64,
    out: *mut *mut WleFit,
) -> WleStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let x = slice(data, n, "data")?;
        let rc = lift(ResidualConfig::new(p, 1.0))?;
        let set = lift(univariate(model, x, &rc, &lift(weight.spec())?, None))?;
        store(out, set);
        Ok(())
    })
}

/// Bootstrap search over `restarts` subsamples of size `subsample`.
///
/// # Safety
/// As for [`wle_fit_univariate`].
#[no_mangle]
pub unsafe extern "C" fn wle_roots_univariate(
    model: WleModel,
    data: *const f64,
    n: usize,
    weight: WleWeight,
    p: f64,
    restarts: usize,
    subsample: usize,
    seed: u64,
    out: *mut *mut WleFit,
) -> WleStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let x = slice(data, n, "data")?;
        let rc = lift(ResidualConfig::new(p, 1.0))?;
        let config = SolverConfig {
            bootstrap_b: restarts,
            bootstrap_m: subsample,
            seed,
            ..SolverConfig::default()
        };
        let set = lift(univariate(model, x, &rc, &lift(weight.spec())?, Some(&config)))?;
        store(out, set);
        Ok(())
    })
}

/// Bootstrap search for y = β₀ + β₁x + ε; roots are (β₀, β₁, σ).
///
/// # Safety
/// `x` and `y` must each hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wle_roots_regression(
    x: *const f64,
    y: *const f64,
    n: usize,
    weight: WleWeight,
    restarts: usize,
    subsample: usize,
    seed: u64,
    out: *mut *mut WleFit,
) -> WleStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let (xs, ys) = (slice(x, n, "x")?, slice(y, n, "y")?);
        let recs: Vec<Record> = xs.iter().zip(ys).map(|(&a, &b)| Record::new(a, b)).collect();
        let rc = ResidualConfig::default().with_kind(ResidualKind::Regression);
        let config = SolverConfig {
            bootstrap_b: restarts,
            bootstrap_m: subsample,
            seed,
            ..SolverConfig::default()
        };
        let family = LinearRegression::with_design(&recs);
        let set = lift(fit_family(&family, &recs, &rc, &lift(weight.spec())?, Some(&config)))?;
        store(out, set);
        Ok(())
    })
}

/// Number of distinct roots; 0 for a null handle.
///
/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wle_fit_root_count(fit: *const WleFit) -> usize {
    fit.as_ref().map_or(0, |f| f.set.len())
}

/// Parameter dimension; 0 for a null handle.
///
/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wle_fit_dim(fit: *const WleFit) -> usize {
    fit.as_ref().map_or(0, |f| f.set.roots[0].theta.len())
}

/// Index of the root chosen by the selection rule.
///
/// # Safety
/// `fit` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wle_fit_selected(fit: *const WleFit, out: *mut usize) -> WleStatus {
    guard(|| {
        let f = fit.as_ref().ok_or_else(|| null("fit"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = f.set.selected;
        Ok(())
    })
}

/// Copies root `index` into `theta` (capacity `len`) and its weight sum.
/// `weight_sum` may be null.
///
/// # Safety
/// `fit` must be a live handle, `theta` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn wle_fit_root(
    fit: *const WleFit,
    index: usize,
    theta: *mut f64,
    len: usize,
    weight_sum: *mut f64,
) -> WleStatus {
    guard(|| {
        let f = fit.as_ref().ok_or_else(|| null("fit"))?;
        let root = f.set.roots.get(index).ok_or_else(|| {
            (WleStatus::OutOfRange, format!("root {index} of {}", f.set.len()))
        })?;
        if theta.is_null() {
            return Err(null("theta"));
        }
        if len < root.theta.len() {
            return Err((WleStatus::OutOfRange, format!("buffer of {len} for {} parameters", root.theta.len())));
        }
        ptr::copy_nonoverlapping(root.theta.as_ptr(), theta, root.theta.len());
        if !weight_sum.is_null() {
            *weight_sum = root.weight_sum;
        }
        Ok(())
    })
}

/// # Safety
/// `fit` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wle_fit_free(fit: *mut WleFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Reruns a published table; `*pass` is 1 when every comparison holds.
///
/// # Safety
/// `table_id` must be a NUL-terminated string and `pass` writable.
#[no_mangle]
pub unsafe extern "C" fn wle_reproduce_table(table_id: *const c_char, pass: *mut c_int) -> WleStatus {
    guard(|| {
        if table_id.is_null() || pass.is_null() {
            return Err(null("argument"));
        }
        let id = CStr::from_ptr(table_id)
            .to_str()
            .map_err(|_| (WleStatus::InvalidSpec, "table id is not UTF-8".to_owned()))?;
        let report = lift(wle::harness::reproduce_table(id))?;
        *pass = c_int::from(report.pass());
        Ok(())
    })
}

/// Message of the last failed call on this thread, empty after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn wle_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
