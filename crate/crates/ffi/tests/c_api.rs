use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use wle_ffi::*;

const GAMMA: WleWeight = WleWeight {
    kind: WleWeightKind::Gamma,
    a: 1.01,
    b: 0.0,
};

fn last_error() -> String {
    unsafe { CStr::from_ptr(wle_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn weight_at_zero_is_one() {
    let mut w = f64::NAN;
    assert_eq!(unsafe { wle_weight_eval(GAMMA, 0.0, &mut w) }, WleStatus::Ok);
    assert!((w - 1.0).abs() < 1e-15);
    let bad = WleWeight { a: 0.5, ..GAMMA };
    assert_eq!(unsafe { wle_weight_eval(bad, 0.0, &mut w) }, WleStatus::InvalidSpec);
    assert!(!last_error().is_empty());
}

#[test]
fn fit_and_read_back() {
    let x = [0.1, 0.5, 0.9, 1.3, 2.2, 0.4, 0.7, 1.1];
    let mut fit = ptr::null_mut();
    let st = unsafe { wle_fit_univariate(WleModel::Exponential, x.as_ptr(), x.len(), GAMMA, 0.5, &mut fit) };
    assert_eq!(st, WleStatus::Ok, "{}", last_error());
    unsafe {
        assert_eq!(wle_fit_root_count(fit), 1);
        assert_eq!(wle_fit_dim(fit), 1);
        let (mut theta, mut w) = ([0.0], 0.0);
        assert_eq!(wle_fit_root(fit, 0, theta.as_mut_ptr(), 1, &mut w), WleStatus::Ok);
        let mle = x.len() as f64 / x.iter().sum::<f64>();
        assert!((theta[0] - mle).abs() < 0.05 * mle);
        assert!(w > 0.0 && w <= x.len() as f64);
        assert_eq!(wle_fit_root(fit, 3, theta.as_mut_ptr(), 1, ptr::null_mut()), WleStatus::OutOfRange);
        wle_fit_free(fit);
    }
}

#[test]
fn regression_search_selects_a_root() {
    let x: Vec<f64> = (0..20).map(f64::from).collect();
    let y: Vec<f64> = x.iter().map(|v| 1.0 + 2.0 * v + if *v as i32 % 2 == 0 { 0.1 } else { -0.1 }).collect();
    let mut fit = ptr::null_mut();
    let w = WleWeight {
        kind: WleWeightKind::ScaledF,
        a: 2.1,
        b: 1.0,
    };
    let st = unsafe { wle_roots_regression(x.as_ptr(), y.as_ptr(), x.len(), w, 20, 3, 7, &mut fit) };
    assert_eq!(st, WleStatus::Ok, "{}", last_error());
    unsafe {
        let mut sel = usize::MAX;
        assert_eq!(wle_fit_selected(fit, &mut sel), WleStatus::Ok);
        assert!(sel < wle_fit_root_count(fit));
        assert_eq!(wle_fit_dim(fit), 3);
        wle_fit_free(fit);
    }
}

#[test]
fn null_and_bad_input() {
    let mut fit = ptr::null_mut();
    let st = unsafe { wle_fit_univariate(WleModel::Normal, ptr::null(), 4, GAMMA, 0.5, &mut fit) };
    assert_eq!(st, WleStatus::NullPointer);
    assert!(fit.is_null());
    let x = [-1.0, 2.0];
    let st = unsafe { wle_fit_univariate(WleModel::Poisson, x.as_ptr(), 2, GAMMA, 0.5, &mut fit) };
    assert_eq!(st, WleStatus::Domain);
    let st = unsafe { wle_fit_univariate(WleModel::Normal, x.as_ptr(), 2, GAMMA, 0.9, &mut fit) };
    assert_eq!(st, WleStatus::InvalidConfig);
    unsafe {
        assert_eq!(wle_fit_root_count(ptr::null()), 0);
        wle_fit_free(ptr::null_mut());
    }
}

#[test]
fn unknown_table() {
    let id = CString::new("table99").unwrap();
    let mut pass = -1;
    assert_eq!(unsafe { wle_reproduce_table(id.as_ptr(), &mut pass) }, WleStatus::NotFound);
    assert!(last_error().contains("table99"));
}

#[test]
fn header_compiles_as_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/wle.h");
    assert!(header.exists());
    let Ok(cc) = which_cc() else { return };
    let tmp = std::env::temp_dir().join(format!("wle_header_{}.c", std::process::id()));
    std::fs::write(
        &tmp,
        "#include \"wle.h\"\nint main(void) { WleFit *f = 0; size_t k = wle_fit_root_count(f); return (int)k; }\n",
    )
    .unwrap();
    let out = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(&tmp)
        .output()
        .unwrap();
    let _ = std::fs::remove_file(&tmp);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok())
        .ok_or(())
}
