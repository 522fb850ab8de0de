//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use lambda_scatter::{PhysicalParams, PulseShape};
use num_complex::Complex64 as C64;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("data").join(name)
}

/// Rows `(t, value)` of a frozen `t,re,im` table.
pub fn load_series(name: &str) -> Vec<(f64, C64)> {
    let text = std::fs::read_to_string(data_path(name)).expect("frozen table");
    text.lines()
        .skip(1)
        .map(|line| {
            let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            (f[0], C64::new(f[1], f[2]))
        })
        .collect()
}

/// Frozen probe value `(kind, delta, gamma, t)` from `probes.csv`.
pub fn probe(kind: &str, delta: &str, gamma: &str, t: &str) -> C64 {
    let text = std::fs::read_to_string(data_path("probes.csv")).expect("probe table");
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f[0] == kind && f[1] == delta && f[2] == gamma && f[3] == t {
            return C64::new(f[4].parse().unwrap(), f[5].parse().unwrap());
        }
    }
    panic!("no probe {kind} {delta} {gamma} {t}");
}

fn simpson<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64, fa: C64, fm: C64, fb: C64, whole: C64, tol: f64, depth: u32) -> C64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.norm() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of a complex integrand.
pub fn adaptive_simpson<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, tol: f64) -> C64 {
    // split into unit panels so narrow features are not skipped
    let panels = ((b - a).ceil() as usize).max(1);
    let w = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let (x0, x1) = (a + k as f64 * w, a + (k + 1) as f64 * w);
            let (f0, fm, f1) = (f(x0), f(0.5 * (x0 + x1)), f(x1));
            let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
            simpson(&f, x0, x1, f0, fm, f1, whole, tol / panels as f64, 40)
        })
        .sum()
}

/// Filtered envelope by direct quadrature of its defining convolution,
/// `-chirality gamma0 int_{-inf}^t phi0(t') exp(-(i omega0 + gamma0)(t - t')) dt'`.
pub fn filtered_by_quadrature(shape: &PulseShape, params: &PhysicalParams, t: f64) -> C64 {
    let lam = params.decay();
    let start = -14.0 / shape.gamma();
    if t <= start {
        return C64::new(0.0, 0.0);
    }
    let lab = |s: f64| shape.envelope(s) * C64::from_polar(1.0, -params.omega0() * s);
    let integral = adaptive_simpson(|s| lab(s) * (-lam * (t - s)).exp(), start, t, 1e-13);
    -params.drive() * integral
}
