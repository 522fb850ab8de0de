mod common;

use common::*;
use lambda_scatter::pulse::{filtered_envelope, filtered_envelope_with, incident_envelope, PulseSeries};
use lambda_scatter::{PhysicalParams, PulseShape, TimeGrid};
use num_complex::Complex64 as C64;

fn reference_grid(h: f64) -> TimeGrid {
    let n = (35.2 / h).round() as usize + 1;
    TimeGrid::new(-12.8, 22.4, n).unwrap()
}

/// Max-abs error of the grid-step RK4 against the frozen closed form.
fn rk4_error(h: f64) -> f64 {
    let table = load_series("gaussian_filtered_d0_g0.5.csv");
    let stride = (h * 80.0).round() as usize;
    let grid = reference_grid(h);
    let shape = PulseShape::gaussian(0.0, 0.5).unwrap();
    let s = filtered_envelope_with(&shape, &grid, &PhysicalParams::default(), None).unwrap();
    s.values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let (t, r) = table[i * stride];
            assert!((t - grid.time(i)).abs() < 1e-9);
            (v - r).norm()
        })
        .fold(0.0, f64::max)
}

#[test]
fn frozen_table_agrees_with_quadrature() {
    let table = load_series("gaussian_filtered_d0_g0.5.csv");
    let shape = PulseShape::gaussian(0.0, 0.5).unwrap();
    let params = PhysicalParams::default();
    for &(t, v) in table.iter().step_by(173) {
        let q = filtered_by_quadrature(&shape, &params, t);
        assert!((q - v).norm() < 1e-10, "t={t}: {q} vs {v}");
    }
}

#[test]
fn rk4_close_to_closed_form() {
    let e = rk4_error(0.05);
    eprintln!("h=0.05 max-abs error {e:e}");
    assert!(e < 1e-7);
}

#[test]
fn rk4_is_fourth_order() {
    let hs = [0.8, 0.4, 0.2, 0.1, 0.05, 0.025];
    let errs: Vec<f64> = hs.iter().map(|&h| rk4_error(h)).collect();
    eprintln!("{errs:?}");
    for w in errs.windows(2) {
        if w[1] > 1e-12 {
            assert!(w[0] / w[1] >= 8.0, "{} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn default_integrator_accuracy() {
    let table = load_series("gaussian_filtered_d0_g0.5.csv");
    let grid = reference_grid(0.4);
    let shape = PulseShape::gaussian(0.0, 0.5).unwrap();
    let s = filtered_envelope(&shape, &grid, &PhysicalParams::default()).unwrap();
    let e = s.values.iter().enumerate().map(|(i, v)| (v - table[i * 32].1).norm()).fold(0.0, f64::max);
    // floor set by starting from phis = 0 at the window edge
    let start = table[0].1.norm();
    assert!(e < start + 1e-11, "{e:e}");
}

#[test]
fn probes_against_frozen_values() {
    let params = PhysicalParams::default();
    for (d, g) in [("0", "0.5"), ("0", "0.2"), ("1", "1"), ("1.5", "0.7")] {
        let shape = PulseShape::gaussian(d.parse().unwrap(), g.parse().unwrap()).unwrap();
        let sol = lambda_scatter::pulse::PulseSolution::new(&shape, &params).unwrap();
        for t in ["0", "1.5"] {
            let tt: f64 = t.parse().unwrap();
            let inc = probe("incident", d, g, t);
            let fil = probe("filtered", d, g, t);
            assert!((sol.incident(tt) - inc).norm() < 1e-14);
            assert!((sol.filtered(tt) - fil).norm() < 1e-9, "{d} {g} {t}: {} vs {fil}", sol.filtered(tt));
        }
    }
}

#[test]
fn hermite_shape_value_at_origin() {
    let expected = probe("hermite_b2", "0.8984", "1.0143", "0");
    let shape = PulseShape::new(0.8984, 1.0143, vec![C64::new(0.0, 0.0294)]).unwrap();
    let params = PhysicalParams::default();
    let grid = lambda_scatter::pulse::working_grid(&shape, &params, 2, lambda_scatter::Resolution::Auto).unwrap();
    let normalized = shape.normalize(&grid).unwrap();
    assert!((normalized.envelope(0.0) - expected).norm() < 1e-12);
    assert!((shape.envelope(0.0) - expected).norm() < 1e-12);
}

#[test]
fn hermite_shape_filtered_matches_quadrature() {
    let params = PhysicalParams::default();
    let shape = PulseShape::new(0.9, 1.0, vec![C64::new(0.0, 0.03), C64::new(0.006, 0.015), C64::new(0.0024, 0.0)]).unwrap();
    let grid = lambda_scatter::pulse::working_grid(&shape, &params, 2, lambda_scatter::Resolution::Auto).unwrap();
    let s = filtered_envelope(&shape, &grid, &params).unwrap();
    for i in (0..grid.len()).step_by(19) {
        let q = filtered_by_quadrature(&shape, &params, grid.time(i));
        assert!((q - s.values[i]).norm() < 1e-9, "t={}", grid.time(i));
    }
}

#[test]
fn single_photon_norm_conservation() {
    let params = PhysicalParams::default();
    for (d, g) in [(0.0, 0.5), (1.0, 1.0), (-1.7, 0.3), (0.4, 1.8)] {
        let shape = PulseShape::gaussian(d, g).unwrap();
        let grid = lambda_scatter::pulse::working_grid(&shape, &params, 2, lambda_scatter::Resolution::Auto).unwrap();
        let shape = shape.normalize(&grid).unwrap();
        let s = PulseSeries::compute(&shape, &grid, &params).unwrap();
        let total = s.transmitted.norm_sqr() + s.filtered.norm_sqr();
        assert!((total - s.incident.norm_sqr()).abs() < 1e-6, "{d} {g}: {total}");
    }
}

#[test]
fn filtered_envelope_is_linear() {
    let params = PhysicalParams::default();
    let a = PulseShape::gaussian(0.3, 0.8).unwrap();
    let grid = lambda_scatter::pulse::working_grid(&a, &params, 2, lambda_scatter::Resolution::Points(257)).unwrap();
    let sa = filtered_envelope(&a, &grid, &params).unwrap();
    let sb = filtered_envelope(&a.scaled(-2.5), &grid, &params).unwrap();
    for (x, y) in sa.values.iter().zip(&sb.values) {
        assert!((x * -2.5 - y).norm() < 1e-12);
    }
    let _ = incident_envelope(&a, &grid, &params);
}

#[test]
fn frequency_shift_leaves_moduli() {
    let base = PhysicalParams::default();
    let shifted = base.with_omega0(3.7).unwrap();
    let shape = PulseShape::gaussian(0.8, 0.6).unwrap();
    let grid = lambda_scatter::pulse::working_grid(&shape, &base, 2, lambda_scatter::Resolution::Auto).unwrap();
    let a = PulseSeries::compute(&shape, &grid, &base).unwrap();
    let b = PulseSeries::compute(&shape, &grid, &shifted).unwrap();
    for (x, y) in a.filtered.values.iter().zip(&b.filtered.values) {
        assert!((x.norm() - y.norm()).abs() < 1e-12);
    }
    // the shifted filtered envelope still matches direct quadrature
    for i in (0..grid.len()).step_by(41) {
        let q = filtered_by_quadrature(&shape, &shifted, grid.time(i));
        assert!((q - b.filtered.values[i]).norm() < 1e-9);
    }
}
