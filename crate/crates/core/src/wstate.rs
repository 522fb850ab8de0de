//! W-state conversion probabilities.
//!
//! At each set of detection times the atom-photon state is a superposition of
//! single-excitation basis states with channel weights `w_1..w_K`; the
//! probability of converting it to the canonical W state is
//! `K min(w) / sum(w)`. Pulse averages weight this by the local norm.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::{s_coeff, t_coeff, PhysicalParams};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::pulse::{working_grid, PulseSeries, PulseShape, Resolution};
use crate::quad::pairwise_sum_n;
use crate::scatter2::{scatter_two_series, TwoPhotonWave};
use crate::scatter3::{ThreePhotonAmplitudes, ThreePhotonField};

/// Accepted band for the state norm before an average is reported.
pub const NORM_BAND: (f64, f64) = (0.9, 1.1);

/// Deviation of the norm from one beyond which a report is flagged.
pub const NORM_WARN: f64 = 0.02;

const DEGENERATE: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub average: f64,
    pub norm: f64,
    pub pointwise_max: f64,
    pub argmax: Vec<f64>,
    /// Set when `norm` is off by more than [`NORM_WARN`].
    pub norm_warning: bool,
}

/// `K min(w) / sum(w)`, or 0 at a point where every weight vanishes.
#[inline]
pub fn w_probability<const K: usize>(weights: [f64; K]) -> f64 {
    let sum: f64 = weights.iter().sum();
    if weights.iter().all(|&w| w < DEGENERATE) {
        return 0.0;
    }
    let min = weights.iter().copied().fold(f64::INFINITY, f64::min);
    K as f64 * min / sum
}

/// `P_W3` from the channel amplitudes `(XXx, XYy, YXy)` at one point.
pub fn pw3_from_amplitudes(a: [C64; 3]) -> f64 {
    w_probability(a.map(|z| z.norm_sqr()))
}

/// `P_W4` from the channel amplitudes `(XXXx, XXYy, XYXy, YXXy)` at one point.
pub fn pw4_from_amplitudes(a: [C64; 4]) -> f64 {
    w_probability(a.map(|z| z.norm_sqr()))
}

fn node(grid: &TimeGrid, t: f64) -> Result<usize> {
    grid.index_of(t).ok_or(Error::OffGrid(t))
}

pub fn pw3_pointwise(wave: &TwoPhotonWave, t1: f64, t2: f64) -> Result<f64> {
    let (i, j) = (node(&wave.grid, t1)?, node(&wave.grid, t2)?);
    Ok(w_probability(wave.weights(i, j)))
}

pub fn pw4_pointwise<A: ThreePhotonAmplitudes + ?Sized>(wave: &A, t1: f64, t2: f64, t3: f64) -> Result<f64> {
    let g = wave.grid();
    let (i, j, k) = (node(g, t1)?, node(g, t2)?, node(g, t3)?);
    Ok(w_probability(wave.weights(i, j, k)))
}

/// Per-slab accumulator: numerator, norm, best value and its location.
#[derive(Clone, Copy)]
struct Slab {
    num: f64,
    norm: f64,
    best: f64,
    at: [usize; 3],
}

fn finish(slabs: Vec<Slab>, grid: &TimeGrid, dims: usize) -> Result<EntanglementReport> {
    let sums: Vec<[f64; 2]> = slabs.iter().map(|s| [s.num, s.norm]).collect();
    let [num, norm] = pairwise_sum_n(&sums);
    let top = slabs
        .iter()
        .fold(None::<&Slab>, |acc, s| match acc {
            Some(a) if a.best >= s.best => Some(a),
            _ => Some(s),
        })
        .copied()
        .unwrap_or(Slab { num: 0.0, norm: 0.0, best: 0.0, at: [0; 3] });
    if !(NORM_BAND.0..=NORM_BAND.1).contains(&norm) {
        return Err(Error::NormOutOfBand { norm });
    }
    Ok(EntanglementReport {
        average: (num / norm).clamp(0.0, 1.0),
        norm,
        pointwise_max: top.best,
        argmax: top.at[..dims].iter().map(|&i| grid.time(i)).collect(),
        norm_warning: (norm - 1.0).abs() > NORM_WARN,
    })
}

/// Pulse-averaged `P_W3` by the 2-D trapezoid rule.
pub fn pw3_average(wave: &TwoPhotonWave) -> Result<EntanglementReport> {
    let grid = &wave.grid;
    let w = grid.trapezoid_weights();
    let n = grid.len();
    let slabs: Vec<Slab> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut s = Slab { num: 0.0, norm: 0.0, best: 0.0, at: [i, 0, 0] };
            for j in 0..n {
                let c = wave.weights(i, j);
                let p = w_probability(c);
                let wij = w[i] * w[j];
                s.num += wij * 3.0 * c.iter().copied().fold(f64::INFINITY, f64::min);
                s.norm += wij * (c[0] + c[1] + c[2]);
                if p > s.best {
                    s.best = p;
                    s.at = [i, j, 0];
                }
            }
            s
        })
        .collect();
    finish(slabs, grid, 2)
}

/// Pulse-averaged `P_W4` by the 3-D trapezoid rule.
///
/// Works on a materialized wave or directly on a [`ThreePhotonField`], in
/// which case nothing of size `n^3` is stored.
pub fn pw4_average<A: ThreePhotonAmplitudes + ?Sized>(wave: &A) -> Result<EntanglementReport> {
    let grid = *wave.grid();
    let w = grid.trapezoid_weights();
    let n = grid.len();
    let slabs: Vec<Slab> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut s = Slab { num: 0.0, norm: 0.0, best: 0.0, at: [i, 0, 0] };
            for j in 0..n {
                let wij = w[i] * w[j];
                let (mut num, mut norm) = (0.0, 0.0);
                for k in 0..n {
                    let c = wave.weights(i, j, k);
                    let p = w_probability(c);
                    num += w[k] * 4.0 * c.iter().copied().fold(f64::INFINITY, f64::min);
                    norm += w[k] * (c[0] + c[1] + c[2] + c[3]);
                    if p > s.best {
                        s.best = p;
                        s.at = [i, j, k];
                    }
                }
                s.num += wij * num;
                s.norm += wij * norm;
            }
            s
        })
        .collect();
    finish(slabs, &grid, 3)
}

/// Normalizes `shape` on its working grid and averages `P_W` for `photons`
/// (2 or 3) identical photons.
pub fn average_for_pulse(
    shape: &PulseShape,
    params: &PhysicalParams,
    photons: usize,
    resolution: Resolution,
) -> Result<EntanglementReport> {
    if !(photons == 2 || photons == 3) {
        return Err(Error::InvalidParams(format!("photon number must be 2 or 3, got {photons}")));
    }
    let grid = working_grid(shape, params, photons, resolution)?;
    average_on_grid(shape, params, photons, &grid)
}

/// Same as [`average_for_pulse`] on a caller-supplied grid.
pub fn average_on_grid(
    shape: &PulseShape,
    params: &PhysicalParams,
    photons: usize,
    grid: &TimeGrid,
) -> Result<EntanglementReport> {
    if !(photons == 2 || photons == 3) {
        return Err(Error::InvalidParams(format!("photon number must be 2 or 3, got {photons}")));
    }
    let shape = shape.normalize(grid)?;
    shape.check_window(grid)?;
    let series = PulseSeries::compute(&shape, grid, params)?;
    if photons == 2 {
        pw3_average(&scatter_two_series(&series, params))
    } else {
        pw4_average(&ThreePhotonField::new(&series, params))
    }
}

/// Monochromatic limit of the two-photon average, `3|t|^2 min(|t|^2, |s|^2)`.
pub fn pw3_mono(delta: f64, params: &PhysicalParams) -> f64 {
    let (s2, t2) = (s_coeff(delta, params).norm_sqr(), t_coeff(delta, params).norm_sqr());
    3.0 * t2 * t2.min(s2)
}

/// Monochromatic limit of the three-photon average, `4|t|^4 min(|t|^2, |s|^2)`.
pub fn pw4_mono(delta: f64, params: &PhysicalParams) -> f64 {
    let (s2, t2) = (s_coeff(delta, params).norm_sqr(), t_coeff(delta, params).norm_sqr());
    4.0 * t2 * t2 * t2.min(s2)
}
