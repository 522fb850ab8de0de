//! Three-photon output state.
//!
//! The outgoing state is
//!
//! ```text
//! psi_XXXx(t1,t2,t3)|XXXx> + psi_XXYy(t1,t2,t3)|XXYy> + psi_XXYy(t1,t3,t2)|XYXy> + psi_XXYy(t2,t3,t1)|YXXy>
//! ```
//!
//! where the last argument of `psi_XXYy` is the detection time of the Y
//! photon. With `t(1) <= t(2) <= t(3)` the sorted times and `E(a,b) = exp(-L (b - a))`,
//!
//! ```text
//! psi_XXXx = tau1 tau2 tau3 - s(1)^2 tau(3) E(1,2) - s(2)^2 tau(1) E(2,3) + s(1)^2 [s(2) - phi0(2)] E(1,3)
//! ```
//!
//! and `psi_XXYy` has three branches depending on whether the Y photon comes
//! first, last, or between the two X photons.

use ndarray::{Array3, Axis};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::PhysicalParams;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::pulse::{PulseSeries, PulseShape, PulseSolution};
use crate::scatter2::{decay_table, theta};

/// Default cap on the memory of a materialized [`ThreePhotonWave`].
pub const DEFAULT_MEMORY_BUDGET: usize = 1 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel3 {
    XXXx,
    XXYy,
    XYXy,
    YXXy,
}

impl Channel3 {
    pub const ALL: [Channel3; 4] = [Channel3::XXXx, Channel3::XXYy, Channel3::XYXy, Channel3::YXXy];
}

/// Weights of the three `psi_XXYy` branches (Y first, Y last, Y between).
///
/// Step functions take the value 1/2 at ties; the between-branch weight is
/// the complement so the three always sum to one, including at a triple tie
/// where all branches coincide.
#[inline]
fn branch_weights(lo_minus_y: f64, y_minus_hi: f64) -> (f64, f64, f64) {
    let w_first = theta(lo_minus_y);
    let w_last = theta(y_minus_hi);
    (w_first, w_last, 1.0 - w_first - w_last)
}

/// On-demand amplitudes on a grid from precomputed envelopes.
#[derive(Clone, Debug)]
pub struct ThreePhotonField<'a> {
    grid: TimeGrid,
    p0: &'a [C64],
    ps: &'a [C64],
    pt: &'a [C64],
    decay: Vec<C64>,
}

impl<'a> ThreePhotonField<'a> {
    pub fn new(series: &'a PulseSeries, params: &PhysicalParams) -> Self {
        ThreePhotonField {
            grid: *series.grid(),
            p0: &series.incident.values,
            ps: &series.filtered.values,
            pt: &series.transmitted.values,
            decay: decay_table(series.grid(), params),
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    #[inline]
    pub fn xxxx(&self, i: usize, j: usize, k: usize) -> C64 {
        let (p0, ps, pt, e) = (self.p0, self.ps, self.pt, &self.decay);
        let (a, b, c) = sort3(i, j, k);
        let sa2 = ps[a] * ps[a];
        pt[a] * pt[b] * pt[c] - sa2 * pt[c] * e[b - a] - ps[b] * ps[b] * pt[a] * e[c - b]
            + sa2 * (ps[b] - p0[b]) * e[c - a]
    }

    /// `psi_XXYy` with the Y photon at node `k`.
    #[inline]
    pub fn xxyy(&self, i: usize, j: usize, k: usize) -> C64 {
        let (p0, ps, pt, e) = (self.p0, self.ps, self.pt, &self.decay);
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let (w_first, w_last, w_mid) = branch_weights(lo as f64 - k as f64, k as f64 - hi as f64);
        let mut y = C64::new(0.0, 0.0);
        if w_first > 0.0 {
            y += w_first * p0[lo] * p0[hi] * ps[k];
        }
        if w_last > 0.0 {
            let sl2 = ps[lo] * ps[lo];
            y += w_last
                * (pt[lo] * pt[hi] * ps[k] - sl2 * ps[k] * e[hi - lo] - ps[hi] * ps[hi] * pt[lo] * e[k - hi]
                    + sl2 * (ps[hi] - p0[hi]) * e[k - lo]);
        }
        if w_mid > 0.0 {
            y += w_mid * p0[hi] * (pt[lo] * ps[k] - ps[lo] * ps[lo] * e[k - lo]);
        }
        y
    }

    #[inline]
    pub fn amplitude(&self, channel: Channel3, i: usize, j: usize, k: usize) -> C64 {
        match channel {
            Channel3::XXXx => self.xxxx(i, j, k),
            Channel3::XXYy => self.xxyy(i, j, k),
            Channel3::XYXy => self.xxyy(i, k, j),
            Channel3::YXXy => self.xxyy(j, k, i),
        }
    }
}

#[inline]
fn sort3(i: usize, j: usize, k: usize) -> (usize, usize, usize) {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    if k <= a {
        (k, a, b)
    } else if k <= b {
        (a, k, b)
    } else {
        (a, b, k)
    }
}

#[inline]
fn sort3f(x: f64, y: f64, z: f64) -> (f64, f64, f64) {
    let (a, b) = if x <= y { (x, y) } else { (y, x) };
    if z <= a {
        (z, a, b)
    } else if z <= b {
        (a, z, b)
    } else {
        (a, b, z)
    }
}

/// Source of the four channel weights at grid node `(i, j, k)`.
pub trait ThreePhotonAmplitudes: Sync {
    fn grid(&self) -> &TimeGrid;
    fn xxxx_at(&self, i: usize, j: usize, k: usize) -> C64;
    fn xxyy_at(&self, i: usize, j: usize, k: usize) -> C64;

    /// `[|XXXx|^2, |XXYy|^2, |XYXy|^2, |YXXy|^2]` at `(t_i, t_j, t_k)`.
    #[inline]
    fn weights(&self, i: usize, j: usize, k: usize) -> [f64; 4] {
        [
            self.xxxx_at(i, j, k).norm_sqr(),
            self.xxyy_at(i, j, k).norm_sqr(),
            self.xxyy_at(i, k, j).norm_sqr(),
            self.xxyy_at(j, k, i).norm_sqr(),
        ]
    }
}

impl ThreePhotonAmplitudes for ThreePhotonField<'_> {
    fn grid(&self) -> &TimeGrid {
        &self.grid
    }
    fn xxxx_at(&self, i: usize, j: usize, k: usize) -> C64 {
        self.xxxx(i, j, k)
    }
    fn xxyy_at(&self, i: usize, j: usize, k: usize) -> C64 {
        self.xxyy(i, j, k)
    }
}

/// Materialized channel tensors; `xxyy[[i, j, k]]` has the Y photon at `t_k`.
#[derive(Clone, Debug)]
pub struct ThreePhotonWave {
    pub grid: TimeGrid,
    pub xxxx: Array3<C64>,
    pub xxyy: Array3<C64>,
}

impl ThreePhotonWave {
    pub fn amplitude(&self, channel: Channel3, i: usize, j: usize, k: usize) -> C64 {
        match channel {
            Channel3::XXXx => self.xxxx[[i, j, k]],
            Channel3::XXYy => self.xxyy[[i, j, k]],
            Channel3::XYXy => self.xxyy[[i, k, j]],
            Channel3::YXXy => self.xxyy[[j, k, i]],
        }
    }
}

impl ThreePhotonAmplitudes for ThreePhotonWave {
    fn grid(&self) -> &TimeGrid {
        &self.grid
    }
    fn xxxx_at(&self, i: usize, j: usize, k: usize) -> C64 {
        self.xxxx[[i, j, k]]
    }
    fn xxyy_at(&self, i: usize, j: usize, k: usize) -> C64 {
        self.xxyy[[i, j, k]]
    }
}

pub fn tensor_bytes(n: usize) -> usize {
    2 * n * n * n * std::mem::size_of::<C64>()
}

pub fn scatter_three(shape: &PulseShape, grid: &TimeGrid, params: &PhysicalParams) -> Result<ThreePhotonWave> {
    scatter_three_with_budget(shape, grid, params, DEFAULT_MEMORY_BUDGET)
}

pub fn scatter_three_with_budget(
    shape: &PulseShape,
    grid: &TimeGrid,
    params: &PhysicalParams,
    budget: usize,
) -> Result<ThreePhotonWave> {
    let n = grid.len();
    let bytes = tensor_bytes(n);
    if bytes > budget {
        return Err(Error::MemoryBudget {
            n,
            channels: 2,
            bytes,
            budget,
        });
    }
    let series = PulseSeries::compute(shape, grid, params)?;
    Ok(materialize(&ThreePhotonField::new(&series, params)))
}

/// Fills both tensors, one outer slab per task.
pub fn materialize(field: &ThreePhotonField<'_>) -> ThreePhotonWave {
    let n = field.grid.len();
    let mut xxxx = Array3::<C64>::zeros((n, n, n));
    let mut xxyy = Array3::<C64>::zeros((n, n, n));
    xxxx.axis_iter_mut(Axis(0))
        .into_par_iter()
        .zip(xxyy.axis_iter_mut(Axis(0)).into_par_iter())
        .enumerate()
        .for_each(|(i, (mut slab_x, mut slab_y))| {
            for j in 0..n {
                for k in 0..n {
                    slab_x[[j, k]] = field.xxxx(i, j, k);
                    slab_y[[j, k]] = field.xxyy(i, j, k);
                }
            }
        });
    ThreePhotonWave {
        grid: field.grid,
        xxxx,
        xxyy,
    }
}

/// Grid-free `psi_XXXx(t1, t2, t3)`.
pub fn psi3_xxxx(sol: &PulseSolution, t1: f64, t2: f64, t3: f64) -> C64 {
    let lam = sol.params().decay();
    let (a, b, c) = sort3f(t1, t2, t3);
    let e = |x: f64, y: f64| (-lam * (y - x)).exp();
    let (sa, sb) = (sol.filtered(a), sol.filtered(b));
    let sa2 = sa * sa;
    sol.transmitted(a) * sol.transmitted(b) * sol.transmitted(c) - sa2 * sol.transmitted(c) * e(a, b)
        - sb * sb * sol.transmitted(a) * e(b, c)
        + sa2 * (sb - sol.incident(b)) * e(a, c)
}

/// Grid-free `psi_XXYy(t1, t2, t3)`, Y photon at `t3`.
pub fn psi3_xxyy(sol: &PulseSolution, t1: f64, t2: f64, t3: f64) -> C64 {
    let lam = sol.params().decay();
    let e = |x: f64, y: f64| (-lam * (y - x)).exp();
    let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
    let (w_first, w_last, w_mid) = branch_weights(lo - t3, t3 - hi);
    let s3 = sol.filtered(t3);
    let mut y = C64::new(0.0, 0.0);
    if w_first > 0.0 {
        y += w_first * sol.incident(lo) * sol.incident(hi) * s3;
    }
    if w_last > 0.0 {
        let (sl, sh) = (sol.filtered(lo), sol.filtered(hi));
        let tl = sol.transmitted(lo);
        y += w_last
            * (tl * sol.transmitted(hi) * s3 - sl * sl * s3 * e(lo, hi) - sh * sh * tl * e(hi, t3)
                + sl * sl * (sh - sol.incident(hi)) * e(lo, t3));
    }
    if w_mid > 0.0 {
        let sl = sol.filtered(lo);
        y += w_mid * sol.incident(hi) * (sol.transmitted(lo) * s3 - sl * sl * e(lo, t3));
    }
    y
}

pub fn psi3(sol: &PulseSolution, t1: f64, t2: f64, t3: f64, channel: Channel3) -> C64 {
    match channel {
        Channel3::XXXx => psi3_xxxx(sol, t1, t2, t3),
        Channel3::XXYy => psi3_xxyy(sol, t1, t2, t3),
        Channel3::XYXy => psi3_xxyy(sol, t1, t3, t2),
        Channel3::YXXy => psi3_xxyy(sol, t2, t3, t1),
    }
}

/// [`psi3`] for a one-off evaluation.
pub fn psi3_pointwise(
    shape: &PulseShape,
    params: &PhysicalParams,
    t1: f64,
    t2: f64,
    t3: f64,
    channel: Channel3,
) -> Result<C64> {
    Ok(psi3(&PulseSolution::new(shape, params)?, t1, t2, t3, channel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{working_grid, Resolution};

    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

    fn setup(delta: f64, gamma: f64, n: usize) -> (PulseShape, TimeGrid, PhysicalParams) {
        let params = PhysicalParams::default();
        let shape = PulseShape::gaussian(delta, gamma).unwrap();
        let grid = working_grid(&shape, &params, 3, Resolution::Points(n)).unwrap();
        (shape.normalize(&grid).unwrap(), grid, params)
    }

    #[test]
    fn branch_weights_partition_unity() {
        for (a, b) in [(1.0, -3.0), (0.0, -2.0), (-1.0, 0.0), (0.0, 0.0), (-1.0, -1.0), (-1.0, 2.0)] {
            let (x, y, z) = branch_weights(a, b);
            assert_eq!(x + y + z, 1.0);
            assert!(z >= 0.0);
        }
        assert_eq!(branch_weights(0.0, -1.0), (0.5, 0.0, 0.5));
        assert_eq!(branch_weights(0.0, 0.0), (0.5, 0.5, 0.0));
    }

    #[test]
    fn branches_agree_at_ties() {
        let (shape, _, params) = setup(0.6, 0.5, 65);
        let sol = PulseSolution::new(&shape, &params).unwrap();
        // Y photon coincident with one or both X photons: continuous across branches
        for (t1, t2) in [(-1.0, 2.0), (0.5, 0.5), (3.0, -0.2)] {
            for t3 in [t1, t2] {
                let on = psi3_xxyy(&sol, t1, t2, t3);
                let up = psi3_xxyy(&sol, t1, t2, t3 + 1e-9);
                let down = psi3_xxyy(&sol, t1, t2, t3 - 1e-9);
                assert!((on - up).norm() < 1e-7 && (on - down).norm() < 1e-7);
            }
        }
    }

    #[test]
    fn full_exchange_symmetry() {
        let (shape, grid, params) = setup(0.8, 1.1, 41);
        let w = scatter_three(&shape, &grid, &params).unwrap();
        let n = grid.len();
        for i in (0..n).step_by(3) {
            for j in (0..n).step_by(2) {
                for k in 0..n {
                    let idx = [i, j, k];
                    let v = w.xxxx[[i, j, k]];
                    for p in PERMS {
                        assert_eq!(w.xxxx[[idx[p[0]], idx[p[1]], idx[p[2]]]], v);
                    }
                    assert_eq!(w.xxyy[[i, j, k]], w.xxyy[[j, i, k]]);
                }
            }
        }
    }

    #[test]
    fn permuted_channels() {
        let (shape, _, params) = setup(0.2, 0.7, 65);
        let sol = PulseSolution::new(&shape, &params).unwrap();
        let (a, b, c) = (-0.4, 1.3, 0.2);
        assert_eq!(psi3(&sol, a, b, c, Channel3::XYXy), psi3_xxyy(&sol, a, c, b));
        assert_eq!(psi3(&sol, a, b, c, Channel3::YXXy), psi3_xxyy(&sol, b, c, a));
        assert_eq!(psi3_xxyy(&sol, a, b, c), psi3_xxyy(&sol, b, a, c));
    }

    #[test]
    fn memory_guard() {
        let (shape, grid, params) = setup(0.2, 0.7, 65);
        let err = scatter_three_with_budget(&shape, &grid, &params, 1000).unwrap_err();
        assert!(matches!(err, Error::MemoryBudget { n: 65, .. }));
    }

    #[test]
    fn zero_pulse_zero_wave() {
        let (shape, grid, params) = setup(0.0, 0.5, 33);
        let w = scatter_three(&shape.scaled(0.0), &grid, &params).unwrap();
        assert!(w.xxxx.iter().chain(w.xxyy.iter()).all(|v| v.norm() == 0.0));
    }

    #[test]
    fn pointwise_matches_grid() {
        let (shape, grid, params) = setup(0.87, 1.33, 33);
        let w = scatter_three(&shape, &grid, &params).unwrap();
        let sol = PulseSolution::on_grid(&shape, &params, &grid).unwrap();
        for (i, j, k) in [(3, 5, 7), (10, 10, 10), (12, 12, 3), (20, 4, 15), (16, 17, 16)] {
            let (t1, t2, t3) = (grid.time(i), grid.time(j), grid.time(k));
            for ch in Channel3::ALL {
                let d = (psi3(&sol, t1, t2, t3, ch) - w.amplitude(ch, i, j, k)).norm();
                assert!(d < 1e-9, "{ch:?} {i} {j} {k}: {d}");
            }
        }
    }
}
