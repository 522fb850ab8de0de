//! Two-photon output state.
//!
//! After two X photons scatter off the atom in state `x`, the outgoing state is
//!
//! ```text
//! psi_XXx(t1,t2) |XXx> + psi_XYy(t1,t2) |XYy> + psi_XYy(t2,t1) |YXy>
//! psi_XXx(t1,t2) = tau(t1) tau(t2) - phis(t<)^2 exp(-L |t2 - t1|)
//! psi_XYy(t1,t2) = phi0(t1) phis(t2) + theta(t2 - t1) phis(t1) [phis(t2) - phis(t1) exp(-L (t2 - t1))]
//! ```
//!
//! with `L = i omega0 + gamma0`, `tau = phi0 + phis`, `t< = min(t1, t2)` and
//! `theta(0) = 1/2`.

use ndarray::{Array2, Axis};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::PhysicalParams;
use crate::error::Result;
use crate::grid::TimeGrid;
use crate::pulse::{PulseSeries, PulseShape, PulseSolution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel2 {
    XXx,
    XYy,
    YXy,
}

impl Channel2 {
    pub const ALL: [Channel2; 3] = [Channel2::XXx, Channel2::XYy, Channel2::YXy];
}

/// Channel amplitudes on the detection-time grid.
///
/// `xyy[[i, j]]` has the Y photon at `t_j`; the `|YXy>` amplitude is its
/// transpose and is not stored.
#[derive(Clone, Debug)]
pub struct TwoPhotonWave {
    pub grid: TimeGrid,
    pub xxx: Array2<C64>,
    pub xyy: Array2<C64>,
}

impl TwoPhotonWave {
    #[inline]
    pub fn amplitude(&self, channel: Channel2, i: usize, j: usize) -> C64 {
        match channel {
            Channel2::XXx => self.xxx[[i, j]],
            Channel2::XYy => self.xyy[[i, j]],
            Channel2::YXy => self.xyy[[j, i]],
        }
    }

    /// Squared moduli of the three channels at node `(i, j)`.
    #[inline]
    pub fn weights(&self, i: usize, j: usize) -> [f64; 3] {
        [
            self.xxx[[i, j]].norm_sqr(),
            self.xyy[[i, j]].norm_sqr(),
            self.xyy[[j, i]].norm_sqr(),
        ]
    }
}

#[inline]
fn theta_idx(d: isize) -> f64 {
    match d.cmp(&0) {
        std::cmp::Ordering::Greater => 1.0,
        std::cmp::Ordering::Equal => 0.5,
        std::cmp::Ordering::Less => 0.0,
    }
}

#[inline]
pub(crate) fn theta(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x == 0.0 {
        0.5
    } else {
        0.0
    }
}

/// `exp(-L k h)` for `k = 0..n`.
pub(crate) fn decay_table(grid: &TimeGrid, params: &PhysicalParams) -> Vec<C64> {
    let lam = params.decay();
    (0..grid.len())
        .map(|k| (-lam * (k as f64 * grid.spacing())).exp())
        .collect()
}

pub fn scatter_two(shape: &PulseShape, grid: &TimeGrid, params: &PhysicalParams) -> Result<TwoPhotonWave> {
    let series = PulseSeries::compute(shape, grid, params)?;
    Ok(scatter_two_series(&series, params))
}

/// Fills both channel arrays from precomputed envelopes, one row per task.
pub fn scatter_two_series(series: &PulseSeries, params: &PhysicalParams) -> TwoPhotonWave {
    let grid = *series.grid();
    let n = grid.len();
    let p0 = &series.incident.values;
    let ps = &series.filtered.values;
    let pt = &series.transmitted.values;
    let decay = decay_table(&grid, params);

    let mut xxx = Array2::<C64>::zeros((n, n));
    let mut xyy = Array2::<C64>::zeros((n, n));
    xxx.axis_iter_mut(Axis(0))
        .into_par_iter()
        .zip(xyy.axis_iter_mut(Axis(0)).into_par_iter())
        .enumerate()
        .for_each(|(i, (mut row_x, mut row_y))| {
            for j in 0..n {
                let (lo, d) = if i <= j { (i, j - i) } else { (j, i - j) };
                row_x[j] = pt[i] * pt[j] - ps[lo] * ps[lo] * decay[d];
                let th = theta_idx(j as isize - i as isize);
                let mut y = p0[i] * ps[j];
                if th > 0.0 {
                    y += th * ps[i] * (ps[j] - ps[i] * decay[d]);
                }
                row_y[j] = y;
            }
        });
    // exact exchange symmetry
    for i in 0..n {
        for j in 0..i {
            xxx[[j, i]] = xxx[[i, j]];
        }
    }
    TwoPhotonWave { grid, xxx, xyy }
}

/// Grid-free amplitude of `channel` at `(t1, t2)`.
pub fn psi2(sol: &PulseSolution, t1: f64, t2: f64, channel: Channel2) -> C64 {
    let lam = sol.params().decay();
    match channel {
        Channel2::XXx => {
            let lo = t1.min(t2);
            let s = sol.filtered(lo);
            sol.transmitted(t1) * sol.transmitted(t2) - s * s * (-lam * (t2 - t1).abs()).exp()
        }
        Channel2::XYy => {
            let s2 = sol.filtered(t2);
            let mut y = sol.incident(t1) * s2;
            let th = theta(t2 - t1);
            if th > 0.0 {
                let s1 = sol.filtered(t1);
                y += th * s1 * (s2 - s1 * (-lam * (t2 - t1)).exp());
            }
            y
        }
        Channel2::YXy => psi2(sol, t2, t1, Channel2::XYy),
    }
}

/// [`psi2`] for a one-off evaluation.
pub fn psi2_pointwise(shape: &PulseShape, params: &PhysicalParams, t1: f64, t2: f64, channel: Channel2) -> Result<C64> {
    Ok(psi2(&PulseSolution::new(shape, params)?, t1, t2, channel))
}
