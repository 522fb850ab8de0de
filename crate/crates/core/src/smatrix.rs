//! Scattering-matrix kernels and the oracles built from them.
//!
//! The kernels give outgoing amplitudes for incident plane waves of lab
//! frequencies `w1, w2[, w3]`. Convolving them with the pulse spectrum gives
//! the same wave functions as the time-domain construction up to one overall
//! constant, which is fixed once by calibration and then reused unchanged.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::coupling::{s_coeff, t_coeff, PhysicalParams};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::pulse::{working_grid, PulseShape, PulseSolution, Resolution};
use crate::scatter2::{scatter_two, theta, Channel2, TwoPhotonWave};
use crate::scatter3::{psi3, Channel3};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Leakage limit of the spectrum at the frequency-grid edges.
pub const SPECTRUM_EDGE_LIMIT: f64 = 1e-6;

/// Largest spectral width accepted by the monochromatic oracle.
pub const MONO_MAX_GAMMA: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    omega_min: f64,
    omega_max: f64,
    m: usize,
    spacing: f64,
}

impl FrequencyGrid {
    pub fn new(omega_min: f64, omega_max: f64, m: usize) -> Result<Self> {
        if !(omega_min.is_finite() && omega_max.is_finite()) || omega_max <= omega_min {
            return Err(Error::InvalidGrid(format!("empty frequency range [{omega_min}, {omega_max}]")));
        }
        if m < 16 {
            return Err(Error::InvalidGrid(format!("frequency grid needs at least 16 points, got {m}")));
        }
        Ok(FrequencyGrid {
            omega_min,
            omega_max,
            m,
            spacing: (omega_max - omega_min) / (m - 1) as f64,
        })
    }

    /// Grid of spacing about `dw` around the carrier of `shape`, wide enough
    /// for its spectrum to fall below [`SPECTRUM_EDGE_LIMIT`].
    pub fn covering(shape: &PulseShape, params: &PhysicalParams, dw: f64) -> Result<Self> {
        if !(dw > 0.0) {
            return Err(Error::InvalidGrid(format!("frequency spacing must be positive, got {dw}")));
        }
        let center = params.omega0() + shape.delta();
        let half = shape.gamma() * (5.5 + 1.5 * shape.n_max() as f64);
        let m = ((2.0 * half / dw).ceil() as usize + 1).max(16);
        FrequencyGrid::new(center - half, center + half, m)
    }

    pub fn omega_min(&self) -> f64 {
        self.omega_min
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn omega(&self, i: usize) -> f64 {
        if i + 1 == self.m {
            self.omega_max
        } else {
            self.omega_min + i as f64 * self.spacing
        }
    }
}

/// Channels of the plane-wave kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelChannel2 {
    XXx,
    XYy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelChannel3 {
    XXXx,
    XXYy,
}

/// Any two- or three-photon output channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Channel {
    Two(Channel2),
    Three(Channel3),
}

impl From<Channel2> for Channel {
    fn from(c: Channel2) -> Self {
        Channel::Two(c)
    }
}

impl From<Channel3> for Channel {
    fn from(c: Channel3) -> Self {
        Channel::Three(c)
    }
}

/// Coefficient of `2 pi delta(w1 + w2 - w1p - w2p)` in the connected part of
/// the `XXx <- XXx` element.
pub fn s2_connected_kernel(w1: f64, w2: f64, w1p: f64, w2p: f64, params: &PhysicalParams) -> C64 {
    let (w0, g) = (params.omega0(), params.gamma0());
    let chi = params.chirality();
    let d = |w: f64| C64::new(w - w0, g);
    chi * chi * 2.0 * I * g * g * C64::new(w1 + w2 - 2.0 * w0, 2.0 * g) / (d(w1) * d(w2) * d(w1p) * d(w2p))
}

/// Outgoing two-photon amplitude at `(t1, t2)` for plane waves `w1, w2`.
pub fn s2_time_kernel(t1: f64, t2: f64, w1: f64, w2: f64, params: &PhysicalParams, channel: KernelChannel2) -> C64 {
    let w0 = params.omega0();
    let lam = params.decay();
    let (s1, s2) = (s_coeff(w1 - w0, params), s_coeff(w2 - w0, params));
    let (dw, dt) = (w2 - w1, t2 - t1);
    let sum = w1 + w2;
    let common = (-I * sum * (t1 + t2) / 2.0).exp();
    let bound = (-(lam - I * sum / 2.0) * dt.abs()).exp();
    match channel {
        KernelChannel2::XXx => {
            let (tt1, tt2) = (1.0 + s1, 1.0 + s2);
            2.0 * (tt1 * tt2 * (dw * dt / 2.0).cos() - s1 * s2 * bound) * common
        }
        KernelChannel2::XYy => {
            let (tt1, tt2) = (1.0 + s1, 1.0 + s2);
            let minus = (-I * dw * dt / 2.0).exp();
            let plus = (I * dw * dt / 2.0).exp();
            let after = tt1 * s2 * minus + tt2 * s1 * plus - 2.0 * s1 * s2 * bound;
            let before = s2 * minus + s1 * plus;
            (theta(dt) * after + theta(-dt) * before) * common
        }
    }
}

fn sorted3(t: [f64; 3]) -> [f64; 3] {
    let mut t = t;
    t.sort_by(|a, b| a.total_cmp(b));
    t
}

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Outgoing three-photon amplitude for plane waves `w = [w1, w2, w3]`,
/// summed over the six frequency assignments. For `XXYy` the Y photon is
/// detected at `t[2]`.
pub fn s3_time_kernel(t: [f64; 3], w: [f64; 3], params: &PhysicalParams, channel: KernelChannel3) -> C64 {
    let w0 = params.omega0();
    let lam = params.decay();
    let s = w.map(|x| s_coeff(x - w0, params));
    let e = |x: C64| x.exp();
    let mut total = C64::new(0.0, 0.0);
    for p in PERMS {
        let (wa, wb, wc) = (w[p[0]], w[p[1]], w[p[2]]);
        let (sa, sb, sc) = (s[p[0]], s[p[1]], s[p[2]]);
        total += match channel {
            KernelChannel3::XXXx => {
                let [t1, t2, t3] = sorted3(t);
                let phase = e(-I * (wa * t1 + wb * t2 + wc * t3));
                let irreducible = sa * sb * sc
                    * (1.0 - e((I * wb - lam) * (t2 - t1)))
                    * (1.0 - e((I * wc - lam) * (t3 - t2)))
                    * phase;
                let ab = sa * sb * (e(-I * (wa * t1 + wb * t2)) - e(-I * (wa + wb) * t1 - lam * (t2 - t1))) * e(-I * wc * t3);
                let bc = sb * sc * (e(-I * (wb * t2 + wc * t3)) - e(-I * (wb + wc) * t2 - lam * (t3 - t2))) * e(-I * wa * t1);
                let ac = sa * sc * (e(-I * (wa * t1 + wc * t3)) - e(-I * (wa + wc) * t1 - lam * (t3 - t1))) * e(-I * wb * t2);
                irreducible + ab + bc + ac + (1.0 + sa + sb + sc) * phase
            }
            KernelChannel3::XXYy => {
                let (lo, hi) = if t[0] <= t[1] { (t[0], t[1]) } else { (t[1], t[0]) };
                let ty = t[2];
                let [u1, u2, u3] = sorted3([lo, hi, ty]);
                let (th_hi, th_lo) = (theta(ty - hi), theta(ty - lo));
                let mut v = sc * e(-I * (wa * lo + wb * hi + wc * ty));
                if th_hi > 0.0 {
                    v += th_hi
                        * sa * sb * sc
                        * (1.0 - e((I * wb - lam) * (u2 - u1)))
                        * (1.0 - e((I * wc - lam) * (u3 - u2)))
                        * e(-I * (wa * u1 + wb * u2 + wc * u3));
                    v += th_hi
                        * sb * sc
                        * (e(-I * (wb * hi + wc * ty)) - e(-I * (wb + wc) * hi - lam * (ty - hi)))
                        * e(-I * wa * lo);
                }
                if th_lo > 0.0 {
                    v += th_lo
                        * sa * sc
                        * (e(-I * (wa * lo + wc * ty)) - e(-I * (wa + wc) * lo - lam * (ty - lo)))
                        * e(-I * wb * hi);
                }
                v
            }
        };
    }
    total
}

/// Spectrum `int phi0(t) exp(i w t) dt` of the lab-frame incident envelope,
/// by trapezoid on a fine time lattice over the pulse window.
pub fn pulse_spectrum(shape: &PulseShape, params: &PhysicalParams, fgrid: &FrequencyGrid) -> Result<Vec<C64>> {
    let (a, b) = shape.default_window(params);
    let w_abs = fgrid.omega_min().abs().max(fgrid.omega_max().abs());
    let h_max = (0.05f64).min(PI / (8.0 * w_abs.max(1e-9)));
    let nt = ((b - a) / h_max).ceil() as usize + 1;
    let h = (b - a) / (nt - 1) as f64;
    let samples: Vec<(f64, C64)> = (0..nt)
        .map(|k| {
            let t = a + k as f64 * h;
            let wt = if k == 0 || k + 1 == nt { 0.5 * h } else { h };
            (t, wt * shape.envelope(t) * (-I * params.omega0() * t).exp())
        })
        .collect();
    let spec: Vec<C64> = (0..fgrid.len())
        .into_par_iter()
        .map(|i| {
            let w = fgrid.omega(i);
            samples.iter().map(|&(t, f)| f * (I * w * t).exp()).sum()
        })
        .collect();
    let peak = spec.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::DegeneratePulse);
    }
    let edge = spec[0].norm().max(spec[spec.len() - 1].norm());
    if edge > SPECTRUM_EDGE_LIMIT * peak {
        return Err(Error::SpectrumLeakage { ratio: edge / peak });
    }
    Ok(spec)
}

/// Spectrum samples with trapezoid weights and the `1/(2 pi)` measure.
fn spectral_weights(shape: &PulseShape, params: &PhysicalParams, fgrid: &FrequencyGrid) -> Result<Vec<(f64, C64)>> {
    let spec = pulse_spectrum(shape, params, fgrid)?;
    let m = fgrid.len();
    let dw = fgrid.spacing() / (2.0 * PI);
    Ok((0..m)
        .map(|i| {
            let edge = if i == 0 || i + 1 == m { 0.5 } else { 1.0 };
            (fgrid.omega(i), edge * dw * spec[i])
        })
        .collect())
}

/// Unscaled `(XXx, XYy)` convolution at one pair of times.
fn convolve_at(amp: &[(f64, C64)], t1: f64, t2: f64, params: &PhysicalParams) -> (C64, C64) {
    let (mut xxx, mut xyy) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    for &(w1, a1) in amp {
        let (mut rx, mut ry) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for &(w2, a2) in amp {
            rx += a2 * s2_time_kernel(t1, t2, w1, w2, params, KernelChannel2::XXx);
            ry += a2 * s2_time_kernel(t1, t2, w1, w2, params, KernelChannel2::XYy);
        }
        xxx += a1 * rx;
        xyy += a1 * ry;
    }
    (xxx, xyy)
}

/// Convolution of the two-photon kernels with the pulse spectrum, times
/// `constant`.
pub fn oracle_two_photon(
    shape: &PulseShape,
    grid: &TimeGrid,
    fgrid: &FrequencyGrid,
    params: &PhysicalParams,
    constant: C64,
) -> Result<TwoPhotonWave> {
    let amp = spectral_weights(shape, params, fgrid)?;
    let n = grid.len();
    let cells: Vec<(C64, C64)> = (0..n * n)
        .into_par_iter()
        .map(|idx| convolve_at(&amp, grid.time(idx / n), grid.time(idx % n), params))
        .collect();
    let xxx = Array2::from_shape_fn((n, n), |(i, j)| constant * cells[i * n + j].0);
    let xyy = Array2::from_shape_fn((n, n), |(i, j)| constant * cells[i * n + j].1);
    Ok(TwoPhotonWave { grid: *grid, xxx, xyy })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub constant: C64,
    /// Times `(t1, t2)` where the constant was matched.
    pub reference: (f64, f64),
}

/// Reference pulse used for calibration: resonant Gaussian of width 0.5.
pub fn reference_pulse() -> PulseShape {
    PulseShape::gaussian(0.0, 0.5).expect("valid reference pulse")
}

/// Fixes the oracle constant by matching `XXx` at the peak of the reference
/// pulse's two-photon wave on a grid of `n` points.
pub fn calibrate_two_photon(params: &PhysicalParams, n: usize, dw: f64) -> Result<Calibration> {
    let shape = reference_pulse();
    let grid = working_grid(&shape, params, 2, Resolution::Points(n))?;
    let shape = shape.normalize(&grid)?;
    let wave = scatter_two(&shape, &grid, params)?;
    let (mut best, mut at) = (0.0, (0, 0));
    for ((i, j), v) in wave.xxx.indexed_iter() {
        if v.norm() > best {
            best = v.norm();
            at = (i, j);
        }
    }
    let (t1, t2) = (grid.time(at.0), grid.time(at.1));
    let fgrid = FrequencyGrid::covering(&shape, params, dw)?;
    let amp = spectral_weights(&shape, params, &fgrid)?;
    let (raw, _) = convolve_at(&amp, t1, t2, params);
    Ok(Calibration {
        constant: wave.xxx[[at.0, at.1]] / raw,
        reference: (t1, t2),
    })
}

/// Result of comparing the monochromatic kernel against the time-domain
/// amplitudes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonoComparison {
    pub channel: Channel3,
    pub constant: C64,
    pub oracle: Vec<C64>,
    pub direct: Vec<C64>,
    /// Largest `|oracle - direct| / |direct|` over the probes after the first.
    pub max_rel_error: f64,
}

/// Three-photon kernel at the carrier frequency times the slowly varying
/// envelopes, calibrated on the first probe and compared with [`psi3`] on
/// the rest.
pub fn oracle_three_photon_mono(
    shape: &PulseShape,
    params: &PhysicalParams,
    probes: &[[f64; 3]],
    channel: Channel,
) -> Result<MonoComparison> {
    let channel = match channel {
        Channel::Three(c) => c,
        Channel::Two(c) => {
            return Err(Error::Oracle(format!("{c:?} is not a three-photon channel")));
        }
    };
    if shape.gamma() > MONO_MAX_GAMMA {
        return Err(Error::Oracle(format!(
            "pulse width {} exceeds the quasi-monochromatic limit {MONO_MAX_GAMMA}",
            shape.gamma()
        )));
    }
    if probes.is_empty() {
        return Err(Error::Oracle("no probe points".into()));
    }
    let bulk = 1.0 / shape.gamma();
    if let Some(p) = probes.iter().find(|p| p.iter().any(|t| t.abs() > bulk)) {
        return Err(Error::Oracle(format!("probe {p:?} lies outside the pulse bulk |t| <= {bulk}")));
    }
    let sol = PulseSolution::new(shape, params)?;
    let w = params.omega0() + shape.delta();
    let slow = |t: f64| sol.incident(t) * (I * w * t).exp();
    let raw: Vec<C64> = probes
        .iter()
        .map(|&[t1, t2, t3]| {
            let (times, kc) = match channel {
                Channel3::XXXx => ([t1, t2, t3], KernelChannel3::XXXx),
                Channel3::XXYy => ([t1, t2, t3], KernelChannel3::XXYy),
                Channel3::XYXy => ([t1, t3, t2], KernelChannel3::XXYy),
                Channel3::YXXy => ([t2, t3, t1], KernelChannel3::XXYy),
            };
            s3_time_kernel(times, [w; 3], params, kc) * slow(t1) * slow(t2) * slow(t3)
        })
        .collect();
    let direct: Vec<C64> = probes.iter().map(|&[a, b, c]| psi3(&sol, a, b, c, channel)).collect();
    if raw[0].norm() == 0.0 {
        return Err(Error::Oracle("kernel vanishes at the calibration probe".into()));
    }
    let constant = direct[0] / raw[0];
    let oracle: Vec<C64> = raw.iter().map(|r| constant * r).collect();
    let max_rel_error = oracle
        .iter()
        .zip(&direct)
        .skip(1)
        .map(|(o, d)| (o - d).norm() / d.norm())
        .fold(0.0, f64::max);
    Ok(MonoComparison {
        channel,
        constant,
        oracle,
        direct,
        max_rel_error,
    })
}

/// `t(w)` and `s(w)` at a lab frequency.
pub fn plane_wave_coefficients(w: f64, params: &PhysicalParams) -> (C64, C64) {
    let d = w - params.omega0();
    (t_coeff(d, params), s_coeff(d, params))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_grid_rules() {
        assert!(FrequencyGrid::new(-1.0, 1.0, 15).is_err());
        assert!(FrequencyGrid::new(1.0, 1.0, 32).is_err());
        let g = FrequencyGrid::new(-4.0, 4.0, 81).unwrap();
        assert!((g.spacing() - 0.1).abs() < 1e-15);
        assert_eq!(g.omega(80), 4.0);
    }

    #[test]
    fn connected_kernel_at_resonance() {
        let p = PhysicalParams::default();
        let k = s2_connected_kernel(0.0, 0.0, 0.0, 0.0, &p);
        assert!((k - C64::new(-4.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn connected_kernel_scaling() {
        let g = 2.7;
        let p1 = PhysicalParams::default();
        let pg = PhysicalParams::new(0.0, g, 1.0).unwrap();
        let (a, b, c) = (0.3, -1.1, 0.8);
        let d = a + b - c;
        let k1 = s2_connected_kernel(a, b, c, d, &p1);
        let kg = s2_connected_kernel(g * a, g * b, g * c, g * d, &pg);
        assert!((kg - k1 / g).norm() < 1e-14);
    }

    #[test]
    fn time_kernel_degenerate() {
        let p = PhysicalParams::default();
        let (w, t) = (0.7, 1.3);
        let (tc, sc) = plane_wave_coefficients(w, &p);
        let k = s2_time_kernel(t, t, w, w, &p, KernelChannel2::XXx);
        let expected = 2.0 * (tc * tc - sc * sc) * (-I * 2.0 * w * t).exp();
        assert!((k - expected).norm() < 1e-14);
    }

    #[test]
    fn time_kernel_symmetric() {
        let p = PhysicalParams::default();
        for (t1, t2, w1, w2) in [(0.2, 1.9, 0.5, -0.8), (-3.0, 2.2, 1.4, 1.1)] {
            let k = s2_time_kernel(t1, t2, w1, w2, &p, KernelChannel2::XXx);
            assert!((k - s2_time_kernel(t2, t1, w1, w2, &p, KernelChannel2::XXx)).norm() < 1e-12);
            assert!((k - s2_time_kernel(t1, t2, w2, w1, &p, KernelChannel2::XXx)).norm() < 1e-12);
        }
    }

    #[test]
    fn uncoupled_limit() {
        let p = PhysicalParams::new(0.0, 1e-12, 1.0).unwrap();
        let (t1, t2, w1, w2) = (0.4, 2.5, 0.3, 1.7);
        assert!(s2_time_kernel(t1, t2, w1, w2, &p, KernelChannel2::XYy).norm() < 1e-10);
        let free = (-I * (w1 * t1 + w2 * t2)).exp() + (-I * (w2 * t1 + w1 * t2)).exp();
        assert!((s2_time_kernel(t1, t2, w1, w2, &p, KernelChannel2::XXx) - free).norm() < 1e-10);
        let t = [0.1, -0.7, 1.2];
        let w = [0.3, 0.9, -0.4];
        assert!(s3_time_kernel(t, w, &p, KernelChannel3::XXYy).norm() < 1e-10);
        let sym: C64 = PERMS
            .iter()
            .map(|q| (-I * (w[q[0]] * t[0] + w[q[1]] * t[1] + w[q[2]] * t[2])).exp())
            .sum();
        assert!((s3_time_kernel(t, w, &p, KernelChannel3::XXXx) - sym).norm() < 1e-10);
    }

    #[test]
    fn far_separated_pair_factorizes() {
        let p = PhysicalParams::default();
        let (t1, t2, w1, w2) = (-15.0, 25.0, 0.6, -0.2);
        let (ta, _) = plane_wave_coefficients(w1, &p);
        let (tb, _) = plane_wave_coefficients(w2, &p);
        let expected = 2.0 * ta * tb * ((w2 - w1) * (t2 - t1) / 2.0).cos() * (-I * (w1 + w2) * (t1 + t2) / 2.0).exp();
        assert!((s2_time_kernel(t1, t2, w1, w2, &p, KernelChannel2::XXx) - expected).norm() < 1e-12);
    }

    #[test]
    fn three_photon_kernel_matches_mono_formula() {
        // degenerate frequencies: six identical assignments of the closed forms
        let p = PhysicalParams::new(0.4, 1.0, 1.0).unwrap();
        let w = 1.3;
        let (tc, sc) = plane_wave_coefficients(w, &p);
        let lam = p.decay();
        let t = [0.9, -0.6, 2.1];
        let e = |a: f64, b: f64| (I * w * (b - a)).exp() * (-lam * (b - a)).exp();
        let phase = (-I * w * (t[0] + t[1] + t[2])).exp();
        let [a, b, c] = sorted3(t);
        let xxxx = tc * tc * tc - sc * sc * tc * e(a, b) - sc * sc * tc * e(b, c) + sc * sc * (sc - 1.0) * e(a, c);
        let k = s3_time_kernel(t, [w; 3], &p, KernelChannel3::XXXx);
        assert!((k - 6.0 * xxxx * phase).norm() < 1e-12);
        // Y photon last
        let (lo, hi, ty) = (-0.6, 0.9, 2.1);
        let xxyy = sc * tc * tc - sc * sc * sc * e(lo, hi) - sc * sc * tc * e(hi, ty) + sc * sc * (sc - 1.0) * e(lo, ty);
        let k = s3_time_kernel([hi, lo, ty], [w; 3], &p, KernelChannel3::XXYy);
        assert!((k - 6.0 * xxyy * phase).norm() < 1e-12);
        // Y photon between and first
        let k = s3_time_kernel([-0.6, 2.1, 0.9], [w; 3], &p, KernelChannel3::XXYy);
        assert!((k - 6.0 * (sc * tc - sc * sc * e(-0.6, 0.9)) * phase).norm() < 1e-12);
        let k = s3_time_kernel([0.9, 2.1, -0.6], [w; 3], &p, KernelChannel3::XXYy);
        assert!((k - 6.0 * sc * phase).norm() < 1e-12);
    }

    #[test]
    fn mono_oracle_preconditions() {
        let p = PhysicalParams::default();
        let wide = PulseShape::gaussian(1.0, 0.5).unwrap();
        let narrow = PulseShape::gaussian(1.0, 0.01).unwrap();
        let probes = [[0.0, 8.0, -8.0]];
        assert!(matches!(
            oracle_three_photon_mono(&wide, &p, &probes, Channel3::XXXx.into()),
            Err(Error::Oracle(_))
        ));
        assert!(matches!(
            oracle_three_photon_mono(&narrow, &p, &probes, Channel2::XXx.into()),
            Err(Error::Oracle(_))
        ));
        assert!(matches!(
            oracle_three_photon_mono(&narrow, &p, &[[0.0, 0.0, 150.0]], Channel3::XXXx.into()),
            Err(Error::Oracle(_))
        ));
    }

    #[test]
    fn spectrum_leakage_detected() {
        let p = PhysicalParams::default();
        let shape = PulseShape::gaussian(0.0, 0.5).unwrap();
        let narrow = FrequencyGrid::new(-1.0, 1.0, 41).unwrap();
        assert!(matches!(pulse_spectrum(&shape, &p, &narrow), Err(Error::SpectrumLeakage { .. })));
        let wide = FrequencyGrid::covering(&shape, &p, 0.1).unwrap();
        let spec = pulse_spectrum(&shape, &p, &wide).unwrap();
        // Gaussian spectrum peak: sqrt(2 pi) / gamma times the amplitude factor
        let peak = spec.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let expected = shape.norm_factor() * (2.0 * PI).sqrt() / 0.5;
        assert!((peak - expected).abs() < 1e-6 * expected, "{peak} {expected}");
    }
}
