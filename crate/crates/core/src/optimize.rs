//! Landscape sweeps over Gaussian pulses, local refinement of their maxima and
//! Hermite pulse-shape optimization.
//!
//! All searches maximize the pulse-averaged W-conversion probability; internally
//! they minimize its negative.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use argmin::core::{
    CostFunction, Executor, Gradient, IterState, Problem, Solver, State, TerminationReason, TerminationStatus, KV,
};
use argmin::solver::conjugategradient::beta::PolakRibiere;
use argmin::solver::conjugategradient::NonlinearConjugateGradient;
use argmin::solver::linesearch::MoreThuenteLineSearch;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::PhysicalParams;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::pulse::{working_grid, PulseShape, Resolution};
use crate::wstate::{average_for_pulse, average_on_grid, EntanglementReport};

/// Floor on the point count of sweep cells, by photon number.
pub fn sweep_resolution(photons: usize) -> Resolution {
    if photons >= 3 {
        Resolution::AtLeast(97)
    } else {
        Resolution::AtLeast(129)
    }
}

/// Evenly spaced closed interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub const DEFAULT_DELTA: Axis = Axis {
        min: 0.0,
        max: 2.0,
        steps: 41,
    };

    pub const DEFAULT_GAMMA: Axis = Axis {
        min: 0.05,
        max: 2.0,
        steps: 41,
    };

    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self> {
        let axis = Axis { min, max, steps };
        axis.validate()?;
        Ok(axis)
    }

    fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.max < self.min {
            return Err(Error::InvalidParams(format!("invalid range [{}, {}]", self.min, self.max)));
        }
        if self.steps == 0 || (self.steps == 1 && self.max != self.min) {
            return Err(Error::InvalidParams(format!(
                "range [{}, {}] needs at least two steps, got {}",
                self.min, self.max, self.steps
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let h = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { self.max } else { self.min + h * i as f64 })
            .collect()
    }
}

/// Averaged conversion probability of Gaussian pulses on a (detuning, width) lattice.
///
/// Matrices are indexed `[delta][gamma]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub photons: usize,
    pub delta_axis: Vec<f64>,
    pub gamma_axis: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub norms: Vec<Vec<f64>>,
    /// False where the norm left the accepted band or the cell failed.
    pub valid: Vec<Vec<bool>>,
    pub grid_meta: GridMeta,
}

/// Resolution used by each sweep cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub resolution: Resolution,
    pub points: Vec<Vec<usize>>,
}

/// One sweep cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub delta: f64,
    pub gamma: f64,
    pub value: f64,
    pub norm: f64,
    pub valid: bool,
    pub points: usize,
}

impl SweepResult {
    /// Cells in row-major `[delta][gamma]` order.
    pub fn cells(&self) -> impl Iterator<Item = SweepCell> + '_ {
        self.delta_axis.iter().enumerate().flat_map(move |(i, &delta)| {
            self.gamma_axis.iter().enumerate().map(move |(j, &gamma)| SweepCell {
                delta,
                gamma,
                value: self.values[i][j],
                norm: self.norms[i][j],
                valid: self.valid[i][j],
                points: self.grid_meta.points[i][j],
            })
        })
    }

    /// Largest valid cell; the first one in cell order wins ties.
    pub fn argmax(&self) -> Option<SweepCell> {
        self.cells()
            .filter(|c| c.valid)
            .fold(None, |best: Option<SweepCell>, c| match best {
                Some(b) if b.value >= c.value => Some(b),
                _ => Some(c),
            })
    }

    /// Valid cells off the lattice edge that are at least as large as all
    /// eight neighbours, best first. Edge cells are excluded because a maximum
    /// there is usually the truncation of a ridge running out of the domain.
    pub fn interior_maxima(&self) -> Vec<SweepCell> {
        let (nd, ng) = (self.delta_axis.len(), self.gamma_axis.len());
        let cells: Vec<SweepCell> = self.cells().collect();
        let at = |i: usize, j: usize| &cells[i * ng + j];
        let mut found: Vec<SweepCell> = (1..nd.saturating_sub(1))
            .flat_map(|i| (1..ng.saturating_sub(1)).map(move |j| (i, j)))
            .filter(|&(i, j)| {
                let c = at(i, j);
                c.valid
                    && (i - 1..=i + 1)
                        .flat_map(|a| (j - 1..=j + 1).map(move |b| (a, b)))
                        .all(|(a, b)| !at(a, b).valid || at(a, b).value <= c.value)
            })
            .map(|(i, j)| *at(i, j))
            .collect();
        found.sort_by(|a, b| b.value.total_cmp(&a.value));
        found
    }
}

fn check_photons(photons: usize) -> Result<()> {
    if photons == 2 || photons == 3 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("photon number must be 2 or 3, got {photons}")))
    }
}

/// Evaluates every cell of the lattice in parallel.
pub fn sweep(
    photons: usize,
    delta: Axis,
    gamma: Axis,
    resolution: Resolution,
    params: &PhysicalParams,
) -> Result<SweepResult> {
    check_photons(photons)?;
    delta.validate()?;
    gamma.validate()?;
    if gamma.min <= 0.0 {
        return Err(Error::InvalidParams(format!("pulse widths must be positive, got {}", gamma.min)));
    }
    let (ds, gs) = (delta.values(), gamma.values());
    let tasks: Vec<(usize, usize)> = (0..ds.len()).flat_map(|i| (0..gs.len()).map(move |j| (i, j))).collect();
    let cells: Vec<(f64, f64, bool, usize)> = tasks
        .par_iter()
        .map(|&(i, j)| {
            let shape = PulseShape::gaussian(ds[i], gs[j])?;
            let grid = working_grid(&shape, params, photons, resolution)?;
            Ok(match average_on_grid(&shape, params, photons, &grid) {
                Ok(r) => (r.average, r.norm, true, grid.len()),
                Err(Error::NormOutOfBand { norm }) => (0.0, norm, false, grid.len()),
                Err(e) if e.is_numerical() => (0.0, f64::NAN, false, grid.len()),
                Err(e) => return Err(e),
            })
        })
        .collect::<Result<_>>()?;

    let mut values = vec![vec![0.0; gs.len()]; ds.len()];
    let mut norms = values.clone();
    let mut valid = vec![vec![false; gs.len()]; ds.len()];
    let mut points = vec![vec![0; gs.len()]; ds.len()];
    for (&(i, j), &(v, n, ok, p)) in tasks.iter().zip(&cells) {
        values[i][j] = v;
        norms[i][j] = n;
        valid[i][j] = ok;
        points[i][j] = p;
    }
    Ok(SweepResult {
        photons,
        delta_axis: ds,
        gamma_axis: gs,
        values,
        norms,
        valid,
        grid_meta: GridMeta { resolution, points },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseKind {
    Gaussian,
    Hermite,
}

/// A located maximum of the averaged conversion probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimumReport {
    pub kind: PulseKind,
    pub photons: usize,
    pub delta: f64,
    pub gamma: f64,
    /// `[a_n, b_n]` pairs from `n = 2`.
    pub coefficients: Vec<[f64; 2]>,
    pub objective: f64,
    pub norm: f64,
    pub grid_points: usize,
    pub iterations: u64,
    pub evaluations: u64,
    pub converged: bool,
    pub method: String,
}

impl OptimumReport {
    pub fn shape(&self) -> Result<PulseShape> {
        let coeffs = self.coefficients.iter().map(|&[a, b]| C64::new(a, b)).collect();
        PulseShape::new(self.delta, self.gamma, coeffs)
    }
}

/// Settings of the simplex search over `(delta, gamma)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineOptions {
    pub initial_step: f64,
    /// Converged once the simplex diameter drops below this.
    pub tolerance: f64,
    pub max_iters: usize,
    /// Widths below this are infeasible.
    pub gamma_min: f64,
    pub resolution: Resolution,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions {
            initial_step: 0.1,
            tolerance: 1e-3,
            max_iters: 200,
            gamma_min: 0.05,
            resolution: Resolution::Auto,
        }
    }
}

/// Outcome of a Nelder-Mead minimization.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for (k, a) in simplex.iter().enumerate() {
        for b in &simplex[k + 1..] {
            d = d.max(a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt());
        }
    }
    d
}

fn affine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Minimizes `f` with the Nelder-Mead simplex from the axis-aligned start
/// simplex `x0, x0 + step e_i`. Infinite or NaN values rank worst.
pub fn nelder_mead<F>(f: F, x0: &[f64], step: f64, tolerance: f64, max_iters: usize) -> SimplexResult
where
    F: Fn(&[f64]) -> f64,
{
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        simplex.push(x);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x)).collect();
    let mut iterations = 0;
    let converged = loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&k| simplex[k].clone()).collect();
        values = order.iter().map(|&k| values[k]).collect();
        if diameter(&simplex) < tolerance {
            break true;
        }
        if iterations >= max_iters {
            break false;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for x in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let xr = affine(&centroid, &worst, -1.0);
        let fr = eval(&xr);
        if fr < values[0] {
            let xe = affine(&centroid, &worst, -2.0);
            let fe = eval(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc, accept) = if fr < values[n] {
            let xc = affine(&centroid, &xr, 0.5);
            let fc = eval(&xc);
            (xc, fc, fc <= fr)
        } else {
            let xc = affine(&centroid, &worst, 0.5);
            let fc = eval(&xc);
            (xc, fc, fc < values[n])
        };
        if accept {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        for k in 1..=n {
            simplex[k] = affine(&simplex[0], &simplex[k], 0.5);
            values[k] = eval(&simplex[k]);
        }
    };
    SimplexResult {
        x: simplex[0].clone(),
        value: values[0],
        iterations,
        converged,
    }
}

/// Locates a local maximum over Gaussian pulses by simplex search from `start = (delta, gamma)`.
pub fn refine_max(
    photons: usize,
    start: (f64, f64),
    params: &PhysicalParams,
    options: RefineOptions,
) -> Result<OptimumReport> {
    check_photons(photons)?;
    let (d0, g0) = start;
    if !(d0.is_finite() && g0.is_finite() && g0 > 0.0) {
        return Err(Error::InvalidParams(format!("refinement start ({d0}, {g0}) needs a positive finite width")));
    }
    if g0 < options.gamma_min {
        return Err(Error::InvalidParams(format!(
            "refinement start width {g0} lies below the feasible minimum {}",
            options.gamma_min
        )));
    }
    if !(options.initial_step > 0.0 && options.tolerance > 0.0) {
        return Err(Error::InvalidParams("simplex step and tolerance must be positive".into()));
    }
    let evaluations = Mutex::new(0u64);
    let objective = |x: &[f64]| {
        *evaluations.lock().unwrap() += 1;
        if !(x[1] >= options.gamma_min) {
            return f64::INFINITY;
        }
        PulseShape::gaussian(x[0], x[1])
            .and_then(|s| average_for_pulse(&s, params, photons, options.resolution))
            .map_or(f64::INFINITY, |r| -r.average)
    };
    let res = nelder_mead(objective, &[d0, g0], options.initial_step, options.tolerance, options.max_iters);
    if !res.value.is_finite() {
        return Err(Error::InvalidParams(format!("no feasible point reached from ({d0}, {g0})")));
    }
    let shape = PulseShape::gaussian(res.x[0], res.x[1])?;
    let grid = working_grid(&shape, params, photons, options.resolution)?;
    let report = average_on_grid(&shape, params, photons, &grid)?;
    let evaluations = *evaluations.lock().unwrap();
    Ok(OptimumReport {
        kind: PulseKind::Gaussian,
        photons,
        delta: res.x[0],
        gamma: res.x[1],
        coefficients: Vec::new(),
        objective: report.average,
        norm: report.norm,
        grid_points: grid.len(),
        iterations: res.iterations as u64,
        evaluations,
        converged: res.converged,
        method: "nelder-mead, simplex diameter criterion".into(),
    })
}

/// Settings of the Hermite shape optimization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShapeOptions {
    /// Central finite-difference step per coordinate.
    pub fd_step: f64,
    pub max_iters: u64,
    /// Converged once the gradient norm drops below this.
    pub gradient_tolerance: f64,
    /// Converged once two successive iterations each improve the objective by less than this.
    pub objective_tolerance: f64,
    /// Resolution of the fixed grid used during the search.
    pub search_resolution: Resolution,
    /// Resolution of the final re-evaluation.
    pub final_resolution: Resolution,
    /// The search window is the default window of the start Gaussian with
    /// its width scaled by this factor.
    pub window_widening: f64,
}

impl Default for ShapeOptions {
    fn default() -> Self {
        ShapeOptions {
            fd_step: 1e-4,
            max_iters: 100,
            gradient_tolerance: 1e-4,
            objective_tolerance: 1e-6,
            search_resolution: Resolution::Auto,
            final_resolution: Resolution::Auto,
            window_widening: 1.5,
        }
    }
}

/// `sqrt(2^n n!)`, the norm of `H_n` under the Gaussian weight up to `pi^(1/4)`.
fn hermite_scale(n: usize) -> f64 {
    (2..=n).fold(2.0, |acc, k| acc * 2.0 * k as f64).sqrt()
}

/// Maps `(delta, gamma, b_2, a_3, b_3, ..., a_nmax, b_nmax)` to a pulse. The
/// search coordinates are the coefficients times `sqrt(2^n n!)`, which puts
/// all orders on the same footing.
fn shape_from_params(x: &[f64]) -> Result<PulseShape> {
    let mut coeffs = vec![C64::new(0.0, x[2] / hermite_scale(2))];
    coeffs.extend(
        x[3..]
            .chunks(2)
            .enumerate()
            .map(|(k, ab)| C64::new(ab[0], ab[1]) / hermite_scale(k + 3)),
    );
    while coeffs.last() == Some(&C64::new(0.0, 0.0)) {
        coeffs.pop();
    }
    PulseShape::new(x[0], x[1], coeffs)
}

fn params_from_report(report: &OptimumReport, n_max: usize) -> Result<Vec<f64>> {
    if report.coefficients.len() > n_max - 1 {
        return Err(Error::InvalidParams(format!(
            "start carries Hermite orders up to {}, above n_max = {n_max}",
            report.coefficients.len() + 1
        )));
    }
    let mut coeffs = report.coefficients.clone();
    coeffs.resize(n_max - 1, [0.0, 0.0]);
    if coeffs[0][0] != 0.0 {
        return Err(Error::InvalidParams("the n = 2 Hermite coefficient must be purely imaginary".into()));
    }
    let mut x = vec![report.delta, report.gamma, coeffs[0][1] * hermite_scale(2)];
    for (k, [a, b]) in coeffs.iter().enumerate().skip(1) {
        x.extend([a * hermite_scale(k + 2), b * hermite_scale(k + 2)]);
    }
    Ok(x)
}

/// Cost assigned to pulses the search grid cannot represent.
const INFEASIBLE_COST: f64 = 1.0;

#[derive(Clone)]
struct ShapeProblem<'a> {
    photons: usize,
    params: &'a PhysicalParams,
    grid: TimeGrid,
    fd_step: f64,
    memo: &'a Mutex<HashMap<Vec<u64>, f64>>,
}

impl ShapeProblem<'_> {
    fn evaluate(&self, x: &[f64]) -> f64 {
        let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        if let Some(&v) = self.memo.lock().unwrap().get(&key) {
            return v;
        }
        let v = shape_from_params(x)
            .and_then(|s| average_on_grid(&s, self.params, self.photons, &self.grid))
            .map_or(INFEASIBLE_COST, |r| -r.average);
        self.memo.lock().unwrap().insert(key, v);
        v
    }

    fn best(&self) -> Option<(Vec<f64>, f64)> {
        self.memo
            .lock()
            .unwrap()
            .iter()
            .map(|(k, &v)| (k.iter().map(|&b| f64::from_bits(b)).collect::<Vec<_>>(), v))
            .min_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.partial_cmp(&b.0).unwrap()))
    }
}

impl CostFunction for ShapeProblem<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self.evaluate(x))
    }
}

impl Gradient for ShapeProblem<'_> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, x: &Vec<f64>) -> std::result::Result<Vec<f64>, argmin::core::Error> {
        Ok((0..x.len())
            .map(|i| {
                let (mut up, mut down) = (x.clone(), x.clone());
                up[i] += self.fd_step;
                down[i] -= self.fd_step;
                (self.evaluate(&up) - self.evaluate(&down)) / (2.0 * self.fd_step)
            })
            .collect())
    }
}

type ShapeState = IterState<Vec<f64>, Vec<f64>, (), (), (), f64>;

/// Adds gradient-norm and stalled-cost stopping rules to a gradient-based solver.
struct GradientStop<'a, S> {
    inner: S,
    tolerance: f64,
    cost_tolerance: f64,
    /// Gains of the last two iterations.
    gains: [f64; 2],
    iterations: &'a AtomicU64,
}

impl<O, S: Solver<O, ShapeState>> Solver<O, ShapeState> for GradientStop<'_, S> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn init(&mut self, problem: &mut Problem<O>, state: ShapeState) -> std::result::Result<(ShapeState, Option<KV>), argmin::core::Error> {
        self.inner.init(problem, state)
    }

    fn next_iter(
        &mut self,
        problem: &mut Problem<O>,
        state: ShapeState,
    ) -> std::result::Result<(ShapeState, Option<KV>), argmin::core::Error> {
        let previous = state.get_cost();
        let out = self.inner.next_iter(problem, state)?;
        self.gains = [self.gains[1], previous - out.0.get_cost()];
        self.iterations.fetch_add(1, Ordering::Relaxed);
        Ok(out)
    }

    fn terminate(&mut self, state: &ShapeState) -> TerminationStatus {
        let status = self.inner.terminate(state);
        if status.terminated() {
            return status;
        }
        let small_gradient = state
            .get_gradient()
            .is_some_and(|g| g.iter().map(|v| v * v).sum::<f64>().sqrt() < self.tolerance);
        let stalled = self.gains.iter().all(|g| g.abs() < self.cost_tolerance);
        if small_gradient || stalled {
            TerminationStatus::Terminated(TerminationReason::SolverConverged)
        } else {
            TerminationStatus::NotTerminated
        }
    }
}

/// Maximizes over `(delta, gamma, b_2, a_3, b_3, ..., a_nmax, b_nmax)` by
/// nonlinear conjugate gradients with central-difference gradients.
///
/// The search runs on one fixed grid built around `start`; the result is
/// re-evaluated on its own working grid and never falls below `start`.
pub fn optimize_pulse_shape(
    photons: usize,
    n_max: usize,
    start: &OptimumReport,
    params: &PhysicalParams,
    options: ShapeOptions,
) -> Result<OptimumReport> {
    check_photons(photons)?;
    if n_max < 2 {
        return Err(Error::InvalidParams(format!("n_max must be at least 2, got {n_max}")));
    }
    if start.photons != photons {
        return Err(Error::InvalidParams(format!(
            "start was optimized for {} photons, not {photons}",
            start.photons
        )));
    }
    if !(options.fd_step > 0.0 && options.window_widening >= 1.0) {
        return Err(Error::InvalidParams("finite-difference step must be positive and widening at least 1".into()));
    }
    let x0 = params_from_report(start, n_max)?;
    let start_shape = start.shape()?;
    let (t_min, t_max) =
        PulseShape::gaussian(start.delta, start.gamma / options.window_widening)?.default_window(params);
    let n = options.search_resolution.points(photons, t_max - t_min, params.gamma0());
    let grid = TimeGrid::new(t_min, t_max, n)?;
    let memo = Mutex::new(HashMap::new());
    let problem = ShapeProblem {
        photons,
        params,
        grid,
        fd_step: options.fd_step,
        memo: &memo,
    };

    let iterations = AtomicU64::new(0);
    let (mut x_best, mut converged): (Vec<f64>, bool) = if options.max_iters == 0 {
        (x0.clone(), false)
    } else {
        let solver = GradientStop {
            inner: NonlinearConjugateGradient::new(MoreThuenteLineSearch::new(), PolakRibiere::new())
                .restart_iters(x0.len() as u64)
                .restart_orthogonality(0.1),
            tolerance: options.gradient_tolerance,
            cost_tolerance: options.objective_tolerance,
            gains: [f64::INFINITY; 2],
            iterations: &iterations,
        };
        let run = Executor::new(problem.clone(), solver)
            .configure(|s| s.param(x0.clone()).max_iters(options.max_iters))
            .run();
        // a failed line search means no further decrease was found
        let converged = run
            .map(|r| r.state().get_termination_reason() == Some(&TerminationReason::SolverConverged))
            .unwrap_or(false);
        let (x, _) = problem.best().unwrap_or((x0.clone(), INFEASIBLE_COST));
        (x, converged)
    };
    let iterations = iterations.into_inner();
    let evaluations = memo.lock().unwrap().len() as u64;

    let mut shape = shape_from_params(&x_best)?;
    let mut grid = working_grid(&shape, params, photons, options.final_resolution)?;
    let mut report: EntanglementReport = average_on_grid(&shape, params, photons, &grid)?;
    if report.average < start.objective {
        x_best = x0.clone();
        shape = start_shape;
        grid = working_grid(&shape, params, photons, options.final_resolution)?;
        report = average_on_grid(&shape, params, photons, &grid)?;
        converged = false;
    }
    let coefficients: Vec<[f64; 2]> = shape.hermite().iter().map(|c| [c.re, c.im]).collect();
    Ok(OptimumReport {
        kind: if coefficients.is_empty() { PulseKind::Gaussian } else { PulseKind::Hermite },
        photons,
        delta: x_best[0],
        gamma: x_best[1],
        coefficients,
        objective: report.average,
        norm: report.norm,
        grid_points: grid.len(),
        iterations,
        evaluations,
        converged,
        method: "nonlinear conjugate gradient (Polak-Ribiere, More-Thuente line search), central differences".into(),
    })
}
