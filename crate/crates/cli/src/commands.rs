use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use lambda_scatter::optimize::{optimize_pulse_shape, refine_max, sweep, sweep_resolution, OptimumReport};
use lambda_scatter::pulse::{working_grid, PulseSeries};
use lambda_scatter::scatter2::scatter_two_series;
use lambda_scatter::scatter3::ThreePhotonField;
use lambda_scatter::smatrix::{calibrate_two_photon, oracle_three_photon_mono, oracle_two_photon, FrequencyGrid};
use lambda_scatter::wstate::{pw3_average, pw4_average, pw4_from_amplitudes, w_probability};
use lambda_scatter::{
    psi3, s_coeff, scatter_two, t_coeff, Channel3, EntanglementReport, PhysicalParams, PulseShape, PulseSolution,
    PulseSpec, TimeGrid,
};
use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::json;

use crate::config::{
    check_photons, CoeffsConfig, OptimizeConfig, OracleCheckConfig, SweepConfig, WavefunctionConfig,
};
use crate::output::{ensure_dir, num, write_json, write_manifest, Csv};

/// A check ran to completion but its result is outside tolerance.
#[derive(Debug)]
pub struct CheckFailed(pub String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

#[derive(Serialize)]
struct GridInfo {
    t_min: f64,
    t_max: f64,
    points: usize,
    spacing: f64,
}

impl From<&TimeGrid> for GridInfo {
    fn from(g: &TimeGrid) -> Self {
        GridInfo {
            t_min: g.t_min(),
            t_max: g.t_max(),
            points: g.len(),
            spacing: g.spacing(),
        }
    }
}

fn required_output(output: &Option<PathBuf>) -> Result<&Path> {
    match output {
        Some(dir) => {
            ensure_dir(dir)?;
            Ok(dir)
        }
        None => bail!("an output directory is required (--output or \"output\" in the config)"),
    }
}

pub fn coeffs(cfg: &CoeffsConfig) -> Result<()> {
    let start = Instant::now();
    let header = ["delta", "re_s", "im_s", "re_t", "im_t", "abs_s2", "abs_t2"];
    let rows: Vec<[f64; 7]> = cfg
        .deltas
        .iter()
        .map(|&d| {
            let (s, t) = (s_coeff(d, &cfg.params), t_coeff(d, &cfg.params));
            [d, s.re, s.im, t.re, t.im, s.norm_sqr(), t.norm_sqr()]
        })
        .collect();

    let mut out = csv::Writer::from_writer(std::io::stdout().lock());
    out.write_record(header)?;
    for r in &rows {
        out.write_record(r.iter().map(|&v| num(v)))?;
    }
    out.flush()?;

    if let Some(dir) = &cfg.output {
        ensure_dir(dir)?;
        let mut csv = Csv::create(dir, "coeffs.csv", &header)?;
        for r in &rows {
            csv.row(r)?;
        }
        let file = csv.finish()?;
        write_manifest(dir, "coeffs", cfg, json!(null), &[file], start.elapsed())?;
    }
    Ok(())
}

fn write_complex_grid(dir: &Path, name: &str, grid: &TimeGrid, value: impl Fn(usize, usize) -> C64) -> Result<PathBuf> {
    let mut csv = Csv::create(dir, name, &["t1", "t2", "re", "im"])?;
    for i in 0..grid.len() {
        for j in 0..grid.len() {
            let z = value(i, j);
            csv.row(&[grid.time(i), grid.time(j), z.re, z.im])?;
        }
    }
    csv.finish()
}

pub fn wavefunction(cfg: &WavefunctionConfig) -> Result<()> {
    let start = Instant::now();
    check_photons(cfg.photons)?;
    let dir = required_output(&cfg.output)?;
    let params = cfg.params;
    let shape = PulseShape::try_from(cfg.pulse.clone())?;
    let grid = working_grid(&shape, &params, cfg.photons, cfg.resolution)?;
    let shape = shape.normalize(&grid)?;
    let series = PulseSeries::compute(&shape, &grid, &params)?;

    let mut files = Vec::new();
    let report = if cfg.photons == 2 {
        let wave = scatter_two_series(&series, &params);
        files.push(write_complex_grid(dir, "xxx.csv", &grid, |i, j| wave.xxx[[i, j]])?);
        files.push(write_complex_grid(dir, "xyy.csv", &grid, |i, j| wave.xyy[[i, j]])?);
        let mut pw = Csv::create(dir, "pw3.csv", &["t1", "t2", "value"])?;
        for i in 0..grid.len() {
            for j in 0..grid.len() {
                pw.row(&[grid.time(i), grid.time(j), w_probability(wave.weights(i, j))])?;
            }
        }
        files.push(pw.finish()?);
        pw3_average(&wave)
    } else {
        let sol = PulseSolution::on_grid(&shape, &params, &grid)?;
        let header = ["t1", "t2", "t3", "re", "im"];
        let mut xxxx = Csv::create(dir, "xxxx_slice.csv", &header)?;
        let mut xxyy = Csv::create(dir, "xxyy_slice.csv", &header)?;
        let mut pw = Csv::create(dir, "pw4_slice.csv", &["t1", "t2", "t3", "value"])?;
        for t1 in grid.times() {
            for t2 in grid.times() {
                let t3 = cfg.slice - t1 - t2;
                if t3 < grid.t_min() || t3 > grid.t_max() {
                    continue;
                }
                let amps = Channel3::ALL.map(|c| psi3(&sol, t1, t2, t3, c));
                xxxx.row(&[t1, t2, t3, amps[0].re, amps[0].im])?;
                xxyy.row(&[t1, t2, t3, amps[1].re, amps[1].im])?;
                pw.row(&[t1, t2, t3, pw4_from_amplitudes(amps)])?;
            }
        }
        files.extend([xxxx.finish()?, xxyy.finish()?, pw.finish()?]);
        pw4_average(&ThreePhotonField::new(&series, &params))
    };

    // data files are written even when the norm check fails
    let grid_info = GridInfo::from(&grid);
    match report {
        Ok(r) => {
            files.push(write_json(dir, "report.json", &r)?);
            write_manifest(dir, "wavefunction", cfg, grid_info, &files, start.elapsed())?;
            print_report(&r);
            Ok(())
        }
        Err(e) => {
            write_manifest(dir, "wavefunction", cfg, grid_info, &files, start.elapsed())?;
            Err(e.into())
        }
    }
}

fn print_report(r: &EntanglementReport) {
    println!("average {}  norm {}  pointwise max {}", num(r.average), num(r.norm), num(r.pointwise_max));
    if r.norm_warning {
        eprintln!("warning: state norm {} deviates from 1; the grid may be under-resolved", r.norm);
    }
}

pub fn sweep_cmd(cfg: &SweepConfig) -> Result<()> {
    let start = Instant::now();
    check_photons(cfg.photons)?;
    let dir = required_output(&cfg.output)?;
    let resolution = cfg.resolution.unwrap_or(sweep_resolution(cfg.photons));
    let result = sweep(cfg.photons, cfg.delta, cfg.gamma, resolution, &cfg.params)?;

    let mut csv = Csv::create(dir, "sweep.csv", &["delta", "gamma", "value", "valid", "norm", "points"])?;
    for c in result.cells() {
        csv.record([
            num(c.delta),
            num(c.gamma),
            num(c.value),
            (c.valid as u8).to_string(),
            num(c.norm),
            c.points.to_string(),
        ])?;
    }
    let files = vec![csv.finish()?, write_json(dir, "sweep.json", &result)?];
    write_manifest(dir, "sweep", cfg, &result.grid_meta, &files, start.elapsed())?;

    let invalid = result.cells().filter(|c| !c.valid).count();
    match result.argmax() {
        Some(best) => println!(
            "max {} at delta {} gamma {} ({} invalid cells)",
            num(best.value),
            num(best.delta),
            num(best.gamma),
            invalid
        ),
        None => bail!(CheckFailed("no valid sweep cell".into())),
    }
    for peak in result.interior_maxima() {
        println!("interior peak {} at delta {} gamma {}", num(peak.value), num(peak.delta), num(peak.gamma));
    }
    Ok(())
}

pub fn optimize(cfg: &OptimizeConfig) -> Result<()> {
    let start = Instant::now();
    check_photons(cfg.photons)?;
    let [d0, g0] = cfg.start;
    let gaussian = refine_max(cfg.photons, (d0, g0), &cfg.params, cfg.refine)?;
    let shaped = if cfg.gaussian_only {
        None
    } else {
        Some(optimize_pulse_shape(cfg.photons, cfg.n_max, &gaussian, &cfg.params, cfg.shape)?)
    };
    let best: &OptimumReport = shaped.as_ref().unwrap_or(&gaussian);

    let summary = json!({ "gaussian": &gaussian, "optimum": best });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    if let Some(dir) = &cfg.output {
        ensure_dir(dir)?;
        let files = vec![
            write_json(dir, "gaussian.json", &gaussian)?,
            write_json(dir, "optimum.json", best)?,
        ];
        let grid = json!({ "gaussian_points": gaussian.grid_points, "optimum_points": best.grid_points });
        write_manifest(dir, "optimize", cfg, grid, &files, start.elapsed())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct PulseCheck {
    pulse: PulseSpec,
    xxx_deviation: f64,
    xyy_deviation: f64,
    pass: bool,
}

#[derive(Serialize)]
struct MonoCheck {
    channel: Channel3,
    constant: [f64; 2],
    max_rel_error: f64,
    pass: bool,
}

fn relative_deviation(a: &ndarray::Array2<C64>, b: &ndarray::Array2<C64>) -> f64 {
    let peak = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / peak
}

fn two_photon_check(
    spec: &PulseSpec,
    cfg: &OracleCheckConfig,
    params: &PhysicalParams,
    constant: C64,
) -> Result<PulseCheck> {
    let shape = PulseShape::try_from(spec.clone())?;
    let grid = working_grid(&shape, params, 2, lambda_scatter::Resolution::Points(cfg.points))?;
    let shape = shape.normalize(&grid)?;
    let direct = scatter_two(&shape, &grid, params)?;
    let fgrid = FrequencyGrid::covering(&shape, params, cfg.frequency_step)?;
    let oracle = oracle_two_photon(&shape, &grid, &fgrid, params, constant)?;
    let (xxx_deviation, xyy_deviation) =
        (relative_deviation(&direct.xxx, &oracle.xxx), relative_deviation(&direct.xyy, &oracle.xyy));
    Ok(PulseCheck {
        pulse: spec.clone(),
        xxx_deviation,
        xyy_deviation,
        pass: xxx_deviation < cfg.tolerance && xyy_deviation < cfg.tolerance,
    })
}

pub fn oracle_check(cfg: &OracleCheckConfig) -> Result<()> {
    let start = Instant::now();
    let params = cfg.params;
    let cal = calibrate_two_photon(&params, cfg.points, cfg.frequency_step).context("calibrating the two-photon oracle")?;
    let pulses = cfg
        .pulses
        .iter()
        .map(|p| two_photon_check(p, cfg, &params, cal.constant))
        .collect::<Result<Vec<_>>>()?;
    let mono_shape = PulseShape::try_from(cfg.mono_pulse.clone())?;
    let mono = Channel3::ALL
        .iter()
        .map(|&ch| {
            let cmp = oracle_three_photon_mono(&mono_shape, &params, &cfg.mono_probes, ch.into())?;
            Ok(MonoCheck {
                channel: ch,
                constant: [cmp.constant.re, cmp.constant.im],
                max_rel_error: cmp.max_rel_error,
                pass: cmp.max_rel_error < cfg.mono_tolerance,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = pulses.iter().all(|p| p.pass) && mono.iter().all(|m| m.pass);
    let summary = json!({
        "calibration_constant": [cal.constant.re, cal.constant.im],
        "calibration_times": [cal.reference.0, cal.reference.1],
        "two_photon": pulses,
        "three_photon_mono": mono,
        "pass": pass,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    if let Some(dir) = &cfg.output {
        ensure_dir(dir)?;
        let files = vec![write_json(dir, "oracle.json", &summary)?];
        write_manifest(dir, "oracle-check", cfg, json!({ "points": cfg.points }), &files, start.elapsed())?;
    }
    if !pass {
        bail!(CheckFailed("oracle and direct construction disagree beyond tolerance".into()));
    }
    Ok(())
}
