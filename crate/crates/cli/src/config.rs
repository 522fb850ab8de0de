//! Run configurations. Each subcommand reads an optional JSON file first and
//! then applies command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lambda_scatter::optimize::{Axis, RefineOptions, ShapeOptions};
use lambda_scatter::{PhysicalParams, PulseSpec, Resolution};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
}

fn default_pulse() -> PulseSpec {
    PulseSpec {
        delta: 0.0,
        gamma: 0.5,
        hermite: Vec::new(),
    }
}

fn two() -> usize {
    2
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoeffsConfig {
    pub threads: Option<usize>,
    pub params: PhysicalParams,
    pub deltas: Vec<f64>,
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WavefunctionConfig {
    pub threads: Option<usize>,
    pub params: PhysicalParams,
    pub pulse: PulseSpec,
    pub photons: usize,
    pub resolution: Resolution,
    /// Plane `t1 + t2 + t3 = slice` for three photons.
    pub slice: f64,
    pub output: Option<PathBuf>,
}

impl Default for WavefunctionConfig {
    fn default() -> Self {
        WavefunctionConfig {
            threads: None,
            params: PhysicalParams::default(),
            pulse: default_pulse(),
            photons: two(),
            resolution: Resolution::Auto,
            slice: 0.0,
            output: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub threads: Option<usize>,
    pub params: PhysicalParams,
    pub photons: usize,
    pub delta: Axis,
    pub gamma: Axis,
    /// Defaults to the sweep floor for the photon number.
    pub resolution: Option<Resolution>,
    pub output: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            threads: None,
            params: PhysicalParams::default(),
            photons: two(),
            delta: Axis::DEFAULT_DELTA,
            gamma: Axis::DEFAULT_GAMMA,
            resolution: None,
            output: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeConfig {
    pub threads: Option<usize>,
    pub params: PhysicalParams,
    pub photons: usize,
    /// `(delta, gamma)` where the Gaussian search starts.
    pub start: [f64; 2],
    pub n_max: usize,
    pub gaussian_only: bool,
    pub refine: RefineOptions,
    pub shape: ShapeOptions,
    pub output: Option<PathBuf>,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            threads: None,
            params: PhysicalParams::default(),
            photons: two(),
            start: [1.0, 1.0],
            n_max: 4,
            gaussian_only: false,
            refine: RefineOptions::default(),
            shape: ShapeOptions::default(),
            output: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleCheckConfig {
    pub threads: Option<usize>,
    pub params: PhysicalParams,
    pub pulses: Vec<PulseSpec>,
    /// Time-grid points of the two-photon comparison.
    pub points: usize,
    pub frequency_step: f64,
    /// Largest accepted deviation relative to the peak amplitude.
    pub tolerance: f64,
    pub mono_pulse: PulseSpec,
    pub mono_probes: Vec<[f64; 3]>,
    pub mono_tolerance: f64,
    pub output: Option<PathBuf>,
}

impl Default for OracleCheckConfig {
    fn default() -> Self {
        OracleCheckConfig {
            threads: None,
            params: PhysicalParams::default(),
            pulses: vec![
                default_pulse(),
                PulseSpec {
                    delta: 1.0,
                    gamma: 1.0,
                    hermite: Vec::new(),
                },
            ],
            points: 81,
            frequency_step: 0.1,
            tolerance: 1e-3,
            mono_pulse: PulseSpec {
                delta: 1.0,
                gamma: 0.01,
                hermite: Vec::new(),
            },
            mono_probes: vec![[-20.0, 5.0, 30.0], [10.0, -40.0, 60.0], [-70.0, -50.0, 0.0], [3.0, 3.5, 2.0]],
            mono_tolerance: 0.03,
            output: None,
        }
    }
}

pub fn check_photons(photons: usize) -> Result<()> {
    if !(photons == 2 || photons == 3) {
        bail!(lambda_scatter::Error::InvalidParams(format!("photons must be 2 or 3, got {photons}")));
    }
    Ok(())
}

/// Applies `--omega0/--gamma0/--chirality` overrides.
pub fn override_params(
    params: PhysicalParams,
    omega0: Option<f64>,
    gamma0: Option<f64>,
    chirality: Option<f64>,
) -> Result<PhysicalParams> {
    Ok(PhysicalParams::new(
        omega0.unwrap_or(params.omega0()),
        gamma0.unwrap_or(params.gamma0()),
        chirality.unwrap_or(params.chirality()),
    )?)
}

/// Parses `min:max:steps`.
pub fn parse_axis(s: &str) -> std::result::Result<Axis, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [min, max, steps] = parts[..] else {
        return Err(format!("expected MIN:MAX:STEPS, got {s:?}"));
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    let steps = steps.trim().parse::<usize>().map_err(|e| format!("{steps:?}: {e}"))?;
    Axis::new(num(min)?, num(max)?, steps).map_err(|e| e.to_string())
}
