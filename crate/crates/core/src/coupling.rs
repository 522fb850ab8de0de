//! Atom parameters and single-photon transmission coefficients.
//!
//! Frequencies are measured in units of the radiative decay rate and times in
//! its inverse. With the default parameters `gamma0 = 1` and `omega0 = 0`, a
//! photon frequency is the same number as its detuning from the transition.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Transition frequency, decay rate and waveguide coupling factor of the atom.
///
/// `chirality` is 1 when the atom couples to one propagation direction only
/// and 1/2 for symmetric coupling, where the conversion amplitude halves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct PhysicalParams {
    omega0: f64,
    gamma0: f64,
    chirality: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    #[serde(default)]
    omega0: f64,
    #[serde(default = "one")]
    gamma0: f64,
    #[serde(default = "one")]
    chirality: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<RawParams> for PhysicalParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        PhysicalParams::new(raw.omega0, raw.gamma0, raw.chirality)
    }
}

impl From<PhysicalParams> for RawParams {
    fn from(p: PhysicalParams) -> Self {
        RawParams {
            omega0: p.omega0,
            gamma0: p.gamma0,
            chirality: p.chirality,
        }
    }
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            omega0: 0.0,
            gamma0: 1.0,
            chirality: 1.0,
        }
    }
}

impl PhysicalParams {
    pub const CHIRAL: f64 = 1.0;
    pub const SYMMETRIC: f64 = 0.5;

    pub fn new(omega0: f64, gamma0: f64, chirality: f64) -> Result<Self> {
        if !omega0.is_finite() {
            return Err(Error::InvalidParams(format!("omega0 must be finite, got {omega0}")));
        }
        if !(gamma0 > 0.0 && gamma0.is_finite()) {
            return Err(Error::InvalidParams(format!("gamma0 must be positive, got {gamma0}")));
        }
        if chirality != Self::CHIRAL && chirality != Self::SYMMETRIC {
            return Err(Error::InvalidParams(format!(
                "chirality must be exactly 1.0 or 0.5, got {chirality}"
            )));
        }
        Ok(PhysicalParams {
            omega0,
            gamma0,
            chirality,
        })
    }

    pub fn symmetric() -> Self {
        PhysicalParams {
            chirality: Self::SYMMETRIC,
            ..Default::default()
        }
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn chirality(&self) -> f64 {
        self.chirality
    }

    pub fn with_omega0(self, omega0: f64) -> Result<Self> {
        Self::new(omega0, self.gamma0, self.chirality)
    }

    /// Complex decay constant `i omega0 + gamma0` of the excited state.
    pub fn decay(&self) -> C64 {
        C64::new(self.gamma0, self.omega0)
    }

    /// Strength `chirality * gamma0` with which the incident envelope drives
    /// the converted one.
    pub fn drive(&self) -> f64 {
        self.chirality * self.gamma0
    }
}

/// Amplitude of transmission with polarization conversion at detuning `delta`.
pub fn s_coeff(delta: f64, params: &PhysicalParams) -> C64 {
    let g = params.gamma0;
    params.chirality * (-I * g) / C64::new(delta, g)
}

/// Amplitude of transmission without polarization conversion, `1 + s`.
pub fn t_coeff(delta: f64, params: &PhysicalParams) -> C64 {
    1.0 + s_coeff(delta, params)
}
