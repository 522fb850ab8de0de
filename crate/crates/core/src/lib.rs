//! Few-photon scattering of shaped pulses on a Lambda-type atom coupled to a
//! waveguide.
//!
//! An atom prepared in its `x` ground state is driven by one, two or three
//! identical X-polarized photons. At most one photon can be converted to Y
//! polarization, which leaves the photons and the atom in a W-class entangled
//! state. This crate computes the outgoing wave functions in the time domain,
//! the probability of converting them to the canonical W state, and optimizes
//! the incident pulse to maximize it.
//!
//! Frequencies are in units of the decay rate `gamma0` (1 by default) and
//! times in `1/gamma0`.

pub mod coupling;
pub mod error;
pub mod grid;
pub mod optimize;
pub mod pulse;
pub mod quad;
pub mod scatter2;
pub mod scatter3;
pub mod smatrix;
pub mod wstate;

pub use coupling::{s_coeff, t_coeff, PhysicalParams};
pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use pulse::{EnvelopeSeries, PulseShape, PulseSolution, PulseSpec, Resolution};
pub use scatter2::{psi2, scatter_two, Channel2, TwoPhotonWave};
pub use scatter3::{psi3, scatter_three, Channel3, ThreePhotonWave};
pub use wstate::{average_for_pulse, pw3_average, pw3_mono, pw4_average, pw4_mono, EntanglementReport};
