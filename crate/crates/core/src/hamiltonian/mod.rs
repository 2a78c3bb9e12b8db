//! Parametrized Hamiltonians with analytic eigenframes.

pub mod frame;
pub mod numeric;
pub mod three_level;
pub mod two_level;

use serde::{Deserialize, Serialize};

pub use frame::{accumulate_phases, finite_difference_couplings, gauge_fix, EigenFrame, PhaseLedger};
pub use numeric::numeric_frame;
pub use three_level::{three_level_eval, StirapPulses, ThreeLevelControls, ThreeLevelDrive, ThreeLevelPath};
pub use two_level::{two_level_eval, Envelope, PathKind, TwoLevelPath};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Control path of either model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ControlPath {
    TwoLevel(TwoLevelPath),
    ThreeLevel(ThreeLevelPath),
}

/// What drives the system at a given instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Drive {
    /// The path advances and the path's own envelope is applied.
    Path,
    /// The path is frozen and a square pulse of this amplitude is applied.
    Frozen { amplitude: f64 },
}

/// Raw control values, as exported to trajectories.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ControlValues {
    /// Total envelope `Omega`, rad/us.
    pub omega: f64,
    pub theta: f64,
    /// Azimuth for two levels, eigenframe mixing angle for three.
    pub phi: f64,
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub hamiltonian: ComplexMatrix,
    pub frame: EigenFrame,
    pub controls: ControlValues,
}

impl ControlPath {
    pub fn dim(&self) -> usize {
        match self {
            Self::TwoLevel(_) => 2,
            Self::ThreeLevel(_) => 3,
        }
    }

    pub fn tau_path(&self) -> f64 {
        match self {
            Self::TwoLevel(p) => p.tau_path,
            Self::ThreeLevel(p) => p.tau_path,
        }
    }

    pub fn basis_labels(&self) -> &'static [&'static str] {
        match self {
            Self::TwoLevel(_) => &["g", "e"],
            Self::ThreeLevel(_) => &["g", "e", "a"],
        }
    }

    /// Hamiltonian, frame and controls at path time `t_path`.
    pub fn evaluate(&self, t_path: f64, drive: Drive) -> Result<Evaluation> {
        match self {
            Self::TwoLevel(p) => {
                let omega = match drive {
                    Drive::Path => p.background_omega(t_path)?,
                    Drive::Frozen { amplitude } => amplitude,
                };
                let (hamiltonian, frame) = two_level_eval(p, t_path, omega)?;
                let frame = if matches!(drive, Drive::Frozen { .. }) { frame.frozen() } else { frame };
                let controls = ControlValues { omega, theta: p.theta(t_path), phi: p.phi(t_path) };
                Ok(Evaluation { hamiltonian, frame, controls })
            }
            Self::ThreeLevel(p) => match drive {
                Drive::Path => {
                    let (hamiltonian, frame) = three_level_eval(p, t_path)?;
                    let c = p.controls(t_path);
                    let controls = ControlValues { omega: c.omega, theta: c.theta, phi: c.mixing_angle() };
                    Ok(Evaluation { hamiltonian, frame, controls })
                }
                Drive::Frozen { amplitude } => {
                    if amplitude < 0.0 {
                        return Err(Error::NegativeEnvelope(amplitude));
                    }
                    let mut c = p.controls(t_path);
                    c.omega = amplitude;
                    c.theta_dot = 0.0;
                    c.omega_dot = 0.0;
                    let hamiltonian = three_level::three_level_hamiltonian(c.pump(), c.stokes(), c.delta);
                    let frame = three_level::three_level_frame(&c).frozen();
                    let controls = ControlValues { omega: c.omega, theta: c.theta, phi: c.mixing_angle() };
                    Ok(Evaluation { hamiltonian, frame, controls })
                }
            },
        }
    }
}
