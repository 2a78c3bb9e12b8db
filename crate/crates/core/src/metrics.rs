//! Fidelity, adiabatic-path deviation and populations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{UnitaryMatrix, C64};

const UNITARITY_TOL: f64 = 1e-9;
const NORM_TOL: f64 = 1e-12;

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

pub(crate) fn check_normalized(v: &[C64]) -> Result<()> {
    let n = norm_sqr(v);
    if (n - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(n));
    }
    Ok(())
}

fn check_unitary(u: &UnitaryMatrix, dim: usize) -> Result<()> {
    if u.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, actual: u.dim() });
    }
    let deviation = u.unitarity_deviation();
    if deviation > UNITARITY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

/// `|<psi_f| U |psi_i>|^2`.
pub fn fidelity(u: &UnitaryMatrix, psi_i: &[C64], psi_f: &[C64]) -> Result<f64> {
    check_normalized(psi_i)?;
    check_normalized(psi_f)?;
    check_unitary(u, psi_i.len())?;
    if psi_f.len() != psi_i.len() {
        return Err(Error::DimensionMismatch { expected: psi_i.len(), actual: psi_f.len() });
    }
    Ok(inner(psi_f, &u.apply(psi_i)).norm_sqr())
}

/// `1 - |<psi_i| U^dag U_A |psi_i>|^2`.
pub fn deviation(u: &UnitaryMatrix, u_adiabatic: &UnitaryMatrix, psi_i: &[C64]) -> Result<f64> {
    check_normalized(psi_i)?;
    check_unitary(u, psi_i.len())?;
    check_unitary(u_adiabatic, psi_i.len())?;
    let overlap = inner(&u.apply(psi_i), &u_adiabatic.apply(psi_i));
    Ok(1.0 - overlap.norm_sqr())
}

/// `|<b|psi>|^2`.
pub fn population(state: &[C64], basis_index: usize) -> Result<f64> {
    state
        .get(basis_index)
        .map(|a| a.norm_sqr())
        .ok_or(Error::IndexOutOfRange { index: basis_index, dim: state.len() })
}

/// All basis populations of a normalized state.
pub fn populations(state: &[C64]) -> Result<Vec<f64>> {
    let n = norm_sqr(state);
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(n));
    }
    Ok(state.iter().map(|a| a.norm_sqr()).collect())
}

/// One recorded instant of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t_wall: f64,
    pub t_path: f64,
    pub state: Vec<C64>,
    pub populations: Vec<f64>,
    pub fidelity: f64,
    pub deviation: f64,
    /// Envelope `Omega`, rad/us.
    pub omega: f64,
    pub theta: f64,
    pub phi: f64,
    /// 1-based pulse index when the sample closes a step inside a pulse window.
    pub pulse: Option<usize>,
}

/// Sampled series of a run. Populations sum to 1 within `1e-9` per sample.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub basis_labels: Vec<String>,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn wall_times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t_wall).collect()
    }

    pub fn fidelity(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.fidelity).collect()
    }

    pub fn deviation(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.deviation).collect()
    }

    /// Population series of basis state `b`.
    pub fn population(&self, b: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.populations[b]).collect()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }
}
