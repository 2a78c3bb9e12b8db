use serde::{Deserialize, Serialize};

use super::EigenFrame;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

const POLE_TOL: f64 = 1e-12;

/// Which of the three constant-coupling path families a path belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathKind {
    /// `phi` fixed, `theta` linear.
    Meridian,
    /// `theta` fixed, `phi` linear.
    Parallel,
    /// Both vary with `g_{1,2}` held at `c_r + i c_i`.
    General,
}

/// Drive applied while the path is moving.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Envelope {
    /// `Omega = cos(theta) * dphi/dt`, which keeps `phi_{1,2}` constant.
    PhaseLocked,
    /// Fixed amplitude in rad/us.
    Constant(f64),
}

/// Path on the parameter sphere with constant coupling `g_{1,2} = c_r + i c_i`:
/// `dtheta/dt = 2 c_i`, `dphi/dt = 2 c_r / sin(theta)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelPath {
    pub theta0: f64,
    pub phi0: f64,
    pub c_r: f64,
    pub c_i: f64,
    pub kind: PathKind,
    pub tau_path: f64,
    pub envelope: Envelope,
}

impl TwoLevelPath {
    pub fn new(theta0: f64, phi0: f64, c_r: f64, c_i: f64, kind: PathKind, tau_path: f64) -> Result<Self> {
        let path = Self { theta0, phi0, c_r, c_i, kind, tau_path, envelope: Envelope::PhaseLocked };
        path.validate()?;
        Ok(path)
    }

    /// `theta: theta0 -> theta_end` along a fixed meridian.
    pub fn meridian(theta0: f64, theta_end: f64, phi0: f64, tau_path: f64) -> Result<Self> {
        Self::new(theta0, phi0, 0.0, (theta_end - theta0) / (2.0 * tau_path), PathKind::Meridian, tau_path)
    }

    /// `phi: phi0 -> phi_end` along a fixed parallel at `theta`.
    pub fn parallel(theta: f64, phi0: f64, phi_end: f64, tau_path: f64) -> Result<Self> {
        let c_r = (phi_end - phi0) * theta.sin() / (2.0 * tau_path);
        Self::new(theta, phi0, c_r, 0.0, PathKind::Parallel, tau_path)
    }

    /// Both angles move; `c_r / c_i` is fixed by the `phi` endpoints through
    /// `phi(theta) = phi0 + (c_r/c_i) ln[tan(theta/2) / tan(theta0/2)]`.
    pub fn general(theta0: f64, theta_end: f64, phi0: f64, phi_end: f64, tau_path: f64) -> Result<Self> {
        let c_i = (theta_end - theta0) / (2.0 * tau_path);
        let log_span = half_tan_log(theta_end) - half_tan_log(theta0);
        if !log_span.is_finite() || log_span == 0.0 {
            return Err(Error::InvalidParameter("general path endpoints must avoid the poles".into()));
        }
        let c_r = (phi_end - phi0) * c_i / log_span;
        Self::new(theta0, phi0, c_r, c_i, PathKind::General, tau_path)
    }

    pub fn with_envelope(mut self, envelope: Envelope) -> Self {
        self.envelope = envelope;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_path > 0.0) || !self.tau_path.is_finite() {
            return Err(Error::InvalidParameter(format!("tau_path must be positive, got {}", self.tau_path)));
        }
        match self.kind {
            PathKind::Meridian if self.c_r != 0.0 => {
                Err(Error::InvalidParameter("meridian path requires c_r = 0".into()))
            }
            PathKind::Parallel if self.c_i != 0.0 => {
                Err(Error::InvalidParameter("parallel path requires c_i = 0".into()))
            }
            PathKind::Parallel if self.theta0.sin().abs() < POLE_TOL => Err(Error::PathPole { c_r: self.c_r }),
            _ => Ok(()),
        }
    }

    pub fn theta(&self, s: f64) -> f64 {
        match self.kind {
            PathKind::Parallel => self.theta0,
            _ => self.theta0 + 2.0 * self.c_i * s,
        }
    }

    pub fn theta_dot(&self) -> f64 {
        match self.kind {
            PathKind::Parallel => 0.0,
            _ => 2.0 * self.c_i,
        }
    }

    pub fn phi(&self, s: f64) -> f64 {
        match self.kind {
            PathKind::Meridian => self.phi0,
            PathKind::Parallel => self.phi0 + 2.0 * self.c_r * s / self.theta0.sin(),
            PathKind::General if self.c_i == 0.0 => self.phi0 + 2.0 * self.c_r * s / self.theta0.sin(),
            PathKind::General => {
                self.phi0 + self.c_r / self.c_i * (half_tan_log(self.theta(s)) - half_tan_log(self.theta0))
            }
        }
    }

    /// `dphi/dt` at path time `s`.
    pub fn phi_dot(&self, s: f64) -> Result<f64> {
        if self.kind == PathKind::Meridian || self.c_r == 0.0 {
            return Ok(0.0);
        }
        let sin = self.theta(s).sin();
        if sin.abs() < POLE_TOL {
            return Err(Error::PathPole { c_r: self.c_r });
        }
        Ok(2.0 * self.c_r / sin)
    }

    /// Drive amplitude while the path moves.
    pub fn background_omega(&self, s: f64) -> Result<f64> {
        match self.envelope {
            Envelope::PhaseLocked => Ok(self.theta(s).cos() * self.phi_dot(s)?),
            Envelope::Constant(w) => Ok(w),
        }
    }

    fn check_time(&self, s: f64) -> Result<()> {
        let slack = 1e-9 * self.tau_path.max(1.0);
        if s < -slack || s > self.tau_path + slack {
            return Err(Error::PathTimeOutOfRange { t_path: s, tau_path: self.tau_path });
        }
        Ok(())
    }
}

fn half_tan_log(theta: f64) -> f64 {
    (0.5 * theta).tan().ln()
}

/// `H = (Omega/2)(cos(theta) sz + sin(theta) cos(phi) sx + sin(theta) sin(phi) sy)`
/// in the `{|g>, |e>}` basis.
pub fn two_level_hamiltonian(theta: f64, phi: f64, omega: f64) -> ComplexMatrix {
    let half = 0.5 * omega;
    let (s, c) = theta.sin_cos();
    let mut h = ComplexMatrix::zeros(2);
    h[(0, 0)] = C64::new(half * c, 0.0);
    h[(1, 1)] = C64::new(-half * c, 0.0);
    h[(0, 1)] = C64::from_polar(half * s, -phi);
    h[(1, 0)] = C64::from_polar(half * s, phi);
    h
}

/// Analytic frame: `|1> = cos(theta/2)|g> + e^{i phi} sin(theta/2)|e>` with
/// `E_1 = Omega/2`, `|2> = sin(theta/2)|g> - e^{i phi} cos(theta/2)|e>` with
/// `E_2 = -Omega/2`.
pub fn two_level_frame(theta: f64, phi: f64, omega: f64, theta_dot: f64, phi_dot: f64) -> EigenFrame {
    let (sh, ch) = (0.5 * theta).sin_cos();
    let e_iphi = C64::from_polar(1.0, phi);
    let mut states = ComplexMatrix::zeros(2);
    states[(0, 0)] = C64::new(ch, 0.0);
    states[(1, 0)] = e_iphi * sh;
    states[(0, 1)] = C64::new(sh, 0.0);
    states[(1, 1)] = -e_iphi * ch;

    let (s, c) = theta.sin_cos();
    let mut g = ComplexMatrix::zeros(2);
    g[(0, 0)] = C64::new(0.5 * (c - 1.0) * phi_dot, 0.0);
    g[(1, 1)] = C64::new(-0.5 * (1.0 + c) * phi_dot, 0.0);
    g[(0, 1)] = C64::new(0.5 * phi_dot * s, 0.5 * theta_dot);
    g[(1, 0)] = g[(0, 1)].conj();

    EigenFrame { energies: vec![0.5 * omega, -0.5 * omega], states, couplings: g }
}

/// Hamiltonian and analytic eigenframe at path time `t_path` with the path
/// moving and drive amplitude `omega`.
pub fn two_level_eval(path: &TwoLevelPath, t_path: f64, omega: f64) -> Result<(ComplexMatrix, EigenFrame)> {
    path.check_time(t_path)?;
    let theta = path.theta(t_path);
    let phi = path.phi(t_path);
    let phi_dot = path.phi_dot(t_path)?;
    Ok((
        two_level_hamiltonian(theta, phi, omega),
        two_level_frame(theta, phi, omega, path.theta_dot(), phi_dot),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::frame::finite_difference_couplings;
    use std::f64::consts::PI;

    #[test]
    fn north_pole_is_sigma_z() {
        let path = TwoLevelPath::meridian(0.0, PI, 0.0, 1.0).unwrap();
        let (h, frame) = two_level_eval(&path, 0.0, 3.0).unwrap();
        assert!((&h - &crate::linalg::pauli::z().scale(C64::new(1.5, 0.0))).frobenius_norm() < 1e-15);
        assert!((frame.states[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(frame.energies, vec![1.5, -1.5]);
    }

    #[test]
    fn meridian_coupling_is_i_ci() {
        let path = TwoLevelPath::meridian(0.0, PI, 0.0, 9.9).unwrap();
        for s in [0.0, 1.0, 4.5, 9.9] {
            let (_, f) = two_level_eval(&path, s, 0.0).unwrap();
            assert!((f.coupling(0, 1) - C64::new(0.0, path.c_i)).norm() < 1e-15);
            assert_eq!(f.coupling(0, 0).re, 0.0);
        }
    }

    #[test]
    fn equator_diagonal_couplings_cancel() {
        let path = TwoLevelPath::parallel(PI / 2.0, 0.0, PI, 2.0).unwrap();
        let (_, f) = two_level_eval(&path, 0.7, 1.0).unwrap();
        let phi_dot = path.phi_dot(0.7).unwrap();
        assert!((f.coupling(0, 0).re + 0.5 * phi_dot).abs() < 1e-15);
        assert!((f.coupling(0, 0) - f.coupling(1, 1)).norm() < 1e-15);
        // finite-difference cross-check of the diagonals
        let fd = finite_difference_couplings(|s| two_level_eval(&path, s, 1.0).map(|x| x.1), 0.7, 1e-4).unwrap();
        assert!((fd[(0, 0)] - fd[(1, 1)]).norm() < 1e-7);
    }

    #[test]
    fn frame_diagonalizes_hamiltonian() {
        let path = TwoLevelPath::general(PI / 5.0, 4.0 * PI / 5.0, 0.0, PI, 9.9).unwrap();
        for s in [0.0, 2.2, 5.0, 9.9] {
            let (h, f) = two_level_eval(&path, s, 1.3).unwrap();
            for n in 0..2 {
                let v = f.state(n);
                let hv = h.apply(&v);
                for r in 0..2 {
                    assert!((hv[r] - v[r] * f.energies[n]).norm() < 1e-12);
                }
            }
            assert!(f.orthonormality_deviation() < 1e-12);
        }
        assert!((path.phi(9.9) - PI).abs() < 1e-12);
        assert!((path.theta(9.9) - 4.0 * PI / 5.0).abs() < 1e-12);
    }

    #[test]
    fn pole_is_rejected() {
        let path = TwoLevelPath {
            theta0: 0.0,
            phi0: 0.0,
            c_r: 0.1,
            c_i: 0.1,
            kind: PathKind::General,
            tau_path: 1.0,
            envelope: Envelope::PhaseLocked,
        };
        assert!(matches!(two_level_eval(&path, 0.0, 1.0), Err(Error::PathPole { .. })));
        assert!(matches!(TwoLevelPath::parallel(0.0, 0.0, 1.0, 1.0), Err(Error::PathPole { .. })));
    }
}
