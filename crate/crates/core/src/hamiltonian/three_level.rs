use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use super::EigenFrame;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

/// Counterintuitively ordered Gaussian pump/Stokes pair:
/// `Omega_p = A exp(-(t - tau/2 - delay)^2 / sigma^2)`,
/// `Omega_s = A exp(-(t - tau/2 + delay)^2 / sigma^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StirapPulses {
    pub amp: f64,
    pub tau: f64,
    pub delay: f64,
    pub sigma: f64,
}

impl StirapPulses {
    /// Standard layout: delay `tau/10`, width `tau/6`.
    pub fn standard(amp: f64, tau: f64) -> Self {
        Self { amp, tau, delay: tau / 10.0, sigma: tau / 6.0 }
    }

    pub fn pump(&self, t: f64) -> f64 {
        gaussian(t, 0.5 * self.tau + self.delay, self.sigma) * self.amp
    }

    pub fn stokes(&self, t: f64) -> f64 {
        gaussian(t, 0.5 * self.tau - self.delay, self.sigma) * self.amp
    }

    fn pump_dot(&self, t: f64) -> f64 {
        -2.0 * (t - 0.5 * self.tau - self.delay) / (self.sigma * self.sigma) * self.pump(t)
    }

    fn stokes_dot(&self, t: f64) -> f64 {
        -2.0 * (t - 0.5 * self.tau + self.delay) / (self.sigma * self.sigma) * self.stokes(t)
    }
}

fn gaussian(t: f64, centre: f64, sigma: f64) -> f64 {
    let x = (t - centre) / sigma;
    (-x * x).exp()
}

/// How the mixing angle `theta` and the envelope `Omega` evolve in path time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThreeLevelDrive {
    /// `theta = theta0 + theta_rate * s`, constant envelope (0 = drive off).
    Linear { theta0: f64, theta_rate: f64, omega: f64 },
    Stirap(StirapPulses),
    /// `theta` fixed; the eigenframe angle `phi = phi0 + phi_rate * s` is
    /// driven through `Omega = Delta tan(2 phi)`. Needs `Delta != 0`.
    MixingRamp { theta: f64, phi0: f64, phi_rate: f64 },
}

/// Instantaneous control values and their path-time derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThreeLevelControls {
    pub theta: f64,
    pub theta_dot: f64,
    pub omega: f64,
    pub omega_dot: f64,
    pub delta: f64,
}

impl ThreeLevelControls {
    pub fn pump(&self) -> f64 {
        self.omega * self.theta.sin()
    }

    pub fn stokes(&self) -> f64 {
        self.omega * self.theta.cos()
    }

    /// Eigenframe angle with `tan(2 phi) = Omega / Delta`, `phi = pi/4` on
    /// resonance.
    pub fn mixing_angle(&self) -> f64 {
        if self.delta == 0.0 {
            FRAC_PI_4
        } else {
            0.5 * self.omega.atan2(self.delta)
        }
    }

    pub fn mixing_angle_dot(&self) -> f64 {
        if self.delta == 0.0 {
            0.0
        } else {
            0.5 * self.omega_dot * self.delta / (self.omega * self.omega + self.delta * self.delta)
        }
    }
}

/// Lambda system in the `{|g>, |e>, |a>}` basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeLevelPath {
    pub drive: ThreeLevelDrive,
    pub delta: f64,
    pub tau_path: f64,
}

impl ThreeLevelPath {
    pub fn new(drive: ThreeLevelDrive, delta: f64, tau_path: f64) -> Result<Self> {
        if !(tau_path > 0.0) || !tau_path.is_finite() {
            return Err(Error::InvalidParameter(format!("tau_path must be positive, got {tau_path}")));
        }
        if matches!(drive, ThreeLevelDrive::MixingRamp { .. }) && delta == 0.0 {
            return Err(Error::InvalidParameter("mixing ramp needs a non-zero detuning".into()));
        }
        Ok(Self { drive, delta, tau_path })
    }

    pub fn controls(&self, s: f64) -> ThreeLevelControls {
        let delta = self.delta;
        match &self.drive {
            ThreeLevelDrive::Linear { theta0, theta_rate, omega } => ThreeLevelControls {
                theta: theta0 + theta_rate * s,
                theta_dot: *theta_rate,
                omega: *omega,
                omega_dot: 0.0,
                delta,
            },
            ThreeLevelDrive::Stirap(p) => {
                let (wp, ws) = (p.pump(s), p.stokes(s));
                let w2 = wp * wp + ws * ws;
                let omega = w2.sqrt();
                let (theta_dot, omega_dot) = if w2 > 0.0 {
                    let (dp, ds) = (p.pump_dot(s), p.stokes_dot(s));
                    ((dp * ws - wp * ds) / w2, (wp * dp + ws * ds) / omega)
                } else {
                    (0.0, 0.0)
                };
                ThreeLevelControls { theta: wp.atan2(ws), theta_dot, omega, omega_dot, delta }
            }
            ThreeLevelDrive::MixingRamp { theta, phi0, phi_rate } => {
                let phi = phi0 + phi_rate * s;
                let sec = 1.0 / (2.0 * phi).cos();
                ThreeLevelControls {
                    theta: *theta,
                    theta_dot: 0.0,
                    omega: delta * (2.0 * phi).tan(),
                    omega_dot: 2.0 * phi_rate * delta * sec * sec,
                    delta,
                }
            }
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

/// `H = (1/2) [[0, Wp, 0], [Wp, 2 Delta, Ws], [0, Ws, 0]]`.
pub fn three_level_hamiltonian(pump: f64, stokes: f64, delta: f64) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(3);
    h[(0, 1)] = C64::new(0.5 * pump, 0.0);
    h[(1, 0)] = h[(0, 1)];
    h[(1, 2)] = C64::new(0.5 * stokes, 0.0);
    h[(2, 1)] = h[(1, 2)];
    h[(1, 1)] = C64::new(delta, 0.0);
    h
}

/// Analytic frame: bright-excited mixtures `|1>`, `|3>` and the dark state
/// `|2> = cos(theta)|g> - sin(theta)|a>`.
pub fn three_level_frame(c: &ThreeLevelControls) -> EigenFrame {
    let (st, ct) = c.theta.sin_cos();
    let phi = c.mixing_angle();
    let (sp, cp) = phi.sin_cos();
    let re = |x: f64| C64::new(x, 0.0);
    let states = ComplexMatrix::from_rows(&[
        vec![re(st * cp), re(ct), re(st * sp)],
        vec![re(-sp), re(0.0), re(cp)],
        vec![re(ct * cp), re(-st), re(ct * sp)],
    ])
    .expect("3x3");

    let root = (c.delta * c.delta + c.omega * c.omega).sqrt();
    let energies = vec![0.5 * (c.delta - root), 0.0, 0.5 * (c.delta + root)];

    let mut g = ComplexMatrix::zeros(3);
    g[(0, 1)] = C64::new(0.0, -c.theta_dot * cp);
    g[(0, 2)] = C64::new(0.0, c.mixing_angle_dot());
    g[(1, 2)] = C64::new(0.0, c.theta_dot * sp);
    for (r, col) in [(0, 1), (0, 2), (1, 2)] {
        g[(col, r)] = g[(r, col)].conj();
    }
    EigenFrame { energies, states, couplings: g }
}

/// Hamiltonian and analytic eigenframe with the path moving.
pub fn three_level_eval(path: &ThreeLevelPath, t_path: f64) -> Result<(ComplexMatrix, EigenFrame)> {
    path.check_time(t_path)?;
    let c = path.controls(t_path);
    if c.omega < 0.0 {
        return Err(Error::NegativeEnvelope(c.omega));
    }
    Ok((three_level_hamiltonian(c.pump(), c.stokes(), c.delta), three_level_frame(&c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::frame::finite_difference_couplings;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn linear(theta0: f64, rate: f64, omega: f64, delta: f64) -> ThreeLevelPath {
        ThreeLevelPath::new(ThreeLevelDrive::Linear { theta0, theta_rate: rate, omega }, delta, 1.0).unwrap()
    }

    #[test]
    fn dark_state_at_theta_zero() {
        let (_, f) = three_level_eval(&linear(0.0, 0.0, 2.0, 0.0), 0.0).unwrap();
        let dark = f.state(1);
        assert_eq!(dark, vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        for n in 0..3 {
            assert_eq!(f.coupling(n, n), C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn resonant_energies() {
        let omega = 2.0 * PI * 8.0;
        let (h, f) = three_level_eval(&linear(PI / 4.0, 0.0, omega, 0.0), 0.0).unwrap();
        assert!((f.energies[0] + omega / 2.0).abs() < 1e-12);
        assert_eq!(f.energies[1], 0.0);
        assert!((f.energies[2] - omega / 2.0).abs() < 1e-12);
        let eig = crate::linalg::eigh(&h).unwrap();
        for (a, b) in eig.values.iter().zip(&f.energies) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn resonant_couplings_match_finite_differences() {
        let r = 1.7;
        let path = linear(0.2, r, 3.0, 0.0);
        let (_, f) = three_level_eval(&path, 0.3).unwrap();
        assert!((f.coupling(0, 1) - C64::new(0.0, -r * FRAC_1_SQRT_2)).norm() < 1e-14);
        assert!((f.coupling(1, 2) - C64::new(0.0, r * FRAC_1_SQRT_2)).norm() < 1e-14);
        assert_eq!(f.coupling(0, 2), C64::new(0.0, 0.0));
        let fd = finite_difference_couplings(|s| three_level_eval(&path, s).map(|x| x.1), 0.3, 1e-4).unwrap();
        assert!((&fd - &f.couplings).frobenius_norm() < 1e-7);
    }

    #[test]
    fn detuned_frame_diagonalizes() {
        for delta in [-2.0, 0.7, 3.0] {
            let path = linear(0.9, 0.4, 2.5, delta);
            let (h, f) = three_level_eval(&path, 0.5).unwrap();
            for n in 0..3 {
                let v = f.state(n);
                let hv = h.apply(&v);
                for k in 0..3 {
                    assert!((hv[k] - v[k] * f.energies[n]).norm() < 1e-12);
                }
            }
            assert!(f.orthonormality_deviation() < 1e-12);
        }
    }

    #[test]
    fn mixing_ramp_couplings() {
        let path = ThreeLevelPath::new(
            ThreeLevelDrive::MixingRamp { theta: 0.6, phi0: 0.2, phi_rate: 0.3 },
            1.5,
            1.0,
        )
        .unwrap();
        let (_, f) = three_level_eval(&path, 0.4).unwrap();
        assert!((f.coupling(0, 2) - C64::new(0.0, 0.3)).norm() < 1e-12);
        let fd = finite_difference_couplings(|s| three_level_eval(&path, s).map(|x| x.1), 0.4, 1e-4).unwrap();
        assert!((&fd - &f.couplings).frobenius_norm() < 1e-7);
    }

    #[test]
    fn stirap_couplings_match_finite_differences() {
        let p = StirapPulses::standard(100.0, 0.64);
        let path = ThreeLevelPath::new(ThreeLevelDrive::Stirap(p), 0.0, 0.64).unwrap();
        for s in [0.1, 0.32, 0.5] {
            let (_, f) = three_level_eval(&path, s).unwrap();
            let fd = finite_difference_couplings(|t| three_level_eval(&path, t).map(|x| x.1), s, 1e-6).unwrap();
            assert!((&fd - &f.couplings).frobenius_norm() < 1e-5 * f.couplings.frobenius_norm().max(1.0));
        }
    }

    #[test]
    fn negative_envelope_rejected() {
        assert_eq!(three_level_eval(&linear(0.0, 0.0, -1.0, 0.0), 0.0).unwrap_err(), Error::NegativeEnvelope(-1.0));
    }
}
