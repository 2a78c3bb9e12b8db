//! Experiment builders: the two-level path families, the three-level
//! pi-pulse dark-state transfer and its matched-area STIRAP baseline.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

pub use crate::hamiltonian::StirapPulses;
use crate::hamiltonian::{ControlPath, ThreeLevelDrive, ThreeLevelPath, TwoLevelPath};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::metrics::check_normalized;
use crate::schedule::{assemble_timeline, pulse_width, PulseModel, PulseSchedule, SegmentKind, WindowPolicy};
use crate::units::mhz_to_rad_per_us;

/// Path duration of the two-level experiments, us.
pub const TWO_LEVEL_TAU_PATH: f64 = 9.9;
/// Pulse count of the two-level experiments.
pub const TWO_LEVEL_PULSES: usize = 5;
/// Total drive-off dwell of the three-level pi-pulse runs, us.
pub const THREE_LEVEL_DWELL: f64 = 0.015;
pub const DEFAULT_TWO_LEVEL_STEP: f64 = 1e-4;
pub const DEFAULT_THREE_LEVEL_STEP: f64 = 2e-5;
pub const DEFAULT_RECORD_STRIDE: usize = 10;
const MIN_PULSE_SAMPLES: usize = 10;

/// A fully specified run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub label: String,
    pub path: ControlPath,
    pub schedule: PulseSchedule,
    pub psi_initial: Vec<C64>,
    pub psi_target: Vec<C64>,
    /// Propagation step, us.
    pub grid_step: f64,
    /// Record every `record_stride`-th step (segment ends are always kept).
    pub record_stride: usize,
}

impl Experiment {
    pub fn new(
        label: impl Into<String>,
        path: ControlPath,
        schedule: PulseSchedule,
        psi_initial: Vec<C64>,
        psi_target: Vec<C64>,
        grid_step: f64,
    ) -> Result<Self> {
        let exp = Self {
            label: label.into(),
            path,
            schedule,
            psi_initial,
            psi_target,
            grid_step,
            record_stride: DEFAULT_RECORD_STRIDE,
        };
        exp.validate()?;
        Ok(exp)
    }

    pub fn dim(&self) -> usize {
        self.path.dim()
    }

    pub fn with_step(mut self, grid_step: f64) -> Result<Self> {
        self.grid_step = grid_step;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        for psi in [&self.psi_initial, &self.psi_target] {
            if psi.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: psi.len() });
            }
            check_normalized(psi)?;
        }
        if !(self.grid_step > 0.0) || !self.grid_step.is_finite() {
            return Err(Error::InvalidParameter(format!("grid step must be positive, got {}", self.grid_step)));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidParameter("record stride must be at least 1".into()));
        }
        let tau = self.path.tau_path();
        if (self.schedule.tau_path - tau).abs() > 1e-12 * tau {
            return Err(Error::InvalidParameter(format!(
                "schedule spans {} us of path time, path has {tau} us",
                self.schedule.tau_path
            )));
        }
        for &width in &self.schedule.delta {
            let samples = (width / self.grid_step + 1e-9).floor() as usize;
            if samples < MIN_PULSE_SAMPLES {
                return Err(Error::StepTooCoarse { step: self.grid_step, width, samples });
            }
        }
        Ok(())
    }

    /// Integrated pump and Stokes envelopes over the wall-clock timeline,
    /// midpoint rule at the experiment's step. Two-level runs report the
    /// single envelope twice.
    pub fn pulse_areas(&self) -> Result<(f64, f64)> {
        let timeline = assemble_timeline(&self.schedule)?;
        let (mut pump, mut stokes) = (0.0, 0.0);
        for seg in &timeline.segments {
            let n = ((seg.duration() / self.grid_step) - 1e-9).ceil().max(1.0) as usize;
            let dt = seg.duration() / n as f64;
            for i in 0..n {
                let t = seg.wall_start + (i as f64 + 0.5) * dt;
                let drive = match seg.kind {
                    SegmentKind::Pulse { .. } => crate::hamiltonian::Drive::Frozen { amplitude: self.schedule.pulse_amp },
                    SegmentKind::Path { .. } => crate::hamiltonian::Drive::Path,
                };
                let c = self.path.evaluate(seg.path_time(t), drive)?.controls;
                match self.path {
                    ControlPath::TwoLevel(_) => {
                        pump += c.omega * dt;
                        stokes += c.omega * dt;
                    }
                    ControlPath::ThreeLevel(_) => {
                        pump += c.omega * c.theta.sin() * dt;
                        stokes += c.omega * c.theta.cos() * dt;
                    }
                }
            }
        }
        Ok((pump, stokes))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TwoLevelCase {
    /// Meridian `theta: 0 -> pi`.
    I,
    /// Parallel at `theta = pi/5`, `phi: 0 -> pi`.
    Ii,
    /// `theta: pi/5 -> 4pi/5`, `phi: 0 -> pi` with constant complex coupling.
    Iii,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// 25 MHz pulses, 0.02 us wide.
    Ideal,
    /// 1 MHz pulses, 0.5 us wide.
    Practical,
}

impl Regime {
    /// Pulse amplitude, rad/us.
    pub fn pulse_amp(&self) -> f64 {
        match self {
            Self::Ideal => mhz_to_rad_per_us(25.0),
            Self::Practical => mhz_to_rad_per_us(1.0),
        }
    }
}

fn ket(amplitudes: &[C64]) -> Vec<C64> {
    amplitudes.to_vec()
}

fn basis(dim: usize, index: usize) -> Vec<C64> {
    (0..dim).map(|i| C64::new(if i == index { 1.0 } else { 0.0 }, 0.0)).collect()
}

/// Upper eigenstate `cos(theta/2)|g> + e^{i phi} sin(theta/2)|e>`.
fn bloch_state(theta: f64, phi: f64) -> Vec<C64> {
    ket(&[C64::new((0.5 * theta).cos(), 0.0), C64::from_polar((0.5 * theta).sin(), phi)])
}

/// Two-level experiment on a 9.9 us path with five pi flips; the system
/// starts and should end in the upper eigenstate of the path endpoints.
pub fn build_two_level_case(case: TwoLevelCase, regime: Regime) -> Result<Experiment> {
    let tau = TWO_LEVEL_TAU_PATH;
    let (path, start, end) = match case {
        TwoLevelCase::I => (TwoLevelPath::meridian(0.0, PI, 0.0, tau)?, (0.0, 0.0), (PI, 0.0)),
        TwoLevelCase::Ii => (TwoLevelPath::parallel(PI / 5.0, 0.0, PI, tau)?, (PI / 5.0, 0.0), (PI / 5.0, PI)),
        TwoLevelCase::Iii => {
            (TwoLevelPath::general(PI / 5.0, 4.0 * PI / 5.0, 0.0, PI, tau)?, (PI / 5.0, 0.0), (4.0 * PI / 5.0, PI))
        }
    };
    let schedule =
        PulseSchedule::pi_flips(tau, TWO_LEVEL_PULSES, PulseModel::TwoLevel, regime.pulse_amp(), WindowPolicy::WithinSegment)?;
    let name = match case {
        TwoLevelCase::I => "i",
        TwoLevelCase::Ii => "ii",
        TwoLevelCase::Iii => "iii",
    };
    let regime_name = match regime {
        Regime::Ideal => "ideal",
        Regime::Practical => "practical",
    };
    Experiment::new(
        format!("two-level-case-{name}-{regime_name}"),
        ControlPath::TwoLevel(path),
        schedule,
        bloch_state(start.0, start.1),
        bloch_state(end.0, end.1),
        DEFAULT_TWO_LEVEL_STEP,
    )
}

/// Flip angles `theta_j = (2j - 1) pi / 4K`.
pub fn three_level_flip_angles(k: usize) -> Vec<f64> {
    (1..=k).map(|j| (2 * j - 1) as f64 * PI / (4 * k) as f64).collect()
}

/// `2 pi sum_j sin(theta_j)`, the pump area of the `K`-pulse transfer.
pub fn three_level_pump_area(k: usize) -> f64 {
    TAU * three_level_flip_angles(k).iter().map(|t| t.sin()).sum::<f64>()
}

/// Dark-state transfer `|g> -> |a>` by `K` resonant square pulses of width
/// `2 pi / Omega` at `theta_j`, with the drive off in between.
pub fn build_three_level_pipulse(k: usize, pulse_amp: f64) -> Result<Experiment> {
    if k == 0 {
        return Err(Error::ZeroPulses);
    }
    let tau = THREE_LEVEL_DWELL;
    let drive = ThreeLevelDrive::Linear { theta0: 0.0, theta_rate: FRAC_PI_2 / tau, omega: 0.0 };
    let path = ThreeLevelPath::new(drive, 0.0, tau)?;
    let schedule = PulseSchedule::pi_flips(tau, k, PulseModel::ThreeLevelResonant, pulse_amp, WindowPolicy::Dwell)?;
    Experiment::new(format!("three-level-K{k}"), ControlPath::ThreeLevel(path), schedule, basis(3, 0), basis(3, 2), DEFAULT_THREE_LEVEL_STEP)
}

/// Amplitude whose pump Gaussian, truncated to `[0, tau]`, has area
/// `target_area`.
pub fn matched_amplitude(tau: f64, delay: f64, sigma: f64, target_area: f64) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("gaussian width must be positive, got {sigma}")));
    }
    if !(tau > 0.0) || !(target_area > 0.0) || !(delay >= 0.0) {
        return Err(Error::InvalidParameter("tau, delay and target area must be positive".into()));
    }
    let unit = StirapPulses { amp: 1.0, tau, delay, sigma };
    let area = simpson(|t| unit.pump(t), 0.0, tau, 1 << 14);
    if !(area > 0.0) {
        return Err(Error::InvalidParameter(format!("gaussian width {sigma} leaves no area on [0, {tau}]")));
    }
    Ok(target_area / area)
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

/// Resonant STIRAP over `[0, tau]` with delay `tau/10`, width `tau/6` and the
/// pump area matched to `target_area`.
pub fn build_stirap(tau: f64, target_area: f64) -> Result<Experiment> {
    let template = StirapPulses::standard(1.0, tau);
    let amp = matched_amplitude(tau, template.delay, template.sigma, target_area)?;
    let pulses = StirapPulses { amp, ..template };
    let path = ThreeLevelPath::new(ThreeLevelDrive::Stirap(pulses), 0.0, tau)?;
    Experiment::new(
        format!("stirap-tau{tau}"),
        ControlPath::ThreeLevel(path),
        PulseSchedule::empty(tau)?,
        basis(3, 0),
        basis(3, 2),
        DEFAULT_THREE_LEVEL_STEP,
    )
}

/// Total duration of the `K`-pulse transfer and its STIRAP partner, us.
pub fn paired_tau(k: usize) -> f64 {
    0.125 * k as f64 + THREE_LEVEL_DWELL
}

/// STIRAP partner of the `K`-pulse transfer: same duration, same pump area.
pub fn build_paired_stirap(k: usize) -> Result<Experiment> {
    if k == 0 {
        return Err(Error::ZeroPulses);
    }
    let mut exp = build_stirap(paired_tau(k), three_level_pump_area(k))?;
    exp.label = format!("stirap-K{k}");
    Ok(exp)
}

/// Two-level meridian path whose pulses accumulate `2 pi` instead of `pi`:
/// the schedule looks conforming but the phases never flip.
pub fn full_turn_pulses() -> Result<Experiment> {
    let mut exp = build_two_level_case(TwoLevelCase::I, Regime::Ideal)?;
    let tau = TWO_LEVEL_TAU_PATH;
    let amp = Regime::Ideal.pulse_amp();
    let width = pulse_width(PulseModel::TwoLevel, amp, TAU)?;
    exp.schedule = PulseSchedule::new(tau, exp.schedule.t_switch.clone(), vec![width; TWO_LEVEL_PULSES], amp, WindowPolicy::WithinSegment)?;
    exp.label = "full-turn-pulses".into();
    exp.validate()?;
    Ok(exp)
}

/// Detuned lambda system with fixed `theta` and a linear eigenframe-angle
/// ramp: `g_{1,3}` is a non-zero constant and no pulses are applied.
pub fn detuned_mixing_ramp() -> Result<Experiment> {
    let tau = 1.0;
    let drive = ThreeLevelDrive::MixingRamp { theta: PI / 4.0, phi0: 0.1, phi_rate: 0.5 };
    let path = ThreeLevelPath::new(drive, mhz_to_rad_per_us(5.0), tau)?;
    let mut exp = Experiment::new(
        "detuned-mixing-ramp",
        ControlPath::ThreeLevel(path),
        PulseSchedule::empty(tau)?,
        basis(3, 0),
        basis(3, 2),
        DEFAULT_THREE_LEVEL_STEP,
    )?;
    exp.grid_step = 1e-4;
    Ok(exp)
}

/// A named, compiled-in experiment.
#[derive(Clone, Copy, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
}

const CASES: [(TwoLevelCase, &str); 3] = [(TwoLevelCase::I, "i"), (TwoLevelCase::Ii, "ii"), (TwoLevelCase::Iii, "iii")];
const REGIMES: [(Regime, &str); 2] = [(Regime::Ideal, "ideal"), (Regime::Practical, "practical")];

pub fn presets() -> Vec<Preset> {
    const TWO_LEVEL: [&str; 6] = [
        "two-level-case-i-ideal",
        "two-level-case-i-practical",
        "two-level-case-ii-ideal",
        "two-level-case-ii-practical",
        "two-level-case-iii-ideal",
        "two-level-case-iii-practical",
    ];
    const THREE_LEVEL: [&str; 5] = ["three-level-K1", "three-level-K2", "three-level-K3", "three-level-K4", "three-level-K5"];
    const STIRAP: [&str; 5] = ["stirap-K1", "stirap-K2", "stirap-K3", "stirap-K4", "stirap-K5"];
    let mut out: Vec<Preset> =
        TWO_LEVEL.iter().map(|&name| Preset { name, description: "two-level path with five pi flips" }).collect();
    out.extend(THREE_LEVEL.iter().map(|&name| Preset { name, description: "three-level dark-state transfer by K pi pulses at 8 MHz" }));
    out.extend(STIRAP.iter().map(|&name| Preset { name, description: "STIRAP with duration and pump area of the K-pulse transfer" }));
    out
}

/// Builds the preset called `name`.
pub fn preset(name: &str) -> Result<Experiment> {
    for (case, c) in CASES {
        for (regime, r) in REGIMES {
            if name == format!("two-level-case-{c}-{r}") {
                return build_two_level_case(case, regime);
            }
        }
    }
    let k_of = |prefix: &str| name.strip_prefix(prefix).and_then(|k| k.parse::<usize>().ok()).filter(|k| (1..=5).contains(k));
    if let Some(k) = k_of("three-level-K") {
        return build_three_level_pipulse(k, mhz_to_rad_per_us(8.0));
    }
    if let Some(k) = k_of("stirap-K") {
        return build_paired_stirap(k);
    }
    Err(Error::InvalidParameter(format!("unknown preset '{name}'")))
}

/// The ten paired runs: `K`-pulse transfers then STIRAP, `K = 1..5`.
pub fn paired_sweep() -> Result<Vec<Experiment>> {
    let amp = mhz_to_rad_per_us(8.0);
    let mut out: Vec<Experiment> = (1..=5).map(|k| build_three_level_pipulse(k, amp)).collect::<Result<_>>()?;
    for k in 1..=5 {
        out.push(build_paired_stirap(k)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_i_endpoints() {
        let exp = build_two_level_case(TwoLevelCase::I, Regime::Ideal).unwrap();
        assert_eq!(exp.psi_initial, basis(2, 0));
        assert!((exp.psi_target[0].norm()) < 1e-15 && (exp.psi_target[1].norm() - 1.0).abs() < 1e-15);
        assert!((exp.schedule.tau_total - 10.0).abs() < 1e-12);
        let practical = build_two_level_case(TwoLevelCase::I, Regime::Practical).unwrap();
        assert!((practical.schedule.tau_total - 12.4).abs() < 1e-12);
    }

    #[test]
    fn case_ii_background_drive() {
        let exp = build_two_level_case(TwoLevelCase::Ii, Regime::Ideal).unwrap();
        let ControlPath::TwoLevel(p) = &exp.path else { unreachable!() };
        let w = p.background_omega(3.0).unwrap();
        // cos(pi/5) * pi / 9.9
        assert!((w - (PI / 5.0).cos() * PI / 9.9).abs() < 1e-12);
        assert!((w / TAU - 0.04).abs() < 0.002);
    }

    #[test]
    fn case_iii_target_state() {
        let exp = build_two_level_case(TwoLevelCase::Iii, Regime::Practical).unwrap();
        let expected = [(2.0 * PI / 5.0).cos(), -(2.0 * PI / 5.0).sin()];
        for (a, b) in exp.psi_target.iter().zip(expected) {
            assert!((a - C64::new(b, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn pipulse_flip_angles_and_durations() {
        let five = three_level_flip_angles(5);
        for (j, t) in five.iter().enumerate() {
            assert!((t - (2 * j + 1) as f64 * PI / 20.0).abs() < 1e-15);
        }
        let amp = mhz_to_rad_per_us(8.0);
        let k5 = build_three_level_pipulse(5, amp).unwrap();
        assert!((k5.schedule.tau_total - 0.64).abs() < 1e-12);
        let k1 = build_three_level_pipulse(1, amp).unwrap();
        assert!((k1.schedule.tau_total - 0.14).abs() < 1e-12);
        let ControlPath::ThreeLevel(p) = &k5.path else { unreachable!() };
        for (t, theta) in k5.schedule.t_switch.iter().zip(&five) {
            assert!((p.controls(*t).theta - theta).abs() < 1e-12);
        }
        // sum_j sin((2j-1) pi / 20), evaluated term by term
        let area = TAU * (0.156434465 + 0.453990500 + std::f64::consts::FRAC_1_SQRT_2 + 0.891006524 + 0.987688341);
        assert!((three_level_pump_area(5) - area).abs() < 1e-8);
    }

    #[test]
    fn pipulse_areas_by_quadrature() {
        for k in 1..=5 {
            let exp = build_three_level_pipulse(k, mhz_to_rad_per_us(8.0)).unwrap();
            let (pump, stokes) = exp.pulse_areas().unwrap();
            let angles = three_level_flip_angles(k);
            let want_p = TAU * angles.iter().map(|t| t.sin()).sum::<f64>();
            let want_s = TAU * angles.iter().map(|t| t.cos()).sum::<f64>();
            assert!((pump - want_p).abs() <= 1e-6 * want_p, "K={k}: {pump} vs {want_p}");
            assert!((stokes - want_s).abs() <= 1e-6 * want_s);
        }
    }

    fn bisection_amplitude(tau: f64, delay: f64, sigma: f64, target: f64) -> f64 {
        // trapezoid quadrature on a fine grid, root found by bisection
        let n = 200_000;
        let h = tau / n as f64;
        let g = |t: f64| (-((t - 0.5 * tau - delay) / sigma).powi(2)).exp();
        let area: f64 = (0..=n).map(|i| g(i as f64 * h) * if i == 0 || i == n { 0.5 } else { 1.0 }).sum::<f64>() * h;
        let (mut lo, mut hi) = (0.0, 1e4);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * area < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn matched_amplitude_against_bisection() {
        let target = TAU * 3.1962;
        let amp = matched_amplitude(0.64, 0.064, 0.64 / 6.0, target).unwrap();
        let oracle = bisection_amplitude(0.64, 0.064, 0.64 / 6.0, target);
        assert!((amp - oracle).abs() <= 1e-6 * oracle, "{amp} vs {oracle}");
    }

    #[test]
    fn matched_amplitude_limits() {
        let flat = matched_amplitude(1.0, 0.0, 1e4, 3.0).unwrap();
        assert!((flat - 3.0).abs() < 1e-6);
        let a = matched_amplitude(0.64, 0.064, 0.1, 1.0).unwrap();
        let b = matched_amplitude(0.64, 0.064, 0.1, 2.0).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-12 * b);
        assert!(matches!(matched_amplitude(0.64, 0.064, 0.0, 1.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn stirap_ordering_and_pairing() {
        let exp = build_paired_stirap(5).unwrap();
        let ControlPath::ThreeLevel(p) = &exp.path else { unreachable!() };
        let ThreeLevelDrive::Stirap(pulses) = p.drive else { unreachable!() };
        let stokes_peak = 0.5 * pulses.tau - pulses.delay;
        let pump_peak = 0.5 * pulses.tau + pulses.delay;
        assert!(stokes_peak < pump_peak);
        assert!((pulses.stokes(stokes_peak) - pulses.amp).abs() < 1e-12);
        assert!((exp.schedule.tau_total - 0.64).abs() < 1e-12);
        let pi = build_three_level_pipulse(5, mhz_to_rad_per_us(8.0)).unwrap();
        let (stirap_pump, _) = exp.pulse_areas().unwrap();
        let (pi_pump, _) = pi.pulse_areas().unwrap();
        assert!((stirap_pump - pi_pump).abs() <= 1e-6 * pi_pump, "{stirap_pump} vs {pi_pump}");
    }

    #[test]
    fn presets_resolve() {
        let all = presets();
        assert_eq!(all.len(), 16);
        for p in all {
            assert_eq!(preset(p.name).unwrap().label, p.name);
        }
        assert!(preset("three-level-K6").is_err());
    }

    #[test]
    fn coarse_step_rejected() {
        let exp = build_three_level_pipulse(1, mhz_to_rad_per_us(8.0)).unwrap();
        assert!(matches!(exp.with_step(0.02), Err(Error::StepTooCoarse { samples: 6, .. })));
    }
}
