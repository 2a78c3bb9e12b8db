//! Pi-pulse schedules and the wall-clock timeline that interleaves path
//! evolution with path-frozen pulse windows.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Flip instants `t_j = (2j - 1) tau / 2K`, `j = 1..K`.
pub fn switching_times(tau_path: f64, k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::ZeroPulses);
    }
    if !(tau_path > 0.0) {
        return Err(Error::InvalidParameter(format!("tau_path must be positive, got {tau_path}")));
    }
    Ok((1..=k).map(|j| (2 * j - 1) as f64 * tau_path / (2 * k) as f64).collect())
}

/// Which level pair a pulse flips, and hence the gap it accumulates phase at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseModel {
    /// Gap `E_{1,2} = Omega`.
    TwoLevel,
    /// Resonant lambda system, gap `E_{1,2} = E_{2,3} = Omega / 2`.
    ThreeLevelResonant,
}

impl PulseModel {
    pub fn gap(&self, pulse_amp: f64) -> f64 {
        match self {
            Self::TwoLevel => pulse_amp,
            Self::ThreeLevelResonant => 0.5 * pulse_amp,
        }
    }
}

/// Width of a frozen-path pulse that accumulates `target_phase` across the
/// flipped pair.
pub fn pulse_width(model: PulseModel, pulse_amp: f64, target_phase: f64) -> Result<f64> {
    if !(pulse_amp > 0.0) || !pulse_amp.is_finite() {
        return Err(Error::InvalidParameter(format!("pulse amplitude must be positive, got {pulse_amp}")));
    }
    Ok(target_phase / model.gap(pulse_amp))
}

/// Default pi-flip width.
pub fn pi_pulse_width(model: PulseModel, pulse_amp: f64) -> Result<f64> {
    pulse_width(model, pulse_amp, PI)
}

/// How strictly pulse windows are checked against the path segments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowPolicy {
    /// Each window `[t_j - delta_j, t_j]` must fit in the preceding path
    /// segment.
    WithinSegment,
    /// Path segments are drive-off dwells; windows may be longer.
    Dwell,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub k: usize,
    /// Path-time switching instants, one per pulse.
    pub t_switch: Vec<f64>,
    /// Pulse widths, us.
    pub delta: Vec<f64>,
    /// Pulse amplitude, rad/us.
    pub pulse_amp: f64,
    /// `Delta(0) .. Delta(K)`, us.
    pub segment_durations: Vec<f64>,
    pub tau_path: f64,
    pub tau_total: f64,
    pub window_policy: WindowPolicy,
}

impl PulseSchedule {
    /// General constructor; `t_switch` must lie strictly inside `(0, tau_path)`
    /// and increase.
    pub fn new(tau_path: f64, t_switch: Vec<f64>, delta: Vec<f64>, pulse_amp: f64, window_policy: WindowPolicy) -> Result<Self> {
        if !(tau_path > 0.0) {
            return Err(Error::InvalidParameter(format!("tau_path must be positive, got {tau_path}")));
        }
        if t_switch.len() != delta.len() {
            return Err(Error::LengthMismatch(t_switch.len(), delta.len()));
        }
        let mut prev = 0.0;
        for (i, &t) in t_switch.iter().enumerate() {
            if !(t > prev) || !(t < tau_path) {
                return Err(Error::InvalidParameter(format!("switching time {i} = {t} out of order")));
            }
            prev = t;
        }
        if delta.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
            return Err(Error::InvalidParameter("pulse widths must be positive".into()));
        }
        let mut segment_durations = Vec::with_capacity(t_switch.len() + 1);
        let mut start = 0.0;
        for &t in &t_switch {
            segment_durations.push(t - start);
            start = t;
        }
        segment_durations.push(tau_path - start);
        let tau_total = tau_path + delta.iter().sum::<f64>();
        Ok(Self { k: t_switch.len(), t_switch, delta, pulse_amp, segment_durations, tau_path, tau_total, window_policy })
    }

    /// `K` equal-spacing pi flips of width `pi / gap(pulse_amp)`.
    pub fn pi_flips(tau_path: f64, k: usize, model: PulseModel, pulse_amp: f64, window_policy: WindowPolicy) -> Result<Self> {
        let t_switch = switching_times(tau_path, k)?;
        let width = pi_pulse_width(model, pulse_amp)?;
        Self::new(tau_path, t_switch, vec![width; k], pulse_amp, window_policy)
    }

    /// Uninterrupted path, no pulses.
    pub fn empty(tau_path: f64) -> Result<Self> {
        Self::new(tau_path, Vec::new(), Vec::new(), 0.0, WindowPolicy::WithinSegment)
    }

    /// `sum_j (-1)^j Delta(j)`.
    pub fn alternating_sum(&self) -> f64 {
        self.segment_durations
            .iter()
            .enumerate()
            .map(|(j, d)| if j % 2 == 0 { *d } else { -*d })
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentKind {
    /// Path segment `j` (0-based, `j` flips already applied).
    Path { index: usize },
    /// Pulse `j` (1-based) with the path frozen at `t_path`.
    Pulse { index: usize, frozen_at: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub wall_start: f64,
    pub wall_end: f64,
    /// Path time at `wall_start`.
    pub path_start: f64,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.wall_end - self.wall_start
    }

    pub fn is_pulse(&self) -> bool {
        matches!(self.kind, SegmentKind::Pulse { .. })
    }

    /// Path time at wall time `t` inside this segment.
    pub fn path_time(&self, t: f64) -> f64 {
        match self.kind {
            SegmentKind::Path { .. } => self.path_start + (t - self.wall_start),
            SegmentKind::Pulse { frozen_at, .. } => frozen_at,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub segments: Vec<Segment>,
}

impl Timeline {
    pub fn tau_total(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.wall_end)
    }

    pub fn pulse_windows(&self) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(|s| s.is_pulse())
    }
}

/// Interleaves path segments with pulse windows. Pulse `j` ends at the wall
/// time where the path resumes from `t_j`; the path is frozen at `t_j` inside
/// the window.
pub fn assemble_timeline(schedule: &PulseSchedule) -> Result<Timeline> {
    if schedule.window_policy == WindowPolicy::WithinSegment {
        for (j, (&width, &available)) in schedule.delta.iter().zip(&schedule.segment_durations).enumerate() {
            if width > available {
                return Err(Error::OverlappingPulse { index: j + 1, width, available });
            }
        }
    }
    let mut segments = Vec::with_capacity(2 * schedule.k + 1);
    let mut wall = 0.0;
    let mut path = 0.0;
    for (j, &duration) in schedule.segment_durations.iter().enumerate() {
        segments.push(Segment { kind: SegmentKind::Path { index: j }, wall_start: wall, wall_end: wall + duration, path_start: path });
        wall += duration;
        path += duration;
        if j < schedule.k {
            let frozen_at = schedule.t_switch[j];
            let width = schedule.delta[j];
            segments.push(Segment {
                kind: SegmentKind::Pulse { index: j + 1, frozen_at },
                wall_start: wall,
                wall_end: wall + width,
                path_start: frozen_at,
            });
            wall += width;
            path = frozen_at;
        }
    }
    Ok(Timeline { segments })
}
