//! Runs experiments: walks the timeline, propagates `U` and `U_T`, keeps the
//! phase ledger and records the trajectory.

use serde::{Deserialize, Serialize};

use crate::decomposition::{
    adiabatic_unitaries, check_rae_conditions, transition_hamiltonian, AdiabaticFactorization, ConditionReport,
    ConditionSample, ConditionTolerances,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{Drive, EigenFrame, Evaluation, PhaseLedger};
use crate::linalg::{expm_unitary, ComplexMatrix, UnitaryMatrix, C64};
use crate::metrics::{deviation, fidelity, populations, Sample, Trajectory};
use crate::protocols::Experiment;
use crate::schedule::{assemble_timeline, Segment, SegmentKind};

const MIN_PULSE_SAMPLES: usize = 10;
const PATH_PROBES: [f64; 3] = [0.25, 0.5, 0.75];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub final_fidelity: f64,
    pub final_deviation: f64,
    pub basis_labels: Vec<String>,
    pub final_populations: Vec<f64>,
    /// Largest recorded `|e>` population.
    pub max_e_population: f64,
    pub tau_total: f64,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub trajectory: Trajectory,
    pub factorization: AdiabaticFactorization,
    pub condition_report: ConditionReport,
    pub summary: RunSummary,
    /// `max ||U - U_A U_T||_F` over recorded samples.
    pub factorization_residual: f64,
    /// `max ||U^dag U - I||_F` over recorded samples.
    pub unitarity_max: f64,
    /// Change of `phi_{1,2}` across each pulse window, in order.
    pub pulse_phase_jumps: Vec<f64>,
}

fn evaluate(exp: &Experiment, seg: &Segment, t: f64) -> Result<Evaluation> {
    let drive = match seg.kind {
        SegmentKind::Path { .. } => Drive::Path,
        SegmentKind::Pulse { .. } => Drive::Frozen { amplitude: exp.schedule.pulse_amp },
    };
    exp.path.evaluate(seg.path_time(t), drive)
}

fn steps_in(seg: &Segment, step: f64) -> usize {
    ((seg.duration() / step) - 1e-9).ceil().max(1.0) as usize
}

struct Recorder<'a> {
    exp: &'a Experiment,
    initial: EigenFrame,
    trajectory: Trajectory,
    factorization: AdiabaticFactorization,
    unitarity_max: f64,
}

impl Recorder<'_> {
    #[allow(clippy::too_many_arguments)]
    fn record(&mut self, t_wall: f64, t_path: f64, pulse: Option<usize>, eval: &Evaluation, ledger: &PhaseLedger, u: &UnitaryMatrix, u_t: &UnitaryMatrix) -> Result<()> {
        let (u_d, u_g) = adiabatic_unitaries(&self.initial, &eval.frame, ledger);
        let u_a = &u_d * &u_g;
        self.unitarity_max = self.unitarity_max.max(u.unitarity_deviation());
        let state = u.apply(&self.exp.psi_initial);
        self.trajectory.samples.push(Sample {
            t_wall,
            t_path,
            populations: populations(&state)?,
            state,
            fidelity: fidelity(u, &self.exp.psi_initial, &self.exp.psi_target)?,
            deviation: deviation(u, &u_a, &self.exp.psi_initial)?,
            omega: eval.controls.omega,
            theta: eval.controls.theta,
            phi: eval.controls.phi,
            pulse,
        });
        let f = &mut self.factorization;
        f.wall_times.push(t_wall);
        f.u_full.push(u.clone());
        f.u_adiabatic.push(u_a);
        f.u_dynamical.push(u_d);
        f.u_geometric.push(u_g);
        f.u_transition.push(u_t.clone());
        Ok(())
    }
}

/// Propagates one experiment with its configured step.
///
/// Each segment is split into equal steps no longer than the grid step so
/// that segment boundaries lie on the grid. `U` and `U_T` advance with the
/// midpoint exponential; the phase ledger integrates by trapezoids on half
/// steps using the segment's own one-sided frames.
pub fn run_experiment(exp: &Experiment) -> Result<RunResult> {
    exp.validate()?;
    let timeline = assemble_timeline(&exp.schedule)?;
    let dim = exp.dim();
    let first = timeline.segments.first().ok_or(Error::EmptyGrid)?;
    let start = evaluate(exp, first, 0.0)?;
    let initial_states = start.frame.states.clone();
    let labels: Vec<String> = exp.path.basis_labels().iter().map(|s| s.to_string()).collect();

    let mut rec = Recorder {
        exp,
        initial: start.frame.clone(),
        trajectory: Trajectory { basis_labels: labels.clone(), samples: Vec::new() },
        factorization: AdiabaticFactorization::default(),
        unitarity_max: 0.0,
    };
    let mut u = UnitaryMatrix::identity(dim);
    let mut u_t = UnitaryMatrix::identity(dim);
    let mut ledger = PhaseLedger::zero(dim, 0.0);
    let mut integral = ComplexMatrix::zeros(dim);
    let mut probes: Vec<ConditionSample> = Vec::new();
    rec.record(0.0, 0.0, None, &start, &ledger, &u, &u_t)?;

    let mut step_count = 0usize;
    let mut pulse_phase_jumps = Vec::with_capacity(exp.schedule.k);
    for seg in &timeline.segments {
        if seg.duration() <= 0.0 {
            continue;
        }
        let pulse = match seg.kind {
            SegmentKind::Pulse { index, .. } => Some(index),
            SegmentKind::Path { .. } => None,
        };
        let phi_before = ledger.phi(0, 1);
        let n = steps_in(seg, exp.grid_step);
        if seg.is_pulse() && n < MIN_PULSE_SAMPLES {
            return Err(Error::StepTooCoarse { step: exp.grid_step, width: seg.duration(), samples: n });
        }
        let probe_steps: Vec<usize> = match seg.kind {
            SegmentKind::Path { .. } => PATH_PROBES.iter().map(|f| ((n as f64 * f) as usize).min(n - 1)).collect(),
            SegmentKind::Pulse { .. } => vec![n / 2],
        };
        let dt = seg.duration() / n as f64;
        let mut frame_a = evaluate(exp, seg, seg.wall_start)?.frame;
        for i in 0..n {
            let t0 = seg.wall_start + i as f64 * dt;
            let t1 = if i + 1 == n { seg.wall_end } else { seg.wall_start + (i + 1) as f64 * dt };
            let tm = 0.5 * (t0 + t1);
            let h = t1 - t0;
            let mid = evaluate(exp, seg, tm)?;
            let end = evaluate(exp, seg, t1)?;

            u = &expm_unitary(&mid.hamiltonian, h)? * &u;
            let ledger_mid = ledger.advance(tm, &frame_a, &mid.frame)?;
            let h_t = transition_hamiltonian(tm, &mid.frame, &ledger_mid, &initial_states)?;
            u_t = &expm_unitary(&h_t, h)? * &u_t;
            for a in 0..dim {
                for b in 0..dim {
                    if a != b {
                        integral[(a, b)] += C64::from_polar(1.0, ledger_mid.phi(a, b)) * mid.frame.coupling(a, b) * h;
                    }
                }
            }
            if probe_steps.contains(&i) {
                probes.push(ConditionSample {
                    t_wall: tm,
                    segment: seg.kind,
                    frame: mid.frame.clone(),
                    ledger: ledger_mid.clone(),
                    transition_hamiltonian: h_t,
                });
            }
            ledger = ledger_mid.advance(t1, &mid.frame, &end.frame)?;
            step_count += 1;
            if step_count.is_multiple_of(exp.record_stride) || i + 1 == n {
                rec.record(t1, seg.path_time(t1), pulse, &end, &ledger, &u, &u_t)?;
            }
            frame_a = end.frame;
        }
        if pulse.is_some() {
            pulse_phase_jumps.push(ledger.phi(0, 1) - phi_before);
        }
    }

    let condition_report = check_rae_conditions(&exp.schedule, &probes, &integral, &ConditionTolerances::default());
    let factorization_residual = rec.factorization.residual()?;
    let last = rec.trajectory.last().ok_or(Error::EmptyGrid)?;
    let e_index = 1;
    let summary = RunSummary {
        label: exp.label.clone(),
        final_fidelity: last.fidelity,
        final_deviation: last.deviation,
        basis_labels: labels,
        final_populations: last.populations.clone(),
        max_e_population: rec.trajectory.samples.iter().map(|s| s.populations[e_index]).fold(f64::NEG_INFINITY, f64::max),
        tau_total: last.t_wall,
    };
    Ok(RunResult {
        trajectory: rec.trajectory,
        factorization: rec.factorization,
        condition_report,
        summary,
        factorization_residual,
        unitarity_max: rec.unitarity_max,
        pulse_phase_jumps,
    })
}

/// Runs each experiment in order on the current thread.
pub fn sweep_serial(exps: &[Experiment]) -> Vec<Result<RunResult>> {
    exps.iter().map(run_experiment).collect()
}

/// Runs experiments concurrently on the rayon pool; results keep input order.
#[cfg(feature = "parallel")]
pub fn sweep_parallel(exps: &[Experiment]) -> Vec<Result<RunResult>> {
    use rayon::prelude::*;
    exps.par_iter().map(run_experiment).collect()
}

/// Runs a nonempty list of independent experiments, concurrently when the
/// `parallel` feature is enabled.
pub fn sweep(exps: &[Experiment]) -> Result<Vec<Result<RunResult>>> {
    if exps.is_empty() {
        return Err(Error::InvalidParameter("sweep needs at least one experiment".into()));
    }
    #[cfg(feature = "parallel")]
    {
        Ok(sweep_parallel(exps))
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok(sweep_serial(exps))
    }
}
