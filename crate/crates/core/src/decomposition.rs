//! Factorization `U = U_A U_T` into adiabatic and transition parts, and the
//! checker for the pi-flip conditions on a sampled run.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{EigenFrame, PhaseLedger};
use crate::linalg::{propagate_midpoints, ComplexMatrix, UnitaryMatrix, C64};
use crate::schedule::{PulseSchedule, SegmentKind};

const CROSSING_OVERLAP: f64 = 0.5;

/// Unitaries of the factorization, one entry per recorded sample.
#[derive(Clone, Debug, Default)]
pub struct AdiabaticFactorization {
    pub wall_times: Vec<f64>,
    pub u_full: Vec<UnitaryMatrix>,
    pub u_adiabatic: Vec<UnitaryMatrix>,
    pub u_dynamical: Vec<UnitaryMatrix>,
    pub u_geometric: Vec<UnitaryMatrix>,
    pub u_transition: Vec<UnitaryMatrix>,
}

impl AdiabaticFactorization {
    pub fn len(&self) -> usize {
        self.wall_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wall_times.is_empty()
    }

    /// `max_k ||U_k - U_A,k U_T,k||_F`.
    pub fn residual(&self) -> Result<f64> {
        factorization_residual(&self.u_full, &self.u_adiabatic, &self.u_transition)
    }
}

/// Dynamical and geometric parts at one instant:
/// `U_d = sum_n exp(-i int E_n) |n(t)><n(0)|`,
/// `U_g = sum_n exp(i int g_nn) |n(0)><n(0)|`.
pub fn adiabatic_unitaries(initial: &EigenFrame, frame: &EigenFrame, ledger: &PhaseLedger) -> (UnitaryMatrix, UnitaryMatrix) {
    let n = frame.dim();
    let mut u_d = ComplexMatrix::zeros(n);
    let mut u_g = ComplexMatrix::zeros(n);
    for level in 0..n {
        let now = frame.state(level);
        let start = initial.state(level);
        u_d = &u_d + &ComplexMatrix::outer(&now, &start).scale(C64::from_polar(1.0, -ledger.dynamical()[level]));
        u_g = &u_g + &ComplexMatrix::outer(&start, &start).scale(C64::from_polar(1.0, ledger.geometric()[level]));
    }
    (UnitaryMatrix::from_trusted(u_d), UnitaryMatrix::from_trusted(u_g))
}

/// `(U_d, U_g)` at every sample of a time-ordered frame sequence. Frames
/// must be gauge-continuous; an eigenvector that loses overlap with its
/// predecessor is reported as a level crossing.
pub fn adiabatic_operator(times: &[f64], frames: &[EigenFrame]) -> Result<Vec<(UnitaryMatrix, UnitaryMatrix)>> {
    for (k, w) in frames.windows(2).enumerate() {
        let overlaps = &w[0].states.adjoint() * &w[1].states;
        for level in 0..w[0].dim() {
            if overlaps[(level, level)].norm() < CROSSING_OVERLAP {
                return Err(Error::LevelCrossing { t: times[k + 1], level: level + 1 });
            }
        }
    }
    let ledgers = crate::hamiltonian::accumulate_phases(times, frames, None)?;
    let initial = &frames[0];
    Ok(frames.iter().zip(&ledgers).map(|(f, l)| adiabatic_unitaries(initial, f, l)).collect())
}

/// `H_T = -sum_{n != m} exp(i phi_{n,m}) g_{n,m} |n(0)><m(0)|`, expressed in
/// the bare basis through the initial eigenstates.
pub fn transition_hamiltonian(t_wall: f64, frame: &EigenFrame, ledger: &PhaseLedger, initial_states: &ComplexMatrix) -> Result<ComplexMatrix> {
    if (t_wall - ledger.t_wall).abs() > 1e-12 * t_wall.abs().max(1.0) {
        return Err(Error::TimeMismatch { a: t_wall, b: ledger.t_wall });
    }
    let n = frame.dim();
    if ledger.dim() != n || initial_states.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: ledger.dim() });
    }
    let mut m = ComplexMatrix::zeros(n);
    for a in 0..n {
        for b in (a + 1)..n {
            let v = -C64::from_polar(1.0, ledger.phi(a, b)) * frame.coupling(a, b);
            m[(a, b)] = v;
            m[(b, a)] = v.conj();
        }
    }
    let lab = &(initial_states * &m) * &initial_states.adjoint();
    Ok((&lab + &lab.adjoint()).scale(C64::new(0.5, 0.0)))
}

/// `U_T` on `grid` from `H_T` sampled at the interval midpoints.
pub fn transition_operator(midpoint_samples: &[ComplexMatrix], grid: &[f64]) -> Result<Vec<UnitaryMatrix>> {
    propagate_midpoints(midpoint_samples, grid)
}

/// `max_k ||U_k - U_A,k U_T,k||_F`.
pub fn factorization_residual(u_full: &[UnitaryMatrix], u_adiabatic: &[UnitaryMatrix], u_transition: &[UnitaryMatrix]) -> Result<f64> {
    if u_full.len() != u_adiabatic.len() {
        return Err(Error::LengthMismatch(u_full.len(), u_adiabatic.len()));
    }
    if u_full.len() != u_transition.len() {
        return Err(Error::LengthMismatch(u_full.len(), u_transition.len()));
    }
    Ok(u_full
        .iter()
        .zip(u_adiabatic.iter().zip(u_transition))
        .map(|(u, (a, t))| (u.matrix() - (a * t).matrix()).frobenius_norm())
        .fold(0.0, f64::max))
}

/// One probe of a run used by the condition checker.
#[derive(Clone, Debug)]
pub struct ConditionSample {
    pub t_wall: f64,
    pub segment: SegmentKind,
    pub frame: EigenFrame,
    pub ledger: PhaseLedger,
    pub transition_hamiltonian: ComplexMatrix,
}

/// Pass thresholds for each clause.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionTolerances {
    /// rad, per path segment.
    pub phi: f64,
    /// rad/us, odd pairs.
    pub odd_drift: f64,
    /// rad/us, even pairs.
    pub even_abs: f64,
    /// us.
    pub alternating_sum: f64,
    /// rad, `sum_j e^{i j (n-m) pi} g_{n,m} Delta(j)`.
    pub nominal_integral: f64,
    /// `||[H_T(t_i), H_T(t_j)]||_F`.
    pub commutator: f64,
    /// rad, measured `int e^{i phi} g dt`.
    pub transition_integral: f64,
}

impl Default for ConditionTolerances {
    fn default() -> Self {
        Self {
            phi: 1e-3,
            odd_drift: 1e-6,
            even_abs: 1e-9,
            alternating_sum: 1e-9,
            nominal_integral: 1e-9,
            commutator: 1e-8,
            transition_integral: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiClause {
    /// Largest wrapped distance of `phi_{n,m}` from `j (n-m) pi`.
    pub max_deviation: f64,
    pub passed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairParity {
    Odd,
    Even,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCoupling {
    /// 1-based level labels.
    pub n: usize,
    pub m: usize,
    pub parity: PairParity,
    /// Drift from the first sample (odd pairs) or largest magnitude (even).
    pub measure: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GClause {
    pub pairs: Vec<PairCoupling>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumClause {
    /// `sum_j (-1)^j Delta(j)`, us.
    pub alternating_sum: f64,
    /// Largest `|sum_j e^{i j (n-m) pi} g_{n,m}(j) Delta(j)|` over pairs, with
    /// `g_{n,m}(j)` the segment mean.
    pub nominal_integral: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralClause {
    /// Largest `|int_0^tau e^{i phi_{n,m}} g_{n,m} dt|` measured on the run.
    pub max_abs: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaSample {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub t1: f64,
    pub t2: f64,
    /// In `[0, 2 pi)`.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub phi_clause: PhiClause,
    pub g_clause: GClause,
    pub sum_clause: SumClause,
    pub integral_clause: IntegralClause,
    pub commutator_max: f64,
    pub commutator_passed: bool,
    pub gamma_values: Vec<GammaSample>,
    pub passed: bool,
}

fn wrap_to_pi(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

fn path_index(kind: &SegmentKind) -> Option<usize> {
    match kind {
        SegmentKind::Path { index } => Some(*index),
        SegmentKind::Pulse { .. } => None,
    }
}

/// Evaluates the pi-flip conditions (with `a = 1`) on sampled frames.
///
/// `transition_integral[(n, m)]` is the measured `int e^{i phi_{n,m}} g_{n,m}`
/// over the whole run.
pub fn check_rae_conditions(
    schedule: &PulseSchedule,
    samples: &[ConditionSample],
    transition_integral: &ComplexMatrix,
    tol: &ConditionTolerances,
) -> ConditionReport {
    let dim = transition_integral.dim();
    let path_samples: Vec<(usize, &ConditionSample)> =
        samples.iter().filter_map(|s| path_index(&s.segment).map(|j| (j, s))).collect();

    let mut phi_dev: f64 = 0.0;
    for (j, s) in &path_samples {
        for n in 0..dim {
            for m in (n + 1)..dim {
                let target = (*j as f64) * (n as f64 - m as f64) * PI;
                phi_dev = phi_dev.max(wrap_to_pi(s.ledger.phi(n, m) - target).abs());
            }
        }
    }
    let phi_clause = PhiClause { max_deviation: phi_dev, passed: phi_dev <= tol.phi };

    let mut pairs = Vec::new();
    for n in 0..dim {
        for m in (n + 1)..dim {
            let parity = if (m - n) % 2 == 1 { PairParity::Odd } else { PairParity::Even };
            let measure = match (parity, path_samples.first()) {
                (_, None) => 0.0,
                (PairParity::Odd, Some((_, first))) => {
                    let reference = first.frame.coupling(n, m);
                    path_samples.iter().map(|(_, s)| (s.frame.coupling(n, m) - reference).norm()).fold(0.0, f64::max)
                }
                (PairParity::Even, Some(_)) => {
                    path_samples.iter().map(|(_, s)| s.frame.coupling(n, m).norm()).fold(0.0, f64::max)
                }
            };
            let limit = if parity == PairParity::Odd { tol.odd_drift } else { tol.even_abs };
            pairs.push(PairCoupling { n: n + 1, m: m + 1, parity, measure, passed: measure <= limit });
        }
    }
    let g_clause = GClause { passed: pairs.iter().all(|p| p.passed), pairs };

    let alternating_sum = schedule.alternating_sum();
    let mut nominal: f64 = 0.0;
    for n in 0..dim {
        for m in (n + 1)..dim {
            let mut total = C64::new(0.0, 0.0);
            for (j, duration) in schedule.segment_durations.iter().enumerate() {
                let in_segment: Vec<C64> =
                    path_samples.iter().filter(|(i, _)| *i == j).map(|(_, s)| s.frame.coupling(n, m)).collect();
                if in_segment.is_empty() {
                    continue;
                }
                let mean = in_segment.iter().sum::<C64>() / in_segment.len() as f64;
                let sign = if (j * (m - n)) % 2 == 0 { 1.0 } else { -1.0 };
                total += mean * sign * *duration;
            }
            nominal = nominal.max(total.norm());
        }
    }
    let sum_clause = SumClause {
        alternating_sum,
        nominal_integral: nominal,
        passed: alternating_sum.abs() <= tol.alternating_sum && nominal <= tol.nominal_integral,
    };

    let mut max_integral: f64 = 0.0;
    for n in 0..dim {
        for m in 0..dim {
            if n != m {
                max_integral = max_integral.max(transition_integral[(n, m)].norm());
            }
        }
    }
    let integral_clause = IntegralClause { max_abs: max_integral, passed: max_integral <= tol.transition_integral };

    let mut commutator_max: f64 = 0.0;
    for (i, a) in samples.iter().enumerate() {
        for b in &samples[i + 1..] {
            let c = a.transition_hamiltonian.commutator(&b.transition_hamiltonian).frobenius_norm();
            commutator_max = commutator_max.max(c);
        }
    }
    let commutator_passed = commutator_max <= tol.commutator;

    let gamma_values = gamma_samples(&path_samples, dim);

    let passed = phi_clause.passed && g_clause.passed && sum_clause.passed && integral_clause.passed && commutator_passed;
    ConditionReport { phi_clause, g_clause, sum_clause, integral_clause, commutator_max, commutator_passed, gamma_values, passed }
}

/// `gamma_{n,m}^{m,p}(t1, t2)` modulo `2 pi` between one representative
/// sample per path segment.
fn gamma_samples(path_samples: &[(usize, &ConditionSample)], dim: usize) -> Vec<GammaSample> {
    let mut reps: Vec<&ConditionSample> = Vec::new();
    let mut last = None;
    for (j, s) in path_samples {
        if last != Some(*j) {
            reps.push(s);
            last = Some(*j);
        }
    }
    let mut out = Vec::new();
    for n in 0..dim {
        for m in 0..dim {
            for p in 0..dim {
                if n == m || m == p {
                    continue;
                }
                for (i, a) in reps.iter().enumerate() {
                    for b in &reps[i + 1..] {
                        let g = (a.ledger.phi(n, m) + b.ledger.phi(m, p)) - (b.ledger.phi(n, m) + a.ledger.phi(m, p));
                        out.push(GammaSample { n: n + 1, m: m + 1, p: p + 1, t1: a.t_wall, t2: b.t_wall, value: g.rem_euclid(TAU) });
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{ControlPath, Drive, TwoLevelPath};
    use crate::linalg::expm_unitary;
    use proptest::prelude::*;

    fn random_frame_and_ledger(seed: &[f64]) -> (EigenFrame, PhaseLedger) {
        let n = 3;
        let g = ComplexMatrix::from_fn(n, |r, c| {
            let x = seed[(r * n + c) % seed.len()];
            let y = seed[(r + 2 * c) % seed.len()];
            if r == c {
                C64::new(x, 0.0)
            } else if r < c {
                C64::new(x, y)
            } else {
                C64::new(seed[(c * n + r) % seed.len()], -seed[(c + 2 * r) % seed.len()])
            }
        });
        let states = crate::linalg::eigh(&ComplexMatrix::from_fn(n, |r, c| {
            if r == c {
                C64::new(r as f64, 0.0)
            } else {
                C64::new(seed[r + c] * 0.3, if r < c { 0.2 } else { -0.2 })
            }
        }))
        .unwrap()
        .vectors
        .into_matrix();
        let frame = EigenFrame::new(vec![seed[0], seed[1], seed[2]], states, g).unwrap();
        let ledger = PhaseLedger::new(0.5, seed[3..6].to_vec(), seed[6..9].to_vec());
        (frame, ledger)
    }

    #[test]
    fn frozen_frame_gives_zero_transition_hamiltonian() {
        let path = ControlPath::TwoLevel(TwoLevelPath::meridian(0.0, PI, 0.0, 1.0).unwrap());
        let e = path.evaluate(0.3, Drive::Frozen { amplitude: 4.0 }).unwrap();
        let ledger = PhaseLedger::new(0.3, vec![0.4, -0.4], vec![0.0, 0.0]);
        let h = transition_hamiltonian(0.3, &e.frame, &ledger, &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(h, ComplexMatrix::zeros(2));
    }

    #[test]
    fn sign_alternates_with_phase_flips() {
        let path = ControlPath::TwoLevel(TwoLevelPath::meridian(0.0, PI, 0.0, 9.9).unwrap());
        let e = path.evaluate(1.0, Drive::Path).unwrap();
        let initial = path.evaluate(0.0, Drive::Path).unwrap().frame.states;
        let c_i = PI / (2.0 * 9.9);
        for j in 0..4 {
            // phi_{1,2} = j pi
            let ledger = PhaseLedger::new(1.0, vec![j as f64 * PI, 0.0], vec![0.0, 0.0]);
            let h = transition_hamiltonian(1.0, &e.frame, &ledger, &initial).unwrap();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let mut expected = ComplexMatrix::zeros(2);
            // |2(0)> = -|e> flips the sign of the bare-basis element
            expected[(0, 1)] = C64::new(0.0, sign * c_i);
            expected[(1, 0)] = C64::new(0.0, -sign * c_i);
            assert!((&h - &expected).frobenius_norm() < 1e-14);
        }
    }

    #[test]
    fn mismatched_times_rejected() {
        let (frame, ledger) = random_frame_and_ledger(&[0.1, 0.4, 0.9, 0.3, 0.2, 0.7, 0.5, 0.8, 0.6]);
        let err = transition_hamiltonian(0.6, &frame, &ledger, &ComplexMatrix::identity(3)).unwrap_err();
        assert!(matches!(err, Error::TimeMismatch { .. }));
    }

    #[test]
    fn zero_transition_hamiltonian_gives_identity() {
        let grid = crate::linalg::uniform_grid(1.0, 10);
        let us = transition_operator(&vec![ComplexMatrix::zeros(2); 10], &grid).unwrap();
        for u in us {
            assert_eq!(u.matrix(), &ComplexMatrix::identity(2));
        }
    }

    #[test]
    fn constant_hamiltonian_factorization() {
        let h = crate::linalg::pauli::x().scale(C64::new(0.8, 0.0));
        let eval = |s: f64| crate::hamiltonian::numeric_frame(|_| Ok(h.clone()), s, 1e-4, None);
        let grid = crate::linalg::uniform_grid(2.0, 50);
        let frames: Vec<EigenFrame> = grid.iter().map(|&t| eval(t).unwrap()).collect();
        let parts = adiabatic_operator(&grid, &frames).unwrap();
        assert!((parts[0].0.matrix() - &ComplexMatrix::identity(2)).frobenius_norm() < 1e-12);
        let u_full: Vec<UnitaryMatrix> = grid.iter().map(|&t| expm_unitary(&h, t).unwrap()).collect();
        let u_a: Vec<UnitaryMatrix> = parts.iter().map(|(d, g)| d * g).collect();
        for (_, g) in &parts {
            assert!((g.matrix() - &ComplexMatrix::identity(2)).frobenius_norm() < 1e-12);
        }
        let u_t = vec![UnitaryMatrix::identity(2); grid.len()];
        assert!(factorization_residual(&u_full, &u_a, &u_t).unwrap() <= 1e-9);
    }

    #[test]
    fn residual_length_mismatch() {
        let u = vec![UnitaryMatrix::identity(2); 3];
        assert_eq!(factorization_residual(&u, &u[..2], &u).unwrap_err(), Error::LengthMismatch(3, 2));
    }

    #[test]
    fn crossing_detected_in_frame_sequence() {
        let a = EigenFrame::new(vec![-1.0, 1.0], ComplexMatrix::identity(2), ComplexMatrix::zeros(2)).unwrap();
        let swapped = ComplexMatrix::from_fn(2, |r, c| if r != c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        let b = EigenFrame::new(vec![-1.0, 1.0], swapped, ComplexMatrix::zeros(2)).unwrap();
        assert!(matches!(adiabatic_operator(&[0.0, 0.1], &[a, b]), Err(Error::LevelCrossing { .. })));
    }

    proptest! {
        #[test]
        fn transition_hamiltonian_is_exactly_hermitian(seed in proptest::collection::vec(-2.0f64..2.0, 9)) {
            let (frame, ledger) = random_frame_and_ledger(&seed);
            let h = transition_hamiltonian(0.5, &frame, &ledger, &frame.states).unwrap();
            prop_assert_eq!(&h, &h.adjoint());
        }

        #[test]
        fn sign_flipped_copies_commute(seed in proptest::collection::vec(-2.0f64..2.0, 9), flips in proptest::collection::vec(any::<bool>(), 6)) {
            let (frame, ledger) = random_frame_and_ledger(&seed);
            let a = transition_hamiltonian(0.5, &frame, &ledger, &frame.states).unwrap();
            let family: Vec<ComplexMatrix> = flips.iter().map(|f| a.scale(C64::new(if *f { 1.0 } else { -1.0 }, 0.0))).collect();
            for x in &family {
                for y in &family {
                    prop_assert!(x.commutator(y).frobenius_norm() <= 1e-12);
                }
            }
        }
    }
}
