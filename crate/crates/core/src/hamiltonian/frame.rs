use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, I};

/// Instantaneous eigenframe: energies `E_n`, eigenstates `|n>` (columns of
/// `states`) and nonadiabatic couplings `g_{n,m} = i<n|d/dt m>`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenFrame {
    pub energies: Vec<f64>,
    pub states: ComplexMatrix,
    pub couplings: ComplexMatrix,
}

impl EigenFrame {
    pub fn new(energies: Vec<f64>, states: ComplexMatrix, couplings: ComplexMatrix) -> Result<Self> {
        let n = energies.len();
        for m in [&states, &couplings] {
            if m.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, actual: m.dim() });
            }
        }
        Ok(Self { energies, states, couplings })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `E_{n,m} = E_n - E_m`.
    pub fn gap(&self, n: usize, m: usize) -> f64 {
        self.energies[n] - self.energies[m]
    }

    pub fn gaps(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n).map(|a| (0..n).map(|b| self.gap(a, b)).collect()).collect()
    }

    pub fn state(&self, n: usize) -> Vec<C64> {
        self.states.column(n)
    }

    pub fn coupling(&self, n: usize, m: usize) -> C64 {
        self.couplings[(n, m)]
    }

    /// Same frame with the path velocity set to zero (all couplings vanish).
    pub fn frozen(mut self) -> Self {
        self.couplings = ComplexMatrix::zeros(self.dim());
        self
    }

    /// `||S^dag S - I||_F` for the state matrix.
    pub fn orthonormality_deviation(&self) -> f64 {
        self.states.unitarity_deviation()
    }

    /// Smallest separation between any two energies.
    pub fn min_gap(&self) -> f64 {
        let mut e = self.energies.clone();
        e.sort_by(f64::total_cmp);
        e.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }
}

/// Accumulated phase integrals at one wall-clock time.
///
/// Stores per-level integrals `int E_n` and `int g_{n,n}`; the pairwise
/// phases `phi_{n,m}` are differences of these, which makes antisymmetry and
/// additivity exact. Sums are compensated so that rounding does not drift
/// over long grids.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseLedger {
    pub t_wall: f64,
    dynamical: Vec<f64>,
    geometric: Vec<f64>,
    /// Uncompensated running sums and their carries, dynamical then geometric.
    sums: Vec<f64>,
    carry: Vec<f64>,
}

fn compensated_add(sum: f64, carry: f64, x: f64) -> (f64, f64) {
    let t = sum + x;
    let c = if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
    (t, carry + c)
}

impl PhaseLedger {
    pub fn new(t_wall: f64, dynamical: Vec<f64>, geometric: Vec<f64>) -> Self {
        let n = dynamical.len();
        let sums = dynamical.iter().chain(&geometric).copied().collect();
        Self { t_wall, dynamical, geometric, sums, carry: vec![0.0; 2 * n] }
    }

    pub fn zero(dim: usize, t_wall: f64) -> Self {
        Self::new(t_wall, vec![0.0; dim], vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.dynamical.len()
    }

    /// `int E_n dt` per level.
    pub fn dynamical(&self) -> &[f64] {
        &self.dynamical
    }

    /// `int g_{n,n} dt` per level.
    pub fn geometric(&self) -> &[f64] {
        &self.geometric
    }

    fn level_phase(&self, n: usize) -> f64 {
        self.dynamical[n] - self.geometric[n]
    }

    /// `phi_{n,m}(t) = int_0^t [E_{n,m} - (g_{n,n} - g_{m,m})] dt'`.
    pub fn phi(&self, n: usize, m: usize) -> f64 {
        self.level_phase(n) - self.level_phase(m)
    }

    pub fn phi_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n).map(|a| (0..n).map(|b| self.phi(a, b)).collect()).collect()
    }

    /// Trapezoidal step from `self` (frame `a` at `self.t_wall`) to `t_next`
    /// (frame `b`).
    pub fn advance(&self, t_next: f64, a: &EigenFrame, b: &EigenFrame) -> Result<Self> {
        if !(t_next > self.t_wall) {
            return Err(Error::NonMonotoneGrid { index: 0 });
        }
        let n = self.dim();
        if a.dim() != n || b.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: a.dim().max(b.dim()) });
        }
        let half = 0.5 * (t_next - self.t_wall);
        let mut next = self.clone();
        next.t_wall = t_next;
        for k in 0..n {
            let increments = [
                (k, half * (a.energies[k] + b.energies[k])),
                (n + k, half * (a.couplings[(k, k)].re + b.couplings[(k, k)].re)),
            ];
            for (slot, x) in increments {
                (next.sums[slot], next.carry[slot]) = compensated_add(next.sums[slot], next.carry[slot], x);
            }
            next.dynamical[k] = next.sums[k] + next.carry[k];
            next.geometric[k] = next.sums[n + k] + next.carry[n + k];
        }
        Ok(next)
    }
}

/// Trapezoidal accumulation of the phase integrands over time-ordered frame
/// samples. Returns one ledger per sample; the first equals `start` (or zero).
pub fn accumulate_phases(times: &[f64], frames: &[EigenFrame], start: Option<PhaseLedger>) -> Result<Vec<PhaseLedger>> {
    if times.len() != frames.len() {
        return Err(Error::LengthMismatch(times.len(), frames.len()));
    }
    let Some(first) = frames.first() else {
        return Err(Error::EmptyGrid);
    };
    let mut ledger = match start {
        Some(l) => {
            if l.t_wall != times[0] {
                return Err(Error::TimeMismatch { a: l.t_wall, b: times[0] });
            }
            l
        }
        None => PhaseLedger::zero(first.dim(), times[0]),
    };
    let mut out = Vec::with_capacity(times.len());
    out.push(ledger.clone());
    for (k, w) in times.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::NonMonotoneGrid { index: k + 1 });
        }
        ledger = ledger.advance(w[1], &frames[k], &frames[k + 1])?;
        out.push(ledger.clone());
    }
    Ok(out)
}

/// Central-difference couplings `g_{n,m} = i<n(t)| (|m(t+h)> - |m(t-h)>) / 2h`
/// in whatever gauge `frame_at` returns.
pub fn finite_difference_couplings<F>(frame_at: F, t: f64, h: f64) -> Result<ComplexMatrix>
where
    F: Fn(f64) -> Result<EigenFrame>,
{
    let centre = frame_at(t)?;
    let plus = frame_at(t + h)?;
    let minus = frame_at(t - h)?;
    let n = centre.dim();
    let derivative = (&plus.states - &minus.states).scale(C64::new(0.5 / h, 0.0));
    let overlaps = &centre.states.adjoint() * &derivative;
    Ok(ComplexMatrix::from_fn(n, |r, c| I * overlaps[(r, c)]))
}

/// Rephases each column of `states` so its overlap with the same column of
/// `reference` is real and non-negative.
pub fn gauge_fix(states: &ComplexMatrix, reference: &ComplexMatrix) -> ComplexMatrix {
    let n = states.dim();
    let mut out = states.clone();
    for c in 0..n {
        let overlap: C64 = (0..n).map(|r| reference[(r, c)].conj() * states[(r, c)]).sum();
        if overlap.norm() > 0.0 {
            let phase = overlap.conj() / overlap.norm();
            for r in 0..n {
                out[(r, c)] = states[(r, c)] * phase;
            }
        }
    }
    out
}
