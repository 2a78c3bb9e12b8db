//! Dense complex linear algebra for small Hermitian systems.
//!
//! Matrices here are at most a handful of levels wide, so everything is a
//! heap-backed `nalgebra` matrix wrapped in newtypes that carry the
//! invariants the rest of the crate relies on (Hermitian input, unitary
//! output).

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);

const HERMITIAN_TOL: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-10;

/// Square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, |r, c| if r == c { C64::new(values[r], 0.0) } else { C64::new(0.0, 0.0) })
    }

    /// Builds a matrix from row slices; rejects ragged or non-square input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        for row in rows {
            if row.len() != n {
                return Err(Error::NotSquare { rows: n, cols: row.len() });
            }
        }
        Ok(Self::from_fn(n, |r, c| rows[r][c]))
    }

    /// Wraps an `nalgebra` matrix, checking it is square.
    pub fn from_dmatrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        Ok(Self(m))
    }

    /// Outer product `|a><b|`.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        let n = a.len();
        Self::from_fn(n, |r, c| a[r] * b[c].conj())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `AB - BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    /// `||H - H^dag||_F / max(||H||_F, 1)`.
    pub fn hermitian_deviation(&self) -> f64 {
        let diff = (&self.0 - self.0.adjoint()).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        diff / self.frobenius_norm().max(1.0)
    }

    /// `||U^dag U - I||_F`.
    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.dim();
        let prod = self.0.adjoint() * &self.0;
        (prod - DMatrix::<C64>::identity(n, n)).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        self.0.column(c).iter().copied().collect()
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        (0..n).map(|r| (0..n).map(|c| self.0[(r, c)] * v[c]).sum()).collect()
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
        &mut self.0[idx]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// A matrix known to be unitary to within `1e-10` when it was built.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(ComplexMatrix);

impl UnitaryMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let deviation = m.unitarity_deviation();
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self(m))
    }

    /// For products and spectral constructions that are unitary by
    /// construction; checked in debug builds only.
    pub(crate) fn from_trusted(m: ComplexMatrix) -> Self {
        debug_assert!(m.unitarity_deviation() < 1e-8, "untrusted unitary: {}", m.unitarity_deviation());
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn then(&self, next: &UnitaryMatrix) -> UnitaryMatrix {
        Self(&next.0 * &self.0)
    }
}

impl Mul for &UnitaryMatrix {
    type Output = UnitaryMatrix;
    fn mul(self, rhs: Self) -> UnitaryMatrix {
        UnitaryMatrix(&self.0 * &rhs.0)
    }
}

impl std::ops::Deref for UnitaryMatrix {
    type Target = ComplexMatrix;
    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// as columns.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: UnitaryMatrix,
}

impl EigenSystem {
    /// `sum_n E_n |n><n|`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = self.vectors.matrix();
        let d = ComplexMatrix::from_real_diagonal(&self.values);
        &(v * &d) * &v.adjoint()
    }
}

fn check_hermitian(h: &ComplexMatrix) -> Result<()> {
    if !h.is_finite() {
        return Err(Error::NonFinite);
    }
    let deviation = h.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Hermitian eigendecomposition with ascending eigenvalues.
///
/// Eigenvector phases are whatever the solver returns; callers that need a
/// continuous gauge fix it themselves.
pub fn eigh(h: &ComplexMatrix) -> Result<EigenSystem> {
    check_hermitian(h)?;
    let n = h.dim();
    let sym = (h.as_dmatrix() + h.as_dmatrix().adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 0).ok_or(Error::EigenFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(EigenSystem { values, vectors: UnitaryMatrix::from_trusted(vectors) })
}

/// `exp(-i h dt)` through the spectral decomposition of `h`.
pub fn expm_unitary(h: &ComplexMatrix, dt: f64) -> Result<UnitaryMatrix> {
    if !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("time step {dt}")));
    }
    let eig = eigh(h)?;
    let v = eig.vectors.matrix();
    let n = h.dim();
    let phases = ComplexMatrix::from_fn(n, |r, c| {
        if r == c {
            C64::from_polar(1.0, -eig.values[r] * dt)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(UnitaryMatrix::from_trusted(&(v * &phases) * &v.adjoint()))
}

/// Checks a propagation grid: non-empty, starting at 0, strictly increasing.
pub fn validate_grid(grid: &[f64]) -> Result<()> {
    let first = *grid.first().ok_or(Error::EmptyGrid)?;
    if first != 0.0 {
        return Err(Error::NonMonotoneGrid { index: 0 });
    }
    for (i, w) in grid.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::NonMonotoneGrid { index: i + 1 });
        }
    }
    Ok(())
}

/// Time-ordered product from Hamiltonians already sampled at the interval
/// midpoints: `U_{k+1} = exp(-i H_k dt_k) U_k`, `U_0 = I`.
pub fn propagate_midpoints(midpoint_hamiltonians: &[ComplexMatrix], grid: &[f64]) -> Result<Vec<UnitaryMatrix>> {
    validate_grid(grid)?;
    if midpoint_hamiltonians.len() + 1 != grid.len() {
        return Err(Error::LengthMismatch(midpoint_hamiltonians.len() + 1, grid.len()));
    }
    let dim = midpoint_hamiltonians.first().map_or(1, ComplexMatrix::dim);
    let mut out = Vec::with_capacity(grid.len());
    let mut u = UnitaryMatrix::identity(dim);
    out.push(u.clone());
    for (h, w) in midpoint_hamiltonians.iter().zip(grid.windows(2)) {
        if h.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: h.dim() });
        }
        let step = expm_unitary(h, w[1] - w[0])?;
        u = &step * &u;
        out.push(u.clone());
    }
    Ok(out)
}

/// Solves `i dU/dt = H(t) U` on `grid` with exponential midpoint steps.
pub fn propagate<F>(mut h_of_t: F, grid: &[f64]) -> Result<Vec<UnitaryMatrix>>
where
    F: FnMut(f64) -> Result<ComplexMatrix>,
{
    validate_grid(grid)?;
    let mids = grid
        .windows(2)
        .map(|w| h_of_t(0.5 * (w[0] + w[1])))
        .collect::<Result<Vec<_>>>()?;
    if mids.is_empty() {
        let dim = h_of_t(0.0)?.dim();
        return Ok(vec![UnitaryMatrix::identity(dim)]);
    }
    propagate_midpoints(&mids, grid)
}

/// Uniform grid of `steps` intervals on `[0, t_end]`.
pub fn uniform_grid(t_end: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| t_end * k as f64 / steps as f64).collect()
}

/// Pauli matrices in the `{|g>, |e>}` basis with `sigma_z |g> = +|g>`.
pub mod pauli {
    use super::{ComplexMatrix, C64};

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_fn(2, |r, c| if r != c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_fn(2, |r, c| match (r, c) {
            (0, 1) => C64::new(0.0, -1.0),
            (1, 0) => C64::new(0.0, 1.0),
            _ => C64::new(0.0, 0.0),
        })
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&[1.0, -1.0])
    }
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let a = ComplexMatrix::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        (&a + &a.adjoint()).scale(C64::new(0.5, 0.0))
    }

    /// Cyclic complex Jacobi sweeps, independent of the library solver.
    fn jacobi_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
        let n = h.dim();
        let mut a: Vec<Vec<C64>> = (0..n).map(|r| (0..n).map(|c| h[(r, c)]).collect()).collect();
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
                .map(|(r, c)| a[r][c].norm_sqr())
                .sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p][q];
                    if apq.norm() < 1e-300 {
                        continue;
                    }
                    // Remove the phase of a_pq, then a real symmetric rotation.
                    let phase = apq / apq.norm();
                    let app = a[p][p].re;
                    let aqq = a[q][q].re;
                    let theta = 0.5 * (2.0 * apq.norm()).atan2(aqq - app);
                    let (s, c) = theta.sin_cos();
                    // Columns p,q of the rotation J: J[p][p]=c, J[q][p]=-s*conj(phase), J[p][q]=s*phase, J[q][q]=c.
                    let jpp = C64::new(c, 0.0);
                    let jqp = -phase.conj() * s;
                    let jpq = phase * s;
                    let jqq = C64::new(c, 0.0);
                    // a <- J^dag a J
                    for k in 0..n {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = akp * jpp + akq * jqp;
                        a[k][q] = akp * jpq + akq * jqq;
                    }
                    for k in 0..n {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = jpp.conj() * apk + jqp.conj() * aqk;
                        a[q][k] = jpq.conj() * apk + jqq.conj() * aqk;
                    }
                }
            }
        }
        let mut vals: Vec<f64> = (0..n).map(|i| a[i][i].re).collect();
        vals.sort_by(f64::total_cmp);
        vals
    }

    fn series_exp(h: &ComplexMatrix, dt: f64, terms: usize) -> ComplexMatrix {
        let a = h.scale(C64::new(0.0, -dt));
        let mut term = ComplexMatrix::identity(h.dim());
        let mut sum = term.clone();
        for k in 1..terms {
            term = (&term * &a).scale(C64::new(1.0 / k as f64, 0.0));
            sum = &sum + &term;
        }
        sum
    }

    #[test]
    fn eigh_diagonal_input() {
        let h = ComplexMatrix::from_real_diagonal(&[0.5, -0.5]);
        let eig = eigh(&h).unwrap();
        assert_eq!(eig.values, vec![-0.5, 0.5]);
        let v = eig.vectors.matrix();
        assert!((v[(1, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((v[(0, 1)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigh_matches_jacobi_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let h = random_hermitian(3, &mut rng);
            let eig = eigh(&h).unwrap();
            let oracle = jacobi_eigenvalues(&h);
            for (a, b) in eig.values.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
            let residual = (&eig.reconstruct() - &h).frobenius_norm();
            assert!(residual <= 1e-10 * h.frobenius_norm());
            assert!(eig.vectors.unitarity_deviation() < 1e-10);
        }
    }

    #[test]
    fn eigh_rejects_bad_input() {
        let mut h = ComplexMatrix::zeros(2);
        h[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(eigh(&h), Err(Error::NotHermitian { .. })));
        let mut h = ComplexMatrix::zeros(2);
        h[(0, 0)] = C64::new(f64::NAN, 0.0);
        assert_eq!(eigh(&h).unwrap_err(), Error::NonFinite);
    }

    #[test]
    fn expm_zero_is_identity() {
        let u = expm_unitary(&ComplexMatrix::zeros(3), 1.7).unwrap();
        assert!((u.matrix() - &ComplexMatrix::identity(3)).frobenius_norm() < 1e-15);
    }

    #[test]
    fn expm_full_rotation_is_minus_identity() {
        let omega = 2.0 * PI * 3.0;
        let h = pauli::x().scale(C64::new(omega / 2.0, 0.0));
        let u = expm_unitary(&h, 2.0 * PI / omega).unwrap();
        let minus_i = ComplexMatrix::identity(2).scale(C64::new(-1.0, 0.0));
        assert!((u.matrix() - &minus_i).frobenius_norm() < 1e-12);
    }

    #[test]
    fn expm_matches_series_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 3, 4] {
            let h = random_hermitian(n, &mut rng);
            let u = expm_unitary(&h, 0.1).unwrap();
            let oracle = series_exp(&h, 0.1, 30);
            assert!((u.matrix() - &oracle).frobenius_norm() < 1e-12);
            assert!(u.unitarity_deviation() < 1e-12);
        }
    }

    #[test]
    fn propagate_constant_hamiltonian() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(3, &mut rng);
        let grid = uniform_grid(2.0, 400);
        let us = propagate(|_| Ok(h.clone()), &grid).unwrap();
        assert_eq!(us.len(), grid.len());
        assert!((us[0].matrix() - &ComplexMatrix::identity(3)).frobenius_norm() == 0.0);
        let exact = expm_unitary(&h, 2.0).unwrap();
        assert!((us.last().unwrap().matrix() - exact.matrix()).frobenius_norm() < 1e-12);
    }

    #[test]
    fn propagate_is_second_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_hermitian(3, &mut rng);
        let b = random_hermitian(3, &mut rng);
        let h = |t: f64| Ok(&a.scale(C64::new((3.0 * t).cos(), 0.0)) + &b.scale(C64::new(1.0 + t * t, 0.0)));
        let run = |n: usize| propagate(h, &uniform_grid(1.0, n)).unwrap().pop().unwrap();
        let coarse = run(100);
        let fine = run(200);
        let finer = run(400);
        let e1 = (coarse.matrix() - fine.matrix()).frobenius_norm();
        let e2 = (fine.matrix() - finer.matrix()).frobenius_norm();
        let ratio = e1 / e2;
        assert!((3.6..4.4).contains(&ratio), "ratio {ratio}");
        for u in propagate(h, &uniform_grid(1.0, 100)).unwrap() {
            assert!(u.unitarity_deviation() < 1e-9);
        }
    }

    #[test]
    fn propagate_grid_errors() {
        let h = |_| Ok(ComplexMatrix::zeros(2));
        assert_eq!(propagate(h, &[]).unwrap_err(), Error::EmptyGrid);
        assert!(matches!(propagate(h, &[0.0, 0.2, 0.1]), Err(Error::NonMonotoneGrid { index: 2 })));
        assert!(matches!(propagate(h, &[0.1, 0.2]), Err(Error::NonMonotoneGrid { index: 0 })));
    }

    #[test]
    fn propagate_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_hermitian(2, &mut rng);
        let h = |t: f64| Ok(a.scale(C64::new(t.sin(), 0.0)));
        let grid = uniform_grid(1.0, 50);
        assert_eq!(propagate(h, &grid).unwrap(), propagate(h, &grid).unwrap());
    }
}
