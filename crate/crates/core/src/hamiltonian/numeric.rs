//! Eigenframes for Hamiltonians without a closed-form spectrum.

use super::frame::gauge_fix;
use super::EigenFrame;
use crate::error::{Error, Result};
use crate::linalg::{eigh, ComplexMatrix, C64, I};

const DEGENERACY_TOL: f64 = 1e-9;
const CROSSING_OVERLAP: f64 = 0.5;

/// Frame of `h_of_t(t)` from a numeric eigendecomposition.
///
/// Eigenvectors are rephased to overlap real-positively with `reference`
/// (the previous sample's states) when given; couplings come from central
/// differences with step `fd_step` on neighbours gauge-fixed to the centre.
/// Degenerate spectra and ordering jumps relative to `reference` are errors.
pub fn numeric_frame<F>(h_of_t: F, t: f64, fd_step: f64, reference: Option<&ComplexMatrix>) -> Result<EigenFrame>
where
    F: Fn(f64) -> Result<ComplexMatrix>,
{
    let h = h_of_t(t)?;
    let eig = eigh(&h)?;
    let scale = h.frobenius_norm().max(1.0);
    let gap = eig.values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if gap <= DEGENERACY_TOL * scale {
        return Err(Error::Degenerate { gap });
    }
    let mut states = eig.vectors.matrix().clone();
    if let Some(reference) = reference {
        check_ordering(&states, reference, t)?;
        states = gauge_fix(&states, reference);
    }
    let neighbour = |s: f64| -> Result<ComplexMatrix> {
        let e = eigh(&h_of_t(s)?)?;
        check_ordering(e.vectors.matrix(), &states, s)?;
        Ok(gauge_fix(e.vectors.matrix(), &states))
    };
    let plus = neighbour(t + fd_step)?;
    let minus = neighbour(t - fd_step)?;
    let derivative = (&plus - &minus).scale(C64::new(0.5 / fd_step, 0.0));
    let overlaps = &states.adjoint() * &derivative;
    let n = h.dim();
    let couplings = ComplexMatrix::from_fn(n, |r, c| I * overlaps[(r, c)]);
    EigenFrame::new(eig.values, states, couplings)
}

fn check_ordering(states: &ComplexMatrix, reference: &ComplexMatrix, t: f64) -> Result<()> {
    let overlaps = &reference.adjoint() * states;
    for level in 0..states.dim() {
        if overlaps[(level, level)].norm() < CROSSING_OVERLAP {
            return Err(Error::LevelCrossing { t, level });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::two_level::{two_level_eval, TwoLevelPath};
    use std::f64::consts::PI;

    #[test]
    fn numeric_matches_analytic_up_to_gauge() {
        let path = TwoLevelPath::general(PI / 5.0, 4.0 * PI / 5.0, 0.0, PI, 9.9).unwrap();
        let omega = 2.0;
        let h = |s: f64| two_level_eval(&path, s, omega).map(|x| x.0);
        let (_, analytic) = two_level_eval(&path, 3.0, omega).unwrap();
        let numeric = numeric_frame(h, 3.0, 1e-4, None).unwrap();
        // ascending order puts the -Omega/2 level first
        assert!((numeric.energies[0] + 1.0).abs() < 1e-12);
        assert!((numeric.coupling(0, 1).norm() - analytic.coupling(0, 1).norm()).abs() < 1e-7);
        // parallel-transport gauge: diagonal couplings vanish
        assert!(numeric.coupling(0, 0).norm() < 1e-7);
    }

    #[test]
    fn degenerate_spectrum_rejected() {
        let h = |_| Ok(ComplexMatrix::identity(2));
        assert!(matches!(numeric_frame(h, 0.0, 1e-4, None), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn ordering_jump_detected() {
        let h = |_| Ok(ComplexMatrix::from_real_diagonal(&[-1.0, 1.0]));
        let swapped = ComplexMatrix::from_fn(2, |r, c| if r != c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        assert!(matches!(numeric_frame(h, 0.0, 1e-4, Some(&swapped)), Err(Error::LevelCrossing { .. })));
    }
}
