use nalgebra::{Complex, Schur};

use super::Digraph;
use crate::{Error, Result, Vector};

/// Sweep limit handed to the Schur iteration, per node.
const SCHUR_SWEEPS_PER_NODE: usize = 1000;

/// Eigenvalues of the Laplacian, sorted by real part (then imaginary part).
pub fn laplacian_spectrum(g: &Digraph) -> Result<Vec<Complex<f64>>> {
    let n = g.n();
    let schur = Schur::try_new(g.laplacian(), f64::EPSILON, SCHUR_SWEEPS_PER_NODE * n)
        .ok_or_else(|| Error::NumericalFailure("Schur iteration did not converge".into()))?;
    let mut eig: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();
    if eig.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NumericalFailure("non-finite eigenvalue".into()));
    }
    eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(eig)
}

/// Positive left null vector `w` of the Laplacian (`w^T L = 0`), scaled so
/// that its entries sum to one.
///
/// For a strongly connected graph `L^T` has rank `n - 1` and any `n - 1` of
/// its rows are independent, so replacing the last equation with `1^T w = 1`
/// yields a nonsingular system.
pub fn left_null_eigenvector(g: &Digraph) -> Result<Vector> {
    if !g.is_strongly_connected() {
        return Err(Error::NotStronglyConnected);
    }
    let n = g.n();
    if n == 1 {
        return Ok(Vector::from_element(1, 1.0));
    }
    let mut system = g.laplacian().transpose();
    system.row_mut(n - 1).fill(1.0);
    let mut rhs = Vector::zeros(n);
    rhs[n - 1] = 1.0;

    let lu = system.clone().full_piv_lu();
    let mut w = lu
        .solve(&rhs)
        .ok_or_else(|| Error::NumericalFailure("bordered Laplacian system is singular".into()))?;
    // one round of iterative refinement
    let residual = &rhs - &system * &w;
    if let Some(correction) = lu.solve(&residual) {
        w += correction;
    }
    if w.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(Error::NumericalFailure(format!(
            "left null vector is not strictly positive: {:?}",
            w.as_slice()
        )));
    }
    let total = w.sum();
    Ok(w / total)
}

/// Upper bound on the discrete consensus gain `h`:
/// `min(1 / max_i sum_j a_ij, min over nonzero eigenvalues of 2 Re(l) / |l|^2)`.
///
/// A single agent has no consensus constraint and gets `+inf`.
pub fn step_size_bound(g: &Digraph) -> Result<f64> {
    if !g.has_spanning_tree() {
        return Err(Error::NotConnected);
    }
    let row_bound = 1.0 / g.max_in_weight();
    let mut eig = laplacian_spectrum(g)?;
    // With a spanning tree zero is a simple eigenvalue; drop it.
    eig.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let spectral_bound = eig
        .iter()
        .skip(1)
        .map(|l| 2.0 * l.re / l.norm_sqr())
        .fold(f64::INFINITY, f64::min);
    Ok(row_bound.min(spectral_bound))
}
