use num_complex::Complex64;

use super::operators::SpinMatrix;
use crate::error::{Error, Result};

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Eigensystem {
    /// Ascending.
    pub energies: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `energies`.
    pub states: SpinMatrix,
}

impl Eigensystem {
    pub(crate) fn of_hermitian_unchecked(h: SpinMatrix) -> Self {
        let n = h.nrows();
        if n == 1 {
            return Eigensystem {
                energies: vec![h[(0, 0)].re],
                states: SpinMatrix::identity(1, 1),
            };
        }
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let energies = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut states = SpinMatrix::zeros(n, n);
        for (col, &k) in order.iter().enumerate() {
            let v = eig.eigenvectors.column(k);
            // fix the global phase: largest component real and positive
            let (_, pivot) = v
                .iter()
                .enumerate()
                .fold((0.0, 0), |(best, bi), (i, z)| if z.norm() > best { (z.norm(), i) } else { (best, bi) });
            let phase = v[pivot].conj() / v[pivot].norm();
            states.set_column(col, &(v * phase));
        }
        Eigensystem { energies, states }
    }
}

pub fn hermiticity_defect(h: &SpinMatrix) -> f64 {
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let d = (h - h.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    d / scale
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
pub fn eigensystem(h: &SpinMatrix) -> Result<Eigensystem> {
    if !h.is_square() {
        return Err(Error::InvalidArgument("matrix is not square".into()));
    }
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let defect = hermiticity_defect(h);
    if defect > HERMITIAN_TOL {
        return Err(Error::InvalidArgument(format!(
            "matrix is not Hermitian (relative defect {defect:.3e})"
        )));
    }
    // symmetrize away rounding so the solver sees an exactly Hermitian input
    let hs = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(Eigensystem::of_hermitian_unchecked(hs))
}
