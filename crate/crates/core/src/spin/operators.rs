//! Angular-momentum operators on the electron (S = 1/2) x nucleus (I) product space.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::halfint::HalfInt;
use crate::error::{Error, Result};

/// Complex Hermitian operator with entries in Hz (or dimensionless for bare
/// spin operators).
pub type SpinMatrix = DMatrix<Complex64>;

/// Uncoupled basis label |m_S, m_I>.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateLabel {
    pub m_s: HalfInt,
    pub m_i: HalfInt,
}

impl StateLabel {
    pub fn total_m(&self) -> HalfInt {
        HalfInt::from_twice(self.m_s.twice() + self.m_i.twice())
    }
}

impl std::fmt::Display for StateLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "|{}, {}>", self.m_s, self.m_i)
    }
}

#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub nuclear_spin: HalfInt,
    pub sx: SpinMatrix,
    pub sy: SpinMatrix,
    pub sz: SpinMatrix,
    pub ix: SpinMatrix,
    pub iy: SpinMatrix,
    pub iz: SpinMatrix,
    /// Basis ordering: index = s * (2I+1) + i with m_S and m_I descending.
    pub basis: Vec<StateLabel>,
}

impl SpinOperators {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// S.I = SxIx + SyIy + SzIz.
    pub fn s_dot_i(&self) -> SpinMatrix {
        &self.sx * &self.ix + &self.sy * &self.iy + &self.sz * &self.iz
    }
}

/// (Jx, Jy, Jz) for a single angular momentum j in the descending-m basis.
pub fn single_spin(j: HalfInt) -> (SpinMatrix, SpinMatrix, SpinMatrix) {
    let ms: Vec<HalfInt> = j.projections().rev().collect();
    let n = ms.len();
    let jv = j.value();
    let mut jp = DMatrix::<Complex64>::zeros(n, n);
    let mut jz = DMatrix::<Complex64>::zeros(n, n);
    for (k, m) in ms.iter().enumerate() {
        let m = m.value();
        jz[(k, k)] = Complex64::new(m, 0.0);
        // J+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>; m+1 sits at row k-1.
        if k > 0 {
            jp[(k - 1, k)] = Complex64::new((jv * (jv + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
    }
    let jm = jp.adjoint();
    let half = Complex64::new(0.5, 0.0);
    let jx = (&jp + &jm) * half;
    let jy = (&jp - &jm) * Complex64::new(0.0, -0.5);
    (jx, jy, jz)
}

fn kron(a: &SpinMatrix, b: &SpinMatrix) -> SpinMatrix {
    a.kronecker(b)
}

/// Electron and nuclear spin operators on the (2S+1)(2I+1)-dimensional product space.
pub fn spin_operators(nuclear_spin: f64) -> Result<SpinOperators> {
    let i = HalfInt::from_f64(nuclear_spin)?;
    if i.twice() < 1 {
        return Err(Error::InvalidArgument(format!(
            "nuclear spin must be >= 1/2, got {nuclear_spin}"
        )));
    }
    Ok(operators_for(i))
}

pub(crate) fn operators_for(i: HalfInt) -> SpinOperators {
    let s = HalfInt::from_twice(1);
    let (sx1, sy1, sz1) = single_spin(s);
    let (ix1, iy1, iz1) = single_spin(i);
    let one_s = SpinMatrix::identity(2, 2);
    let one_i = SpinMatrix::identity(ix1.nrows(), ix1.nrows());
    let basis = s
        .projections()
        .rev()
        .flat_map(|m_s| i.projections().rev().map(move |m_i| StateLabel { m_s, m_i }))
        .collect();
    SpinOperators {
        nuclear_spin: i,
        sx: kron(&sx1, &one_i),
        sy: kron(&sy1, &one_i),
        sz: kron(&sz1, &one_i),
        ix: kron(&one_s, &ix1),
        iy: kron(&one_s, &iy1),
        iz: kron(&one_s, &iz1),
        basis,
    }
}
