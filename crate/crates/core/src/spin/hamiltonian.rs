use nalgebra::DMatrix;
use num_complex::Complex64;

use super::eigen::Eigensystem;
use super::halfint::HalfInt;
use super::operators::{operators_for, SpinMatrix, SpinOperators, StateLabel};
use crate::constants::{MU_B_OVER_H, MU_N_OVER_H};
use crate::donor::DonorSpecies;

/// A donor spin system with cached operators and the total-m (Fz) block
/// structure of its Hamiltonian.
#[derive(Clone, Debug)]
pub struct SpinSystem {
    pub g_n: f64,
    ops: SpinOperators,
    s_dot_i: SpinMatrix,
    blocks: Vec<(HalfInt, Vec<usize>)>,
}

impl SpinSystem {
    pub fn new(nuclear_spin: HalfInt, g_n: f64) -> Self {
        let ops = operators_for(nuclear_spin);
        let s_dot_i = ops.s_dot_i();
        let mut blocks: Vec<(HalfInt, Vec<usize>)> = Vec::new();
        for (k, lab) in ops.basis.iter().enumerate() {
            let m = lab.total_m();
            match blocks.iter_mut().find(|(bm, _)| *bm == m) {
                Some((_, idx)) => idx.push(k),
                None => blocks.push((m, vec![k])),
            }
        }
        blocks.sort_by_key(|(m, _)| *m);
        SpinSystem { g_n, ops, s_dot_i, blocks }
    }

    pub fn for_donor(donor: &DonorSpecies) -> Self {
        Self::new(donor.nuclear_spin, donor.g_n)
    }

    pub fn nuclear_spin(&self) -> HalfInt {
        self.ops.nuclear_spin
    }

    pub fn operators(&self) -> &SpinOperators {
        &self.ops
    }

    pub fn s_dot_i(&self) -> &SpinMatrix {
        &self.s_dot_i
    }

    pub fn basis(&self) -> &[StateLabel] {
        &self.ops.basis
    }

    pub fn dim(&self) -> usize {
        self.ops.dim()
    }

    /// Basis indices of each total-m sector, sorted by m.
    pub fn blocks(&self) -> &[(HalfInt, Vec<usize>)] {
        &self.blocks
    }

    /// H/h = (g_e muB Sz - g_n muN Iz) B0 / h + A S.I, in Hz.
    pub fn hamiltonian(&self, a_hz: f64, g_e: f64, b0_t: f64) -> SpinMatrix {
        let ze = Complex64::new(g_e * MU_B_OVER_H * b0_t, 0.0);
        let zn = Complex64::new(-self.g_n * MU_N_OVER_H * b0_t, 0.0);
        &self.ops.sz * ze + &self.ops.iz * zn + &self.s_dot_i * Complex64::new(a_hz, 0.0)
    }

    /// Diagonalizes H sector by sector. Eigenvectors are exact Fz
    /// eigenstates even where levels of different sectors cross.
    pub fn blocked_eigensystem(&self, h: &SpinMatrix) -> BlockedEigensystem {
        let n = self.dim();
        let mut pieces: Vec<(f64, HalfInt, usize, Vec<(usize, Complex64)>)> = Vec::with_capacity(n);
        for (m, idx) in &self.blocks {
            let d = idx.len();
            let sub = DMatrix::from_fn(d, d, |r, c| h[(idx[r], idx[c])]);
            let es = Eigensystem::of_hermitian_unchecked(sub);
            for k in 0..d {
                let v = (0..d).map(|r| (idx[r], es.states[(r, k)])).collect();
                pieces.push((es.energies[k], *m, k, v));
            }
        }
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut states = SpinMatrix::zeros(n, n);
        let mut energies = Vec::with_capacity(n);
        let mut sector = Vec::with_capacity(n);
        let mut rank = Vec::with_capacity(n);
        for (col, (e, m, k, v)) in pieces.into_iter().enumerate() {
            for (row, z) in v {
                states[(row, col)] = z;
            }
            energies.push(e);
            sector.push(m);
            rank.push(k);
        }
        BlockedEigensystem { energies, states, sector, rank }
    }
}

/// Eigenpairs of a spin Hamiltonian resolved by total-m sector.
#[derive(Clone, Debug)]
pub struct BlockedEigensystem {
    /// Ascending, Hz.
    pub energies: Vec<f64>,
    /// Columns are eigenvectors, in the order of `energies`.
    pub states: SpinMatrix,
    /// Total m of each eigenvector.
    pub sector: Vec<HalfInt>,
    /// Energy rank of each eigenvector inside its sector (0 = lowest).
    pub rank: Vec<usize>,
}

impl BlockedEigensystem {
    pub fn find(&self, sector: HalfInt, rank: usize) -> Option<usize> {
        self.sector
            .iter()
            .zip(&self.rank)
            .position(|(&m, &r)| m == sector && r == rank)
    }

    pub fn expectation(&self, op: &SpinMatrix, col: usize) -> f64 {
        let v = self.states.column(col);
        (v.adjoint() * op * v)[(0, 0)].re
    }

    pub fn matrix_element(&self, op: &SpinMatrix, bra: usize, ket: usize) -> Complex64 {
        let u = self.states.column(bra);
        let l = self.states.column(ket);
        (u.adjoint() * op * l)[(0, 0)]
    }
}

/// Spin Hamiltonian of `donor` with hyperfine constant `a_hz` (possibly
/// strained), electron g-factor `g_e` and field `b0_t` along z.
pub fn build_hamiltonian(donor: &DonorSpecies, a_hz: f64, g_e: f64, b0_t: f64) -> SpinMatrix {
    SpinSystem::for_donor(donor).hamiltonian(a_hz, g_e, b0_t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::eigensystem;

    fn bi() -> DonorSpecies {
        DonorSpecies::bare("Bi", 4.5, 1.4754e9, 2.0003, 0.91347, 0.041).unwrap()
    }

    fn phosphorus() -> DonorSpecies {
        DonorSpecies::bare("P", 0.5, 117.53e6, 1.9985, 2.2632, 0.013).unwrap()
    }

    fn max_abs(m: &SpinMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_coupling_zero_field_is_zero() {
        let h = build_hamiltonian(&bi(), 0.0, 2.0003, 0.0);
        assert_eq!(max_abs(&h), 0.0);
    }

    #[test]
    fn hermitian_traceless_commutes_with_fz() {
        let d = bi();
        let sys = SpinSystem::for_donor(&d);
        let ops = sys.operators();
        let fz = &ops.sz + &ops.iz;
        for b in [0.0, 0.01, 0.3, 2.0] {
            let h = sys.hamiltonian(d.a0_hz, d.g_e, b);
            let scale = max_abs(&h);
            assert!(max_abs(&(&h - h.adjoint())) <= 1e-12 * scale);
            assert!(h.trace().norm() <= 1e-12 * scale);
            assert!(max_abs(&(&h * &fz - &fz * &h)) <= 1e-12 * scale);
        }
    }

    #[test]
    fn bismuth_zero_field_splitting() {
        let d = bi();
        let h = build_hamiltonian(&d, 1.4754e9, d.g_e, 0.0);
        let es = eigensystem(&h).unwrap();
        let lo = es.energies[0];
        let hi = es.energies[19];
        let split = hi - lo;
        let expect = 1.4754e9 * 5.0;
        assert!(((split - expect) / expect).abs() < 1e-9, "{split}");
        // F = 4 below (9 states), F = 5 above (11 states)
        let n_lo = es.energies.iter().filter(|e| (*e - lo).abs() < 1.0).count();
        let n_hi = es.energies.iter().filter(|e| (*e - hi).abs() < 1.0).count();
        assert_eq!((n_lo, n_hi), (9, 11));
    }

    #[test]
    fn phosphorus_high_field_limit() {
        let d = phosphorus();
        let b = 10.0;
        let sys = SpinSystem::for_donor(&d);
        let h = sys.hamiltonian(d.a0_hz, d.g_e, b);
        let es = eigensystem(&h).unwrap();
        let mut uncoupled: Vec<f64> = sys
            .basis()
            .iter()
            .map(|l| {
                d.g_e * MU_B_OVER_H * l.m_s.value() * b - d.g_n * MU_N_OVER_H * l.m_i.value() * b
                    + d.a0_hz * l.m_s.value() * l.m_i.value()
            })
            .collect();
        uncoupled.sort_by(|a, b| a.total_cmp(b));
        for (e, u) in es.energies.iter().zip(&uncoupled) {
            assert!(((e - u) / u).abs() < 1e-4, "{e} vs {u}");
        }
    }

    #[test]
    fn blocked_matches_full_spectrum() {
        let d = bi();
        let sys = SpinSystem::for_donor(&d);
        for b in [1e-3, 0.1, 0.35, 1.2] {
            let h = sys.hamiltonian(d.a0_hz, d.g_e, b);
            let full = eigensystem(&h).unwrap();
            let blk = sys.blocked_eigensystem(&h);
            for (a, c) in full.energies.iter().zip(&blk.energies) {
                assert!((a - c).abs() < 1e-6 * (1.0 + a.abs()), "{a} {c}");
            }
        }
    }
}
