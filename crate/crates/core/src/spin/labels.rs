//! Adiabatic state labeling: eigenstates are named by the uncoupled
//! |m_S, m_I> state they connect to at high field, by following them down a
//! descending field grid and matching successive overlaps.

use std::collections::HashMap;

use super::halfint::HalfInt;
use super::hamiltonian::{BlockedEigensystem, SpinSystem};
use super::operators::StateLabel;
use crate::error::{Error, Result};

/// Field from which every continuation starts, tesla.
pub const HIGH_FIELD_T: f64 = 10.0;

/// Ratio between successive fields of the descending grid.
const GRID_RATIO: f64 = 0.97;

/// Minimum |<prev|next>|^2 accepted as an unambiguous match.
const MIN_OVERLAP: f64 = 0.5;

#[derive(Clone, Debug)]
pub struct LabeledStates {
    pub b0_t: f64,
    pub eigen: BlockedEigensystem,
    /// Label of each eigenvector column.
    pub labels: Vec<StateLabel>,
}

impl LabeledStates {
    pub fn column_of(&self, label: StateLabel) -> Option<usize> {
        self.labels.iter().position(|l| *l == label)
    }
}

/// Where each labeled state sits inside the Fz block structure. Valid for
/// every field between `b_min_t` and the high-field start.
#[derive(Clone, Debug)]
pub struct LabelMap {
    pub b_min_t: f64,
    slots: HashMap<StateLabel, (HalfInt, usize)>,
}

impl LabelMap {
    pub fn slot(&self, label: StateLabel) -> Option<(HalfInt, usize)> {
        self.slots.get(&label).copied()
    }

    pub fn column(&self, eig: &BlockedEigensystem, label: StateLabel) -> Option<usize> {
        let (m, r) = self.slot(label)?;
        eig.find(m, r)
    }
}

fn overlap2(a: &BlockedEigensystem, i: usize, b: &BlockedEigensystem, j: usize) -> f64 {
    a.states.column(i).dotc(&b.states.column(j)).norm_sqr()
}

fn dominant_labels(sys: &SpinSystem, eig: &BlockedEigensystem, b: f64) -> Result<Vec<StateLabel>> {
    let n = sys.dim();
    let mut labels = Vec::with_capacity(n);
    let mut used = vec![false; n];
    for col in 0..n {
        let (row, w) = (0..n)
            .map(|r| (r, eig.states[(r, col)].norm_sqr()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if w < MIN_OVERLAP || used[row] {
            return Err(Error::LabelingConflict {
                field_t: b,
                detail: format!("no dominant uncoupled component for eigenstate {col} (weight {w:.3})"),
            });
        }
        used[row] = true;
        labels.push(sys.basis()[row]);
    }
    Ok(labels)
}

fn continue_labels(
    prev: &BlockedEigensystem,
    prev_labels: &[StateLabel],
    next: &BlockedEigensystem,
    b: f64,
) -> Result<Vec<StateLabel>> {
    let n = prev_labels.len();
    let mut labels = Vec::with_capacity(n);
    let mut taken = vec![false; n];
    for j in 0..n {
        let (i, w) = (0..n)
            .filter(|&i| prev.sector[i] == next.sector[j])
            .map(|i| (i, overlap2(prev, i, next, j)))
            .fold((usize::MAX, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if i == usize::MAX || w < MIN_OVERLAP {
            return Err(Error::LabelingConflict {
                field_t: b,
                detail: format!("eigenstate {j} has no predecessor with overlap above {MIN_OVERLAP} (best {w:.3})"),
            });
        }
        if taken[i] {
            return Err(Error::LabelingConflict {
                field_t: b,
                detail: format!("two eigenstates continue from {}", prev_labels[i]),
            });
        }
        taken[i] = true;
        labels.push(prev_labels[i]);
    }
    Ok(labels)
}

fn descending_grid(b_hi: f64, b_lo: f64) -> Vec<f64> {
    let steps = ((b_hi / b_lo).ln() / -GRID_RATIO.ln()).ceil().max(1.0) as usize;
    let r = (b_lo / b_hi).powf(1.0 / steps as f64);
    (0..=steps)
        .map(|k| if k == steps { b_lo } else { b_hi * r.powi(k as i32) })
        .collect()
}

impl SpinSystem {
    /// Runs the continuation from high field down to `b_target_t` and
    /// returns labels at the final field, plus the block slot of every label.
    /// A label that changes its energy rank within its Fz block along the
    /// way means a crossing inside the block, which is reported as a
    /// conflict.
    fn continuation(&self, a_hz: f64, g_e: f64, b_target_t: f64) -> Result<(LabeledStates, LabelMap)> {
        if !(b_target_t > 0.0) || !b_target_t.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "state labeling needs B0 > 0, got {b_target_t}"
            )));
        }
        let b_hi = HIGH_FIELD_T.max(b_target_t);
        let mut eig = self.blocked_eigensystem(&self.hamiltonian(a_hz, g_e, b_hi));
        let mut labels = dominant_labels(self, &eig, b_hi)?;
        let slots: HashMap<StateLabel, (HalfInt, usize)> = labels
            .iter()
            .enumerate()
            .map(|(c, l)| (*l, (eig.sector[c], eig.rank[c])))
            .collect();
        for b in descending_grid(b_hi, b_target_t).into_iter().skip(1) {
            let next = self.blocked_eigensystem(&self.hamiltonian(a_hz, g_e, b));
            let next_labels = continue_labels(&eig, &labels, &next, b)?;
            for (c, l) in next_labels.iter().enumerate() {
                if slots[l] != (next.sector[c], next.rank[c]) {
                    return Err(Error::LabelingConflict {
                        field_t: b,
                        detail: format!("{l} changed energy order inside its m block"),
                    });
                }
            }
            eig = next;
            labels = next_labels;
        }
        Ok((
            LabeledStates { b0_t: b_target_t, eigen: eig, labels },
            LabelMap { b_min_t: b_target_t, slots },
        ))
    }

    pub fn label_states(&self, a_hz: f64, g_e: f64, b0_t: f64) -> Result<LabeledStates> {
        self.continuation(a_hz, g_e, b0_t).map(|(s, _)| s)
    }

    /// Label-to-slot map valid on [b_min_t, HIGH_FIELD_T].
    pub fn label_map(&self, a_hz: f64, g_e: f64, b_min_t: f64) -> Result<LabelMap> {
        self.continuation(a_hz, g_e, b_min_t).map(|(_, m)| m)
    }
}

/// Labels the eigenstates of `donor` at field `b0_t` (tesla, > 0).
pub fn label_states(
    donor: &crate::donor::DonorSpecies,
    a_hz: f64,
    g_e: f64,
    b0_t: f64,
) -> Result<LabeledStates> {
    SpinSystem::for_donor(donor).label_states(a_hz, g_e, b0_t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::donor::DonorTable;
    use std::collections::HashSet;

    #[test]
    fn high_field_labels_follow_dominant_component() {
        let t = DonorTable::builtin();
        let bi = t.get("Bi").unwrap();
        let sys = SpinSystem::for_donor(bi);
        let ls = sys.label_states(bi.a0_hz, bi.g_e, 10.0).unwrap();
        for (c, l) in ls.labels.iter().enumerate() {
            let row = sys.basis().iter().position(|b| b == l).unwrap();
            assert!(ls.eigen.states[(row, c)].norm_sqr() > 0.99);
        }
    }

    #[test]
    fn phosphorus_four_distinct_labels() {
        let t = DonorTable::builtin();
        let p = t.get("P").unwrap();
        for b in [1e-4, 3e-3, 0.35, 4.0] {
            let ls = label_states(p, p.a0_hz, p.g_e, b).unwrap();
            let set: HashSet<_> = ls.labels.iter().collect();
            assert_eq!(set.len(), 4);
        }
    }

    /// Oracle: with A > 0 the two levels of an m block never cross for
    /// B0 > 0, and the upper one is the m_S = +1/2 branch.
    #[test]
    fn bismuth_labels_match_block_order() {
        let t = DonorTable::builtin();
        let bi = t.get("Bi").unwrap();
        let sys = SpinSystem::for_donor(bi);
        for b in [0.005, 0.05, 0.1, 0.2, 0.35, 0.6] {
            let ls = sys.label_states(bi.a0_hz, bi.g_e, b).unwrap();
            let set: HashSet<_> = ls.labels.iter().collect();
            assert_eq!(set.len(), 20);
            for (c, l) in ls.labels.iter().enumerate() {
                assert_eq!(l.total_m(), ls.eigen.sector[c]);
                let block_size = sys.blocks().iter().find(|(m, _)| *m == l.total_m()).unwrap().1.len();
                let expect_rank = if block_size == 1 || l.m_s.twice() < 0 { 0 } else { 1 };
                assert_eq!(ls.eigen.rank[c], expect_rank, "{l} at {b} T");
            }
        }
    }

    #[test]
    fn zero_field_rejected() {
        let t = DonorTable::builtin();
        let p = t.get("P").unwrap();
        assert!(label_states(p, p.a0_hz, p.g_e, 0.0).is_err());
    }

    #[test]
    fn grid_endpoints() {
        let g = descending_grid(10.0, 0.1);
        assert_eq!(g[0], 10.0);
        assert_eq!(*g.last().unwrap(), 0.1);
        assert!(g.windows(2).all(|w| w[1] < w[0] && w[1] / w[0] >= GRID_RATIO - 1e-12));
    }
}
