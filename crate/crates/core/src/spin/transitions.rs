//! ESR transitions at a fixed drive frequency and their first-order
//! sensitivities to the hyperfine constant and the electron g-factor.

use serde::Serialize;

use super::halfint::HalfInt;
use super::hamiltonian::{BlockedEigensystem, SpinSystem};
use super::labels::LabelMap;
use super::operators::StateLabel;
use crate::constants::MU_B_OVER_H;
use crate::donor::DonorSpecies;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitionOptions {
    /// Resonance-field search bracket, tesla.
    pub b_lo_t: f64,
    pub b_hi_t: f64,
    /// Points of the geometric scan used to locate sign changes.
    pub scan_points: usize,
    /// A branch is kept when its |<u|Sx|l>|^2 is at least this fraction of
    /// the largest Sx element between the same two m blocks.
    pub min_relative_intensity: f64,
}

impl Default for TransitionOptions {
    fn default() -> Self {
        TransitionOptions { b_lo_t: 1e-4, b_hi_t: 2.0, scan_points: 400, min_relative_intensity: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Transition {
    /// High-field nuclear projection of the branch.
    pub m_i: HalfInt,
    pub b_res_t: f64,
    pub f_hz: f64,
    /// df/dA, dimensionless.
    pub dfda: f64,
    /// df/dg_e, Hz per unit g.
    pub dfdg_hz: f64,
    /// |<u|Sx|l>|^2.
    pub intensity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionWarning {
    pub m_i: HalfInt,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionTable {
    pub donor: String,
    pub f_mw_hz: f64,
    pub a_hz: f64,
    pub g_e: f64,
    /// Sorted by resonance field.
    pub rows: Vec<Transition>,
    pub warnings: Vec<TransitionWarning>,
}

impl TransitionTable {
    pub fn row(&self, m_i: HalfInt) -> Option<&Transition> {
        self.rows.iter().find(|r| r.m_i == m_i)
    }
}

fn upper(m_i: HalfInt) -> StateLabel {
    StateLabel { m_s: HalfInt::from_twice(1), m_i }
}

fn lower(m_i: HalfInt) -> StateLabel {
    StateLabel { m_s: HalfInt::from_twice(-1), m_i }
}

/// Evaluates labeled ESR branches (m_S = -1/2 -> +1/2 at fixed m_I) of one
/// spin system at fixed A and g_e.
#[derive(Clone, Debug)]
pub struct TransitionSolver {
    sys: SpinSystem,
    pub a_hz: f64,
    pub g_e: f64,
    map: LabelMap,
}

/// Eigen-decomposition at one field with the two states of a branch located.
pub struct BranchState {
    pub eigen: BlockedEigensystem,
    pub upper: usize,
    pub lower: usize,
}

impl TransitionSolver {
    /// Valid for fields from `b_min_t` upwards.
    pub fn new(sys: SpinSystem, a_hz: f64, g_e: f64, b_min_t: f64) -> Result<Self> {
        let map = sys.label_map(a_hz, g_e, b_min_t)?;
        Ok(TransitionSolver { sys, a_hz, g_e, map })
    }

    pub fn for_donor(donor: &DonorSpecies, a_hz: f64, g_e: f64, b_min_t: f64) -> Result<Self> {
        Self::new(SpinSystem::for_donor(donor), a_hz, g_e, b_min_t)
    }

    pub fn system(&self) -> &SpinSystem {
        &self.sys
    }

    pub fn branches(&self) -> Vec<HalfInt> {
        self.sys.nuclear_spin().projections().collect()
    }

    fn check_branch(&self, m_i: HalfInt) -> Result<()> {
        let i2 = self.sys.nuclear_spin().twice();
        if m_i.twice().abs() > i2 || (m_i.twice() - i2) % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "m_I = {m_i} is not a projection of I = {}",
                self.sys.nuclear_spin()
            )));
        }
        Ok(())
    }

    fn check_field(&self, b_t: f64) -> Result<()> {
        if !(b_t >= self.map.b_min_t) || !b_t.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "B0 = {b_t} T is below the labeled range (>= {} T)",
                self.map.b_min_t
            )));
        }
        Ok(())
    }

    pub fn branch_state(&self, m_i: HalfInt, b_t: f64) -> Result<BranchState> {
        self.check_branch(m_i)?;
        self.check_field(b_t)?;
        let eigen = self.sys.blocked_eigensystem(&self.sys.hamiltonian(self.a_hz, self.g_e, b_t));
        let find = |l: StateLabel| {
            self.map.column(&eigen, l).ok_or_else(|| Error::LabelingConflict {
                field_t: b_t,
                detail: format!("label {l} not found"),
            })
        };
        let upper = find(upper(m_i))?;
        let lower = find(lower(m_i))?;
        Ok(BranchState { eigen, upper, lower })
    }

    pub fn frequency(&self, m_i: HalfInt, b_t: f64) -> Result<f64> {
        let s = self.branch_state(m_i, b_t)?;
        Ok(s.eigen.energies[s.upper] - s.eigen.energies[s.lower])
    }

    fn ensure_nondegenerate(&self, s: &BranchState, b_t: f64) -> Result<()> {
        if !(b_t > 0.0) {
            return Err(Error::Degenerate("sensitivities are undefined at B0 = 0".into()));
        }
        let scale = self.a_hz.abs() + self.g_e.abs() * MU_B_OVER_H * b_t;
        for col in [s.upper, s.lower] {
            let m = s.eigen.sector[col];
            for (k, e) in s.eigen.energies.iter().enumerate() {
                if k != col && s.eigen.sector[k] == m && (e - s.eigen.energies[col]).abs() <= 1e-9 * scale {
                    return Err(Error::Degenerate(format!(
                        "eigenstate {col} is degenerate within its m = {m} block at {b_t} T"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Hellmann-Feynman df/dA = <u|S.I|u> - <l|S.I|l>.
    pub fn dfda(&self, m_i: HalfInt, b_t: f64) -> Result<f64> {
        let s = self.branch_state(m_i, b_t)?;
        self.ensure_nondegenerate(&s, b_t)?;
        let op = self.sys.s_dot_i();
        Ok(s.eigen.expectation(op, s.upper) - s.eigen.expectation(op, s.lower))
    }

    /// Hellmann-Feynman df/dg_e = (<u|Sz|u> - <l|Sz|l>) muB B0 / h.
    pub fn dfdg(&self, m_i: HalfInt, b_t: f64) -> Result<f64> {
        let s = self.branch_state(m_i, b_t)?;
        self.ensure_nondegenerate(&s, b_t)?;
        let sz = &self.sys.operators().sz;
        Ok((s.eigen.expectation(sz, s.upper) - s.eigen.expectation(sz, s.lower)) * MU_B_OVER_H * b_t)
    }

    /// (|<u|Sx|l>|^2, largest |<i|Sx|j>|^2 between the two m blocks).
    pub fn intensity(&self, m_i: HalfInt, b_t: f64) -> Result<(f64, f64)> {
        let s = self.branch_state(m_i, b_t)?;
        let sx = &self.sys.operators().sx;
        let own = s.eigen.matrix_element(sx, s.upper, s.lower).norm_sqr();
        let (mu, ml) = (s.eigen.sector[s.upper], s.eigen.sector[s.lower]);
        let n = s.eigen.energies.len();
        let mut best = own;
        for i in (0..n).filter(|&i| s.eigen.sector[i] == mu) {
            for j in (0..n).filter(|&j| s.eigen.sector[j] == ml) {
                best = best.max(s.eigen.matrix_element(sx, i, j).norm_sqr());
            }
        }
        Ok((own, best))
    }

    /// Resonance field of branch `m_i` at drive frequency `f_mw_hz`: the
    /// first sign change of f(B) - f_mw on a geometric scan of the bracket,
    /// narrowed by bisection and polished by secant steps.
    pub fn resonance(&self, m_i: HalfInt, f_mw_hz: f64, opts: &TransitionOptions) -> Result<f64> {
        let g = |b: f64| self.frequency(m_i, b).map(|f| f - f_mw_hz);
        let no_root = || Error::NoResonance { m_i: m_i.value(), lo_t: opts.b_lo_t, hi_t: opts.b_hi_t };
        let n = opts.scan_points.max(2);
        let r = (opts.b_hi_t / opts.b_lo_t).powf(1.0 / (n - 1) as f64);
        let mut lo = opts.b_lo_t;
        let mut g_lo = g(lo)?;
        let mut bracket = None;
        for k in 1..n {
            let hi = if k == n - 1 { opts.b_hi_t } else { opts.b_lo_t * r.powi(k as i32) };
            let g_hi = g(hi)?;
            if g_lo == 0.0 {
                return Ok(lo);
            }
            if g_lo.signum() != g_hi.signum() {
                bracket = Some((lo, g_lo, hi, g_hi));
                break;
            }
            lo = hi;
            g_lo = g_hi;
        }
        let (mut a, mut ga, mut b, mut gb) = bracket.ok_or_else(no_root)?;
        while (b - a) > 1e-10 * b {
            let m = 0.5 * (a + b);
            let gm = g(m)?;
            if gm == 0.0 {
                return Ok(m);
            }
            if gm.signum() == ga.signum() {
                a = m;
                ga = gm;
            } else {
                b = m;
                gb = gm;
            }
        }
        // secant polish inside the final bracket
        let (mut x0, mut f0, mut x1, mut f1) = (a, ga, b, gb);
        let mut best = if ga.abs() < gb.abs() { (a, ga) } else { (b, gb) };
        for _ in 0..8 {
            if f1 == f0 {
                break;
            }
            let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
            if !(x2 >= a && x2 <= b) {
                break;
            }
            let f2 = g(x2)?;
            if f2.abs() < best.1.abs() {
                best = (x2, f2);
            }
            if f2 == 0.0 || (x2 - x1).abs() <= f64::EPSILON * x2 {
                break;
            }
            (x0, f0, x1, f1) = (x1, f1, x2, f2);
        }
        Ok(best.0)
    }

    pub fn table(&self, donor_name: &str, f_mw_hz: f64, opts: &TransitionOptions) -> Result<TransitionTable> {
        if !(f_mw_hz > 0.0) || !f_mw_hz.is_finite() {
            return Err(Error::InvalidArgument(format!("drive frequency must be > 0, got {f_mw_hz}")));
        }
        let mut rows = Vec::new();
        let mut warnings = Vec::new();
        for m_i in self.branches() {
            let b = match self.resonance(m_i, f_mw_hz, opts) {
                Ok(b) => b,
                Err(e @ Error::NoResonance { .. }) => {
                    log::warn!("{donor_name}: {e}");
                    warnings.push(TransitionWarning { m_i, reason: e.to_string() });
                    continue;
                }
                Err(e) => return Err(e),
            };
            let (intensity, max_el) = self.intensity(m_i, b)?;
            if intensity < opts.min_relative_intensity * max_el {
                warnings.push(TransitionWarning {
                    m_i,
                    reason: format!(
                        "not electron-like at {b:.6} T: |Sx|^2 = {intensity:.3e} < {} x {max_el:.3e}",
                        opts.min_relative_intensity
                    ),
                });
                continue;
            }
            rows.push(Transition {
                m_i,
                b_res_t: b,
                f_hz: self.frequency(m_i, b)?,
                dfda: self.dfda(m_i, b)?,
                dfdg_hz: self.dfdg(m_i, b)?,
                intensity,
            });
        }
        rows.sort_by(|x, y| x.b_res_t.total_cmp(&y.b_res_t));
        Ok(TransitionTable {
            donor: donor_name.to_string(),
            f_mw_hz,
            a_hz: self.a_hz,
            g_e: self.g_e,
            rows,
            warnings,
        })
    }
}

pub fn transitions_at_frequency(
    donor: &DonorSpecies,
    a_hz: f64,
    g_e: f64,
    f_mw_hz: f64,
    opts: &TransitionOptions,
) -> Result<TransitionTable> {
    if !(f_mw_hz > 0.0) || !f_mw_hz.is_finite() {
        return Err(Error::InvalidArgument(format!("drive frequency must be > 0, got {f_mw_hz}")));
    }
    TransitionSolver::for_donor(donor, a_hz, g_e, opts.b_lo_t)?.table(&donor.name, f_mw_hz, opts)
}

fn solver_at(donor: &DonorSpecies, a_hz: f64, g_e: f64, b0_t: f64) -> Result<TransitionSolver> {
    if !(b0_t > 0.0) {
        return Err(Error::Degenerate("sensitivities are undefined at B0 = 0".into()));
    }
    TransitionSolver::for_donor(donor, a_hz, g_e, b0_t)
}

/// df/dA of branch `m_i` at field `b0_t`, dimensionless.
pub fn sensitivity_dfda(donor: &DonorSpecies, a_hz: f64, g_e: f64, b0_t: f64, m_i: HalfInt) -> Result<f64> {
    solver_at(donor, a_hz, g_e, b0_t)?.dfda(m_i, b0_t)
}

/// df/dg_e of branch `m_i` at field `b0_t`, Hz per unit g.
pub fn sensitivity_dfdg(donor: &DonorSpecies, a_hz: f64, g_e: f64, b0_t: f64, m_i: HalfInt) -> Result<f64> {
    solver_at(donor, a_hz, g_e, b0_t)?.dfdg(m_i, b0_t)
}
