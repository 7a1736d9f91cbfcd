//! Coupled electron-nuclear spin Hamiltonian of a group-V donor:
//! construction, diagonalization, adiabatic labeling, ESR transitions and
//! their Hellmann-Feynman sensitivities.

mod eigen;
mod halfint;
mod hamiltonian;
mod labels;
mod operators;
mod transitions;

pub use eigen::{eigensystem, hermiticity_defect, Eigensystem, HERMITIAN_TOL};
pub use halfint::HalfInt;
pub use hamiltonian::{build_hamiltonian, BlockedEigensystem, SpinSystem};
pub use labels::{label_states, LabelMap, LabeledStates, HIGH_FIELD_T};
pub use operators::{single_spin, spin_operators, SpinMatrix, SpinOperators, StateLabel};
pub use transitions::{
    sensitivity_dfda, sensitivity_dfdg, transitions_at_frequency, BranchState, Transition,
    TransitionOptions, TransitionSolver, TransitionTable, TransitionWarning,
};
