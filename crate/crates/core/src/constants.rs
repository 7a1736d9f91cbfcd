//! Physical constants (CODATA 2018, exact where SI fixes them).

/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Bohr magneton, J/T.
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;

/// Nuclear magneton, J/T.
pub const NUCLEAR_MAGNETON: f64 = 5.050_783_746_1e-27;

/// Bohr magneton over Planck constant, Hz/T.
pub const MU_B_OVER_H: f64 = BOHR_MAGNETON / PLANCK;

/// Nuclear magneton over Planck constant, Hz/T.
pub const MU_N_OVER_H: f64 = NUCLEAR_MAGNETON / PLANCK;

/// Free-electron g-factor as quoted for the contact-hyperfine prefactor.
pub const G_FREE: f64 = 2.0023;

/// Standard gravity, m/s^2, used for mass-to-stress conversion.
pub const G_GRAV: f64 = 9.806_65;
