//! Hahn-echo reduction: synthesis, spectra, Voigt fitting, and the
//! detuning-versus-strain series.

mod fit;
mod series;
mod spectrum;
mod trace;
mod voigt;

pub use fit::{fit_trace, fit_voigt, initial_guess, EchoFit, EchoFitOptions, LmOptions, VoigtFit};
pub use series::{extract_shift_series, ols_line, LineFit, ShiftSeries};
pub use spectrum::{fft_spectrum, hann, Spectrum, Window};
pub use trace::{synthesize_echo, EchoTrace, SynthesisProfile, MIN_SAMPLES};
pub use voigt::{faddeeva, gaussian, lorentzian, profile_with_derivatives, voigt_profile, VoigtParams};
