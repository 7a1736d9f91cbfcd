use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown donor `{name}` (known donors: {known})")]
    UnknownDonor { name: String, known: String },

    #[error("state labeling conflict at B0 = {field_t} T: {detail}")]
    LabelingConflict { field_t: f64, detail: String },

    #[error("degenerate eigenstate: {0}")]
    Degenerate(String),

    #[error("no resonance for m_I = {m_i} in [{lo_t}, {hi_t}] T")]
    NoResonance { m_i: f64, lo_t: f64, hi_t: f64 },

    #[error("fit did not converge after {iterations} iterations (best residual {residual:.6e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        best: Box<crate::echo::VoigtParams>,
    },

    #[error("degenerate design matrix: columns {columns:?} are collinear (condition number {condition:.3e})")]
    DegenerateDesign {
        columns: Vec<&'static str>,
        condition: f64,
    },

    #[error("constants file: {0}")]
    Config(String),
}

impl Error {
    /// True for failures of a numerical procedure rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::LabelingConflict { .. }
                | Error::Degenerate(_)
                | Error::NoResonance { .. }
                | Error::NonConvergence { .. }
                | Error::DegenerateDesign { .. }
        )
    }
}
