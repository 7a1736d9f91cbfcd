pub mod constants;
pub mod donor;
pub mod echo;
pub mod error;
pub mod fit;
pub mod response;
pub mod spin;
pub mod strain;

pub use error::{Error, Result};
