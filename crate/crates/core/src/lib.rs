pub mod bands;
pub mod calculus;
pub mod error;
pub mod gap;
pub mod lifting;
pub mod linalg;
pub(crate) mod numfmt;
pub mod scenario;
pub mod schrodinger;
pub mod suite;
pub mod synth;

pub use error::{Error, Result};
