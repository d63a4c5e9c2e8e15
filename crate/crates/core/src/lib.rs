pub mod error;
pub mod fidelity;
pub mod harness;
pub mod mps;
pub mod oracle;
pub mod tensor;
pub mod ttn;

pub use error::{Error, Result};
