pub mod ctf;
pub mod dsp;
pub mod error;
pub mod experiments;
pub mod expander;
pub mod frontend;
pub mod io;
pub mod linalg;
pub mod realtime;
pub mod reconstruct;
pub mod seed;
pub mod signal;

pub use error::{Condition, Error, Result};
