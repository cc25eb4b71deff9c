pub mod check;
pub mod enveloping;
pub mod error;
pub mod free_lie;
pub mod gns;
pub mod lie;
pub mod orbit;
pub mod poisson;
pub mod poly;
pub mod scalar;
pub mod star;
pub mod universal;

pub use error::{Error, ParseError, Result};
