pub mod arith;
pub mod error;
pub mod exactalg;
pub mod fields;
pub mod heisenberg;
pub mod instance;
pub mod invariants;
pub mod localtori;
pub mod report;
pub mod torus;

pub use error::{Error, ErrorClass, Result};
