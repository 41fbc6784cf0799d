pub mod arith;
pub mod brauer;
pub mod builders;
pub mod cli;
pub mod conic;
pub mod curve;
pub mod error;
pub mod fields;
pub mod forms;
pub mod galois;
pub mod graph;
pub mod hasse;
pub mod modlin;
pub mod poly;

pub use error::{Error, Result};
