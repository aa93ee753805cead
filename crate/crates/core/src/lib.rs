#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod clustering;
pub mod design;
pub mod error;
pub mod estimator;
pub mod graph;
pub mod harness;
pub mod instances;
pub mod moments;
pub mod outcomes;
pub mod subset;

pub use error::{Error, Result};

/// `x^e` by repeated multiplication.
pub(crate) fn powi(x: f64, e: usize) -> f64 {
    (0..e).fold(1.0, |acc, _| acc * x)
}
