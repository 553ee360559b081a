//! Exact p-adic wavelet frames generated by the affine group.

pub mod affine;
pub mod coefficient;
pub mod cyclotomic;
pub mod error;
pub mod frame;
mod kernel;
pub mod mra;
pub mod padic;
pub mod sampling;
pub mod wavelet;

pub use coefficient::{CoeffLiteral, Coefficient};
pub use cyclotomic::CycloNumber;
pub use error::{Error, Result};
pub use padic::{CosetRepresentative, PadicScalar, PrimeContext, Valuation};
pub use wavelet::{wavelet_eval, SampledFunction, TestFunction, WaveletIndex, WaveletRecord};
