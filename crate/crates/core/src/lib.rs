//! Magnetic Weyl and Berezin quantization on discretized phase space.
//!
//! Configuration space is a box `[-L, L)^N` sampled on `M` points per axis.
//! Kernels are dense matrices acting with weight `h^N`.

extern crate openblas_src;

pub mod bargmann;
pub mod berezin;
pub mod error;
pub mod fft;
pub mod fields;
pub mod io;
pub mod linalg;
pub mod phasespace;
pub mod presets;
pub mod quadrature;
pub mod report;
pub mod strictq;
pub mod weyl;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
pub use fields::{GaugeFunction, MagneticField, VectorPotential};
pub use phasespace::{BoxGrid, KernelFunction, PhaseGrid, Symbol};
pub use weyl::OperatorMatrix;
pub use berezin::{CoherentFamily, FiducialVector};

/// Largest configuration-space dimension supported by the fixed-size
/// point buffers.
pub const MAX_DIM: usize = 3;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A value paired with non-fatal diagnostics.
#[derive(Clone, Debug)]
pub struct Flagged<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

impl<T> Flagged<T> {
    pub fn clean(value: T) -> Self {
        Self {
            value,
            warnings: Vec::new(),
        }
    }
}
