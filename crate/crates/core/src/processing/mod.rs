//! Time-domain to frequency-domain processing of 2D data sets.
//!
//! The pipeline is [`apodize`] then [`transform`]: zero-filling, a unitary
//! DFT along t₂, States or echo-antiecho recombination along t₁, a unitary
//! DFT along t₁ and zero/first-order phasing on both axes.

mod fid;
pub mod io;
mod spectrum;
mod transform;
mod window;

pub use fid::{Fid2D, Quadrature};
pub use spectrum::Spectrum2D;
pub use transform::{
    auto_phase0, axis, digital_resolution, fft2, natural_resolution, transform, Output, TransformParams,
};
pub use window::{apodize, window_weights, WindowAxis, WindowKind, WindowSpec};
