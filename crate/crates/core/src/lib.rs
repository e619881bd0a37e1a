//! Density-matrix simulation of homonuclear COSY experiments in which the
//! proton magnetization is edited through a natural-abundance ¹³C before
//! the t₁ period, so that the diagonal is removed as unobservable
//! heteronuclear multiple-quantum coherence.
//!
//! The pipeline runs spin system → pulse program → propagation → 2D FID →
//! processed spectrum → peak table:
//!
//! - [`spinsys`]: spin systems and single-label isotopomer enumeration
//! - [`engine`]: Hilbert-space propagation with ideal pulses and gradients
//! - [`pulseprog`]: the line-oriented pulse-program language
//! - [`sequences`]: built-in sequences and the scan driver
//! - [`processing`]: apodization, quadrature recombination and 2D DFT
//! - [`analysis`]: peak picking, lineshape classification, suppression reports
//! - [`oracle`]: closed-form product-operator states used as an independent check
//! - [`cli`]: the `spinecho` command line

pub mod analysis;
pub mod cli;
pub mod engine;
pub mod error;
pub mod oracle;
pub mod par;
pub mod processing;
pub mod pulseprog;
pub mod sequences;
pub mod spinsys;

pub use error::{Error, Result};
