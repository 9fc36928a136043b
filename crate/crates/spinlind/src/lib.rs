//! Semiclassical master equation for continuous-wave magnetic resonance of
//! multispin systems driven by a classical oscillating field.
//!
//! Units: ħ = 1, frequencies and energies in rad/s, fields in Gauss,
//! gyromagnetic ratios in rad/s/G.

pub mod acp;
pub mod config;
pub mod eigenops;
pub mod error;
pub mod lineshape;
pub mod master;
pub mod presets;
pub mod quad;
pub mod response;
pub mod qubit;
pub mod run;
pub mod spectrum;
pub mod spin;
pub mod verify;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub use error::{Error, Result};

/// Dense complex matrix in the compressed-index basis.
pub type Operator = DMatrix<C64>;

/// Largest Hilbert dimension the matrix path accepts.
pub const MAX_DIM: usize = 4096;
