//! Truncated Fock-space simulation of heralded photonic state generation.
//!
//! Squeezed-light and Fock-state sources are expanded in the photon-number
//! basis, propagated through passive linear optics with exact permanent-based
//! scattering amplitudes, and conditioned on photon-number-resolved detection
//! patterns. The [`circuits`] module builds the heralded vacuum/four-photon
//! generator and its `|χ⟩` preparation stages together with their closed-form
//! amplitudes; [`oracle`] holds independent brute-force checks.

pub mod circuits;
pub mod error;
pub mod fock;
pub mod herald;
pub mod interferometer;
pub mod matrix;
pub mod oracle;
pub mod permanent;
pub mod sources;
pub mod verify;

pub use error::{Error, Result};
pub use fock::{
    enumerate_basis, inner_product, photon_number_support, tensor_product, CutoffPolicy,
    FockState, StateRecord, StateVector,
};
pub use herald::{epsilon_ratio, fidelity, herald, herald_through, HeraldPattern, HeraldResult};
pub use interferometer::{
    apply, apply_projected, beamsplitter_r, compose, scattering_amplitude, Circuit,
    CircuitElement,
};
pub use matrix::{CMatrix, ModeUnitary};
pub use num_complex::Complex64;
pub use permanent::permanent;
pub use sources::SqueezeParams;
