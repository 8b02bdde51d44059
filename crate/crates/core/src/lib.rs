//! Topological diagnostics for one-dimensional, finite-range, translation-invariant
//! tight-binding Hamiltonians.
//!
//! The crate evaluates Bloch fiber Hamiltonians `H_k = Σ_j e^{-ijk} A_j`, checks the
//! spectral gap at zero energy, verifies time-reversal / particle-hole / chiral
//! operators and classifies them in the tenfold way, integrates the parallel
//! transport of the occupied projector around the Brillouin circle, and extracts
//! Zak phases and the ℤ₂ invariant from the resulting Bloch frame. Winding-number
//! oracles for Kitaev-type chains provide an independent cross-check.
//!
//! ```
//! use zaktop::{presets, invariants, AnalysisConfig};
//!
//! let (model, set) = presets::kitaev_chain(&"1:1".parse().unwrap()).unwrap();
//! let report = invariants::analyze(&model, &set, &AnalysisConfig::default()).unwrap();
//! assert_eq!(report.z2, invariants::Z2::One);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod format;
pub mod invariants;
pub mod linalg;
pub mod model;
pub mod presets;
pub mod sweep;
pub mod symmetry;
pub mod tolerance;
pub mod transport;

pub use error::{Error, Result};
pub use invariants::{AnalysisConfig, InvariantReport, Z2};
pub use model::{GapReport, HoppingModel, SpectralData};
pub use symmetry::{AzcClass, SymmetryLabel, SymmetryOperator, SymmetrySet};
pub use tolerance::Tolerances;
pub use transport::TransportResult;

/// Complex double.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix, column-major.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;
