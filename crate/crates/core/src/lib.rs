//! Exact, non-iterative sampling from the axial density `f(x) ∝ xᵀAx` on the
//! unit sphere `S^{p-1}`, for a symmetric positive semi-definite `A`.
//!
//! ```
//! use axial::{ingest_matrix, AxialDensity};
//!
//! let a = ingest_matrix(&[
//!     vec![3.0, 1.0, 0.0],
//!     vec![1.0, 2.0, 0.0],
//!     vec![0.0, 0.0, 1.0],
//! ])
//! .unwrap();
//! let density = AxialDensity::from_matrix(&a).unwrap();
//! let batch = density.sample(10, 42).unwrap();
//! assert_eq!(batch.count, 10);
//! assert!(batch.max_norm_error() < 1e-10);
//! ```

pub mod angle;
pub mod cli;
pub mod error;
pub mod io;
pub mod rng;
pub mod sampler;
pub mod spectral;
pub mod validation;

pub use error::{Error, Result};
pub use rng::RngStream;
pub use sampler::{AxialDensity, DrawTrace, RecurrenceState, SampleBatch};
pub use spectral::{eigen_decompose, ingest_matrix, SpectralDecomposition, SymmetricSPDMatrix};
pub use validation::{validate_all, ValidationReport};
