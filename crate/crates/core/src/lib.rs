//! Analysis of CHSH coincidence data and explicit Hilbert-space models for
//! Bell-violating systems, quantum and macroscopic.
//!
//! * [`linalg`]: complex vectors and matrices on C² and C⁴, Hermitian
//!   eigensolver, SVD, spectral families and product isomorphisms.
//! * [`entanglement`]: product tests for states, measurements and unitaries
//!   relative to a chosen tensor-product structure.
//! * [`bell`]: coincidence tables, CHSH values, the marginal law audit and
//!   the four-way classification.
//! * [`models`]: density operators, Born tables, Lüders updates, the nonlocal
//!   box model and the generic construction from coincidence data.
//! * [`simulators`]: connected spheres, connected vessels, the cats.

pub mod bell;
pub mod cli;
pub mod datasets;
pub mod entanglement;
pub mod error;
pub mod linalg;
pub mod models;
pub mod sample;
pub mod simulators;

pub use bell::{classify, BellData, ClassificationReport, Context, JointTable, Setting, Verdict};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector, ProductIsomorphism, SpectralFamily, C64};
pub use models::{DensityOperator, QuantumBellModel};
