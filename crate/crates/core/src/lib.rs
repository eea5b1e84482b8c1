//! Structured physical-layer network coding for the Gaussian MIMO two-way
//! relay channel.
//!
//! * [`decomp`]: complex QR/RQ/SVD kernels, the geometric mean
//!   decomposition, and the joint equal-diagonal triangularization.
//! * [`rates`]: closed-form achievable rates and bounds.
//! * [`pnc`]: nested cubic-lattice codebooks, the mod-lattice precoder,
//!   relay decoding and terminal combining.
//! * [`sim`]: seeded Monte Carlo harness over the physical MAC channel.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decomp;
pub mod pnc;
pub mod rates;
pub mod sim;

pub use decomp::{jet, validate_jet, DecompError, DecompReport, JetFactors, MatrixC};
pub use num_complex::Complex64;

pub use pnc::{LatticeWord, NestedLatticeCode, PncError, SubMessage};
pub use rates::{RateError, RateMode, RateReport, TwoWayNetwork};
pub use sim::{SimConfig, SimError, SimOutcome};
