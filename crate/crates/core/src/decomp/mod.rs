//! Dense complex matrix kernels and the joint equal-diagonal
//! triangularization built from them.

mod gmd;
mod jet;
mod matrix;
mod qr;
mod svd;

pub use gmd::{gmd, GmdFactors};
pub use jet::{
    check_channel, gram_determinant, jet, validate_jet, DecompReport, JetFactors, UnitarityErrors,
};
pub use matrix::MatrixC;
pub use qr::{qr_reduce, rq_reduce};
pub use svd::{singular_values, svd, Svd};

use thiserror::Error;

/// Relative rank threshold against the largest singular value.
pub const RANK_TOLERANCE: f64 = 1e-10;
/// Relative tolerance for equal singular-value products.
pub const PRODUCT_TOLERANCE: f64 = 1e-6;
/// Relative tolerance on the equalized GMD diagonal.
pub const GMD_DIAG_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecompError {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("rank deficient: smallest pivot {smallest:e} below tolerance {tolerance:e}")]
    RankDeficient { smallest: f64, tolerance: f64 },
    #[error("singular-value products differ: {product1} vs {product2}")]
    UnequalSingularValueProducts { product1: f64, product2: f64 },
    #[error("diagonal failed to equalize (relative deviation {deviation:e})")]
    Convergence { deviation: f64 },
}
