//! Joint equal-diagonal triangularization of two channel matrices.
//!
//! Given `h1` (`m x n1`) and `h2` (`m x n2`) of full row rank with equal
//! singular-value products, produces `h_i = u * t_i * v_i†` where `u`, `v1`,
//! `v2` are unitary and `t1`, `t2` are generalized lower triangular with the
//! same real positive diagonal.
//!
//! Construction:
//! 1. `h_i† = Q_i [R_i; 0]` (full Householder QR).
//! 2. `C = R_1 R_2^{-1}` has unit-modulus singular-value product.
//! 3. `C = A S B†` by geometric mean decomposition, `diag(S) = 1`.
//! 4. `B† R_2 = S_2 U_0†` (RQ).
//! 5. `t_2 = S_2†`, `t_1 = (S S_2)†`, `u = U_0`,
//!    `v_1 = Q_1 diag(A, I)`, `v_2 = Q_2 diag(B, I)`.

use serde::Serialize;

use super::gmd::gmd;
use super::matrix::MatrixC;
use super::qr::{householder_full, rq_reduce};
use super::svd::singular_values;
use super::{DecompError, PRODUCT_TOLERANCE, RANK_TOLERANCE};

#[derive(Debug, Clone, Serialize)]
pub struct JetFactors {
    pub u: MatrixC,
    pub v1: MatrixC,
    pub v2: MatrixC,
    pub t1: MatrixC,
    pub t2: MatrixC,
    /// Shared diagonal `t_1 .. t_{N_r}`.
    pub diag: Vec<f64>,
}

impl JetFactors {
    /// Number of receive antennas (subchannels).
    pub fn n_r(&self) -> usize {
        self.diag.len()
    }

    /// Triangular factor of terminal `i` (1 or 2).
    pub fn t(&self, terminal: usize) -> &MatrixC {
        match terminal {
            1 => &self.t1,
            2 => &self.t2,
            _ => panic!("terminal index must be 1 or 2, got {terminal}"),
        }
    }

    /// Right unitary factor of terminal `i` (1 or 2).
    pub fn v(&self, terminal: usize) -> &MatrixC {
        match terminal {
            1 => &self.v1,
            2 => &self.v2,
            _ => panic!("terminal index must be 1 or 2, got {terminal}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitarityErrors {
    pub u: f64,
    pub v1: f64,
    pub v2: f64,
}

impl UnitarityErrors {
    pub fn max(&self) -> f64 {
        self.u.max(self.v1).max(self.v2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecompReport {
    pub reconstruction_error_1: f64,
    pub reconstruction_error_2: f64,
    pub unitarity_errors: UnitarityErrors,
    pub triangularity_error: f64,
    pub diag_mismatch: f64,
}

/// Checks the shape and rank preconditions shared by `jet` and the rate
/// formulas. Returns the singular values of the matrix, descending.
pub fn check_channel(h: &MatrixC, n_r: usize) -> Result<Vec<f64>, DecompError> {
    if h.rows() != n_r {
        return Err(DecompError::Dimension(format!(
            "channel has {} rows, expected {n_r}",
            h.rows()
        )));
    }
    if h.cols() < h.rows() {
        return Err(DecompError::Dimension(format!(
            "channel is {}x{}: need at least as many transmit as receive antennas",
            h.rows(),
            h.cols()
        )));
    }
    let s = singular_values(h);
    let tol = RANK_TOLERANCE * s[0];
    let smallest = s[n_r - 1];
    if !(smallest > tol) {
        return Err(DecompError::RankDeficient {
            smallest,
            tolerance: tol,
        });
    }
    Ok(s)
}

pub fn jet(h1: &MatrixC, h2: &MatrixC) -> Result<JetFactors, DecompError> {
    let m = h1.rows();
    let s1 = check_channel(h1, m)?;
    let s2 = check_channel(h2, m)?;
    let product1: f64 = s1.iter().product();
    let product2: f64 = s2.iter().product();
    if (product1 - product2).abs() > PRODUCT_TOLERANCE * product1.max(product2) {
        return Err(DecompError::UnequalSingularValueProducts { product1, product2 });
    }

    let (q1, r1) = householder_full(&h1.adjoint());
    let (q2, r2) = householder_full(&h2.adjoint());

    let r2_inv = r2.solve_upper(&MatrixC::identity(m));
    let c = &r1 * &r2_inv;
    let g = gmd(&c)?;
    let (s2_tri, u0) = rq_reduce(&(&g.v.adjoint() * &r2))?;

    let t2 = s2_tri.adjoint().pad_columns(h2.cols() - m);
    let t1 = (&g.r * &s2_tri).adjoint().pad_columns(h1.cols() - m);
    let v1 = &q1 * &embed(&g.u, h1.cols());
    let v2 = &q2 * &embed(&g.v, h2.cols());
    let diag = s2_tri.diagonal().iter().map(|z| z.re).collect();

    Ok(JetFactors {
        u: u0,
        v1,
        v2,
        t1,
        t2,
        diag,
    })
}

/// `diag(a, I)` of size `n x n`.
fn embed(a: &MatrixC, n: usize) -> MatrixC {
    let m = a.rows();
    let mut out = MatrixC::identity(n);
    for i in 0..m {
        for j in 0..m {
            out[(i, j)] = a[(i, j)];
        }
    }
    out
}

pub fn validate_jet(
    f: &JetFactors,
    h1: &MatrixC,
    h2: &MatrixC,
) -> Result<DecompReport, DecompError> {
    let m = h1.rows();
    let consistent = h2.rows() == m
        && f.u.rows() == m
        && f.u.is_square()
        && f.v1.rows() == h1.cols()
        && f.v1.is_square()
        && f.v2.rows() == h2.cols()
        && f.v2.is_square()
        && (f.t1.rows(), f.t1.cols()) == (m, h1.cols())
        && (f.t2.rows(), f.t2.cols()) == (m, h2.cols())
        && f.diag.len() == m;
    if !consistent {
        return Err(DecompError::Dimension(
            "factor shapes do not match the channel matrices".into(),
        ));
    }

    let residual = |h: &MatrixC, t: &MatrixC, v: &MatrixC| {
        let back = &(&f.u * t) * &v.adjoint();
        (&back - h).frobenius_norm() / h.frobenius_norm()
    };
    let diag_mismatch = (0..m)
        .map(|k| (f.t1[(k, k)] - f.t2[(k, k)]).norm())
        .fold(0.0f64, f64::max);

    Ok(DecompReport {
        reconstruction_error_1: residual(h1, &f.t1, &f.v1),
        reconstruction_error_2: residual(h2, &f.t2, &f.v2),
        unitarity_errors: UnitarityErrors {
            u: f.u.unitarity_error(),
            v1: f.v1.unitarity_error(),
            v2: f.v2.unitarity_error(),
        },
        triangularity_error: f.t1.max_above_diagonal().max(f.t2.max_above_diagonal()),
        diag_mismatch,
    })
}

/// `det(h h†)`, the squared product of the singular values.
pub fn gram_determinant(h: &MatrixC) -> f64 {
    singular_values(h)
        .iter()
        .take(h.rows().min(h.cols()))
        .map(|s| s * s)
        .product()
}
