//! Householder QR and the RQ variant derived from it.
//!
//! Both factorizations normalize the triangular factor to a real, positive
//! diagonal; the residual phases are pushed into the unitary factor.

use num_complex::Complex64;

use super::matrix::MatrixC;
use super::svd::singular_values;
use super::{DecompError, RANK_TOLERANCE};

/// Full Householder QR of a `rows x cols` matrix with `rows >= cols`.
///
/// Returns `q` (`rows x rows`, unitary) and `r` (`cols x cols`, upper
/// triangular, real non-negative diagonal) with `a = q[:, ..cols] * r`.
pub(crate) fn householder_full(a: &MatrixC) -> (MatrixC, MatrixC) {
    let (m, n) = (a.rows(), a.cols());
    debug_assert!(m >= n);
    let mut r = a.clone();
    let mut q = MatrixC::identity(m);
    let mut v = vec![Complex64::new(0.0, 0.0); m];

    for k in 0..n {
        let norm = (k..m).map(|i| r[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = r[(k, k)];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * norm;
        for i in k..m {
            v[i] = r[(i, k)];
        }
        v[k] -= alpha;
        let vnorm2: f64 = (k..m).map(|i| v[i].norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm2;
        // r <- (I - tau v v†) r
        for j in k..n {
            let mut w = Complex64::new(0.0, 0.0);
            for i in k..m {
                w += v[i].conj() * r[(i, j)];
            }
            w *= tau;
            for i in k..m {
                let d = v[i] * w;
                r[(i, j)] -= d;
            }
        }
        // q <- q (I - tau v v†)
        for i in 0..m {
            let mut w = Complex64::new(0.0, 0.0);
            for l in k..m {
                w += q[(i, l)] * v[l];
            }
            w *= tau;
            for l in k..m {
                let d = w * v[l].conj();
                q[(i, l)] -= d;
            }
        }
        r[(k, k)] = alpha;
        for i in (k + 1)..m {
            r[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }

    let mut r_sq = MatrixC::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            r_sq[(i, j)] = r[(i, j)];
        }
    }
    for k in 0..n {
        let d = r_sq[(k, k)];
        if d.norm() > 0.0 {
            let ph = d / d.norm();
            r_sq.scale_row(k, ph.conj());
            r_sq[(k, k)] = Complex64::new(d.norm(), 0.0);
            q.scale_col(k, ph);
        }
    }
    (q, r_sq)
}

fn check_rank(a: &MatrixC, r: &MatrixC) -> Result<(), DecompError> {
    let sigma_max = singular_values(a)[0];
    let tol = RANK_TOLERANCE * sigma_max;
    let smallest = r
        .diagonal()
        .iter()
        .map(|z| z.re)
        .fold(f64::INFINITY, f64::min);
    if !(smallest >= tol) || sigma_max == 0.0 {
        return Err(DecompError::RankDeficient {
            smallest,
            tolerance: tol,
        });
    }
    Ok(())
}

/// Thin QR `a = q * r` of a full-column-rank matrix with `rows >= cols`.
///
/// `q` has orthonormal columns, `r` is upper triangular with a real
/// positive diagonal.
pub fn qr_reduce(a: &MatrixC) -> Result<(MatrixC, MatrixC), DecompError> {
    if a.rows() < a.cols() {
        return Err(DecompError::Dimension(format!(
            "qr_reduce needs rows >= cols, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let (q, r) = householder_full(a);
    check_rank(a, &r)?;
    Ok((q.columns(0, a.cols()), r))
}

/// RQ-type factorization `a = r * q†` of a square nonsingular matrix with
/// `r` upper triangular (real positive diagonal) and `q` unitary.
pub fn rq_reduce(a: &MatrixC) -> Result<(MatrixC, MatrixC), DecompError> {
    if !a.is_square() {
        return Err(DecompError::Dimension(format!(
            "rq_reduce needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    // a† J = Q1 R1  =>  a = (J R1† J) (Q1 J)†
    let mut b = a.adjoint();
    for j in 0..n / 2 {
        b.swap_cols(j, n - 1 - j);
    }
    let (q1, r1) = householder_full(&b);
    check_rank(a, &r1)?;
    let mut r = MatrixC::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            r[(i, j)] = r1[(n - 1 - j, n - 1 - i)].conj();
        }
    }
    let mut q = q1;
    for j in 0..n / 2 {
        q.swap_cols(j, n - 1 - j);
    }
    Ok((r, q))
}
