//! Geometric mean decomposition `m = u * r * v†`.
//!
//! Starts from the SVD and walks down the diagonal. At step `k` the
//! largest and smallest of the remaining singular values are brought to
//! positions `k` and `k + 1`, and a pair of real plane rotations turns the
//! `2 x 2` diagonal block into an upper triangular block whose leading entry
//! is the geometric mean. The trailing entry receives the
//! product-preserving complement, so the geometric mean of what remains is
//! unchanged.

use num_complex::Complex64;
use serde::Serialize;

use super::matrix::MatrixC;
use super::svd::svd;
use super::{DecompError, GMD_DIAG_TOLERANCE, RANK_TOLERANCE};

#[derive(Debug, Clone, Serialize)]
pub struct GmdFactors {
    pub u: MatrixC,
    pub r: MatrixC,
    pub v: MatrixC,
    pub sigma_bar: f64,
}

pub fn gmd(m: &MatrixC) -> Result<GmdFactors, DecompError> {
    if !m.is_square() {
        return Err(DecompError::Dimension(format!(
            "gmd needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let d = svd(m);
    let sigma_max = d.s[0];
    let sigma_min = d.s[n - 1];
    let tol = RANK_TOLERANCE * sigma_max;
    if !(sigma_min > tol) {
        return Err(DecompError::RankDeficient {
            smallest: sigma_min,
            tolerance: tol,
        });
    }
    let sigma_bar = (d.s.iter().map(|s| s.ln()).sum::<f64>() / n as f64).exp();

    let mut u = d.u;
    let mut v = d.v;
    let mut r = MatrixC::from_real_diag(&d.s);

    for k in 0..n.saturating_sub(1) {
        let (hi, lo) = extreme_indices(&r, k);
        permute(&mut r, &mut u, &mut v, k, hi);
        // `lo` may have been displaced by the first swap.
        let lo = if lo == k { hi } else { lo };
        permute(&mut r, &mut u, &mut v, k + 1, lo);

        let d1 = r[(k, k)].re;
        let d2 = r[(k + 1, k + 1)].re;
        let spread = d1 * d1 - d2 * d2;
        if spread <= f64::EPSILON * sigma_bar * sigma_bar {
            continue;
        }
        let c = ((sigma_bar * sigma_bar - d2 * d2) / spread)
            .clamp(0.0, 1.0)
            .sqrt();
        let s = (1.0 - c * c).sqrt();
        let c2 = c * d1 / sigma_bar;
        let s2 = s * d2 / sigma_bar;

        r.rotate_cols(k, k + 1, c, s);
        v.rotate_cols(k, k + 1, c, s);
        rotate_rows(&mut r, k, k + 1, c2, s2);
        u.rotate_cols(k, k + 1, c2, s2);
        r[(k + 1, k)] = Complex64::new(0.0, 0.0);
    }

    let worst = r
        .diagonal()
        .iter()
        .map(|z| (z - sigma_bar).norm())
        .fold(0.0f64, f64::max);
    if worst > GMD_DIAG_TOLERANCE * sigma_bar {
        return Err(DecompError::Convergence {
            deviation: worst / sigma_bar,
        });
    }

    Ok(GmdFactors { u, r, v, sigma_bar })
}

/// Indices of the largest and smallest diagonal entries in `k..`, lowest
/// index on ties.
fn extreme_indices(r: &MatrixC, k: usize) -> (usize, usize) {
    let mut hi = k;
    let mut lo = k;
    for i in (k + 1)..r.rows() {
        let x = r[(i, i)].re;
        if x > r[(hi, hi)].re {
            hi = i;
        }
        if x < r[(lo, lo)].re {
            lo = i;
        }
    }
    (hi, lo)
}

fn permute(r: &mut MatrixC, u: &mut MatrixC, v: &mut MatrixC, a: usize, b: usize) {
    if a == b {
        return;
    }
    r.swap_rows(a, b);
    r.swap_cols(a, b);
    u.swap_cols(a, b);
    v.swap_cols(a, b);
}

/// Left-multiplies rows `(p, q)` by the transpose of `[c -s; s c]`.
fn rotate_rows(m: &mut MatrixC, p: usize, q: usize, c: f64, s: f64) {
    for j in 0..m.cols() {
        let a = m[(p, j)];
        let b = m[(q, j)];
        m[(p, j)] = a * c + b * s;
        m[(q, j)] = -a * s + b * c;
    }
}
