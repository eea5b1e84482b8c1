//! One-sided (Hestenes) Jacobi singular value decomposition.

use num_complex::Complex64;

use super::matrix::MatrixC;

const MAX_SWEEPS: usize = 80;

/// Thin SVD `a = u * diag(s) * v†` with `s` sorted in descending order.
///
/// For an `m x n` input, `u` is `m x k`, `v` is `n x k` with
/// `k = min(m, n)`. Columns of `u` paired with a zero singular value are
/// left as zero vectors.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: MatrixC,
    pub s: Vec<f64>,
    pub v: MatrixC,
}

pub fn svd(a: &MatrixC) -> Svd {
    if a.rows() < a.cols() {
        let t = jacobi_tall(&a.adjoint());
        return Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        };
    }
    jacobi_tall(a)
}

/// Singular values in descending order.
pub fn singular_values(a: &MatrixC) -> Vec<f64> {
    svd(a).s
}

fn jacobi_tall(a: &MatrixC) -> Svd {
    let (m, n) = (a.rows(), a.cols());
    let mut w = a.clone();
    let mut v = MatrixC::identity(n);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = Complex64::new(0.0, 0.0);
                for i in 0..m {
                    let x = w[(i, p)];
                    let y = w[(i, q)];
                    alpha += x.norm_sqr();
                    beta += y.norm_sqr();
                    gamma += x.conj() * y;
                }
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let x = w[(i, p)];
                    let y = w[(i, q)] * phase;
                    w[(i, p)] = x * c - y * s;
                    w[(i, q)] = x * s + y * c;
                }
                for i in 0..n {
                    let x = v[(i, p)];
                    let y = v[(i, q)] * phase;
                    v[(i, p)] = x * c - y * s;
                    v[(i, q)] = x * s + y * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| w[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps the original column order among equal values.
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));

    let mut u = MatrixC::zeros(m, n);
    let mut vs = MatrixC::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        s.push(sigma);
        if sigma > 0.0 {
            for i in 0..m {
                u[(i, dst)] = w[(i, src)] / sigma;
            }
        }
        for i in 0..n {
            vs[(i, dst)] = v[(i, src)];
        }
    }
    Svd { u, s, v: vs }
}
