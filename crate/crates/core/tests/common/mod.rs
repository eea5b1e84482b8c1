#![allow(dead_code)]

use mimo_pnc::decomp::singular_values;
use mimo_pnc::{Complex64, MatrixC};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> MatrixC {
    let data = (0..rows * cols)
        .map(|_| {
            Complex64::new(
                rng.random::<f64>() * 2.0 - 1.0,
                rng.random::<f64>() * 2.0 - 1.0,
            )
        })
        .collect();
    MatrixC::from_row_major(rows, cols, data).unwrap()
}

pub fn sv_product(h: &MatrixC) -> f64 {
    singular_values(h).iter().take(h.rows()).product()
}

/// Random pair with `h2` rescaled so both singular-value products match and
/// the first is normalized to one. Rejects badly conditioned draws.
pub fn normalized_pair<R: Rng>(
    rng: &mut R,
    n_r: usize,
    nt1: usize,
    nt2: usize,
) -> (MatrixC, MatrixC) {
    loop {
        let h1 = gaussian_matrix(rng, n_r, nt1);
        let h2 = gaussian_matrix(rng, n_r, nt2);
        let s1 = singular_values(&h1);
        let s2 = singular_values(&h2);
        if s1[0] / s1[n_r - 1] > 1e3 || s2[0] / s2[n_r - 1] > 1e3 {
            continue;
        }
        let p1: f64 = s1.iter().take(n_r).product();
        let p2: f64 = s2.iter().take(n_r).product();
        let g1 = p1.powf(-1.0 / n_r as f64);
        let g2 = p2.powf(-1.0 / n_r as f64);
        return (
            h1.scale(Complex64::new(g1, 0.0)),
            h2.scale(Complex64::new(g2, 0.0)),
        );
    }
}

pub fn reciprocal_pair() -> (MatrixC, MatrixC) {
    (
        MatrixC::from_real_diag(&[0.5, 2.0]),
        MatrixC::from_real_diag(&[2.0, 0.5]),
    )
}
