//! Structured PNC transmission chain over the jointly triangularized MAC.
//!
//! Each subchannel `k` carries a nested lattice code built from a scaled
//! complex integer grid: the coarse lattice is `beta * Z[i]`, the fine
//! lattice is `(beta / M_k) * Z[i]`. Terminals precode sequentially so that
//! the relay sees, on every subchannel, the mod-coarse sum of the two
//! terminals' lattice points plus scaled noise.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomp::MatrixC;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PncError {
    #[error("bad nesting orders: {0}")]
    BadOrders(String),
    #[error("symbol index ({a}, {b}) out of range for order {order}")]
    IndexOutOfRange { a: u32, b: u32, order: u32 },
    #[error("dimension error: {0}")]
    Dimension(String),
}

/// Coarse/fine cubic lattice pair, one fine lattice per subchannel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedLatticeCode {
    beta: f64,
    orders: Vec<u32>,
}

impl NestedLatticeCode {
    /// Coarse cell side per real dimension.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    pub fn n_r(&self) -> usize {
        self.orders.len()
    }

    /// Fine-lattice spacing per real dimension on subchannel `k`.
    pub fn pitch(&self, k: usize) -> f64 {
        self.beta / self.orders[k] as f64
    }

    /// Bits per complex symbol carried on subchannel `k`.
    pub fn rate_bits(&self, k: usize) -> f64 {
        2.0 * (self.orders[k] as f64).log2()
    }

    /// Second moment of the coarse cell per complex symbol.
    pub fn second_moment(&self) -> f64 {
        self.beta * self.beta / 6.0
    }
}

/// Scales the coarse lattice so its cell has second moment `power / n_r`.
pub fn code_from_power(
    power: f64,
    n_r: usize,
    orders: &[u32],
) -> Result<NestedLatticeCode, PncError> {
    if orders.len() != n_r {
        return Err(PncError::BadOrders(format!(
            "{} orders for {n_r} subchannels",
            orders.len()
        )));
    }
    if orders.contains(&0) {
        return Err(PncError::BadOrders("orders must be at least 1".into()));
    }
    if !(power > 0.0 && power.is_finite()) {
        return Err(PncError::BadOrders(format!(
            "power must be positive, got {power}"
        )));
    }
    Ok(NestedLatticeCode {
        beta: (6.0 * power / n_r as f64).sqrt(),
        orders: orders.to_vec(),
    })
}

/// Nesting order supporting `rate` bits per complex symbol:
/// `floor(2^(rate/2))`, at least 1.
pub fn order_for_rate(rate: f64) -> u32 {
    if !(rate > 0.0) {
        return 1;
    }
    (2f64.powf(rate / 2.0).floor() as u32).max(1)
}

/// Per-symbol index pairs `(a, b)`, each in `0..M_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubMessage {
    pub symbols: Vec<(u32, u32)>,
}

/// A codeword: fine-lattice points reduced into the centered coarse cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeWord(pub Vec<Complex64>);

impl LatticeWord {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[inline]
fn mod_real(x: f64, beta: f64) -> f64 {
    let r = x - beta * (x / beta + 0.5).floor();
    // Rounding in the quotient can land a hair outside the half-open cell.
    let half = 0.5 * beta;
    if r < -half {
        r + beta
    } else if r >= half {
        r - beta
    } else {
        r
    }
}

/// Reduces each real dimension into `[-beta/2, beta/2)`.
#[inline]
pub fn mod_coarse(z: Complex64, beta: f64) -> Complex64 {
    Complex64::new(mod_real(z.re, beta), mod_real(z.im, beta))
}

#[inline]
fn quantize_fine(z: Complex64, pitch: f64, beta: f64) -> Complex64 {
    let q = Complex64::new(
        (z.re / pitch).round() * pitch,
        (z.im / pitch).round() * pitch,
    );
    mod_coarse(q, beta)
}

pub fn encode(
    msg: &SubMessage,
    k: usize,
    code: &NestedLatticeCode,
) -> Result<LatticeWord, PncError> {
    let order = *code
        .orders
        .get(k)
        .ok_or_else(|| PncError::Dimension(format!("subchannel {k} out of range")))?;
    let pitch = code.pitch(k);
    msg.symbols
        .iter()
        .map(|&(a, b)| {
            if a >= order || b >= order {
                return Err(PncError::IndexOutOfRange { a, b, order });
            }
            Ok(mod_coarse(
                Complex64::new(a as f64 * pitch, b as f64 * pitch),
                code.beta,
            ))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(LatticeWord)
}

/// Inverse of [`encode`]: maps each entry to its nearest fine point and
/// returns the coset indices.
pub fn word_to_message(word: &LatticeWord, k: usize, code: &NestedLatticeCode) -> SubMessage {
    let order = code.orders[k] as i64;
    let pitch = code.pitch(k);
    let index = |x: f64| ((x / pitch).round() as i64).rem_euclid(order) as u32;
    SubMessage {
        symbols: word.0.iter().map(|z| (index(z.re), index(z.im))).collect(),
    }
}

/// Sequential mod-coarse precoder for one terminal.
///
/// Row `k` of the output is
/// `mod(l_k - (1/t_k) * sum_{j<k} T[k][j] * x_j)`, computed for ascending `k`.
/// `t` is the terminal's generalized lower-triangular factor.
pub fn precode(
    words: &[LatticeWord],
    t: &MatrixC,
    diag: &[f64],
    code: &NestedLatticeCode,
) -> Result<MatrixC, PncError> {
    precode_dithered(words, t, diag, code, None)
}

/// [`precode`] with an optional shared dither (`N_r x n`) added to every
/// lattice point before reduction.
pub fn precode_dithered(
    words: &[LatticeWord],
    t: &MatrixC,
    diag: &[f64],
    code: &NestedLatticeCode,
    dither: Option<&MatrixC>,
) -> Result<MatrixC, PncError> {
    let n_r = diag.len();
    if words.len() != n_r || code.n_r() != n_r || t.rows() != n_r || t.cols() < n_r {
        return Err(PncError::Dimension(format!(
            "{} words, {} orders, {}x{} factor, {n_r} diagonal entries",
            words.len(),
            code.n_r(),
            t.rows(),
            t.cols()
        )));
    }
    let n = words.first().map_or(0, LatticeWord::len);
    if words.iter().any(|w| w.len() != n) {
        return Err(PncError::Dimension("words differ in length".into()));
    }
    check_dither(dither, n_r, n)?;
    if diag.iter().any(|d| !(*d > 0.0)) {
        return Err(PncError::Dimension(
            "diagonal entries must be positive".into(),
        ));
    }

    let mut x = MatrixC::zeros(n_r, n);
    for k in 0..n_r {
        let inv_t = 1.0 / diag[k];
        for s in 0..n {
            let mut interference = Complex64::new(0.0, 0.0);
            for j in 0..k {
                interference += t[(k, j)] * x[(j, s)];
            }
            // Reducing the word first makes the output independent of which
            // coset representative the caller passed.
            let mut v = mod_coarse(words[k].0[s], code.beta) - interference * inv_t;
            if let Some(d) = dither {
                v += d[(k, s)];
            }
            x[(k, s)] = mod_coarse(v, code.beta);
        }
    }
    Ok(x)
}

fn check_dither(dither: Option<&MatrixC>, n_r: usize, n: usize) -> Result<(), PncError> {
    match dither {
        Some(d) if (d.rows(), d.cols()) != (n_r, n) => Err(PncError::Dimension(format!(
            "dither is {}x{}, expected {n_r}x{n}",
            d.rows(),
            d.cols()
        ))),
        _ => Ok(()),
    }
}

/// `X = V [x_tilde; 0]`: spreads the `N_r` precoded rows over the
/// terminal's `N_t` antennas.
pub fn transmit(v: &MatrixC, x_tilde: &MatrixC) -> Result<MatrixC, PncError> {
    if !v.is_square() || v.cols() < x_tilde.rows() {
        return Err(PncError::Dimension(format!(
            "{}x{} rotation cannot carry {} streams",
            v.rows(),
            v.cols(),
            x_tilde.rows()
        )));
    }
    Ok(&v.columns(0, x_tilde.rows()) * x_tilde)
}

/// Relay processing: rotate by `u†`, scale each row by `1/t_k`, and decode
/// the nearest fine-lattice point modulo the coarse lattice.
pub fn relay_decode(
    y: &MatrixC,
    u: &MatrixC,
    diag: &[f64],
    code: &NestedLatticeCode,
) -> Result<Vec<LatticeWord>, PncError> {
    relay_decode_dithered(y, u, diag, code, None)
}

/// [`relay_decode`] for transmissions that used a shared dither: the
/// dither enters the superposition twice and is removed before decoding.
pub fn relay_decode_dithered(
    y: &MatrixC,
    u: &MatrixC,
    diag: &[f64],
    code: &NestedLatticeCode,
    dither: Option<&MatrixC>,
) -> Result<Vec<LatticeWord>, PncError> {
    let n_r = diag.len();
    if !u.is_square() || u.rows() != n_r || y.rows() != n_r || code.n_r() != n_r {
        return Err(PncError::Dimension(format!(
            "{}x{} observation, {}x{} rotation, {n_r} subchannels",
            y.rows(),
            y.cols(),
            u.rows(),
            u.cols()
        )));
    }
    check_dither(dither, n_r, y.cols())?;
    let y_rot = &u.adjoint() * y;
    Ok((0..n_r)
        .map(|k| {
            let pitch = code.pitch(k);
            let inv_t = 1.0 / diag[k];
            LatticeWord(
                y_rot
                    .row(k)
                    .iter()
                    .enumerate()
                    .map(|(s, &z)| {
                        let mut v = z * inv_t;
                        if let Some(d) = dither {
                            v -= d[(k, s)] * 2.0;
                        }
                        quantize_fine(mod_coarse(v, code.beta), pitch, code.beta)
                    })
                    .collect(),
            )
        })
        .collect())
}

/// Removes a terminal's own codeword from the decoded sum.
pub fn terminal_combine(
    l_hat: &LatticeWord,
    own: &LatticeWord,
    code: &NestedLatticeCode,
) -> Result<LatticeWord, PncError> {
    if l_hat.len() != own.len() {
        return Err(PncError::Dimension(format!(
            "decoded word has {} symbols, own word {}",
            l_hat.len(),
            own.len()
        )));
    }
    Ok(LatticeWord(
        l_hat
            .0
            .iter()
            .zip(&own.0)
            .map(|(a, b)| {
                mod_coarse(
                    mod_coarse(*a, code.beta) - mod_coarse(*b, code.beta),
                    code.beta,
                )
            })
            .collect(),
    ))
}
