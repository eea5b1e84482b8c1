//! Seeded Monte Carlo harness for the PNC chain over the physical MAC.
//!
//! Randomness comes from ChaCha20 (`rand_chacha`): trial `i` of a run
//! with seed `s` uses the generator seeded with `s` on stream `i`, so every
//! trial is reproducible on its own and results do not depend on thread
//! scheduling. Within a trial, draws happen in a fixed order: terminal 1
//! indices, terminal 2 indices, dither (if enabled), then channel noise.
//! Gaussian variates use the Box-Muller transform of two uniform draws.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::erf::erfc;
use thiserror::Error;

use crate::decomp::{jet, DecompError, JetFactors, MatrixC};
use crate::pnc::{
    code_from_power, encode, precode_dithered, relay_decode_dithered, terminal_combine, transmit,
    word_to_message, LatticeWord, NestedLatticeCode, PncError, SubMessage,
};
use crate::rates::TwoWayNetwork;

/// Folding terms `|m| <= FOLD_TERMS` kept in [`predict_ser`].
pub const FOLD_TERMS: i32 = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Decomp(#[from] DecompError),
    #[error(transparent)]
    Pnc(#[from] PncError),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}

/// Source of circularly-symmetric complex Gaussian samples with unit
/// variance (1/2 per real dimension).
pub trait NoiseSource {
    fn sample(&mut self) -> Complex64;
}

/// Box-Muller complex Gaussian over any `RngCore`.
#[derive(Debug, Clone)]
pub struct BoxMuller<R> {
    rng: R,
}

impl<R: RngCore> BoxMuller<R> {
    pub fn new(rng: R) -> Self {
        Self { rng }
    }
}

impl<R: RngCore> NoiseSource for BoxMuller<R> {
    fn sample(&mut self) -> Complex64 {
        // u1 in (0, 1] keeps the logarithm finite.
        let u1 = 1.0 - self.rng.random::<f64>();
        let u2 = self.rng.random::<f64>();
        // sqrt(-2 ln u1) / sqrt(2): variance 1/2 per real dimension.
        let r = (-u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        Complex64::new(r * c, r * s)
    }
}

/// `y = h1 x1 + h2 x2 + z`. Passing `None` for `noise` gives the noiseless
/// channel.
pub fn awgn_mac(
    h1: &MatrixC,
    h2: &MatrixC,
    x1: &MatrixC,
    x2: &MatrixC,
    noise: Option<&mut dyn NoiseSource>,
) -> Result<MatrixC, SimError> {
    if h1.rows() != h2.rows()
        || h1.cols() != x1.rows()
        || h2.cols() != x2.rows()
        || x1.cols() != x2.cols()
    {
        return Err(SimError::Decomp(DecompError::Dimension(format!(
            "{}x{} * {}x{} + {}x{} * {}x{}",
            h1.rows(),
            h1.cols(),
            x1.rows(),
            x1.cols(),
            h2.rows(),
            h2.cols(),
            x2.rows(),
            x2.cols()
        ))));
    }
    let mut y = &(h1 * x1) + &(h2 * x2);
    if let Some(src) = noise {
        for i in 0..y.rows() {
            for z in y.row_mut(i) {
                *z += src.sample();
            }
        }
    }
    Ok(y)
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub net: TwoWayNetwork,
    /// Nesting order `M_k` per subchannel.
    pub orders: Vec<u32>,
    pub block_length: usize,
    pub trials: usize,
    pub seed: u64,
    pub noiseless: bool,
    /// Shared uniform dither over the coarse cell. Off by default.
    pub dither: bool,
}

impl SimConfig {
    pub fn new(
        net: TwoWayNetwork,
        orders: Vec<u32>,
        block_length: usize,
        trials: usize,
        seed: u64,
    ) -> Self {
        Self {
            net,
            orders,
            block_length,
            trials,
            seed,
            noiseless: false,
            dither: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimOutcome {
    pub diag: Vec<f64>,
    pub orders: Vec<u32>,
    pub beta: f64,
    /// Relay symbols per subchannel.
    pub symbols: Vec<u64>,
    /// Relay symbol errors against the mod-coarse sum codeword.
    pub errors: Vec<u64>,
    pub ser: Vec<f64>,
    pub ser_stderr: Vec<f64>,
    pub predicted_ser: Vec<f64>,
    /// Symbols where terminal `i` failed to recover its partner's indices.
    pub terminal_failures: [u64; 2],
    /// Average `|X_i|^2` per channel use.
    pub empirical_power: [f64; 2],
}

impl SimOutcome {
    /// True when neither the relay nor either terminal made an error.
    pub fn is_clean(&self) -> bool {
        self.errors.iter().all(|&e| e == 0) && self.terminal_failures == [0, 0]
    }
}

/// Symbol error probability of the mod-coarse channel on subchannel `k`.
///
/// The effective noise per real dimension is Gaussian with
/// `sigma = 1 / (t_k sqrt 2)`; a symbol is correct when both real
/// dimensions land within half a fine pitch of any coarse translate of the
/// transmitted point.
pub fn predict_ser(t_k: f64, code: &NestedLatticeCode, k: usize) -> f64 {
    let sigma = 1.0 / (t_k * SQRT_2);
    let beta = code.beta();
    let half = code.pitch(k) / 2.0;
    let phi = |x: f64| 0.5 * erfc(-x / SQRT_2);
    let correct: f64 = (-FOLD_TERMS..=FOLD_TERMS)
        .map(|m| {
            let centre = m as f64 * beta;
            phi((centre + half) / sigma) - phi((centre - half) / sigma)
        })
        .sum();
    let p_dim = (1.0 - correct).clamp(0.0, 1.0);
    1.0 - (1.0 - p_dim) * (1.0 - p_dim)
}

#[derive(Debug, Clone, Default)]
struct Tally {
    errors: Vec<u64>,
    terminal_failures: [u64; 2],
    energy: [f64; 2],
}

fn random_message<R: Rng>(rng: &mut R, order: u32, n: usize) -> SubMessage {
    SubMessage {
        symbols: (0..n)
            .map(|_| (rng.random_range(0..order), rng.random_range(0..order)))
            .collect(),
    }
}

fn run_trial(
    cfg: &SimConfig,
    f: &JetFactors,
    code: &NestedLatticeCode,
    trial: u64,
) -> Result<Tally, SimError> {
    let n_r = f.n_r();
    let n = cfg.block_length;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial);

    let mut msgs: [Vec<SubMessage>; 2] = [Vec::new(), Vec::new()];
    for m in msgs.iter_mut() {
        *m = cfg
            .orders
            .iter()
            .map(|&order| random_message(&mut rng, order, n))
            .collect();
    }
    let dither = if cfg.dither {
        let beta = code.beta();
        let mut d = MatrixC::zeros(n_r, n);
        for k in 0..n_r {
            for z in d.row_mut(k) {
                let re = (rng.random::<f64>() - 0.5) * beta;
                let im = (rng.random::<f64>() - 0.5) * beta;
                *z = Complex64::new(re, im);
            }
        }
        Some(d)
    } else {
        None
    };

    let mut words: [Vec<LatticeWord>; 2] = [Vec::new(), Vec::new()];
    let mut tx: Vec<MatrixC> = Vec::with_capacity(2);
    let mut tally = Tally {
        errors: vec![0; n_r],
        ..Tally::default()
    };
    for i in 0..2 {
        words[i] = msgs[i]
            .iter()
            .enumerate()
            .map(|(k, m)| encode(m, k, code))
            .collect::<Result<_, _>>()?;
        let x_tilde = precode_dithered(&words[i], f.t(i + 1), &f.diag, code, dither.as_ref())?;
        let x = transmit(f.v(i + 1), &x_tilde)?;
        tally.energy[i] = x.frobenius_norm().powi(2);
        tx.push(x);
    }

    let mut noise = BoxMuller::new(&mut rng);
    let noise: Option<&mut dyn NoiseSource> = if cfg.noiseless {
        None
    } else {
        Some(&mut noise)
    };
    let y = awgn_mac(cfg.net.h1(), cfg.net.h2(), &tx[0], &tx[1], noise)?;
    let decoded = relay_decode_dithered(&y, &f.u, &f.diag, code, dither.as_ref())?;

    for k in 0..n_r {
        let order = cfg.orders[k];
        let got = word_to_message(&decoded[k], k, code);
        let (m1, m2) = (&msgs[0][k].symbols, &msgs[1][k].symbols);
        for s in 0..n {
            let want = ((m1[s].0 + m2[s].0) % order, (m1[s].1 + m2[s].1) % order);
            if got.symbols[s] != want {
                tally.errors[k] += 1;
            }
        }
        for (i, partner) in [(0usize, m2), (1, m1)] {
            let est = terminal_combine(&decoded[k], &words[i][k], code)?;
            let est = word_to_message(&est, k, code);
            tally.terminal_failures[i] += est
                .symbols
                .iter()
                .zip(partner)
                .filter(|(a, b)| a != b)
                .count() as u64;
        }
    }
    Ok(tally)
}

/// Runs `cfg.trials` independent blocks through the full chain and
/// aggregates relay and terminal error counts.
pub fn run_mc(cfg: &SimConfig) -> Result<SimOutcome, SimError> {
    if cfg.trials == 0 || cfg.block_length == 0 {
        return Err(SimError::InvalidConfig(
            "trials and block_length must be at least 1".into(),
        ));
    }
    let f = jet(cfg.net.h1(), cfg.net.h2())?;
    let n_r = f.n_r();
    let code = code_from_power(cfg.net.power(), n_r, &cfg.orders)?;

    let tallies = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|trial| run_trial(cfg, &f, &code, trial))
        .collect::<Result<Vec<_>, _>>()?;

    let mut errors = vec![0u64; n_r];
    let mut terminal_failures = [0u64; 2];
    let mut energy = [0.0f64; 2];
    for t in &tallies {
        for (e, x) in errors.iter_mut().zip(&t.errors) {
            *e += x;
        }
        for i in 0..2 {
            terminal_failures[i] += t.terminal_failures[i];
            energy[i] += t.energy[i];
        }
    }
    let per_sub = (cfg.trials * cfg.block_length) as u64;
    let symbols = vec![per_sub; n_r];
    let ser: Vec<f64> = errors.iter().map(|&e| e as f64 / per_sub as f64).collect();
    let ser_stderr = ser
        .iter()
        .map(|&p| (p * (1.0 - p) / per_sub as f64).sqrt())
        .collect();
    let predicted_ser = if cfg.noiseless {
        vec![0.0; n_r]
    } else {
        (0..n_r).map(|k| predict_ser(f.diag[k], &code, k)).collect()
    };

    Ok(SimOutcome {
        diag: f.diag.clone(),
        orders: cfg.orders.clone(),
        beta: code.beta(),
        symbols,
        errors,
        ser,
        ser_stderr,
        predicted_ser,
        terminal_failures,
        empirical_power: energy.map(|e| e / per_sub as f64),
    })
}

/// Noiseless run of the full chain. A clean outcome certifies the
/// mod-lattice channel identity on this channel pair.
pub fn run_loopback(cfg: &SimConfig) -> Result<SimOutcome, SimError> {
    let cfg = SimConfig {
        noiseless: true,
        ..cfg.clone()
    };
    run_mc(&cfg)
}
