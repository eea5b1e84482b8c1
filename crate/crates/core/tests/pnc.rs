mod common;

use common::{normalized_pair, reciprocal_pair, rng};
use mimo_pnc::pnc::{
    code_from_power, encode, mod_coarse, precode, relay_decode, terminal_combine, transmit,
    word_to_message,
};
use mimo_pnc::sim::awgn_mac;
use mimo_pnc::{jet, Complex64, LatticeWord, MatrixC, SubMessage};
use proptest::prelude::*;
use rand::Rng;

fn random_message<R: Rng>(r: &mut R, order: u32, n: usize) -> SubMessage {
    SubMessage {
        symbols: (0..n)
            .map(|_| (r.random_range(0..order), r.random_range(0..order)))
            .collect(),
    }
}

fn shift(word: &LatticeWord, beta: f64, offsets: &[(i32, i32)]) -> LatticeWord {
    LatticeWord(
        word.0
            .iter()
            .zip(offsets.iter().cycle())
            .map(|(z, &(a, b))| z + Complex64::new(a as f64 * beta, b as f64 * beta))
            .collect(),
    )
}

#[test]
fn uniform_cell_has_target_second_moment() {
    let code = code_from_power(5.0, 2, &[4, 4]).unwrap();
    let beta = code.beta();
    let mut r = rng(31);
    let n = 100_000;
    let total: f64 = (0..n)
        .map(|_| {
            let z = Complex64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5) * beta;
            z.norm_sqr()
        })
        .sum();
    let mean = total / n as f64;
    assert!((mean / 2.5 - 1.0).abs() < 0.02, "{mean}");
    assert!((code.second_moment() - 2.5).abs() < 1e-12 * 2.5);
}

#[test]
fn combine_cancels_own_word_on_random_triples() {
    let mut r = rng(32);
    for order in [2u32, 4, 8] {
        let code = code_from_power(3.7, 1, &[order]).unwrap();
        for _ in 0..10_000 / 3 + 1 {
            let own = encode(&random_message(&mut r, order, 1), 0, &code).unwrap();
            let partner_msg = random_message(&mut r, order, 1);
            let partner = encode(&partner_msg, 0, &code).unwrap();
            let sum = LatticeWord(vec![mod_coarse(own.0[0] + partner.0[0], code.beta())]);
            let got = terminal_combine(&sum, &own, &code).unwrap();
            assert_eq!(word_to_message(&got, 0, &code), partner_msg);
            assert!((got.0[0] - partner.0[0]).norm() < 1e-12 * code.beta());
        }
    }
}

#[test]
fn transmit_is_inverted_by_adjoint() {
    let mut r = rng(33);
    let (h1, h2) = normalized_pair(&mut r, 3, 5, 3);
    let f = jet(&h1, &h2).unwrap();
    let x = common::gaussian_matrix(&mut r, 3, 20);
    let tx = transmit(&f.v1, &x).unwrap();
    let back = &f.v1.adjoint() * &tx;
    for i in 0..3 {
        for j in 0..20 {
            assert!((back[(i, j)] - x[(i, j)]).norm() < 1e-12);
        }
    }
    for i in 3..5 {
        assert!(back.row(i).iter().all(|z| z.norm() < 1e-12));
    }
}

/// Messages, encode, precode, transmit, noiseless MAC, relay, combine.
fn loopback_exact(h1: &MatrixC, h2: &MatrixC, power: f64, orders: &[u32], seed: u64) -> bool {
    let f = jet(h1, h2).unwrap();
    let code = code_from_power(power, f.n_r(), orders).unwrap();
    let mut r = rng(seed);
    let n = 32;
    let msgs: Vec<Vec<SubMessage>> = (0..2)
        .map(|_| {
            orders
                .iter()
                .map(|&m| random_message(&mut r, m, n))
                .collect()
        })
        .collect();
    let words: Vec<Vec<LatticeWord>> = msgs
        .iter()
        .map(|ms| {
            ms.iter()
                .enumerate()
                .map(|(k, m)| encode(m, k, &code).unwrap())
                .collect()
        })
        .collect();
    let x1 = transmit(&f.v1, &precode(&words[0], &f.t1, &f.diag, &code).unwrap()).unwrap();
    let x2 = transmit(&f.v2, &precode(&words[1], &f.t2, &f.diag, &code).unwrap()).unwrap();
    let y = awgn_mac(h1, h2, &x1, &x2, None).unwrap();
    let decoded = relay_decode(&y, &f.u, &f.diag, &code).unwrap();
    (0..f.n_r()).all(|k| {
        let at1 = terminal_combine(&decoded[k], &words[0][k], &code).unwrap();
        let at2 = terminal_combine(&decoded[k], &words[1][k], &code).unwrap();
        word_to_message(&at1, k, &code) == msgs[1][k]
            && word_to_message(&at2, k, &code) == msgs[0][k]
    })
}

#[test]
fn noiseless_chain_recovers_partner_messages() {
    let (h1, h2) = reciprocal_pair();
    assert!(loopback_exact(&h1, &h2, 10.0, &[4, 4], 1));
    let i2 = MatrixC::identity(2);
    assert!(loopback_exact(&i2, &i2, 3.0, &[8, 2], 2));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn noiseless_chain_on_random_pairs(seed in any::<u64>(), n_r in 1usize..=4, e1 in 0usize..=2, e2 in 0usize..=2, lp in -1.0f64..4.0) {
        let mut r = rng(seed);
        let (h1, h2) = normalized_pair(&mut r, n_r, n_r + e1, n_r + e2);
        let orders: Vec<u32> = (0..n_r).map(|_| r.random_range(1..=8)).collect();
        prop_assert!(loopback_exact(&h1, &h2, 10f64.powf(lp), &orders, seed ^ 0x5eed));
    }

    #[test]
    fn precode_ignores_coarse_shifts(seed in any::<u64>(), offs in prop::collection::vec((-3i32..=3, -3i32..=3), 1..8)) {
        let mut r = rng(seed);
        let (h1, h2) = normalized_pair(&mut r, 3, 3, 4);
        let f = jet(&h1, &h2).unwrap();
        let orders = [4u32, 2, 8];
        // beta = 4 and power-of-two orders keep lattice points and their
        // shifts exactly representable, so invariance is bit-exact.
        let code = code_from_power(8.0, 3, &orders).unwrap();
        prop_assert_eq!(code.beta(), 4.0);
        let words: Vec<LatticeWord> = orders
            .iter()
            .enumerate()
            .map(|(k, &m)| encode(&random_message(&mut r, m, 16), k, &code).unwrap())
            .collect();
        let shifted: Vec<LatticeWord> = words.iter().map(|w| shift(w, code.beta(), &offs)).collect();
        let a = precode(&words, &f.t1, &f.diag, &code).unwrap();
        let b = precode(&shifted, &f.t1, &f.diag, &code).unwrap();
        prop_assert_eq!(a.as_slice(), b.as_slice());
        let own = &words[0];
        let l_hat = &words[1];
        let c1 = terminal_combine(l_hat, own, &code).unwrap();
        let c2 = terminal_combine(&shift(l_hat, code.beta(), &offs), &shift(own, code.beta(), &offs[1..].iter().chain(&offs[..1]).copied().collect::<Vec<_>>()), &code).unwrap();
        prop_assert_eq!(c1, c2);
    }
}
