//! Acceptance suite. Prints one PASS/FAIL line per criterion, then fails if
//! any criterion failed. Run with `--nocapture` to see the lines on success.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use mimo_pnc::decomp::{gmd, gram_determinant, singular_values};
use mimo_pnc::rates::{df_rate, high_snr_gap, pnc_rate, timeshare_envelope};
use mimo_pnc::sim::{run_loopback, run_mc};
use mimo_pnc::{jet, validate_jet, Complex64, MatrixC, RateMode, SimConfig, TwoWayNetwork};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn random_matrix<R: Rng>(r: &mut R, rows: usize, cols: usize) -> MatrixC {
    let data = (0..rows * cols)
        .map(|_| Complex64::new(r.random::<f64>() * 2.0 - 1.0, r.random::<f64>() * 2.0 - 1.0))
        .collect();
    MatrixC::from_row_major(rows, cols, data).unwrap()
}

fn scaled(h: &MatrixC, target_product: f64) -> MatrixC {
    let n = h.rows();
    let p: f64 = singular_values(h).iter().take(n).product();
    h.scale(Complex64::new(
        (target_product / p).powf(1.0 / n as f64),
        0.0,
    ))
}

/// Well-conditioned random pair; `h2` rescaled to the singular-value
/// product of `h1`, or both normalized to product one.
fn random_pair<R: Rng>(
    r: &mut R,
    n_r: usize,
    nt1: usize,
    nt2: usize,
    normalize: bool,
) -> (MatrixC, MatrixC) {
    loop {
        let h1 = random_matrix(r, n_r, nt1);
        let h2 = random_matrix(r, n_r, nt2);
        let s1 = singular_values(&h1);
        let s2 = singular_values(&h2);
        if s1[0] / s1[n_r - 1] > 1e3 || s2[0] / s2[n_r - 1] > 1e3 {
            continue;
        }
        if normalize {
            return (scaled(&h1, 1.0), scaled(&h2, 1.0));
        }
        let p1: f64 = s1.iter().take(n_r).product();
        return (h1, scaled(&h2, p1));
    }
}

fn reciprocal_pair(power: f64) -> TwoWayNetwork {
    TwoWayNetwork::new(
        MatrixC::from_real_diag(&[0.5, 2.0]),
        MatrixC::from_real_diag(&[2.0, 0.5]),
        power,
        f64::INFINITY,
    )
    .unwrap()
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn decomposition_suite() -> Verdict {
    let start = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(1);
    let mut worst = [0.0f64; 5];
    for case in 0..1000 {
        let n_r = 1 + case % 4;
        let (nt1, nt2) = (n_r + r.random_range(0..=2), n_r + r.random_range(0..=2));
        let (h1, h2) = random_pair(&mut r, n_r, nt1, nt2, false);
        let f = jet(&h1, &h2).unwrap();
        let rep = validate_jet(&f, &h1, &h2).unwrap();
        let prod: f64 = f.diag.iter().map(|t| t * t).product();
        let det = [&h1, &h2]
            .iter()
            .map(|h| {
                let d = gram_determinant(h);
                (prod - d).abs() / d
            })
            .fold(0.0f64, f64::max);
        let now = [
            rep.reconstruction_error_1.max(rep.reconstruction_error_2),
            rep.diag_mismatch,
            rep.unitarity_errors.max(),
            rep.triangularity_error,
            det,
        ];
        for (w, v) in worst.iter_mut().zip(now) {
            *w = w.max(v);
        }
    }
    let t = start.elapsed();
    let pass = worst[0] <= 1e-8
        && worst[1] <= 1e-8
        && worst[2] <= 1e-10
        && worst[3] <= 1e-9
        && worst[4] <= 1e-8
        && t < Duration::from_secs(10);
    Verdict {
        id: "1 decomposition suite",
        pass,
        detail: format!(
            "recon {:.1e}, diag {:.1e}, unitarity {:.1e}, triangularity {:.1e}, det {:.1e}, {:.2} s",
            worst[0], worst[1], worst[2], worst[3], worst[4], secs(t)
        ),
    }
}

fn gmd_suite() -> Verdict {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for case in 0..1000 {
        let m = 1 + case % 5;
        let a = random_matrix(&mut r, m, m);
        let oracle = DMatrix::from_fn(m, m, |i, j| a[(i, j)]).singular_values();
        let mean = (oracle.iter().map(|s| s.ln()).sum::<f64>() / m as f64).exp();
        let g = gmd(&a).unwrap();
        for k in 0..m {
            worst = worst.max((g.r[(k, k)] - Complex64::new(mean, 0.0)).norm());
        }
    }
    Verdict {
        id: "2 gmd diagonal",
        pass: worst <= 1e-9,
        detail: format!("max deviation from geometric mean {worst:.1e}"),
    }
}

fn reciprocal_pair_suite() -> Verdict {
    let net = reciprocal_pair(8.0);
    let f = jet(net.h1(), net.h2()).unwrap();
    let diag_dev = f
        .diag
        .iter()
        .map(|t| (t - 1.0).abs())
        .fold(0.0f64, f64::max);
    let rate = pnc_rate(&net, RateMode::ZfNaive).unwrap();
    let diag_ok = diag_dev <= 1e-8;
    let rate_ok = (rate - 4.0).abs() <= 1e-9;
    Verdict {
        id: "3 reciprocal pair",
        pass: diag_ok && rate_ok,
        detail: format!(
            "diag = ({:.9}, {:.9}) {}; r_pnc_zf(P=8) = {rate:.12} {}",
            f.diag[0],
            f.diag[1],
            if diag_ok { "ok" } else { "not (1, 1)" },
            if rate_ok { "ok" } else { "off" }
        ),
    }
}

fn gap_suite() -> Verdict {
    let at_1e4 = high_snr_gap(&reciprocal_pair(1e4)).unwrap();
    let gaps: Vec<f64> = log_grid(1e2, 1e8, 61)
        .iter()
        .map(|&p| high_snr_gap(&reciprocal_pair(p)).unwrap())
        .collect();
    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    Verdict {
        id: "4 high-snr gap",
        pass: at_1e4 < 0.01 && monotone,
        detail: format!(
            "gap(1e4) = {at_1e4:.3e}, strictly decreasing over 61 points: {monotone}, gap(1e8) = {:.3e}",
            gaps[60]
        ),
    }
}

fn crossover_suite() -> Verdict {
    let start = Instant::now();
    let grid = log_grid(0.25, 1e6, 50);
    let signs: Vec<bool> = grid
        .iter()
        .map(|&p| {
            let net = reciprocal_pair(p);
            pnc_rate(&net, RateMode::ZfNaive).unwrap() > df_rate(&net)
        })
        .collect();
    let flips = signs.windows(2).filter(|w| w[0] != w[1]).count();
    let crossover = !signs[0] && signs[49] && flips == 1;
    let cross_at = grid[signs.iter().position(|&s| s).unwrap_or(49)];

    let net = reciprocal_pair(1e6);
    let ratio = df_rate(&net) / pnc_rate(&net, RateMode::ZfNaive).unwrap();
    let ratio_ok = (0.475..=0.525).contains(&ratio);

    let env = timeshare_envelope(&reciprocal_pair(1.0), RateMode::ZfNaive, &grid).unwrap();
    let majorant = grid.iter().zip(&env).all(|(&p, &(_, e))| {
        let n = reciprocal_pair(p);
        e >= pnc_rate(&n, RateMode::ZfNaive).unwrap().max(df_rate(&n))
    });
    let t = start.elapsed();
    Verdict {
        id: "5 rate curves",
        pass: crossover && ratio_ok && majorant && t < Duration::from_secs(5),
        detail: format!(
            "single crossover: {crossover} (near P = {cross_at:.3}); r_df/r_pnc_zf(1e6) = {ratio:.4} {}; envelope majorant: {majorant}; {:.2} s",
            if ratio_ok { "in [0.475, 0.525]" } else { "outside [0.475, 0.525]" },
            secs(t)
        ),
    }
}

fn loopback_suite() -> Verdict {
    let mut r = ChaCha8Rng::seed_from_u64(6);
    let mut nets = vec![reciprocal_pair(8.0)];
    for i in 0..20 {
        let n_r = 1 + i % 4;
        let (h1, h2) = random_pair(&mut r, n_r, n_r + i % 3, n_r + (i / 3) % 3, true);
        nets.push(TwoWayNetwork::new(h1, h2, 8.0, f64::INFINITY).unwrap());
    }
    let mut failures = 0u64;
    let mut dirty = 0;
    for (i, net) in nets.into_iter().enumerate() {
        let n_r = net.n_r();
        let out = run_loopback(&SimConfig::new(net, vec![4; n_r], 64, 100, i as u64)).unwrap();
        failures += out.terminal_failures.iter().sum::<u64>() + out.errors.iter().sum::<u64>();
        dirty += usize::from(!out.is_clean());
    }
    Verdict {
        id: "6 noiseless loopback",
        pass: failures == 0,
        detail: format!("21 channel pairs, {dirty} with errors, {failures} symbol errors in total"),
    }
}

fn monte_carlo_suite() -> Verdict {
    let start = Instant::now();
    // Identity channels give t_k = 1; beta = 16 puts the prediction near 1e-2.
    let beta = 16.0f64;
    let i2 = MatrixC::identity(2);
    let net = TwoWayNetwork::new(i2.clone(), i2, beta * beta * 2.0 / 6.0, f64::INFINITY).unwrap();
    let cfg = SimConfig::new(net, vec![4, 4], 1000, 100, 2024);
    let a = run_mc(&cfg).unwrap();
    let b = run_mc(&cfg).unwrap();
    let t = start.elapsed();
    let mut z_max = 0.0f64;
    for k in 0..2 {
        let p = a.predicted_ser[k];
        let sd = (p * (1.0 - p) / a.symbols[k] as f64).sqrt();
        z_max = z_max.max((a.ser[k] - p).abs() / sd);
    }
    let enough = a.symbols.iter().all(|&n| n >= 100_000);
    let same = a == b;
    Verdict {
        id: "7 noisy monte carlo",
        pass: z_max <= 3.0 && enough && same && t < Duration::from_secs(60),
        detail: format!(
            "predicted {:.5}, measured ({:.5}, {:.5}) over {} symbols each, max |z| = {z_max:.2}, reproducible: {same}, {:.2} s",
            a.predicted_ser[0],
            a.ser[0],
            a.ser[1],
            a.symbols[0],
            secs(t)
        ),
    }
}

fn power_suite() -> Verdict {
    let power = 8.0;
    let cfg = SimConfig::new(reciprocal_pair(power), vec![4, 4], 1000, 100, 8);
    let out = run_mc(&cfg).unwrap();
    let ratio = out.empirical_power.map(|p| p / power);
    let mut dithered = cfg.clone();
    dithered.dither = true;
    let d = run_mc(&dithered)
        .unwrap()
        .empirical_power
        .map(|p| p / power);
    Verdict {
        id: "8 power audit",
        pass: ratio.iter().all(|&r| r <= 1.02),
        detail: format!(
            "P_emp/P = ({:.4}, {:.4}) over 1e5 symbols without dither (with dither, for reference: {:.4}, {:.4})",
            ratio[0], ratio[1], d[0], d[1]
        ),
    }
}

fn golden_suite() -> Verdict {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let problem = dir.join("reciprocal.json");
    let runs: [(&str, &[&str]); 3] = [
        ("decompose.json", &["decompose"]),
        ("rates.json", &["rates"]),
        ("sweep.csv", &["sweep", "--points", "10"]),
    ];
    let mut mismatched = Vec::new();
    for (file, args) in runs {
        let out = Command::new(env!("CARGO_BIN_EXE_mimo-pnc"))
            .args(args)
            .arg(&problem)
            .output()
            .unwrap();
        let stored = std::fs::read(dir.join(file)).unwrap();
        if !out.status.success() || out.stdout != stored {
            mismatched.push(file);
        }
    }
    Verdict {
        id: "9 cli golden files",
        pass: mismatched.is_empty(),
        detail: if mismatched.is_empty() {
            "decompose, rates, 10-point sweep identical".into()
        } else {
            format!("mismatch: {mismatched:?}")
        },
    }
}

#[test]
fn acceptance() {
    let verdicts = [
        decomposition_suite(),
        gmd_suite(),
        reciprocal_pair_suite(),
        gap_suite(),
        crossover_suite(),
        loopback_suite(),
        monte_carlo_suite(),
        power_suite(),
        golden_suite(),
    ];
    for v in &verdicts {
        println!(
            "[{}] {}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.id,
            v.detail
        );
    }
    let failed: Vec<&str> = verdicts.iter().filter(|v| !v.pass).map(|v| v.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
