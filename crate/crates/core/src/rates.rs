//! Closed-form achievable rates and bounds for the two-way relay network.
//!
//! All rates are in bits per complex channel use (base-2 logarithms).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomp::{check_channel, gram_determinant, jet, DecompError, MatrixC};

/// Relative tolerance for the `det(h h†) = 1` normalization.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RateError {
    #[error(transparent)]
    Decomp(#[from] DecompError),
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("water-filling needs at least one gain")]
    EmptyGains,
    #[error("channel gains must be positive and finite, got {0}")]
    InvalidGain(f64),
    #[error("amplification factor must lie in (0, 1], got {0}")]
    AlphaOutOfRange(f64),
    #[error("power grid needs at least two points")]
    EmptyGrid,
    #[error("power grid must be positive and strictly increasing")]
    UnsortedGrid,
    #[error("channels are not normalized: det(H1 H1†) = {det1}, det(H2 H2†) = {det2}")]
    NotNormalized { det1: f64, det2: f64 },
}

/// PNC rate variant per subchannel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RateMode {
    /// Zero-forcing lattice decoding: `log2(t_k^2 P / N_r)`.
    #[default]
    #[serde(rename = "zf")]
    ZfNaive,
    /// Scalar two-way relay rate per subchannel: `log2(1/2 + t_k^2 P / N_r)`.
    Wilson,
}

/// Problem instance: two MAC channels, per-terminal power, and the
/// common-message capacity of the broadcast phase.
#[derive(Debug, Clone)]
pub struct TwoWayNetwork {
    h1: MatrixC,
    h2: MatrixC,
    power: f64,
    c_common: f64,
    sv1: Vec<f64>,
    sv2: Vec<f64>,
}

impl TwoWayNetwork {
    /// `c_common` may be `f64::INFINITY` when the MAC phase is the
    /// bottleneck.
    pub fn new(h1: MatrixC, h2: MatrixC, power: f64, c_common: f64) -> Result<Self, RateError> {
        if !(power > 0.0 && power.is_finite()) {
            return Err(RateError::InvalidNetwork(format!(
                "power must be positive and finite, got {power}"
            )));
        }
        if !(c_common >= 0.0) {
            return Err(RateError::InvalidNetwork(format!(
                "c_common must be non-negative, got {c_common}"
            )));
        }
        let n_r = h1.rows();
        let sv1 = check_channel(&h1, n_r)?;
        let sv2 = check_channel(&h2, n_r)?;
        Ok(Self {
            h1,
            h2,
            power,
            c_common,
            sv1,
            sv2,
        })
    }

    pub fn h1(&self) -> &MatrixC {
        &self.h1
    }

    pub fn h2(&self) -> &MatrixC {
        &self.h2
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn c_common(&self) -> f64 {
        self.c_common
    }

    pub fn n_r(&self) -> usize {
        self.h1.rows()
    }

    /// Singular values of `h_i`, descending (`terminal` is 1 or 2).
    pub fn singular_values(&self, terminal: usize) -> &[f64] {
        match terminal {
            1 => &self.sv1,
            2 => &self.sv2,
            _ => panic!("terminal index must be 1 or 2, got {terminal}"),
        }
    }

    /// Same channels and broadcast capacity at a different power.
    pub fn with_power(&self, power: f64) -> Result<Self, RateError> {
        if !(power > 0.0 && power.is_finite()) {
            return Err(RateError::InvalidNetwork(format!(
                "power must be positive and finite, got {power}"
            )));
        }
        Ok(Self {
            power,
            ..self.clone()
        })
    }

    fn link_capacity(&self, terminal: usize) -> f64 {
        let gains: Vec<f64> = self
            .singular_values(terminal)
            .iter()
            .map(|s| s * s)
            .collect();
        waterfill(&gains, self.power)
            .expect("validated channels have positive gains")
            .capacity
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaterFill {
    pub capacity: f64,
    pub allocation: Vec<f64>,
    /// Water level `mu`; active channels get `mu - 1/g`.
    pub level: f64,
}

/// Capacity-achieving power split over parallel channels with gains
/// `gains` (squared singular values) under a total power budget.
pub fn waterfill(gains: &[f64], power: f64) -> Result<WaterFill, RateError> {
    if gains.is_empty() {
        return Err(RateError::EmptyGains);
    }
    if let Some(&g) = gains.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
        return Err(RateError::InvalidGain(g));
    }
    if !(power > 0.0 && power.is_finite()) {
        return Err(RateError::InvalidNetwork(format!(
            "power must be positive and finite, got {power}"
        )));
    }
    let mut order: Vec<usize> = (0..gains.len()).collect();
    order.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]));

    // Largest active set whose weakest member still sits below the level.
    let mut level = 0.0;
    let mut inv_sum = 0.0;
    for (count, &idx) in order.iter().enumerate() {
        inv_sum += 1.0 / gains[idx];
        let candidate = (power + inv_sum) / (count + 1) as f64;
        if candidate > 1.0 / gains[idx] {
            level = candidate;
        } else {
            break;
        }
    }
    let allocation: Vec<f64> = gains.iter().map(|g| (level - 1.0 / g).max(0.0)).collect();
    let capacity = gains
        .iter()
        .zip(&allocation)
        .map(|(g, p)| (1.0 + g * p).log2())
        .sum();
    Ok(WaterFill {
        capacity,
        allocation,
        level,
    })
}

/// `min{C_1, C_2, C_common}` with water-filled link capacities.
pub fn cutset_rate(net: &TwoWayNetwork) -> f64 {
    net.link_capacity(1)
        .min(net.link_capacity(2))
        .min(net.c_common)
}

/// Per-subchannel rates given the shared triangular diagonal.
pub fn subchannel_rates_from_diag(diag: &[f64], power: f64, mode: RateMode) -> Vec<f64> {
    let snr = power / diag.len() as f64;
    diag.iter()
        .map(|t| {
            let p_k = t * t * snr;
            let r = match mode {
                RateMode::ZfNaive => p_k.log2(),
                RateMode::Wilson => (0.5 + p_k).log2(),
            };
            r.max(0.0)
        })
        .collect()
}

pub fn subchannel_rates(net: &TwoWayNetwork, mode: RateMode) -> Result<Vec<f64>, RateError> {
    let f = jet(&net.h1, &net.h2)?;
    Ok(subchannel_rates_from_diag(&f.diag, net.power, mode))
}

pub fn pnc_rate(net: &TwoWayNetwork, mode: RateMode) -> Result<f64, RateError> {
    let total: f64 = subchannel_rates(net, mode)?.iter().sum();
    Ok(total.min(net.c_common))
}

/// Decode-and-forward with white per-antenna inputs: the relay decodes
/// both messages, so the symmetric rate is capped by half the white-input
/// sum capacity as well as by each link.
pub fn df_rate(net: &TwoWayNetwork) -> f64 {
    let n_r = net.n_r();
    let gram = |h: &MatrixC| -> MatrixC {
        let w = net.power / h.cols() as f64;
        (h * &h.adjoint()).scale(Complex64::new(w, 0.0))
    };
    let sum = &(&MatrixC::identity(n_r) + &gram(&net.h1)) + &gram(&net.h2);
    let l = sum
        .cholesky()
        .expect("identity plus Gram matrices is positive definite");
    let c_sum: f64 = l.diagonal().iter().map(|d| 2.0 * d.re.log2()).sum();
    (0.5 * c_sum)
        .min(net.link_capacity(1))
        .min(net.link_capacity(2))
        .min(net.c_common)
}

/// Single-antenna amplify-and-forward rate `log2(1 + alpha P)`.
pub fn af_rate_siso(power: f64, alpha: f64) -> Result<f64, RateError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(RateError::AlphaOutOfRange(alpha));
    }
    Ok((1.0 + alpha * power).log2())
}

/// Upper concave envelope of `(x, y)` samples with ascending `x`,
/// evaluated back at every sample abscissa.
pub fn upper_concave_envelope(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for &p in points {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // Drop `b` when it lies on or below the chord from `a` to `p`.
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut seg = 0;
    points
        .iter()
        .map(|&(x, y)| {
            while seg + 1 < hull.len() && hull[seg + 1].0 < x {
                seg += 1;
            }
            let v = if seg + 1 < hull.len() {
                let (a, b) = (hull[seg], hull[seg + 1]);
                let theta = (x - a.0) / (b.0 - a.0);
                a.1 + theta * (b.1 - a.1)
            } else {
                hull[seg].1
            };
            (x, v.max(y))
        })
        .collect()
}

fn best_single_strategy(net: &TwoWayNetwork, mode: RateMode) -> Result<f64, RateError> {
    Ok(pnc_rate(net, mode)?.max(df_rate(net)))
}

/// Time-sharing between PNC (in `mode`) and decode-and-forward over a power
/// grid, mixing operating points with averaged power.
pub fn timeshare_envelope(
    net: &TwoWayNetwork,
    mode: RateMode,
    power_grid: &[f64],
) -> Result<Vec<(f64, f64)>, RateError> {
    if power_grid.len() < 2 {
        return Err(RateError::EmptyGrid);
    }
    if power_grid[0] <= 0.0 || power_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(RateError::UnsortedGrid);
    }
    let samples = power_grid
        .iter()
        .map(|&p| Ok((p, best_single_strategy(&net.with_power(p)?, mode)?)))
        .collect::<Result<Vec<_>, RateError>>()?;
    Ok(upper_concave_envelope(&samples))
}

/// Time-sharing value at the network's own power. Mixing is over a fixed
/// log grid spanning three decades either side of `P`, plus silence at
/// zero power.
fn timeshare_at(net: &TwoWayNetwork, mode: RateMode) -> Result<f64, RateError> {
    let p = net.power;
    let mut samples = vec![(0.0, 0.0)];
    for j in -120..=120 {
        let pj = p * 10f64.powf(j as f64 / 40.0);
        samples.push((pj, best_single_strategy(&net.with_power(pj)?, mode)?));
    }
    let env = upper_concave_envelope(&samples);
    Ok(env[121].1)
}

/// `min(C_1, C_2) - N_r log2(P / N_r)` for normalized channels.
pub fn high_snr_gap(net: &TwoWayNetwork) -> Result<f64, RateError> {
    let det1 = gram_determinant(&net.h1);
    let det2 = gram_determinant(&net.h2);
    if (det1 - 1.0).abs() > NORMALIZATION_TOLERANCE || (det2 - 1.0).abs() > NORMALIZATION_TOLERANCE
    {
        return Err(RateError::NotNormalized { det1, det2 });
    }
    Ok(gap_unchecked(net))
}

fn gap_unchecked(net: &TwoWayNetwork) -> f64 {
    let n_r = net.n_r() as f64;
    net.link_capacity(1).min(net.link_capacity(2)) - n_r * (net.power / n_r).log2()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HighSnrCheck {
    pub satisfied: bool,
    /// `lambda_{i;j}^2 P / N_r`, one list per terminal.
    pub margins: [Vec<f64>; 2],
}

pub fn high_snr_condition(net: &TwoWayNetwork, threshold: f64) -> HighSnrCheck {
    let snr = net.power / net.n_r() as f64;
    let margins = [1, 2].map(|i| {
        net.singular_values(i)
            .iter()
            .take(net.n_r())
            .map(|s| s * s * snr)
            .collect::<Vec<f64>>()
    });
    let satisfied = margins.iter().flatten().all(|&m| m >= threshold);
    HighSnrCheck { satisfied, margins }
}

/// Every analytic rate at one power point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub power: f64,
    pub mode: RateMode,
    pub r_pnc_zf: f64,
    pub r_pnc_wilson: f64,
    pub r_cs: f64,
    pub r_df: f64,
    pub r_ts: f64,
    pub r_af: Option<f64>,
    /// Subchannel rates in `mode`.
    pub subchannel_rates: Vec<f64>,
    pub high_snr_gap: f64,
}

/// Builds the full report. `alpha` enables the amplify-and-forward entry,
/// which is only defined for single-antenna networks.
pub fn rate_report(
    net: &TwoWayNetwork,
    mode: RateMode,
    alpha: Option<f64>,
) -> Result<RateReport, RateError> {
    let f = jet(&net.h1, &net.h2)?;
    let sum_capped = |m| {
        subchannel_rates_from_diag(&f.diag, net.power, m)
            .iter()
            .sum::<f64>()
            .min(net.c_common)
    };
    let siso = net.n_r() == 1 && net.h1.cols() == 1 && net.h2.cols() == 1;
    let r_af = match alpha {
        Some(a) if siso => Some(af_rate_siso(net.power, a)?),
        Some(a) => {
            af_rate_siso(net.power, a)?;
            None
        }
        None => None,
    };
    Ok(RateReport {
        power: net.power,
        mode,
        r_pnc_zf: sum_capped(RateMode::ZfNaive),
        r_pnc_wilson: sum_capped(RateMode::Wilson),
        r_cs: cutset_rate(net),
        r_df: df_rate(net),
        r_ts: timeshare_at(net, mode)?,
        r_af,
        subchannel_rates: subchannel_rates_from_diag(&f.diag, net.power, mode),
        high_snr_gap: gap_unchecked(net),
    })
}
