//! Fading model for one hop: Nakagami-m MIMO channel with MRT at the
//! transmitter and receive antenna selection, under imperfect CSI.
//!
//! With maximum ratio transmission toward receive antenna j, the effective
//! gain is the squared norm of column j of the estimated channel matrix,
//! a Gamma(m*n_t, omega_hat/m) variate; selection takes the best column.
//! The distribution of the selected gain is therefore a power of a
//! regularized incomplete gamma function, and the per-user distributions
//! after sorting follow from standard order statistics.

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::specfun::{binomial, ln_factorial, regularized_lower_gamma};

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("user index out of range: {0}")]
    UserOutOfRange(String),
}

/// Distribution parameters of one hop.
///
/// `omega` is the true per-element mean square gain `d^-path_loss_exp`,
/// `sigma_e2 = epsilon * omega` the estimation error variance, and
/// `omega_hat = omega - sigma_e2` the per-element mean square of the
/// estimated channel.  All gain statistics below refer to the estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopStats {
    pub d: f64,
    pub path_loss_exp: f64,
    pub epsilon: f64,
    pub m: u32,
    pub n_t: u32,
    pub n_r: u32,
    pub omega: f64,
    pub omega_hat: f64,
    pub sigma_e2: f64,
}

/// Build hop statistics from link distance, path-loss exponent, estimation
/// error fraction and antenna configuration.
pub fn make_hop_stats(
    d: f64,
    path_loss_exp: f64,
    epsilon: f64,
    m: u32,
    n_t: u32,
    n_r: u32,
) -> Result<HopStats, ChannelError> {
    if !d.is_finite() || d <= 0.0 {
        return Err(ChannelError::InvalidParameter(format!(
            "distance must be finite and positive, got {d}"
        )));
    }
    if !path_loss_exp.is_finite() || path_loss_exp < 0.0 {
        return Err(ChannelError::InvalidParameter(format!(
            "path loss exponent must be finite and non-negative, got {path_loss_exp}"
        )));
    }
    if !epsilon.is_finite() || epsilon < 0.0 || epsilon >= 1.0 {
        return Err(ChannelError::InvalidParameter(format!(
            "estimation error fraction must lie in [0, 1), got {epsilon}"
        )));
    }
    if m < 1 || n_t < 1 || n_r < 1 {
        return Err(ChannelError::InvalidParameter(format!(
            "m, n_t, n_r must be >= 1, got m={m} n_t={n_t} n_r={n_r}"
        )));
    }
    if m.saturating_mul(n_t) > 300 || m.saturating_mul(n_r) > 300 {
        return Err(ChannelError::InvalidParameter(
            "combined gamma shape m*n exceeds the supported limit of 300".into(),
        ));
    }
    let omega = d.powf(-path_loss_exp);
    let sigma_e2 = epsilon * omega;
    Ok(HopStats {
        d,
        path_loss_exp,
        epsilon,
        m,
        n_t,
        n_r,
        omega,
        omega_hat: omega - sigma_e2,
        sigma_e2,
    })
}

impl HopStats {
    /// Gamma shape of one column norm: m * n_t.
    pub fn shape(&self) -> u32 {
        self.m * self.n_t
    }

    /// Gamma rate of one column norm: m / omega_hat.
    pub fn rate(&self) -> f64 {
        self.m as f64 / self.omega_hat
    }
}

/// CDF of one column squared norm, P(shape, rate * x).
fn cdf_column(stats: &HopStats, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    regularized_lower_gamma(stats.shape(), stats.rate() * x).expect("validated hop stats")
}

/// CDF of the gain after MRT plus receive antenna selection on one hop.
pub fn cdf_first_hop(stats: &HopStats, x: f64) -> f64 {
    cdf_column(stats, x).powi(stats.n_r as i32)
}

/// CDF of one (not yet ordered) user's selected second-hop gain; the same
/// selection statistic as [`cdf_first_hop`].
pub fn cdf_unordered(stats: &HopStats, x: f64) -> f64 {
    cdf_first_hop(stats, x)
}

/// PDF of the selected gain: n_r * gamma_pdf(x) * P(shape, rate x)^(n_r - 1).
pub fn pdf_unordered(stats: &HopStats, x: f64) -> f64 {
    if x <= 0.0 {
        // Continuous part only; at shape 1, n_r 1 the density at 0+ is the
        // rate, but the point x = 0 itself carries no mass.
        return if x == 0.0 && stats.shape() == 1 && stats.n_r == 1 {
            stats.rate()
        } else {
            0.0
        };
    }
    let q = stats.shape();
    let c = stats.rate();
    let ln_gamma_pdf = q as f64 * c.ln() + (q as f64 - 1.0) * x.ln() - c * x - ln_factorial(q - 1);
    let sel = if stats.n_r == 1 {
        0.0
    } else {
        (stats.n_r as f64 - 1.0) * cdf_column(stats, x).ln()
    };
    stats.n_r as f64 * (ln_gamma_pdf + sel).exp()
}

/// L! / ((L - l)! (l - 1)!), the order-statistics normalisation.
fn order_weight(l: u32, total: u32) -> f64 {
    let num = ln_factorial(total);
    (num - ln_factorial(total - l) - ln_factorial(l - 1)).exp().round()
}

fn check_user(l: u32, total: u32) -> Result<(), ChannelError> {
    if l < 1 || l > total || total < 1 {
        return Err(ChannelError::UserOutOfRange(format!(
            "user {l} of {total}"
        )));
    }
    Ok(())
}

/// CDF of the l-th smallest of `total` i.i.d. selected gains.
pub fn cdf_ordered(stats: &HopStats, l: u32, total: u32, x: f64) -> Result<f64, ChannelError> {
    check_user(l, total)?;
    let f = cdf_unordered(stats, x);
    let ql = order_weight(l, total);
    let mut sum = 0.0;
    for t in 0..=(total - l) {
        let c = binomial((total - l) as u64, t as u64).expect("small binomial") as f64;
        let sign = if t % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * c / (l + t) as f64 * f.powi((l + t) as i32);
    }
    Ok((ql * sum).clamp(0.0, 1.0))
}

/// PDF of the l-th smallest of `total` i.i.d. selected gains.
pub fn pdf_ordered(stats: &HopStats, l: u32, total: u32, x: f64) -> Result<f64, ChannelError> {
    check_user(l, total)?;
    let f = cdf_unordered(stats, x);
    let pdf = pdf_unordered(stats, x);
    let ql = order_weight(l, total);
    let mut sum = 0.0;
    for t in 0..=(total - l) {
        let c = binomial((total - l) as u64, t as u64).expect("small binomial") as f64;
        let sign = if t % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * c * f.powi((l + t) as i32 - 1);
    }
    Ok((ql * pdf * sum).max(0.0))
}

/// Estimated channel matrix of one hop, stored column-major: column j holds
/// the n_t coefficients seen by receive antenna j.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexChannelMatrix {
    n_t: usize,
    n_r: usize,
    data: Vec<Complex64>,
}

impl ComplexChannelMatrix {
    /// Build from explicit column-major coefficients.
    pub fn from_columns(
        n_t: usize,
        n_r: usize,
        data: Vec<Complex64>,
    ) -> Result<Self, ChannelError> {
        if n_t == 0 || n_r == 0 || data.len() != n_t * n_r {
            return Err(ChannelError::InvalidParameter(format!(
                "matrix needs n_t*n_r = {} coefficients, got {}",
                n_t * n_r,
                data.len()
            )));
        }
        Ok(Self { n_t, n_r, data })
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    /// Coefficients toward receive antenna `j` (0-based).
    pub fn column(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.n_t..(j + 1) * self.n_t]
    }

    /// Squared norm of column `j`: the MRT gain toward that antenna.
    pub fn column_gain(&self, j: usize) -> f64 {
        self.column(j).iter().map(|h| h.norm_sqr()).sum()
    }
}

/// Draw an estimated channel matrix: independent entries with Gamma(m,
/// omega_hat/m) squared magnitude and uniform phase.
///
/// Entries are drawn column by column, row within column, so a fixed RNG
/// stream always yields the same matrix.
pub fn sample_channel_matrix<R: Rng + ?Sized>(rng: &mut R, stats: &HopStats) -> ComplexChannelMatrix {
    let scale = stats.omega_hat / stats.m as f64;
    let n = stats.n_t as usize * stats.n_r as usize;
    let mut data = Vec::with_capacity(n);
    for _ in 0..n {
        // Gamma with integer shape m: sum of m exponentials.
        let mut ln_prod = 0.0;
        for _ in 0..stats.m {
            let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            ln_prod += u.ln();
        }
        let gain = -scale * ln_prod;
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        data.push(Complex64::from_polar(gain.sqrt(), phase));
    }
    ComplexChannelMatrix {
        n_t: stats.n_t as usize,
        n_r: stats.n_r as usize,
        data,
    }
}

/// Result of receive antenna selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaSelection<'a> {
    /// Selected antenna, 1-based.
    pub index: usize,
    /// Squared norm of the selected column.
    pub gain: f64,
    /// Coefficients of the selected column.
    pub vector: &'a [Complex64],
}

/// Pick the receive antenna with the largest MRT gain; ties go to the lowest
/// index.
pub fn select_receive_antenna(matrix: &ComplexChannelMatrix) -> AntennaSelection<'_> {
    let mut best = 0;
    let mut best_gain = matrix.column_gain(0);
    for j in 1..matrix.n_r() {
        let g = matrix.column_gain(j);
        if g > best_gain {
            best = j;
            best_gain = g;
        }
    }
    AntennaSelection {
        index: best + 1,
        gain: best_gain,
        vector: matrix.column(best),
    }
}
