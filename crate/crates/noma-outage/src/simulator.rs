//! Monte Carlo link simulator.
//!
//! Each trial draws the first-hop matrix and one second-hop matrix per user,
//! applies MRT with receive antenna selection on both hops, orders users by
//! their selected gains, and decodes every SIC stage three ways: the exact
//! SINR with the inter-user beam mismatch factor W, the upper-bound SINR
//! with W = 1 (the form the closed-form analysis evaluates), and the
//! rate-matched OMA baseline.  Estimates are exact counts over reproducible
//! per-lane substreams, so a (seed, trials, lanes) triple always yields the
//! same numbers regardless of thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::analytic::{oma_threshold, SystemScenario};
use crate::channel::{sample_channel_matrix, select_receive_antenna};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation parameter: {0}")]
    InvalidParameter(String),
    #[error("counter range exceeded: {0}")]
    CounterRange(String),
}

/// One channel realization and its per-user decoding outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    /// Selected first-hop gain.
    pub phi_sr: f64,
    /// Selected second-hop gains, ascending; user l reads phi[l-1].
    pub phi: Vec<f64>,
    /// Beam mismatch factor of the superimposed transmission, in [0,1].
    pub w_tilde: f64,
    pub outage_exact: Vec<bool>,
    pub outage_upper: Vec<bool>,
    pub outage_oma: Vec<bool>,
}

/// Exact end-to-end SINR for decoding message j at user l.
///
/// `a_j` is message j's power share, `sigma_j` the residual share after it.
/// The beam mismatch `w_tilde` of the superimposed MRT vectors scales the
/// desired signal, the inter-user interference, and the second-hop
/// estimation noise alike, so the SINR is increasing in it.
#[allow(clippy::too_many_arguments)]
pub fn sinr_exact(
    snr: f64,
    phi_sr: f64,
    phi_l: f64,
    a_j: f64,
    sigma_j: f64,
    se2_sr: f64,
    se2_l: f64,
    w_tilde: f64,
) -> f64 {
    let a1 = snr * se2_l * w_tilde + 1.0;
    let a2 = snr * se2_sr + 1.0;
    let a3 = a1 * a2;
    let cross = snr * snr * phi_sr * phi_l * w_tilde;
    cross * a_j / (cross * sigma_j + snr * phi_sr * a1 + snr * phi_l * a2 + a3)
}

/// Upper-bound SINR: the exact form with the mismatch factor forced to 1.
pub fn sinr_upper(
    snr: f64,
    phi_sr: f64,
    phi_l: f64,
    a_j: f64,
    sigma_j: f64,
    se2_sr: f64,
    se2_l: f64,
) -> f64 {
    sinr_exact(snr, phi_sr, phi_l, a_j, sigma_j, se2_sr, se2_l, 1.0)
}

/// Interference-free end-to-end SNR of the OMA baseline (full power, no
/// superposition, so no mismatch factor either).
pub fn snr_oma(snr: f64, phi_sr: f64, phi_l: f64, se2_sr: f64, se2_l: f64) -> f64 {
    sinr_upper(snr, phi_sr, phi_l, 1.0, 0.0, se2_sr, se2_l)
}

/// Draw one realization and decode all users.
pub fn run_trial<R: Rng>(rng: &mut R, sc: &SystemScenario, snr: f64) -> TrialOutcome {
    let users = sc.users;
    let h1 = sample_channel_matrix(rng, &sc.hop1);
    let phi_sr = select_receive_antenna(&h1).gain;

    // Selected gain and MRT vector per user, then order users by gain.  The
    // orthogonal-access baseline has no power-domain ordering, so it decodes
    // on the raw draws instead of the sorted ones.
    let mut selected: Vec<(f64, Vec<num_complex::Complex64>)> = (0..users)
        .map(|_| {
            let h = sample_channel_matrix(rng, &sc.hop2);
            let sel = select_receive_antenna(&h);
            (sel.gain, sel.vector.to_vec())
        })
        .collect();
    let unsorted_gains: Vec<f64> = selected.iter().map(|(g, _)| *g).collect();
    selected.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite gains"));

    // W = ||(1/L) sum_i conj(v_i)/||v_i|| ||^2; order does not matter.
    let n_t = sc.hop2.n_t as usize;
    let mut sum = vec![num_complex::Complex64::new(0.0, 0.0); n_t];
    for (gain, v) in &selected {
        let norm = gain.sqrt();
        for (acc, &e) in sum.iter_mut().zip(v.iter()) {
            *acc += e.conj() / norm;
        }
    }
    let w_tilde = sum.iter().map(|z| z.norm_sqr()).sum::<f64>() / (users * users) as f64;

    let mut sigma = vec![0.0; users];
    for j in (0..users - 1).rev() {
        sigma[j] = sigma[j + 1] + sc.alloc[j + 1];
    }
    let th_oma = oma_threshold(&sc.thresholds).expect("validated thresholds");
    let se2_sr = sc.hop1.sigma_e2;
    let se2_l = sc.hop2.sigma_e2;

    let mut outage_exact = Vec::with_capacity(users);
    let mut outage_upper = Vec::with_capacity(users);
    let mut outage_oma = Vec::with_capacity(users);
    for l in 0..users {
        let phi_l = selected[l].0;
        let mut fail_exact = false;
        let mut fail_upper = false;
        for j in 0..=l {
            if !fail_exact
                && sinr_exact(
                    snr, phi_sr, phi_l, sc.alloc[j], sigma[j], se2_sr, se2_l, w_tilde,
                ) < sc.thresholds[j]
            {
                fail_exact = true;
            }
            if !fail_upper
                && sinr_upper(snr, phi_sr, phi_l, sc.alloc[j], sigma[j], se2_sr, se2_l)
                    < sc.thresholds[j]
            {
                fail_upper = true;
            }
            if fail_exact && fail_upper {
                break;
            }
        }
        outage_exact.push(fail_exact);
        outage_upper.push(fail_upper);
        outage_oma.push(snr_oma(snr, phi_sr, unsorted_gains[l], se2_sr, se2_l) < th_oma);
    }

    TrialOutcome {
        phi_sr,
        phi: selected.into_iter().map(|(g, _)| g).collect(),
        w_tilde,
        outage_exact,
        outage_upper,
        outage_oma,
    }
}

/// Count-based outage estimate with a 3-sigma normal half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    pub p_hat: f64,
    pub trials: u64,
    pub ci_halfwidth: f64,
    pub seed: u64,
    pub batches: u32,
}

/// Exact/upper/OMA estimates for one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserEstimate {
    pub exact: OutageEstimate,
    pub upper: OutageEstimate,
    pub oma: OutageEstimate,
}

fn lane_rng(seed: u64, lane: u64) -> ChaCha8Rng {
    // Golden-ratio stride keeps lane streams far apart for any base seed.
    ChaCha8Rng::seed_from_u64(seed ^ lane.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Run `trials` trials split across `lanes` reproducible substreams and
/// return per-user exact/upper/OMA estimates.
pub fn estimate_op(
    sc: &SystemScenario,
    snr: f64,
    trials: u64,
    seed: u64,
    lanes: u32,
) -> Result<Vec<UserEstimate>, SimError> {
    if !snr.is_finite() || snr <= 0.0 {
        return Err(SimError::InvalidParameter(format!(
            "snr must be finite and positive, got {snr}"
        )));
    }
    if trials == 0 {
        return Err(SimError::InvalidParameter("trials must be >= 1".into()));
    }
    if lanes == 0 {
        return Err(SimError::InvalidParameter("lanes must be >= 1".into()));
    }
    let users = sc.users;
    if trials.checked_mul(users as u64).is_none() {
        return Err(SimError::CounterRange(format!(
            "trials * users overflows: {trials} * {users}"
        )));
    }
    let lanes_u64 = u64::from(lanes).min(trials);
    let base = trials / lanes_u64;
    let extra = trials % lanes_u64;

    // Per-lane counts, [exact.., upper.., oma..] flattened; integer addition
    // makes the reduction schedule-independent.
    let counts = (0..lanes_u64)
        .into_par_iter()
        .map(|lane| {
            let lane_trials = base + u64::from(lane < extra);
            let mut rng = lane_rng(seed, lane);
            let mut c = vec![0u64; 3 * users];
            for _ in 0..lane_trials {
                let t = run_trial(&mut rng, sc, snr);
                for l in 0..users {
                    c[l] += u64::from(t.outage_exact[l]);
                    c[users + l] += u64::from(t.outage_upper[l]);
                    c[2 * users + l] += u64::from(t.outage_oma[l]);
                }
            }
            c
        })
        .reduce(
            || vec![0u64; 3 * users],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    let make = |count: u64| {
        let p_hat = count as f64 / trials as f64;
        OutageEstimate {
            p_hat,
            trials,
            ci_halfwidth: 3.0 * (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
            seed,
            batches: lanes_u64 as u32,
        }
    };
    Ok((0..users)
        .map(|l| UserEstimate {
            exact: make(counts[l]),
            upper: make(counts[users + l]),
            oma: make(counts[2 * users + l]),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::make_hop_stats;

    fn scenario(eps: f64, ant: (u32, u32, u32, u32), m: (u32, u32)) -> SystemScenario {
        let hop1 = make_hop_stats(0.5, 4.0, eps, m.0, ant.0, ant.1).unwrap();
        let hop2 = make_hop_stats(0.5, 4.0, eps, m.1, ant.2, ant.3).unwrap();
        SystemScenario::new(
            vec![3.0 / 6.0, 2.0 / 6.0, 1.0 / 6.0],
            vec![0.9, 1.5, 2.0],
            hop1,
            hop2,
        )
        .unwrap()
    }

    #[test]
    fn sinr_substitution_examples() {
        // Single user, perfect CSI, unit gains: 100 / (10 + 10 + 1).
        let s = sinr_exact(10.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!((s - 100.0 / 21.0).abs() < 1e-15);
        // Two users, strongest message: 80 / (20 + 10 + 10 + 1).
        let s = sinr_upper(10.0, 1.0, 1.0, 0.8, 0.2, 0.0, 0.0);
        assert!((s - 80.0 / 41.0).abs() < 1e-15);
        // OMA form is the upper form with full power and no interference.
        let s = snr_oma(10.0, 1.0, 1.0, 0.0, 0.0);
        assert!((s - 100.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn mismatch_factor_shrinks_sinr() {
        let full = sinr_exact(10.0, 2.0, 1.5, 0.5, 0.5, 0.01, 0.02, 1.0);
        let partial = sinr_exact(10.0, 2.0, 1.5, 0.5, 0.5, 0.01, 0.02, 0.3);
        assert!(partial < full, "misaligned beams lose signal power");
        // Perfect alignment recovers the upper form.
        let upper = sinr_upper(10.0, 2.0, 1.5, 0.5, 0.5, 0.01, 0.02);
        assert_eq!(full, upper);
    }

    #[test]
    fn trial_outcome_invariants() {
        use rand::SeedableRng;
        let sc = scenario(0.05, (2, 2, 2, 2), (2, 1));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let t = run_trial(&mut rng, &sc, 10.0);
            assert!(t.phi_sr > 0.0);
            assert!(t.phi.windows(2).all(|w| w[0] <= w[1]), "ascending gains");
            assert!((0.0..=1.0 + 1e-12).contains(&t.w_tilde));
            for l in 0..3 {
                // Exact SINR never exceeds the upper form, so its outage set
                // contains the upper one.
                assert!(!t.outage_upper[l] | t.outage_exact[l]);
            }
        }
    }

    #[test]
    fn single_user_has_unit_mismatch() {
        use rand::SeedableRng;
        let hop = make_hop_stats(0.5, 4.0, 0.0, 1, 4, 2).unwrap();
        let sc = SystemScenario::new(vec![1.0], vec![1.0], hop, hop).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let t = run_trial(&mut rng, &sc, 10.0);
            assert!((t.w_tilde - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mismatch_mean_is_well_below_one_for_three_users() {
        use rand::SeedableRng;
        let sc = scenario(0.0, (1, 1, 2, 2), (1, 1));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 20_000;
        let mean = (0..n)
            .map(|_| run_trial(&mut rng, &sc, 10.0).w_tilde)
            .sum::<f64>()
            / n as f64;
        // Superposing three independent unit beams averages to 1/3.
        assert!((mean - 1.0 / 3.0).abs() < 0.01, "mean={mean}");
        assert!(mean < 0.9);
    }

    #[test]
    fn estimates_are_reproducible() {
        let sc = scenario(0.005, (1, 2, 1, 2), (1, 1));
        let a = estimate_op(&sc, 10.0, 40_000, 42, 8).unwrap();
        let b = estimate_op(&sc, 10.0, 40_000, 42, 8).unwrap();
        assert_eq!(a, b);
        let c = estimate_op(&sc, 10.0, 40_000, 43, 8).unwrap();
        assert_ne!(a, c);
        // Counts behind p_hat are integers.
        for u in &a {
            for e in [u.exact, u.upper, u.oma] {
                let count = e.p_hat * e.trials as f64;
                assert!((count - count.round()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn lane_imbalance_covers_all_trials() {
        let sc = scenario(0.0, (1, 1, 1, 1), (1, 1));
        // 7 lanes of 999 trials: 5 lanes get 143, 2 get 142.
        let r = estimate_op(&sc, 1.0, 999, 5, 7).unwrap();
        assert_eq!(r[0].exact.trials, 999);
        assert_eq!(r[0].exact.batches, 7);
        // More lanes than trials degrades gracefully.
        let r = estimate_op(&sc, 1.0, 3, 1, 16).unwrap();
        assert_eq!(r[0].exact.batches, 3);
    }

    #[test]
    fn rejects_bad_parameters() {
        let sc = scenario(0.0, (1, 1, 1, 1), (1, 1));
        assert!(estimate_op(&sc, 0.0, 10, 1, 1).is_err());
        assert!(estimate_op(&sc, 10.0, 0, 1, 1).is_err());
        assert!(estimate_op(&sc, 10.0, 10, 1, 0).is_err());
        assert!(estimate_op(&sc, 10.0, u64::MAX, 1, 1).is_err());
    }

    #[test]
    fn infeasible_user_is_always_in_outage() {
        let hop = make_hop_stats(0.5, 4.0, 0.0, 1, 1, 1).unwrap();
        let sc = SystemScenario::new(vec![0.6, 0.4], vec![2.0, 1.0], hop, hop).unwrap();
        let r = estimate_op(&sc, 1e4, 500, 9, 4).unwrap();
        assert_eq!(r[0].exact.p_hat, 1.0);
        assert_eq!(r[1].exact.p_hat, 1.0);
        assert_eq!(r[0].exact.ci_halfwidth, 0.0);
    }

    #[test]
    fn upper_estimate_tracks_closed_form() {
        let sc = scenario(0.005, (1, 1, 1, 1), (1, 1));
        let snr = 10.0;
        let est = estimate_op(&sc, snr, 200_000, 2024, 8).unwrap();
        for l in 1..=3 {
            let cf = crate::analytic::op_closed_form(&sc, snr, l).unwrap().value;
            let e = est[l - 1].upper;
            assert!(
                (e.p_hat - cf).abs() <= e.ci_halfwidth + 3.0 / 200_000.0,
                "l={l} mc={} cf={cf} ci={}",
                e.p_hat,
                e.ci_halfwidth
            );
        }
    }

    #[test]
    fn oma_estimate_tracks_analytic_baseline() {
        let sc = scenario(0.005, (1, 2, 1, 2), (1, 1));
        let snr = 100.0;
        let est = estimate_op(&sc, snr, 200_000, 77, 8).unwrap();
        // One analytic value: every slot user is a plain unordered draw.
        let a = crate::analytic::op_oma(&sc, snr).unwrap();
        for l in 1..=3 {
            let e = est[l - 1].oma;
            assert!(
                (e.p_hat - a).abs() <= e.ci_halfwidth + 3.0 / 200_000.0,
                "l={l} mc={} analytic={a}",
                e.p_hat
            );
        }
    }

    #[test]
    fn exact_estimate_not_below_upper_estimate() {
        for snr_db in [0.0, 10.0, 20.0] {
            let sc = scenario(0.005, (2, 2, 2, 2), (1, 1));
            let snr = 10f64.powf(snr_db / 10.0);
            let est = estimate_op(&sc, snr, 50_000, 5, 8).unwrap();
            for u in &est {
                assert!(u.exact.p_hat >= u.upper.p_hat);
            }
        }
    }
}
