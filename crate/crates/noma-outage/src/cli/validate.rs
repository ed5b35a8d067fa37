//! Cross-validation of the three outage pipelines on a fixed grid.
//!
//! Checks, in order: closed form against quadrature (relative, wherever the
//! quadrature value is large enough to trust), the lower/upper bound
//! sandwich around the quadrature value, and (when trials > 0) the
//! upper-bound simulator against the closed form within a three-sigma
//! interval.  The report is plain text; `passed` drives the exit code.

use std::fmt::Write as _;

use crate::analytic::{outage_report, SystemScenario};
use crate::channel::make_hop_stats;
use crate::cli::CliError;
use crate::simulator::estimate_op;

pub struct ValidateOptions {
    pub trials: u64,
    pub seed: u64,
    pub lanes: u32,
    /// Multiplies every closed-form value before comparison.  Exists so the
    /// harness can confirm the checks actually bite; leave at 1.0 otherwise.
    pub perturb_closed: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            trials: 0,
            seed: 1,
            lanes: 8,
            perturb_closed: 1.0,
        }
    }
}

pub struct ValidationReport {
    pub text: String,
    pub passed: bool,
}

const REL_LIMIT: f64 = 1e-6;
const QUAD_FLOOR: f64 = 1e-12;
const SANDWICH_GUARD: f64 = 1e-12;

fn grid_scenarios() -> Vec<(String, SystemScenario)> {
    let mut out = Vec::new();
    for &(ant, name) in &[
        ((1u32, 1u32), "1x1"),
        ((1, 2), "1x2"),
        ((2, 2), "2x2"),
    ] {
        for &eps in &[0.0, 0.005, 0.05] {
            let h1 = make_hop_stats(0.5, 4.0, eps, 1, ant.0, ant.1).expect("grid hop");
            let h2 = make_hop_stats(0.5, 4.0, eps, 1, ant.0, ant.1).expect("grid hop");
            let sc = SystemScenario::new(
                vec![3.0 / 6.0, 2.0 / 6.0, 1.0 / 6.0],
                vec![0.9, 1.5, 2.0],
                h1,
                h2,
            )
            .expect("grid scenario");
            out.push((format!("{name} eps {eps}"), sc));
        }
    }
    out
}

pub fn run_validate(opts: &ValidateOptions) -> Result<ValidationReport, CliError> {
    if !(opts.perturb_closed.is_finite() && opts.perturb_closed > 0.0) {
        return Err(CliError::Config("perturbation factor must be positive".into()));
    }
    let scenarios = grid_scenarios();
    let snrs_db: Vec<f64> = (0..=8).map(|i| 5.0 * i as f64).collect();

    let mut text = String::new();
    let _ = writeln!(text, "cross-validation over {} scenarios x {} SNRs x 3 users",
        scenarios.len(), snrs_db.len());

    let mut compared = 0usize;
    let mut skipped = 0usize;
    let mut max_dev = 0.0f64;
    let mut max_dev_at = String::new();
    let mut violations = 0usize;
    let mut worst_margin = f64::INFINITY;
    let mut worst_margin_at = String::new();

    for (name, sc) in &scenarios {
        for &snr_db in &snrs_db {
            let snr = 10f64.powf(snr_db / 10.0);
            let rep = outage_report(sc, snr).map_err(|e| CliError::Config(e.to_string()))?;
            for l in 1..=sc.users {
                let i = l - 1;
                let closed = rep.op_closed[i] * opts.perturb_closed;
                let quad = rep.op_quadrature[i];
                if quad >= QUAD_FLOOR {
                    compared += 1;
                    let dev = (closed - quad).abs() / quad;
                    if dev > max_dev {
                        max_dev = dev;
                        max_dev_at = format!("{name}, {snr_db} dB, user {l}");
                    }
                } else {
                    skipped += 1;
                }
                let low = quad - rep.op_lower_bound[i];
                let high = rep.op_upper_bound[i] - quad;
                let margin = low.min(high);
                if margin < worst_margin {
                    worst_margin = margin;
                    worst_margin_at = format!("{name}, {snr_db} dB, user {l}");
                }
                if margin < -SANDWICH_GUARD {
                    violations += 1;
                }
            }
        }
    }

    let _ = writeln!(
        text,
        "closed form vs quadrature: {compared} points compared, {skipped} skipped (quadrature < {QUAD_FLOOR:e})"
    );
    let _ = writeln!(
        text,
        "  max relative deviation {max_dev:.3e} at ({max_dev_at}), limit {REL_LIMIT:e}"
    );
    let _ = writeln!(
        text,
        "bound sandwich: {violations} violations, tightest margin {worst_margin:+.3e} at ({worst_margin_at})"
    );

    let mut mc_fails = 0usize;
    let mut mc_points = 0usize;
    let mut mc_worst = 0.0f64;
    let mut mc_worst_at = String::new();
    if opts.trials > 0 {
        for (name, sc) in &scenarios {
            for &snr_db in &[0.0, 10.0, 20.0, 30.0] {
                let snr = 10f64.powf(snr_db / 10.0);
                let rep = outage_report(sc, snr).map_err(|e| CliError::Config(e.to_string()))?;
                let est = estimate_op(sc, snr, opts.trials, opts.seed, opts.lanes)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                for l in 1..=sc.users {
                    let i = l - 1;
                    let p = (rep.op_closed[i] * opts.perturb_closed).clamp(0.0, 1.0);
                    let sigma = (p * (1.0 - p) / opts.trials as f64).sqrt();
                    let slack = 3.0 * sigma + 3.0 / opts.trials as f64;
                    let dev = (est[i].upper.p_hat - p).abs();
                    mc_points += 1;
                    if sigma > 0.0 && dev / sigma > mc_worst {
                        mc_worst = dev / sigma;
                        mc_worst_at = format!("{name}, {snr_db} dB, user {l}");
                    }
                    if dev > slack {
                        mc_fails += 1;
                    }
                }
            }
        }
        let _ = writeln!(
            text,
            "simulation vs closed form ({} trials, seed {}): {mc_points} points, {mc_fails} outside 3 sigma",
            opts.trials, opts.seed
        );
        let _ = writeln!(
            text,
            "  worst normalized deviation {mc_worst:.2} sigma at ({mc_worst_at})"
        );
    } else {
        let _ = writeln!(text, "simulation vs closed form: skipped (trials = 0)");
    }

    let passed = max_dev <= REL_LIMIT && violations == 0 && mc_fails == 0;
    let _ = writeln!(text, "result: {}", if passed { "PASS" } else { "FAIL" });
    Ok(ValidationReport { text, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_run_passes() {
        let rep = run_validate(&ValidateOptions::default()).unwrap();
        assert!(rep.passed, "{}", rep.text);
        assert!(rep.text.contains("result: PASS"));
        assert!(rep.text.contains("0 violations"));
    }

    #[test]
    fn perturbation_is_caught() {
        let rep = run_validate(&ValidateOptions {
            perturb_closed: 1.01,
            ..ValidateOptions::default()
        })
        .unwrap();
        assert!(!rep.passed);
        assert!(rep.text.contains("result: FAIL"));
    }

    #[test]
    fn small_simulation_pass_smoke() {
        // Few trials widen the interval, so this exercises the code path
        // without being statistically demanding.
        let rep = run_validate(&ValidateOptions {
            trials: 4_000,
            ..ValidateOptions::default()
        })
        .unwrap();
        assert!(rep.text.contains("4000 trials"));
        assert!(rep.passed, "{}", rep.text);
    }

    #[test]
    fn rejects_nonsense_perturbation() {
        assert!(run_validate(&ValidateOptions {
            perturb_closed: -1.0,
            ..ValidateOptions::default()
        })
        .is_err());
    }
}
