//! Parameter sweeps and their CSV emission.
//!
//! One row per (axis point, user), fixed column set; outputs that are
//! disabled (or unavailable, like the asymptote with estimation errors)
//! leave their fields empty.  All floats print with 17 significant digits so
//! reruns are byte-identical.

use std::fmt::Write as _;

use crate::analytic::{self, SystemScenario};
use crate::channel::make_hop_stats;
use crate::cli::CliError;
use crate::simulator;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    SnrDb,
    D1,
    Epsilon,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::SnrDb => "snr_db",
            SweepAxis::D1 => "d1",
            SweepAxis::Epsilon => "epsilon",
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "snr_db" => Ok(SweepAxis::SnrDb),
            "d1" => Ok(SweepAxis::D1),
            "epsilon" => Ok(SweepAxis::Epsilon),
            other => Err(CliError::Config(format!(
                "unknown axis {other:?}; expected snr_db, d1 or epsilon"
            ))),
        }
    }
}

/// Which CSV columns get filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputSet {
    pub closed: bool,
    pub quadrature: bool,
    pub bounds: bool,
    pub floor: bool,
    pub asymptotic: bool,
    pub mc_exact: bool,
    pub mc_upper: bool,
    pub oma: bool,
}

impl OutputSet {
    pub fn analytic() -> Self {
        OutputSet {
            closed: true,
            quadrature: true,
            bounds: true,
            floor: true,
            asymptotic: true,
            mc_exact: false,
            mc_upper: false,
            oma: true,
        }
    }

    pub fn monte_carlo() -> Self {
        OutputSet {
            closed: false,
            quadrature: false,
            bounds: false,
            floor: false,
            asymptotic: false,
            mc_exact: true,
            mc_upper: true,
            oma: false,
        }
    }

    pub fn everything() -> Self {
        OutputSet {
            mc_exact: true,
            mc_upper: true,
            ..OutputSet::analytic()
        }
    }

    fn any_analytic(&self) -> bool {
        self.closed || self.quadrature || self.bounds || self.floor || self.asymptotic
    }

    fn any_mc(&self) -> bool {
        self.mc_exact || self.mc_upper
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub points: Vec<f64>,
    /// Fixed SNR in dB, used when the axis is not snr_db.
    pub snr_db: f64,
    pub trials: u64,
    pub seed: u64,
    pub lanes: u32,
    pub outputs: OutputSet,
    /// Restrict rows to one user (1-based); None emits all users.
    pub user: Option<usize>,
}

impl SweepSpec {
    fn validate(&self, sc: &SystemScenario) -> Result<(), CliError> {
        if self.points.is_empty() {
            return Err(CliError::Config("sweep needs at least one point".into()));
        }
        if !self.points.windows(2).all(|w| w[0] < w[1]) {
            return Err(CliError::Config(
                "sweep points must be strictly increasing".into(),
            ));
        }
        for &p in &self.points {
            if !p.is_finite() {
                return Err(CliError::Config("sweep points must be finite".into()));
            }
            match self.axis {
                SweepAxis::D1 => {
                    if !(0.0 < p && p < 1.0) {
                        return Err(CliError::Config(format!(
                            "d1 points must lie in (0,1), got {p}"
                        )));
                    }
                }
                SweepAxis::Epsilon => {
                    if !(0.0..1.0).contains(&p) {
                        return Err(CliError::Config(format!(
                            "epsilon points must lie in [0,1), got {p}"
                        )));
                    }
                }
                SweepAxis::SnrDb => {}
            }
        }
        if let Some(u) = self.user {
            if u < 1 || u > sc.users {
                return Err(CliError::Config(format!(
                    "user {u} out of range 1..={}",
                    sc.users
                )));
            }
        }
        if self.lanes == 0 {
            return Err(CliError::Config("lanes must be >= 1".into()));
        }
        Ok(())
    }
}

/// Scenario at one axis point: d1 moves the relay (d2 = 1 - d1), epsilon
/// applies to both hops, snr_db leaves the scenario untouched.
pub fn scenario_at(
    sc: &SystemScenario,
    axis: SweepAxis,
    point: f64,
) -> Result<SystemScenario, CliError> {
    let build = |d1: f64, d2: f64, e1: f64, e2: f64| -> Result<SystemScenario, CliError> {
        let h1 = make_hop_stats(d1, sc.hop1.path_loss_exp, e1, sc.hop1.m, sc.hop1.n_t, sc.hop1.n_r)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let h2 = make_hop_stats(d2, sc.hop2.path_loss_exp, e2, sc.hop2.m, sc.hop2.n_t, sc.hop2.n_r)
            .map_err(|e| CliError::Config(e.to_string()))?;
        SystemScenario::new(sc.alloc.clone(), sc.thresholds.clone(), h1, h2)
            .map_err(|e| CliError::Config(e.to_string()))
    };
    match axis {
        SweepAxis::SnrDb => Ok(sc.clone()),
        SweepAxis::D1 => build(point, 1.0 - point, sc.hop1.epsilon, sc.hop2.epsilon),
        SweepAxis::Epsilon => build(sc.hop1.d, sc.hop2.d, point, point),
    }
}

pub const CSV_HEADER: &str = "axis_value,user,op_closed,op_quadrature,op_lower,op_upper,\
ef_lower,ef_upper,op_asymptotic,op_mc_exact,op_mc_upper,op_oma,ci_halfwidth,trials,seed,warnings";

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

/// Run the sweep and return the full CSV text (header + rows).
pub fn run_sweep(sc: &SystemScenario, spec: &SweepSpec) -> Result<String, CliError> {
    spec.validate(sc)?;
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');

    let mc_on = spec.outputs.any_mc() && spec.trials > 0;
    for &point in &spec.points {
        let here = scenario_at(sc, spec.axis, point)?;
        let snr_db = if spec.axis == SweepAxis::SnrDb {
            point
        } else {
            spec.snr_db
        };
        let snr = 10f64.powf(snr_db / 10.0);

        let report = if spec.outputs.any_analytic() {
            Some(
                analytic::outage_report(&here, snr)
                    .map_err(|e| CliError::Config(e.to_string()))?,
            )
        } else {
            None
        };
        let estimates = if mc_on {
            Some(
                simulator::estimate_op(&here, snr, spec.trials, spec.seed, spec.lanes)
                    .map_err(|e| CliError::Config(e.to_string()))?,
            )
        } else {
            None
        };
        // One slot-user value per point: orthogonal access has no ordering.
        let oma_here = if spec.outputs.oma {
            Some(analytic::op_oma(&here, snr).map_err(|e| CliError::Config(e.to_string()))?)
        } else {
            None
        };

        for l in 1..=here.users {
            if spec.user.is_some_and(|u| u != l) {
                continue;
            }
            let i = l - 1;
            let r = report.as_ref();
            let grab = |on: bool, f: &dyn Fn(&analytic::OutageReport) -> f64| {
                if on {
                    r.map(f)
                } else {
                    None
                }
            };
            let op_closed = grab(spec.outputs.closed, &|r| r.op_closed[i]);
            let op_quad = grab(spec.outputs.quadrature, &|r| r.op_quadrature[i]);
            let op_lower = grab(spec.outputs.bounds, &|r| r.op_lower_bound[i]);
            let op_upper = grab(spec.outputs.bounds, &|r| r.op_upper_bound[i]);
            let ef_lower = grab(spec.outputs.floor, &|r| r.ef_lower[i]);
            let ef_upper = grab(spec.outputs.floor, &|r| r.ef_upper[i]);
            let op_asym = if spec.outputs.asymptotic {
                r.and_then(|r| r.op_asymptotic.as_ref().map(|a| a[i]))
            } else {
                None
            };
            let e = estimates.as_ref().map(|e| &e[i]);
            let mc_exact = if spec.outputs.mc_exact {
                e.map(|e| e.exact.p_hat)
            } else {
                None
            };
            let mc_upper = if spec.outputs.mc_upper {
                e.map(|e| e.upper.p_hat)
            } else {
                None
            };
            // The half-width reported is the exact estimate's when present,
            // otherwise the upper estimate's.
            let ci = match (spec.outputs.mc_exact, spec.outputs.mc_upper) {
                (true, _) => e.map(|e| e.exact.ci_halfwidth),
                (false, true) => e.map(|e| e.upper.ci_halfwidth),
                _ => None,
            };
            let op_oma = oma_here;
            let warnings = r
                .map(|r| {
                    r.warnings
                        .iter()
                        .filter(|w| w.starts_with(&format!("user {l}:")))
                        .map(|w| w.replace(',', ";"))
                        .collect::<Vec<_>>()
                        .join("; ")
                })
                .unwrap_or_default();

            let mut row = String::new();
            let _ = write!(
                row,
                "{},{l},{},{},{},{},{},{},{},{},{},{},{},{},{},{warnings}",
                fmt(point),
                opt(op_closed),
                opt(op_quad),
                opt(op_lower),
                opt(op_upper),
                opt(ef_lower),
                opt(ef_upper),
                opt(op_asym),
                opt(mc_exact),
                opt(mc_upper),
                opt(op_oma),
                opt(ci),
                if mc_on {
                    spec.trials.to_string()
                } else {
                    String::new()
                },
                if mc_on {
                    spec.seed.to_string()
                } else {
                    String::new()
                },
            );
            out.push_str(&row);
            out.push('\n');
        }
    }
    Ok(out)
}
