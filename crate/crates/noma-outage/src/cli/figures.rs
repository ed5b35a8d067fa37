//! Canned figure presets: each one bundles a set of scenario variants, a
//! sweep, and a plot style, and emits `<id>.csv` plus `<id>.svg`.
//!
//! The CSV is the sweep table with a leading `variant` column; the SVG is a
//! log-scale rendering of a subset of those columns.

use std::fs;
use std::path::{Path, PathBuf};

use crate::analytic::SystemScenario;
use crate::channel::make_hop_stats;
use crate::cli::svg::{render_log_plot, PlotSeries};
use crate::cli::sweep::{run_sweep, OutputSet, SweepAxis, SweepSpec, CSV_HEADER};
use crate::cli::CliError;

/// Columns of the sweep CSV worth plotting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Closed,
    Quadrature,
    Lower,
    Upper,
    EfLower,
    EfUpper,
    Asymptotic,
    McExact,
    McUpper,
    Oma,
}

impl Method {
    fn column(self) -> usize {
        match self {
            Method::Closed => 2,
            Method::Quadrature => 3,
            Method::Lower => 4,
            Method::Upper => 5,
            Method::EfLower => 6,
            Method::EfUpper => 7,
            Method::Asymptotic => 8,
            Method::McExact => 9,
            Method::McUpper => 10,
            Method::Oma => 11,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Method::Closed => "closed",
            Method::Quadrature => "quad",
            Method::Lower => "lower",
            Method::Upper => "upper",
            Method::EfLower => "floor-",
            Method::EfUpper => "floor+",
            Method::Asymptotic => "asym",
            Method::McExact => "sim",
            Method::McUpper => "sim~",
            Method::Oma => "oma",
        }
    }

    fn dash(self) -> usize {
        match self {
            Method::Closed => 0,
            Method::Quadrature | Method::McUpper => 1,
            Method::McExact => 2,
            Method::Asymptotic | Method::Oma => 3,
            _ => 4,
        }
    }
}

pub struct FigurePreset {
    pub id: &'static str,
    pub title: &'static str,
    pub x_label: &'static str,
    pub variants: Vec<(String, SystemScenario)>,
    pub spec: SweepSpec,
    /// What the SVG shows; the CSV always carries every enabled output.
    pub plot: Vec<Method>,
}

fn scenario(ant: (u32, u32, u32, u32), m: (u32, u32), eps: f64) -> SystemScenario {
    let (nt1, nr1, nt2, nr2) = ant;
    let h1 = make_hop_stats(0.5, 4.0, eps, m.0, nt1, nr1).expect("preset hop");
    let h2 = make_hop_stats(0.5, 4.0, eps, m.1, nt2, nr2).expect("preset hop");
    SystemScenario::new(
        vec![3.0 / 6.0, 2.0 / 6.0, 1.0 / 6.0],
        vec![0.9, 1.5, 2.0],
        h1,
        h2,
    )
    .expect("preset scenario")
}

fn grid(start: f64, step: f64, stop: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

const ANTENNA_TRIO: [(&str, (u32, u32, u32, u32)); 3] = [
    ("nt1 nr1", (1, 1, 1, 1)),
    ("nt1 nr2", (1, 2, 1, 2)),
    ("nt2 nr2", (2, 2, 2, 2)),
];

pub fn preset_ids() -> &'static [&'static str] {
    &["fig2", "fig3", "fig4", "fig5", "fig6", "fig7"]
}

pub fn preset(id: &str) -> Result<FigurePreset, CliError> {
    let snr = |outputs: OutputSet, trials: u64| SweepSpec {
        axis: SweepAxis::SnrDb,
        points: grid(0.0, 5.0, 40.0),
        snr_db: 10.0,
        trials,
        seed: 2022,
        lanes: 8,
        outputs,
        user: None,
    };
    match id {
        "fig2" => Ok(FigurePreset {
            id: "fig2",
            title: "Outage vs SNR: receive selection and beamforming gains",
            x_label: "transmit SNR (dB)",
            variants: ANTENNA_TRIO
                .iter()
                .map(|(name, ant)| (name.to_string(), scenario(*ant, (1, 1), 0.005)))
                .collect(),
            spec: snr(
                OutputSet {
                    oma: false,
                    asymptotic: false,
                    floor: false,
                    mc_exact: true,
                    mc_upper: true,
                    ..OutputSet::analytic()
                },
                200_000,
            ),
            plot: vec![Method::Closed, Method::McUpper, Method::McExact],
        }),
        "fig3" => Ok(FigurePreset {
            id: "fig3",
            title: "Outage vs SNR: fading severity",
            x_label: "transmit SNR (dB)",
            variants: [(1, 1), (2, 1), (2, 2)]
                .iter()
                .map(|&m| {
                    (
                        format!("m{} m{}", m.0, m.1),
                        scenario((1, 2, 1, 2), m, 0.005),
                    )
                })
                .collect(),
            spec: snr(
                OutputSet {
                    oma: false,
                    asymptotic: false,
                    floor: false,
                    bounds: false,
                    ..OutputSet::analytic()
                },
                0,
            ),
            plot: vec![Method::Closed],
        }),
        "fig4" => Ok(FigurePreset {
            id: "fig4",
            title: "Outage vs SNR: channel estimation error",
            x_label: "transmit SNR (dB)",
            variants: [0.0, 0.005, 0.05]
                .iter()
                .map(|&e| (format!("eps {e}"), scenario((2, 2, 2, 2), (1, 1), e)))
                .collect(),
            spec: snr(
                OutputSet {
                    oma: false,
                    asymptotic: false,
                    floor: false,
                    bounds: false,
                    ..OutputSet::analytic()
                },
                0,
            ),
            plot: vec![Method::Closed],
        }),
        "fig5" => Ok(FigurePreset {
            id: "fig5",
            title: "Outage floors under channel estimation error",
            x_label: "transmit SNR (dB)",
            variants: [
                ("nt1 nr1 eps 0.005", (1, 1, 1, 1), 0.005),
                ("nt1 nr1 eps 0.05", (1, 1, 1, 1), 0.05),
                ("nt2 nr2 eps 0.005", (2, 2, 2, 2), 0.005),
                ("nt2 nr2 eps 0.05", (2, 2, 2, 2), 0.05),
            ]
            .iter()
            .map(|&(name, ant, e)| (name.to_string(), scenario(ant, (1, 1), e)))
            .collect(),
            spec: SweepSpec {
                points: grid(0.0, 5.0, 60.0),
                ..snr(
                    OutputSet {
                        oma: false,
                        asymptotic: false,
                        bounds: false,
                        quadrature: false,
                        ..OutputSet::analytic()
                    },
                    0,
                )
            },
            plot: vec![Method::Closed, Method::EfLower, Method::EfUpper],
        }),
        "fig6" => Ok(FigurePreset {
            id: "fig6",
            title: "Outage vs relay position against orthogonal access",
            x_label: "first-hop distance d1 (d2 = 1 - d1)",
            variants: [(1, 1), (2, 1)]
                .iter()
                .map(|&m| {
                    (
                        format!("m{} m{}", m.0, m.1),
                        scenario((2, 2, 2, 2), m, 0.005),
                    )
                })
                .collect(),
            spec: SweepSpec {
                axis: SweepAxis::D1,
                points: grid(0.1, 0.05, 0.9),
                snr_db: 10.0,
                trials: 0,
                seed: 2022,
                lanes: 8,
                outputs: OutputSet {
                    quadrature: false,
                    bounds: false,
                    floor: false,
                    asymptotic: false,
                    ..OutputSet::analytic()
                },
                user: None,
            },
            plot: vec![Method::Closed, Method::Oma],
        }),
        "fig7" => Ok(FigurePreset {
            id: "fig7",
            title: "Outage vs SNR: high-SNR slopes, perfect estimation",
            x_label: "transmit SNR (dB)",
            variants: ANTENNA_TRIO
                .iter()
                .map(|(name, ant)| (name.to_string(), scenario(*ant, (1, 1), 0.0)))
                .collect(),
            spec: snr(
                OutputSet {
                    oma: false,
                    bounds: false,
                    quadrature: false,
                    ..OutputSet::analytic()
                },
                0,
            ),
            plot: vec![Method::Closed, Method::Asymptotic],
        }),
        other => Err(CliError::Config(format!(
            "unknown figure {other:?}; available: {}",
            preset_ids().join(", ")
        ))),
    }
}

/// Run every variant, concatenate the prefixed tables, and build the plot
/// series straight from the CSV fields so both artifacts always agree.
pub fn figure_artifacts(p: &FigurePreset) -> Result<(String, String), CliError> {
    let mut csv = String::from("variant,");
    csv.push_str(CSV_HEADER);
    csv.push('\n');
    let mut series: Vec<PlotSeries> = Vec::new();

    for (vi, (name, sc)) in p.variants.iter().enumerate() {
        let table = run_sweep(sc, &p.spec)?;
        let mut per_user: Vec<Vec<Vec<(f64, f64)>>> =
            vec![vec![Vec::new(); p.plot.len()]; sc.users];
        for row in table.lines().skip(1) {
            csv.push_str(name);
            csv.push(',');
            csv.push_str(row);
            csv.push('\n');
            let fields: Vec<&str> = row.split(',').collect();
            let x: f64 = fields[0].parse().expect("axis field");
            let user: usize = fields[1].parse().expect("user field");
            for (mi, m) in p.plot.iter().enumerate() {
                if let Ok(y) = fields[m.column()].parse::<f64>() {
                    per_user[user - 1][mi].push((x, y));
                }
            }
        }
        for (ui, methods) in per_user.into_iter().enumerate() {
            for (mi, points) in methods.into_iter().enumerate() {
                if points.is_empty() {
                    continue;
                }
                series.push(PlotSeries {
                    label: format!("{name} u{} {}", ui + 1, p.plot[mi].label()),
                    points,
                    color: vi * 3 + ui,
                    dash: p.plot[mi].dash(),
                });
            }
        }
    }
    let svg = render_log_plot(p.title, p.x_label, "outage probability", &series);
    Ok((csv, svg))
}

pub fn emit_figure(id: &str, out_dir: &Path) -> Result<(PathBuf, PathBuf), CliError> {
    let p = preset(id)?;
    let (csv, svg) = figure_artifacts(&p)?;
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out_dir.display())))?;
    let csv_path = out_dir.join(format!("{id}.csv"));
    let svg_path = out_dir.join(format!("{id}.svg"));
    fs::write(&csv_path, csv)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", csv_path.display())))?;
    fs::write(&svg_path, svg)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", svg_path.display())))?;
    Ok((csv_path, svg_path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_parameters_match_the_documented_setups() {
        for id in preset_ids() {
            let p = preset(id).unwrap();
            assert_eq!(p.id, *id);
            for (_, sc) in &p.variants {
                assert_eq!(sc.users, 3);
                assert_eq!(sc.hop1.d + sc.hop2.d, 1.0);
                assert_eq!(sc.hop1.path_loss_exp, 4.0);
                assert_eq!(sc.alloc, vec![3.0 / 6.0, 2.0 / 6.0, 1.0 / 6.0]);
                assert_eq!(sc.thresholds, vec![0.9, 1.5, 2.0]);
            }
        }
        let f2 = preset("fig2").unwrap();
        assert_eq!(f2.variants.len(), 3);
        assert_eq!(f2.spec.trials, 200_000);
        assert_eq!(f2.spec.points, vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0]);
        assert!(f2.variants.iter().all(|(_, s)| s.hop1.epsilon == 0.005));
        let f4 = preset("fig4").unwrap();
        let eps: Vec<f64> = f4.variants.iter().map(|(_, s)| s.hop1.epsilon).collect();
        assert_eq!(eps, vec![0.0, 0.005, 0.05]);
        let f6 = preset("fig6").unwrap();
        assert_eq!(f6.spec.snr_db, 10.0);
        assert_eq!(f6.spec.points.len(), 17);
        assert_eq!(f6.spec.points[0], 0.1);
        assert_eq!(*f6.spec.points.last().unwrap(), 0.9);
        let f7 = preset("fig7").unwrap();
        assert!(f7.variants.iter().all(|(_, s)| s.hop1.epsilon == 0.0));
        assert!(f7.spec.outputs.asymptotic);
        assert!(preset("fig1").is_err());
    }

    #[test]
    fn fig6_artifacts_have_expected_shape() {
        let p = preset("fig6").unwrap();
        let (csv, svg) = figure_artifacts(&p).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        // Header + 2 variants x 17 points x 3 users.
        assert_eq!(lines.len(), 1 + 2 * 17 * 3);
        assert!(lines[0].starts_with("variant,axis_value,user,"));
        assert!(lines[1].starts_with("m1 m1,"));
        // closed and oma filled, quadrature empty.
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields.len(), 17);
        assert!(!fields[3].is_empty() && !fields[12].is_empty());
        assert!(fields[4].is_empty());
        assert!(svg.contains("</svg>"));
        assert!(svg.contains("m2 m1 u3 oma"));
    }

    #[test]
    fn fig6_is_byte_stable() {
        let p = preset("fig6").unwrap();
        let a = figure_artifacts(&p).unwrap();
        let b = figure_artifacts(&p).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }
}
