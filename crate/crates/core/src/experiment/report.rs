//! CSV / JSON / SVG output of a [`RunReport`].

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::{fmt_sig9, write_qsamples_csv};

use super::{ExperimentKind, RunReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotSwitch {
    On,
    Off,
}

pub const POINTS_CSV_HEADER: [&str; 8] = [
    "point",
    "parameter",
    "value",
    "n_trials",
    "mean_q_db",
    "std_q_db",
    "censored",
    "penalty_db",
];

pub fn write_points_csv<W: Write>(report: &RunReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(POINTS_CSV_HEADER)?;
    for (i, p) in report.points.iter().enumerate() {
        w.write_record([
            i.to_string(),
            p.parameter.clone(),
            fmt_sig9(p.value),
            p.n_trials.to_string(),
            fmt_sig9(p.mean_q_db),
            fmt_sig9(p.std_q_db),
            p.censored.to_string(),
            p.penalty_db.map(fmt_sig9).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn plot_err(e: impl std::fmt::Display) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

fn line_plot(path: &Path, title: &str, x_label: &str, y_label: &str, series: &[(f64, f64)]) -> Result<()> {
    let (xmin, xmax) = series
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (ymin, ymax) = series
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let pad_x = ((xmax - xmin) * 0.05).max(0.5);
    let pad_y = ((ymax - ymin) * 0.1).max(0.5);
    let root = SVGBackend::new(path, (720, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d(xmin - pad_x..xmax + pad_x, ymin - pad_y..ymax + pad_y)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc(x_label)
        .y_desc(y_label)
        .draw()
        .map_err(plot_err)?;
    chart
        .draw_series(LineSeries::new(series.iter().copied(), &BLUE))
        .map_err(plot_err)?;
    chart
        .draw_series(series.iter().map(|&p| Circle::new(p, 3, BLUE.filled())))
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

fn write_plots(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    match report.kind {
        ExperimentKind::PowerSweep => {
            let path = dir.join("q_vs_launch_power.svg");
            let pts: Vec<_> = report.points.iter().map(|p| (p.value, p.mean_q_db)).collect();
            line_plot(
                &path,
                &format!("{} Q vs launch power", report.codec),
                "launch power (dBm)",
                "Q (dB)",
                &pts,
            )?;
            files.push(path);
        }
        ExperimentKind::ThetaSweep | ExperimentKind::PdlSweep => {
            let theta = report.kind == ExperimentKind::ThetaSweep;
            let path = dir.join(if theta {
                "penalty_vs_theta.svg"
            } else {
                "penalty_vs_pdl.svg"
            });
            let pts: Vec<_> = report
                .points
                .iter()
                .map(|p| {
                    let x = if theta { p.value.to_degrees() } else { p.value };
                    (x, p.penalty_db.unwrap_or(0.0))
                })
                .collect();
            let x_label = if theta { "θ (deg)" } else { "PDL per section (dB)" };
            line_plot(&path, &format!("{} Q penalty", report.codec), x_label, "ΔQ (dB)", &pts)?;
            files.push(path);
        }
        ExperimentKind::MonteCarlo => {
            if let Some(pdf) = &report.pdf {
                let path = dir.join("q_pdf.svg");
                let pts: Vec<_> = pdf
                    .densities
                    .iter()
                    .zip(pdf.edges.windows(2))
                    .map(|(d, e)| (0.5 * (e[0] + e[1]), *d))
                    .collect();
                line_plot(
                    &path,
                    &format!("{} Q-factor PDF", report.codec),
                    "Q (dB)",
                    "density",
                    &pts,
                )?;
                files.push(path);
            }
        }
        ExperimentKind::Single => {}
    }
    Ok(files)
}

/// Writes `samples.csv`, `points.csv`, `report.json`, `timing.json` and,
/// when enabled, SVG plots into `dir`. Returns the files written.
pub fn emit_report(report: &RunReport, dir: &Path, plots: PlotSwitch) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();

    let samples = dir.join("samples.csv");
    write_qsamples_csv(&report.samples, fs::File::create(&samples)?)?;
    files.push(samples);

    let points = dir.join("points.csv");
    write_points_csv(report, fs::File::create(&points)?)?;
    files.push(points);

    let json = dir.join("report.json");
    fs::write(&json, serde_json::to_string_pretty(report)? + "\n")?;
    files.push(json);

    let timing = dir.join("timing.json");
    fs::write(
        &timing,
        serde_json::json!({ "wall_clock_s": report.wall_clock_s }).to_string() + "\n",
    )?;
    files.push(timing);

    if plots == PlotSwitch::On {
        files.extend(write_plots(report, dir)?);
    }
    Ok(files)
}
