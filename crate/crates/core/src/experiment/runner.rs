//! Trial scheduling, sweeps and Monte Carlo aggregation.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::CodecMode;
use crate::error::{Error, Result};
use crate::link::{LinkConfig, PdlModel};
use crate::metrics::{estimate_q_pdf, mean, outage_probability, rms, std_dev, Outage, QPdf, QSample};
use crate::rng::SeededRng;

use super::pipeline::{run_trial, TrialOutcome};
use super::{ExperimentKind, ExperimentSpec};

/// Per-trial digest kept in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub point: usize,
    pub seed: u64,
    pub errors: u64,
    pub bit_count: u64,
    pub ber: f64,
    pub q_db: f64,
    pub censored: bool,
    pub cumulated_pdl_db: f64,
    pub theta_rad: Vec<f64>,
    pub flagged_subcarriers: usize,
    pub ssfm_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub parameter: String,
    pub value: f64,
    pub n_trials: usize,
    pub mean_q_db: f64,
    pub std_q_db: f64,
    /// Trials without a single bit error (Q is a lower bound).
    pub censored: usize,
    pub penalty_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub kind: ExperimentKind,
    pub codec: CodecMode,
    pub config_hash: String,
    pub config: ExperimentSpec,
    pub points: Vec<PointSummary>,
    /// No-PDL reference for penalties (θ and PDL sweeps).
    pub baseline: Option<PointSummary>,
    /// Trials behind `baseline`, in trial order.
    #[serde(default)]
    pub baseline_trials: Vec<TrialRecord>,
    pub optimum_launch_power_dbm: Option<f64>,
    pub outage: Option<Outage>,
    pub pdf: Option<QPdf>,
    pub pdf_error: Option<String>,
    pub cumulated_pdl_rms_db: Option<f64>,
    /// One sample per trial and point, point-major.
    pub samples: Vec<QSample>,
    pub trials: Vec<TrialRecord>,
    /// Excluded from serialization so reports stay byte-identical.
    #[serde(skip)]
    pub wall_clock_s: f64,
}

/// Runs `f` on a dedicated pool of `threads` workers (0: rayon default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

struct Point {
    parameter: &'static str,
    value: f64,
    link: LinkConfig,
}

fn trial_seeds(spec: &ExperimentSpec) -> Vec<u64> {
    let base = SeededRng::new(spec.seed);
    (0..spec.n_trials as u64).map(|t| base.trial_seed(t)).collect()
}

/// Runs every (point, trial) pair in parallel; output keeps point-major
/// order regardless of scheduling.
fn execute(spec: &ExperimentSpec, points: &[Point]) -> Result<Vec<Vec<TrialOutcome>>> {
    let seeds = trial_seeds(spec);
    let jobs: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|p| seeds.iter().map(move |&s| (p, s)))
        .collect();
    let flat: Vec<TrialOutcome> = jobs
        .par_iter()
        .map(|&(p, seed)| run_trial(spec, &points[p].link, seed))
        .collect::<Result<_>>()?;
    Ok(flat.chunks(seeds.len()).map(|c| c.to_vec()).collect())
}

fn summarize(point: &Point, outcomes: &[TrialOutcome]) -> PointSummary {
    let q: Vec<f64> = outcomes.iter().map(|o| o.q.q_db).collect();
    PointSummary {
        parameter: point.parameter.to_string(),
        value: point.value,
        n_trials: outcomes.len(),
        mean_q_db: mean(&q),
        std_q_db: std_dev(&q),
        censored: outcomes.iter().filter(|o| o.q.censored).count(),
        penalty_db: None,
    }
}

fn new_report(spec: &ExperimentSpec) -> RunReport {
    RunReport {
        kind: spec.kind,
        codec: spec.codec,
        config_hash: spec.config_hash(),
        config: spec.clone(),
        points: Vec::new(),
        baseline: None,
        baseline_trials: Vec::new(),
        optimum_launch_power_dbm: None,
        outage: None,
        pdf: None,
        pdf_error: None,
        cumulated_pdl_rms_db: None,
        samples: Vec::new(),
        trials: Vec::new(),
        wall_clock_s: 0.0,
    }
}

fn record(report: &mut RunReport, points: &[Point], results: &[Vec<TrialOutcome>]) {
    for (p, (point, outcomes)) in points.iter().zip(results).enumerate() {
        report.points.push(summarize(point, outcomes));
        for o in outcomes {
            report.samples.push(QSample {
                seed: o.seed,
                config_hash: report.config_hash.clone(),
                ber: o.count.ber,
                bit_count: o.count.bits,
                q_db: o.q.q_db,
                cumulated_pdl_db: o.link.cumulated_pdl_db,
            });
            report.trials.push(trial_record(p, o));
        }
    }
}

fn trial_record(point: usize, o: &TrialOutcome) -> TrialRecord {
    TrialRecord {
        point,
        seed: o.seed,
        errors: o.count.errors,
        bit_count: o.count.bits,
        ber: o.count.ber,
        q_db: o.q.q_db,
        censored: o.q.censored,
        cumulated_pdl_db: o.link.cumulated_pdl_db,
        theta_rad: o.link.sections.iter().map(|s| s.theta_rad).collect(),
        flagged_subcarriers: o.rx.flagged_subcarriers,
        ssfm_steps: o.link.ssfm_steps,
    }
}

fn timed(spec: &ExperimentSpec, f: impl FnOnce(&mut RunReport) -> Result<()>) -> Result<RunReport> {
    spec.validate()?;
    let start = Instant::now();
    let mut report = new_report(spec);
    f(&mut report)?;
    report.wall_clock_s = start.elapsed().as_secs_f64();
    Ok(report)
}

/// `n_trials` runs of the configured link.
pub fn run_single(spec: &ExperimentSpec) -> Result<RunReport> {
    timed(spec, |report| {
        let points = [Point {
            parameter: "launch_power_dbm",
            value: spec.link.launch_power_dbm,
            link: spec.link.clone(),
        }];
        let results = execute(spec, &points)?;
        record(report, &points, &results);
        Ok(())
    })
}

/// One point per launch power; penalties are relative to the best point.
pub fn sweep_launch_power(spec: &ExperimentSpec) -> Result<RunReport> {
    if spec.sweep.launch_powers_dbm.is_empty() {
        return Err(Error::config("sweep.launch_powers_dbm", "must not be empty"));
    }
    timed(spec, |report| {
        let points: Vec<Point> = spec
            .sweep
            .launch_powers_dbm
            .iter()
            .map(|&p| {
                let mut link = spec.link.clone();
                link.launch_power_dbm = p;
                Point {
                    parameter: "launch_power_dbm",
                    value: p,
                    link,
                }
            })
            .collect();
        let results = execute(spec, &points)?;
        record(report, &points, &results);
        let best = report
            .points
            .iter()
            .max_by(|a, b| a.mean_q_db.total_cmp(&b.mean_q_db))
            .cloned()
            .expect("nonempty sweep");
        report.optimum_launch_power_dbm = Some(best.value);
        for p in &mut report.points {
            p.penalty_db = Some(best.mean_q_db - p.mean_q_db);
        }
        Ok(())
    })
}

fn without_pdl(link: &LinkConfig) -> LinkConfig {
    let mut l = link.clone();
    for s in &mut l.pdl_sections {
        s.rho_db = 0.0;
    }
    l
}

fn with_baseline(spec: &ExperimentSpec, report: &mut RunReport, points: Vec<Point>) -> Result<()> {
    let mut all = vec![Point {
        parameter: "baseline",
        value: 0.0,
        link: without_pdl(&spec.link),
    }];
    all.extend(points);
    let results = execute(spec, &all)?;
    let base = summarize(&all[0], &results[0]);
    report.baseline_trials = results[0].iter().map(|o| trial_record(0, o)).collect();
    record(report, &all[1..], &results[1..]);
    for p in &mut report.points {
        p.penalty_db = Some(base.mean_q_db - p.mean_q_db);
    }
    report.baseline = Some(base);
    Ok(())
}

/// ΔQ against a no-PDL run at the same launch power, for each common
/// angle θ of the aligned sections.
pub fn sweep_theta(spec: &ExperimentSpec) -> Result<RunReport> {
    if spec.link.pdl_sections.iter().any(|s| s.model == PdlModel::Statistical) {
        return Err(Error::config(
            "link.pdl_sections",
            "θ sweep requires aligned PDL sections",
        ));
    }
    if spec.sweep.thetas_rad.is_empty() {
        return Err(Error::config("sweep.thetas_rad", "must not be empty"));
    }
    timed(spec, |report| {
        let points = spec
            .sweep
            .thetas_rad
            .iter()
            .map(|&theta| {
                let mut link = spec.link.clone();
                for s in &mut link.pdl_sections {
                    s.model = PdlModel::Aligned { theta_rad: theta };
                }
                Point {
                    parameter: "theta_rad",
                    value: theta,
                    link,
                }
            })
            .collect();
        with_baseline(spec, report, points)
    })
}

/// ΔQ against no PDL as the per-section PDL varies.
pub fn sweep_pdl(spec: &ExperimentSpec) -> Result<RunReport> {
    if spec.link.pdl_sections.is_empty() {
        return Err(Error::config(
            "link.pdl_sections",
            "PDL sweep needs at least one section",
        ));
    }
    timed(spec, |report| {
        let points = spec
            .sweep
            .pdl_db
            .iter()
            .map(|&rho| {
                let mut link = spec.link.clone();
                for s in &mut link.pdl_sections {
                    s.rho_db = rho;
                }
                Point {
                    parameter: "section_pdl_db",
                    value: rho,
                    link,
                }
            })
            .collect();
        with_baseline(spec, report, points)
    })
}

/// Fresh controller and θ draws per trial; Q PDF, outage at the configured
/// threshold and the rms cumulated PDL.
pub fn monte_carlo_statistical(spec: &ExperimentSpec) -> Result<RunReport> {
    if spec.link.pdl_sections.iter().any(|s| s.model != PdlModel::Statistical) {
        return Err(Error::config(
            "link.pdl_sections",
            "Monte Carlo requires statistical PDL sections",
        ));
    }
    timed(spec, |report| {
        let points = [Point {
            parameter: "rms_pdl_db",
            value: spec.link.expected_rms_pdl_db(),
            link: spec.link.clone(),
        }];
        let results = execute(spec, &points)?;
        record(report, &points, &results);
        let q: Vec<f64> = report.samples.iter().map(|s| s.q_db).collect();
        report.outage = Some(outage_probability(&report.samples, spec.q_threshold_db)?);
        match estimate_q_pdf(&q) {
            Ok(pdf) => report.pdf = Some(pdf),
            Err(e) => report.pdf_error = Some(e.to_string()),
        }
        let pdl: Vec<f64> = report.samples.iter().map(|s| s.cumulated_pdl_db).collect();
        report.cumulated_pdl_rms_db = Some(rms(&pdl));
        Ok(())
    })
}

/// Dispatches on the experiment kind.
pub fn run(spec: &ExperimentSpec) -> Result<RunReport> {
    match spec.kind {
        ExperimentKind::Single => run_single(spec),
        ExperimentKind::PowerSweep => sweep_launch_power(spec),
        ExperimentKind::ThetaSweep => sweep_theta(spec),
        ExperimentKind::PdlSweep => sweep_pdl(spec),
        ExperimentKind::MonteCarlo => monte_carlo_statistical(spec),
    }
}
