//! End-to-end experiments: one transceiver run per trial, launch-power,
//! θ and PDL sweeps, statistical Monte Carlo, and report emission.

mod pipeline;
mod report;
mod runner;

pub use pipeline::{run_trial, TrialOutcome};
pub use report::{emit_report, write_points_csv, PlotSwitch};
pub use runner::{
    monte_carlo_statistical, run, run_single, sweep_launch_power, sweep_pdl, sweep_theta, with_threads, PointSummary,
    RunReport, TrialRecord,
};

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::codec::CodecMode;
use crate::error::{Error, Result};
use crate::link::{LinkConfig, PdlModel, PdlSection};
use crate::ofdm::OfdmConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Single,
    PowerSweep,
    ThetaSweep,
    PdlSweep,
    MonteCarlo,
}

/// Swept values; only the list matching the experiment kind is used.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    #[serde(default)]
    pub launch_powers_dbm: Vec<f64>,
    #[serde(default)]
    pub thetas_rad: Vec<f64>,
    /// Per-section PDL values, dB.
    #[serde(default)]
    pub pdl_db: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub link: LinkConfig,
    pub ofdm: OfdmConfig,
    pub codec: CodecMode,
    #[serde(default)]
    pub sweep: SweepGrid,
    pub n_trials: usize,
    pub seed: u64,
    pub desk_scale: bool,
    /// Frames per transmitted burst; all training symbols in a burst are
    /// pooled for channel estimation.
    pub frames_per_burst: usize,
    /// Half-width of the frequency-domain averaging window applied to the
    /// channel estimate (0 disables).
    #[serde(default)]
    pub rx_smoothing_half_window: usize,
    /// Q threshold for outage, dB.
    #[serde(default = "default_q_threshold")]
    pub q_threshold_db: f64,
}

fn default_q_threshold() -> f64 {
    5.7
}

/// SD-FEC limit used as the default outage threshold, dB.
pub const SD_FEC_Q_DB: f64 = 5.7;

impl ExperimentSpec {
    /// Parameters of the 3200 km four-band system.
    pub fn full_scale(kind: ExperimentKind) -> Self {
        let mut spec = Self {
            kind,
            link: LinkConfig::full_scale(),
            ofdm: OfdmConfig::full_scale(),
            codec: CodecMode::LpcPcts,
            sweep: SweepGrid {
                launch_powers_dbm: (-7..=1).map(f64::from).collect(),
                thetas_rad: degrees(&[0.0, 15.0, 30.0, 45.0, 60.0, 75.0, 90.0]),
                pdl_db: vec![0.0, 0.8, 1.6, 2.4],
            },
            n_trials: 500,
            seed: 1,
            desk_scale: false,
            frames_per_burst: 4,
            rx_smoothing_half_window: 0,
            q_threshold_db: SD_FEC_Q_DB,
        };
        if kind != ExperimentKind::MonteCarlo {
            spec.n_trials = 1;
        }
        if matches!(kind, ExperimentKind::ThetaSweep | ExperimentKind::PdlSweep) {
            spec.link = spec.link.with_pdl(5, PdlSection::aligned(1.6, 0.0));
        }
        spec
    }

    /// Single-band, 10-span, 2-section system small enough to run in
    /// seconds per trial.
    pub fn desk(kind: ExperimentKind) -> Self {
        let mut link = LinkConfig::desk_scale();
        let section_rho = DESK_TOTAL_PDL_DB / 2f64.sqrt();
        link = match kind {
            ExperimentKind::MonteCarlo => link.with_pdl(2, PdlSection::statistical(section_rho)),
            ExperimentKind::ThetaSweep | ExperimentKind::PdlSweep => {
                link.with_pdl(2, PdlSection::aligned(DESK_TOTAL_PDL_DB / 2.0, 0.0))
            }
            _ => link,
        };
        let p0 = link.launch_power_dbm;
        Self {
            kind,
            link,
            ofdm: OfdmConfig::desk_scale(),
            codec: CodecMode::LpcPcts,
            sweep: SweepGrid {
                launch_powers_dbm: (-3..=3).map(|i| p0 + 2.0 * f64::from(i)).collect(),
                thetas_rad: degrees(&[0.0, 15.0, 30.0, 45.0]),
                pdl_db: vec![0.0, 0.9, 1.8, 2.7],
            },
            n_trials: if kind == ExperimentKind::MonteCarlo { 50 } else { 1 },
            seed: 1,
            desk_scale: true,
            frames_per_burst: 5,
            rx_smoothing_half_window: 0,
            q_threshold_db: SD_FEC_Q_DB,
        }
    }

    pub fn preset(kind: ExperimentKind, desk: bool) -> Self {
        if desk {
            Self::desk(kind)
        } else {
            Self::full_scale(kind)
        }
    }

    /// Parses a JSON document; unknown keys are rejected.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::config("<document>", e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.link.validate()?;
        self.ofdm.validate()?;
        if self.n_trials == 0 {
            return Err(Error::config("n_trials", "must be at least 1"));
        }
        if self.frames_per_burst == 0 {
            return Err(Error::config("frames_per_burst", "must be at least 1"));
        }
        if self.codec == CodecMode::LtcPcts && self.ofdm.payload_per_frame % 2 != 0 {
            return Err(Error::config(
                "ofdm.payload_per_frame",
                "LTC-PCTS needs an even payload count",
            ));
        }
        if !self.q_threshold_db.is_finite() {
            return Err(Error::config("q_threshold_db", "must be finite"));
        }
        let band_rate = self.ofdm.baud_rate * self.link.oversampling as f64;
        if self.link.n_subbands > 1 {
            if self.link.n_subbands as f64 * self.link.subband_spacing_hz > band_rate {
                return Err(Error::config(
                    "link.oversampling",
                    "simulation grid narrower than the superchannel",
                ));
            }
            if self.ofdm.occupied_bandwidth() > self.link.subband_spacing_hz {
                return Err(Error::config("link.subband_spacing_hz", "sub-bands overlap"));
            }
        }
        match self.kind {
            ExperimentKind::PowerSweep if self.sweep.launch_powers_dbm.is_empty() => {
                return Err(Error::config("sweep.launch_powers_dbm", "must not be empty"));
            }
            ExperimentKind::ThetaSweep => {
                if self.sweep.thetas_rad.is_empty() {
                    return Err(Error::config("sweep.thetas_rad", "must not be empty"));
                }
                if self.link.pdl_sections.iter().any(|s| s.model == PdlModel::Statistical) {
                    return Err(Error::config(
                        "link.pdl_sections",
                        "θ sweep requires aligned PDL sections",
                    ));
                }
            }
            ExperimentKind::PdlSweep if self.sweep.pdl_db.is_empty() => {
                return Err(Error::config("sweep.pdl_db", "must not be empty"));
            }
            ExperimentKind::PdlSweep if self.link.pdl_sections.is_empty() => {
                return Err(Error::config(
                    "link.pdl_sections",
                    "PDL sweep needs at least one section",
                ));
            }
            _ => {}
        }
        Ok(())
    }

    /// Short digest of the canonical JSON encoding.
    pub fn config_hash(&self) -> String {
        let text = serde_json::to_string(self).expect("spec serializes");
        let digest = Sha256::digest(text.as_bytes());
        hex::encode(&digest[..8])
    }
}

/// Total aligned PDL of the desk emulator, dB.
pub const DESK_TOTAL_PDL_DB: f64 = 3.6;

fn degrees(values: &[f64]) -> Vec<f64> {
    values.iter().map(|d| d.to_radians()).collect()
}
