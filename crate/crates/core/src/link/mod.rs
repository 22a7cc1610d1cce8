//! Optical channel between the transmitter DAC and the coherent receiver:
//! laser phase noise, superchannel multiplexing, fiber spans with EDFAs,
//! the lumped PDL emulator with its polarization controllers, and PMD.

pub mod edfa;
pub mod fiber;
pub mod jones;
pub mod phase_noise;
pub mod pmd;
pub mod superchannel;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{SeededRng, Substream};
use crate::signal::{watts_to_dbm, DualPolWaveform, DEFAULT_CARRIER_HZ};

pub use edfa::{ase_psd, edfa_amplify};
pub use fiber::{apply_dispersion, fiber_span_ssfm, FiberSolver, SpanParams, SsfmSettings};
pub use jones::{cumulated_pdl_db, pdl_alpha, pdl_jones, random_sop_controller, JonesMatrix};
pub use phase_noise::apply_phase_noise;
pub use pmd::{apply_pmd_section, section_dgd_ps};
pub use superchannel::{demux_select, mux_superchannel};

/// Orientation of a PDL element relative to the incoming SOP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PdlModel {
    /// Fixed angle θ; the preceding polarization controller is transparent.
    Aligned { theta_rad: f64 },
    /// θ ~ U[0, 2π) and a Haar-random controller, drawn once per trial.
    Statistical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdlSection {
    pub rho_db: f64,
    pub model: PdlModel,
}

impl PdlSection {
    pub fn aligned(rho_db: f64, theta_rad: f64) -> Self {
        Self {
            rho_db,
            model: PdlModel::Aligned { theta_rad },
        }
    }

    pub fn statistical(rho_db: f64) -> Self {
        Self {
            rho_db,
            model: PdlModel::Statistical,
        }
    }
}

/// How statistical sections draw their polarization controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SopControllerModel {
    /// Uniform over SU(2).
    #[default]
    Haar,
    /// Real rotation by a uniform angle (linear-polarization controller).
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub spans: Vec<SpanParams>,
    /// Lumped PDL elements, evenly interleaved with the spans.
    pub pdl_sections: Vec<PdlSection>,
    #[serde(default)]
    pub sop_controller: SopControllerModel,
    pub edfa_gain_db: f64,
    pub edfa_nf_db: f64,
    pub ase_enabled: bool,
    /// Linewidth of both the transmitter laser and the local oscillator.
    pub laser_linewidth_hz: f64,
    /// Launch power per sub-band.
    pub launch_power_dbm: f64,
    pub n_subbands: usize,
    pub subband_spacing_hz: f64,
    /// Sub-band handed to the receiver.
    pub measured_band: usize,
    pub ssfm_max_step_km: f64,
    pub ssfm_max_nl_phase_rad: f64,
    /// Fraction of the link dispersion pre-compensated at the transmitter.
    #[serde(default)]
    pub pre_dispersion_fraction: f64,
    /// Simulation grid rate as a multiple of the band baud rate.
    pub oversampling: usize,
    #[serde(default = "default_carrier")]
    pub carrier_frequency_hz: f64,
}

fn default_carrier() -> f64 {
    DEFAULT_CARRIER_HZ
}

impl LinkConfig {
    /// 40 × 80 km SSMF, 16 dB / 5.5 dB EDFAs, 100 kHz lasers, four 37.5 GHz
    /// spaced sub-bands, five statistical 1.6 dB PDL sections.
    pub fn full_scale() -> Self {
        Self {
            spans: vec![SpanParams::ssmf_80km(); 40],
            pdl_sections: vec![PdlSection::statistical(1.6); 5],
            sop_controller: SopControllerModel::Haar,
            edfa_gain_db: 16.0,
            edfa_nf_db: 5.5,
            ase_enabled: true,
            laser_linewidth_hz: 100e3,
            launch_power_dbm: -3.0,
            n_subbands: 4,
            subband_spacing_hz: 37.5e9,
            measured_band: 1,
            ssfm_max_step_km: 1.0,
            ssfm_max_nl_phase_rad: 0.005,
            pre_dispersion_fraction: 0.0,
            oversampling: 8,
            carrier_frequency_hz: DEFAULT_CARRIER_HZ,
        }
    }

    /// Single-band 10-span link used for desk-scale experiments. The
    /// amplifier noise figure is raised so that bit errors are countable
    /// with a few hundred thousand bits.
    pub fn desk_scale() -> Self {
        Self {
            spans: vec![SpanParams::ssmf_80km(); 10],
            pdl_sections: Vec::new(),
            sop_controller: SopControllerModel::Haar,
            edfa_gain_db: 16.0,
            edfa_nf_db: DESK_NOISE_FIGURE_DB,
            ase_enabled: true,
            laser_linewidth_hz: 100e3,
            launch_power_dbm: DESK_LAUNCH_POWER_DBM,
            n_subbands: 1,
            subband_spacing_hz: 37.5e9,
            measured_band: 0,
            ssfm_max_step_km: 1.0,
            ssfm_max_nl_phase_rad: 0.005,
            pre_dispersion_fraction: 0.0,
            oversampling: 2,
            carrier_frequency_hz: DEFAULT_CARRIER_HZ,
        }
    }

    /// Replaces the PDL emulator with `n` identical sections.
    pub fn with_pdl(mut self, n: usize, section: PdlSection) -> Self {
        self.pdl_sections = vec![section; n];
        self
    }

    /// Sets every span's PMD so that the whole link has `mean_dgd_ps`.
    pub fn with_link_pmd(mut self, mean_dgd_ps: f64) -> Self {
        let n = self.spans.len().max(1) as f64;
        for s in &mut self.spans {
            s.pmd_mean_dgd_ps = mean_dgd_ps / n.sqrt();
        }
        self
    }

    /// Turns off every impairment except attenuation/gain and dispersion.
    pub fn linear_noiseless(mut self) -> Self {
        for s in &mut self.spans {
            s.nonlinear_coeff = 0.0;
            s.pmd_mean_dgd_ps = 0.0;
        }
        self.ase_enabled = false;
        self.laser_linewidth_hz = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.spans.iter().enumerate() {
            s.validate(&format!("link.spans[{i}]"))?;
            if (s.loss_db() - self.edfa_gain_db).abs() > 1e-6 {
                return Err(Error::config(
                    "link.edfa_gain_db",
                    format!(
                        "gain {} dB does not compensate span {i} loss of {} dB",
                        self.edfa_gain_db,
                        s.loss_db()
                    ),
                ));
            }
        }
        let n_sec = self.pdl_sections.len();
        if n_sec > 0 && self.spans.len() % n_sec != 0 {
            return Err(Error::config(
                "link.pdl_sections",
                format!("{n_sec} sections do not divide {} spans evenly", self.spans.len()),
            ));
        }
        for (i, p) in self.pdl_sections.iter().enumerate() {
            if !(p.rho_db >= 0.0) || !p.rho_db.is_finite() {
                return Err(Error::config(
                    format!("link.pdl_sections[{i}].rho_db"),
                    "must be finite and non-negative",
                ));
            }
            if let PdlModel::Aligned { theta_rad } = p.model {
                if !theta_rad.is_finite() {
                    return Err(Error::config(
                        format!("link.pdl_sections[{i}].model.theta_rad"),
                        "must be finite",
                    ));
                }
            }
        }
        if !(self.edfa_gain_db >= 0.0) {
            return Err(Error::config("link.edfa_gain_db", "must be non-negative"));
        }
        if !self.edfa_nf_db.is_finite() {
            return Err(Error::config("link.edfa_nf_db", "must be finite"));
        }
        if !(self.laser_linewidth_hz >= 0.0) || !self.laser_linewidth_hz.is_finite() {
            return Err(Error::config("link.laser_linewidth_hz", "must be non-negative"));
        }
        if !self.launch_power_dbm.is_finite() {
            return Err(Error::config("link.launch_power_dbm", "must be finite"));
        }
        if self.n_subbands == 0 {
            return Err(Error::config("link.n_subbands", "must be at least 1"));
        }
        if self.measured_band >= self.n_subbands {
            return Err(Error::config("link.measured_band", "must index an existing sub-band"));
        }
        if self.n_subbands > 1 && !(self.subband_spacing_hz > 0.0) {
            return Err(Error::config("link.subband_spacing_hz", "must be positive"));
        }
        if !(self.ssfm_max_step_km > 0.0) {
            return Err(Error::config("link.ssfm_max_step_km", "must be positive"));
        }
        if !(self.ssfm_max_nl_phase_rad > 0.0) {
            return Err(Error::config("link.ssfm_max_nl_phase_rad", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.pre_dispersion_fraction) {
            return Err(Error::config("link.pre_dispersion_fraction", "must lie in [0, 1]"));
        }
        if self.oversampling < 2 {
            return Err(Error::config("link.oversampling", "must be at least 2"));
        }
        if !(self.carrier_frequency_hz > 0.0) {
            return Err(Error::config("link.carrier_frequency_hz", "must be positive"));
        }
        Ok(())
    }

    pub fn ssfm(&self) -> SsfmSettings {
        SsfmSettings {
            max_step_km: self.ssfm_max_step_km,
            max_nl_phase_rad: self.ssfm_max_nl_phase_rad,
        }
    }

    /// Accumulated dispersion over all spans, ps/nm.
    pub fn total_dispersion_ps_nm(&self) -> f64 {
        self.spans.iter().map(|s| s.dispersion_ps_nm_km * s.length_km).sum()
    }

    pub fn spans_per_section(&self) -> usize {
        match self.pdl_sections.len() {
            0 => self.spans.len(),
            n => self.spans.len() / n,
        }
    }

    /// rms of the cumulated PDL for statistical sections, `ρ·√N`.
    pub fn expected_rms_pdl_db(&self) -> f64 {
        self.pdl_sections
            .iter()
            .map(|p| p.rho_db * p.rho_db)
            .sum::<f64>()
            .sqrt()
    }
}

/// Desk-preset amplifier noise figure, dB.
pub const DESK_NOISE_FIGURE_DB: f64 = 18.0;
/// Desk-preset launch power per band, dBm.
pub const DESK_LAUNCH_POWER_DBM: f64 = 2.0;

/// Drawn state of one controller + PDL element pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionTelemetry {
    pub theta_rad: f64,
    pub rho_db: f64,
    /// SOP controller entries, `[re, im]` row-major.
    pub sop: [[f64; 2]; 4],
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LinkTelemetry {
    pub sections: Vec<SectionTelemetry>,
    /// Cumulated PDL of the product of all lumped elements.
    pub cumulated_pdl_db: f64,
    pub span_launch_power_dbm: Vec<f64>,
    pub measured_band: usize,
    pub ssfm_steps: usize,
}

/// One drawn lumped element: controller followed by the PDL section.
#[derive(Debug, Clone, Copy)]
pub struct LumpedElement {
    pub sop: JonesMatrix,
    pub theta_rad: f64,
    pub pdl: JonesMatrix,
}

impl LumpedElement {
    pub fn matrix(&self) -> JonesMatrix {
        self.pdl * self.sop
    }
}

fn linear_controller<R: Rng + ?Sized>(rng: &mut R) -> JonesMatrix {
    JonesMatrix::rotation(2.0 * std::f64::consts::PI * rng.random::<f64>())
}

/// Draws the controller and PDL element of every section for one trial.
pub fn draw_lumped_elements(cfg: &LinkConfig, rng: &SeededRng) -> Result<Vec<LumpedElement>> {
    let two_pi = 2.0 * std::f64::consts::PI;
    cfg.pdl_sections
        .iter()
        .enumerate()
        .map(|(i, sec)| {
            let (sop, theta) = match sec.model {
                PdlModel::Aligned { theta_rad } => (JonesMatrix::identity(), theta_rad),
                PdlModel::Statistical => {
                    let mut sop_rng = rng.stream(Substream::Sop, i as u64);
                    let sop = match cfg.sop_controller {
                        SopControllerModel::Haar => random_sop_controller(&mut sop_rng),
                        SopControllerModel::Linear => linear_controller(&mut sop_rng),
                    };
                    let theta = two_pi * rng.stream(Substream::PdlAngle, i as u64).random::<f64>();
                    (sop, theta)
                }
            };
            Ok(LumpedElement {
                sop,
                theta_rad: theta,
                pdl: pdl_jones(theta, sec.rho_db)?,
            })
        })
        .collect()
}

/// Product of all lumped elements in propagation order.
pub fn compose_lumped(elements: &[LumpedElement]) -> JonesMatrix {
    elements.iter().fold(JonesMatrix::identity(), |acc, e| e.matrix() * acc)
}

fn section_telemetry(elements: &[LumpedElement], cfg: &LinkConfig) -> Result<(Vec<SectionTelemetry>, f64)> {
    let sections = elements
        .iter()
        .zip(&cfg.pdl_sections)
        .map(|(e, s)| SectionTelemetry {
            theta_rad: e.theta_rad,
            rho_db: s.rho_db,
            sop: e.sop.to_parts(),
        })
        .collect();
    Ok((sections, cumulated_pdl_db(&compose_lumped(elements))?))
}

/// Propagates `w` through the spans, amplifiers and PDL emulator:
/// for each section, `spans_per_section × (fiber → [PMD] → EDFA)`, then the
/// polarization controller and the PDL element.
pub fn link_propagate(
    w: &DualPolWaveform,
    cfg: &LinkConfig,
    rng: &SeededRng,
) -> Result<(DualPolWaveform, LinkTelemetry)> {
    cfg.validate()?;
    let elements = draw_lumped_elements(cfg, rng)?;
    let (sections, cum) = section_telemetry(&elements, cfg)?;
    let mut out = w.clone();
    let mut telemetry = LinkTelemetry {
        sections,
        cumulated_pdl_db: cum,
        span_launch_power_dbm: Vec::with_capacity(cfg.spans.len()),
        measured_band: cfg.measured_band,
        ssfm_steps: 0,
    };
    if !cfg.spans.is_empty() {
        fiber::check_sampling(&out)?;
    }
    let ssfm = cfg.ssfm();
    let mut solver = FiberSolver::new(out.len(), out.sample_rate);
    let per_section = cfg.spans_per_section();
    for (i, span) in cfg.spans.iter().enumerate() {
        telemetry.span_launch_power_dbm.push(watts_to_dbm(out.mean_power()?));
        solver.propagate(&mut out, span, &ssfm)?;
        if span.pmd_mean_dgd_ps > 0.0 {
            let mut r = rng.stream(Substream::Pmd, i as u64);
            apply_pmd_section(&mut out, section_dgd_ps(span.pmd_mean_dgd_ps, 1), &mut r)?;
        }
        // A 0 dB amplifier (lossless spans) is simply absent.
        if cfg.edfa_gain_db > 0.0 {
            let mut ase = rng.stream(Substream::Ase, i as u64);
            edfa::edfa_amplify_in_place(&mut out, cfg.edfa_gain_db, cfg.edfa_nf_db, &mut ase, cfg.ase_enabled)?;
        }
        if per_section > 0 && (i + 1) % per_section == 0 {
            if let Some(e) = elements.get((i + 1) / per_section - 1) {
                e.matrix().apply_to(&mut out);
            }
        }
    }
    if cfg.spans.is_empty() {
        compose_lumped(&elements).apply_to(&mut out);
    }
    telemetry.ssfm_steps = solver.steps_taken;
    if !out.is_finite() {
        return Err(Error::Numerical("link output is not finite".into()));
    }
    Ok((out, telemetry))
}

/// Full optical path for a superchannel: per-band transmitter laser phase
/// noise, multiplexing, optional pre-dispersion, the fiber link,
/// demultiplexing of the measured band and local-oscillator phase noise.
/// Bands must already be on the link grid and at their launch power.
pub fn transmit_superchannel(
    bands: &[DualPolWaveform],
    cfg: &LinkConfig,
    rng: &SeededRng,
) -> Result<(DualPolWaveform, LinkTelemetry)> {
    cfg.validate()?;
    if bands.len() != cfg.n_subbands {
        return Err(Error::invalid(format!(
            "expected {} sub-bands, got {}",
            cfg.n_subbands,
            bands.len()
        )));
    }
    let mut lasers = Vec::with_capacity(bands.len());
    for (i, b) in bands.iter().enumerate() {
        let mut r = rng.stream(Substream::PhaseNoise, 2 * i as u64);
        lasers.push(apply_phase_noise(b, cfg.laser_linewidth_hz, &mut r)?);
    }
    let mut w = mux_superchannel(&lasers, cfg.subband_spacing_hz)?;
    apply_dispersion(&mut w, -cfg.pre_dispersion_fraction * cfg.total_dispersion_ps_nm());
    let (w, telemetry) = link_propagate(&w, cfg, rng)?;
    let band = demux_select(&w, cfg.measured_band, cfg.n_subbands, cfg.subband_spacing_hz)?;
    let mut lo = rng.stream(Substream::PhaseNoise, 2 * cfg.measured_band as u64 + 1);
    let band = apply_phase_noise(&band, cfg.laser_linewidth_hz, &mut lo)?;
    Ok((band, telemetry))
}
