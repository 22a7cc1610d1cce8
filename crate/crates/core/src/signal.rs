//! Dual-polarization baseband waveforms and unit conventions.
//!
//! Optical powers are carried in watts everywhere inside the crate; dBm only
//! appears at configuration and report boundaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = num_complex::Complex64;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Planck constant (J·s).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Default optical carrier, 1550 nm band (Hz).
pub const DEFAULT_CARRIER_HZ: f64 = 193.41e12;
/// Reference wavelength used to convert dispersion parameters (m).
pub const REFERENCE_WAVELENGTH_M: f64 = 1550e-9;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Power ratio from decibels.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Group-velocity dispersion β₂ (s²/m) from a dispersion parameter in
/// ps/(nm·km), evaluated at [`REFERENCE_WAVELENGTH_M`].
pub fn beta2_from_dispersion(d_ps_nm_km: f64) -> f64 {
    let d_si = d_ps_nm_km * 1e-6; // s/m²
    -d_si * REFERENCE_WAVELENGTH_M * REFERENCE_WAVELENGTH_M / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT)
}

/// Complex baseband field samples for the two polarizations, in √W.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualPolWaveform {
    x: Vec<C64>,
    y: Vec<C64>,
    /// Samples per second.
    pub sample_rate: f64,
    /// Optical carrier frequency ν (Hz).
    pub center_frequency: f64,
}

impl DualPolWaveform {
    /// Builds a waveform; both polarizations must be nonempty and equally long.
    pub fn new(x: Vec<C64>, y: Vec<C64>, sample_rate: f64, center_frequency: f64) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::invalid("waveform must contain at least one sample"));
        }
        if x.len() != y.len() {
            return Err(Error::invalid(format!(
                "polarization lengths differ: {} vs {}",
                x.len(),
                y.len()
            )));
        }
        if !(sample_rate > 0.0) {
            return Err(Error::invalid("sample rate must be positive"));
        }
        Ok(Self {
            x,
            y,
            sample_rate,
            center_frequency,
        })
    }

    pub fn zeros(len: usize, sample_rate: f64, center_frequency: f64) -> Result<Self> {
        Self::new(
            vec![C64::new(0.0, 0.0); len],
            vec![C64::new(0.0, 0.0); len],
            sample_rate,
            center_frequency,
        )
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[C64] {
        &self.x
    }

    pub fn y(&self) -> &[C64] {
        &self.y
    }

    pub fn x_mut(&mut self) -> &mut [C64] {
        &mut self.x
    }

    pub fn y_mut(&mut self) -> &mut [C64] {
        &mut self.y
    }

    pub fn pols_mut(&mut self) -> (&mut [C64], &mut [C64]) {
        (&mut self.x, &mut self.y)
    }

    pub fn into_parts(self) -> (Vec<C64>, Vec<C64>) {
        (self.x, self.y)
    }

    /// Same sampling parameters, new samples.
    pub fn with_samples(&self, x: Vec<C64>, y: Vec<C64>) -> Result<Self> {
        Self::new(x, y, self.sample_rate, self.center_frequency)
    }

    /// Mean of |x|²+|y|² over all samples (W).
    pub fn mean_power(&self) -> Result<f64> {
        waveform_power(self)
    }

    /// Sum of |x|²+|y|² over all samples (W·sample).
    pub fn energy(&self) -> f64 {
        self.x.iter().chain(&self.y).map(|s| s.norm_sqr()).sum()
    }

    /// Multiplies every field sample by `gain`, scaling power by `gain²`.
    pub fn scale(&mut self, gain: f64) {
        for s in self.x.iter_mut().chain(self.y.iter_mut()) {
            *s *= gain;
        }
    }

    /// Sub-range of samples `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.len() {
            return Err(Error::invalid(format!(
                "slice {}..{} out of range for waveform of length {}",
                start,
                start + len,
                self.len()
            )));
        }
        Self::new(
            self.x[start..start + len].to_vec(),
            self.y[start..start + len].to_vec(),
            self.sample_rate,
            self.center_frequency,
        )
    }

    /// Appends `other`; sample rates must match.
    pub fn append(&mut self, other: &DualPolWaveform) -> Result<()> {
        if (other.sample_rate - self.sample_rate).abs() > 1e-9 * self.sample_rate {
            return Err(Error::invalid(
                "cannot concatenate waveforms with different sample rates",
            ));
        }
        self.x.extend_from_slice(&other.x);
        self.y.extend_from_slice(&other.y);
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.x
            .iter()
            .chain(&self.y)
            .all(|s| s.re.is_finite() && s.im.is_finite())
    }
}

/// Mean power of a waveform, |x|²+|y|² averaged over samples.
pub fn waveform_power(w: &DualPolWaveform) -> Result<f64> {
    if w.is_empty() {
        return Err(Error::invalid("mean power of an empty waveform is undefined"));
    }
    Ok(w.energy() / w.len() as f64)
}

/// Root-mean-square error of `actual` relative to the rms of `reference`,
/// over both polarizations.
pub fn evm(actual: &DualPolWaveform, reference: &DualPolWaveform) -> Result<f64> {
    if actual.len() != reference.len() {
        return Err(Error::invalid("EVM requires equal-length waveforms"));
    }
    let err: f64 = actual
        .x
        .iter()
        .zip(&reference.x)
        .chain(actual.y.iter().zip(&reference.y))
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    let reference_energy = reference.energy();
    if reference_energy == 0.0 {
        return Err(Error::invalid("EVM reference has zero energy"));
    }
    Ok((err / reference_energy).sqrt())
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max)
}
