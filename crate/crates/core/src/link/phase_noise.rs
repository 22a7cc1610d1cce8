//! Laser phase noise as a Wiener process.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::signal::{DualPolWaveform, C64};

/// Per-sample variance of the phase increment, rad².
pub fn phase_increment_variance(linewidth_hz: f64, sample_rate: f64) -> f64 {
    2.0 * std::f64::consts::PI * linewidth_hz / sample_rate
}

/// Multiplies both polarizations by a common `e^{jφ[n]}` with `φ[0] = 0`.
pub fn apply_phase_noise<R: Rng + ?Sized>(
    w: &DualPolWaveform,
    linewidth_hz: f64,
    rng: &mut R,
) -> Result<DualPolWaveform> {
    let mut out = w.clone();
    apply_phase_noise_in_place(&mut out, linewidth_hz, rng)?;
    Ok(out)
}

pub(crate) fn apply_phase_noise_in_place<R: Rng + ?Sized>(
    w: &mut DualPolWaveform,
    linewidth_hz: f64,
    rng: &mut R,
) -> Result<()> {
    if !(linewidth_hz >= 0.0) || !linewidth_hz.is_finite() {
        return Err(Error::invalid(format!(
            "linewidth must be non-negative, got {linewidth_hz}"
        )));
    }
    if linewidth_hz == 0.0 {
        return Ok(());
    }
    let sigma = phase_increment_variance(linewidth_hz, w.sample_rate).sqrt();
    let (xs, ys) = w.pols_mut();
    let mut phi = 0.0;
    for (i, (x, y)) in xs.iter_mut().zip(ys.iter_mut()).enumerate() {
        if i > 0 {
            phi += sigma * rng.sample::<f64, _>(StandardNormal);
        }
        let r = C64::from_polar(1.0, phi);
        *x *= r;
        *y *= r;
    }
    Ok(())
}
