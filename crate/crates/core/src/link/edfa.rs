//! Lumped erbium-doped fiber amplifier with additive ASE.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::complex_gaussian;
use crate::signal::{db_to_linear, DualPolWaveform, PLANCK};

/// One-sided ASE power spectral density per polarization, W/Hz.
pub fn ase_psd(gain_db: f64, nf_db: f64, carrier_hz: f64) -> f64 {
    let g = db_to_linear(gain_db);
    if g <= 1.0 {
        return 0.0;
    }
    let n_sp = db_to_linear(nf_db) * g / (2.0 * (g - 1.0));
    n_sp * PLANCK * carrier_hz * (g - 1.0)
}

/// Amplifies `w` by `gain_db` and, when `noise_on`, adds white circular
/// Gaussian ASE on each polarization with per-sample variance `S_ASE·fs`.
pub fn edfa_amplify<R: Rng + ?Sized>(
    w: &DualPolWaveform,
    gain_db: f64,
    nf_db: f64,
    rng: &mut R,
    noise_on: bool,
) -> Result<DualPolWaveform> {
    let mut out = w.clone();
    edfa_amplify_in_place(&mut out, gain_db, nf_db, rng, noise_on)?;
    Ok(out)
}

pub(crate) fn edfa_amplify_in_place<R: Rng + ?Sized>(
    w: &mut DualPolWaveform,
    gain_db: f64,
    nf_db: f64,
    rng: &mut R,
    noise_on: bool,
) -> Result<()> {
    if !(gain_db > 0.0) || !gain_db.is_finite() {
        return Err(Error::invalid(format!("EDFA gain must be positive, got {gain_db} dB")));
    }
    w.scale(db_to_linear(gain_db).sqrt());
    if noise_on {
        let var = ase_psd(gain_db, nf_db, w.center_frequency) * w.sample_rate;
        let (xs, ys) = w.pols_mut();
        for pol in [xs, ys] {
            for v in pol.iter_mut() {
                *v += complex_gaussian(rng, var);
            }
        }
    }
    Ok(())
}
