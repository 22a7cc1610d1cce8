//! Frequency-domain multiplexing of equally spaced sub-bands.

use crate::error::{Error, Result};
use crate::signal::{DualPolWaveform, C64};
use crate::spectral;

/// Carrier offset of band `i` out of `n`, centred on zero, Hz.
pub fn band_offset(i: usize, n: usize, spacing_hz: f64) -> f64 {
    (i as f64 - (n as f64 - 1.0) / 2.0) * spacing_hz
}

fn offset_bins(offset_hz: f64, n: usize, fs: f64) -> Result<isize> {
    let bins = offset_hz * n as f64 / fs;
    let k = bins.round();
    if (bins - k).abs() > 1e-6 {
        return Err(Error::invalid(format!(
            "band offset {offset_hz:.4e} Hz is not a whole number of FFT bins ({bins:.4})"
        )));
    }
    Ok(k as isize)
}

fn in_band(k: usize, n: usize, fs: f64, half_width: f64) -> bool {
    spectral::bin_frequency(k, n, fs).abs() < half_width - 1e-9 * fs
}

/// Shifts each band by its offset and sums the spectra. Bands must share
/// a grid whose sample rate exceeds `n_bands × spacing`.
pub fn mux_superchannel(bands: &[DualPolWaveform], spacing_hz: f64) -> Result<DualPolWaveform> {
    let first = bands.first().ok_or_else(|| Error::invalid("no bands to multiplex"))?;
    if bands.len() == 1 {
        return Ok(first.clone());
    }
    let n = first.len();
    let fs = first.sample_rate;
    if bands.iter().any(|b| b.len() != n || b.sample_rate != fs) {
        return Err(Error::invalid("sub-bands must share one sample grid"));
    }
    let nb = bands.len();
    if !(spacing_hz > 0.0) || nb as f64 * spacing_hz > fs {
        return Err(Error::invalid(format!(
            "grid of {fs:.4e} Hz aliases {nb} bands at {spacing_hz:.4e} Hz spacing"
        )));
    }
    let mut sx = vec![C64::new(0.0, 0.0); n];
    let mut sy = vec![C64::new(0.0, 0.0); n];
    for (i, band) in bands.iter().enumerate() {
        let shift = offset_bins(band_offset(i, nb, spacing_hz), n, fs)?;
        for (src, dst) in [(band.x(), &mut sx), (band.y(), &mut sy)] {
            let mut spec = src.to_vec();
            spectral::fft(&mut spec);
            // Round-off leakage outside the slot is dropped; real content is an error.
            let total: f64 = spec.iter().map(|v| v.norm_sqr()).sum();
            let outside: f64 = spec
                .iter()
                .enumerate()
                .filter(|(k, _)| !in_band(*k, n, fs, spacing_hz / 2.0))
                .map(|(_, v)| v.norm_sqr())
                .sum();
            if outside > 1e-12 * total {
                return Err(Error::invalid(format!("band {i} exceeds its ±spacing/2 slot")));
            }
            for (k, v) in spec.iter().enumerate() {
                if !in_band(k, n, fs, spacing_hz / 2.0) {
                    continue;
                }
                let t = (k as isize + shift).rem_euclid(n as isize) as usize;
                dst[t] += v;
            }
        }
    }
    spectral::ifft(&mut sx);
    spectral::ifft(&mut sy);
    first.with_samples(sx, sy)
}

/// Shifts band `index` to baseband and keeps only `|f| < spacing/2`.
pub fn demux_select(w: &DualPolWaveform, index: usize, n_bands: usize, spacing_hz: f64) -> Result<DualPolWaveform> {
    if index >= n_bands {
        return Err(Error::invalid(format!("band {index} out of range for {n_bands} bands")));
    }
    if n_bands == 1 {
        return Ok(w.clone());
    }
    let n = w.len();
    let fs = w.sample_rate;
    if n_bands as f64 * spacing_hz > fs {
        return Err(Error::invalid("grid too narrow for the superchannel"));
    }
    let shift = offset_bins(band_offset(index, n_bands, spacing_hz), n, fs)?;
    let mut out = Vec::with_capacity(2);
    for src in [w.x(), w.y()] {
        let mut spec = src.to_vec();
        spectral::fft(&mut spec);
        let mut base = vec![C64::new(0.0, 0.0); n];
        for (k, v) in base.iter_mut().enumerate() {
            if in_band(k, n, fs, spacing_hz / 2.0) {
                *v = spec[(k as isize + shift).rem_euclid(n as isize) as usize];
            }
        }
        spectral::ifft(&mut base);
        out.push(base);
    }
    let y = out.pop().unwrap();
    let x = out.pop().unwrap();
    w.with_samples(x, y)
}
