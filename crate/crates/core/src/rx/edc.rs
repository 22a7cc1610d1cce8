//! Overlap-save chromatic-dispersion compensation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{beta2_from_dispersion, DualPolWaveform, C64};
use crate::spectral;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdcConfig {
    pub block_size: usize,
    /// Samples discarded per block, split evenly before and after.
    pub overlap: usize,
    /// Dispersion to undo, ps/nm.
    pub total_dispersion_ps_nm: f64,
}

/// Length (samples) of the dispersion impulse response over the full grid
/// bandwidth: `|β₂L|·2π·fs²`.
pub fn dispersion_spread_samples(total_dispersion_ps_nm: f64, sample_rate: f64) -> f64 {
    let beta2_l = beta2_from_dispersion(total_dispersion_ps_nm) * 1e3;
    beta2_l.abs() * 2.0 * std::f64::consts::PI * sample_rate * sample_rate
}

impl EdcConfig {
    /// Overlap of twice the impulse spread; block is the smallest power of
    /// two of at least four times that.
    pub fn for_dispersion(total_dispersion_ps_nm: f64, sample_rate: f64) -> Self {
        let spread = dispersion_spread_samples(total_dispersion_ps_nm, sample_rate).ceil() as usize;
        // Twice the spread leaves room for the roll-off tails (below 1e-11).
        let overlap = 2 * spread;
        let block_size = (4 * overlap).max(64).next_power_of_two();
        Self {
            block_size,
            overlap,
            total_dispersion_ps_nm,
        }
    }

    pub fn validate(&self, sample_rate: f64) -> Result<()> {
        let spread = dispersion_spread_samples(self.total_dispersion_ps_nm, sample_rate);
        if (self.overlap as f64) < spread.ceil() {
            return Err(Error::invalid(format!(
                "EDC overlap {} samples is shorter than the dispersion spread of {:.1} samples",
                self.overlap, spread
            )));
        }
        if self.overlap % 2 != 0 {
            return Err(Error::invalid("EDC overlap must be even"));
        }
        if self.block_size <= self.overlap {
            return Err(Error::invalid("EDC block must be longer than its overlap"));
        }
        Ok(())
    }
}

/// Edge of the exact-inverse band as a fraction of the sample rate. Signals
/// on a 2× oversampled grid occupy |f| ≤ fs/4.
pub const PASSBAND_EDGE: f64 = 0.275;

/// Smooth (C∞) step from 1 at `u ≤ 0` to 0 at `u ≥ 1`.
fn smooth_step_down(u: f64) -> f64 {
    let psi = |v: f64| if v > 0.0 { (-1.0 / v).exp() } else { 0.0 };
    let a = psi(1.0 - u);
    let b = psi(u);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// `H⁻¹(ω) = e^{−j(β₂/2)ω²L}` inside |f| ≤ 0.275·fs, rolled off smoothly to
/// zero at Nyquist. The roll-off keeps the impulse response compact, so
/// block processing and whole-record processing agree.
fn inverse_transfer(n: usize, sample_rate: f64, total_dispersion_ps_nm: f64) -> Vec<C64> {
    let beta2_l = beta2_from_dispersion(total_dispersion_ps_nm) * 1e3;
    let f_pass = PASSBAND_EDGE * sample_rate;
    let f_stop = 0.5 * sample_rate;
    (0..n)
        .map(|k| {
            let f = spectral::bin_frequency(k, n, sample_rate);
            let om = 2.0 * std::f64::consts::PI * f;
            let g = smooth_step_down((f.abs() - f_pass) / (f_stop - f_pass));
            C64::from_polar(g, -0.5 * beta2_l * om * om)
        })
        .collect()
}

/// Whole-signal frequency-domain compensation in one FFT (periodic), with
/// the same transfer function as [`edc_overlap_save`].
pub fn edc_single_block(w: &DualPolWaveform, total_dispersion_ps_nm: f64) -> DualPolWaveform {
    if total_dispersion_ps_nm == 0.0 {
        return w.clone();
    }
    let h = inverse_transfer(w.len(), w.sample_rate, total_dispersion_ps_nm);
    let mut out = w.clone();
    let (xs, ys) = out.pols_mut();
    for pol in [xs, ys] {
        spectral::fft(pol);
        for (v, hk) in pol.iter_mut().zip(&h) {
            *v *= hk;
        }
        spectral::ifft(pol);
    }
    out
}

/// Block-wise compensation. Each block reads `overlap/2` extra samples on
/// both sides (wrapping around the record ends) and keeps the centre.
pub fn edc_overlap_save(w: &DualPolWaveform, cfg: &EdcConfig) -> Result<DualPolWaveform> {
    if cfg.total_dispersion_ps_nm == 0.0 {
        return Ok(w.clone());
    }
    cfg.validate(w.sample_rate)?;
    let n = w.len();
    let nb = cfg.block_size;
    let half = cfg.overlap / 2;
    let valid = nb - cfg.overlap;
    let h = inverse_transfer(nb, w.sample_rate, cfg.total_dispersion_ps_nm);
    let fwd = spectral::forward_plan(nb);
    let inv = spectral::inverse_plan(nb);
    let scale = 1.0 / nb as f64;
    let mut outs = Vec::with_capacity(2);
    let mut buf = vec![C64::new(0.0, 0.0); nb];
    for src in [w.x(), w.y()] {
        let mut out = vec![C64::new(0.0, 0.0); n];
        let mut start = 0;
        while start < n {
            for (j, b) in buf.iter_mut().enumerate() {
                let idx = (start + j + n * (half / n + 1) - half) % n;
                *b = src[idx];
            }
            fwd.process(&mut buf);
            for (v, hk) in buf.iter_mut().zip(&h) {
                *v *= hk * scale;
            }
            inv.process(&mut buf);
            let take = valid.min(n - start);
            out[start..start + take].copy_from_slice(&buf[half..half + take]);
            start += take;
        }
        outs.push(out);
    }
    let y = outs.pop().unwrap();
    let x = outs.pop().unwrap();
    w.with_samples(x, y)
}
