//! FFT plumbing shared by the modem, the fiber solver and the receiver.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::signal::C64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

pub(crate) fn inverse_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// Unnormalized forward DFT in place.
pub(crate) fn fft(buf: &mut [C64]) {
    forward_plan(buf.len()).process(buf);
}

/// Inverse DFT in place, normalized by 1/N.
pub(crate) fn ifft(buf: &mut [C64]) {
    let n = buf.len();
    inverse_plan(n).process(buf);
    let s = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= s;
    }
}

/// Signed frequency (Hz) of DFT bin `k` for length `n` at `sample_rate`.
pub(crate) fn bin_frequency(k: usize, n: usize, sample_rate: f64) -> f64 {
    let k = k as i64;
    let n_i = n as i64;
    let signed = if k < (n_i + 1) / 2 { k } else { k - n_i };
    signed as f64 * sample_rate / n as f64
}

/// Angular frequencies (rad/s) in FFT bin order.
pub(crate) fn angular_grid(n: usize, sample_rate: f64) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * bin_frequency(k, n, sample_rate)).collect()
}

/// Ideal (brick-wall) resampling of a periodic sequence from `n` to `m`
/// samples by zero-padding or truncating its spectrum. Sample values keep
/// their amplitude scale.
pub(crate) fn resample(input: &[C64], m: usize) -> Vec<C64> {
    let n = input.len();
    if n == m {
        return input.to_vec();
    }
    let mut spec = input.to_vec();
    fft(&mut spec);
    let mut out = vec![C64::new(0.0, 0.0); m];
    let keep = n.min(m);
    let pos = keep.div_ceil(2);
    let neg = keep / 2;
    out[..pos].copy_from_slice(&spec[..pos]);
    for i in 1..=neg {
        out[m - i] = spec[n - i];
    }
    // Split an unpaired Nyquist bin symmetrically when upsampling an even
    // length so real signals stay real.
    if m > n && n % 2 == 0 {
        let nyq = spec[n / 2];
        out[n / 2] = nyq * 0.5;
        out[m - n / 2] = nyq * 0.5;
    }
    ifft(&mut out);
    let gain = m as f64 / n as f64;
    for v in out.iter_mut() {
        *v *= gain;
    }
    out
}

/// Smallest length ≥ `n` of the form 2^a·3^b, which rustfft handles quickly.
pub(crate) fn fast_length(n: usize) -> usize {
    let mut best = usize::MAX;
    let mut p3 = 1usize;
    while p3 < 2 * n.max(1) {
        let mut v = p3;
        while v < n {
            v *= 2;
        }
        best = best.min(v);
        p3 *= 3;
    }
    best
}
