//! Dual-polarization split-step Fourier solver for the Manakov equation
//!
//! ```text
//! ∂A/∂z = −(a/2)·A − j(β₂/2)·∂²A/∂t² + j(8/9)γ(|Ax|²+|Ay|²)·A
//! ```
//!
//! integrated with symmetric steps (half linear, full nonlinear, half
//! linear). Consecutive linear half-steps are merged, so each step costs one
//! forward and one inverse FFT per polarization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{beta2_from_dispersion, DualPolWaveform, C64};
use crate::spectral;

/// Manakov averaging factor applied to the Kerr coefficient.
pub const MANAKOV_FACTOR: f64 = 8.0 / 9.0;

/// dB → neper conversion for power attenuation (10·log10 e).
const DB_PER_NEPER: f64 = 4.342_944_819_032_518;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpanParams {
    pub length_km: f64,
    /// Power attenuation, dB/km.
    pub attenuation_db_km: f64,
    /// Dispersion parameter D, ps/(nm·km).
    pub dispersion_ps_nm_km: f64,
    /// Kerr nonlinear parameter γ, 1/(W·km).
    pub nonlinear_coeff: f64,
    /// Mean DGD contributed by this span, ps. Zero disables PMD.
    #[serde(default)]
    pub pmd_mean_dgd_ps: f64,
}

impl SpanParams {
    /// 80 km SSMF: 0.2 dB/km, 16 ps/(nm·km), γ = 1.22 /(W·km).
    pub fn ssmf_80km() -> Self {
        Self {
            length_km: 80.0,
            attenuation_db_km: 0.2,
            dispersion_ps_nm_km: 16.0,
            nonlinear_coeff: 1.22,
            pmd_mean_dgd_ps: 0.0,
        }
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        if !(self.length_km > 0.0) {
            return Err(Error::config(format!("{field}.length_km"), "must be positive"));
        }
        if !(self.attenuation_db_km >= 0.0) {
            return Err(Error::config(
                format!("{field}.attenuation_db_km"),
                "must be non-negative",
            ));
        }
        if !(self.nonlinear_coeff >= 0.0) {
            return Err(Error::config(
                format!("{field}.nonlinear_coeff"),
                "must be non-negative",
            ));
        }
        if !(self.pmd_mean_dgd_ps >= 0.0) {
            return Err(Error::config(
                format!("{field}.pmd_mean_dgd_ps"),
                "must be non-negative",
            ));
        }
        if !self.dispersion_ps_nm_km.is_finite() {
            return Err(Error::config(format!("{field}.dispersion_ps_nm_km"), "must be finite"));
        }
        Ok(())
    }

    /// Power attenuation coefficient, 1/km.
    pub fn alpha_per_km(&self) -> f64 {
        self.attenuation_db_km / DB_PER_NEPER
    }

    pub fn loss_db(&self) -> f64 {
        self.attenuation_db_km * self.length_km
    }

    /// Effective nonlinear length, km.
    pub fn effective_length_km(&self) -> f64 {
        let a = self.alpha_per_km();
        if a == 0.0 {
            self.length_km
        } else {
            (1.0 - (-a * self.length_km).exp()) / a
        }
    }

    /// β₂ in s²/km.
    pub fn beta2_per_km(&self) -> f64 {
        beta2_from_dispersion(self.dispersion_ps_nm_km) * 1e3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsfmSettings {
    pub max_step_km: f64,
    /// Upper bound on the nonlinear phase accumulated per step at the mean
    /// signal power.
    pub max_nl_phase_rad: f64,
}

impl Default for SsfmSettings {
    fn default() -> Self {
        Self {
            max_step_km: 1.0,
            max_nl_phase_rad: 0.005,
        }
    }
}

/// Fails unless the grid offers a 2× margin over the occupied bandwidth,
/// taken as the smallest set of FFT bins holding 99.9 % of the energy.
pub fn check_sampling(w: &DualPolWaveform) -> Result<()> {
    let n = w.len();
    let mut bins = vec![0.0; n];
    for pol in [w.x(), w.y()] {
        let mut buf = pol.to_vec();
        spectral::fft(&mut buf);
        for (e, v) in bins.iter_mut().zip(&buf) {
            *e += v.norm_sqr();
        }
    }
    let total: f64 = bins.iter().sum();
    if total == 0.0 {
        return Ok(());
    }
    bins.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut occupied = 0;
    for e in &bins {
        if acc >= 0.999 * total {
            break;
        }
        acc += e;
        occupied += 1;
    }
    if 2 * occupied > n {
        return Err(Error::invalid(format!(
            "sample rate {:.3e} Hz too low: occupied bandwidth {:.3e} Hz exceeds half the grid",
            w.sample_rate,
            occupied as f64 * w.sample_rate / n as f64
        )));
    }
    Ok(())
}

/// Propagates `w` through one span. See [`FiberSolver`] for the scheme.
pub fn fiber_span_ssfm(w: &DualPolWaveform, span: &SpanParams, ssfm: &SsfmSettings) -> Result<DualPolWaveform> {
    span.validate("span")?;
    check_sampling(w)?;
    let mut out = w.clone();
    FiberSolver::new(w.len(), w.sample_rate).propagate(&mut out, span, ssfm)?;
    Ok(out)
}

/// Reusable split-step solver for a fixed sample grid.
pub struct FiberSolver {
    omega_sq: Vec<f64>,
    forward: std::sync::Arc<dyn rustfft::Fft<f64>>,
    inverse: std::sync::Arc<dyn rustfft::Fft<f64>>,
    scratch: Vec<C64>,
    /// Cached linear operator keyed by (distance, β₂, a).
    cached: Option<((u64, u64, u64), Vec<C64>)>,
    pub steps_taken: usize,
}

impl FiberSolver {
    pub fn new(n: usize, sample_rate: f64) -> Self {
        let omega_sq = spectral::angular_grid(n, sample_rate)
            .into_iter()
            .map(|w| w * w)
            .collect();
        let forward = spectral::forward_plan(n);
        let inverse = spectral::inverse_plan(n);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Self {
            omega_sq,
            forward,
            inverse,
            scratch: vec![C64::new(0.0, 0.0); scratch_len],
            cached: None,
            steps_taken: 0,
        }
    }

    fn linear_operator(&mut self, dist_km: f64, beta2: f64, alpha: f64) -> &[C64] {
        let key = (dist_km.to_bits(), beta2.to_bits(), alpha.to_bits());
        let stale = self.cached.as_ref().map_or(true, |(k, _)| *k != key);
        if stale {
            let n = self.omega_sq.len() as f64;
            let loss = (-alpha * dist_km / 2.0).exp() / n; // folds in the 1/N of the inverse FFT
            let op = self
                .omega_sq
                .iter()
                .map(|w2| C64::from_polar(loss, 0.5 * beta2 * w2 * dist_km))
                .collect();
            self.cached = Some((key, op));
        }
        &self.cached.as_ref().unwrap().1
    }

    fn apply_linear(&mut self, w: &mut DualPolWaveform, dist_km: f64, beta2: f64, alpha: f64) {
        if dist_km == 0.0 {
            return;
        }
        let forward = self.forward.clone();
        let inverse = self.inverse.clone();
        let mut scratch = std::mem::take(&mut self.scratch);
        let op = self.linear_operator(dist_km, beta2, alpha).to_vec();
        let (xs, ys) = w.pols_mut();
        for pol in [xs, ys] {
            forward.process_with_scratch(pol, &mut scratch);
            for (v, h) in pol.iter_mut().zip(&op) {
                *v *= h;
            }
            inverse.process_with_scratch(pol, &mut scratch);
        }
        self.scratch = scratch;
    }

    /// In-place propagation through `span` (no sampling check).
    pub fn propagate(&mut self, w: &mut DualPolWaveform, span: &SpanParams, ssfm: &SsfmSettings) -> Result<()> {
        let length = span.length_km;
        let alpha = span.alpha_per_km();
        let beta2 = span.beta2_per_km();
        let gamma = MANAKOV_FACTOR * span.nonlinear_coeff;

        if gamma == 0.0 {
            // Purely linear span: one exact frequency-domain step.
            self.apply_linear(w, length, beta2, alpha);
            self.steps_taken += 1;
            return finite_or_err(w);
        }
        if !(ssfm.max_step_km > 0.0) || !(ssfm.max_nl_phase_rad > 0.0) {
            return Err(Error::config("link.ssfm", "step limits must be positive"));
        }

        let mut power = w.mean_power()?;
        let mut z = 0.0;
        let mut pending = 0.0;
        while z < length * (1.0 - 1e-12) {
            let remaining = length - z;
            let p_start = power * (-alpha * pending).exp();
            let mut h = ssfm.max_step_km.min(remaining);
            let budget = ssfm.max_nl_phase_rad / (gamma * p_start.max(f64::MIN_POSITIVE));
            let nl_limit = if alpha == 0.0 {
                budget
            } else if alpha * budget < 1.0 {
                -(1.0 - alpha * budget).ln() / alpha
            } else {
                f64::INFINITY
            };
            h = h.min(nl_limit);
            if remaining - h < 1e-9 * length {
                h = remaining;
            }

            self.apply_linear(w, pending + h / 2.0, beta2, alpha);
            // Nonlinear phase over the step uses the exact attenuated path
            // length referred to the midpoint power.
            let h_nl = if alpha == 0.0 {
                h
            } else {
                2.0 * (alpha * h / 2.0).sinh() / alpha
            };
            let k = gamma * h_nl;
            let (xs, ys) = w.pols_mut();
            let mut energy = 0.0;
            for (x, y) in xs.iter_mut().zip(ys.iter_mut()) {
                let p = x.norm_sqr() + y.norm_sqr();
                energy += p;
                let rot = C64::from_polar(1.0, k * p);
                *x *= rot;
                *y *= rot;
            }
            power = energy / xs.len() as f64 * (-alpha * h / 2.0).exp();
            pending = h / 2.0;
            z += h;
            self.steps_taken += 1;
        }
        self.apply_linear(w, pending, beta2, alpha);
        finite_or_err(w)
    }
}

fn finite_or_err(w: &DualPolWaveform) -> Result<()> {
    if w.is_finite() {
        Ok(())
    } else {
        Err(Error::Numerical("split-step solver produced non-finite samples".into()))
    }
}

/// Applies the exact chromatic-dispersion transfer `e^{+j(β₂/2)ω²L}` for an
/// accumulated dispersion of `d_total_ps_nm` in one frequency-domain step.
pub fn apply_dispersion(w: &mut DualPolWaveform, d_total_ps_nm: f64) {
    if d_total_ps_nm == 0.0 {
        return;
    }
    let beta2_l = beta2_from_dispersion(d_total_ps_nm) * 1e3; // s² for "1 km" of D_total
    let omega = spectral::angular_grid(w.len(), w.sample_rate);
    let (xs, ys) = w.pols_mut();
    for pol in [xs, ys] {
        spectral::fft(pol);
        for (v, om) in pol.iter_mut().zip(&omega) {
            *v *= C64::from_polar(1.0, 0.5 * beta2_l * om * om);
        }
        spectral::ifft(pol);
    }
}
