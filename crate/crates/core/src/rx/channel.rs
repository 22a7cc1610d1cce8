//! Training-aided 2×2 channel estimation, zero-forcing equalization and
//! pilot-based common-phase-error correction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::JonesMatrix;
use crate::ofdm::{OfdmSymbolGrid, SubcarrierLayout, PILOT_SYMBOL};
use crate::signal::C64;

/// Condition number above which a subcarrier is not equalized.
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    /// FFT bin of each estimate (the layout's active bins).
    pub bins: Vec<usize>,
    pub h: Vec<JonesMatrix>,
    /// Mean squared residual of the training fit per bin (0 with a single
    /// training pair).
    pub noise: Vec<f64>,
}

impl ChannelEstimate {
    fn index_of(&self, bin: usize) -> Option<usize> {
        self.bins.iter().position(|&b| b == bin)
    }
}

/// Least-squares `Ĥ = (Σ r tᴴ)(Σ t tᴴ)⁻¹` per active bin over one run of
/// training symbols.
fn ls_fit(rx: &[OfdmSymbolGrid], tx: &[OfdmSymbolGrid], k: usize) -> Result<JonesMatrix> {
    let z = C64::new(0.0, 0.0);
    let mut rt = JonesMatrix::new(z, z, z, z);
    let mut tt = JonesMatrix::new(z, z, z, z);
    for (r, t) in rx.iter().zip(tx) {
        let rv = [r.x[k], r.y[k]];
        let tv = [t.x[k], t.y[k]];
        for i in 0..2 {
            for j in 0..2 {
                rt.m[i][j] += rv[i] * tv[j].conj();
                tt.m[i][j] += tv[i] * tv[j].conj();
            }
        }
    }
    if tt.m[0][0].re <= 0.0 || tt.m[1][1].re <= 0.0 {
        return Err(Error::invalid(format!("no training energy on subcarrier bin {k}")));
    }
    Ok(rt * tt.inverse()?)
}

/// Channel estimate pooled over all training symbols.
///
/// Training is fitted in consecutive pairs. Each pair's estimate is rotated
/// onto the first pair's common phase before averaging, so laser phase
/// drift between frames does not shrink the estimate. The remaining
/// per-polarization phase is left to [`cpe_correct`].
pub fn estimate_channel(
    rx: &[OfdmSymbolGrid],
    tx: &[OfdmSymbolGrid],
    layout: &SubcarrierLayout,
) -> Result<ChannelEstimate> {
    if rx.len() != tx.len() || rx.is_empty() {
        return Err(Error::invalid(format!(
            "training mismatch: {} received vs {} known symbols",
            rx.len(),
            tx.len()
        )));
    }
    // Pairs; an odd symbol joins the last pair.
    let n_chunks = (rx.len() / 2).max(1);
    let bounds: Vec<(usize, usize)> = (0..n_chunks)
        .map(|c| (2 * c, if c + 1 == n_chunks { rx.len() } else { 2 * c + 2 }))
        .collect();
    let fits: Vec<Vec<JonesMatrix>> = bounds
        .iter()
        .map(|&(a, b)| layout.active.iter().map(|&k| ls_fit(&rx[a..b], &tx[a..b], k)).collect())
        .collect::<Result<_>>()?;
    let rotations: Vec<C64> = fits
        .iter()
        .map(|f| {
            let c: C64 = fits[0]
                .iter()
                .zip(f)
                .flat_map(|(a, b)| {
                    a.m.iter()
                        .flatten()
                        .zip(b.m.iter().flatten())
                        .map(|(p, q)| p.conj() * q)
                })
                .sum();
            if c.norm() > 0.0 {
                (c / c.norm()).conj()
            } else {
                C64::new(1.0, 0.0)
            }
        })
        .collect();
    let scale = 1.0 / n_chunks as f64;
    let mut h = Vec::with_capacity(layout.active.len());
    let mut noise = Vec::with_capacity(layout.active.len());
    for (i, &k) in layout.active.iter().enumerate() {
        let mut acc = [[C64::new(0.0, 0.0); 2]; 2];
        for (f, rot) in fits.iter().zip(&rotations) {
            for (a, b) in acc.iter_mut().flatten().zip(f[i].m.iter().flatten()) {
                *a += b * rot * scale;
            }
        }
        let hk = JonesMatrix { m: acc };
        let mut resid = 0.0;
        for (&(a, b), rot) in bounds.iter().zip(&rotations) {
            for (r, t) in rx[a..b].iter().zip(&tx[a..b]) {
                let (px, py) = hk.apply(t.x[k], t.y[k]);
                resid += (r.x[k] * rot - px).norm_sqr() + (r.y[k] * rot - py).norm_sqr();
            }
        }
        h.push(hk);
        noise.push(if rx.len() > 2 { resid / rx.len() as f64 } else { 0.0 });
    }
    Ok(ChannelEstimate {
        bins: layout.active.clone(),
        h,
        noise,
    })
}

/// Averages each estimate with its `half_window` neighbours on both sides
/// (in frequency order).
pub fn smooth_estimate(est: &ChannelEstimate, half_window: usize) -> ChannelEstimate {
    if half_window == 0 {
        return est.clone();
    }
    let n = est.h.len();
    let h = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half_window);
            let hi = (i + half_window).min(n - 1);
            let mut acc = [[C64::new(0.0, 0.0); 2]; 2];
            for hk in &est.h[lo..=hi] {
                for (a, b) in acc.iter_mut().flatten().zip(hk.m.iter().flatten()) {
                    *a += b;
                }
            }
            let s = 1.0 / (hi - lo + 1) as f64;
            JonesMatrix {
                m: acc.map(|row| row.map(|v| v * s)),
            }
        })
        .collect();
    ChannelEstimate {
        bins: est.bins.clone(),
        h,
        noise: est.noise.clone(),
    }
}

/// Equalized grid plus the number of subcarriers zeroed as singular.
#[derive(Debug, Clone)]
pub struct Equalized {
    pub grid: OfdmSymbolGrid,
    pub flagged: usize,
}

/// Zero-forcing: applies `Ĥ_k⁻¹` on every estimated bin.
pub fn equalize(grid: &OfdmSymbolGrid, est: &ChannelEstimate) -> Result<Equalized> {
    let mut out = OfdmSymbolGrid::zeros(grid.fft_size());
    let mut flagged = 0;
    for (&k, hk) in est.bins.iter().zip(&est.h) {
        if k >= grid.fft_size() {
            return Err(Error::invalid(format!("estimate bin {k} outside grid")));
        }
        if !(hk.condition_number() <= MAX_CONDITION) {
            flagged += 1;
            continue;
        }
        let inv = hk.inverse()?;
        let (x, y) = inv.apply(grid.x[k], grid.y[k]);
        out.x[k] = x;
        out.y[k] = y;
    }
    Ok(Equalized { grid: out, flagged })
}

/// Equalizer inverse for one bin, if the bin was estimated.
pub fn inverse_at(est: &ChannelEstimate, bin: usize) -> Option<JonesMatrix> {
    est.index_of(bin).and_then(|i| est.h[i].inverse().ok())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommonPhase {
    pub x: f64,
    pub y: f64,
}

/// Estimates the phase of each polarization from the pilots and removes it
/// from every active subcarrier of that polarization.
pub fn cpe_correct(grid: &OfdmSymbolGrid, layout: &SubcarrierLayout) -> Result<(OfdmSymbolGrid, CommonPhase)> {
    let estimate = |pol: &[C64]| -> Result<f64> {
        let acc: C64 = layout.pilots.iter().map(|&k| pol[k] * PILOT_SYMBOL.conj()).sum();
        if acc.norm_sqr() == 0.0 {
            return Err(Error::Numerical("pilot power is zero; common phase undefined".into()));
        }
        Ok(acc.arg())
    };
    let px = estimate(&grid.x)?;
    let py = estimate(&grid.y)?;
    let mut out = grid.clone();
    let (rx, ry) = (C64::from_polar(1.0, -px), C64::from_polar(1.0, -py));
    for &k in &layout.active {
        out.x[k] *= rx;
        out.y[k] *= ry;
    }
    Ok((out, CommonPhase { x: px, y: py }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::pdl_jones;
    use crate::ofdm::{FrameLayout, OfdmConfig};
    use crate::rng::{complex_gaussian, SeededRng, Substream};
    use rand::Rng;

    fn through(h: &JonesMatrix, g: &OfdmSymbolGrid, layout: &SubcarrierLayout) -> OfdmSymbolGrid {
        let mut out = g.clone();
        for &k in &layout.active {
            let (x, y) = h.apply(g.x[k], g.y[k]);
            out.x[k] = x;
            out.y[k] = y;
        }
        out
    }

    fn random_grid(layout: &SubcarrierLayout, seed: u64) -> OfdmSymbolGrid {
        let mut r = SeededRng::new(seed).stream(Substream::Auxiliary, 0);
        let mut g = OfdmSymbolGrid::with_pilots(layout);
        for &k in &layout.data {
            g.x[k] = complex_gaussian(&mut r, 1.0);
            g.y[k] = complex_gaussian(&mut r, 1.0);
        }
        g
    }

    #[test]
    fn identity_channel_estimates_identity() {
        let cfg = OfdmConfig::desk_scale();
        let layout = cfg.layout();
        let frame = FrameLayout::new(&cfg);
        let est = estimate_channel(&frame.training, &frame.training, &layout).unwrap();
        for hk in &est.h {
            assert!((*hk * JonesMatrix::identity().inverse().unwrap()).unitarity_error() < 1e-12);
            assert!((hk.m[0][0] - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn recovers_known_pdl_channel() {
        let cfg = OfdmConfig::desk_scale();
        let layout = cfg.layout();
        let frame = FrameLayout::new(&cfg);
        let h = pdl_jones(std::f64::consts::FRAC_PI_4, 3.0).unwrap();
        let rx: Vec<_> = frame.training.iter().map(|t| through(&h, t, &layout)).collect();
        let est = estimate_channel(&rx, &frame.training, &layout).unwrap();
        for hk in &est.h {
            for (a, b) in hk.m.iter().flatten().zip(h.m.iter().flatten()) {
                assert!((a - b).norm() <= 1e-10);
            }
        }
        let g = random_grid(&layout, 3);
        let eq = equalize(&through(&h, &g, &layout), &est).unwrap();
        assert_eq!(eq.flagged, 0);
        for &k in &layout.active {
            assert!((eq.grid.x[k] - g.x[k]).norm() <= 1e-10);
            assert!((eq.grid.y[k] - g.y[k]).norm() <= 1e-10);
        }
    }

    #[test]
    fn estimation_error_falls_with_averaging() {
        // 20 dB SNR per training sample; error ∝ 1/√(pairs).
        let cfg = OfdmConfig::desk_scale();
        let layout = cfg.layout();
        let sigma2 = 2.0 * 0.01; // training symbols carry |t|² = 2
        let mut r = SeededRng::new(11).stream(Substream::Auxiliary, 1);
        let mut err = |pairs: usize| -> f64 {
            let frame = FrameLayout::with_counts(&cfg, 2 * pairs, 0);
            let mut total = 0.0;
            let reps = 40;
            for _ in 0..reps {
                let rx: Vec<_> = frame
                    .training
                    .iter()
                    .map(|t| {
                        let mut g = t.clone();
                        for &k in &layout.active {
                            g.x[k] += complex_gaussian(&mut r, sigma2);
                            g.y[k] += complex_gaussian(&mut r, sigma2);
                        }
                        g
                    })
                    .collect();
                let est = estimate_channel(&rx, &frame.training, &layout).unwrap();
                total += est
                    .h
                    .iter()
                    .map(|hk| {
                        hk.m.iter()
                            .flatten()
                            .zip(JonesMatrix::identity().m.iter().flatten())
                            .map(|(a, b)| (a - b).norm_sqr())
                            .sum::<f64>()
                            .sqrt()
                    })
                    .sum::<f64>()
                    / est.h.len() as f64;
            }
            total / reps as f64
        };
        let e1 = err(1);
        let e4 = err(4);
        let ratio = e1 / e4;
        assert!((ratio - 2.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn unitary_channel_preserves_noise_variance() {
        let cfg = OfdmConfig::desk_scale();
        let layout = cfg.layout();
        let u = crate::link::random_sop_controller(&mut SeededRng::new(1).stream(Substream::Sop, 0));
        let est = ChannelEstimate {
            bins: layout.active.clone(),
            h: vec![u; layout.active.len()],
            noise: vec![0.0; layout.active.len()],
        };
        let mut r = SeededRng::new(2).stream(Substream::Ase, 0);
        let (mut px, mut py, mut count) = (0.0, 0.0, 0.0);
        for _ in 0..200 {
            let mut g = OfdmSymbolGrid::zeros(cfg.fft_size);
            for &k in &layout.active {
                g.x[k] = complex_gaussian(&mut r, 1.0);
                g.y[k] = complex_gaussian(&mut r, 1.0);
            }
            let eq = equalize(&g, &est).unwrap();
            for &k in &layout.active {
                px += eq.grid.x[k].norm_sqr();
                py += eq.grid.y[k].norm_sqr();
                count += 1.0;
            }
        }
        assert!((px / count - 1.0).abs() < 0.03);
        assert!((py / count - 1.0).abs() < 0.03);
    }

    #[test]
    fn pdl_channel_enhances_weak_branch_noise() {
        let cfg = OfdmConfig::desk_scale();
        let layout = cfg.layout();
        let h = JonesMatrix::diag(C64::new(1.0, 0.0), C64::new(0.5, 0.0));
        let est = ChannelEstimate {
            bins: layout.active.clone(),
            h: vec![h; layout.active.len()],
            noise: vec![0.0; layout.active.len()],
        };
        let mut r = SeededRng::new(3).stream(Substream::Ase, 0);
        let (mut px, mut py) = (0.0, 0.0);
        for _ in 0..200 {
            let mut g = OfdmSymbolGrid::zeros(cfg.fft_size);
            for &k in &layout.active {
                g.x[k] = complex_gaussian(&mut r, 1.0);
                g.y[k] = complex_gaussian(&mut r, 1.0);
            }
            let eq = equalize(&g, &est).unwrap();
            for &k in &layout.active {
                px += eq.grid.x[k].norm_sqr();
                py += eq.grid.y[k].norm_sqr();
            }
        }
        assert!((py / px - 4.0).abs() < 0.15, "{}", py / px);
    }

    #[test]
    fn singular_bins_are_flagged() {
        let cfg = OfdmConfig::desk_scale();
        let layout = cfg.layout();
        let z = C64::new(0.0, 0.0);
        let mut est = ChannelEstimate {
            bins: layout.active.clone(),
            h: vec![JonesMatrix::identity(); layout.active.len()],
            noise: vec![0.0; layout.active.len()],
        };
        est.h[3] = JonesMatrix::diag(C64::new(1.0, 0.0), z);
        let g = random_grid(&layout, 4);
        let eq = equalize(&g, &est).unwrap();
        assert_eq!(eq.flagged, 1);
        assert_eq!(eq.grid.x[layout.active[3]], z);
    }

    #[test]
    fn cpe_removes_common_rotation() {
        let cfg = OfdmConfig::desk_scale();
        let layout = cfg.layout();
        let g = random_grid(&layout, 5);
        let (same, ph) = cpe_correct(&g, &layout).unwrap();
        assert!(ph.x.abs() < 1e-15 && ph.y.abs() < 1e-15);
        assert_eq!(same, g);
        let mut rot = g.clone();
        for v in rot.x.iter_mut().chain(rot.y.iter_mut()) {
            *v *= C64::from_polar(1.0, 0.3);
        }
        let (back, _) = cpe_correct(&rot, &layout).unwrap();
        for &k in &layout.active {
            assert!((back.x[k] - g.x[k]).norm() <= 1e-12);
            assert!((back.y[k] - g.y[k]).norm() <= 1e-12);
        }
        assert!(cpe_correct(&OfdmSymbolGrid::zeros(cfg.fft_size), &layout).is_err());
    }

    #[test]
    fn cpe_estimator_variance() {
        // Per-dimension SNR s = |p|²/σ²_dim; four pilots → var ≈ 1/(4s).
        let cfg = OfdmConfig::desk_scale();
        let layout = cfg.layout();
        let s_lin: f64 = 100.0;
        let sigma_dim = (1.0 / s_lin).sqrt();
        let mut r = SeededRng::new(6).stream(Substream::Auxiliary, 2);
        let trials = 20_000;
        let mut acc = 0.0;
        for _ in 0..trials {
            let mut g = OfdmSymbolGrid::with_pilots(&layout);
            for &k in &layout.pilots {
                let n = C64::new(
                    sigma_dim * r.sample::<f64, _>(rand_distr::StandardNormal),
                    sigma_dim * r.sample::<f64, _>(rand_distr::StandardNormal),
                );
                g.x[k] += n;
            }
            let (_, ph) = cpe_correct(&g, &layout).unwrap();
            acc += ph.x * ph.x;
        }
        let var = acc / trials as f64;
        let expect = 1.0 / (4.0 * s_lin);
        assert!(((var - expect) / expect).abs() < 0.05, "{var} vs {expect}");
    }
}
