//! Waveplate model of polarization-mode dispersion.

use rand::Rng;

use crate::error::{Error, Result};
use crate::signal::{DualPolWaveform, C64};
use crate::spectral;

use super::jones::{random_sop_controller, JonesMatrix};

/// DGD of one waveplate section such that `n_sections` random sections have
/// the requested mean total DGD.
pub fn section_dgd_ps(link_mean_dgd_ps: f64, n_sections: usize) -> f64 {
    if n_sections == 0 {
        return 0.0;
    }
    link_mean_dgd_ps * (3.0 * std::f64::consts::PI / 8.0).sqrt() / (n_sections as f64).sqrt()
}

/// Frequency response of one section at angular frequency `omega`.
pub fn section_response(rotation: &JonesMatrix, dgd_ps: f64, omega: f64) -> JonesMatrix {
    let half = 0.5 * dgd_ps * 1e-12 * omega;
    JonesMatrix::diag(C64::from_polar(1.0, half), C64::from_polar(1.0, -half)) * *rotation
}

/// Applies a random rotation followed by a ±dgd/2 delay between the x and y
/// axes. Returns the rotation that was drawn.
pub fn apply_pmd_section<R: Rng + ?Sized>(w: &mut DualPolWaveform, dgd_ps: f64, rng: &mut R) -> Result<JonesMatrix> {
    if !(dgd_ps >= 0.0) || !dgd_ps.is_finite() {
        return Err(Error::invalid(format!("DGD must be non-negative, got {dgd_ps} ps")));
    }
    let rot = random_sop_controller(rng);
    rot.apply_to(w);
    if dgd_ps > 0.0 {
        let omega = spectral::angular_grid(w.len(), w.sample_rate);
        let (xs, ys) = w.pols_mut();
        spectral::fft(xs);
        spectral::fft(ys);
        for ((x, y), om) in xs.iter_mut().zip(ys.iter_mut()).zip(&omega) {
            let half = 0.5 * dgd_ps * 1e-12 * om;
            *x *= C64::from_polar(1.0, half);
            *y *= C64::from_polar(1.0, -half);
        }
        spectral::ifft(xs);
        spectral::ifft(ys);
    }
    Ok(rot)
}

/// DGD (ps) of a frequency-dependent Jones response, from the eigenphases
/// of `T(ω+dω)·T(ω)†`.
pub fn dgd_of_response(t0: &JonesMatrix, t1: &JonesMatrix, d_omega: f64) -> f64 {
    let m = *t1 * t0.adjoint();
    let tr = m.m[0][0] + m.m[1][1];
    let det = m.det();
    let disc = (tr * tr - det * 4.0).sqrt();
    let l1 = (tr + disc) / 2.0;
    let l2 = (tr - disc) / 2.0;
    let dphi = (l1 * l2.conj()).arg().abs();
    dphi / d_omega * 1e12
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::jones::cumulated_pdl_db;
    use crate::rng::{SeededRng, Substream};

    #[test]
    fn zero_dgd_is_unitary_rotation() {
        let mut r = SeededRng::new(1).stream(Substream::Pmd, 0);
        let x: Vec<C64> = (0..64).map(|i| C64::new((i as f64 * 0.1).sin(), 0.0)).collect();
        let mut w = DualPolWaveform::new(x.clone(), x, 64e9, 193.41e12).unwrap();
        let e0 = w.energy();
        let rot = apply_pmd_section(&mut w, 0.0, &mut r).unwrap();
        assert!(cumulated_pdl_db(&rot).unwrap().abs() < 1e-9);
        assert!(((w.energy() - e0) / e0).abs() < 1e-12);
    }

    #[test]
    fn section_delay_splits_symmetrically() {
        // Pure delay element (identity rotation): x advances, y lags by dgd/2.
        let fs = 64e9;
        let dgd = 10.0;
        for (om, expect_x) in [(2e10, 0.5 * dgd * 1e-12 * 2e10), (-5e10, -0.5 * dgd * 1e-12 * 5e10)] {
            let t = section_response(&JonesMatrix::identity(), dgd, om);
            assert!((t.m[0][0].arg() - expect_x).abs() < 1e-12);
            assert!((t.m[1][1].arg() + expect_x).abs() < 1e-12);
        }
        let d = dgd_of_response(
            &section_response(&JonesMatrix::identity(), dgd, 0.0),
            &section_response(&JonesMatrix::identity(), dgd, 1e9),
            1e9,
        );
        assert!((d - dgd).abs() < 1e-9);
        let _ = fs;
    }

    #[test]
    fn concatenated_sections_have_target_mean_dgd() {
        let n_sections = 40;
        let target = 20.0;
        let tau = section_dgd_ps(target, n_sections);
        let mut r = SeededRng::new(77).stream(Substream::Pmd, 0);
        let d_omega = 1e6;
        let draws = 500;
        let mut total = 0.0;
        for _ in 0..draws {
            let mut t0 = JonesMatrix::identity();
            let mut t1 = JonesMatrix::identity();
            for _ in 0..n_sections {
                let rot = random_sop_controller(&mut r);
                t0 = section_response(&rot, tau, 0.0) * t0;
                t1 = section_response(&rot, tau, d_omega) * t1;
            }
            total += dgd_of_response(&t0, &t1, d_omega);
        }
        let mean = total / draws as f64;
        assert!((mean - target).abs() <= 0.1 * target, "mean DGD {mean}");
    }
}
