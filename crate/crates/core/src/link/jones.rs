//! 2×2 Jones calculus for lumped polarization elements.

use std::ops::Mul;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{DualPolWaveform, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JonesMatrix {
    pub m: [[C64; 2]; 2],
}

impl JonesMatrix {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Self { m: [[a, b], [c, d]] }
    }

    pub fn identity() -> Self {
        Self::diag(C64::new(1.0, 0.0), C64::new(1.0, 0.0))
    }

    pub fn diag(a: C64, d: C64) -> Self {
        let z = C64::new(0.0, 0.0);
        Self::new(a, z, z, d)
    }

    /// Real rotation `[[cos θ, −sin θ], [sin θ, cos θ]]`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn det(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        let scale = self.frobenius_sq();
        if det.norm() <= 1e-300 || det.norm() <= 1e-15 * scale {
            return Err(Error::Numerical("Jones matrix is singular".into()));
        }
        let m = &self.m;
        Ok(Self::new(m[1][1] / det, -m[0][1] / det, -m[1][0] / det, m[0][0] / det))
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.m.iter().flatten().map(|v| v.norm_sqr()).sum()
    }

    /// `(σ_max, σ_min)`.
    pub fn singular_values(&self) -> (f64, f64) {
        // Eigenvalues of J†J, written so a near-unitary J does not cancel.
        let m = &self.m;
        let a = m[0][0].norm_sqr() + m[1][0].norm_sqr();
        let c = m[0][1].norm_sqr() + m[1][1].norm_sqr();
        let b = m[0][0].conj() * m[0][1] + m[1][0].conj() * m[1][1];
        let disc = ((a - c) * (a - c) + 4.0 * b.norm_sqr()).sqrt();
        let d = self.det().norm();
        let s_max = ((a + c + disc) / 2.0).sqrt();
        let s_min = if s_max > 0.0 { d / s_max } else { 0.0 };
        (s_max, s_min)
    }

    pub fn condition_number(&self) -> f64 {
        let (a, b) = self.singular_values();
        if b == 0.0 {
            f64::INFINITY
        } else {
            a / b
        }
    }

    /// Largest entry of |J†J − I|.
    pub fn unitarity_error(&self) -> f64 {
        let p = self.adjoint() * *self;
        let id = Self::identity();
        p.m.iter()
            .flatten()
            .zip(id.m.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    #[inline]
    pub fn apply(&self, x: C64, y: C64) -> (C64, C64) {
        (self.m[0][0] * x + self.m[0][1] * y, self.m[1][0] * x + self.m[1][1] * y)
    }

    pub fn apply_to(&self, w: &mut DualPolWaveform) {
        let (xs, ys) = w.pols_mut();
        for (x, y) in xs.iter_mut().zip(ys.iter_mut()) {
            let (a, b) = self.apply(*x, *y);
            *x = a;
            *y = b;
        }
    }

    /// Entries as `[[re, im]; 4]` in row-major order, for telemetry.
    pub fn to_parts(&self) -> [[f64; 2]; 4] {
        let m = &self.m;
        [
            [m[0][0].re, m[0][0].im],
            [m[0][1].re, m[0][1].im],
            [m[1][0].re, m[1][0].im],
            [m[1][1].re, m[1][1].im],
        ]
    }
}

impl Mul for JonesMatrix {
    type Output = JonesMatrix;

    fn mul(self, rhs: JonesMatrix) -> JonesMatrix {
        let a = &self.m;
        let b = &rhs.m;
        JonesMatrix::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

/// Field transmission of the lossy axis for a PDL of `rho_db`.
pub fn pdl_alpha(rho_db: f64) -> f64 {
    10f64.powf(-rho_db / 20.0)
}

/// PDL element rotated by `theta` relative to the signal SOP:
/// `R(θ)·diag(1, α)·R(−θ)` with `α = 10^(−ρ/20)`.
pub fn pdl_jones(theta: f64, rho_db: f64) -> Result<JonesMatrix> {
    if !(rho_db >= 0.0) || !rho_db.is_finite() {
        return Err(Error::invalid(format!(
            "PDL must be a finite non-negative dB value, got {rho_db}"
        )));
    }
    let alpha = pdl_alpha(rho_db);
    Ok(JonesMatrix::rotation(theta)
        * JonesMatrix::diag(C64::new(1.0, 0.0), C64::new(alpha, 0.0))
        * JonesMatrix::rotation(-theta))
}

/// `20·log10(σ_max/σ_min)` of a composed element.
pub fn cumulated_pdl_db(j: &JonesMatrix) -> Result<f64> {
    let (s_max, s_min) = j.singular_values();
    if !(s_min > 0.0) || s_min <= 1e-15 * s_max {
        return Err(Error::Numerical("cumulated PDL undefined for a singular matrix".into()));
    }
    Ok(20.0 * (s_max / s_min).log10())
}

/// Haar-distributed element of SU(2) in Euler form
/// `[[e^{jφ₁}cos η, e^{jφ₂}sin η], [−e^{−jφ₂}sin η, e^{−jφ₁}cos η]]`,
/// with `cos²η ~ U[0,1]` and `φ₁, φ₂ ~ U[0, 2π)`.
pub fn random_sop_controller<R: Rng + ?Sized>(rng: &mut R) -> JonesMatrix {
    let two_pi = 2.0 * std::f64::consts::PI;
    let u: f64 = rng.random();
    let phi1 = two_pi * rng.random::<f64>();
    let phi2 = two_pi * rng.random::<f64>();
    let c = u.sqrt();
    let s = (1.0 - u).sqrt();
    JonesMatrix::new(
        C64::from_polar(c, phi1),
        C64::from_polar(s, phi2),
        -C64::from_polar(s, -phi2),
        C64::from_polar(c, -phi1),
    )
}
