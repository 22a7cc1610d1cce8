//! BER counting, Q-factor conversion, outage probability and Q histograms.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Result of [`count_ber`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerCount {
    pub errors: u64,
    pub bits: u64,
    /// Raw error ratio, clamped to 0.5 when the stream looks inverted.
    pub ber: f64,
    /// More than half the bits differ: the stream is (mostly) complemented.
    pub inverted: bool,
}

pub fn count_ber(tx: &[u8], rx: &[u8]) -> Result<BerCount> {
    if tx.len() != rx.len() {
        return Err(Error::invalid(format!(
            "bit streams differ in length: {} vs {}",
            tx.len(),
            rx.len()
        )));
    }
    let errors = tx.iter().zip(rx).filter(|(a, b)| (*a & 1) != (*b & 1)).count() as u64;
    let bits = tx.len() as u64;
    let raw = if bits == 0 { 0.0 } else { errors as f64 / bits as f64 };
    let inverted = raw > 0.5;
    Ok(BerCount {
        errors,
        bits,
        ber: raw.min(0.5),
        inverted,
    })
}

/// Inverse complementary error function on (0, 2).
pub fn erfc_inv(y: f64) -> Result<f64> {
    if !(y > 0.0 && y < 2.0) {
        return Err(Error::invalid(format!("erfc⁻¹ argument {y} outside (0, 2)")));
    }
    if y == 1.0 {
        return Ok(0.0);
    }
    // Work on the upper half and mirror: erfc⁻¹(2−y) = −erfc⁻¹(y).
    let (t, sign) = if y > 1.0 { (2.0 - y, -1.0) } else { (y, 1.0) };
    // Starting point from the asymptotic tail, refined by Halley steps on
    // f(x) = erfc(x) − t, f' = −2/√π·e^{−x²}, f''/f' = −2x.
    let mut x = if t < 0.5 {
        let l = -(t * (std::f64::consts::PI).sqrt()).ln();
        (l - 0.5 * l.ln()).max(0.0).sqrt()
    } else {
        (1.0 - t) * 0.886_226_925_452_758
    };
    for _ in 0..100 {
        let f = libm::erfc(x) - t;
        let fp = -2.0 / std::f64::consts::PI.sqrt() * (-x * x).exp();
        let step = f / fp;
        let dx = step / (1.0 + x * step);
        x -= dx;
        if dx.abs() <= 1e-15 * x.abs().max(1e-300) {
            break;
        }
    }
    Ok(sign * x)
}

/// `Q_dB = 20·log10(√2·erfc⁻¹(2·BER))` for `0 < BER < 0.5`.
pub fn q_from_ber(ber: f64) -> Result<f64> {
    if !(ber > 0.0 && ber < 0.5) {
        return Err(Error::invalid(format!("BER {ber} outside (0, 0.5)")));
    }
    let q = std::f64::consts::SQRT_2 * erfc_inv(2.0 * ber)?;
    Ok(20.0 * q.log10())
}

/// `BER = erfc(Q/√2)/2` with `Q = 10^(Q_dB/20)`.
pub fn ber_from_q(q_db: f64) -> f64 {
    let q = 10f64.powf(q_db / 20.0);
    0.5 * libm::erfc(q / std::f64::consts::SQRT_2)
}

/// Q estimate for a counted BER.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QEstimate {
    pub q_db: f64,
    /// No errors were seen: `q_db` is a lower bound from `BER = 1/bits`.
    pub censored: bool,
}

pub fn q_from_count(count: &BerCount) -> Result<QEstimate> {
    if count.bits == 0 {
        return Err(Error::invalid("cannot derive Q from zero bits"));
    }
    if count.errors == 0 {
        return Ok(QEstimate {
            q_db: q_from_ber(1.0 / count.bits as f64)?,
            censored: true,
        });
    }
    Ok(QEstimate {
        q_db: q_from_ber(count.ber)?,
        censored: false,
    })
}

/// `ΔQ = Q_opt − Q`.
pub fn q_penalty(q_opt_db: f64, q_db: f64) -> f64 {
    q_opt_db - q_db
}

/// One Monte Carlo observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QSample {
    pub seed: u64,
    pub config_hash: String,
    pub ber: f64,
    pub bit_count: u64,
    pub q_db: f64,
    pub cumulated_pdl_db: f64,
}

/// Fraction and Wilson 95 % interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outage {
    pub probability: f64,
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub total: usize,
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// `Pr[Q < q_t]` over the samples.
pub fn outage_probability(samples: &[QSample], q_threshold_db: f64) -> Result<Outage> {
    if samples.is_empty() {
        return Err(Error::invalid("outage probability needs at least one sample"));
    }
    let count = samples.iter().filter(|s| s.q_db < q_threshold_db).count();
    let (lower, upper) = wilson_interval(count, samples.len(), 1.959_963_984_540_054);
    Ok(Outage {
        probability: count as f64 / samples.len() as f64,
        lower,
        upper,
        count,
        total: samples.len(),
    })
}

/// Normalized histogram: `densities[i]` covers `[edges[i], edges[i+1])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QPdf {
    pub edges: Vec<f64>,
    pub densities: Vec<f64>,
}

impl QPdf {
    pub fn integral(&self) -> f64 {
        self.densities
            .iter()
            .zip(self.edges.windows(2))
            .map(|(d, e)| d * (e[1] - e[0]))
            .sum()
    }
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Histogram with Freedman–Diaconis bin width `2·IQR/n^(1/3)`.
pub fn estimate_q_pdf(values: &[f64]) -> Result<QPdf> {
    if values.len() < 10 {
        return Err(Error::invalid(format!(
            "Q PDF needs at least 10 samples, got {}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("Q PDF samples must be finite"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let mut width = 2.0 * iqr / n.cbrt();
    if max == min {
        width = if min == 0.0 { 1.0 } else { min.abs() * 1e-6 };
        let edges = vec![min - width / 2.0, min + width / 2.0];
        let densities = vec![1.0 / (edges[1] - edges[0])];
        return Ok(QPdf { edges, densities });
    }
    if !(width > 0.0) {
        // Degenerate IQR with spread-out tails: fall back to Sturges' count.
        width = (max - min) / (n.log2().ceil() + 1.0);
    }
    let bins = (((max - min) / width).ceil() as usize).max(1);
    let edges: Vec<f64> = (0..=bins).map(|i| min + i as f64 * width).collect();
    let mut counts = vec![0usize; bins];
    for v in &sorted {
        let i = (((v - min) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let densities = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, e)| c as f64 / (n * (e[1] - e[0])))
        .collect();
    Ok(QPdf { edges, densities })
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n − 1 denominator).
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

pub fn rms(values: &[f64]) -> f64 {
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}

/// Formats a float with 9 significant digits.
pub fn fmt_sig9(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..=15).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        // Rounding can carry into an extra digit (9.99999999 → 10.0000000).
        if s.trim_start_matches('-').replace('.', "").trim_start_matches('0').len() > 9 && decimals > 0 {
            let d = decimals - 1;
            return format!("{v:.d$}");
        }
        s
    } else {
        format!("{v:.8e}")
    }
}

pub const QSAMPLE_CSV_HEADER: [&str; 6] = ["seed", "config_hash", "ber", "bit_count", "q_db", "cumulated_pdl_db"];

/// Writes samples as CSV with a fixed column order.
pub fn write_qsamples_csv<W: Write>(samples: &[QSample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(QSAMPLE_CSV_HEADER)?;
    for s in samples {
        w.write_record([
            s.seed.to_string(),
            s.config_hash.clone(),
            fmt_sig9(s.ber),
            s.bit_count.to_string(),
            fmt_sig9(s.q_db),
            fmt_sig9(s.cumulated_pdl_db),
        ])?;
    }
    w.flush()?;
    Ok(())
}
