//! Linearly coded phase-conjugated twin signals.
//!
//! Two consecutive QPSK payload symbols `A1`, `A2` are combined into one
//! coded symbol `S = (A1 + A2/2)/√1.25` per data subcarrier. The twin `S*`
//! travels either on the orthogonal polarization of the same OFDM symbol
//! (LPC) or on the same polarization of the next OFDM symbol (LTC). The
//! receiver averages each symbol with the conjugate of its twin, which
//! cancels anti-correlated first-order nonlinear distortion and halves
//! uncorrelated noise, then decodes the 16-point constellation by ML
//! detection and a look-up table.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::fmt_sig9;
use crate::ofdm::{qpsk_point, OfdmConfig, OfdmSymbolGrid, SubcarrierLayout};
use crate::signal::C64;

/// Weight of the second payload symbol in the linear code.
pub const SECOND_SYMBOL_WEIGHT: f64 = 0.5;

fn code_normalization() -> f64 {
    (1.0 + SECOND_SYMBOL_WEIGHT * SECOND_SYMBOL_WEIGHT).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CodecMode {
    /// Twin on the orthogonal polarization.
    #[serde(rename = "LPC_PCTS")]
    LpcPcts,
    /// Twin on the adjacent time slot of the same polarization.
    #[serde(rename = "LTC_PCTS")]
    LtcPcts,
    /// Plain PDM-QPSK reference at the same net rate.
    #[serde(rename = "UNCODED_PDM")]
    UncodedPdm,
}

impl CodecMode {
    pub const ALL: [CodecMode; 3] = [CodecMode::LpcPcts, CodecMode::LtcPcts, CodecMode::UncodedPdm];

    /// Payload bits per data subcarrier per dual-polarization OFDM symbol.
    pub fn bits_per_subcarrier(self) -> usize {
        4
    }

    /// QPSK payload symbols consumed per group of OFDM symbols, and the
    /// group size.
    pub fn payload_symbols_per_group(self, data_subcarriers: usize) -> (usize, usize) {
        match self {
            CodecMode::LpcPcts => (2 * data_subcarriers, 1),
            CodecMode::LtcPcts => (4 * data_subcarriers, 2),
            CodecMode::UncodedPdm => (2 * data_subcarriers, 1),
        }
    }
}

impl fmt::Display for CodecMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CodecMode::LpcPcts => "LPC_PCTS",
            CodecMode::LtcPcts => "LTC_PCTS",
            CodecMode::UncodedPdm => "UNCODED_PDM",
        })
    }
}

/// The 16 coded points and their look-up table.
///
/// Point `i` is generated by `A1 = qpsk(i / 4)` and `A2 = qpsk(i % 4)`, where
/// the QPSK index is the two-bit value `b0 b1`. Lower indices win ML ties.
#[derive(Debug, Clone, PartialEq)]
pub struct CodedConstellation {
    pub points: [C64; 16],
}

impl Default for CodedConstellation {
    fn default() -> Self {
        Self::new()
    }
}

impl CodedConstellation {
    pub fn new() -> Self {
        let mut points = [C64::new(0.0, 0.0); 16];
        for (i, p) in points.iter_mut().enumerate() {
            let (a1, a2) = Self::generators(i);
            *p = encode_pair(a1, a2);
        }
        Self { points }
    }

    /// Bits `(A1 b0, A1 b1, A2 b0, A2 b1)` of point `index`.
    pub fn bits(index: usize) -> [u8; 4] {
        let a1 = index / 4;
        let a2 = index % 4;
        [(a1 >> 1) as u8 & 1, a1 as u8 & 1, (a2 >> 1) as u8 & 1, a2 as u8 & 1]
    }

    /// QPSK symbols `(A1, A2)` that generate point `index`.
    pub fn generators(index: usize) -> (C64, C64) {
        let b = Self::bits(index);
        (qpsk_point(b[0], b[1]), qpsk_point(b[2], b[3]))
    }

    pub fn index_of_bits(bits: &[u8]) -> usize {
        (usize::from(bits[0]) << 3) | (usize::from(bits[1]) << 2) | (usize::from(bits[2]) << 1) | usize::from(bits[3])
    }

    /// Nearest point by Euclidean distance; ties resolve to the lower index.
    pub fn nearest(&self, r: C64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (r - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    pub fn average_power(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / 16.0
    }

    pub fn min_distance(&self) -> f64 {
        let mut d = f64::INFINITY;
        for i in 0..16 {
            for j in i + 1..16 {
                d = d.min((self.points[i] - self.points[j]).norm());
            }
        }
        d
    }

    /// CSV dump: `index,real,imag,bits`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "index,real,imag,bits")?;
        for (i, p) in self.points.iter().enumerate() {
            let b = Self::bits(i);
            writeln!(
                out,
                "{},{},{},{}{}{}{}",
                i,
                fmt_sig9(p.re),
                fmt_sig9(p.im),
                b[0],
                b[1],
                b[2],
                b[3]
            )?;
        }
        Ok(())
    }
}

/// `(A1 + A2/2)/√1.25`.
pub fn encode_pair(a1: C64, a2: C64) -> C64 {
    (a1 + a2 * SECOND_SYMBOL_WEIGHT) / code_normalization()
}

fn code_symbols(payload: &[C64]) -> Vec<C64> {
    payload.chunks_exact(2).map(|p| encode_pair(p[0], p[1])).collect()
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::invalid(format!(
            "{what}: expected {want} payload symbols, got {got}"
        )));
    }
    Ok(())
}

/// LPC-PCTS: coded symbols on x, their conjugates on y.
pub fn lpc_encode(payload: &[C64], cfg: &OfdmConfig) -> Result<OfdmSymbolGrid> {
    let layout = cfg.layout();
    lpc_encode_with(payload, &layout)
}

pub(crate) fn lpc_encode_with(payload: &[C64], layout: &SubcarrierLayout) -> Result<OfdmSymbolGrid> {
    check_len("lpc_encode", payload.len(), 2 * layout.data.len())?;
    let coded = code_symbols(payload);
    let mut g = OfdmSymbolGrid::with_pilots(layout);
    for (&k, s) in layout.data.iter().zip(&coded) {
        g.x[k] = *s;
        g.y[k] = s.conj();
    }
    Ok(g)
}

/// LTC-PCTS: independent coded payloads on x and y at slot `t`, and the
/// elementwise conjugates on the same polarizations at slot `t + T`.
pub fn ltc_encode(payload_x: &[C64], payload_y: &[C64], cfg: &OfdmConfig) -> Result<(OfdmSymbolGrid, OfdmSymbolGrid)> {
    let layout = cfg.layout();
    ltc_encode_with(payload_x, payload_y, &layout)
}

pub(crate) fn ltc_encode_with(
    payload_x: &[C64],
    payload_y: &[C64],
    layout: &SubcarrierLayout,
) -> Result<(OfdmSymbolGrid, OfdmSymbolGrid)> {
    check_len("ltc_encode x", payload_x.len(), 2 * layout.data.len())?;
    check_len("ltc_encode y", payload_y.len(), 2 * layout.data.len())?;
    let cx = code_symbols(payload_x);
    let cy = code_symbols(payload_y);
    let mut first = OfdmSymbolGrid::with_pilots(layout);
    let mut second = OfdmSymbolGrid::with_pilots(layout);
    for (i, &k) in layout.data.iter().enumerate() {
        first.x[k] = cx[i];
        first.y[k] = cy[i];
        second.x[k] = cx[i].conj();
        second.y[k] = cy[i].conj();
    }
    Ok((first, second))
}

/// PDM-QPSK reference grid: one payload symbol per polarization per data
/// subcarrier.
pub fn uncoded_pdm_reference(payload_x: &[C64], payload_y: &[C64], cfg: &OfdmConfig) -> Result<OfdmSymbolGrid> {
    let layout = cfg.layout();
    uncoded_with(payload_x, payload_y, &layout)
}

pub(crate) fn uncoded_with(payload_x: &[C64], payload_y: &[C64], layout: &SubcarrierLayout) -> Result<OfdmSymbolGrid> {
    check_len("uncoded x", payload_x.len(), layout.data.len())?;
    check_len("uncoded y", payload_y.len(), layout.data.len())?;
    let mut g = OfdmSymbolGrid::with_pilots(layout);
    for (i, &k) in layout.data.iter().enumerate() {
        g.x[k] = payload_x[i];
        g.y[k] = payload_y[i];
    }
    Ok(g)
}

/// `R = (main + conj(twin)) / 2`, elementwise.
pub fn coherent_superpose(main: &[C64], twin: &[C64]) -> Result<Vec<C64>> {
    if main.len() != twin.len() {
        return Err(Error::invalid(format!(
            "superposition size mismatch: {} vs {}",
            main.len(),
            twin.len()
        )));
    }
    Ok(main.iter().zip(twin).map(|(b, t)| (b + t.conj()) * 0.5).collect())
}

/// Recovered symbols on the data bins of one group of received grids.
///
/// LPC: one grid, twin on y. LTC: two grids, twins in the second grid; the
/// result concatenates the x stream then the y stream.
pub fn superpose_group(group: &[OfdmSymbolGrid], mode: CodecMode, layout: &SubcarrierLayout) -> Result<Vec<C64>> {
    match mode {
        CodecMode::LpcPcts => {
            let [g] = group else {
                return Err(Error::invalid("LPC superposition takes exactly one grid"));
            };
            coherent_superpose(&g.data_x(layout), &g.data_y(layout))
        }
        CodecMode::LtcPcts => {
            let [t0, t1] = group else {
                return Err(Error::invalid("LTC superposition takes exactly two grids"));
            };
            let mut r = coherent_superpose(&t0.data_x(layout), &t1.data_x(layout))?;
            r.extend(coherent_superpose(&t0.data_y(layout), &t1.data_y(layout))?);
            Ok(r)
        }
        CodecMode::UncodedPdm => Err(Error::invalid("uncoded PDM has no twin to superpose")),
    }
}

/// Decoded output of [`ml_decode`].
#[derive(Debug, Clone, PartialEq)]
pub struct MlDecision {
    /// Four payload bits per recovered symbol: A1 pair then A2 pair.
    pub bits: Vec<u8>,
    /// Decoded `(A1, A2)` QPSK symbols.
    pub pairs: Vec<(C64, C64)>,
}

/// Symbol-by-symbol ML detection over the 16 coded points, then LUT decoding.
pub fn ml_decode(recovered: &[C64], constellation: &CodedConstellation) -> MlDecision {
    let mut bits = Vec::with_capacity(4 * recovered.len());
    let mut pairs = Vec::with_capacity(recovered.len());
    for &r in recovered {
        let i = constellation.nearest(r);
        bits.extend_from_slice(&CodedConstellation::bits(i));
        pairs.push(CodedConstellation::generators(i));
    }
    MlDecision { bits, pairs }
}
