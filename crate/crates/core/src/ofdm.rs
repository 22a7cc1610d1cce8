//! QPSK mapping and the OFDM modem.
//!
//! Subcarriers are addressed by FFT bin. The active band (data + pilots) is
//! centered on DC; guard bins sit symmetrically at the band edges.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{SeededRng, Substream};
use crate::signal::{DualPolWaveform, C64, DEFAULT_CARRIER_HZ};
use crate::spectral;

/// Known value carried by every pilot subcarrier on both polarizations.
pub const PILOT_SYMBOL: C64 = C64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);

/// Seed of the fixed training pattern shared by transmitter and receiver.
const TRAINING_PATTERN_SEED: u64 = 0x7e57_5eed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubcarrierRole {
    Data,
    Pilot,
    Guard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfdmConfig {
    pub fft_size: usize,
    pub data_subcarriers: usize,
    pub pilot_count: usize,
    /// Cyclic prefix length as a fraction of `fft_size`.
    pub cp_fraction: f64,
    /// OFDM sample (chip) rate, Hz.
    pub baud_rate: f64,
    /// Training symbols at the head of each frame.
    pub training_per_frame: usize,
    /// Payload symbols following the training block of each frame.
    pub payload_per_frame: usize,
}

impl OfdmConfig {
    /// 4096-point IFFT, 3300 data subcarriers, 4 pilots, 3 % CP, 32 Gbaud.
    pub fn full_scale() -> Self {
        Self {
            fft_size: 4096,
            data_subcarriers: 3300,
            pilot_count: 4,
            cp_fraction: 0.03,
            baud_rate: 32e9,
            training_per_frame: 2,
            payload_per_frame: 50,
        }
    }

    /// 256-point IFFT with 200 data subcarriers; same CP fraction and rate.
    pub fn desk_scale() -> Self {
        Self {
            fft_size: 256,
            data_subcarriers: 200,
            ..Self::full_scale()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fft_size < 8 {
            return Err(Error::config("ofdm.fft_size", "must be at least 8"));
        }
        if self.data_subcarriers + self.pilot_count > self.fft_size {
            return Err(Error::config(
                "ofdm.data_subcarriers",
                format!(
                    "{} data + {} pilots exceed fft_size {}",
                    self.data_subcarriers, self.pilot_count, self.fft_size
                ),
            ));
        }
        if self.data_subcarriers == 0 {
            return Err(Error::config("ofdm.data_subcarriers", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.cp_fraction) {
            return Err(Error::config("ofdm.cp_fraction", "must lie in [0, 1)"));
        }
        if !(self.baud_rate > 0.0) {
            return Err(Error::config("ofdm.baud_rate", "must be positive"));
        }
        if self.training_per_frame < 2 || self.training_per_frame % 2 != 0 {
            return Err(Error::config(
                "ofdm.training_per_frame",
                "needs an even count ≥ 2 so both polarizations are excited",
            ));
        }
        if self.payload_per_frame % 2 != 0 {
            return Err(Error::config(
                "ofdm.payload_per_frame",
                "must be even so time-slot twins never straddle a frame",
            ));
        }
        Ok(())
    }

    pub fn cp_len(&self) -> usize {
        (self.cp_fraction * self.fft_size as f64).round() as usize
    }

    /// Samples per OFDM symbol including the cyclic prefix.
    pub fn symbol_len(&self) -> usize {
        self.fft_size + self.cp_len()
    }

    pub fn active_subcarriers(&self) -> usize {
        self.data_subcarriers + self.pilot_count
    }

    /// Occupied optical bandwidth of the active subcarriers, Hz.
    pub fn occupied_bandwidth(&self) -> f64 {
        self.active_subcarriers() as f64 * self.baud_rate / self.fft_size as f64
    }

    pub fn layout(&self) -> SubcarrierLayout {
        SubcarrierLayout::new(self)
    }
}

/// Role of every FFT bin plus the bin lists for each role.
#[derive(Debug, Clone, PartialEq)]
pub struct SubcarrierLayout {
    pub roles: Vec<SubcarrierRole>,
    /// Data bins in ascending logical (frequency) order.
    pub data: Vec<usize>,
    pub pilots: Vec<usize>,
    /// Data and pilot bins in ascending logical order.
    pub active: Vec<usize>,
}

impl SubcarrierLayout {
    fn new(cfg: &OfdmConfig) -> Self {
        let n = cfg.fft_size;
        let active_count = cfg.active_subcarriers();
        let half = (active_count / 2) as i64;
        let bin_of = |logical: usize| -> usize { (logical as i64 - half).rem_euclid(n as i64) as usize };

        let pilot_positions: Vec<usize> = (0..cfg.pilot_count)
            .map(|i| (2 * i + 1) * active_count / (2 * cfg.pilot_count))
            .collect();

        let mut roles = vec![SubcarrierRole::Guard; n];
        let mut data = Vec::with_capacity(cfg.data_subcarriers);
        let mut pilots = Vec::with_capacity(cfg.pilot_count);
        let mut active = Vec::with_capacity(active_count);
        for pos in 0..active_count {
            let bin = bin_of(pos);
            active.push(bin);
            if pilot_positions.contains(&pos) {
                roles[bin] = SubcarrierRole::Pilot;
                pilots.push(bin);
            } else {
                roles[bin] = SubcarrierRole::Data;
                data.push(bin);
            }
        }
        Self {
            roles,
            data,
            pilots,
            active,
        }
    }

    pub fn fft_size(&self) -> usize {
        self.roles.len()
    }
}

/// Frequency-domain content of one dual-polarization OFDM symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmSymbolGrid {
    pub x: Vec<C64>,
    pub y: Vec<C64>,
}

impl OfdmSymbolGrid {
    pub fn zeros(fft_size: usize) -> Self {
        Self {
            x: vec![C64::new(0.0, 0.0); fft_size],
            y: vec![C64::new(0.0, 0.0); fft_size],
        }
    }

    pub fn fft_size(&self) -> usize {
        self.x.len()
    }

    /// Empty grid for `layout` with pilots written on both polarizations.
    pub fn with_pilots(layout: &SubcarrierLayout) -> Self {
        let mut g = Self::zeros(layout.fft_size());
        for &p in &layout.pilots {
            g.x[p] = PILOT_SYMBOL;
            g.y[p] = PILOT_SYMBOL;
        }
        g
    }

    pub fn energy(&self) -> f64 {
        self.x.iter().chain(&self.y).map(|v| v.norm_sqr()).sum()
    }

    /// Values on the data bins of `layout`, in layout order.
    pub fn data_x(&self, layout: &SubcarrierLayout) -> Vec<C64> {
        layout.data.iter().map(|&k| self.x[k]).collect()
    }

    pub fn data_y(&self, layout: &SubcarrierLayout) -> Vec<C64> {
        layout.data.iter().map(|&k| self.y[k]).collect()
    }
}

/// Gray QPSK: 00→(+1+j)/√2, 01→(−1+j)/√2, 11→(−1−j)/√2, 10→(+1−j)/√2.
/// The first bit of a pair selects the imaginary sign, the second the real sign.
pub fn qpsk_map(bits: &[u8]) -> Result<Vec<C64>> {
    if bits.len() % 2 != 0 {
        return Err(Error::invalid(format!(
            "QPSK mapping needs an even bit count, got {}",
            bits.len()
        )));
    }
    Ok(bits.chunks_exact(2).map(|p| qpsk_point(p[0], p[1])).collect())
}

pub(crate) fn qpsk_point(b0: u8, b1: u8) -> C64 {
    let re = if b1 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    let im = if b0 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    C64::new(re, im)
}

/// Nearest-quadrant hard decision. Points on an axis go to the positive side.
pub fn qpsk_demap(symbols: &[C64]) -> Vec<u8> {
    let mut bits = Vec::with_capacity(symbols.len() * 2);
    for s in symbols {
        bits.push(u8::from(s.im < 0.0));
        bits.push(u8::from(s.re < 0.0));
    }
    bits
}

/// One CP-extended OFDM symbol at one sample per chip. The inverse transform
/// is scaled by 1/√N, so time-domain energy (without CP) equals grid energy.
pub fn ofdm_modulate(grid: &OfdmSymbolGrid, cfg: &OfdmConfig) -> Result<DualPolWaveform> {
    let n = cfg.fft_size;
    if grid.x.len() != n || grid.y.len() != n {
        return Err(Error::invalid(format!(
            "grid size {} does not match fft_size {}",
            grid.x.len(),
            n
        )));
    }
    let cp = cfg.cp_len();
    let to_time = |freq: &[C64]| -> Vec<C64> {
        let mut buf = freq.to_vec();
        spectral::inverse_plan(n).process(&mut buf);
        let s = 1.0 / (n as f64).sqrt();
        let mut out = Vec::with_capacity(n + cp);
        out.extend(buf[n - cp..].iter().map(|v| v * s));
        out.extend(buf.iter().map(|v| v * s));
        out
    };
    DualPolWaveform::new(to_time(&grid.x), to_time(&grid.y), cfg.baud_rate, DEFAULT_CARRIER_HZ)
}

/// Inverse of [`ofdm_modulate`] for one symbol-aligned, CP-extended symbol.
pub fn ofdm_demodulate(w: &DualPolWaveform, cfg: &OfdmConfig) -> Result<OfdmSymbolGrid> {
    if w.len() != cfg.symbol_len() {
        return Err(Error::invalid(format!(
            "expected {} samples per OFDM symbol, got {}",
            cfg.symbol_len(),
            w.len()
        )));
    }
    Ok(demodulate_slices(w.x(), w.y(), cfg))
}

pub(crate) fn demodulate_slices(x: &[C64], y: &[C64], cfg: &OfdmConfig) -> OfdmSymbolGrid {
    let n = cfg.fft_size;
    let cp = cfg.cp_len();
    let plan = spectral::forward_plan(n);
    let s = 1.0 / (n as f64).sqrt();
    let to_freq = |time: &[C64]| -> Vec<C64> {
        let mut buf = time[cp..cp + n].to_vec();
        plan.process(&mut buf);
        buf.iter_mut().for_each(|v| *v *= s);
        buf
    };
    OfdmSymbolGrid {
        x: to_freq(x),
        y: to_freq(y),
    }
}

/// Training block and payload count of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameLayout {
    pub n_training: usize,
    pub n_payload: usize,
    /// Known transmitted training grids; symbol `i` excites only
    /// polarization `i % 2` (x first).
    pub training: Vec<OfdmSymbolGrid>,
}

impl FrameLayout {
    pub fn new(cfg: &OfdmConfig) -> Self {
        Self::with_counts(cfg, cfg.training_per_frame, cfg.payload_per_frame)
    }

    pub fn with_counts(cfg: &OfdmConfig, n_training: usize, n_payload: usize) -> Self {
        let layout = cfg.layout();
        let mut rng = SeededRng::new(TRAINING_PATTERN_SEED).stream(Substream::Training, 0);
        let amplitude = std::f64::consts::SQRT_2;
        let training = (0..n_training)
            .map(|i| {
                let mut g = OfdmSymbolGrid::zeros(cfg.fft_size);
                let bits = crate::rng::generate_bits(&mut rng, 2 * layout.active.len());
                let target = if i % 2 == 0 { &mut g.x } else { &mut g.y };
                for (&k, pair) in layout.active.iter().zip(bits.chunks_exact(2)) {
                    target[k] = qpsk_point(pair[0], pair[1]) * amplitude;
                }
                g
            })
            .collect();
        Self {
            n_training,
            n_payload,
            training,
        }
    }

    pub fn symbols(&self) -> usize {
        self.n_training + self.n_payload
    }
}

/// `[training | payload]`, every symbol CP-extended, at one sample per chip.
pub fn build_frame(payload: &[OfdmSymbolGrid], layout: &FrameLayout, cfg: &OfdmConfig) -> Result<DualPolWaveform> {
    if payload.len() != layout.n_payload {
        return Err(Error::invalid(format!(
            "frame expects {} payload symbols, got {}",
            layout.n_payload,
            payload.len()
        )));
    }
    let total = layout.symbols() * cfg.symbol_len();
    let mut x = Vec::with_capacity(total);
    let mut y = Vec::with_capacity(total);
    for grid in layout.training.iter().chain(payload) {
        let sym = ofdm_modulate(grid, cfg)?;
        x.extend_from_slice(sym.x());
        y.extend_from_slice(sym.y());
    }
    if x.is_empty() {
        return Err(Error::invalid("frame has no symbols"));
    }
    DualPolWaveform::new(x, y, cfg.baud_rate, DEFAULT_CARRIER_HZ)
}

/// Received frame split into `(training, payload)` grids.
#[derive(Debug, Clone)]
pub struct ParsedFrame {
    pub training: Vec<OfdmSymbolGrid>,
    pub payload: Vec<OfdmSymbolGrid>,
}

/// Demodulates a symbol-aligned frame produced by [`build_frame`].
pub fn parse_frame(w: &DualPolWaveform, layout: &FrameLayout, cfg: &OfdmConfig) -> Result<ParsedFrame> {
    let sl = cfg.symbol_len();
    if w.len() != layout.symbols() * sl {
        return Err(Error::invalid(format!(
            "frame length {} does not match {} symbols of {} samples",
            w.len(),
            layout.symbols(),
            sl
        )));
    }
    let mut grids = (0..layout.symbols()).map(|i| {
        let r = i * sl..(i + 1) * sl;
        demodulate_slices(&w.x()[r.clone()], &w.y()[r], cfg)
    });
    let training = grids.by_ref().take(layout.n_training).collect();
    let payload = grids.collect();
    Ok(ParsedFrame { training, payload })
}

/// Net information rate (b/s) of `n_subbands` sub-bands carrying
/// `bits_per_data_subcarrier` bits per data subcarrier per dual-polarization
/// OFDM symbol. Training overhead is not charged.
pub fn net_bit_rate(cfg: &OfdmConfig, bits_per_data_subcarrier: usize, n_subbands: usize) -> f64 {
    let symbol_rate = cfg.baud_rate / cfg.symbol_len() as f64;
    n_subbands as f64 * (cfg.data_subcarriers * bits_per_data_subcarrier) as f64 * symbol_rate
}
