//! One transceiver trial: bits → codec → OFDM burst → optical link →
//! receiver DSP → decoder → BER.

use serde::{Deserialize, Serialize};

use crate::codec::{
    lpc_encode_with, ltc_encode_with, ml_decode, superpose_group, uncoded_with, CodecMode, CodedConstellation,
};
use crate::error::{Error, Result};
use crate::link::{transmit_superchannel, LinkConfig, LinkTelemetry};
use crate::metrics::{count_ber, q_from_count, BerCount, QEstimate};
use crate::ofdm::{
    build_frame, demodulate_slices, qpsk_demap, qpsk_map, FrameLayout, OfdmConfig, OfdmSymbolGrid, SubcarrierLayout,
};
use crate::rng::{generate_bits, SeededRng, Substream};
use crate::rx::{edc::dispersion_spread_samples, edc_overlap_save, equalize_burst, EdcConfig, RxTelemetry};
use crate::signal::{dbm_to_watts, DualPolWaveform, C64};
use crate::spectral;

use super::ExperimentSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub seed: u64,
    pub count: BerCount,
    pub q: QEstimate,
    pub link: LinkTelemetry,
    pub rx: RxTelemetry,
}

/// Burst geometry at one sample per chip.
struct Burst {
    guard: usize,
    frame_len: usize,
    frames: usize,
    padded: usize,
}

impl Burst {
    fn new(spec: &ExperimentSpec, link: &LinkConfig) -> Self {
        let frame = FrameLayout::new(&spec.ofdm);
        let frame_len = frame.symbols() * spec.ofdm.symbol_len();
        let frames = spec.frames_per_burst;
        // Zero guard on both ends so dispersion never wraps the record.
        let grid = spec.ofdm.baud_rate * link.oversampling as f64;
        let spread = dispersion_spread_samples(link.total_dispersion_ps_nm(), grid) / link.oversampling as f64;
        let guard = spread.ceil() as usize + 32;
        let total = 2 * guard + frames * frame_len;
        // Multiple of 128 keeps superchannel offsets on whole FFT bins.
        let padded = spectral::fast_length(total.div_ceil(128)) * 128;
        Self {
            guard,
            frame_len,
            frames,
            padded,
        }
    }

    fn active(&self) -> std::ops::Range<usize> {
        self.guard..self.guard + self.frames * self.frame_len
    }
}

/// Payload grids for `bits` under `mode`.
pub(crate) fn encode_payload(
    bits: &[u8],
    mode: CodecMode,
    layout: &SubcarrierLayout,
    n_symbols: usize,
) -> Result<Vec<OfdmSymbolGrid>> {
    let d = layout.data.len();
    let syms = qpsk_map(bits)?;
    if syms.len() != 2 * d * n_symbols {
        return Err(Error::invalid("payload bit count does not fill the frame"));
    }
    let mut grids = Vec::with_capacity(n_symbols);
    match mode {
        CodecMode::LpcPcts => {
            for chunk in syms.chunks_exact(2 * d) {
                grids.push(lpc_encode_with(chunk, layout)?);
            }
        }
        CodecMode::LtcPcts => {
            for chunk in syms.chunks_exact(4 * d) {
                let (a, b) = ltc_encode_with(&chunk[..2 * d], &chunk[2 * d..], layout)?;
                grids.push(a);
                grids.push(b);
            }
        }
        CodecMode::UncodedPdm => {
            for chunk in syms.chunks_exact(2 * d) {
                grids.push(uncoded_with(&chunk[..d], &chunk[d..], layout)?);
            }
        }
    }
    Ok(grids)
}

/// Hard-decision bits from equalized payload grids.
pub(crate) fn decode_payload(grids: &[OfdmSymbolGrid], mode: CodecMode, layout: &SubcarrierLayout) -> Result<Vec<u8>> {
    let constellation = CodedConstellation::new();
    let mut bits = Vec::with_capacity(grids.len() * 4 * layout.data.len());
    match mode {
        CodecMode::LpcPcts => {
            for g in grids {
                let r = superpose_group(std::slice::from_ref(g), mode, layout)?;
                bits.extend(ml_decode(&r, &constellation).bits);
            }
        }
        CodecMode::LtcPcts => {
            for pair in grids.chunks_exact(2) {
                let r = superpose_group(pair, mode, layout)?;
                bits.extend(ml_decode(&r, &constellation).bits);
            }
        }
        CodecMode::UncodedPdm => {
            for g in grids {
                let mut s: Vec<C64> = g.data_x(layout);
                s.extend(g.data_y(layout));
                bits.extend(qpsk_demap(&s));
            }
        }
    }
    Ok(bits)
}

/// Transmitted burst of one band on the link grid at its launch power,
/// with the payload bits it carries.
fn transmit_band(
    spec: &ExperimentSpec,
    link: &LinkConfig,
    burst: &Burst,
    rng: &SeededRng,
    band: usize,
) -> Result<(DualPolWaveform, Vec<u8>)> {
    let cfg: &OfdmConfig = &spec.ofdm;
    let layout = cfg.layout();
    let frame = FrameLayout::new(cfg);
    let bits_per_frame = frame.n_payload * 4 * layout.data.len();
    let bits = generate_bits(
        &mut rng.stream(Substream::Bits, band as u64),
        bits_per_frame * burst.frames,
    );
    let mut x = vec![C64::new(0.0, 0.0); burst.padded];
    let mut y = vec![C64::new(0.0, 0.0); burst.padded];
    for (f, chunk) in bits.chunks_exact(bits_per_frame).enumerate() {
        let payload = encode_payload(chunk, spec.codec, &layout, frame.n_payload)?;
        let w = build_frame(&payload, &frame, cfg)?;
        let start = burst.guard + f * burst.frame_len;
        x[start..start + burst.frame_len].copy_from_slice(w.x());
        y[start..start + burst.frame_len].copy_from_slice(w.y());
    }
    let os = link.oversampling;
    let m = burst.padded * os;
    let x = spectral::resample(&x, m);
    let y = spectral::resample(&y, m);
    let mut w = DualPolWaveform::new(x, y, cfg.baud_rate * os as f64, link.carrier_frequency_hz)?;
    let active = burst.active();
    let sig = w.slice(active.start * os, active.len() * os)?;
    let p = sig.mean_power()?;
    if !(p > 0.0) {
        return Err(Error::Numerical("transmitted burst has no power".into()));
    }
    w.scale((dbm_to_watts(link.launch_power_dbm) / p).sqrt());
    Ok((w, bits))
}

/// Runs one trial of `spec` on `link` with trial seed `seed`.
pub fn run_trial(spec: &ExperimentSpec, link: &LinkConfig, seed: u64) -> Result<TrialOutcome> {
    let rng = SeededRng::new(seed);
    let burst = Burst::new(spec, link);
    let mut bands = Vec::with_capacity(link.n_subbands);
    let mut tx_bits = Vec::new();
    for b in 0..link.n_subbands {
        let (w, bits) = transmit_band(spec, link, &burst, &rng, b)?;
        if b == link.measured_band {
            tx_bits = bits;
        }
        bands.push(w);
    }
    let (rx, link_telemetry) = transmit_superchannel(&bands, link, &rng)?;
    drop(bands);

    let residual = (1.0 - link.pre_dispersion_fraction) * link.total_dispersion_ps_nm();
    let rx = edc_overlap_save(&rx, &EdcConfig::for_dispersion(residual, rx.sample_rate))?;
    let (x, y) = rx.into_parts();
    let x = spectral::resample(&x, burst.padded);
    let y = spectral::resample(&y, burst.padded);

    let cfg = &spec.ofdm;
    let layout = cfg.layout();
    let frame = FrameLayout::new(cfg);
    let sl = cfg.symbol_len();
    let mut rx_training = Vec::with_capacity(burst.frames * frame.n_training);
    let mut tx_training = Vec::with_capacity(burst.frames * frame.n_training);
    let mut payload = Vec::with_capacity(burst.frames * frame.n_payload);
    for f in 0..burst.frames {
        for s in 0..frame.symbols() {
            let start = burst.guard + f * burst.frame_len + s * sl;
            let g = demodulate_slices(&x[start..start + sl], &y[start..start + sl], cfg);
            if s < frame.n_training {
                rx_training.push(g);
                tx_training.push(frame.training[s].clone());
            } else {
                payload.push(g);
            }
        }
    }
    let (eq, rx_telemetry) = equalize_burst(
        &rx_training,
        &tx_training,
        &payload,
        &layout,
        spec.rx_smoothing_half_window,
    )?;
    let rx_bits = decode_payload(&eq, spec.codec, &layout)?;
    let count = count_ber(&tx_bits, &rx_bits)?;
    let q = q_from_count(&count)?;
    Ok(TrialOutcome {
        seed,
        count,
        q,
        link: link_telemetry,
        rx: rx_telemetry,
    })
}
