//! Coherent receiver DSP: dispersion compensation, channel estimation,
//! zero-forcing equalization and common-phase-error correction.

pub mod channel;
pub mod edc;

pub use channel::{cpe_correct, equalize, estimate_channel, smooth_estimate, ChannelEstimate, CommonPhase, Equalized};
pub use edc::{edc_overlap_save, edc_single_block, EdcConfig};

use crate::error::Result;
use crate::ofdm::{OfdmSymbolGrid, SubcarrierLayout};

/// Per-burst receiver statistics.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RxTelemetry {
    pub flagged_subcarriers: usize,
    /// Mean channel-estimate residual over active bins.
    pub estimate_noise: f64,
}

/// Estimates the channel from every training symbol of a burst (the channel
/// is static within a trial), then equalizes and phase-corrects each
/// payload symbol.
pub fn equalize_burst(
    rx_training: &[OfdmSymbolGrid],
    tx_training: &[OfdmSymbolGrid],
    payload: &[OfdmSymbolGrid],
    layout: &SubcarrierLayout,
    smoothing_half_window: usize,
) -> Result<(Vec<OfdmSymbolGrid>, RxTelemetry)> {
    let est = smooth_estimate(
        &estimate_channel(rx_training, tx_training, layout)?,
        smoothing_half_window,
    );
    let mut telemetry = RxTelemetry {
        flagged_subcarriers: 0,
        estimate_noise: est.noise.iter().sum::<f64>() / est.noise.len().max(1) as f64,
    };
    let mut out = Vec::with_capacity(payload.len());
    for g in payload {
        let eq = equalize(g, &est)?;
        telemetry.flagged_subcarriers += eq.flagged;
        out.push(cpe_correct(&eq.grid, layout)?.0);
    }
    Ok((out, telemetry))
}
