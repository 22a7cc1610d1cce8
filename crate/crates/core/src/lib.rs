//! Physical-layer simulator for CO-OFDM superchannels carrying linearly coded
//! phase-conjugated twin signals, with aligned and statistical
//! polarization-dependent loss.
//!
//! The crate is organized along the signal path:
//!
//! - [`signal`] and [`rng`]: shared value types, unit conversions and
//!   reproducible random streams.
//! - [`ofdm`]: QPSK mapping, subcarrier layout and the OFDM modem.
//! - [`codec`]: LPC-PCTS / LTC-PCTS encoders, coherent superposition and the
//!   16-point maximum-likelihood look-up-table decoder.
//! - [`link`]: fiber propagation, amplifiers, laser phase noise, PDL/PMD
//!   elements and superchannel multiplexing.
//! - [`rx`]: dispersion compensation, channel estimation, equalization and
//!   common-phase-error correction.
//! - [`metrics`]: BER, Q-factor, outage probability and Q histograms.
//! - [`experiment`]: end-to-end transceiver runs, sweeps, Monte Carlo and
//!   report emission.

pub mod codec;
pub mod error;
pub mod experiment;
pub mod link;
pub mod metrics;
pub mod ofdm;
pub mod rng;
pub mod rx;
pub mod signal;
pub(crate) mod spectral;

pub use codec::{CodecMode, CodedConstellation};
pub use error::{Error, Result};
pub use experiment::{ExperimentKind, ExperimentSpec, RunReport};
pub use link::{JonesMatrix, LinkConfig, LinkTelemetry, PdlModel, PdlSection, SpanParams};
pub use metrics::QSample;
pub use ofdm::{OfdmConfig, OfdmSymbolGrid, SubcarrierRole};
pub use rng::{SeededRng, Substream};
pub use signal::{DualPolWaveform, C64};
