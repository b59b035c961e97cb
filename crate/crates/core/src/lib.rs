//! Market-based (value- and volume-weighted) statistics of trade tapes.
//!
//! A [`TradeTape`] is a sequence of trades `(time, price, volume, value)`.
//! Statistics are taken over a window of `N` consecutive trades and weight
//! each trade by powers of its volume or value, so large trades carry
//! proportionally more weight than small ones. Returns over a lag of `l`
//! ticks are weighted by the adjusted value `p(tᵢ − l)·U(tᵢ)`.
//!
//! Modules:
//! - [`tape`]: ingestion, validation and window resolution
//! - [`moments`]: price, volume, value and return moments, volatility
//! - [`correlations`]: paired-window autocorrelations and cross correlations
//! - [`charfn`]: moment-matched characteristic functions and densities
//! - [`synth`]: seeded tape generation and the weighting contrast
//! - [`oracle`]: literal reference implementations for testing
//! - [`cli`]: the `tradestats` command-line front end

pub mod charfn;
pub mod cli;
pub mod correlations;
mod dd;
pub mod error;
pub mod moments;
pub mod oracle;
pub mod synth;
pub mod tape;

pub use charfn::{CharFnApprox, CharFnForm, Damping, DensityGrid, GridSpec};
pub use correlations::{CorrelationReport, PairedWindows};
pub use error::{CharFnError, StatsError, SynthError, TapeError};
pub use moments::MomentReport;
pub use synth::GenConfig;
pub use tape::{LagSpec, ResolvedWindow, TradeTape, TradeTick, WindowSpec};

/// Version stamped into every JSON document the crate emits.
pub const SCHEMA_VERSION: u32 = 1;
