//! Energy valuation and learned optimal auctions for wireless-powered
//! semantic-communication IoT.
//!
//! The pipeline runs in four stages:
//!
//! * [`channel`]: harvest-then-transmit link budget (Rayleigh channels,
//!   harvested energy, SNR, transmission time, bit budget).
//! * [`valuation`]: bit budget to feature dimension, score lookup on the
//!   built-in similarity / 1-gram BLEU curves, jitter, and the convex
//!   valuation. Standalone BLEU and cosine similarity live here too.
//! * [`auction`]: the trainable monotone-transform single-item auction,
//!   second-price baseline, and IC/IR checkers.
//! * [`experiments`]: end-to-end dataset generation, the revenue experiment
//!   and the parameter sweeps.

pub mod auction;
pub mod channel;
pub mod diagnostics;
mod error;
pub mod experiments;
pub mod valuation;

pub use auction::{
    AuctionConfig, AuctionNetParams, AuctionOutcome, BidTable, Gradient, HardOutcome, TrainOutcome,
};
pub use channel::{ChannelRealization, WpcnParams};
pub use error::{Error, Result};
pub use experiments::{MetricsRow, RevenueReport, ScenarioConfig, SweepParam, SweepRow};
pub use valuation::{DeviceProfile, ScoreCurve, Valuation};
