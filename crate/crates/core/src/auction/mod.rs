//! Learned single-item auction built from per-bidder monotone transforms.
//!
//! Every bidder's bid passes through a strictly increasing piecewise-linear
//! map `min_q max_s (w_qs * b + beta_qs)`. The transformed bids, together with
//! a dummy bidder fixed at 0, run a second-price auction; the winner pays the
//! inverse transform of the second-highest transformed bid. Because each
//! transform is strictly increasing the hard auction is a monotone relabeling
//! of SPA with zero reserve, so it stays dominant-strategy incentive
//! compatible and individually rational for any parameters. Training replaces
//! the argmax by a softmax with temperature `kappa` and ascends the expected
//! revenue with plain SGD.

mod gradient;
mod io;
mod mechanism;
mod network;
mod train;

pub use gradient::{loss_and_gradient, soft_loss, Gradient};
pub use io::{read_params, write_params};
pub use mechanism::{
    allocate_soft, forward, ic_regret, run_hard_auction, spa0_payment, spa_baseline,
    AuctionOutcome, HardOutcome,
};
pub use network::AuctionNetParams;
pub use train::{train, TrainOutcome};

use crate::error::{invalid_param, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AuctionConfig {
    /// Number of bidders `N`.
    pub bidders: usize,
    /// Linear-function groups `Q`.
    pub groups: usize,
    /// Linear functions per group `S`.
    pub per_group: usize,
    /// Softmax temperature.
    pub kappa: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for AuctionConfig {
    fn default() -> Self {
        Self {
            bidders: 10,
            groups: 5,
            per_group: 10,
            kappa: 1000.0,
            lr: 0.001,
            batch_size: 100,
            iterations: 2000,
            seed: 0,
        }
    }
}

impl AuctionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bidders < 2 {
            return Err(invalid_param("N", "an auction needs at least 2 bidders"));
        }
        if self.groups < 1 {
            return Err(invalid_param("Q", "must be at least 1"));
        }
        if self.per_group < 1 {
            return Err(invalid_param("S", "must be at least 1"));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(invalid_param("kappa", "must be finite and > 0"));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(invalid_param("lr", "must be finite and >= 0"));
        }
        if self.batch_size < 1 {
            return Err(invalid_param("batch_size", "must be at least 1"));
        }
        Ok(())
    }
}

/// Row-major `samples x bidders` table of bids.
#[derive(Debug, Clone, PartialEq)]
pub struct BidTable {
    bidders: usize,
    values: Vec<f64>,
}

impl BidTable {
    pub fn new(bidders: usize, values: Vec<f64>) -> Result<Self> {
        if bidders == 0 {
            return Err(Error::InvalidInput(
                "bid table needs at least one bidder".into(),
            ));
        }
        if !values.len().is_multiple_of(bidders) {
            return Err(Error::InvalidInput(format!(
                "{} bids do not fill rows of {bidders}",
                values.len()
            )));
        }
        if let Some(b) = values.iter().find(|b| !b.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite bid {b}")));
        }
        Ok(Self { bidders, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let bidders = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != bidders) {
            return Err(Error::InvalidInput("ragged bid rows".into()));
        }
        Self::new(bidders, rows.concat())
    }

    pub fn bidders(&self) -> usize {
        self.bidders
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.bidders
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.bidders..(i + 1) * self.bidders]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.bidders)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Mean SPA revenue (second-highest bid) over all rows.
    pub fn spa_revenue(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.rows().map(|r| spa_baseline(r).1).sum::<f64>() / self.len() as f64
    }
}
