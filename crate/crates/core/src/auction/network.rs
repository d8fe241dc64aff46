use rand::Rng;

use crate::error::{Error, Result};

/// Per-bidder min-max transform parameters, shaped `bidders x groups x per_group`.
///
/// Slopes are stored as `log_w` so `w = exp(log_w)` is always positive.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionNetParams {
    bidders: usize,
    groups: usize,
    per_group: usize,
    pub(crate) log_w: Vec<f64>,
    pub(crate) beta: Vec<f64>,
}

/// The linear piece selected by a min-max evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Active {
    pub value: f64,
    /// Flat index of the active `(bidder, q, s)` line.
    pub index: usize,
}

impl AuctionNetParams {
    /// Identity transform for every bidder (`w = 1`, `beta = 0`).
    pub fn identity(bidders: usize, groups: usize, per_group: usize) -> Self {
        let len = bidders * groups * per_group;
        Self {
            bidders,
            groups,
            per_group,
            log_w: vec![0.0; len],
            beta: vec![0.0; len],
        }
    }

    pub fn from_parts(
        bidders: usize,
        groups: usize,
        per_group: usize,
        log_w: Vec<f64>,
        beta: Vec<f64>,
    ) -> Result<Self> {
        let len = bidders * groups * per_group;
        if len == 0 {
            return Err(Error::InvalidInput(
                "parameter shape has a zero dimension".into(),
            ));
        }
        if log_w.len() != len || beta.len() != len {
            return Err(Error::InvalidInput(format!(
                "expected {len} entries per array, got {} and {}",
                log_w.len(),
                beta.len()
            )));
        }
        if log_w.iter().chain(&beta).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("parameters must be finite".into()));
        }
        Ok(Self {
            bidders,
            groups,
            per_group,
            log_w,
            beta,
        })
    }

    /// Random parameters with `log_w ~ U[-lw, lw]` and `beta ~ U[-bs, bs]`.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        bidders: usize,
        groups: usize,
        per_group: usize,
        log_w_spread: f64,
        beta_spread: f64,
    ) -> Self {
        let len = bidders * groups * per_group;
        let mut draw = |spread: f64| -> Vec<f64> {
            (0..len)
                .map(|_| {
                    if spread > 0.0 {
                        rng.random_range(-spread..spread)
                    } else {
                        0.0
                    }
                })
                .collect()
        };
        let log_w = draw(log_w_spread);
        let beta = draw(beta_spread);
        Self {
            bidders,
            groups,
            per_group,
            log_w,
            beta,
        }
    }

    pub fn bidders(&self) -> usize {
        self.bidders
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn per_group(&self) -> usize {
        self.per_group
    }

    pub fn log_w(&self) -> &[f64] {
        &self.log_w
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn len(&self) -> usize {
        self.log_w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_w.is_empty()
    }

    pub(crate) fn flat(&self, bidder: usize, q: usize, s: usize) -> usize {
        (bidder * self.groups + q) * self.per_group + s
    }

    /// Slope of the flat-indexed line.
    pub(crate) fn slope(&self, index: usize) -> f64 {
        self.log_w[index].exp()
    }

    /// `min_q max_s (w * bid + beta)` with the active line.
    pub(crate) fn transform_active(&self, bidder: usize, bid: f64) -> Active {
        assert!(bidder < self.bidders, "bidder {bidder} out of range");
        let mut best: Option<Active> = None;
        for q in 0..self.groups {
            let mut group: Option<Active> = None;
            for s in 0..self.per_group {
                let index = self.flat(bidder, q, s);
                let value = self.slope(index) * bid + self.beta[index];
                if group.is_none_or(|g| value > g.value) {
                    group = Some(Active { value, index });
                }
            }
            let group = group.expect("per_group >= 1");
            if best.is_none_or(|b| group.value < b.value) {
                best = Some(group);
            }
        }
        best.expect("groups >= 1")
    }

    /// `max_q min_s (y - beta) / w` with the active line.
    pub(crate) fn inverse_active(&self, bidder: usize, y: f64) -> Active {
        assert!(bidder < self.bidders, "bidder {bidder} out of range");
        let mut best: Option<Active> = None;
        for q in 0..self.groups {
            let mut group: Option<Active> = None;
            for s in 0..self.per_group {
                let index = self.flat(bidder, q, s);
                let value = (y - self.beta[index]) / self.slope(index);
                if group.is_none_or(|g| value < g.value) {
                    group = Some(Active { value, index });
                }
            }
            let group = group.expect("per_group >= 1");
            if best.is_none_or(|b| group.value > b.value) {
                best = Some(group);
            }
        }
        best.expect("groups >= 1")
    }

    /// Monotone transform of `bidder`'s bid.
    pub fn transform(&self, bidder: usize, bid: f64) -> f64 {
        self.transform_active(bidder, bid).value
    }

    /// Exact inverse of [`transform`](Self::transform).
    pub fn inverse_transform(&self, bidder: usize, y: f64) -> f64 {
        self.inverse_active(bidder, y).value
    }

    /// Applies `params -= lr * grad` element-wise.
    pub(crate) fn descend(&mut self, grad_log_w: &[f64], grad_beta: &[f64], lr: f64) {
        for (p, g) in self.log_w.iter_mut().zip(grad_log_w) {
            *p -= lr * g;
        }
        for (p, g) in self.beta.iter_mut().zip(grad_beta) {
            *p -= lr * g;
        }
    }

    /// Mutable access to one coordinate in the combined `[log_w, beta]` layout.
    pub fn coord_mut(&mut self, i: usize) -> &mut f64 {
        let n = self.log_w.len();
        if i < n {
            &mut self.log_w[i]
        } else {
            &mut self.beta[i - n]
        }
    }
}
