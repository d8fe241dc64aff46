use super::network::AuctionNetParams;

/// Soft result of one auction instance.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionOutcome {
    /// Transformed bids with the dummy bidder's 0 last.
    pub transformed: Vec<f64>,
    /// Softmax allocation over the `N + 1` entries.
    pub alloc: Vec<f64>,
    /// Conditional payment of each real bidder, in bid space.
    pub payments: Vec<f64>,
    /// Argmax of `transformed`; `N` means no sale.
    pub winner: usize,
    /// `sum_n alloc_n * payments_n`.
    pub revenue: f64,
}

/// Hard-argmax result: `winner` is `None` when the dummy bidder wins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardOutcome {
    pub winner: Option<usize>,
    pub payment: f64,
}

impl HardOutcome {
    /// Utility of `bidder` holding `value`.
    pub fn utility(&self, bidder: usize, value: f64) -> f64 {
        if self.winner == Some(bidder) {
            value - self.payment
        } else {
            0.0
        }
    }
}

/// First index of the maximum, ties to the lowest index.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// `softmax(kappa * transformed)` with max subtraction.
pub fn allocate_soft(transformed: &[f64], kappa: f64) -> Vec<f64> {
    let top = transformed
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = transformed
        .iter()
        .map(|&t| (kappa * (t - top)).exp())
        .collect();
    let total: f64 = out.iter().sum();
    for z in &mut out {
        *z /= total;
    }
    out
}

/// Highest transformed bid among the other real bidders and the position it
/// came from, or `None` when the zero floor binds.
pub(crate) fn spa0_active(transformed: &[f64], bidder: usize) -> (f64, Option<usize>) {
    let real = transformed.len() - 1;
    let mut best: Option<usize> = None;
    for m in (0..real).filter(|&m| m != bidder) {
        if best.is_none_or(|b| transformed[m] > transformed[b]) {
            best = Some(m);
        }
    }
    match best {
        Some(m) if transformed[m] > 0.0 => (transformed[m], Some(m)),
        _ => (0.0, None),
    }
}

/// SPA-0 price in transformed space: `ReLU(max_{m != bidder} transformed_m)`.
///
/// `transformed` carries the dummy entry last, which is excluded (the floor
/// plays its role).
pub fn spa0_payment(transformed: &[f64], bidder: usize) -> f64 {
    assert!(
        bidder + 1 < transformed.len(),
        "bidder {bidder} out of range"
    );
    spa0_active(transformed, bidder).0
}

pub(crate) fn transformed_bids(params: &AuctionNetParams, bids: &[f64]) -> Vec<f64> {
    assert_eq!(
        bids.len(),
        params.bidders(),
        "bid count must match the network"
    );
    let mut t: Vec<f64> = bids
        .iter()
        .enumerate()
        .map(|(n, &b)| params.transform(n, b))
        .collect();
    t.push(0.0);
    t
}

/// Payment in bid space for a transformed-space price; floored at 0.
pub(crate) fn conditional_payment(params: &AuctionNetParams, bidder: usize, price: f64) -> f64 {
    params.inverse_transform(bidder, price).max(0.0)
}

/// Soft forward pass over one bid profile.
pub fn forward(params: &AuctionNetParams, bids: &[f64], kappa: f64) -> AuctionOutcome {
    let transformed = transformed_bids(params, bids);
    let alloc = allocate_soft(&transformed, kappa);
    let payments: Vec<f64> = (0..bids.len())
        .map(|n| conditional_payment(params, n, spa0_payment(&transformed, n)))
        .collect();
    let winner = argmax(&transformed);
    let revenue = alloc.iter().zip(&payments).map(|(z, p)| z * p).sum();
    AuctionOutcome {
        transformed,
        alloc,
        payments,
        winner,
        revenue,
    }
}

/// Test-time auction: hard argmax over transformed bids including the dummy.
pub fn run_hard_auction(params: &AuctionNetParams, bids: &[f64]) -> HardOutcome {
    let transformed = transformed_bids(params, bids);
    let winner = argmax(&transformed);
    if winner == bids.len() {
        return HardOutcome {
            winner: None,
            payment: 0.0,
        };
    }
    HardOutcome {
        winner: Some(winner),
        payment: conditional_payment(params, winner, spa0_payment(&transformed, winner)),
    }
}

/// Second-price auction on raw bids: `(winner, second-highest bid)`.
/// A lone bidder pays 0.
pub fn spa_baseline(bids: &[f64]) -> (usize, f64) {
    assert!(!bids.is_empty(), "SPA needs at least one bid");
    let winner = argmax(bids);
    let second = bids
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != winner)
        .map(|(_, &b)| b)
        .fold(f64::NEG_INFINITY, f64::max);
    (winner, if second.is_finite() { second } else { 0.0 })
}

/// Largest utility gain `bidder` can obtain by reporting a grid value
/// instead of its true bid, floored at 0.
pub fn ic_regret(
    params: &AuctionNetParams,
    bids: &[f64],
    bidder: usize,
    misreports: &[f64],
) -> f64 {
    assert!(!misreports.is_empty(), "misreport grid must be nonempty");
    let value = bids[bidder];
    let truthful = run_hard_auction(params, bids).utility(bidder, value);
    let mut report = bids.to_vec();
    let mut regret = 0.0f64;
    for &m in misreports {
        report[bidder] = m;
        let u = run_hard_auction(params, &report).utility(bidder, value);
        regret = regret.max(u - truthful);
    }
    regret
}
