use super::mechanism::{allocate_soft, spa0_active};
use super::network::AuctionNetParams;
use super::BidTable;

/// Gradient of the loss with the same layout as [`AuctionNetParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub log_w: Vec<f64>,
    pub beta: Vec<f64>,
}

impl Gradient {
    fn zeros(len: usize) -> Self {
        Self {
            log_w: vec![0.0; len],
            beta: vec![0.0; len],
        }
    }

    /// Coordinate `i` in the combined `[log_w, beta]` layout.
    pub fn coord(&self, i: usize) -> f64 {
        let n = self.log_w.len();
        if i < n {
            self.log_w[i]
        } else {
            self.beta[i - n]
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.log_w
            .iter()
            .chain(&self.beta)
            .fold(0.0, |m, g| m.max(g.abs()))
    }
}

/// Accumulates `scale * d(revenue)/d(params)` for one bid profile into `grad`
/// and returns the soft revenue.
fn accumulate_sample(
    params: &AuctionNetParams,
    bids: &[f64],
    kappa: f64,
    scale: f64,
    grad: &mut Gradient,
) -> f64 {
    let n_bidders = bids.len();
    let active: Vec<_> = bids
        .iter()
        .enumerate()
        .map(|(n, &b)| params.transform_active(n, b))
        .collect();
    let mut transformed: Vec<f64> = active.iter().map(|a| a.value).collect();
    transformed.push(0.0);
    let alloc = allocate_soft(&transformed, kappa);

    // Payment of each bidder plus what its derivative needs.
    let mut payments = vec![0.0; n_bidders];
    let mut payment_route = vec![None; n_bidders];
    for n in 0..n_bidders {
        let (price, source) = spa0_active(&transformed, n);
        let inv = params.inverse_active(n, price);
        if inv.value > 0.0 {
            payments[n] = inv.value;
            payment_route[n] = Some((inv, source));
        }
    }
    let revenue: f64 = alloc.iter().zip(&payments).map(|(z, p)| z * p).sum();

    // d revenue / d transformed_m through the softmax.
    let mut d_transformed: Vec<f64> = (0..n_bidders)
        .map(|m| kappa * alloc[m] * (payments[m] - revenue))
        .collect();

    // Through the payments: p_n = (y - beta) / w on the active inverse line.
    for n in 0..n_bidders {
        let Some((inv, source)) = payment_route[n] else {
            continue;
        };
        let w = params.slope(inv.index);
        let weight = scale * alloc[n];
        grad.beta[inv.index] -= weight / w;
        grad.log_w[inv.index] -= weight * inv.value;
        if let Some(m) = source {
            d_transformed[m] += alloc[n] / w;
        }
    }

    // Through the forward transform: t_m = w * b_m + beta on the active line.
    for (m, a) in active.iter().enumerate() {
        let g = scale * d_transformed[m];
        grad.beta[a.index] += g;
        grad.log_w[a.index] += g * params.slope(a.index) * bids[m];
    }
    revenue
}

/// Negated mean soft revenue over `batch` and its analytic gradient.
///
/// Min, max and ReLU pass gradient through the active piece only (lowest
/// index on ties).
pub fn loss_and_gradient(
    params: &AuctionNetParams,
    batch: &BidTable,
    kappa: f64,
) -> (f64, Gradient) {
    assert!(!batch.is_empty(), "batch must be nonempty");
    assert_eq!(
        batch.bidders(),
        params.bidders(),
        "bid width must match the network"
    );
    let mut grad = Gradient::zeros(params.len());
    let scale = -1.0 / batch.len() as f64;
    let mut revenue = 0.0;
    for bids in batch.rows() {
        revenue += accumulate_sample(params, bids, kappa, scale, &mut grad);
    }
    (-revenue / batch.len() as f64, grad)
}

/// Negated mean soft revenue computed by the plain forward pass.
pub fn soft_loss(params: &AuctionNetParams, batch: &BidTable, kappa: f64) -> f64 {
    let total: f64 = batch
        .rows()
        .map(|bids| super::mechanism::forward(params, bids, kappa).revenue)
        .sum();
    -total / batch.len() as f64
}
