//! Self-checks of the auction machinery against independent routes.
//!
//! These back the `selfcheck` command: analytic gradients against central
//! finite differences of the forward pass, the inverse transform against the
//! forward transform, and the identity network against plain SPA.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::auction::{
    loss_and_gradient, run_hard_auction, soft_loss, spa_baseline, AuctionNetParams, BidTable,
};

/// Central finite-difference step.
pub const FD_STEP: f64 = 1e-6;
/// Gradient magnitudes below this are compared absolutely.
pub const GRAD_REL_FLOOR: f64 = 1e-5;
/// Minimum distance from any min/max/ReLU switch for a point to count as smooth.
pub const SMOOTH_MARGIN: f64 = 1e-4;

/// `|a - b| / max(|a|, |b|, GRAD_REL_FLOOR)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(GRAD_REL_FLOOR)
}

fn top_two_gap(values: impl Iterator<Item = f64>) -> f64 {
    let (mut first, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for v in values {
        if v > first {
            second = first;
            first = v;
        } else if v > second {
            second = v;
        }
    }
    if second.is_finite() {
        first - second
    } else {
        f64::INFINITY
    }
}

fn lines(params: &AuctionNetParams, bidder: usize, q: usize, x: f64, inverse: bool) -> Vec<f64> {
    let (qn, sn) = (params.groups(), params.per_group());
    (0..sn)
        .map(|s| {
            let i = (bidder * qn + q) * sn + s;
            let w = params.log_w()[i].exp();
            let b = params.beta()[i];
            if inverse {
                (x - b) / w
            } else {
                w * x + b
            }
        })
        .collect()
}

/// Smallest distance from a piece switch anywhere in the soft forward pass of
/// `bids`. Recomputed from first principles, independent of the gradient code.
pub fn kink_margin(params: &AuctionNetParams, bids: &[f64]) -> f64 {
    let n = bids.len();
    let mut margin = f64::INFINITY;
    let mut transformed = Vec::with_capacity(n);
    for (m, &b) in bids.iter().enumerate() {
        let group_max: Vec<f64> = (0..params.groups())
            .map(|q| {
                let l = lines(params, m, q, b, false);
                margin = margin.min(top_two_gap(l.iter().copied()));
                l.into_iter().fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        margin = margin.min(top_two_gap(group_max.iter().map(|v| -v)));
        transformed.push(group_max.into_iter().fold(f64::INFINITY, f64::min));
    }
    for payer in 0..n {
        let others = (0..n).filter(|&m| m != payer).map(|m| transformed[m]);
        margin = margin.min(top_two_gap(others.clone()));
        let top = others.fold(f64::NEG_INFINITY, f64::max);
        margin = margin.min(top.abs());
        let price = top.max(0.0);
        let group_min: Vec<f64> = (0..params.groups())
            .map(|q| {
                let l = lines(params, payer, q, price, true);
                margin = margin.min(top_two_gap(l.iter().map(|v| -v)));
                l.into_iter().fold(f64::INFINITY, f64::min)
            })
            .collect();
        margin = margin.min(top_two_gap(group_min.iter().copied()));
        margin = margin.min(
            group_min
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max)
                .abs(),
        );
    }
    margin
}

/// Worst per-coordinate relative error between the analytic gradient and
/// central differences of the loss at one point.
pub fn gradient_error_at(params: &AuctionNetParams, batch: &BidTable, kappa: f64) -> f64 {
    let (_, grad) = loss_and_gradient(params, batch, kappa);
    let mut probe = params.clone();
    let loss = |p: &AuctionNetParams| soft_loss(p, batch, kappa);
    let mut worst = 0.0f64;
    for i in 0..2 * params.len() {
        let orig = *probe.coord_mut(i);
        *probe.coord_mut(i) = orig + FD_STEP;
        let up = loss(&probe);
        *probe.coord_mut(i) = orig - FD_STEP;
        let down = loss(&probe);
        *probe.coord_mut(i) = orig;
        let fd = (up - down) / (2.0 * FD_STEP);
        worst = worst.max(relative_error(grad.coord(i), fd));
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientCheck {
    pub points: usize,
    pub rejected: usize,
    pub worst_relative_error: f64,
}

/// Gradient check over `points` random smooth points (small networks, random
/// temperature in `[1, 50]`).
pub fn gradient_check(points: usize, seed: u64) -> GradientCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (bidders, groups, per_group, rows) = (3, 2, 3, 2);
    let mut accepted = 0;
    let mut rejected = 0;
    let mut worst = 0.0f64;
    while accepted < points {
        let params = AuctionNetParams::random(&mut rng, bidders, groups, per_group, 0.5, 0.3);
        let values: Vec<f64> = (0..rows * bidders)
            .map(|_| rng.random_range(0.0..1.0))
            .collect();
        let batch = BidTable::new(bidders, values).expect("well-formed batch");
        let kappa = rng.random_range(1.0..50.0);
        if batch
            .rows()
            .any(|r| kink_margin(&params, r) < SMOOTH_MARGIN)
        {
            rejected += 1;
            continue;
        }
        worst = worst.max(gradient_error_at(&params, &batch, kappa));
        accepted += 1;
    }
    GradientCheck {
        points,
        rejected,
        worst_relative_error: worst,
    }
}

/// Largest `|inverse(transform(b)) - b|` over `trials` random networks and
/// bids in `[0, 1.5]`.
pub fn inverse_roundtrip_error(trials: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let params = AuctionNetParams::random(&mut rng, 1, 5, 10, 2.0, 1.0);
        let b = rng.random_range(0.0..=1.5);
        let back = params.inverse_transform(0, params.transform(0, b));
        worst = worst.max((back - b).abs());
    }
    worst
}

/// Instances where the identity network's hard auction differs from SPA.
pub fn identity_spa_mismatches(instances: usize, bidders: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = AuctionNetParams::identity(bidders, 5, 10);
    (0..instances)
        .filter(|_| {
            let bids: Vec<f64> = (0..bidders).map(|_| rng.random_range(0.0..1.0)).collect();
            let hard = run_hard_auction(&params, &bids);
            let (w, p) = spa_baseline(&bids);
            hard.winner != Some(w) || hard.payment != p
        })
        .count()
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let cov: f64 = rx
        .iter()
        .zip(&ry)
        .map(|(a, b)| (a - mean) * (b - mean))
        .sum();
    let vx: f64 = rx.iter().map(|a| (a - mean).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - mean).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}
