//! Scenario generation and the revenue / sweep experiments.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::auction::{run_hard_auction, train, AuctionConfig, AuctionNetParams, BidTable};
use crate::channel::{bits_budget, sample_channel, WpcnParams};
use crate::error::{invalid_param, Error, Result};
use crate::valuation::{
    builtin_curves, effective_dim, feature_dim, jitter_score, valuation, DeviceProfile, ScoreCurve,
    Valuation,
};

/// Preference range favouring BLEU.
pub const LOW_J: (f64, f64) = (0.1, 0.4);
/// Preference range favouring similarity.
pub const HIGH_J: (f64, f64) = (0.6, 0.9);

/// Offset between the training seed and the held-out evaluation seed.
pub const HELDOUT_SEED_OFFSET: u64 = 1_000_003;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub wpcn: WpcnParams,
    pub devices: usize,
    pub samples: usize,
    pub j_range: (f64, f64),
    pub sentences_range: (u32, u32),
    pub length_range: (u32, u32),
    pub bits_per_feature: u32,
    pub distance_range: (f64, f64),
    /// Jitter scores by the curve's mean step.
    pub jitter: bool,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            wpcn: WpcnParams::default(),
            devices: 10,
            samples: 1000,
            j_range: HIGH_J,
            sentences_range: (15, 30),
            length_range: (20, 32),
            bits_per_feature: 32,
            distance_range: (8.0, 10.0),
            jitter: true,
            seed: 0,
        }
    }
}

fn check_range<T: PartialOrd + Copy + fmt::Display>(
    name: &'static str,
    (lo, hi): (T, T),
) -> Result<()> {
    if lo <= hi {
        Ok(())
    } else {
        Err(invalid_param(name, format!("empty interval [{lo}, {hi}]")))
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.wpcn.validate()?;
        if self.devices < 1 {
            return Err(invalid_param("N", "must be at least 1"));
        }
        if self.samples < 1 {
            return Err(invalid_param("n_samples", "must be at least 1"));
        }
        check_range("j_range", self.j_range)?;
        if !(self.j_range.0 >= 0.0 && self.j_range.1 <= 1.0) {
            return Err(invalid_param("j_range", "must lie within [0, 1]"));
        }
        check_range("Ns_range", self.sentences_range)?;
        if self.sentences_range.0 < 1 {
            return Err(invalid_param("Ns_range", "sentence counts must be >= 1"));
        }
        check_range("L_range", self.length_range)?;
        if self.length_range.0 < 1 {
            return Err(invalid_param("L_range", "sentence lengths must be >= 1"));
        }
        if self.bits_per_feature < 1 {
            return Err(invalid_param("b_f", "must be at least 1"));
        }
        check_range("d_range", self.distance_range)?;
        if !(self.distance_range.0 > 0.0 && self.distance_range.1.is_finite()) {
            return Err(invalid_param("d_range", "distances must be finite and > 0"));
        }
        Ok(())
    }
}

/// Everything drawn and computed for one device in one auction round.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceDraw {
    pub distance: f64,
    pub profile: DeviceProfile,
    pub bits: f64,
    pub feature_dim: f64,
    pub valuation: Valuation,
}

fn uniform_f64<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Channel, workload, scores and valuation for a single device.
pub fn sample_device<R: Rng + ?Sized>(
    rng: &mut R,
    config: &ScenarioConfig,
    curves: &(ScoreCurve, ScoreCurve),
) -> Result<DeviceDraw> {
    let distance = uniform_f64(rng, config.distance_range);
    let sentences = rng.random_range(config.sentences_range.0..=config.sentences_range.1);
    let sentence_len = rng.random_range(config.length_range.0..=config.length_range.1);
    let sim_weight = uniform_f64(rng, config.j_range);
    let profile = DeviceProfile::new(sentences, sentence_len, config.bits_per_feature, sim_weight)?;

    let channel = sample_channel(rng, &config.wpcn, distance)?;
    let bits = bits_budget(&config.wpcn, &channel);
    let dim = feature_dim(bits, &profile);

    let (sim_curve, bleu_curve) = curves;
    let d = effective_dim(sim_curve, dim);
    let (sim, bleu) = if d == 0 {
        (0.0, 0.0)
    } else if config.jitter {
        (
            jitter_score(rng, sim_curve.score(d), sim_curve.jitter_half_width()),
            jitter_score(rng, bleu_curve.score(d), bleu_curve.jitter_half_width()),
        )
    } else {
        (sim_curve.score(d), bleu_curve.score(d))
    };
    Ok(DeviceDraw {
        distance,
        profile,
        bits,
        feature_dim: dim,
        valuation: valuation(&profile, sim, bleu, d)?,
    })
}

/// All device draws, sample-major.
pub fn generate_devices(config: &ScenarioConfig) -> Result<Vec<DeviceDraw>> {
    config.validate()?;
    let curves = builtin_curves();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    (0..config.samples * config.devices)
        .map(|_| sample_device(&mut rng, config, &curves))
        .collect()
}

/// Truthful bids (bid = valuation), one row per auction round.
pub fn generate_dataset(config: &ScenarioConfig) -> Result<BidTable> {
    let bids = generate_devices(config)?
        .into_iter()
        .map(|d| d.valuation.value)
        .collect();
    BidTable::new(config.devices, bids)
}

/// Bisects the budget gain `G` until the median feature dimension of devices
/// at `distance` equals `target_median`, using `draws` fixed device draws.
pub fn calibrate_budget_gain(
    config: &ScenarioConfig,
    distance: f64,
    target_median: f64,
    draws: usize,
    seed: u64,
) -> Result<f64> {
    config.validate()?;
    if draws == 0 || target_median.is_nan() || target_median <= 0.0 {
        return Err(Error::InvalidInput(
            "calibration needs draws > 0 and a positive target".into(),
        ));
    }
    let wpcn = &config.wpcn;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // (tau*rho*|h|^2*|g|^2, xi*|g|^2, R / (phi * N_s * L * b_f)) per draw.
    let samples: Vec<(f64, f64, f64)> = (0..draws)
        .map(|_| {
            let sentences = rng.random_range(config.sentences_range.0..=config.sentences_range.1);
            let len = rng.random_range(config.length_range.0..=config.length_range.1);
            let ch = sample_channel(&mut rng, wpcn, distance)?;
            let per_dim =
                f64::from(sentences) * f64::from(len) * f64::from(config.bits_per_feature);
            Ok((
                wpcn.tau * wpcn.rho() * ch.h_norm2() * ch.g_norm2(),
                wpcn.xi() * ch.g_norm2(),
                wpcn.rate / (wpcn.phi() * per_dim),
            ))
        })
        .collect::<Result<_>>()?;

    let median_dim = |gain: f64| {
        let mut dims: Vec<f64> = samples
            .iter()
            .map(|&(gain_term, cost, scale)| (gain * gain_term - cost).max(0.0) * scale)
            .collect();
        dims.sort_by(f64::total_cmp);
        let mid = dims.len() / 2;
        if dims.len() % 2 == 1 {
            dims[mid]
        } else {
            0.5 * (dims[mid - 1] + dims[mid])
        }
    };

    let (mut lo, mut hi) = (1.0, 2.0);
    if median_dim(lo) >= target_median {
        return Ok(1.0);
    }
    while median_dim(hi) < target_median {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::InvalidInput("calibration target unreachable".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if median_dim(mid) < target_median {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Mean revenue of the hard auction over every row of `bids`.
pub fn mean_hard_revenue(params: &AuctionNetParams, bids: &BidTable) -> f64 {
    if bids.is_empty() {
        return 0.0;
    }
    bids.rows()
        .map(|r| run_hard_auction(params, r).payment)
        .sum::<f64>()
        / bids.len() as f64
}

/// Training and evaluation results for one preference preset.
#[derive(Debug, Clone, PartialEq)]
pub struct RevenueSeries {
    pub j_range: (f64, f64),
    pub params: AuctionNetParams,
    /// Soft minibatch revenue per training iteration.
    pub history: Vec<f64>,
    /// SPA revenue on the training set.
    pub spa_revenue: f64,
    /// Hard-auction revenue of the trained mechanism on held-out data.
    pub heldout_revenue: f64,
    /// SPA revenue on the same held-out data.
    pub heldout_spa_revenue: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RevenueReport {
    pub low: RevenueSeries,
    pub high: RevenueSeries,
}

impl RevenueReport {
    /// `(iteration, dl_low, dl_high, spa_low, spa_high)`, iterations from 1.
    pub fn rows(&self) -> impl Iterator<Item = (usize, f64, f64, f64, f64)> + '_ {
        self.low
            .history
            .iter()
            .zip(&self.high.history)
            .enumerate()
            .map(|(i, (&lo, &hi))| (i + 1, lo, hi, self.low.spa_revenue, self.high.spa_revenue))
    }
}

/// Generates train and held-out sets for `scenario`, trains, and evaluates.
pub fn train_and_evaluate(
    scenario: &ScenarioConfig,
    auction: &AuctionConfig,
) -> Result<RevenueSeries> {
    let auction = AuctionConfig {
        bidders: scenario.devices,
        ..auction.clone()
    };
    let data = generate_dataset(scenario)?;
    let heldout = generate_dataset(&ScenarioConfig {
        seed: scenario.seed.wrapping_add(HELDOUT_SEED_OFFSET),
        ..scenario.clone()
    })?;
    let outcome = train(&auction, &data)?;
    Ok(RevenueSeries {
        j_range: scenario.j_range,
        heldout_revenue: mean_hard_revenue(&outcome.params, &heldout),
        heldout_spa_revenue: heldout.spa_revenue(),
        spa_revenue: data.spa_revenue(),
        history: outcome.history,
        params: outcome.params,
    })
}

/// Trains one mechanism per preference preset on matched seeds.
pub fn revenue_experiment(
    scenario: &ScenarioConfig,
    auction: &AuctionConfig,
) -> Result<RevenueReport> {
    let (low, high) = rayon::join(
        || {
            train_and_evaluate(
                &ScenarioConfig {
                    j_range: LOW_J,
                    ..scenario.clone()
                },
                auction,
            )
        },
        || {
            train_and_evaluate(
                &ScenarioConfig {
                    j_range: HIGH_J,
                    ..scenario.clone()
                },
                auction,
            )
        },
    );
    Ok(RevenueReport {
        low: low?,
        high: high?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParam {
    Tau,
    Distance,
    SentenceLength,
    Sentences,
}

impl SweepParam {
    pub const ALL: [SweepParam; 4] = [
        SweepParam::Tau,
        SweepParam::Distance,
        SweepParam::SentenceLength,
        SweepParam::Sentences,
    ];

    /// Default sweep points.
    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepParam::Tau => vec![0.8, 0.9, 1.0, 1.1, 1.2],
            SweepParam::Distance => vec![8.0, 9.0, 10.0, 11.0, 12.0],
            SweepParam::SentenceLength => (20..=32).step_by(2).map(f64::from).collect(),
            SweepParam::Sentences => (15..=30).step_by(3).map(f64::from).collect(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Tau => "tau",
            SweepParam::Distance => "d_AU",
            SweepParam::SentenceLength => "L",
            SweepParam::Sentences => "N_s",
        }
    }

    /// `config` with this parameter pinned to `value`.
    pub fn apply(self, config: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut out = config.clone();
        let integer = |v: f64| -> Result<u32> {
            if v >= 1.0 && v.fract() == 0.0 && v <= f64::from(u32::MAX) {
                Ok(v as u32)
            } else {
                Err(Error::InvalidInput(format!(
                    "{} sweep values must be positive integers, got {v}",
                    self.name()
                )))
            }
        };
        match self {
            SweepParam::Tau => out.wpcn.tau = value,
            SweepParam::Distance => out.distance_range = (value, value),
            SweepParam::SentenceLength => {
                let v = integer(value)?;
                out.length_range = (v, v);
            }
            SweepParam::Sentences => {
                let v = integer(value)?;
                out.sentences_range = (v, v);
            }
        }
        out.validate()?;
        Ok(out)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tau" => Ok(SweepParam::Tau),
            "d_AU" | "d_au" | "distance" => Ok(SweepParam::Distance),
            "L" | "sentence_length" => Ok(SweepParam::SentenceLength),
            "N_s" | "Ns" | "sentences" => Ok(SweepParam::Sentences),
            other => Err(Error::InvalidInput(format!(
                "unknown sweep parameter `{other}` (expected tau, d_AU, L or N_s)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub sweep_value: f64,
    /// Mean bid over every device of every sample.
    pub avg_bid: f64,
    /// Mean over samples of the highest bid.
    pub avg_highest_bid: f64,
}

impl MetricsRow {
    pub fn from_bids(sweep_value: f64, bids: &BidTable) -> Self {
        let rounds = bids.len().max(1) as f64;
        let avg_bid = bids.values().iter().sum::<f64>() / bids.values().len().max(1) as f64;
        let avg_highest_bid = bids
            .rows()
            .map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .sum::<f64>()
            / rounds;
        Self {
            sweep_value,
            avg_bid,
            avg_highest_bid,
        }
    }
}

/// One sweep point evaluated under both preference presets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub low: MetricsRow,
    pub high: MetricsRow,
}

/// Regenerates the dataset at each value of `param`. The point at index `i`
/// uses seed `config.seed + i` for both presets, so parallel and serial
/// evaluation agree.
pub fn sweep(config: &ScenarioConfig, param: SweepParam, values: &[f64]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::InvalidInput("sweep needs at least one value".into()));
    }
    values
        .par_iter()
        .enumerate()
        .map(|(i, &value)| {
            let pinned = ScenarioConfig {
                seed: config.seed.wrapping_add(i as u64),
                ..param.apply(config, value)?
            };
            let run = |j_range| -> Result<MetricsRow> {
                let bids = generate_dataset(&ScenarioConfig {
                    j_range,
                    ..pinned.clone()
                })?;
                Ok(MetricsRow::from_bids(value, &bids))
            };
            Ok(SweepRow {
                value,
                low: run(LOW_J)?,
                high: run(HIGH_J)?,
            })
        })
        .collect()
}
