//! Semantic valuation of a device's bit budget.
//!
//! The bit budget fixes how many feature dimensions `D` per token the device
//! can afford. Similarity and 1-gram BLEU for that `D` come from tabulated
//! curves of a pre-trained semantic codec, jittered by the mean step of the
//! curve, and mixed into a single valuation by the device's preference `j`.

use std::collections::HashMap;
use std::hash::Hash;

use rand::Rng;

use crate::error::{invalid_param, Error, Result};

const SIMILARITY_TABLE: [f64; 16] = [
    0.39550235, 0.40009948, 0.40945041, 0.41866887, 0.42247792, 0.42490115, 0.4295931, 0.43368545,
    0.43733177, 0.4519554, 0.47728359, 0.51547686, 0.55437698, 0.61085957, 0.7460733, 0.86169747,
];

const BLEU1_TABLE: [f64; 16] = [
    0.0944817, 0.09667912, 0.09386748, 0.10047062, 0.10116262, 0.10300542, 0.11076793, 0.11739845,
    0.12781957, 0.15357989, 0.1940025, 0.27020956, 0.34242301, 0.44607532, 0.65054165, 0.82109432,
];

/// Lookup table `d -> score` over consecutive dimensions `1..=max_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreCurve {
    scores: Vec<f64>,
    jitter_half_width: f64,
}

impl ScoreCurve {
    /// Builds a curve from `(d, score)` points. Dimensions must be exactly
    /// `1, 2, ..., d1` in order and scores must lie in `[0, 1]`.
    pub fn new(points: &[(u32, f64)]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput(
                "score curve needs at least one point".into(),
            ));
        }
        for (i, &(d, s)) in points.iter().enumerate() {
            if d as usize != i + 1 {
                return Err(Error::InvalidInput(format!(
                    "score curve dimensions must be consecutive from 1; found {d} at position {i}"
                )));
            }
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::InvalidInput(format!(
                    "score {s} at d={d} is outside [0, 1]"
                )));
            }
        }
        let scores: Vec<f64> = points.iter().map(|&(_, s)| s).collect();
        // Mean of successive differences, averaged explicitly.
        let jitter_half_width = if scores.len() < 2 {
            0.0
        } else {
            scores.windows(2).map(|w| w[1] - w[0]).sum::<f64>() / (scores.len() - 1) as f64
        };
        Ok(Self {
            scores,
            jitter_half_width,
        })
    }

    fn from_table(table: &[f64]) -> Self {
        let points: Vec<(u32, f64)> = table
            .iter()
            .enumerate()
            .map(|(i, &s)| (i as u32 + 1, s))
            .collect();
        Self::new(&points).expect("built-in table is valid")
    }

    /// Largest tabulated dimension `d1`.
    pub fn max_dim(&self) -> u32 {
        self.scores.len() as u32
    }

    /// Score at integer dimension `d`; 0 for `d = 0`, clamped above at `d1`.
    pub fn score(&self, d: u32) -> f64 {
        match d {
            0 => 0.0,
            d => self.scores[(d.min(self.max_dim()) - 1) as usize],
        }
    }

    /// Jitter half-width `mu_d`, the mean step between adjacent dimensions.
    pub fn jitter_half_width(&self) -> f64 {
        self.jitter_half_width
    }

    pub fn points(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.scores
            .iter()
            .enumerate()
            .map(|(i, &s)| (i as u32 + 1, s))
    }
}

/// The similarity and 1-gram BLEU curves of the semantic codec trained with
/// 16 output dimensions.
pub fn builtin_curves() -> (ScoreCurve, ScoreCurve) {
    (
        ScoreCurve::from_table(&SIMILARITY_TABLE),
        ScoreCurve::from_table(&BLEU1_TABLE),
    )
}

/// Text workload and preference of one device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceProfile {
    pub sentences: u32,
    pub sentence_len: u32,
    pub bits_per_feature: u32,
    /// Weight `j` on similarity; BLEU gets `1 - j`.
    pub sim_weight: f64,
}

impl DeviceProfile {
    pub fn new(
        sentences: u32,
        sentence_len: u32,
        bits_per_feature: u32,
        sim_weight: f64,
    ) -> Result<Self> {
        if sentences == 0 {
            return Err(invalid_param("N_s", "must be at least 1"));
        }
        if sentence_len == 0 {
            return Err(invalid_param("L", "must be at least 1"));
        }
        if bits_per_feature == 0 {
            return Err(invalid_param("b_f", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&sim_weight) {
            return Err(invalid_param(
                "j",
                format!("{sim_weight} is outside [0, 1]"),
            ));
        }
        Ok(Self {
            sentences,
            sentence_len,
            bits_per_feature,
            sim_weight,
        })
    }

    pub fn bleu_weight(&self) -> f64 {
        1.0 - self.sim_weight
    }

    /// Bits needed for one feature dimension across the whole workload.
    pub fn bits_per_dimension(&self) -> f64 {
        f64::from(self.sentences) * f64::from(self.sentence_len) * f64::from(self.bits_per_feature)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Valuation {
    pub sim: f64,
    pub bleu: f64,
    pub value: f64,
    pub effective_dim: u32,
}

/// Affordable feature dimension `bits / (N_s * L * b_f)`.
pub fn feature_dim(bits: f64, profile: &DeviceProfile) -> f64 {
    bits / profile.bits_per_dimension()
}

/// Integer dimension actually decodable: floored, then clamped to `[0, d1]`.
pub fn effective_dim(curve: &ScoreCurve, dim: f64) -> u32 {
    if dim.is_nan() || dim < 1.0 {
        return 0;
    }
    let floored = dim.floor();
    if floored >= f64::from(curve.max_dim()) {
        curve.max_dim()
    } else {
        floored as u32
    }
}

pub fn lookup_score(curve: &ScoreCurve, dim: f64) -> f64 {
    curve.score(effective_dim(curve, dim))
}

/// Uniform draw in `[base - mu_d, base + mu_d]`, clamped to `[0, 1]`.
pub fn jitter_score<R: Rng + ?Sized>(rng: &mut R, base: f64, half_width: f64) -> f64 {
    if half_width <= 0.0 {
        return base;
    }
    rng.random_range(base - half_width..=base + half_width)
        .clamp(0.0, 1.0)
}

/// `v = j * sim + (1 - j) * bleu`.
pub fn valuation(
    profile: &DeviceProfile,
    sim: f64,
    bleu: f64,
    effective_dim: u32,
) -> Result<Valuation> {
    for (name, s) in [("similarity", sim), ("bleu", bleu)] {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidInput(format!(
                "{name} score {s} is outside [0, 1]"
            )));
        }
    }
    let value = profile.sim_weight * sim + profile.bleu_weight() * bleu;
    Ok(Valuation {
        sim,
        bleu,
        value,
        effective_dim,
    })
}

fn ngram_counts<T: Eq + Hash>(tokens: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Sentence BLEU with clipped i-gram precisions and no smoothing.
///
/// `weights[i]` weighs the `(i + 1)`-gram precision. The length term is
/// `min(1 - len(candidate) / len(reference), 0)`. Orders with zero weight are
/// skipped; any weighted order with zero precision yields 0.
pub fn bleu_score<T: Eq + Hash>(candidate: &[T], reference: &[T], weights: &[f64]) -> Result<f64> {
    if candidate.is_empty() || reference.is_empty() {
        return Err(Error::InvalidInput("BLEU needs non-empty sequences".into()));
    }
    if weights.is_empty() || weights.iter().any(|&u| u.is_nan() || u < 0.0) {
        return Err(Error::InvalidInput(
            "BLEU weights must be non-negative".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "BLEU weights sum to {total}, expected 1"
        )));
    }
    let max_order = weights.len();
    if max_order > candidate.len().min(reference.len()) {
        return Err(Error::InvalidInput(format!(
            "{max_order}-gram BLEU needs sequences of at least that length"
        )));
    }

    let mut log_bleu = (1.0 - candidate.len() as f64 / reference.len() as f64).min(0.0);
    for (i, &u) in weights.iter().enumerate() {
        if u == 0.0 {
            continue;
        }
        let n = i + 1;
        let cand = ngram_counts(candidate, n);
        let refc = ngram_counts(reference, n);
        let matched: usize = cand
            .iter()
            .map(|(gram, &c)| c.min(refc.get(gram).copied().unwrap_or(0)))
            .sum();
        if matched == 0 {
            return Ok(0.0);
        }
        let possible = candidate.len() + 1 - n;
        log_bleu += u * (matched as f64 / possible as f64).ln();
    }
    Ok(log_bleu.exp())
}

/// Cosine of the angle between two embedding vectors.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() || u.is_empty() {
        return Err(Error::InvalidInput(format!(
            "embeddings must have equal nonzero length (got {} and {})",
            u.len(),
            v.len()
        )));
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|b| b * b).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::InvalidInput(
            "cosine similarity of a zero vector".into(),
        ));
    }
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn builtin_endpoints_and_half_widths() {
        let (sim, bleu) = builtin_curves();
        assert_eq!(sim.max_dim(), 16);
        assert_eq!(sim.score(16), 0.86169747);
        assert_eq!(bleu.score(1), 0.0944817);
        assert!((sim.jitter_half_width() - 0.03107967).abs() < 1e-8);
        assert!((bleu.jitter_half_width() - 0.04844084).abs() < 1e-8);
    }

    #[test]
    fn curve_rejects_gaps_and_out_of_range() {
        assert!(ScoreCurve::new(&[(1, 0.1), (3, 0.2)]).is_err());
        assert!(ScoreCurve::new(&[(1, 0.1), (2, 1.2)]).is_err());
        assert!(ScoreCurve::new(&[(0, 0.1)]).is_err());
        assert!(ScoreCurve::new(&[]).is_err());
    }

    #[test]
    fn feature_dim_examples() {
        let p = DeviceProfile::new(20, 25, 32, 0.5).unwrap();
        assert_eq!(feature_dim(256_000.0, &p), 16.0);
        assert_eq!(feature_dim(0.0, &p), 0.0);
        assert_eq!(feature_dim(p.bits_per_dimension(), &p), 1.0);
    }

    #[test]
    fn lookup_floors_and_clamps() {
        let (sim, bleu) = builtin_curves();
        assert_eq!(lookup_score(&sim, 16.7), 0.86169747);
        assert_eq!(lookup_score(&sim, 1e9), 0.86169747);
        assert_eq!(lookup_score(&sim, 0.4), 0.0);
        assert_eq!(lookup_score(&sim, 0.0), 0.0);
        assert_eq!(lookup_score(&sim, 12.9), 0.51547686);
        // BLEU dips at d = 3; lookup must return the raw table value.
        assert!(lookup_score(&bleu, 3.0) < lookup_score(&bleu, 2.0));
    }

    #[test]
    fn jitter_interval_and_degenerate_width() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(jitter_score(&mut rng, 0.42, 0.0), 0.42);
        let (sim, _) = builtin_curves();
        let mu = sim.jitter_half_width();
        for _ in 0..10_000 {
            let s = jitter_score(&mut rng, 0.86169747, mu);
            assert!((0.83061780 - 1e-8..=0.89277714 + 1e-8).contains(&s));
        }
        for _ in 0..1000 {
            let s = jitter_score(&mut rng, 0.99, 0.05);
            assert!((0.0..=1.0).contains(&s));
        }
    }

    #[test]
    fn jitter_mean_matches_base() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (base, mu) = (0.5, 0.03107967);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| jitter_score(&mut rng, base, mu))
            .sum::<f64>()
            / n as f64;
        // Standard error of U[-mu, mu] is mu / sqrt(3n); allow 3 of them.
        assert!((mean - base).abs() < 3.0 * mu / (3.0 * n as f64).sqrt());
    }

    #[test]
    fn valuation_examples() {
        let p = DeviceProfile::new(1, 1, 32, 0.5).unwrap();
        assert!((valuation(&p, 0.6, 0.4, 1).unwrap().value - 0.5).abs() < 1e-15);
        let p = DeviceProfile::new(1, 1, 32, 1.0).unwrap();
        assert_eq!(valuation(&p, 0.7, 0.1, 1).unwrap().value, 0.7);
        let p = DeviceProfile::new(1, 1, 32, 0.25).unwrap();
        let v = valuation(&p, 0.86169747, 0.82109432, 16).unwrap();
        assert!((v.value - 0.83124511).abs() < 1e-8);
        assert!(valuation(&p, 1.1, 0.2, 1).is_err());
        assert!(valuation(&p, 0.1, -0.2, 1).is_err());
    }

    #[test]
    fn profile_validation() {
        assert!(DeviceProfile::new(0, 20, 32, 0.5).is_err());
        assert!(DeviceProfile::new(15, 0, 32, 0.5).is_err());
        assert!(DeviceProfile::new(15, 20, 0, 0.5).is_err());
        assert!(DeviceProfile::new(15, 20, 32, 1.01).is_err());
    }

    #[test]
    fn bleu_examples() {
        let a = ["a", "b", "c", "d"];
        assert_eq!(bleu_score(&a, &a, &[1.0]).unwrap(), 1.0);
        assert!((bleu_score(&a, &a, &[0.25; 4]).unwrap() - 1.0).abs() < 1e-15);
        let cand = ["a", "b", "c", "d"];
        let refr = ["a", "b", "x", "d"];
        assert!((bleu_score(&cand, &refr, &[1.0]).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(bleu_score(&["a", "b"], &["c", "d"], &[1.0]).unwrap(), 0.0);

        let empty: [&str; 0] = [];
        assert!(bleu_score(&empty, &a, &[1.0]).is_err());
        assert!(bleu_score(&a, &empty, &[1.0]).is_err());
        assert!(bleu_score(&a, &a, &[0.5, 0.4]).is_err());
        assert!(bleu_score(&["a"], &a, &[0.5, 0.5]).is_err());
    }

    #[test]
    fn cosine_examples() {
        let u = [1.0, 2.0, 2.0];
        assert!((cosine_similarity(&u, &u).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 3.0]).unwrap(), 0.0);
        let c = cosine_similarity(&u, &[2.0, 1.0, 2.0]).unwrap();
        assert!((c - 8.0 / 9.0).abs() < 1e-15);
        assert!(cosine_similarity(&[0.0, 0.0], &[1.0, 1.0]).is_err());
        assert!(cosine_similarity(&[1.0], &[1.0, 1.0]).is_err());
    }
}
