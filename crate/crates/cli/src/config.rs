//! `key=value` run configuration with command-line overrides.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use wpcn_auction::experiments::SweepParam;
use wpcn_auction::{AuctionConfig, Error, ScenarioConfig};

/// Every key accepted in a config file or as a `--key value` flag.
pub const KEYS: &[(&str, &str)] = &[
    ("K", "H-AP antennas [10]"),
    ("eta", "energy conversion efficiency in [0, 1] [0.8]"),
    ("tau", "harvest time, s [1]"),
    ("P_dbm", "H-AP transmit power, dBm [35]"),
    ("sigma2_dbm", "noise power, dBm [-80]"),
    ("E_cir", "circuit energy, J [0.0005]"),
    ("R", "fixed rate, bit/s/Hz [2]"),
    ("alpha", "path-loss exponent [2]"),
    ("ref_loss", "attenuation at 1 m [0.001]"),
    ("budget_gain", "gain on |h|^2 |g|^2 [calibrated]"),
    ("N", "devices = bidders [10]"),
    ("n_samples", "auction rounds per dataset [1000]"),
    ("j_range", "similarity weight interval lo,hi [0.6,0.9]"),
    ("Ns_range", "sentences per device lo,hi [15,30]"),
    ("L_range", "words per sentence lo,hi [20,32]"),
    ("b_f", "bits per feature [32]"),
    ("d_range", "device distance interval, m [8,10]"),
    ("jitter", "jitter curve scores, true/false [true]"),
    ("seed", "random seed [0]"),
    ("Q", "linear-function groups [5]"),
    ("S", "functions per group [10]"),
    ("kappa", "softmax temperature [1000]"),
    ("lr", "SGD learning rate [0.001]"),
    ("batch_size", "SGD minibatch [100]"),
    ("iterations", "SGD steps [2000]"),
    ("out_dir", "output directory [out]"),
    ("params", "parameter file [<out_dir>/params.txt]"),
    ("data", "bid CSV to train on instead of generating one"),
    ("sweep", "tau, d_AU, L, N_s or all [all]"),
    (
        "sweep_values",
        "comma-separated sweep points [per-parameter axis]",
    ),
    ("eval_samples", "held-out rounds for eval [1000]"),
    (
        "ic_instances",
        "held-out rounds checked for IC regret [1000]",
    ),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub auction: AuctionConfig,
    pub out_dir: PathBuf,
    pub params: Option<PathBuf>,
    pub data: Option<PathBuf>,
    /// `None` sweeps all four parameters.
    pub sweep: Option<SweepParam>,
    pub sweep_values: Option<Vec<f64>>,
    pub eval_samples: usize,
    pub ic_instances: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            auction: AuctionConfig::default(),
            out_dir: PathBuf::from("out"),
            params: None,
            data: None,
            sweep: None,
            sweep_values: None,
            eval_samples: 1000,
            ic_instances: 1000,
        }
    }
}

impl RunConfig {
    pub fn params_path(&self) -> PathBuf {
        self.params
            .clone()
            .unwrap_or_else(|| self.out_dir.join("params.txt"))
    }

    /// Auction settings with the bidder count tied to the device count.
    pub fn auction(&self) -> AuctionConfig {
        AuctionConfig {
            bidders: self.scenario.devices,
            seed: self.scenario.seed,
            ..self.auction.clone()
        }
    }
}

/// Where a key's value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Default,
    Line(usize),
    Flag,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub origin: Origin,
    pub reason: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.origin {
            Origin::Line(n) => write!(f, "line {n}: `{}`: {}", self.key, self.reason),
            Origin::Flag => write!(f, "flag --{}: {}", self.key, self.reason),
            Origin::Default => write!(f, "`{}`: {}", self.key, self.reason),
        }
    }
}

impl std::error::Error for ConfigError {}

fn parse<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| format!("cannot parse `{value}`: {e}"))
}

fn pair<T: FromStr>(value: &str) -> Result<(T, T), String>
where
    T::Err: fmt::Display,
{
    match value.split(',').collect::<Vec<_>>()[..] {
        [lo, hi] => Ok((parse(lo)?, parse(hi)?)),
        _ => Err(format!("expected `lo,hi`, got `{value}`")),
    }
}

fn set(cfg: &mut RunConfig, key: &str, value: &str) -> Result<(), String> {
    let w = &mut cfg.scenario.wpcn;
    match key {
        "K" => w.antennas = parse(value)?,
        "eta" => w.eta = parse(value)?,
        "tau" => w.tau = parse(value)?,
        "P_dbm" => w.power_dbm = parse(value)?,
        "sigma2_dbm" => w.noise_dbm = parse(value)?,
        "E_cir" => w.circuit_energy = parse(value)?,
        "R" => w.rate = parse(value)?,
        "alpha" => w.path_loss_exponent = parse(value)?,
        "ref_loss" => w.ref_loss = parse(value)?,
        "budget_gain" => w.budget_gain = parse(value)?,
        "N" => cfg.scenario.devices = parse(value)?,
        "n_samples" => cfg.scenario.samples = parse(value)?,
        "j_range" => cfg.scenario.j_range = pair(value)?,
        "Ns_range" => cfg.scenario.sentences_range = pair(value)?,
        "L_range" => cfg.scenario.length_range = pair(value)?,
        "b_f" => cfg.scenario.bits_per_feature = parse(value)?,
        "d_range" => cfg.scenario.distance_range = pair(value)?,
        "jitter" => cfg.scenario.jitter = parse(value)?,
        "seed" => cfg.scenario.seed = parse(value)?,
        "Q" => cfg.auction.groups = parse(value)?,
        "S" => cfg.auction.per_group = parse(value)?,
        "kappa" => cfg.auction.kappa = parse(value)?,
        "lr" => cfg.auction.lr = parse(value)?,
        "batch_size" => cfg.auction.batch_size = parse(value)?,
        "iterations" => cfg.auction.iterations = parse(value)?,
        "out_dir" => cfg.out_dir = PathBuf::from(value.trim()),
        "params" => cfg.params = Some(PathBuf::from(value.trim())),
        "data" => cfg.data = Some(PathBuf::from(value.trim())),
        "sweep" => {
            cfg.sweep = match value.trim() {
                "all" => None,
                s => Some(s.parse().map_err(|e: Error| e.to_string())?),
            }
        }
        "sweep_values" => {
            cfg.sweep_values = Some(value.split(',').map(parse).collect::<Result<_, _>>()?)
        }
        "eval_samples" => cfg.eval_samples = parse(value)?,
        "ic_instances" => cfg.ic_instances = parse(value)?,
        _ => return Err("unknown key".into()),
    }
    Ok(())
}

/// Applies config text, then `overrides` as flags, then validates.
pub fn parse_config_str(
    text: &str,
    overrides: &[(String, String)],
) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut origins: HashMap<String, Origin> = HashMap::new();
    let entries = text
        .lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let line = raw.split('#').next().unwrap_or("").trim();
            (!line.is_empty()).then_some((Origin::Line(i + 1), line))
        })
        .map(|(origin, line)| match line.split_once('=') {
            Some((k, v)) => Ok((origin, k.trim().to_string(), v.trim().to_string())),
            None => Err(ConfigError {
                key: line.to_string(),
                origin,
                reason: "expected key=value".into(),
            }),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let flags = overrides
        .iter()
        .map(|(k, v)| (Origin::Flag, k.clone(), v.clone()));
    for (origin, key, value) in entries.into_iter().chain(flags) {
        set(&mut cfg, &key, &value).map_err(|reason| ConfigError {
            key: key.clone(),
            origin,
            reason,
        })?;
        origins.insert(key, origin);
    }
    validate(&cfg).map_err(|(key, reason)| ConfigError {
        origin: origins.get(key).copied().unwrap_or(Origin::Default),
        key: key.to_string(),
        reason,
    })?;
    Ok(cfg)
}

/// Reads `path` (if any) and applies `overrides` on top.
pub fn parse_config(
    path: Option<&Path>,
    overrides: &[(String, String)],
) -> Result<RunConfig, ConfigError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| ConfigError {
            key: "config".into(),
            origin: Origin::Flag,
            reason: format!("cannot read {}: {e}", p.display()),
        })?,
        None => String::new(),
    };
    parse_config_str(&text, overrides)
}

fn validate(cfg: &RunConfig) -> Result<(), (&'static str, String)> {
    let core = |e: Error| match e {
        Error::InvalidParameter { name, reason } => (name, reason),
        other => ("config", other.to_string()),
    };
    cfg.scenario.validate().map_err(core)?;
    cfg.auction().validate().map_err(core)?;
    if cfg.auction.lr <= 0.0 {
        return Err(("lr", "must be > 0".into()));
    }
    if cfg.eval_samples < 1 {
        return Err(("eval_samples", "must be at least 1".into()));
    }
    if let Some(values) = &cfg.sweep_values {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(("sweep_values", "values must be finite".into()));
        }
        if cfg.sweep.is_none() {
            return Err(("sweep_values", "needs a single `sweep` parameter".into()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = parse_config_str("", &[]).unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.scenario.wpcn.antennas, 10);
        assert_eq!(cfg.scenario.wpcn.eta, 0.8);
        assert_eq!(cfg.scenario.wpcn.power_dbm, 35.0);
    }

    #[test]
    fn comments_ranges_and_flags() {
        let text =
            "# scenario\ntau = 0.9  # shorter harvest\nj_range=0.1,0.4\njitter=false\n\nsweep=L\n";
        let cfg = parse_config_str(text, &flags(&[("tau", "1.2")])).unwrap();
        assert_eq!(cfg.scenario.wpcn.tau, 1.2);
        assert_eq!(cfg.scenario.j_range, (0.1, 0.4));
        assert!(!cfg.scenario.jitter);
        assert_eq!(cfg.sweep, Some(SweepParam::SentenceLength));
    }

    #[test]
    fn errors_name_key_and_line() {
        let err = parse_config_str("seed=1\neta=1.5\n", &[]).unwrap_err();
        assert_eq!(err.key, "eta");
        assert_eq!(err.origin, Origin::Line(2));
        assert!(err.to_string().contains("[0, 1]"), "{err}");

        let err = parse_config_str("\n\nfoo=3", &[]).unwrap_err();
        assert_eq!((err.key.as_str(), err.origin), ("foo", Origin::Line(3)));

        let err = parse_config_str("Q=many", &[]).unwrap_err();
        assert_eq!((err.key.as_str(), err.origin), ("Q", Origin::Line(1)));

        let err = parse_config_str("", &flags(&[("d_range", "12,8")])).unwrap_err();
        assert_eq!((err.key.as_str(), err.origin), ("d_range", Origin::Flag));

        let err = parse_config_str("lr=0", &[]).unwrap_err();
        assert_eq!(err.key, "lr");
    }

    #[test]
    fn every_documented_key_is_settable() {
        let mut cfg = RunConfig::default();
        for (key, _) in KEYS {
            let r = set(&mut cfg, key, "");
            assert_ne!(r.err().as_deref(), Some("unknown key"), "{key}");
        }
    }
}
