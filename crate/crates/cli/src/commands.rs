use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use wpcn_auction::auction::{ic_regret, read_params, run_hard_auction, train, write_params};
use wpcn_auction::diagnostics::{gradient_check, identity_spa_mismatches, inverse_roundtrip_error};
use wpcn_auction::experiments::{
    generate_dataset, generate_devices, mean_hard_revenue, revenue_experiment, sweep, SweepParam,
    HELDOUT_SEED_OFFSET,
};
use wpcn_auction::valuation::builtin_curves;
use wpcn_auction::{AuctionNetParams, BidTable, ScenarioConfig};

use crate::config::RunConfig;
use crate::output::{line_chart, write_atomic, write_csv, Series};
use crate::CliError;

/// Misreport grid for the IC check: 201 points on `[0, 1.2]`.
pub fn misreport_grid() -> Vec<f64> {
    (0..=200).map(|i| 1.2 * f64::from(i) / 200.0).collect()
}

pub const IC_TOLERANCE: f64 = 1e-9;
pub const GRADIENT_TOLERANCE: f64 = 1e-4;
pub const ROUNDTRIP_TOLERANCE: f64 = 1e-9;

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn read_bids(path: &Path, bidders: usize) -> Result<BidTable, CliError> {
    let runtime = |e: csv::Error| CliError::Runtime(format!("{}: {e}", path.display()));
    let mut reader =
        csv::Reader::from_reader(BufReader::new(File::open(path).map_err(|e| {
            CliError::Runtime(format!("cannot open {}: {e}", path.display()))
        })?));
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(runtime)?;
        if record.len() != bidders {
            return Err(CliError::Validation(format!(
                "{} row {}: {} bids but N={bidders}",
                path.display(),
                i + 1,
                record.len()
            )));
        }
        for field in &record {
            values.push(field.trim().parse::<f64>().map_err(|e| {
                CliError::Validation(format!("{} row {}: `{field}`: {e}", path.display(), i + 1))
            })?);
        }
    }
    Ok(BidTable::new(bidders, values)?)
}

fn bid_header(bidders: usize) -> Vec<String> {
    (0..bidders).map(|n| format!("bid_{n}")).collect()
}

fn write_bids(path: &Path, bids: &BidTable) -> Result<(), CliError> {
    let header = bid_header(bids.bidders());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(
        path,
        &header,
        bids.rows().map(|r| r.iter().copied().map(fmt).collect()),
    )?;
    Ok(())
}

pub fn generate(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let devices = generate_devices(&cfg.scenario)?;
    let n = cfg.scenario.devices;
    let bids = BidTable::new(n, devices.iter().map(|d| d.valuation.value).collect())?;
    let bids_path = cfg.out_dir.join("bids.csv");
    write_bids(&bids_path, &bids)?;

    let devices_path = cfg.out_dir.join("devices.csv");
    write_csv(
        &devices_path,
        &[
            "sample",
            "device",
            "distance",
            "sentences",
            "sentence_len",
            "sim_weight",
            "bits",
            "feature_dim",
            "effective_dim",
            "similarity",
            "bleu",
            "value",
        ],
        devices.iter().enumerate().map(|(i, d)| {
            vec![
                (i / n).to_string(),
                (i % n).to_string(),
                fmt(d.distance),
                d.profile.sentences.to_string(),
                d.profile.sentence_len.to_string(),
                fmt(d.profile.sim_weight),
                fmt(d.bits),
                fmt(d.feature_dim),
                d.valuation.effective_dim.to_string(),
                fmt(d.valuation.sim),
                fmt(d.valuation.bleu),
                fmt(d.valuation.value),
            ]
        }),
    )?;
    writeln!(out, "wrote {}", bids_path.display())?;
    writeln!(out, "wrote {}", devices_path.display())?;
    writeln!(out, "spa_revenue={}", bids.spa_revenue())?;
    Ok(())
}

pub fn train_cmd(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let data = match &cfg.data {
        Some(path) => read_bids(path, cfg.scenario.devices)?,
        None => generate_dataset(&cfg.scenario)?,
    };
    let outcome = train(&cfg.auction(), &data)?;
    let params_path = cfg.params_path();
    write_atomic(&params_path, |w| write_params(&outcome.params, w))?;
    let spa = data.spa_revenue();
    let history_path = cfg.out_dir.join("history.csv");
    write_csv(
        &history_path,
        &["iteration", "soft_revenue", "spa_revenue"],
        outcome
            .history
            .iter()
            .enumerate()
            .map(|(i, &r)| vec![(i + 1).to_string(), fmt(r), fmt(spa)]),
    )?;
    writeln!(out, "wrote {}", params_path.display())?;
    writeln!(out, "wrote {}", history_path.display())?;
    if let Some(last) = outcome.history.last() {
        writeln!(out, "final_soft_revenue={last}")?;
    }
    writeln!(
        out,
        "train_hard_revenue={}",
        mean_hard_revenue(&outcome.params, &data)
    )?;
    writeln!(out, "train_spa_revenue={spa}")?;
    Ok(())
}

/// Held-out evaluation of a trained mechanism.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub samples: usize,
    pub hard_revenue: f64,
    pub spa_revenue: f64,
    pub no_sales: usize,
    pub ir_violations: usize,
    pub ic_instances: usize,
    pub max_ic_regret: f64,
}

pub fn heldout_scenario(cfg: &RunConfig) -> ScenarioConfig {
    ScenarioConfig {
        seed: cfg.scenario.seed.wrapping_add(HELDOUT_SEED_OFFSET),
        samples: cfg.eval_samples,
        ..cfg.scenario.clone()
    }
}

pub fn evaluate(params: &AuctionNetParams, heldout: &BidTable, ic_instances: usize) -> EvalReport {
    let mut ir_violations = 0;
    let mut no_sales = 0;
    for bids in heldout.rows() {
        let outcome = run_hard_auction(params, bids);
        match outcome.winner {
            Some(w) if outcome.payment > bids[w] || outcome.payment < 0.0 => ir_violations += 1,
            Some(_) => {}
            None => no_sales += 1,
        }
    }
    let grid = misreport_grid();
    let checked = ic_instances.min(heldout.len());
    let mut max_ic_regret = 0.0f64;
    for bids in heldout.rows().take(checked) {
        for bidder in 0..bids.len() {
            max_ic_regret = max_ic_regret.max(ic_regret(params, bids, bidder, &grid));
        }
    }
    EvalReport {
        samples: heldout.len(),
        hard_revenue: mean_hard_revenue(params, heldout),
        spa_revenue: heldout.spa_revenue(),
        no_sales,
        ir_violations,
        ic_instances: checked,
        max_ic_regret,
    }
}

pub fn eval(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let path = cfg.params_path();
    let file = File::open(&path)
        .map_err(|e| CliError::Runtime(format!("cannot open {}: {e}", path.display())))?;
    let params = read_params(BufReader::new(file))
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    if params.bidders() != cfg.scenario.devices {
        return Err(CliError::Validation(format!(
            "{} holds {} bidders but N={}",
            path.display(),
            params.bidders(),
            cfg.scenario.devices
        )));
    }
    let heldout = generate_dataset(&heldout_scenario(cfg))?;
    let r = evaluate(&params, &heldout, cfg.ic_instances);
    writeln!(out, "samples={}", r.samples)?;
    writeln!(out, "hard_revenue={}", r.hard_revenue)?;
    writeln!(out, "spa_revenue={}", r.spa_revenue)?;
    writeln!(out, "revenue_gap={}", r.hard_revenue - r.spa_revenue)?;
    writeln!(out, "no_sales={}", r.no_sales)?;
    writeln!(out, "ir_violations={}", r.ir_violations)?;
    writeln!(out, "ic_instances={}", r.ic_instances)?;
    writeln!(out, "max_ic_regret={:e}", r.max_ic_regret)?;
    let mut failures = Vec::new();
    if r.ir_violations > 0 {
        failures.push(format!("{} IR violations", r.ir_violations));
    }
    if r.max_ic_regret > IC_TOLERANCE {
        failures.push(format!(
            "IC regret {:e} exceeds {IC_TOLERANCE:e}",
            r.max_ic_regret
        ));
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(failures))
    }
}

pub const SWEEP_HEADER: [&str; 5] = [
    "value",
    "avg_bid_low_j",
    "avg_highest_bid_low_j",
    "avg_bid_high_j",
    "avg_highest_bid_high_j",
];

pub fn sweep_cmd(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let params: Vec<SweepParam> = match cfg.sweep {
        Some(p) => vec![p],
        None => SweepParam::ALL.to_vec(),
    };
    for param in params {
        let values = cfg
            .sweep_values
            .clone()
            .unwrap_or_else(|| param.default_values());
        let rows = sweep(&cfg.scenario, param, &values)?;
        let csv_path = cfg.out_dir.join(format!("sweep_{}.csv", param.name()));
        write_csv(
            &csv_path,
            &SWEEP_HEADER,
            rows.iter().map(|r| {
                vec![
                    fmt(r.value),
                    fmt(r.low.avg_bid),
                    fmt(r.low.avg_highest_bid),
                    fmt(r.high.avg_bid),
                    fmt(r.high.avg_highest_bid),
                ]
            }),
        )?;
        let line = |label, color, f: fn(&wpcn_auction::SweepRow) -> f64| Series {
            label,
            color,
            points: rows.iter().map(|r| (r.value, f(r))).collect(),
        };
        let chart = line_chart(
            &format!("bids vs {}", param.name()),
            param.name(),
            "bid",
            &[
                line("avg bid, low j", "#1f77b4", |r| r.low.avg_bid),
                line("avg highest, low j", "#aec7e8", |r| r.low.avg_highest_bid),
                line("avg bid, high j", "#d62728", |r| r.high.avg_bid),
                line("avg highest, high j", "#ff9896", |r| r.high.avg_highest_bid),
            ],
        );
        let svg_path = cfg.out_dir.join(format!("sweep_{}.svg", param.name()));
        write_atomic(&svg_path, |w| w.write_all(chart.as_bytes()))?;
        writeln!(out, "wrote {}", csv_path.display())?;
        writeln!(out, "wrote {}", svg_path.display())?;
    }
    Ok(())
}

pub fn revenue_cmd(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let report = revenue_experiment(&cfg.scenario, &cfg.auction())?;
    let path = cfg.out_dir.join("revenue.csv");
    write_csv(
        &path,
        &[
            "iteration",
            "dl_rev_low_j",
            "dl_rev_high_j",
            "spa_low_j",
            "spa_high_j",
        ],
        report
            .rows()
            .map(|(i, a, b, c, d)| vec![i.to_string(), fmt(a), fmt(b), fmt(c), fmt(d)]),
    )?;
    writeln!(out, "wrote {}", path.display())?;
    for (name, s) in [("low_j", &report.low), ("high_j", &report.high)] {
        writeln!(out, "heldout_dl_{name}={}", s.heldout_revenue)?;
        writeln!(out, "heldout_spa_{name}={}", s.heldout_spa_revenue)?;
    }
    Ok(())
}

/// The built-in score tables, one `d, similarity, bleu1gram` row per dimension.
pub fn curves_text() -> String {
    let (sim, bleu) = builtin_curves();
    let mut text = String::from("d, similarity, bleu1gram\n");
    for ((d, s), (_, b)) in sim.points().zip(bleu.points()) {
        text.push_str(&format!("{d}, {s}, {b}\n"));
    }
    text
}

pub fn curves(out: &mut dyn Write) -> Result<(), CliError> {
    out.write_all(curves_text().as_bytes())?;
    Ok(())
}

pub fn selfcheck(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let seed = cfg.scenario.seed;
    let mut failures = Vec::new();
    let mut report =
        |name: &str, ok: bool, detail: String, out: &mut dyn Write| -> std::io::Result<()> {
            writeln!(out, "{} {name}: {detail}", if ok { "PASS" } else { "FAIL" })?;
            if !ok {
                failures.push(format!("{name}: {detail}"));
            }
            Ok(())
        };
    let g = gradient_check(100, seed);
    report(
        "gradient",
        g.worst_relative_error < GRADIENT_TOLERANCE,
        format!(
            "worst relative error {:e} over {} points ({} near-kink draws skipped)",
            g.worst_relative_error, g.points, g.rejected
        ),
        out,
    )?;
    let rt = inverse_roundtrip_error(10_000, seed);
    report(
        "inverse_roundtrip",
        rt < ROUNDTRIP_TOLERANCE,
        format!("max |inverse(transform(b)) - b| = {rt:e} over 10000 draws"),
        out,
    )?;
    let bidders = cfg.scenario.devices.max(2);
    let mismatches = identity_spa_mismatches(10_000, bidders, seed);
    report(
        "identity_spa",
        mismatches == 0,
        format!("{mismatches} of 10000 instances differ from SPA"),
        out,
    )?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(failures))
    }
}
