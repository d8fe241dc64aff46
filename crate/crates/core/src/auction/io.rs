//! Plain-text parameter files.
//!
//! ```text
//! auction-params v1 N=<bidders> Q=<groups> S=<per_group>
//! <bidder> <q> <s> <log_w> <beta>
//! ...
//! ```
//!
//! Floats are written with 17 significant digits so reading a file back
//! reproduces the parameters bit-for-bit.

use std::io::{self, BufRead, Write};

use super::network::AuctionNetParams;
use crate::error::{Error, Result};

const MAGIC: &str = "auction-params";
const VERSION: &str = "v1";

pub fn write_params<W: Write>(params: &AuctionNetParams, mut out: W) -> io::Result<()> {
    writeln!(
        out,
        "{MAGIC} {VERSION} N={} Q={} S={}",
        params.bidders(),
        params.groups(),
        params.per_group()
    )?;
    for n in 0..params.bidders() {
        for q in 0..params.groups() {
            for s in 0..params.per_group() {
                let i = params.flat(n, q, s);
                writeln!(
                    out,
                    "{n} {q} {s} {:.16e} {:.16e}",
                    params.log_w()[i],
                    params.beta()[i]
                )?;
            }
        }
    }
    Ok(())
}

fn format_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Format {
        line,
        reason: reason.into(),
    }
}

fn header_field(token: Option<&str>, key: &str) -> Result<usize> {
    token
        .and_then(|t| t.strip_prefix(key))
        .and_then(|t| t.strip_prefix('='))
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| format_err(1, format!("expected `{key}=<integer>` in header")))
}

pub fn read_params<R: BufRead>(input: R) -> Result<AuctionNetParams> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| format_err(1, "empty file"))?;
    let header = header.map_err(|e| format_err(1, e.to_string()))?;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some(MAGIC) {
        return Err(format_err(1, format!("missing `{MAGIC}` header")));
    }
    match tokens.next() {
        Some(VERSION) => {}
        other => {
            return Err(format_err(1, format!("unsupported version {other:?}")));
        }
    }
    let bidders = header_field(tokens.next(), "N")?;
    let groups = header_field(tokens.next(), "Q")?;
    let per_group = header_field(tokens.next(), "S")?;
    let len = bidders * groups * per_group;

    let mut log_w = vec![0.0; len];
    let mut beta = vec![0.0; len];
    let mut seen = vec![false; len];
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(|e| format_err(line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(format_err(line_no, "expected `bidder q s log_w beta`"));
        }
        let index = |k: usize, bound: usize| -> Result<usize> {
            fields[k]
                .parse::<usize>()
                .ok()
                .filter(|&v| v < bound)
                .ok_or_else(|| format_err(line_no, format!("index `{}` out of range", fields[k])))
        };
        let (n, q, s) = (index(0, bidders)?, index(1, groups)?, index(2, per_group)?);
        let float = |k: usize| -> Result<f64> {
            fields[k]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format_err(line_no, format!("bad number `{}`", fields[k])))
        };
        let i = (n * groups + q) * per_group + s;
        if seen[i] {
            return Err(format_err(
                line_no,
                format!("duplicate entry ({n}, {q}, {s})"),
            ));
        }
        seen[i] = true;
        log_w[i] = float(3)?;
        beta[i] = float(4)?;
    }
    if let Some(missing) = seen.iter().position(|&b| !b) {
        return Err(format_err(
            0,
            format!("missing entry with flat index {missing}"),
        ));
    }
    AuctionNetParams::from_parts(bidders, groups, per_group, log_w, beta)
}
