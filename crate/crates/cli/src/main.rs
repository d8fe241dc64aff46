use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wpcn_auction_cli::config::KEYS;
use wpcn_auction_cli::{commands, parse_config, parse_overrides, CliError, RunConfig};

const EXIT_CODES: &str =
    "Exit codes: 0 success, 1 invalid configuration, 2 runtime failure, 3 failed check.";

fn keys_help() -> String {
    let mut s = String::from(
        "Configuration keys (file `key=value`, or `--key value` after the subcommand):\n",
    );
    for (k, doc) in KEYS {
        s.push_str(&format!("  {k:<14} {doc}\n"));
    }
    s.push('\n');
    s.push_str(EXIT_CODES);
    s
}

#[derive(Parser)]
#[command(
    name = "wpcn-auction",
    version,
    about = "Semantic-valuation auctions over a wireless powered network",
    after_long_help = keys_help()
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// key=value configuration file (# starts a comment).
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Overrides as `--key value`; these win over the file.
    #[arg(
        trailing_var_arg = true,
        allow_hyphen_values = true,
        value_name = "--KEY VALUE"
    )]
    overrides: Vec<String>,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig, CliError> {
        let overrides = parse_overrides(&self.overrides)?;
        Ok(parse_config(self.config.as_deref(), &overrides)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Draw devices and write the bid dataset.
    #[command(
        after_help = "Writes <out_dir>/bids.csv (columns bid_0..bid_{N-1}, one auction round per row) \
and <out_dir>/devices.csv (columns sample, device, distance, sentences, sentence_len, sim_weight, bits, \
feature_dim, effective_dim, similarity, bleu, value)."
    )]
    Generate(RunArgs),
    /// Train the auction on a generated (or `data=`) dataset.
    #[command(
        after_help = "Writes the parameter file (<out_dir>/params.txt unless `params` is set) and \
<out_dir>/history.csv with columns iteration, soft_revenue (minibatch soft revenue before each step), \
spa_revenue (SPA revenue of the training set)."
    )]
    Train(RunArgs),
    /// Evaluate trained parameters on a held-out dataset.
    #[command(
        after_help = "Prints samples, hard_revenue, spa_revenue, revenue_gap, no_sales, ir_violations, \
ic_instances, max_ic_regret. The held-out set uses seed + 1000003 and `eval_samples` rounds. IC regret \
is checked on the first `ic_instances` rounds over a 201-point misreport grid on [0, 1.2]. Exits 3 on \
any IR violation or regret above 1e-9."
    )]
    Eval(RunArgs),
    /// Bid statistics while sweeping tau, d_AU, L or N_s.
    #[command(
        after_help = "Writes <out_dir>/sweep_<param>.csv with columns value, avg_bid_low_j, \
avg_highest_bid_low_j, avg_bid_high_j, avg_highest_bid_high_j (low j ~ U[0.1,0.4], high j ~ U[0.6,0.9]) \
and a matching sweep_<param>.svg chart."
    )]
    Sweep(RunArgs),
    /// Train under both preference presets and log revenue per iteration.
    #[command(
        after_help = "Writes <out_dir>/revenue.csv with columns iteration, dl_rev_low_j, dl_rev_high_j, \
spa_low_j, spa_high_j and prints held-out hard-auction and SPA revenues per preset."
    )]
    Revenue(RunArgs),
    /// Print the built-in similarity and BLEU score tables.
    #[command(
        after_help = "Prints a header then one `d, similarity, bleu1gram` row per feature dimension."
    )]
    Curves,
    /// Gradient, inverse-roundtrip and identity-versus-SPA checks.
    #[command(after_help = "Prints one PASS/FAIL line per check and exits 3 if any fails.")]
    Selfcheck(RunArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Generate(a) => commands::generate(&a.load()?, &mut out),
        Command::Train(a) => commands::train_cmd(&a.load()?, &mut out),
        Command::Eval(a) => commands::eval(&a.load()?, &mut out),
        Command::Sweep(a) => commands::sweep_cmd(&a.load()?, &mut out),
        Command::Revenue(a) => commands::revenue_cmd(&a.load()?, &mut out),
        Command::Curves => commands::curves(&mut out),
        Command::Selfcheck(a) => commands::selfcheck(&a.load()?, &mut out),
    }?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            for line in e.to_string().lines() {
                eprintln!("error: {line}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
