use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use cfsel::rate::db_to_linear;
use cfsel::thresholds::{build_table_with, BuildOptions};
use cfsel::{Channel, RingId};
use cfsel_bench::{
    parse_gains, parse_list, run_complexity_experiment, run_rate_experiment, scaling_check, write_csv, Algorithm,
    BenchError, ExperimentConfig, Result,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cfsel-bench", about = "Coefficient selection experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a threshold table offline.
    GenTable {
        #[arg(long, default_value = "zi")]
        ring: String,
        /// User counts, e.g. "5,10".
        #[arg(long, default_value = "5")]
        users: String,
        /// Bin edges in dB, e.g. "5:40:5".
        #[arg(long, default_value = "5:40:5")]
        snr_bins: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        table_out: Option<PathBuf>,
        /// Bins with estimated work `trials·SNR·L²` above this are marked E.
        #[arg(long, default_value_t = 1e12)]
        work_budget: f64,
    },
    /// Mean rates per SNR point.
    RateBench(BenchArgs),
    /// Mean flops and candidate counts per SNR point.
    FlopsBench(BenchArgs),
    /// Log-log scaling of candidate counts and the `|h_max|²` bound.
    ScalingCheck {
        #[command(flatten)]
        bench: BenchArgs,
        /// User counts for the L-exponent regression.
        #[arg(long, default_value = "3,4,5,6")]
        l_values: String,
        #[arg(long, default_value_t = 100_000)]
        gain_draws: usize,
    },
    /// Run every selector on one channel.
    Select {
        /// Gains as "re,im;re,im;...".
        #[arg(long, allow_hyphen_values = true)]
        h: String,
        #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
        snr_db: f64,
        #[arg(long, default_value = "zi")]
        ring: String,
        #[arg(long)]
        table: Option<PathBuf>,
    },
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "zi")]
    ring: String,
    #[arg(long, default_value_t = 5)]
    users: usize,
    /// SNR points in dB, e.g. "5:40:5".
    #[arg(long, default_value = "5:40:5", allow_hyphen_values = true)]
    snr_db: String,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "ex2,ll,clll,linear")]
    algorithms: String,
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl BenchArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::new(
            ring(&self.ring)?,
            self.users,
            parse_list(&self.snr_db)?,
            self.trials,
            self.seed,
            parse_list::<Algorithm>(&self.algorithms)?,
        );
        cfg.table_path = self.table.clone();
        Ok(cfg)
    }
}

fn ring(s: &str) -> Result<RingId> {
    RingId::from_short_name(s).ok_or_else(|| BenchError::Config(format!("unknown ring '{s}' (expected zi or zw)")))
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::GenTable { ring: r, users, snr_bins, trials, seed, table_out, work_budget } => {
            let users: Vec<usize> = parse_list(&users)?;
            let edges: Vec<f64> = parse_list(&snr_bins)?;
            let report = build_table_with(ring(&r)?, &users, &edges, trials, seed, BuildOptions { work_budget })?;
            for (l, lo) in &report.budget_marked {
                eprintln!("warning: L={l} bin at {lo} dB exceeds the work budget and is marked E");
            }
            for l in &report.non_monotone {
                eprintln!("warning: L={l} raw minima were not monotone; lowered to the later minimum");
            }
            output(&table_out)?.write_all(report.table.serialize().as_bytes())?;
        }
        Cmd::RateBench(b) => {
            let rows = run_rate_experiment(&b.config()?)?;
            write_csv(&rows, output(&b.out)?)?;
        }
        Cmd::FlopsBench(b) => {
            let rows = run_complexity_experiment(&b.config()?)?;
            write_csv(&rows, output(&b.out)?)?;
        }
        Cmd::ScalingCheck { bench, l_values, gain_draws } => {
            let report = scaling_check(&bench.config()?, &parse_list(&l_values)?, gain_draws)?;
            output(&bench.out)?.write_all(report.to_text().as_bytes())?;
        }
        Cmd::Select { h, snr_db, ring: r, table } => {
            let ring = ring(&r)?;
            let ch = Channel::new(parse_gains(&h)?, db_to_linear(snr_db))?;
            let mut cfg = ExperimentConfig::new(ring, ch.users(), vec![snr_db], 1, 0, vec![]);
            cfg.table_path = table;
            let table = cfg.load_table()?;
            let mut out = io::stdout().lock();
            writeln!(out, "algorithm,a,rate,flops,candidates")?;
            for alg in Algorithm::ALL {
                match alg.select(&ch, ring, Some(&table)) {
                    Ok(r) => writeln!(
                        out,
                        "{alg},\"{}\",{},{},{}",
                        r.a_opt,
                        r.rate,
                        r.flops.total_flops(),
                        r.candidates_examined
                    )?,
                    Err(e) => writeln!(out, "{alg},,,,\"{e}\"")?,
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
