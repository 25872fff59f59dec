use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fqam_sim::harness::{
    load_config, run_campaign, run_comparison, write_campaign, write_comparison, DropContext, Mode, Scenario, SimConfig,
};

#[derive(Parser)]
#[command(name = "fqam-sim", version, about = "Multi-cell QAM/FQAM partitioning simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one campaign and write summary.json, samples.csv and cdf.csv.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Run all-QAM and hybrid over the same drops and report the differences.
    Compare {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// TOML config; defaults are used for missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    scenario: Option<ScenarioArg>,
    #[arg(long)]
    drops: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Space,
    Frequency,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    AllQam,
    Hybrid,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn build_config(c: &Common, mode: Option<ModeArg>) -> anyhow::Result<SimConfig> {
    let mut cfg = match &c.config {
        Some(p) => load_config(p)?,
        None => SimConfig::default(),
    };
    if let Some(s) = c.scenario {
        cfg.scenario = match s {
            ScenarioArg::Space => Scenario::Space,
            ScenarioArg::Frequency => Scenario::Frequency,
        };
    }
    if let Some(m) = mode {
        cfg.mode = match m {
            ModeArg::AllQam => Mode::AllQam,
            ModeArg::Hybrid => Mode::Hybrid,
        };
    }
    if let Some(d) = c.drops {
        cfg.mc.n_drops = d;
    }
    if let Some(s) = c.seed {
        cfg.mc.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate { common, mode } => {
            let cfg = build_config(&common, mode)?;
            let ctx = DropContext::new(cfg.clone())?;
            let camp = run_campaign(&ctx, cfg.mode, cfg.mc.n_drops, common.workers)?;
            write_campaign(&common.out, &camp, &cfg)?;
            let m = &camp.metrics;
            println!(
                "{} {}: p5 {:.4e} mean {:.4e} p95 {:.4e} bit/s over {} users",
                cfg.scenario, cfg.mode, m.p5.value, m.mean.value, m.p95.value, m.n_samples
            );
        }
        Command::Compare { common } => {
            let cfg = build_config(&common, None)?;
            let ctx = DropContext::new(cfg.clone())?;
            let cmp = run_comparison(&ctx, cfg.mc.n_drops, common.workers)?;
            write_comparison(&common.out, &cmp, &cfg)?;
            let s = cmp.summary();
            for (name, d) in [("p5", s.p5), ("mean", s.mean), ("p95", s.p95)] {
                println!(
                    "{name:>4}: all_qam {:.4e} hybrid {:.4e} ({:+.2}%){}",
                    d.all_qam,
                    d.hybrid,
                    100.0 * d.relative,
                    if d.separated { " [CIs separated]" } else { "" }
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
