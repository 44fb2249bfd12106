//! Command-line front end: Q-table training, single simulations, and the
//! full benchmark matrix.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dutysim::config::load_config;
use dutysim::qtable::QTable;
use dutysim::report::{
    energy_breakdown_csv, energy_breakdown_svg, results_csv, retrain_events_csv, summary_csv,
    BenchReport,
};
use dutysim::sim::{run_episode_traced, train_qtable, PolicyKind, SimConfig, SimResult};

#[derive(Parser)]
#[command(name = "dutysim", version, about = "Battery-life benchmark for duty-cycle optimization policies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Configuration file (key = value lines); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base random seed (overrides the config file).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Train a Q-table and write it to disk.
    Train {
        #[command(flatten)]
        common: CommonOpts,
        /// Anomaly ratio override.
        #[arg(long)]
        ratio: Option<f64>,
        /// Number of training episodes (overrides the config file).
        #[arg(long)]
        episodes: Option<u32>,
        /// Output path for the 816-byte Q-table file.
        #[arg(long, default_value = "qtable.bin")]
        out: PathBuf,
    },
    /// Run a single episode and print the result.
    Simulate {
        #[command(flatten)]
        common: CommonOpts,
        /// Policy to run: static, dynamic, or autonomous.
        #[arg(long)]
        policy: PolicyKind,
        /// Trained Q-table (required for the autonomous policy).
        #[arg(long)]
        qtable: Option<PathBuf>,
        /// Anomaly ratio override.
        #[arg(long)]
        ratio: Option<f64>,
        /// Emit the result as JSON instead of the human-readable summary.
        #[arg(long)]
        json: bool,
    },
    /// Run the policy × ratio × seed benchmark matrix and write CSV artifacts.
    Bench {
        #[command(flatten)]
        common: CommonOpts,
        /// Comma-separated anomaly ratios.
        #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.10, 0.20, 0.40])]
        ratios: Vec<f64>,
        /// Comma-separated policies.
        #[arg(long, value_delimiter = ',', default_values_t = PolicyKind::ALL)]
        policies: Vec<PolicyKind>,
        /// Explicit comma-separated seed list (overrides --num-seeds).
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Number of consecutive seeds starting at the base seed.
        #[arg(long, default_value_t = 10)]
        num_seeds: u64,
        /// Training episodes for the per-ratio Q-tables.
        #[arg(long)]
        episodes: Option<u32>,
        /// Use one pre-trained Q-table for all ratios instead of training.
        #[arg(long)]
        qtable: Option<PathBuf>,
        /// Output directory for results.csv, summary.csv, and plot data.
        #[arg(long, default_value = "bench_out")]
        out: PathBuf,
        /// Also write a self-contained SVG energy-breakdown chart per ratio.
        #[arg(long)]
        svg: bool,
    },
}

fn load(common: &CommonOpts) -> Result<SimConfig, String> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path).map_err(|e| e.to_string())?,
        None => SimConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(AppError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

enum AppError {
    Usage(String),
    Runtime(String),
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Train { common, ratio, episodes, out } => cmd_train(&common, ratio, episodes, &out),
        Command::Simulate { common, policy, qtable, ratio, json } => {
            cmd_simulate(&common, policy, qtable.as_deref(), ratio, json)
        }
        Command::Bench { common, ratios, policies, seeds, num_seeds, episodes, qtable, out, svg } => {
            let seeds = seeds.unwrap_or_default();
            cmd_bench(BenchOpts {
                common,
                ratios,
                policies,
                seeds,
                num_seeds,
                episodes,
                qtable,
                out,
                svg,
            })
        }
    }
}

fn cmd_train(
    common: &CommonOpts,
    ratio: Option<f64>,
    episodes: Option<u32>,
    out: &Path,
) -> Result<(), AppError> {
    let mut cfg = load(common).map_err(AppError::Usage)?;
    if let Some(r) = ratio {
        if !(0.0..=1.0).contains(&r) {
            return Err(AppError::Usage(format!("--ratio {r} must be in [0, 1]")));
        }
        cfg.anomaly_ratio = r;
    }
    let episodes = episodes.unwrap_or(cfg.train_episodes);
    let (table, summary) = train_qtable(&cfg, episodes, cfg.hyperparams);
    table
        .save(out)
        .map_err(|e| AppError::Runtime(format!("writing {}: {e}", out.display())))?;
    println!("trained {} episodes ({} decision steps)", summary.episodes, summary.decision_steps);
    println!("final epsilon: {:.6}", summary.final_epsilon);
    println!("final alpha:   {:.6}", summary.final_alpha);
    println!(
        "visited-state coverage: {:.1}% of {} states",
        summary.visited_state_fraction * 100.0,
        dutysim::qtable::BATTERY_BINS * dutysim::qtable::COUNT_BINS
    );
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_simulate(
    common: &CommonOpts,
    policy: PolicyKind,
    qtable: Option<&Path>,
    ratio: Option<f64>,
    json: bool,
) -> Result<(), AppError> {
    let mut cfg = load(common).map_err(AppError::Usage)?;
    if let Some(r) = ratio {
        if !(0.0..=1.0).contains(&r) {
            return Err(AppError::Usage(format!("--ratio {r} must be in [0, 1]")));
        }
        cfg.anomaly_ratio = r;
    }

    let table = match (policy, qtable) {
        (PolicyKind::Autonomous, Some(path)) => Some(
            QTable::load(path)
                .map_err(|e| AppError::Runtime(format!("loading {}: {e}", path.display())))?,
        ),
        (PolicyKind::Autonomous, None) => {
            return Err(AppError::Usage(
                "the autonomous policy requires --qtable <path>".to_string(),
            ));
        }
        _ => None,
    };

    let result = run_episode_traced(&cfg, policy, table.as_ref(), false);
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&result)
                .map_err(|e| AppError::Runtime(e.to_string()))?
        );
    } else {
        print_human(&cfg, &result);
    }
    Ok(())
}

fn print_human(cfg: &SimConfig, r: &SimResult) {
    let hours = r.battery_life_hours as f64;
    println!("policy:        {}", r.policy.name());
    println!("anomaly ratio: {}", r.anomaly_ratio);
    println!("seed:          {}", r.seed);
    println!(
        "battery life:  {} h  ({:.2} years at 8,760 h/yr; {:.2} years at 13,718 h/yr)",
        r.battery_life_hours,
        hours / 8760.0,
        hours / 13_718.0
    );
    println!("iterations:    {}", r.completed_iterations);
    let total = r.ledger.total().uwh() as f64;
    let pct = |e: dutysim::Energy| 100.0 * e.uwh() as f64 / total.max(1.0);
    println!("energy ledger ({} µWh consumed of {} µWh):", r.ledger.total().uwh(), cfg.battery_capacity.uwh());
    println!("  sleep:   {:>12} µWh  ({:.2}%)", r.ledger.sleep.uwh(), pct(r.ledger.sleep));
    println!("  capture: {:>12} µWh  ({:.2}%)", r.ledger.capture.uwh(), pct(r.ledger.capture));
    println!("  infer:   {:>12} µWh  ({:.2}%)", r.ledger.infer.uwh(), pct(r.ledger.infer));
    println!("  upload:  {:>12} µWh  ({:.2}%)", r.ledger.upload.uwh(), pct(r.ledger.upload));
    println!("  train:   {:>12} µWh  ({:.2}%)", r.ledger.train.uwh(), pct(r.ledger.train));
    println!(
        "counts: samples {} | anomalies {} | onboard {} | uploads {} | retrains {}/{}",
        r.counts.samples,
        r.counts.anomalies,
        r.counts.onboard_classified,
        r.counts.uploads,
        r.counts.retrain_successes,
        r.counts.retrain_attempts,
    );
}

struct BenchOpts {
    common: CommonOpts,
    ratios: Vec<f64>,
    policies: Vec<PolicyKind>,
    seeds: Vec<u64>,
    num_seeds: u64,
    episodes: Option<u32>,
    qtable: Option<PathBuf>,
    out: PathBuf,
    svg: bool,
}

fn cmd_bench(opts: BenchOpts) -> Result<(), AppError> {
    let cfg = load(&opts.common).map_err(AppError::Usage)?;
    if opts.ratios.is_empty() || opts.policies.is_empty() {
        return Err(AppError::Usage("need at least one ratio and one policy".to_string()));
    }
    for &r in &opts.ratios {
        if !(0.0..=1.0).contains(&r) {
            return Err(AppError::Usage(format!("ratio {r} must be in [0, 1]")));
        }
    }
    let seeds: Vec<u64> = if opts.seeds.is_empty() {
        (0..opts.num_seeds).map(|i| cfg.seed.wrapping_add(i)).collect()
    } else {
        opts.seeds.clone()
    };
    if seeds.is_empty() {
        return Err(AppError::Usage("need at least one seed".to_string()));
    }

    std::fs::create_dir_all(&opts.out)
        .map_err(|e| AppError::Runtime(format!("creating {}: {e}", opts.out.display())))?;

    let fixed_table = match &opts.qtable {
        Some(path) => Some(
            QTable::load(path)
                .map_err(|e| AppError::Runtime(format!("loading {}: {e}", path.display())))?,
        ),
        None => None,
    };

    // Train one table per ratio unless a shared table was supplied.
    let needs_autonomous = opts.policies.contains(&PolicyKind::Autonomous);
    let mut tables: Vec<(f64, QTable)> = Vec::new();
    if needs_autonomous {
        for &ratio in &opts.ratios {
            let table = match &fixed_table {
                Some(t) => t.clone(),
                None => {
                    let mut train_cfg = cfg.clone();
                    train_cfg.anomaly_ratio = ratio;
                    let episodes = opts.episodes.unwrap_or(cfg.train_episodes);
                    let (table, summary) = train_qtable(&train_cfg, episodes, cfg.hyperparams);
                    eprintln!(
                        "trained ratio {ratio}: {} episodes, {} steps, coverage {:.0}%",
                        summary.episodes,
                        summary.decision_steps,
                        summary.visited_state_fraction * 100.0
                    );
                    table
                }
            };
            let name = format!("qtable_r{}.bin", ratio_tag(ratio));
            table
                .save(&opts.out.join(&name))
                .map_err(|e| AppError::Runtime(format!("writing {name}: {e}")))?;
            tables.push((ratio, table));
        }
    }
    let table_for = |ratio: f64| -> Option<&QTable> {
        tables.iter().find(|(r, _)| *r == ratio).map(|(_, t)| t)
    };

    let mut results: Vec<SimResult> = Vec::new();
    for &policy in &opts.policies {
        for &ratio in &opts.ratios {
            for (si, &seed) in seeds.iter().enumerate() {
                let mut run_cfg = cfg.clone();
                run_cfg.anomaly_ratio = ratio;
                run_cfg.seed = seed;
                // Trace retrain events only for the first seed per cell to
                // keep the timeline file compact.
                let trace = si == 0;
                results.push(run_episode_traced(&run_cfg, policy, table_for(ratio), trace));
            }
        }
    }

    let report = BenchReport::from_results(&results, &opts.ratios, &opts.policies);
    let write = |name: &str, contents: String| -> Result<(), AppError> {
        std::fs::write(opts.out.join(name), contents)
            .map_err(|e| AppError::Runtime(format!("writing {name}: {e}")))
    };
    write("results.csv", results_csv(&results))?;
    write("summary.csv", summary_csv(&report))?;
    write("energy_breakdown.csv", energy_breakdown_csv(&results, &opts.ratios, &opts.policies))?;
    write("retrain_events.csv", retrain_events_csv(&results))?;
    if opts.svg {
        for &ratio in &opts.ratios {
            write(
                &format!("energy_breakdown_r{}.svg", ratio_tag(ratio)),
                energy_breakdown_svg(&results, ratio, &opts.policies),
            )?;
        }
    }

    print!("{}", summary_csv(&report));
    println!("wrote artifacts to {}", opts.out.display());
    Ok(())
}

fn ratio_tag(ratio: f64) -> String {
    format!("{ratio:.6}")
        .trim_end_matches('0')
        .trim_end_matches('.')
        .replace('.', "_")
}
