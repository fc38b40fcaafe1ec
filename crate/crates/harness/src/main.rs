use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use polarnav_harness::commands::{
    benchmark_command, evaluate_command, gradcheck_command, render_command, train_command, CommandError,
};
use polarnav_harness::gradcheck::TOLERANCE;
use polarnav_harness::{HarnessConfig, PlannerKind};

#[derive(Parser)]
#[command(name = "polarnav", version, about = "Train and benchmark local planners on polar costmaps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    outdir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Train a SAC agent on the randomized training worlds.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Success and collision rates of a checkpoint on held-out worlds.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 100)]
        episodes: usize,
    },
    /// Compare planners on the C1–C4 scenarios.
    Benchmark {
        #[command(flatten)]
        common: Common,
        /// Restrict to one scenario.
        #[arg(long)]
        scenario: Option<String>,
        /// Restrict to one planner (sac, dwa, sp).
        #[arg(long, value_parser = parse_planner)]
        planner: Option<PlannerKind>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Runs per (scenario, planner) cell.
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Plot one episode as SVG.
    Render {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        scenario: String,
        #[arg(long, value_parser = parse_planner)]
        planner: PlannerKind,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Print the effective configuration as TOML.
    Config {
        #[command(flatten)]
        common: Common,
    },
    /// Finite-difference gradient checks of the autodiff ops and SAC losses.
    Gradcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_planner(s: &str) -> Result<PlannerKind, String> {
    PlannerKind::parse(s).ok_or_else(|| format!("unknown planner `{s}` (expected sac, dwa or sp)"))
}

fn load(common: &Common) -> Result<HarnessConfig, CommandError> {
    Ok(match &common.config {
        Some(p) => HarnessConfig::load(p)?,
        None => HarnessConfig::default(),
    })
}

fn run(cli: Cli) -> Result<ExitCode, CommandError> {
    match cli.command {
        Command::Train { common, episodes } => {
            let mut config = load(&common)?;
            if let Some(s) = common.seed {
                config.train.seed = s;
            }
            if let Some(n) = episodes {
                config.train.episodes = n;
            }
            config.validate()?;
            let summary = train_command(&config, &common.outdir)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Evaluate {
            common,
            checkpoint,
            episodes,
        } => {
            let config = load(&common)?;
            let rates = evaluate_command(&config, &checkpoint, episodes)?;
            println!("{}", serde_json::to_string_pretty(&rates)?);
        }
        Command::Benchmark {
            common,
            scenario,
            planner,
            checkpoint,
            episodes,
        } => {
            let mut config = load(&common)?;
            if let Some(s) = scenario {
                config.benchmark.scenarios = vec![s];
            }
            if let Some(p) = planner {
                config.benchmark.planners = vec![p];
            }
            if checkpoint.is_some() {
                config.benchmark.checkpoint = checkpoint;
            }
            if let Some(n) = episodes {
                config.benchmark.runs_per_cell = n;
            }
            if let Some(s) = common.seed {
                config.benchmark.base_seed = s;
            }
            config.validate()?;
            let report = benchmark_command(&config, &common.outdir)?;
            println!(
                "{:<4} {:<4} {:>5} {:>8} {:>9} {:>8} {:>10} {:>8}",
                "case", "plnr", "runs", "success", "collision", "time_s", "distance_m", "speed"
            );
            let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.2}"));
            for c in &report.cells {
                if !c.available {
                    println!("{:<4} {:<4} unavailable: {}", c.scenario, c.planner.as_str(), c.note.as_deref().unwrap_or(""));
                    continue;
                }
                println!(
                    "{:<4} {:<4} {:>5} {:>8.2} {:>9.2} {:>8} {:>10} {:>8}",
                    c.scenario,
                    c.planner.as_str(),
                    c.runs,
                    c.success_rate,
                    c.collision_rate,
                    fmt(c.mean_travel_time_s),
                    fmt(c.mean_travel_distance_m),
                    fmt(c.mean_speed_mps)
                );
            }
        }
        Command::Render {
            common,
            scenario,
            planner,
            checkpoint,
        } => {
            let config = load(&common)?;
            let svg = render_command(
                &config,
                &scenario,
                planner,
                common.seed.unwrap_or(0),
                checkpoint.as_deref(),
                &common.outdir,
            )?;
            println!("{}", svg.display());
        }
        Command::Config { common } => {
            print!("{}", load(&common)?.to_toml_string());
        }
        Command::Gradcheck { seed } => {
            let results = gradcheck_command(seed);
            let mut ok = true;
            for r in &results {
                println!(
                    "{:<24} {:>6} checked  max rel {:.2e}  {}",
                    r.name,
                    r.checked,
                    r.max_relative_error,
                    if r.passed { "ok" } else { "FAIL" }
                );
                ok &= r.passed;
            }
            if !ok {
                eprintln!("gradient check failed (tolerance {TOLERANCE:e})");
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
