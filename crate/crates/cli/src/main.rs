//! `dqip`: reproducible experiment runner for the dissipative-gadget
//! toolkit. Each subcommand reads an optional config file, applies CLI
//! overrides, writes deterministic CSV/JSON artifacts, and — with
//! `--check` — finishes by running the acceptance checklist, reflecting
//! its verdict in the exit status.

mod config;
mod experiments;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::FileConfig;

#[derive(Parser)]
#[command(name = "dqip", version, about = "Dissipative gadget experiments")]
struct Cli {
    /// TOML (or JSON) configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Artifact directory (default: $DQIP_OUT_DIR or ./dqip-out).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Worker threads for parameter sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Run the acceptance checklist after the experiment; exit nonzero on
    /// any failure.
    #[arg(long, global = true)]
    check: bool,

    /// Seed for randomized inputs.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Worst-case initializer relaxation curves and overlap series.
    Initializer(InitializerArgs),
    /// Cutoff profile of a single timer: (x, deviation, tail, remainder).
    Timer(TimerArgs),
    /// Remainder scaling of the cutoff window across timer sizes.
    CutoffProfile(CutoffProfileArgs),
    /// Trigger occupation at multiples of the cutoff time.
    SharpThreshold(SharpThresholdArgs),
    /// Mis-trigger tails and exponential bounds for concatenated timers.
    ConcatError(ConcatErrorArgs),
    /// Truncated-normal input overlap vs the analytic bound.
    TruncNormal(TruncNormalArgs),
    /// Trigger-probability shift under imperfect initialization.
    ImperfectInit(ImperfectInitArgs),
    /// Dissipative state transfer runs with a JSON report.
    Transfer(TransferArgs),
    /// Oracle comparisons against independent evaluation routes.
    OracleSuite(OracleSuiteArgs),
}

#[derive(Args)]
struct InitializerArgs {
    /// Comma-separated auxiliary-qubit counts.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    #[arg(long)]
    omega: Option<f64>,
    /// Conditional-preparation rate.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    /// Time grid start:end:step.
    #[arg(long)]
    t_grid: Option<String>,
    #[arg(long)]
    k_max: Option<usize>,
}

#[derive(Args)]
struct TimerArgs {
    /// Timer length N.
    #[arg(long, short = 'N')]
    n: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Window grid start:end:step (in units of the cutoff window).
    #[arg(long, allow_hyphen_values = true)]
    x_grid: Option<String>,
}

#[derive(Args)]
struct CutoffProfileArgs {
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x_grid: Option<String>,
}

#[derive(Args)]
struct SharpThresholdArgs {
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    c_grid: Option<String>,
}

#[derive(Args)]
struct ConcatErrorArgs {
    #[arg(long)]
    l_max: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Steps in the union-bound schedule.
    #[arg(long)]
    steps: Option<usize>,
    /// Timer length per step in the schedule.
    #[arg(long)]
    schedule_n: Option<usize>,
}

#[derive(Args)]
struct TruncNormalArgs {
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    omega: Option<f64>,
    /// Preparation rate; omitted = per-combination valid-regime choice.
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Args)]
struct ImperfectInitArgs {
    #[arg(long, short = 'N')]
    n: Option<usize>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
}

#[derive(Args)]
struct TransferArgs {
    /// Chain length (odd).
    #[arg(long)]
    n: Option<usize>,
    /// Number of random input states.
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    eq_tol: Option<f64>,
    /// Fixed input as Bloch angles `theta,phi` (overrides --seeds).
    #[arg(long)]
    input: Option<String>,
}

#[derive(Args)]
struct OracleSuiteArgs {
    #[arg(long)]
    max_qubits: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool, String> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| format!("thread pool: {e}"))?;
    }

    let mut cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let out_dir = cli
        .out_dir
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .or_else(|| std::env::var_os("DQIP_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("dqip-out"));
    let seed = cli.seed.or(cfg.seed).unwrap_or(7);

    let mut all_ok = true;
    if let Some(command) = cli.command {
        let artifacts = match command {
            Command::Initializer(a) => {
                let s = &mut cfg.initializer;
                if let Some(v) = a.m {
                    s.aux_counts = v;
                }
                override_opt(&mut s.omega, a.omega);
                override_opt(&mut s.gamma, a.gamma);
                override_opt(&mut s.delta, a.delta);
                override_opt(&mut s.c, a.c);
                if let Some(v) = a.t_grid {
                    s.t_grid = v;
                }
                override_opt(&mut s.k_max, a.k_max);
                experiments::run_initializer(&cfg, &out_dir)?
            }
            Command::Timer(a) => {
                let s = &mut cfg.timer;
                override_opt(&mut s.n, a.n);
                override_opt(&mut s.gamma, a.gamma);
                if let Some(v) = a.x_grid {
                    s.x_grid = v;
                }
                experiments::run_timer(&cfg, &out_dir)?
            }
            Command::CutoffProfile(a) => {
                let s = &mut cfg.cutoff_profile;
                if let Some(v) = a.n {
                    s.n_list = v;
                }
                override_opt(&mut s.gamma, a.gamma);
                if let Some(v) = a.x_grid {
                    s.x_grid = v;
                }
                experiments::run_cutoff_profile(&cfg, &out_dir)?
            }
            Command::SharpThreshold(a) => {
                let s = &mut cfg.sharp_threshold;
                if let Some(v) = a.n {
                    s.n_list = v;
                }
                override_opt(&mut s.gamma, a.gamma);
                if let Some(v) = a.c_grid {
                    s.c_grid = v;
                }
                experiments::run_sharp_threshold(&cfg, &out_dir)?
            }
            Command::ConcatError(a) => {
                let s = &mut cfg.concat_error;
                override_opt(&mut s.l_max, a.l_max);
                if let Some(v) = a.n {
                    s.n_list = v;
                }
                override_opt(&mut s.gamma, a.gamma);
                override_opt(&mut s.schedule_steps, a.steps);
                override_opt(&mut s.schedule_n, a.schedule_n);
                experiments::run_concat_error(&cfg, &out_dir)?
            }
            Command::TruncNormal(a) => {
                let s = &mut cfg.trunc_normal;
                if let Some(v) = a.alphas {
                    s.alphas = v;
                }
                if let Some(v) = a.betas {
                    s.betas = v;
                }
                if let Some(v) = a.n {
                    s.n_list = v;
                }
                override_opt(&mut s.omega, a.omega);
                if a.gamma.is_some() {
                    s.gamma = a.gamma;
                }
                experiments::run_trunc_normal(&cfg, &out_dir)?
            }
            Command::ImperfectInit(a) => {
                let s = &mut cfg.imperfect_init;
                override_opt(&mut s.n, a.n);
                override_opt(&mut s.t, a.t);
                override_opt(&mut s.gamma, a.gamma);
                if let Some(v) = a.eps {
                    s.epsilons = v;
                }
                experiments::run_imperfect_init(&cfg, &out_dir)?
            }
            Command::Transfer(a) => {
                let s = &mut cfg.transfer;
                override_opt(&mut s.n, a.n);
                override_opt(&mut s.seeds, a.seeds);
                override_opt(&mut s.omega, a.omega);
                override_opt(&mut s.eq_tol, a.eq_tol);
                if a.input.is_some() {
                    s.input = a.input;
                }
                experiments::run_transfer(&cfg, &out_dir, seed)?
            }
            Command::OracleSuite(a) => {
                let s = &mut cfg.oracle_suite;
                override_opt(&mut s.max_qubits, a.max_qubits);
                let (artifacts, ok) = experiments::run_oracles(&cfg, &out_dir)?;
                all_ok &= ok;
                artifacts
            }
        };
        for path in &artifacts {
            println!("wrote {}", path.display());
        }
    } else if !cli.check {
        return Err("no experiment given; pass a subcommand or --check".into());
    }

    if cli.check {
        let outcomes = dqip_core::verify::acceptance::run_all().map_err(|e| e.to_string())?;
        experiments::print_outcomes(&outcomes);
        all_ok &= outcomes.iter().all(|o| o.passed);
    }
    Ok(all_ok)
}

fn override_opt<T: Copy>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}
