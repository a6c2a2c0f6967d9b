//! `qedft-maps`: sweeps, inversions and reports for cavity-coupled Hubbard
//! lattices.
//!
//! Exit codes: 0 success, 1 configuration error, 2 some points failed,
//! 3 solver or I/O failure.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use qedft_maps_cli::config::{self, ConfigError, RunConfig};
use qedft_maps_cli::output::{Manifest, OutputDir, StatusSummary};
use qedft_maps_cli::run;

#[derive(Parser, Debug)]
#[command(name = "qedft-maps", version, about = "Exact density-to-potential maps of cavity-coupled Hubbard lattices")]
#[command(after_help = "Configuration keys can be overridden through QEDFT_MAPS_<SECTION>__<KEY> \
environment variables, e.g. QEDFT_MAPS_MODEL__LAMBDA=2 or QEDFT_MAPS_GRID__V__N=51. Values are \
read as TOML literals and fall back to strings.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Worker threads; overrides `output.workers` (0 = all cores).
    #[arg(long, short)]
    workers: Option<usize>,
    /// Also write gnuplot scripts next to the data.
    #[arg(long)]
    emit_plots: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// d, q, energies and entropy over the (v_ext, j_ext) grid → map.csv
    Sweep(Common),
    /// Exact and mean-field maps side by side → map.csv, mf_map.csv, diff.csv, compare.json
    MfCompare(Common),
    /// Exact xc potential over a (d, q) lattice → xc.csv, xc_cut.csv
    XcMap(Common),
    /// External pairs reproducing target (d, q) → inversion.csv
    Invert(Common),
    /// Static polarizability along ṽ → profile.csv, peaks.json
    Polarizability(Common),
    /// Photon-cutoff convergence trace at one point → convergence.csv
    Convergence(Common),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Sweep(_) => "sweep",
            Command::MfCompare(_) => "mf-compare",
            Command::XcMap(_) => "xc-map",
            Command::Invert(_) => "invert",
            Command::Polarizability(_) => "polarizability",
            Command::Convergence(_) => "convergence",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Sweep(c)
            | Command::MfCompare(c)
            | Command::XcMap(c)
            | Command::Invert(c)
            | Command::Polarizability(c)
            | Command::Convergence(c) => c,
        }
    }
}

const EXIT_CONFIG: u8 = 1;
const EXIT_PARTIAL: u8 = 2;
const EXIT_INFRA: u8 = 3;

fn dispatch(cmd: &Command, cfg: &RunConfig, out: &mut OutputDir, plots: bool) -> Result<StatusSummary> {
    match cmd {
        Command::Sweep(_) => run::run_sweep(cfg, out, plots),
        Command::MfCompare(_) => run::run_mf_compare(cfg, out, plots),
        Command::XcMap(_) => run::run_xc_map(cfg, out, plots),
        Command::Invert(_) => run::run_invert(cfg, out),
        Command::Polarizability(_) => run::run_polarizability(cfg, out, plots),
        Command::Convergence(_) => run::run_convergence(cfg, out, plots),
    }
}

fn execute(cli: &Cli) -> Result<u8> {
    let common = cli.command.common();
    let overrides = config::env_overrides();
    let mut cfg = config::load(&common.config, &overrides)?;
    if matches!(cli.command, Command::Invert(_)) {
        cfg.invert.require_targets()?;
    }
    if let Some(w) = common.workers {
        cfg.output.workers = w;
    }
    if common.emit_plots {
        cfg.output.emit_plots = true;
    }
    let dir = common
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("qedft-out").join(cli.command.name()));
    cfg.output.dir = Some(dir.clone());

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.output.workers)
        .build()
        .context("starting worker pool")?;
    let workers = pool.current_num_threads();
    let started = chrono::Utc::now();
    log::info!("{} with {workers} workers into {}", cli.command.name(), dir.display());

    let mut out = OutputDir::create(&dir)?;
    let summary = pool.install(|| dispatch(&cli.command, &cfg, &mut out, cfg.output.emit_plots))?;
    let code = if summary.incomplete() > 0 {
        log::warn!("{} of {} points have no values", summary.incomplete(), summary.points);
        EXIT_PARTIAL
    } else {
        0
    };

    let manifest = Manifest {
        tool: env!("CARGO_BIN_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name().to_string(),
        config: serde_json::to_value(&cfg)?,
        env_overrides: overrides.iter().map(|(k, v)| format!("{} = {v}", k.join("."))).collect(),
        workers,
        started: started.to_rfc3339(),
        finished: chrono::Utc::now().to_rfc3339(),
        exit_code: code.into(),
        status: summary,
        files: out.files().to_vec(),
    };
    out.finish(&manifest)?;
    Ok(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::from(EXIT_INFRA)
            }
        }
    }
}
