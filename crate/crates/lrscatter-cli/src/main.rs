mod config;
mod run;

use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "lrscat",
    version,
    about = "Reflection/transmission sweeps for 1D long-range scattering"
)]
struct Cli {
    /// Tolerance override: evaluation tolerance for `sweep`, gap gate for `compare`.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker thread count (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output format; only `csv` is supported.
    #[arg(long, global = true, default_value = "csv")]
    format: String,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate every configured method over the ak grid and emit CSV rows.
    Sweep { config: PathBuf },
    /// Sweep, then report pairwise method gaps and log-log convergence slopes.
    Compare { config: PathBuf },
    /// Run a canned sweep (`fig1` or `fig2`).
    Preset {
        name: String,
        /// Redirect the CSV output path baked into the preset.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exercise the built-in invariant battery.
    Selftest,
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage_only = !matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if usage_only { 1 } else { 0 };
        }
    };
    if cli.format != "csv" {
        eprintln!("unsupported format `{}`; only `csv` is implemented", cli.format);
        return 1;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("--threads must be positive");
            return 1;
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
    }

    match &cli.cmd {
        Cmd::Sweep { config } => match load_config(config) {
            Ok(mut cfg) => {
                if let Some(t) = cli.tol {
                    if !(t > 0.0) {
                        eprintln!("--tol must be positive");
                        return 1;
                    }
                    cfg.tol = t;
                }
                execute(&cfg, false, None)
            }
            Err(code) => code,
        },
        Cmd::Compare { config } => match load_config(config) {
            Ok(mut cfg) => {
                if cfg.methods.len() < 2 {
                    eprintln!("compare needs at least two methods in [methods] use");
                    return 1;
                }
                if let Some(t) = cli.tol {
                    if !(t > 0.0) {
                        eprintln!("--tol must be positive");
                        return 1;
                    }
                    cfg.compare_tol = Some(t);
                }
                execute(&cfg, true, None)
            }
            Err(code) => code,
        },
        Cmd::Preset { name, out } => {
            let Some(text) = run::preset(name) else {
                eprintln!("unknown preset `{name}` (available: fig1, fig2)");
                return 1;
            };
            let cfg = config::parse_config(text).expect("preset configs are valid");
            execute(&cfg, false, out.as_deref())
        }
        Cmd::Selftest => {
            if run::selftest() {
                0
            } else {
                2
            }
        }
    }
}

fn load_config(path: &Path) -> Result<config::SweepConfig, i32> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read `{}`: {e}", path.display());
            return Err(1);
        }
    };
    match config::parse_config(&text) {
        Ok(cfg) => Ok(cfg),
        Err(errors) => {
            eprintln!("{} problem(s) in `{}`:", errors.len(), path.display());
            for e in &errors {
                eprintln!("  - {e}");
            }
            Err(1)
        }
    }
}

fn execute(cfg: &config::SweepConfig, compare: bool, out_override: Option<&Path>) -> i32 {
    let rows = match run::run_sweep(cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    let csv = run::to_csv(&rows);
    let reports = run::summarize(&rows, &cfg.methods);
    let summary = run::render_summary(&rows, &reports);

    let dest: Option<PathBuf> =
        out_override.map(Path::to_path_buf).or_else(|| cfg.out_path.clone().map(PathBuf::from));
    match &dest {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &csv) {
                eprintln!("cannot write `{}`: {e}", path.display());
                return 2;
            }
            print!("{summary}");
        }
        None => {
            print!("{csv}");
            eprint!("{summary}");
        }
    }

    if rows.iter().all(|r| r.outcome.is_err()) {
        eprintln!("every sweep point failed");
        return 2;
    }
    if compare {
        if let Some(gate) = cfg.compare_tol {
            let worst = reports.iter().map(|r| r.max_gap).fold(0.0f64, f64::max);
            if worst > gate {
                eprintln!("tolerance exceeded: max gap {worst:.3e} > {gate:.3e}");
                return 3;
            }
        }
    }
    0
}
