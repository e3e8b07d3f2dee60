//! Command-line front end: check suites, grid scans, the norm-minimization
//! search, and basis inspection.
//!
//! Exit codes: 0 all checks pass, 1 at least one check fails, 2 configuration
//! error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use fockbench_core::checks::{
    reports_to_json, run_checks, scan, scan_to_csv, ReportFormat, RunConfig, ScalarMode,
    ScanRow,
};
use fockbench_core::fock::build_basis;
use fockbench_core::freegroup::build_fg_basis;
use fockbench_core::search::{minimize_norm, SearchOptions};

#[derive(Parser)]
#[command(name = "fockbench", version, about = "Verification workbench for operators on truncated Fock spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run named verification checks and report pass/fail per check
    Check(CheckArgs),
    /// Tabulate norms, chain margins and search minima over an (n, d) grid
    Scan(ScanArgs),
    /// Minimize the intertwiner norm over commutant perturbations
    Search(SearchArgs),
    /// Print a truncated basis enumeration
    Basis(BasisArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Number of generators
    #[arg(long)]
    n: Option<usize>,

    /// Truncation depth (maximum word length)
    #[arg(long)]
    depth: Option<usize>,

    /// Check tolerance for norm bounds
    #[arg(long)]
    tol: Option<f64>,

    /// Master seed for all sampled checks
    #[arg(long)]
    seed: Option<u64>,

    /// Scalar mode: exact | float (default: chosen per check)
    #[arg(long)]
    mode: Option<String>,

    /// Comma-separated check names, or "all"
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<String>>,

    /// Write the report to this path instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,

    /// Report format: json | csv
    #[arg(long)]
    format: Option<String>,

    /// Worker threads for check dispatch
    #[arg(long)]
    threads: Option<usize>,

    /// Cap on tensor-square dimensions
    #[arg(long)]
    dim_cap: Option<usize>,

    /// Flat key/value config file (TOML); flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Generator range, e.g. "2..5" or "3" (overrides --n)
    #[arg(long)]
    n_range: Option<String>,

    /// Depth range, e.g. "3..4" or "4" (overrides --depth)
    #[arg(long)]
    d_range: Option<String>,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Random candidates before refinement
    #[arg(long, default_value_t = 500)]
    trials: usize,

    /// Best candidates taken into coordinate refinement
    #[arg(long, default_value_t = 3)]
    restarts: usize,

    /// Refinement sweeps over the coefficients
    #[arg(long, default_value_t = 20)]
    sweeps: usize,
}

#[derive(Args)]
struct BasisArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Which basis to enumerate: fock | freegroup
    #[arg(long, default_value = "fock")]
    kind: String,
}

/// Flat key/value config file mirroring the run configuration.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    n: Option<usize>,
    d: Option<usize>,
    tolerance: Option<f64>,
    seed: Option<u64>,
    checks: Option<Vec<String>>,
    scalar_mode: Option<String>,
    output_path: Option<String>,
    format: Option<String>,
    threads: Option<usize>,
    dim_cap: Option<usize>,
}

fn parse_mode(s: &str) -> Result<ScalarMode, String> {
    match s {
        "exact" => Ok(ScalarMode::Exact),
        "float" => Ok(ScalarMode::Float),
        other => Err(format!("scalar mode '{other}' is not exact|float")),
    }
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    match s {
        "json" => Ok(ReportFormat::Json),
        "csv" => Ok(ReportFormat::Csv),
        other => Err(format!("format '{other}' is not json|csv")),
    }
}

/// "2..5" or "3" as an inclusive range.
fn parse_range(s: &str) -> Result<(usize, usize), String> {
    if let Some((lo, hi)) = s.split_once("..") {
        let lo = lo.trim().parse().map_err(|_| format!("bad range '{s}'"))?;
        let hi = hi.trim().trim_start_matches('=').parse().map_err(|_| format!("bad range '{s}'"))?;
        Ok((lo, hi))
    } else {
        let v = s.trim().parse().map_err(|_| format!("bad range '{s}'"))?;
        Ok((v, v))
    }
}

/// File config first, then flags on top.
fn resolve_config(common: &CommonArgs) -> Result<RunConfig, String> {
    let mut problems = Vec::new();
    let file = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            toml::from_str::<FileConfig>(&text).map_err(|e| format!("config parse: {e}"))?
        }
        None => FileConfig::default(),
    };
    let defaults = RunConfig::default();
    let scalar_mode = match common.mode.as_deref().or(file.scalar_mode.as_deref()) {
        Some(s) => match parse_mode(s) {
            Ok(m) => Some(m),
            Err(e) => {
                problems.push(e);
                None
            }
        },
        None => None,
    };
    let format = match common.format.as_deref().or(file.format.as_deref()) {
        Some(s) => match parse_format(s) {
            Ok(f) => f,
            Err(e) => {
                problems.push(e);
                defaults.format
            }
        },
        None => defaults.format,
    };
    if !problems.is_empty() {
        return Err(format!("invalid configuration: {}", problems.join("; ")));
    }
    Ok(RunConfig {
        n: common.n.or(file.n).unwrap_or(defaults.n),
        d: common.depth.or(file.d).unwrap_or(defaults.d),
        tolerance: common.tol.or(file.tolerance).unwrap_or(defaults.tolerance),
        seed: common.seed.or(file.seed).unwrap_or(defaults.seed),
        checks: common.checks.clone().or(file.checks).unwrap_or(defaults.checks),
        scalar_mode,
        output_path: common
            .out
            .as_ref()
            .map(|p| p.display().to_string())
            .or(file.output_path),
        format,
        threads: common.threads.or(file.threads).unwrap_or(defaults.threads),
        dim_cap: common.dim_cap.or(file.dim_cap).unwrap_or(defaults.dim_cap),
    })
}

fn emit(cfg_out: &Option<String>, content: &str) -> Result<(), String> {
    match cfg_out {
        Some(path) => fs::write(path, content).map_err(|e| format!("cannot write {path}: {e}")),
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn cmd_check(args: &CheckArgs) -> Result<ExitCode, String> {
    let cfg = resolve_config(&args.common)?;
    if cfg.format == ReportFormat::Csv {
        return Err("invalid configuration: format csv is only supported by scan".into());
    }
    let reports = run_checks(&cfg)?;
    for r in &reports {
        let status = if r.pass { "PASS" } else { "FAIL" };
        let note = r.error.as_deref().unwrap_or("");
        eprintln!("[{status}] {:<18} {:>6} ms  {note}", r.check_name, r.wall_millis);
    }
    let all_pass = reports.iter().all(|r| r.pass);
    let json = reports_to_json(&reports);
    if cfg.output_path.is_some() {
        emit(&cfg.output_path, &json)?;
    } else {
        println!("{json}");
    }
    eprintln!(
        "{} of {} checks passed",
        reports.iter().filter(|r| r.pass).count(),
        reports.len()
    );
    Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_scan(args: &ScanArgs) -> Result<ExitCode, String> {
    let cfg = resolve_config(&args.common)?;
    let n_range = match &args.n_range {
        Some(s) => parse_range(s)?,
        None => (cfg.n, cfg.n),
    };
    let d_range = match &args.d_range {
        Some(s) => parse_range(s)?,
        None => (cfg.d, cfg.d),
    };
    let rows = scan(&cfg, n_range, d_range)?;
    let content = match cfg.format {
        ReportFormat::Csv => scan_to_csv(&rows),
        ReportFormat::Json => {
            serde_json::to_string_pretty(&rows).expect("scan rows serialize")
        }
    };
    emit(&cfg.output_path, &content)?;
    let all_pass = rows.iter().all(|r: &ScanRow| r.pass);
    Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_search(args: &SearchArgs) -> Result<ExitCode, String> {
    let cfg = resolve_config(&args.common)?;
    let basis = build_basis(cfg.n, cfg.d).map_err(|e| e.to_string())?;
    if basis.dim() * basis.dim() > cfg.dim_cap {
        return Err(format!(
            "invalid configuration: tensor dimension {} over cap {}",
            basis.dim() * basis.dim(),
            cfg.dim_cap
        ));
    }
    let opts = SearchOptions {
        trials: args.trials,
        restarts: args.restarts,
        sweeps: args.sweeps,
        seed: cfg.seed,
        ..SearchOptions::default()
    };
    let report = minimize_norm(&basis, &opts).map_err(|e| e.to_string())?;
    let content = serde_json::to_string_pretty(&report).expect("search report serializes");
    emit(&cfg.output_path, &content)?;
    eprintln!(
        "best {:.9} vs bound {:.9} (margin {:+.9})",
        report.best_value, report.bound, report.margin
    );
    Ok(if report.best_value >= report.bound - 1e-9 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_basis(args: &BasisArgs) -> Result<ExitCode, String> {
    let cfg = resolve_config(&args.common)?;
    let content = match args.kind.as_str() {
        "fock" => {
            let b = build_basis(cfg.n, cfg.d).map_err(|e| e.to_string())?;
            let words: Vec<Vec<u8>> = b.words().to_vec();
            match cfg.format {
                ReportFormat::Json => serde_json::json!({
                    "kind": "fock",
                    "n": cfg.n,
                    "d": cfg.d,
                    "dim": b.dim(),
                    "words": words,
                })
                .to_string(),
                ReportFormat::Csv => {
                    return Err("invalid configuration: basis supports json or plain text (no --format)".into())
                }
            }
        }
        "freegroup" => {
            let b = build_fg_basis(cfg.n, cfg.d).map_err(|e| e.to_string())?;
            let words: Vec<Vec<i8>> = b.words().to_vec();
            match cfg.format {
                ReportFormat::Json => serde_json::json!({
                    "kind": "freegroup",
                    "n": cfg.n,
                    "d": cfg.d,
                    "dim": b.dim(),
                    "words": words,
                })
                .to_string(),
                ReportFormat::Csv => {
                    return Err("invalid configuration: basis supports json or plain text (no --format)".into())
                }
            }
        }
        other => return Err(format!("invalid configuration: basis kind '{other}' is not fock|freegroup")),
    };
    if args.common.format.is_some() || cfg.output_path.is_some() {
        emit(&cfg.output_path, &content)?;
    } else {
        // plain text listing
        match args.kind.as_str() {
            "fock" => {
                let b = build_basis(cfg.n, cfg.d).map_err(|e| e.to_string())?;
                println!("fock basis n={} d={} dim={}", cfg.n, cfg.d, b.dim());
                for i in 0..b.dim() {
                    let w: Vec<String> = b.word(i).iter().map(|a| a.to_string()).collect();
                    println!("{i}\t({})", w.join(","));
                }
            }
            _ => {
                let b = build_fg_basis(cfg.n, cfg.d).map_err(|e| e.to_string())?;
                println!("free group basis n={} d={} dim={}", cfg.n, cfg.d, b.dim());
                for i in 0..b.dim() {
                    let w: Vec<String> = b.word(i).iter().map(|a| a.to_string()).collect();
                    println!("{i}\t({})", w.join(","));
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check(a) => cmd_check(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Search(a) => cmd_search(a),
        Command::Basis(a) => cmd_basis(a),
    };
    match result {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
