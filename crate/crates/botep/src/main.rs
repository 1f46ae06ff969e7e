//! Command-line front end.
//!
//! * `verify --config <path>` — run the configured sweep and emit a report.
//! * `factor --config <path>` — print the factorization of the configured
//!   symbol: coefficients (row-major `[re, im]` pairs, the same shape the
//!   config accepts) and the measured residuals.
//! * `det --config <path> --n <k>` — print `D_n` both ways: the dense
//!   section determinant and the factored formula.
//!
//! Exit codes: 0 all checks passed, 1 a check failed, 2 configuration
//! error, 3 numerical abort. The `BO_MAX_SECTION` environment variable
//! overrides the dense-section cost guard (default 1500 scalar rows).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use botep::config::{ReportFormat, RunConfig};
use botep::identities::{self, IdentityTag, KERNEL_PAD, RESIDUAL_FLOOR};
use botep::report;
use botep::symbol::LaurentSymbol;

#[derive(Parser)]
#[command(
    name = "botep",
    about = "Block Toeplitz determinant identities: factorization, kernels, and verification sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured verification sweep and emit a CSV or JSON report.
    Verify {
        /// Path to the TOML run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Output format override: csv or json.
        #[arg(long)]
        format: Option<String>,
        /// Output path override; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Checks override: comma-separated subset of
        /// BO,EQ2,EQ3,EQ4,EQ5,HANKEL.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        /// Seed override for the seeded checks.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the factorization of the configured symbol.
    Factor {
        /// Path to the TOML run configuration.
        #[arg(long)]
        config: PathBuf,
    },
    /// Print one section determinant both ways.
    Det {
        /// Path to the TOML run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Section count.
        #[arg(long)]
        n: usize,
    },
}

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Verify {
            config,
            format,
            out,
            checks,
            seed,
        } => cmd_verify(&config, format, out, checks, seed),
        Command::Factor { config } => cmd_factor(&config),
        Command::Det { config, n } => cmd_det(&config, n),
    };
    ExitCode::from(code)
}

/// Parse the config file, apply the environment override, and report
/// configuration problems on stderr.
fn load_config(path: &PathBuf) -> Result<RunConfig, u8> {
    let text = match std::fs::read_to_string(path) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("error: cannot read config {}: {err}", path.display());
            return Err(EXIT_CONFIG);
        }
    };
    let mut cfg = match RunConfig::parse(&text) {
        Ok(cfg) => cfg,
        Err(err) => {
            eprintln!("error: {err}");
            return Err(EXIT_CONFIG);
        }
    };
    if let Ok(value) = std::env::var("BO_MAX_SECTION") {
        match value.parse::<usize>() {
            Ok(cap) if cap >= 1 => cfg.settings.max_section = cap,
            _ => {
                eprintln!(
                    "error: BO_MAX_SECTION must be a positive integer, got \"{value}\""
                );
                return Err(EXIT_CONFIG);
            }
        }
    }
    Ok(cfg)
}

fn cmd_verify(
    config: &PathBuf,
    format: Option<String>,
    out: Option<PathBuf>,
    checks: Option<Vec<String>>,
    seed: Option<u64>,
) -> u8 {
    let mut cfg = match load_config(config) {
        Ok(cfg) => cfg,
        Err(code) => return code,
    };

    if let Some(name) = format {
        cfg.format = match name.as_str() {
            "csv" => ReportFormat::Csv,
            "json" => ReportFormat::Json,
            other => {
                eprintln!("error: format must be csv or json, got \"{other}\"");
                return EXIT_CONFIG;
            }
        };
    }
    if let Some(path) = out {
        cfg.out = Some(path);
    }
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(names) = checks {
        let mut tags = Vec::new();
        for name in names {
            match name.parse::<IdentityTag>() {
                Ok(tag) => {
                    if !tags.contains(&tag) {
                        tags.push(tag);
                    }
                }
                Err(err) => {
                    eprintln!("error: {err}");
                    return EXIT_CONFIG;
                }
            }
        }
        if cfg.symbol.block_size() > 1 && tags.contains(&IdentityTag::Eq2) {
            eprintln!("error: EQ2 requires a scalar symbol (block size 1)");
            return EXIT_CONFIG;
        }
        cfg.checks = Some(tags);
    }

    let outcome = match report::run_sweep(&cfg) {
        Ok(outcome) => outcome,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_NUMERICAL;
        }
    };
    for line in &outcome.diagnostics {
        eprintln!("warning: {line}");
    }
    if let Err(err) = report::emit_report(&outcome.rows, cfg.format, cfg.out.as_deref()) {
        eprintln!("error: {err}");
        return EXIT_NUMERICAL;
    }
    if outcome.all_pass {
        0
    } else {
        EXIT_CHECK_FAILED
    }
}

fn print_factor_coeffs(name: &str, f: &LaurentSymbol) {
    for (index, block) in f.support() {
        let pairs: Vec<String> = block
            .data()
            .iter()
            .map(|z| format!("[{:.16e}, {:.16e}]", z.re, z.im))
            .collect();
        println!("{name}.coeff.\"{index}\" = [{}]", pairs.join(", "));
    }
}

fn cmd_factor(config: &PathBuf) -> u8 {
    let cfg = match load_config(config) {
        Ok(cfg) => cfg,
        Err(code) => return code,
    };
    let (_a, f) = match report::build_factorization(&cfg) {
        Ok(pair) => pair,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_NUMERICAL;
        }
    };
    println!("block_size = {}", f.block_size());
    println!("truncation_order = {}", f.truncation_order());
    println!("residual_left = {:.16e}", f.residual_left());
    println!("residual_right = {:.16e}", f.residual_right());
    println!("residual_bc = {:.16e}", f.residual_bc());
    for (name, factor) in [
        ("u_minus", f.u_minus()),
        ("u_plus", f.u_plus()),
        ("v_plus", f.v_plus()),
        ("v_minus", f.v_minus()),
        ("b", f.b()),
        ("c", f.c()),
    ] {
        print_factor_coeffs(name, factor);
    }
    0
}

fn cmd_det(config: &PathBuf, n: usize) -> u8 {
    let cfg = match load_config(config) {
        Ok(cfg) => cfg,
        Err(code) => return code,
    };
    if n == 0 {
        eprintln!("error: n must be at least 1");
        return EXIT_CONFIG;
    }
    let (a, f) = match report::build_factorization(&cfg) {
        Ok(pair) => pair,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_NUMERICAL;
        }
    };
    println!("n = {n}");
    let bo = match identities::bo_rhs(&a, &f, n, n + KERNEL_PAD) {
        Ok(value) => value,
        Err(err) => {
            eprintln!("error: factored evaluation failed: {err}");
            return EXIT_NUMERICAL;
        }
    };
    println!("bo_re = {:.16e}", bo.re);
    println!("bo_im = {:.16e}", bo.im);
    if n * a.block_size() <= cfg.settings.max_section {
        let dense = match identities::toeplitz_determinant(&a, n) {
            Ok(value) => value,
            Err(err) => {
                eprintln!("error: dense evaluation failed: {err}");
                return EXIT_NUMERICAL;
            }
        };
        println!("dense_re = {:.16e}", dense.re);
        println!("dense_im = {:.16e}", dense.im);
        let rel_err = (dense - bo).norm() / dense.norm().max(RESIDUAL_FLOOR);
        println!("rel_err = {:.16e}", rel_err);
    } else {
        println!(
            "dense = skipped (section of {} scalar rows exceeds the cost guard {})",
            n * a.block_size(),
            cfg.settings.max_section
        );
    }
    0
}
