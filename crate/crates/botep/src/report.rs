//! Sweep execution and report serialization.
//!
//! [`run_sweep`] factors the configured symbol once, evaluates the enabled
//! checks for every `n` in the range, and returns one [`ReportRow`] per `n`.
//! Reports serialize to CSV (header pinned in [`CSV_HEADER`]) or a JSON
//! array of objects with the same field names; all floating-point values
//! carry 17 significant digits, so a parse of the output reproduces the
//! in-memory values bitwise. Every column except `ms` (a wall-clock
//! measurement) is deterministic for a fixed config and seed.

use std::io::Write as _;
use std::time::Instant;

use thiserror::Error;

use crate::config::{ReportFormat, RunConfig, SymbolSpec, Truncation};
use crate::factor::{FactorError, FactorizationSet};
use crate::identities::{self, IdentityTag, KERNEL_PAD, RESIDUAL_FLOOR};
use crate::symbol::{LaurentSymbol, SymbolError};
use crate::C64;

/// Exact CSV header line (16 columns).
pub const CSV_HEADER: &str = "n,dn_re,dn_im,rhs_re,rhs_im,rel_err,g_pow_re,g_pow_im,\
                              det_tail_re,det_tail_im,det_k_re,det_k_im,m_used,tail_bound,pass,ms";

/// One sweep row. `dn` and `rel_err` are `NaN` when the `BO` check is
/// disabled (serialized as `nan` in CSV and `null` in JSON); everything else
/// is always computed.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub n: usize,
    pub dn: C64,
    pub rhs: C64,
    pub rel_err: f64,
    pub g_pow: C64,
    pub det_tail: C64,
    pub det_k: C64,
    pub m_used: usize,
    pub tail_bound: f64,
    /// Pass flag per enabled check, in the order the checks were enabled.
    pub flags: Vec<(IdentityTag, bool)>,
    pub pass: bool,
    pub ms: f64,
}

impl ReportRow {
    /// The relative residual implied by the stored `dn` and `rhs`; equals
    /// the stored `rel_err` exactly (both come from the same expression).
    pub fn recomputed_residual(&self) -> f64 {
        (self.dn - self.rhs).norm() / self.dn.norm().max(RESIDUAL_FLOOR)
    }
}

/// Everything a sweep produced: rows in `n` order, plus human-readable
/// diagnostics for checks that errored (those rows carry a false flag).
#[derive(Debug)]
pub struct SweepOutcome {
    pub rows: Vec<ReportRow>,
    pub diagnostics: Vec<String>,
    pub all_pass: bool,
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("factorization failed: {0}")]
    Factorization(#[from] FactorError),
    #[error("symbol construction failed: {0}")]
    Symbol(#[from] SymbolError),
    #[error(
        "adaptive truncation exhausted at order {cap} (factorization residual still {residual:.3e})"
    )]
    Truncation { cap: usize, residual: f64 },
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("report must contain at least one row")]
    Empty,
    #[error("report I/O failed: {0}")]
    Io(#[from] std::io::Error),
}

/// Build the symbol and its factorization from the config, trying doubled
/// truncation orders when `trunc = "adaptive"`.
pub fn build_factorization(
    cfg: &RunConfig,
) -> Result<(LaurentSymbol, FactorizationSet), SweepError> {
    let orders: Vec<usize> = match cfg.trunc {
        Truncation::Fixed(k) => vec![k],
        Truncation::Adaptive => vec![64, 128, 256, 512, 1024],
    };
    let mut last_err: Option<SweepError> = None;
    let mut last_residual = f64::INFINITY;
    for &trunc in &orders {
        match try_factor(&cfg.symbol, trunc) {
            Ok((a, f)) => return Ok((a, f)),
            Err(err) => {
                if let SweepError::Factorization(FactorError::ResidualTooLarge {
                    residual,
                    ..
                }) = &err
                {
                    last_residual = *residual;
                }
                last_err = Some(err);
            }
        }
    }
    match last_err {
        Some(SweepError::Factorization(FactorError::ResidualTooLarge { .. })) => {
            Err(SweepError::Truncation {
                cap: *orders.last().unwrap(),
                residual: last_residual,
            })
        }
        Some(err) => Err(err),
        None => unreachable!("at least one truncation order is always tried"),
    }
}

fn try_factor(
    spec: &SymbolSpec,
    trunc: usize,
) -> Result<(LaurentSymbol, FactorizationSet), SweepError> {
    match spec {
        SymbolSpec::Family { .. } | SymbolSpec::Banded { .. } => {
            let a = spec.direct_symbol()?.expect("direct variants yield a symbol");
            let f = if a.block_size() == 1 {
                FactorizationSet::factor_scalar(&a, trunc)?
            } else {
                FactorizationSet::factor_block_bauer(&a, trunc, 0)?
            };
            Ok((a, f))
        }
        SymbolSpec::Factors {
            block_size,
            u_minus,
            u_plus,
            v_plus,
            v_minus,
        } => {
            let build = |list: &Vec<(i64, crate::linalg::ComplexMatrix)>| {
                LaurentSymbol::from_coeffs(
                    *block_size,
                    list.iter().map(|(k, m)| (*k, m.clone())),
                )
            };
            let f = FactorizationSet::from_explicit_factors(
                build(u_minus)?,
                build(u_plus)?,
                build(v_plus)?,
                build(v_minus)?,
                trunc,
            )?;
            let a = f.symbol()?;
            Ok((a, f))
        }
    }
}

/// Run the configured sweep: one row per `n`, the factorization shared
/// across rows, per-row wall time recorded in `ms`.
pub fn run_sweep(cfg: &RunConfig) -> Result<SweepOutcome, SweepError> {
    let (a, f) = build_factorization(cfg)?;
    let checks = cfg.resolved_checks();
    let settings = cfg.settings;
    let mut diagnostics = Vec::new();

    // Checks that do not depend on n run once; their flags repeat per row.
    let mut eq2_flag = None;
    if checks.contains(&IdentityTag::Eq2) {
        eq2_flag = Some(match identities::check_eq2(&a, &f, &settings) {
            Ok(rep) => rep.pass,
            Err(err) => {
                diagnostics.push(format!("EQ2: {err}"));
                false
            }
        });
    }
    let mut hankel_flag = None;
    if checks.contains(&IdentityTag::Hankel) {
        hankel_flag = Some(
            match identities::check_hankel_product(f.b(), f.c(), 64, &settings) {
                Ok(rep) => rep.pass,
                Err(err) => {
                    diagnostics.push(format!("HANKEL: {err}"));
                    false
                }
            },
        );
    }

    let nan = C64::new(f64::NAN, f64::NAN);
    let mut rows = Vec::new();
    for n in cfg.n_values() {
        let started = Instant::now();
        let m_row = n + KERNEL_PAD;
        let mut flags: Vec<(IdentityTag, bool)> = Vec::new();
        let mut rhs_ok = true;

        let (rhs, g_pow, det_tail, det_k) =
            match identities::bo_rhs_parts(&a, &f, n, m_row) {
                Ok(parts) => (parts.value(), parts.g_pow, parts.det_tail, parts.det_k),
                Err(err) => {
                    diagnostics.push(format!("n={n}: rhs evaluation failed: {err}"));
                    rhs_ok = false;
                    (nan, nan, nan, nan)
                }
            };
        let tail_bound = crate::operators::kernel_tail_bound(f.b(), f.c(), m_row);

        let mut dn = nan;
        let mut rel_err = f64::NAN;
        for &tag in &checks {
            let flag = match tag {
                IdentityTag::Bo => {
                    if n * a.block_size() > settings.max_section {
                        diagnostics.push(format!(
                            "n={n}: BO: section of {} scalar rows exceeds the \
                             determinant cost guard {}",
                            n * a.block_size(),
                            settings.max_section
                        ));
                        false
                    } else if !rhs_ok {
                        false
                    } else {
                        match identities::toeplitz_determinant(&a, n) {
                            Ok(d) => {
                                dn = d;
                                rel_err =
                                    (dn - rhs).norm() / dn.norm().max(RESIDUAL_FLOOR);
                                rel_err < settings.tol_bo
                            }
                            Err(err) => {
                                diagnostics.push(format!("n={n}: BO: {err}"));
                                false
                            }
                        }
                    }
                }
                IdentityTag::Eq2 => eq2_flag.unwrap_or(false),
                IdentityTag::Eq3 => {
                    match identities::check_eq3(&a, &f, n, m_row, &settings) {
                        Ok(rep) => rep.pass,
                        Err(err) => {
                            diagnostics.push(format!("n={n}: EQ3: {err}"));
                            false
                        }
                    }
                }
                IdentityTag::Eq4 => {
                    match identities::check_eq4_numerator(f.b(), f.c(), n, m_row, &settings)
                    {
                        Ok(rep) => rep.pass,
                        Err(err) => {
                            diagnostics.push(format!("n={n}: EQ4: {err}"));
                            false
                        }
                    }
                }
                IdentityTag::Eq5 => {
                    let size = 3 + (n % 8);
                    let p = 1 + (n % (size - 1));
                    match identities::check_compression_identity(
                        size,
                        p,
                        cfg.seed.wrapping_add(n as u64),
                        &settings,
                    ) {
                        Ok(rep) => rep.pass,
                        Err(err) => {
                            diagnostics.push(format!("n={n}: EQ5: {err}"));
                            false
                        }
                    }
                }
                IdentityTag::Hankel => hankel_flag.unwrap_or(false),
            };
            flags.push((tag, flag));
        }

        let pass = rhs_ok && flags.iter().all(|(_, ok)| *ok);
        rows.push(ReportRow {
            n,
            dn,
            rhs,
            rel_err,
            g_pow,
            det_tail,
            det_k,
            m_used: m_row,
            tail_bound,
            flags,
            pass,
            ms: started.elapsed().as_secs_f64() * 1e3,
        });
    }

    let all_pass = rows.iter().all(|row| row.pass);
    Ok(SweepOutcome {
        rows,
        diagnostics,
        all_pass,
    })
}

/// A float with 17 significant digits; `NaN` becomes `nan`.
fn float17(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// The same number for JSON, where missing values are `null`.
fn json_number(x: f64) -> String {
    if x.is_nan() {
        "null".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Render rows as CSV under [`CSV_HEADER`].
pub fn render_csv(rows: &[ReportRow]) -> Result<String, ReportError> {
    if rows.is_empty() {
        return Err(ReportError::Empty);
    }
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let fields = [
            row.n.to_string(),
            float17(row.dn.re),
            float17(row.dn.im),
            float17(row.rhs.re),
            float17(row.rhs.im),
            float17(row.rel_err),
            float17(row.g_pow.re),
            float17(row.g_pow.im),
            float17(row.det_tail.re),
            float17(row.det_tail.im),
            float17(row.det_k.re),
            float17(row.det_k.im),
            row.m_used.to_string(),
            float17(row.tail_bound),
            row.pass.to_string(),
            float17(row.ms),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Render rows as a JSON array of objects with the CSV field names.
pub fn render_json(rows: &[ReportRow]) -> Result<String, ReportError> {
    if rows.is_empty() {
        return Err(ReportError::Empty);
    }
    let mut out = String::from("[\n");
    for (i, row) in rows.iter().enumerate() {
        let fields = [
            ("n", row.n.to_string()),
            ("dn_re", json_number(row.dn.re)),
            ("dn_im", json_number(row.dn.im)),
            ("rhs_re", json_number(row.rhs.re)),
            ("rhs_im", json_number(row.rhs.im)),
            ("rel_err", json_number(row.rel_err)),
            ("g_pow_re", json_number(row.g_pow.re)),
            ("g_pow_im", json_number(row.g_pow.im)),
            ("det_tail_re", json_number(row.det_tail.re)),
            ("det_tail_im", json_number(row.det_tail.im)),
            ("det_k_re", json_number(row.det_k.re)),
            ("det_k_im", json_number(row.det_k.im)),
            ("m_used", row.m_used.to_string()),
            ("tail_bound", json_number(row.tail_bound)),
            ("pass", row.pass.to_string()),
            ("ms", json_number(row.ms)),
        ];
        let body: Vec<String> = fields
            .iter()
            .map(|(name, value)| format!("\"{name}\": {value}"))
            .collect();
        out.push_str("  {");
        out.push_str(&body.join(", "));
        out.push('}');
        if i + 1 < rows.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("]\n");
    Ok(out)
}

/// Write the rendered report to the given path, or stdout when `path` is
/// `None`.
pub fn emit_report(
    rows: &[ReportRow],
    format: ReportFormat,
    path: Option<&std::path::Path>,
) -> Result<(), ReportError> {
    let text = match format {
        ReportFormat::Csv => render_csv(rows)?,
        ReportFormat::Json => render_json(rows)?,
    };
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;

    fn family_config(extra_run: &str) -> RunConfig {
        let doc = format!(
            "[symbol]\nfamily = \"geometric\"\nalpha = 0.5\nbeta = 0.5\n\n\
             [run]\nn = \"1..5\"\n{extra_run}"
        );
        RunConfig::parse(&doc).unwrap()
    }

    #[test]
    fn sweep_rows_match_the_closed_form_and_all_pass() {
        let cfg = family_config("");
        let outcome = run_sweep(&cfg).unwrap();
        assert_eq!(outcome.rows.len(), 5);
        assert!(outcome.all_pass, "diagnostics: {:?}", outcome.diagnostics);
        for row in &outcome.rows {
            let expect = (1.0 - 0.25f64.powi(row.n as i32 + 1)) / 0.75;
            assert!(
                (row.dn - C64::new(expect, 0.0)).norm() < 1e-12,
                "n={}: dn {}",
                row.n,
                row.dn
            );
            assert!(row.rel_err < 1e-10);
            assert_eq!(row.m_used, row.n + KERNEL_PAD);
            assert_eq!(row.flags.len(), 6);
            assert!(row.pass);
            assert!((row.g_pow - C64::new(1.0, 0.0)).norm() < 1e-12);
            assert!((row.det_k - C64::new(0.75, 0.0)).norm() < 1e-10);
            // The row invariant: the stored residual is re-derivable.
            assert_eq!(row.rel_err, row.recomputed_residual());
        }
    }

    #[test]
    fn disabled_bo_leaves_dn_and_rel_err_nan() {
        let cfg = family_config("checks = [\"EQ5\"]\nseed = 9\n");
        let outcome = run_sweep(&cfg).unwrap();
        assert!(outcome.all_pass);
        for row in &outcome.rows {
            assert!(row.dn.re.is_nan() && row.dn.im.is_nan());
            assert!(row.rel_err.is_nan());
            assert!(!row.rhs.re.is_nan(), "rhs always computed");
            assert_eq!(row.flags.len(), 1);
            assert_eq!(row.flags[0].0, IdentityTag::Eq5);
        }
        let csv = render_csv(&outcome.rows).unwrap();
        let line = csv.lines().nth(1).unwrap();
        assert!(line.contains(",nan,"), "line: {line}");
        let json = render_json(&outcome.rows).unwrap();
        assert!(json.contains("\"dn_re\": null"));
    }

    #[test]
    fn identity_symbol_sweep_is_exact() {
        let cfg = RunConfig::parse(
            "[symbol]\nblock_size = 1\n\n[symbol.coeff]\n\"0\" = [[1.0, 0.0]]\n\n\
             [run]\nn = \"1..5\"\nchecks = [\"BO\", \"EQ3\", \"EQ4\"]\n",
        )
        .unwrap();
        let outcome = run_sweep(&cfg).unwrap();
        assert!(outcome.all_pass);
        for row in &outcome.rows {
            assert!((row.dn - C64::new(1.0, 0.0)).norm() < 1e-14);
            assert!(row.rel_err < 1e-14);
        }
    }

    #[test]
    fn csv_schema_is_pinned() {
        let cfg = family_config("");
        let outcome = run_sweep(&cfg).unwrap();
        let csv = render_csv(&outcome.rows).unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "n,dn_re,dn_im,rhs_re,rhs_im,rel_err,g_pow_re,g_pow_im,det_tail_re,det_tail_im,det_k_re,det_k_im,m_used,tail_bound,pass,ms"
        );
        for line in lines {
            assert_eq!(line.split(',').count(), 16, "line: {line}");
        }
    }

    #[test]
    fn json_round_trip_is_bitwise() {
        let cfg = family_config("");
        let outcome = run_sweep(&cfg).unwrap();
        let json = render_json(&outcome.rows).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        let array = parsed.as_array().unwrap();
        assert_eq!(array.len(), outcome.rows.len());
        for (obj, row) in array.iter().zip(&outcome.rows) {
            assert_eq!(obj["n"].as_u64().unwrap() as usize, row.n);
            assert_eq!(obj["dn_re"].as_f64().unwrap(), row.dn.re);
            assert_eq!(obj["rhs_re"].as_f64().unwrap(), row.rhs.re);
            assert_eq!(obj["rel_err"].as_f64().unwrap(), row.rel_err);
            assert_eq!(obj["det_k_re"].as_f64().unwrap(), row.det_k.re);
            assert_eq!(obj["tail_bound"].as_f64().unwrap(), row.tail_bound);
            assert_eq!(obj["ms"].as_f64().unwrap(), row.ms);
            assert_eq!(obj["pass"].as_bool().unwrap(), row.pass);
        }
    }

    #[test]
    fn reports_are_deterministic_apart_from_wall_time() {
        let cfg = family_config("seed = 3\n");
        let first = run_sweep(&cfg).unwrap();
        let second = run_sweep(&cfg).unwrap();
        let strip = |rows: &[ReportRow]| -> String {
            let mut rows = rows.to_vec();
            for row in &mut rows {
                row.ms = 0.0;
            }
            render_csv(&rows).unwrap()
        };
        assert_eq!(strip(&first.rows), strip(&second.rows));
    }

    #[test]
    fn explicit_factor_sweep_runs_all_block_checks() {
        let cfg = RunConfig::parse(
            "[symbol]\nblock_size = 2\n\n\
             [symbol.u_minus.coeff]\n\
             \"0\" = [[1,0],[0,0],[0,0],[1,0]]\n\
             \"-1\" = [[0,0],[0,0],[0.3,0],[0,0]]\n\n\
             [symbol.u_plus.coeff]\n\
             \"0\" = [[1,0],[0,0],[0,0],[1,0]]\n\
             \"1\" = [[0,0],[0.4,0],[0,0],[0,0]]\n\n\
             [symbol.v_plus.coeff]\n\
             \"0\" = [[0.8928571428571429,0],[0,0],[0,0],[1.12,0]]\n\
             \"1\" = [[0,0],[0.4,0],[0,0],[0,0]]\n\n\
             [symbol.v_minus.coeff]\n\
             \"0\" = [[1,0],[0,0],[0,0],[1,0]]\n\
             \"-1\" = [[0,0],[0,0],[0.26785714285714285,0],[0,0]]\n\n\
             [run]\nn = \"1..4\"\nseed = 5\n",
        )
        .unwrap();
        let outcome = run_sweep(&cfg).unwrap();
        assert!(outcome.all_pass, "diagnostics: {:?}", outcome.diagnostics);
        for row in &outcome.rows {
            // Dense determinants of this family are constant in n.
            assert!((row.dn - C64::new(1.12, 0.0)).norm() < 1e-10, "dn {}", row.dn);
            assert_eq!(row.flags.len(), 5, "EQ2 omitted for block symbols");
        }
    }

    #[test]
    fn bauer_banded_sweep_passes() {
        // Hermitian positive block symbol a = h h^* with h = I + 0.4 E12 t,
        // so a_0 = I + 0.16 E11, a_1 = 0.4 E12, a_{-1} = 0.4 E21.
        let cfg = RunConfig::parse(
            "[symbol]\nblock_size = 2\n\n[symbol.coeff]\n\
             \"-1\" = [[0.0,0.0],[0.0,0.0],[0.4,0.0],[0.0,0.0]]\n\
             \"0\" = [[1.16,0.0],[0.0,0.0],[0.0,0.0],[1.0,0.0]]\n\
             \"1\" = [[0.0,0.0],[0.4,0.0],[0.0,0.0],[0.0,0.0]]\n\n\
             [run]\nn = \"1..3\"\nchecks = [\"BO\", \"EQ3\", \"HANKEL\"]\n",
        )
        .unwrap();
        let outcome = run_sweep(&cfg).unwrap();
        assert!(outcome.all_pass, "diagnostics: {:?}", outcome.diagnostics);
    }

    #[test]
    fn factorization_failure_aborts_the_sweep() {
        // Winding one: t itself cannot be factored.
        let cfg = RunConfig::parse(
            "[symbol]\nblock_size = 1\n\n[symbol.coeff]\n\"1\" = [[1.0, 0.0]]\n\n\
             [run]\nn = \"1..2\"\n",
        )
        .unwrap();
        assert!(run_sweep(&cfg).is_err());
    }

    #[test]
    fn empty_reports_are_refused() {
        assert!(matches!(render_csv(&[]), Err(ReportError::Empty)));
        assert!(matches!(render_json(&[]), Err(ReportError::Empty)));
    }

    #[test]
    fn emit_report_writes_files() {
        let cfg = family_config("");
        let outcome = run_sweep(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let csv_path = dir.path().join("report.csv");
        emit_report(&outcome.rows, ReportFormat::Csv, Some(&csv_path)).unwrap();
        let body = std::fs::read_to_string(&csv_path).unwrap();
        assert!(body.starts_with(CSV_HEADER));
        let json_path = dir.path().join("report.json");
        emit_report(&outcome.rows, ReportFormat::Json, Some(&json_path)).unwrap();
        let body = std::fs::read_to_string(&json_path).unwrap();
        assert!(body.trim_start().starts_with('['));
    }
}
