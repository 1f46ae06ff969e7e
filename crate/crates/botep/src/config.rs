//! Run configuration: a small TOML document with `[symbol]`, `[run]`, and
//! `[tolerances]` sections, parsed into a validated [`RunConfig`].
//!
//! Exactly one symbol variant must be present in `[symbol]`:
//!
//! * a named built-in family — `family = "geometric"` with `alpha`, `beta`;
//! * a banded coefficient list — `block_size` plus a `[symbol.coeff]` table
//!   whose keys are the coefficient indices and whose values are row-major
//!   lists of `[re, im]` pairs;
//! * an explicit factor quadruple — `block_size` plus `[symbol.u_minus]`,
//!   `[symbol.u_plus]`, `[symbol.v_plus]`, `[symbol.v_minus]`, each with its
//!   own `coeff` table.
//!
//! `[run]` holds the sweep: `n = "start..stop[:step]"` (inclusive),
//! `trunc = "adaptive"` or an integer, `checks`, `seed`, `format`, `out`,
//! and an optional `max_section` cost-guard override. `[tolerances]` keys
//! (`bo`, `eq2`, `eq3`, `eq4`, `eq5`, `hankel`) override the defaults.

use std::fmt::Write as _;
use std::path::PathBuf;

use thiserror::Error;
use toml::Value;

use crate::identities::{CheckSettings, IdentityTag};
use crate::linalg::ComplexMatrix;
use crate::symbol::{LaurentSymbol, SymbolError};
use crate::C64;

/// Validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub symbol: SymbolSpec,
    pub n_start: usize,
    pub n_stop: usize,
    pub n_step: usize,
    pub trunc: Truncation,
    /// Checks requested explicitly; `None` means the block-size default
    /// (every check for scalar symbols, everything but `EQ2` for block).
    pub checks: Option<Vec<IdentityTag>>,
    pub seed: u64,
    pub format: ReportFormat,
    pub out: Option<PathBuf>,
    pub settings: CheckSettings,
}

/// One coefficient list: (index, row-major block) pairs.
pub type CoeffList = Vec<(i64, ComplexMatrix)>;

#[derive(Debug, Clone)]
pub enum SymbolSpec {
    Family {
        alpha: f64,
        beta: f64,
    },
    Banded {
        block_size: usize,
        coeffs: CoeffList,
    },
    Factors {
        block_size: usize,
        u_minus: CoeffList,
        u_plus: CoeffList,
        v_plus: CoeffList,
        v_minus: CoeffList,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    Adaptive,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config validation error: {0}")]
    Validation(String),
}

impl ConfigError {
    fn invalid(msg: impl Into<String>) -> Self {
        ConfigError::Validation(msg.into())
    }
}

impl SymbolSpec {
    pub fn block_size(&self) -> usize {
        match self {
            SymbolSpec::Family { .. } => 1,
            SymbolSpec::Banded { block_size, .. } => *block_size,
            SymbolSpec::Factors { block_size, .. } => *block_size,
        }
    }

    /// The symbol itself, for the banded and family variants. The factor
    /// variant has no direct symbol (it is `u_- u_+` after validation).
    pub fn direct_symbol(&self) -> Result<Option<LaurentSymbol>, SymbolError> {
        match self {
            SymbolSpec::Family { alpha, beta } => {
                Ok(Some(geometric_symbol(*alpha, *beta)))
            }
            SymbolSpec::Banded { block_size, coeffs } => {
                let pairs = coeffs.iter().map(|(k, m)| (*k, m.clone()));
                Ok(Some(LaurentSymbol::from_coeffs(*block_size, pairs)?))
            }
            SymbolSpec::Factors { .. } => Ok(None),
        }
    }
}

/// The built-in regression family `a = (1 - alpha t)(1 - beta / t)`, whose
/// section determinants have the closed form
/// `(1 - (alpha beta)^(n+1)) / (1 - alpha beta)`.
pub fn geometric_symbol(alpha: f64, beta: f64) -> LaurentSymbol {
    LaurentSymbol::scalar([
        (-1, C64::new(-beta, 0.0)),
        (0, C64::new(1.0 + alpha * beta, 0.0)),
        (1, C64::new(-alpha, 0.0)),
    ])
}

impl RunConfig {
    /// Parse and validate a configuration document.
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let root: Value = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        let root = root
            .as_table()
            .ok_or_else(|| ConfigError::Parse("top level must be a table".into()))?;

        for key in root.keys() {
            if !matches!(key.as_str(), "symbol" | "run" | "tolerances") {
                return Err(ConfigError::invalid(format!(
                    "unknown section [{key}] (expected [symbol], [run], [tolerances])"
                )));
            }
        }

        let symbol_tbl = root
            .get("symbol")
            .and_then(Value::as_table)
            .ok_or_else(|| ConfigError::invalid("missing [symbol] section"))?;
        let symbol = parse_symbol(symbol_tbl)?;

        let run_tbl = root
            .get("run")
            .and_then(Value::as_table)
            .ok_or_else(|| ConfigError::invalid("missing [run] section"))?;

        let n_text = run_tbl
            .get("n")
            .and_then(Value::as_str)
            .ok_or_else(|| ConfigError::invalid("[run] needs n = \"start..stop[:step]\""))?;
        let (n_start, n_stop, n_step) = parse_range(n_text)?;

        let trunc = match run_tbl.get("trunc") {
            None => Truncation::Adaptive,
            Some(Value::String(s)) if s == "adaptive" => Truncation::Adaptive,
            Some(Value::Integer(k)) if *k > 0 => Truncation::Fixed(*k as usize),
            Some(other) => {
                return Err(ConfigError::invalid(format!(
                    "trunc must be \"adaptive\" or a positive integer, got {other}"
                )))
            }
        };

        let checks = match run_tbl.get("checks") {
            None => None,
            Some(Value::Array(items)) => {
                let mut tags = Vec::new();
                for item in items {
                    let name = item.as_str().ok_or_else(|| {
                        ConfigError::invalid("checks must be an array of strings")
                    })?;
                    let tag: IdentityTag =
                        name.parse().map_err(ConfigError::Validation)?;
                    if !tags.contains(&tag) {
                        tags.push(tag);
                    }
                }
                Some(tags)
            }
            Some(other) => {
                return Err(ConfigError::invalid(format!(
                    "checks must be an array of strings, got {other}"
                )))
            }
        };
        if symbol.block_size() > 1 {
            if let Some(tags) = &checks {
                if tags.contains(&IdentityTag::Eq2) {
                    return Err(ConfigError::invalid(
                        "EQ2 requires a scalar symbol (block size 1)",
                    ));
                }
            }
        }

        let seed = match run_tbl.get("seed") {
            None => 0,
            Some(Value::Integer(k)) if *k >= 0 => *k as u64,
            Some(other) => {
                return Err(ConfigError::invalid(format!(
                    "seed must be a nonnegative integer, got {other}"
                )))
            }
        };

        let format = match run_tbl.get("format") {
            None => ReportFormat::Csv,
            Some(Value::String(s)) if s == "csv" => ReportFormat::Csv,
            Some(Value::String(s)) if s == "json" => ReportFormat::Json,
            Some(other) => {
                return Err(ConfigError::invalid(format!(
                    "format must be \"csv\" or \"json\", got {other}"
                )))
            }
        };

        let out = match run_tbl.get("out") {
            None => None,
            Some(Value::String(s)) => Some(PathBuf::from(s)),
            Some(other) => {
                return Err(ConfigError::invalid(format!(
                    "out must be a path string, got {other}"
                )))
            }
        };

        let mut settings = CheckSettings::default();
        if let Some(Value::Integer(k)) = run_tbl.get("max_section") {
            if *k < 1 {
                return Err(ConfigError::invalid("max_section must be positive"));
            }
            settings.max_section = *k as usize;
        }
        if let Some(tol_tbl) = root.get("tolerances") {
            let tol_tbl = tol_tbl
                .as_table()
                .ok_or_else(|| ConfigError::invalid("[tolerances] must be a table"))?;
            for (key, value) in tol_tbl {
                let tol = value
                    .as_float()
                    .or_else(|| value.as_integer().map(|k| k as f64))
                    .ok_or_else(|| {
                        ConfigError::invalid(format!("tolerance {key} must be a number"))
                    })?;
                if !(tol > 0.0) {
                    return Err(ConfigError::invalid(format!(
                        "tolerance {key} must be positive"
                    )));
                }
                match key.as_str() {
                    "bo" => settings.tol_bo = tol,
                    "eq2" => settings.tol_eq2 = tol,
                    "eq3" => settings.tol_eq3 = tol,
                    "eq4" => settings.tol_eq4 = tol,
                    "eq5" => settings.tol_eq5 = tol,
                    "hankel" => settings.tol_hankel = tol,
                    other => {
                        return Err(ConfigError::invalid(format!(
                            "unknown tolerance key {other}"
                        )))
                    }
                }
            }
        }

        Ok(RunConfig {
            symbol,
            n_start,
            n_stop,
            n_step,
            trunc,
            checks,
            seed,
            format,
            out,
            settings,
        })
    }

    /// The sweep's `n` values, in order.
    pub fn n_values(&self) -> Vec<usize> {
        (self.n_start..=self.n_stop)
            .step_by(self.n_step)
            .collect()
    }

    /// The checks to run: the explicit list if one was given, otherwise
    /// every check for scalar symbols and everything but `EQ2` for block.
    pub fn resolved_checks(&self) -> Vec<IdentityTag> {
        match &self.checks {
            Some(tags) => tags.clone(),
            None if self.symbol.block_size() == 1 => IdentityTag::ALL.to_vec(),
            None => IdentityTag::ALL
                .into_iter()
                .filter(|t| *t != IdentityTag::Eq2)
                .collect(),
        }
    }

    /// Canonical document for this configuration; parsing it back yields an
    /// equivalent config.
    pub fn to_document(&self) -> String {
        let mut doc = String::new();
        doc.push_str("[symbol]\n");
        match &self.symbol {
            SymbolSpec::Family { alpha, beta } => {
                let _ = writeln!(doc, "family = \"geometric\"");
                let _ = writeln!(doc, "alpha = {alpha}");
                let _ = writeln!(doc, "beta = {beta}");
            }
            SymbolSpec::Banded { block_size, coeffs } => {
                let _ = writeln!(doc, "block_size = {block_size}");
                doc.push_str("\n[symbol.coeff]\n");
                write_coeff_lines(&mut doc, coeffs);
            }
            SymbolSpec::Factors {
                block_size,
                u_minus,
                u_plus,
                v_plus,
                v_minus,
            } => {
                let _ = writeln!(doc, "block_size = {block_size}");
                for (name, list) in [
                    ("u_minus", u_minus),
                    ("u_plus", u_plus),
                    ("v_plus", v_plus),
                    ("v_minus", v_minus),
                ] {
                    let _ = writeln!(doc, "\n[symbol.{name}.coeff]");
                    write_coeff_lines(&mut doc, list);
                }
            }
        }
        doc.push_str("\n[run]\n");
        let _ = writeln!(doc, "n = \"{}..{}:{}\"", self.n_start, self.n_stop, self.n_step);
        match self.trunc {
            Truncation::Adaptive => doc.push_str("trunc = \"adaptive\"\n"),
            Truncation::Fixed(k) => {
                let _ = writeln!(doc, "trunc = {k}");
            }
        }
        if let Some(tags) = &self.checks {
            let names: Vec<String> = tags.iter().map(|t| format!("\"{t}\"")).collect();
            let _ = writeln!(doc, "checks = [{}]", names.join(", "));
        }
        let _ = writeln!(doc, "seed = {}", self.seed);
        let _ = writeln!(
            doc,
            "format = \"{}\"",
            match self.format {
                ReportFormat::Csv => "csv",
                ReportFormat::Json => "json",
            }
        );
        if let Some(path) = &self.out {
            let _ = writeln!(doc, "out = \"{}\"", path.display());
        }
        let _ = writeln!(doc, "max_section = {}", self.settings.max_section);
        doc.push_str("\n[tolerances]\n");
        let s = &self.settings;
        for (key, tol) in [
            ("bo", s.tol_bo),
            ("eq2", s.tol_eq2),
            ("eq3", s.tol_eq3),
            ("eq4", s.tol_eq4),
            ("eq5", s.tol_eq5),
            ("hankel", s.tol_hankel),
        ] {
            let _ = writeln!(doc, "{key} = {tol:e}");
        }
        doc
    }
}

fn write_coeff_lines(doc: &mut String, coeffs: &CoeffList) {
    for (index, block) in coeffs {
        let pairs: Vec<String> = block
            .data()
            .iter()
            .map(|z| format!("[{:e}, {:e}]", z.re, z.im))
            .collect();
        let _ = writeln!(doc, "\"{index}\" = [{}]", pairs.join(", "));
    }
}

fn parse_symbol(tbl: &toml::map::Map<String, Value>) -> Result<SymbolSpec, ConfigError> {
    let has_family = tbl.contains_key("family");
    let has_coeff = tbl.contains_key("coeff");
    let factor_names = ["u_minus", "u_plus", "v_plus", "v_minus"];
    let present_factors: Vec<&str> = factor_names
        .iter()
        .copied()
        .filter(|name| tbl.contains_key(*name))
        .collect();
    let has_factors = !present_factors.is_empty();

    let variant_count = has_family as usize + has_coeff as usize + has_factors as usize;
    if variant_count != 1 {
        return Err(ConfigError::invalid(
            "exactly one symbol variant must be present: a family, a coeff table, \
             or a factor quadruple",
        ));
    }

    if has_family {
        let name = tbl.get("family").and_then(Value::as_str).ok_or_else(|| {
            ConfigError::invalid("family must be a string naming a built-in family")
        })?;
        if name != "geometric" {
            return Err(ConfigError::invalid(format!(
                "unknown family \"{name}\" (available: \"geometric\")"
            )));
        }
        let alpha = get_number(tbl, "alpha")?
            .ok_or_else(|| ConfigError::invalid("the geometric family needs alpha"))?;
        let beta = get_number(tbl, "beta")?
            .ok_or_else(|| ConfigError::invalid("the geometric family needs beta"))?;
        if !(alpha.abs() < 1.0) {
            return Err(ConfigError::invalid("alpha magnitude must be < 1"));
        }
        if !(beta.abs() < 1.0) {
            return Err(ConfigError::invalid("beta magnitude must be < 1"));
        }
        return Ok(SymbolSpec::Family { alpha, beta });
    }

    let block_size = match tbl.get("block_size") {
        Some(Value::Integer(k)) if *k >= 1 => *k as usize,
        Some(other) => {
            return Err(ConfigError::invalid(format!(
                "block_size must be a positive integer, got {other}"
            )))
        }
        None => {
            return Err(ConfigError::invalid(
                "coefficient symbol specs need block_size",
            ))
        }
    };

    if has_coeff {
        let coeffs = parse_coeff_table(tbl.get("coeff").unwrap(), block_size, "coeff")?;
        if coeffs.is_empty() {
            return Err(ConfigError::invalid("coeff table must not be empty"));
        }
        return Ok(SymbolSpec::Banded { block_size, coeffs });
    }

    if present_factors.len() != 4 {
        return Err(ConfigError::invalid(format!(
            "a factor quadruple needs all of u_minus, u_plus, v_plus, v_minus \
             (found only {})",
            present_factors.join(", ")
        )));
    }
    let mut lists = Vec::new();
    for name in factor_names {
        let sub = tbl.get(name).and_then(Value::as_table).ok_or_else(|| {
            ConfigError::invalid(format!("[symbol.{name}] must be a table"))
        })?;
        let coeff = sub.get("coeff").ok_or_else(|| {
            ConfigError::invalid(format!("[symbol.{name}] needs a coeff table"))
        })?;
        let list = parse_coeff_table(coeff, block_size, name)?;
        if list.is_empty() {
            return Err(ConfigError::invalid(format!(
                "[symbol.{name}] coeff table must not be empty"
            )));
        }
        lists.push(list);
    }
    let mut drain = lists.into_iter();
    Ok(SymbolSpec::Factors {
        block_size,
        u_minus: drain.next().unwrap(),
        u_plus: drain.next().unwrap(),
        v_plus: drain.next().unwrap(),
        v_minus: drain.next().unwrap(),
    })
}

fn get_number(
    tbl: &toml::map::Map<String, Value>,
    key: &str,
) -> Result<Option<f64>, ConfigError> {
    match tbl.get(key) {
        None => Ok(None),
        Some(Value::Float(x)) => Ok(Some(*x)),
        Some(Value::Integer(k)) => Ok(Some(*k as f64)),
        Some(other) => Err(ConfigError::invalid(format!(
            "{key} must be a number, got {other}"
        ))),
    }
}

/// A coefficient table: keys are signed indices, values are row-major lists
/// of `[re, im]` pairs with exactly `block_size^2` entries.
fn parse_coeff_table(
    value: &Value,
    block_size: usize,
    context: &str,
) -> Result<CoeffList, ConfigError> {
    let tbl = value.as_table().ok_or_else(|| {
        ConfigError::invalid(format!("{context} must be a table of index = pairs"))
    })?;
    let mut out = Vec::new();
    for (key, entry) in tbl {
        let index: i64 = key.parse().map_err(|_| {
            ConfigError::invalid(format!(
                "{context} key \"{key}\" is not a coefficient index"
            ))
        })?;
        let pairs = entry.as_array().ok_or_else(|| {
            ConfigError::invalid(format!(
                "{context}.{key} must be a list of [re, im] pairs"
            ))
        })?;
        if pairs.len() != block_size * block_size {
            return Err(ConfigError::invalid(format!(
                "{context}.{key} has {} entries; block size {} needs {}",
                pairs.len(),
                block_size,
                block_size * block_size
            )));
        }
        let mut data = Vec::with_capacity(pairs.len());
        for pair in pairs {
            let xy = pair.as_array().ok_or_else(|| {
                ConfigError::invalid(format!(
                    "{context}.{key} entries must be [re, im] pairs"
                ))
            })?;
            if xy.len() != 2 {
                return Err(ConfigError::invalid(format!(
                    "{context}.{key} entries must be [re, im] pairs"
                )));
            }
            let mut parts = [0.0f64; 2];
            for (slot, item) in parts.iter_mut().zip(xy) {
                *slot = item
                    .as_float()
                    .or_else(|| item.as_integer().map(|k| k as f64))
                    .ok_or_else(|| {
                        ConfigError::invalid(format!(
                            "{context}.{key} entries must be numeric [re, im] pairs"
                        ))
                    })?;
            }
            data.push(C64::new(parts[0], parts[1]));
        }
        let block = ComplexMatrix::from_data(block_size, block_size, data)
            .map_err(|e| ConfigError::invalid(e.to_string()))?;
        out.push((index, block));
    }
    out.sort_by_key(|(index, _)| *index);
    Ok(out)
}

/// Inclusive range `start..stop`, optionally `start..stop:step`.
fn parse_range(text: &str) -> Result<(usize, usize, usize), ConfigError> {
    let (range, step) = match text.split_once(':') {
        Some((r, s)) => {
            let step: usize = s
                .trim()
                .parse()
                .map_err(|_| ConfigError::invalid(format!("bad range step \"{s}\"")))?;
            (r, step)
        }
        None => (text, 1),
    };
    if step == 0 {
        return Err(ConfigError::invalid("range step must be positive"));
    }
    let (lo, hi) = range.split_once("..").ok_or_else(|| {
        ConfigError::invalid(format!(
            "range \"{text}\" must have the form start..stop[:step]"
        ))
    })?;
    let start: usize = lo
        .trim()
        .parse()
        .map_err(|_| ConfigError::invalid(format!("bad range start \"{lo}\"")))?;
    let stop: usize = hi
        .trim()
        .parse()
        .map_err(|_| ConfigError::invalid(format!("bad range stop \"{hi}\"")))?;
    if start == 0 {
        return Err(ConfigError::invalid("n range must start at 1 or above"));
    }
    if stop < start {
        return Err(ConfigError::invalid("n range must be nonempty"));
    }
    Ok((start, stop, step))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_family_doc_gets_defaults() {
        let cfg = RunConfig::parse(
            "[symbol]\nfamily = \"geometric\"\nalpha = 0.5\nbeta = 0.5\n\n[run]\nn = \"1..10\"\n",
        )
        .unwrap();
        assert!(matches!(
            cfg.symbol,
            SymbolSpec::Family { alpha, beta } if alpha == 0.5 && beta == 0.5
        ));
        assert_eq!(cfg.n_values(), (1..=10).collect::<Vec<_>>());
        assert_eq!(cfg.trunc, Truncation::Adaptive);
        assert_eq!(cfg.checks, None);
        assert_eq!(cfg.resolved_checks().len(), 6);
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.format, ReportFormat::Csv);
        assert!(cfg.out.is_none());
        assert_eq!(cfg.settings.max_section, 1500);
        assert_eq!(cfg.settings.tol_bo, 1e-8);
    }

    #[test]
    fn alpha_magnitude_guard_message_is_pinned() {
        let err = RunConfig::parse(
            "[symbol]\nfamily = \"geometric\"\nalpha = 1.5\nbeta = 0.5\n\n[run]\nn = \"1..2\"\n",
        )
        .unwrap_err();
        assert!(
            err.to_string().contains("alpha magnitude must be < 1"),
            "got: {err}"
        );
    }

    #[test]
    fn exactly_one_symbol_variant_is_enforced() {
        let err = RunConfig::parse(
            "[symbol]\nfamily = \"geometric\"\nalpha = 0.1\nbeta = 0.1\nblock_size = 1\n\
             [symbol.coeff]\n\"0\" = [[1.0, 0.0]]\n\n[run]\nn = \"1..2\"\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("exactly one symbol variant"));

        let err = RunConfig::parse("[symbol]\nblock_size = 1\n\n[run]\nn = \"1..2\"\n")
            .unwrap_err();
        assert!(err.to_string().contains("exactly one symbol variant"));
    }

    #[test]
    fn banded_doc_round_trips_through_serialization() {
        let text = "[symbol]\nblock_size = 2\n\n[symbol.coeff]\n\
                    \"-1\" = [[0.0,0.0],[0.0,0.0],[0.3,0.0],[0.0,0.0]]\n\
                    \"0\" = [[1.0,0.0],[0.0,0.0],[0.0,0.0],[1.0,0.0]]\n\
                    \"1\" = [[0.0,0.0],[0.4,-0.1],[0.0,0.0],[0.0,0.0]]\n\n\
                    [run]\nn = \"1..5\"\nseed = 7\nchecks = [\"BO\", \"EQ3\"]\n";
        let cfg = RunConfig::parse(text).unwrap();
        match &cfg.symbol {
            SymbolSpec::Banded { block_size, coeffs } => {
                assert_eq!(*block_size, 2);
                assert_eq!(coeffs.len(), 3);
                assert_eq!(coeffs[0].0, -1);
                assert_eq!(coeffs[2].1.get(0, 1), C64::new(0.4, -0.1));
            }
            other => panic!("wrong variant: {other:?}"),
        }
        assert_eq!(
            cfg.checks,
            Some(vec![IdentityTag::Bo, IdentityTag::Eq3])
        );

        let doc = cfg.to_document();
        let back = RunConfig::parse(&doc).unwrap();
        let doc2 = back.to_document();
        assert_eq!(doc, doc2, "canonical form must be stable");
        assert_eq!(back.n_values(), cfg.n_values());
        assert_eq!(back.seed, cfg.seed);
    }

    #[test]
    fn factor_quadruple_doc_parses_and_round_trips() {
        let text = "[symbol]\nblock_size = 2\n\n\
                    [symbol.u_minus.coeff]\n\
                    \"0\" = [[1,0],[0,0],[0,0],[1,0]]\n\
                    \"-1\" = [[0,0],[0,0],[0.3,0],[0,0]]\n\n\
                    [symbol.u_plus.coeff]\n\
                    \"0\" = [[1,0],[0,0],[0,0],[1,0]]\n\
                    \"1\" = [[0,0],[0.4,0],[0,0],[0,0]]\n\n\
                    [symbol.v_plus.coeff]\n\
                    \"0\" = [[1,0],[0,0],[0,0],[1,0]]\n\
                    \"1\" = [[0,0],[0.4,0],[0,0],[0,0]]\n\n\
                    [symbol.v_minus.coeff]\n\
                    \"0\" = [[1,0],[0,0],[0,0],[1,0]]\n\
                    \"-1\" = [[0,0],[0,0],[0.3,0],[0,0]]\n\n\
                    [run]\nn = \"1..3\"\n";
        let cfg = RunConfig::parse(text).unwrap();
        match &cfg.symbol {
            SymbolSpec::Factors {
                block_size,
                u_minus,
                ..
            } => {
                assert_eq!(*block_size, 2);
                assert_eq!(u_minus.len(), 2);
                assert_eq!(u_minus[0].0, -1, "coeff lists are sorted by index");
            }
            other => panic!("wrong variant: {other:?}"),
        }
        // Block symbols default to every check except EQ2.
        let resolved = cfg.resolved_checks();
        assert_eq!(resolved.len(), 5);
        assert!(!resolved.contains(&IdentityTag::Eq2));

        let back = RunConfig::parse(&cfg.to_document()).unwrap();
        assert_eq!(back.to_document(), cfg.to_document());
    }

    #[test]
    fn eq2_on_block_symbols_is_a_validation_error() {
        let err = RunConfig::parse(
            "[symbol]\nblock_size = 2\n\n[symbol.coeff]\n\
             \"0\" = [[1.0,0.0],[0.0,0.0],[0.0,0.0],[1.0,0.0]]\n\n\
             [run]\nn = \"1..2\"\nchecks = [\"EQ2\"]\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("EQ2 requires a scalar symbol"));
    }

    #[test]
    fn range_parsing_accepts_steps_and_rejects_empty() {
        let cfg = RunConfig::parse(
            "[symbol]\nfamily = \"geometric\"\nalpha = 0.1\nbeta = 0.1\n\n[run]\nn = \"2..10:3\"\n",
        )
        .unwrap();
        assert_eq!(cfg.n_values(), vec![2, 5, 8]);

        for bad in ["5..2", "0..3", "3", "1..2:0"] {
            let doc = format!(
                "[symbol]\nfamily = \"geometric\"\nalpha = 0.1\nbeta = 0.1\n\n[run]\nn = \"{bad}\"\n"
            );
            assert!(RunConfig::parse(&doc).is_err(), "range \"{bad}\" accepted");
        }
    }

    #[test]
    fn tolerances_and_run_options_apply() {
        let cfg = RunConfig::parse(
            "[symbol]\nfamily = \"geometric\"\nalpha = 0.3\nbeta = 0.2\n\n\
             [run]\nn = \"1..4\"\ntrunc = 96\nseed = 11\nformat = \"json\"\n\
             out = \"report.json\"\nmax_section = 4096\n\n\
             [tolerances]\nbo = 1e-6\neq5 = 1e-12\n",
        )
        .unwrap();
        assert_eq!(cfg.trunc, Truncation::Fixed(96));
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.format, ReportFormat::Json);
        assert_eq!(cfg.out.as_deref(), Some(std::path::Path::new("report.json")));
        assert_eq!(cfg.settings.max_section, 4096);
        assert_eq!(cfg.settings.tol_bo, 1e-6);
        assert_eq!(cfg.settings.tol_eq5, 1e-12);
        assert_eq!(cfg.settings.tol_eq3, 1e-8, "untouched default");
    }

    #[test]
    fn unknown_keys_and_malformed_docs_are_rejected() {
        assert!(matches!(
            RunConfig::parse("not toml [[["),
            Err(ConfigError::Parse(_))
        ));
        assert!(RunConfig::parse(
            "[symbol]\nfamily = \"geometric\"\nalpha = 0.1\nbeta = 0.1\n\n\
             [run]\nn = \"1..2\"\n\n[extras]\nx = 1\n"
        )
        .is_err());
        assert!(RunConfig::parse(
            "[symbol]\nfamily = \"geometric\"\nalpha = 0.1\nbeta = 0.1\n\n\
             [run]\nn = \"1..2\"\nchecks = [\"EQ9\"]\n"
        )
        .is_err());
        // Wrong pair count for the block size.
        assert!(RunConfig::parse(
            "[symbol]\nblock_size = 2\n\n[symbol.coeff]\n\"0\" = [[1.0, 0.0]]\n\n\
             [run]\nn = \"1..2\"\n"
        )
        .is_err());
    }

    #[test]
    fn geometric_symbol_coefficients_match_the_family_definition() {
        let a = geometric_symbol(0.5, 0.4);
        assert_eq!(a.coeff(0).get(0, 0), C64::new(1.2, 0.0));
        assert_eq!(a.coeff(1).get(0, 0), C64::new(-0.5, 0.0));
        assert_eq!(a.coeff(-1).get(0, 0), C64::new(-0.4, 0.0));
        assert_eq!(a.band(), (1, 1));
    }
}
