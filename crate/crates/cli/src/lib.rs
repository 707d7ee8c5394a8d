//! Batch front-end for the carpetdim library: subcommand dispatch, config
//! ingestion, JSON/CSV emission with reproducibility metadata.
//!
//! Every JSON result carries `seed`, `version`, `config` and `config_hash`
//! (sha256 of the canonical config serialization); `timestamp` is echoed but
//! excluded from the hash, so reruns with the same config are byte-identical
//! up to that one field.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use carpetdim::content::{
    exact_content_oracle, rectangle_content_log, stripe_content_log, Region,
};
use carpetdim::dim_formulas::{
    alpha_of_row_frequencies, digit_frequency_dimension, general_rate_dimension,
    random_cover_dimension, random_cover_dimension_sup, shrinking_target_dimension,
    RateSequences,
};
use carpetdim::multifractal::SpectrumCurve;
use carpetdim::simulator::{estimate_critical_exponent, SampleMode, SampleSource};
use carpetdim::{DigitPattern, DigitSequence, Rates, WeightVector};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const SUP_GRID: usize = 4097;

#[derive(Parser, Debug)]
#[command(name = "carpetdim", version, disable_help_subcommand = true)]
struct Cli {
    /// Worker thread cap; falls back to CARPETDIM_THREADS, then all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Emit the multifractal spectrum of the row-projected measure as CSV.
    Spectrum {
        #[arg(long)]
        pattern: PathBuf,
        /// Number of q grid points on [-40, 40].
        #[arg(long, default_value_t = 81)]
        qgrid: usize,
        /// Number of alpha grid points on [alpha_min, alpha_max].
        #[arg(long, default_value_t = 101)]
        alphagrid: usize,
        /// CSV of rows (q, T, kappa, theta).
        #[arg(long, default_value = "spectrum_q.csv")]
        out_q: PathBuf,
        /// CSV of rows (alpha, D_alpha).
        #[arg(long, default_value = "spectrum_alpha.csv")]
        out_alpha: PathBuf,
    },
    /// Closed-form dimension of the random rectangle covering.
    RandomCoverDim {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        tau1: f64,
        #[arg(long)]
        tau2: f64,
        /// Also run the variational grid oracle and report the gap.
        #[arg(long)]
        oracle: bool,
    },
    /// Shrinking-target dimension for a measure of known dimension.
    TargetDim {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        tau1: f64,
        #[arg(long)]
        tau2: f64,
        /// Dimension of the center measure; defaults to s0 (natural measure).
        #[arg(long)]
        dim_mu: Option<f64>,
        /// Typical local dimension of the projected center measure;
        /// defaults to the entropy dimension of the row weights.
        #[arg(long)]
        alpha_nu: Option<f64>,
    },
    /// Shrinking-target dimension for a Bernoulli measure given by cell weights.
    FreqDim {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        tau1: f64,
        #[arg(long)]
        tau2: f64,
        /// JSON file [[i, j, w], ...]; defaults to uniform weights on the cells.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Override alpha_nu; defaults to the row marginal of the weights.
        #[arg(long)]
        alpha_nu: Option<f64>,
    },
    /// Finite-horizon dimension for per-generation rate sequences.
    GeneralRateDim {
        #[arg(long)]
        pattern: PathBuf,
        /// CSV with columns n, a_n, c_n.
        #[arg(long)]
        rates: PathBuf,
        /// Defaults to the row entropy dimension.
        #[arg(long)]
        alpha_nu: Option<f64>,
        /// Defaults to the column entropy dimension.
        #[arg(long)]
        beta_nu: Option<f64>,
        /// Invert the index partition (which family handles a_n <= c_n).
        #[arg(long)]
        swap_partition: bool,
    },
    /// Content of a stripe or rectangle in the b-adic restricted gauge.
    Content {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        s: f64,
        /// y digit string, e.g. 0121.
        #[arg(long)]
        ydigits: String,
        /// x digit string; absent means a full-width stripe.
        #[arg(long)]
        xdigits: Option<String>,
        /// Also run the exact covering oracle.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 12)]
        max_gen: usize,
    },
    /// Monte Carlo estimate of the critical content exponent.
    Estimate {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        tau1: f64,
        #[arg(long)]
        tau2: f64,
        #[arg(long, value_enum)]
        mode: CliMode,
        #[arg(long = "N")]
        n: u64,
        #[arg(long)]
        seed: u64,
        /// Write the block sums at s* as CSV (columns s, k, log2_block_sum).
        #[arg(long)]
        emit_blocks: Option<PathBuf>,
        /// Lower end of the bisection bracket.
        #[arg(long, default_value_t = 0.05)]
        s_lo: f64,
        /// Upper end of the bisection bracket; defaults to s0.
        #[arg(long)]
        s_hi: Option<f64>,
    },
    /// CSV sweep of the covering dimension over tau1 at fixed tau2/tau1 ratio.
    Sweep {
        #[arg(long)]
        pattern: PathBuf,
        /// Range spec a:b:n (n values from a to b inclusive).
        #[arg(long)]
        tau1: String,
        #[arg(long, default_value_t = 2.0)]
        ratio: f64,
        /// Output CSV path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum CliMode {
    Iid,
    Orbit,
}

#[derive(Debug)]
struct CliError {
    exit: i32,
    code: &'static str,
    message: String,
    field: Option<String>,
}

impl CliError {
    fn config(field: &str, message: impl Into<String>) -> Self {
        CliError {
            exit: 2,
            code: "ConfigInvalid",
            message: message.into(),
            field: Some(field.to_string()),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        CliError {
            exit: 3,
            code: "IoError",
            message: message.into(),
            field: None,
        }
    }

    fn domain(field: &str, err: carpetdim::Error) -> Self {
        CliError {
            exit: 3,
            code: "DomainError",
            message: err.to_string(),
            field: Some(field.to_string()),
        }
    }

    fn render(&self) -> String {
        let obj = json!({
            "error": {
                "code": self.code,
                "message": self.message,
                "field": self.field,
            }
        });
        serde_json::to_string_pretty(&obj).expect("error object serializes")
    }
}

/// Runs the CLI on `args` (without the binary name) and returns
/// `(exit code, stdout payload)`.
pub fn run(args: &[String]) -> (i32, String) {
    let mut argv = vec!["carpetdim".to_string()];
    argv.extend_from_slice(args);
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return (0, e.render().to_string());
            }
            let err = clap_error(&e);
            return (err.exit, err.render());
        }
    };
    init_threads(cli.threads);
    match dispatch(cli.cmd) {
        Ok(out) => (0, out),
        Err(err) => (err.exit, err.render()),
    }
}

fn clap_error(e: &clap::Error) -> CliError {
    let message = e.render().to_string();
    let code = match e.kind() {
        ErrorKind::InvalidSubcommand | ErrorKind::MissingSubcommand => "UnknownSubcommand",
        _ => "ConfigInvalid",
    };
    // The offending flag, when clap names one, reads "--name" in the message.
    let field = message.split_whitespace().find_map(|tok| {
        let tok = tok.trim_matches(|c: char| !(c.is_alphanumeric() || c == '-' || c == '_'));
        tok.strip_prefix("--")
            .filter(|rest| !rest.is_empty())
            .map(|rest| rest.to_string())
    });
    CliError {
        exit: 2,
        code,
        message,
        field,
    }
}

fn init_threads(flag: Option<usize>) {
    let n = flag.or_else(|| {
        std::env::var("CARPETDIM_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = n {
        // Ignore failure: the global pool can only be built once per process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

#[derive(Deserialize)]
struct PatternFile {
    base: u32,
    cells: Vec<(i64, i64)>,
}

fn load_pattern(path: &PathBuf) -> Result<DigitPattern, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
    let file: PatternFile = serde_json::from_str(&text)
        .map_err(|e| CliError::io(format!("bad pattern JSON in {}: {e}", path.display())))?;
    DigitPattern::new(file.base, file.cells).map_err(|e| CliError::domain("pattern", e))
}

fn parse_digits(pattern: &DigitPattern, text: &str, field: &str) -> Result<DigitSequence, CliError> {
    DigitSequence::parse(pattern.base(), text).map_err(|e| CliError::domain(field, e))
}

fn sha256_hex(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    hex::encode(hasher.finalize())
}

fn timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Wraps a result object with the reproducibility manifest. `config` must be
/// the fully resolved run configuration; its canonical serialization (sorted
/// keys) is hashed, and the timestamp stays outside the hash.
fn emit(mut result: Map<String, Value>, config: Value, seed: Option<u64>) -> String {
    let canonical = serde_json::to_string(&config).expect("config serializes");
    result.insert("seed".into(), json!(seed));
    result.insert("version".into(), json!(VERSION));
    result.insert("config".into(), config);
    result.insert("config_hash".into(), json!(sha256_hex(&canonical)));
    result.insert("timestamp".into(), json!(timestamp()));
    let mut text =
        serde_json::to_string_pretty(&Value::Object(result)).expect("result serializes");
    text.push('\n');
    text
}

fn make_rates(tau1: f64, tau2: f64) -> Result<Rates, CliError> {
    Rates::new(tau1, tau2).map_err(|e| CliError::domain("tau1", e))
}

fn write_csv(path: &PathBuf, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
    w.write_record(header)
        .and_then(|_| rows.iter().try_for_each(|r| w.write_record(r)))
        .and_then(|_| w.flush().map_err(csv::Error::from))
        .map_err(|e| CliError::io(format!("csv write to {}: {e}", path.display())))
}

fn fmt(x: f64) -> String {
    // Shortest round-trip formatting keeps CSVs reproducible.
    let mut buf = ryu_like(x);
    if !buf.contains('.') && !buf.contains('e') && !buf.contains("inf") && !buf.contains("nan") {
        buf.push_str(".0");
    }
    buf
}

fn ryu_like(x: f64) -> String {
    format!("{x}")
}

fn dispatch(cmd: Cmd) -> Result<String, CliError> {
    match cmd {
        Cmd::Spectrum {
            pattern,
            qgrid,
            alphagrid,
            out_q,
            out_alpha,
        } => spectrum_cmd(pattern, qgrid, alphagrid, out_q, out_alpha),
        Cmd::RandomCoverDim {
            pattern,
            tau1,
            tau2,
            oracle,
        } => random_cover_cmd(pattern, tau1, tau2, oracle),
        Cmd::TargetDim {
            pattern,
            tau1,
            tau2,
            dim_mu,
            alpha_nu,
        } => target_dim_cmd(pattern, tau1, tau2, dim_mu, alpha_nu),
        Cmd::FreqDim {
            pattern,
            tau1,
            tau2,
            weights,
            alpha_nu,
        } => freq_dim_cmd(pattern, tau1, tau2, weights, alpha_nu),
        Cmd::GeneralRateDim {
            pattern,
            rates,
            alpha_nu,
            beta_nu,
            swap_partition,
        } => general_rate_cmd(pattern, rates, alpha_nu, beta_nu, swap_partition),
        Cmd::Content {
            pattern,
            s,
            ydigits,
            xdigits,
            oracle,
            max_gen,
        } => content_cmd(pattern, s, ydigits, xdigits, oracle, max_gen),
        Cmd::Estimate {
            pattern,
            tau1,
            tau2,
            mode,
            n,
            seed,
            emit_blocks,
            s_lo,
            s_hi,
        } => estimate_cmd(pattern, tau1, tau2, mode, n, seed, emit_blocks, s_lo, s_hi),
        Cmd::Sweep {
            pattern,
            tau1,
            ratio,
            out,
        } => sweep_cmd(pattern, tau1, ratio, out),
    }
}

fn spectrum_cmd(
    path: PathBuf,
    qgrid: usize,
    alphagrid: usize,
    out_q: PathBuf,
    out_alpha: PathBuf,
) -> Result<String, CliError> {
    if qgrid < 2 || alphagrid < 2 {
        return Err(CliError::config("qgrid", "grids need at least 2 points"));
    }
    let pattern = load_pattern(&path)?;
    let curve = SpectrumCurve::with_grid(pattern.row_weights(), qgrid);

    let q_rows: Vec<Vec<String>> = curve
        .points()
        .iter()
        .map(|p| vec![fmt(p.q), fmt(p.t), fmt(p.kappa), fmt(p.theta)])
        .collect();
    write_csv(&out_q, &["q", "T", "kappa", "theta"], &q_rows)?;

    let (a_min, a_max) = (curve.alpha_min(), curve.alpha_max());
    let mut a_rows = Vec::with_capacity(alphagrid);
    for i in 0..alphagrid {
        let a = a_min + (a_max - a_min) * i as f64 / (alphagrid - 1) as f64;
        let d = curve
            .spectrum_at_alpha(a)
            .map_err(|e| CliError::domain("alphagrid", e))?;
        a_rows.push(vec![fmt(a), fmt(d)]);
    }
    write_csv(&out_alpha, &["alpha", "D_alpha"], &a_rows)?;

    let config = json!({
        "alphagrid": alphagrid,
        "out_alpha": out_alpha.display().to_string(),
        "out_q": out_q.display().to_string(),
        "pattern": path.display().to_string(),
        "qgrid": qgrid,
        "subcommand": "spectrum",
    });
    let mut result = Map::new();
    result.insert("alpha_min".into(), json!(a_min));
    result.insert("alpha_max".into(), json!(a_max));
    result.insert("entropy_dimension".into(), json!(curve.entropy_dimension()));
    result.insert("q_csv_path".into(), json!(out_q.display().to_string()));
    result.insert(
        "alpha_csv_path".into(),
        json!(out_alpha.display().to_string()),
    );
    Ok(emit(result, config, None))
}

fn random_cover_cmd(
    path: PathBuf,
    tau1: f64,
    tau2: f64,
    oracle: bool,
) -> Result<String, CliError> {
    let pattern = load_pattern(&path)?;
    let rates = make_rates(tau1, tau2)?;
    let dim = random_cover_dimension(&pattern, &rates).map_err(|e| CliError::domain("tau1", e))?;
    let mut result = Map::new();
    result.insert("dimension".into(), json!(dim.dimension));
    result.insert("case".into(), serde_json::to_value(dim.case).unwrap());
    result.insert("beta".into(), json!(dim.beta));
    result.insert("kappa1".into(), json!(dim.kappa1));
    result.insert("kappa2".into(), json!(dim.kappa2));
    result.insert("s0".into(), json!(dim.s0));
    if oracle {
        let sup = random_cover_dimension_sup(&pattern, &rates, SUP_GRID)
            .map_err(|e| CliError::domain("oracle", e))?;
        result.insert("oracle".into(), json!(sup));
        result.insert("oracle_gap".into(), json!((dim.dimension - sup).abs()));
    }
    let config = json!({
        "oracle": oracle,
        "pattern": path.display().to_string(),
        "subcommand": "random-cover-dim",
        "tau1": tau1,
        "tau2": tau2,
    });
    Ok(emit(result, config, None))
}

fn target_dim_cmd(
    path: PathBuf,
    tau1: f64,
    tau2: f64,
    dim_mu: Option<f64>,
    alpha_nu: Option<f64>,
) -> Result<String, CliError> {
    let pattern = load_pattern(&path)?;
    let rates = make_rates(tau1, tau2)?;
    let s0 = pattern.similarity_dimension();
    let dim_mu = dim_mu.unwrap_or(s0);
    let alpha_nu = alpha_nu.unwrap_or_else(|| pattern.row_weights().entropy(pattern.base()));
    let dim = shrinking_target_dimension(dim_mu, s0, alpha_nu, &rates)
        .map_err(|e| CliError::domain("tau1", e))?;
    let config = json!({
        "alpha_nu": alpha_nu,
        "dim_mu": dim_mu,
        "pattern": path.display().to_string(),
        "subcommand": "target-dim",
        "tau1": tau1,
        "tau2": tau2,
    });
    let mut result = Map::new();
    result.insert("dimension".into(), json!(dim));
    result.insert("dim_mu".into(), json!(dim_mu));
    result.insert("alpha_nu".into(), json!(alpha_nu));
    result.insert("s0".into(), json!(s0));
    Ok(emit(result, config, None))
}

fn freq_dim_cmd(
    path: PathBuf,
    tau1: f64,
    tau2: f64,
    weights: Option<PathBuf>,
    alpha_nu: Option<f64>,
) -> Result<String, CliError> {
    let pattern = load_pattern(&path)?;
    let rates = make_rates(tau1, tau2)?;
    let cell_weights: Vec<((u8, u8), f64)> = match &weights {
        None => {
            let w = 1.0 / pattern.cell_count() as f64;
            pattern.cells().map(|c| (c, w)).collect()
        }
        Some(file) => {
            let text = fs::read_to_string(file)
                .map_err(|e| CliError::io(format!("cannot read {}: {e}", file.display())))?;
            let raw: Vec<(u8, u8, f64)> = serde_json::from_str(&text)
                .map_err(|e| CliError::io(format!("bad weights JSON: {e}")))?;
            raw.into_iter().map(|(i, j, w)| ((i, j), w)).collect()
        }
    };
    let alpha_nu = match alpha_nu {
        Some(a) => a,
        None => {
            // Row marginal of the cell weights; rows are the second coordinate.
            let mut marginal = vec![0.0f64; pattern.base() as usize];
            for &((_, j), w) in &cell_weights {
                marginal[j as usize] += w;
            }
            let freq =
                WeightVector::from_weights(marginal).map_err(|e| CliError::domain("weights", e))?;
            alpha_of_row_frequencies(&pattern, &freq)
                .map_err(|e| CliError::domain("weights", e))?
        }
    };
    let dim = digit_frequency_dimension(&pattern, &cell_weights, &rates, alpha_nu)
        .map_err(|e| CliError::domain("weights", e))?;
    let config = json!({
        "alpha_nu": alpha_nu,
        "pattern": path.display().to_string(),
        "subcommand": "freq-dim",
        "tau1": tau1,
        "tau2": tau2,
        "weights": weights.as_ref().map(|p| p.display().to_string()),
    });
    let mut result = Map::new();
    result.insert("dimension".into(), json!(dim));
    result.insert("alpha_nu".into(), json!(alpha_nu));
    Ok(emit(result, config, None))
}

fn general_rate_cmd(
    path: PathBuf,
    rates_path: PathBuf,
    alpha_nu: Option<f64>,
    beta_nu: Option<f64>,
    swap_partition: bool,
) -> Result<String, CliError> {
    let pattern = load_pattern(&path)?;
    let mut reader = csv::Reader::from_path(&rates_path)
        .map_err(|e| CliError::io(format!("cannot read {}: {e}", rates_path.display())))?;
    {
        let headers = reader
            .headers()
            .map_err(|e| CliError::io(format!("csv header: {e}")))?;
        let expect = ["n", "a_n", "c_n"];
        if headers.len() != 3 || headers.iter().zip(expect).any(|(h, e)| h.trim() != e) {
            return Err(CliError::config(
                "rates",
                "rates CSV must have columns n, a_n, c_n",
            ));
        }
    }
    let mut by_n: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::io(format!("csv row: {e}")))?;
        let parse = |idx: usize| -> Result<f64, CliError> {
            record[idx]
                .trim()
                .parse()
                .map_err(|e| CliError::config("rates", format!("bad csv number: {e}")))
        };
        let n = parse(0)? as u64;
        by_n.insert(n, (parse(1)?, parse(2)?));
    }
    let a: Vec<f64> = by_n.values().map(|&(a, _)| a).collect();
    let c: Vec<f64> = by_n.values().map(|&(_, c)| c).collect();
    let seqs = RateSequences::new(a, c).map_err(|e| CliError::domain("rates", e))?;

    let s0 = pattern.similarity_dimension();
    let alpha_nu = alpha_nu.unwrap_or_else(|| pattern.row_weights().entropy(pattern.base()));
    let beta_nu = beta_nu.unwrap_or_else(|| pattern.column_weights().entropy(pattern.base()));
    let (dim, at) = general_rate_dimension(&seqs, s0, alpha_nu, beta_nu, swap_partition)
        .map_err(|e| CliError::domain("rates", e))?;
    let achieving_n = *by_n.keys().nth(at).expect("index within horizon");

    let config = json!({
        "alpha_nu": alpha_nu,
        "beta_nu": beta_nu,
        "pattern": path.display().to_string(),
        "rates": rates_path.display().to_string(),
        "subcommand": "general-rate-dim",
        "swap_partition": swap_partition,
    });
    let mut result = Map::new();
    result.insert("dimension".into(), json!(dim));
    result.insert("achieving_n".into(), json!(achieving_n));
    result.insert("horizon".into(), json!(seqs.horizon()));
    Ok(emit(result, config, None))
}

fn content_cmd(
    path: PathBuf,
    s: f64,
    ydigits: String,
    xdigits: Option<String>,
    oracle: bool,
    max_gen: usize,
) -> Result<String, CliError> {
    let pattern = load_pattern(&path)?;
    let y = parse_digits(&pattern, &ydigits, "ydigits")?;
    let x = xdigits
        .as_deref()
        .map(|t| parse_digits(&pattern, t, "xdigits"))
        .transpose()?;
    let b = pattern.base() as f64;

    let (formula, argmin_k) = match &x {
        None => {
            let (log_val, k) =
                stripe_content_log(&pattern, s, &y).map_err(|e| CliError::domain("s", e))?;
            (b.powf(log_val), k)
        }
        Some(x) => {
            let log_val = rectangle_content_log(&pattern, s, x, &y)
                .map_err(|e| CliError::domain("s", e))?;
            let (_, k) = stripe_content_log(&pattern, s, &y.suffix(x.len()))
                .map_err(|e| CliError::domain("s", e))?;
            (b.powf(log_val), x.len() + k)
        }
    };

    let mut result = Map::new();
    result.insert("formula".into(), json!(formula));
    result.insert("argmin_k".into(), json!(argmin_k));
    if oracle {
        let region = match &x {
            None => Region::Stripe(&y),
            Some(x) => Region::Rectangle {
                xdigits: x,
                ydigits: &y,
            },
        };
        let value = exact_content_oracle(&pattern, s, &region, max_gen)
            .map_err(|e| CliError::domain("max-gen", e))?;
        result.insert("oracle".into(), json!(value));
        result.insert("ratio".into(), json!(value / formula));
    } else {
        result.insert("oracle".into(), Value::Null);
        result.insert("ratio".into(), Value::Null);
    }
    let config = json!({
        "max_gen": max_gen,
        "oracle": oracle,
        "pattern": path.display().to_string(),
        "s": s,
        "subcommand": "content",
        "xdigits": xdigits,
        "ydigits": ydigits,
    });
    Ok(emit(result, config, None))
}

#[allow(clippy::too_many_arguments)]
fn estimate_cmd(
    path: PathBuf,
    tau1: f64,
    tau2: f64,
    mode: CliMode,
    n: u64,
    seed: u64,
    emit_blocks: Option<PathBuf>,
    s_lo: f64,
    s_hi: Option<f64>,
) -> Result<String, CliError> {
    let pattern = load_pattern(&path)?;
    let rates = make_rates(tau1, tau2)?;
    let s0 = pattern.similarity_dimension();
    let s_hi = s_hi.unwrap_or(s0);
    let sample_mode = match mode {
        CliMode::Iid => SampleMode::Iid,
        CliMode::Orbit => SampleMode::Orbit,
    };
    let mut source = SampleSource::new(&pattern, sample_mode, seed);
    let est = estimate_critical_exponent(&pattern, &rates, &mut source, n, (s_lo, s_hi))
        .map_err(|e| CliError::domain("s-lo", e))?;
    let closed = random_cover_dimension(&pattern, &rates)
        .map_err(|e| CliError::domain("tau1", e))?
        .dimension;

    if let Some(blocks_path) = &emit_blocks {
        let rows: Vec<Vec<String>> = est
            .blocks
            .blocks
            .iter()
            .map(|&(k, v)| vec![fmt(est.blocks.s), k.to_string(), fmt(v)])
            .collect();
        write_csv(blocks_path, &["s", "k", "log2_block_sum"], &rows)?;
    }

    let mode_name = match mode {
        CliMode::Iid => "iid",
        CliMode::Orbit => "orbit",
    };
    let config = json!({
        "N": n,
        "emit_blocks": emit_blocks.as_ref().map(|p| p.display().to_string()),
        "mode": mode_name,
        "pattern": path.display().to_string(),
        "s_hi": s_hi,
        "s_lo": s_lo,
        "seed": seed,
        "subcommand": "estimate",
        "tau1": tau1,
        "tau2": tau2,
    });
    let mut result = Map::new();
    result.insert("s_star".into(), json!(est.s_star));
    result.insert("closed_form".into(), json!(closed));
    result.insert("abs_error".into(), json!((est.s_star - closed).abs()));
    result.insert(
        "blocks_csv_path".into(),
        json!(emit_blocks.as_ref().map(|p| p.display().to_string())),
    );
    Ok(emit(result, config, Some(seed)))
}

fn parse_range(spec: &str) -> Result<(f64, f64, usize), CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::config("tau1", "range spec must be a:b:n"));
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::config("tau1", "bad range start"))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::config("tau1", "bad range end"))?;
    let n: usize = parts[2]
        .parse()
        .map_err(|_| CliError::config("tau1", "bad range count"))?;
    if n < 1 || b < a {
        return Err(CliError::config("tau1", "need b >= a and n >= 1"));
    }
    Ok((a, b, n))
}

fn sweep_cmd(
    path: PathBuf,
    tau1_spec: String,
    ratio: f64,
    out: Option<PathBuf>,
) -> Result<String, CliError> {
    let pattern = load_pattern(&path)?;
    if ratio.is_nan() || ratio < 1.0 {
        return Err(CliError::config("ratio", "ratio must be >= 1"));
    }
    let (a, b, count) = parse_range(&tau1_spec)?;
    let s0 = pattern.similarity_dimension();
    let mut rows = Vec::with_capacity(count);
    for i in 0..count {
        let t1 = if count == 1 {
            a
        } else {
            a + (b - a) * i as f64 / (count - 1) as f64
        };
        // Below the admissible range the covering is not defined; skip rather
        // than abort so coarse sweeps over wide ranges stay usable.
        if t1 * s0 < 1.0 - 1e-12 {
            continue;
        }
        let rates = make_rates(t1, t1 * ratio)?;
        let dim =
            random_cover_dimension(&pattern, &rates).map_err(|e| CliError::domain("tau1", e))?;
        let case = serde_json::to_value(dim.case).unwrap();
        rows.push(vec![
            fmt(t1),
            fmt(dim.dimension),
            case.as_str().unwrap().to_string(),
        ]);
    }
    match out {
        Some(out_path) => {
            write_csv(&out_path, &["tau1", "dim", "case"], &rows)?;
            let config = json!({
                "out": out_path.display().to_string(),
                "pattern": path.display().to_string(),
                "ratio": ratio,
                "subcommand": "sweep",
                "tau1": tau1_spec,
            });
            let mut result = Map::new();
            result.insert("rows".into(), json!(rows.len()));
            result.insert("csv_path".into(), json!(out_path.display().to_string()));
            Ok(emit(result, config, None))
        }
        None => {
            let mut text = String::from("tau1,dim,case\n");
            for row in &rows {
                text.push_str(&row.join(","));
                text.push('\n');
            }
            Ok(text)
        }
    }
}
