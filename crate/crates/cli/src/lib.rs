//! Command-line harness around `metric-ramsey-core`: file formats,
//! subcommands and sweeps.

pub mod json;
pub mod sweep;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use metric_ramsey_core::hst::{embed_l2, hst_metric, HstError};
use metric_ramsey_core::instances::{generate, InstanceError, InstanceSpec, GENERATOR};
use metric_ramsey_core::metric::{
    aspect_ratio, aspect_ratio_of, distortion_by, exact_ramsey_oracle, subdominant_ultrametric, Arith, FiniteMetric,
    MetricError, Target, ORACLE_CAP,
};
use metric_ramsey_core::ramsey::{
    equilateral_extract, equilateral_psi, ramsey_extract, small_alpha_extract, DriverOptions, ExtractionResult,
    RamseyError, DEFAULT_THETA,
};
use metric_ramsey_core::spectral::{
    diameter_bound, expander_net, expander_net_bound, markov_drift, self_mixing, self_mixing_exact,
    spectral_profile, DriftMode, MixingMode, SpectralError, MIXING_CAP,
};
use serde_json::{json, Map, Value};

use crate::json::*;

/// Environment variable that forces exact-rational mode when set to `1`.
pub const EXACT_ENV: &str = "METRIC_RAMSEY_EXACT";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("InvalidInput: {0}")]
    Format(String),
    #[error("Io: {0}")]
    Io(String),
    #[error("{0}")]
    Metric(#[from] MetricError),
    #[error("{0}")]
    Hst(#[from] HstError),
    #[error("{0}")]
    Ramsey(#[from] RamseyError),
    #[error("{0}")]
    Spectral(#[from] SpectralError),
    #[error("{0}")]
    Instance(#[from] InstanceError),
}

impl CliError {
    pub fn format(msg: impl Into<String>) -> Self {
        CliError::Format(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "metric-ramsey", version, about = "Ramsey-type subsets of finite metric spaces")]
pub struct Cli {
    /// Exact-rational arithmetic for all checks; distances are written as
    /// exact decimal strings.
    #[arg(long, global = true)]
    pub exact: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Io {
    /// Input JSON file.
    #[arg(long = "in", value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TargetArg {
    Ultrametric,
    Equilateral,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a metric JSON file.
    Validate {
        file: Option<PathBuf>,
        #[command(flatten)]
        io: Io,
    },
    /// Generate an instance from an InstanceSpec JSON file.
    Gen {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        /// Overrides the seed in the spec.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Largest subset close to an ultrametric.
    Extract {
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        io: Io,
        /// Largest input handed to the exhaustive fallback below distortion 2.
        #[arg(long = "cap-n", default_value_t = ORACLE_CAP)]
        cap_n: usize,
    },
    /// Subset of aspect ratio at most alpha.
    Equilateral {
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        io: Io,
    },
    /// Subset embedding into a k-HST with distortion 2 + epsilon.
    SmallAlpha {
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        #[command(flatten)]
        io: Io,
    },
    /// Isometric Euclidean coordinates for the leaves of an HST.
    EmbedL2 {
        #[command(flatten)]
        io: Io,
    },
    /// Exhaustive optimum for small inputs.
    Oracle {
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        io: Io,
        #[arg(long = "cap-n", default_value_t = ORACLE_CAP)]
        cap_n: usize,
        #[arg(long, value_enum, default_value_t = TargetArg::Ultrametric)]
        target: TargetArg,
    },
    /// Spectral quantities and certificates for a regular graph.
    Bounds {
        #[command(flatten)]
        io: Io,
        /// Also report the greedy expander net at this distortion.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Run a sweep config and write CSV.
    Sweep {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

/// Parses `argv`, runs the command and returns the process exit code.
/// Diagnostics go to standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            eprintln!("{}", e.render());
            eprintln!("valid flags: {}", valid_flags(args.get(1)));
            return 2;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn valid_flags(sub: Option<&OsString>) -> String {
    let cmd = Cli::command();
    let sub = sub.and_then(|s| s.to_str()).and_then(|s| cmd.find_subcommand(s)).unwrap_or(&cmd);
    let mut flags: Vec<String> = sub
        .get_arguments()
        .chain(cmd.get_arguments())
        .filter_map(|a| a.get_long().map(|l| format!("--{l}")))
        .collect();
    flags.sort();
    flags.dedup();
    if sub.get_name() == cmd.get_name() {
        let subs: Vec<&str> = cmd.get_subcommands().map(|s| s.get_name()).collect();
        return format!("{} (subcommands: {})", flags.join(" "), subs.join(", "));
    }
    flags.join(" ")
}

fn exact_mode(cli: &Cli) -> bool {
    cli.exact || std::env::var(EXACT_ENV).is_ok_and(|v| v == "1")
}

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let exact = exact_mode(cli);
    let arith = if exact { Arith::Exact } else { Arith::Float };
    match &cli.command {
        Command::Validate { file, io } => {
            let path = file.as_ref().or(io.input.as_ref()).ok_or_else(|| CliError::Usage("validate needs a file".into()))?;
            let (x, _, source) = load_metric(&read_json(path)?, arith)?;
            let out = json!({
                "config": config("validate", exact, &[], source),
                "valid": true,
                "n": x.n(),
                "diameter": number(x.diam(), exact),
                "aspect_ratio": number(aspect_ratio(&x), false),
            });
            write_json(io.out.as_deref(), &out)
        }
        Command::Gen { config: path, seed, out } => {
            let mut spec: InstanceSpec =
                serde_json::from_value(read_json(path)?).map_err(|e| CliError::format(format!("instance spec: {e}")))?;
            if let Some(s) = seed {
                spec.seed = *s;
            }
            let inst = generate(&spec)?;
            let mut m = Map::new();
            m.insert("spec".into(), serde_json::to_value(&spec).expect("specs serialize"));
            m.insert("generator".into(), json!(GENERATOR));
            if let Some(g) = &inst.graph {
                m.insert("graph".into(), graph_to_json(g));
                m.insert("girth".into(), json!(g.girth()));
            }
            if let Some(w) = &inst.words {
                m.insert("words".into(), json!(w));
            }
            if let Some(x) = &inst.metric {
                m.insert("metric".into(), metric_to_json(x, exact));
            }
            write_json(out.as_deref(), &Value::Object(m))
        }
        Command::Extract { alpha, io, cap_n } => {
            let (x, weights, source) = load_metric(&read_input(io)?, arith)?;
            let opts = DriverOptions { arith, oracle_cap: *cap_n, ..DriverOptions::default() };
            let cfg = config("extract", exact, &[("alpha", json!(alpha)), ("theta", json!(DEFAULT_THETA)), ("cap_n", json!(cap_n))], source);
            match ramsey_extract(&x, *alpha, weights.as_deref(), &opts) {
                Ok(r) => write_json(io.out.as_deref(), &extraction(&r, &x, *alpha, arith, exact, cfg)),
                Err(RamseyError::AlphaAtMostTwo { alpha, fallback }) => {
                    let mut v = extraction(&fallback, &x, alpha, arith, exact, cfg);
                    v["error"] = json!("AlphaAtMostTwo");
                    write_json(io.out.as_deref(), &v)?;
                    Err(RamseyError::AlphaAtMostTwo { alpha, fallback }.into())
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::SmallAlpha { epsilon, k, io } => {
            let (x, weights, source) = load_metric(&read_input(io)?, arith)?;
            let opts = DriverOptions { arith, ..DriverOptions::default() };
            let r = small_alpha_extract(&x, weights.as_deref(), *epsilon, *k, &opts)?;
            let cfg = config("small-alpha", exact, &[("epsilon", json!(epsilon)), ("k", json!(k)), ("theta", json!(DEFAULT_THETA))], source);
            write_json(io.out.as_deref(), &extraction(&r, &x, 2.0 + epsilon, arith, exact, cfg))
        }
        Command::Equilateral { alpha, io } => {
            let (x, _, source) = load_metric(&read_input(io)?, arith)?;
            let s = equilateral_extract(&x, *alpha);
            let out = json!({
                "config": config("equilateral", exact, &[("alpha", json!(alpha))], source),
                "subset": subset_to_json(s.indices()),
                "aspect_ratio": number(aspect_ratio_of(&x, s.indices()), false),
                "psi": number(equilateral_psi(aspect_ratio(&x), *alpha), false),
            });
            write_json(io.out.as_deref(), &out)
        }
        Command::Oracle { alpha, io, cap_n, target } => {
            let (x, _, source) = load_metric(&read_input(io)?, arith)?;
            let t = match target {
                TargetArg::Ultrametric => Target::Ultrametric,
                TargetArg::Equilateral => Target::Equilateral,
            };
            let s = exact_ramsey_oracle(&x, *alpha, t, *cap_n, arith)?;
            let sub = x.restrict(s.indices());
            let dist = match t {
                Target::Ultrametric => subdominant_ultrametric(&sub).1,
                Target::Equilateral => aspect_ratio(&sub),
            };
            let tname = format!("{target:?}").to_lowercase();
            let out = json!({
                "config": config("oracle", exact, &[("alpha", json!(alpha)), ("cap_n", json!(cap_n)), ("target", json!(tname))], source),
                "subset": subset_to_json(s.indices()),
                "distortion": number(dist, false),
            });
            write_json(io.out.as_deref(), &out)
        }
        Command::EmbedL2 { io } => {
            let v = read_input(io)?;
            let t = hst_from_json(v.get("hst").unwrap_or(&v))?;
            let (ids, coords) = embed_l2(&t);
            let m = hst_metric(&t)?;
            let n = ids.len();
            let euclid = |i: usize, j: usize| {
                coords[i].iter().zip(&coords[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
            };
            let mut worst: f64 = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    let d = m.d(i, j);
                    worst = worst.max((euclid(i, j) - d).abs() / d);
                }
            }
            let report = distortion_by(n, |i, j| m.d(i, j), euclid);
            let out = json!({
                "config": config("embed-l2", exact, &[], v.get("config").cloned()),
                "ids": ids,
                "coordinates": coords,
                "max_relative_error": number(worst, false),
                "distortion": report_to_json(&report, false),
            });
            write_json(io.out.as_deref(), &out)
        }
        Command::Bounds { io, alpha } => {
            let v = read_input(io)?;
            let g = graph_from_json(v.get("graph").unwrap_or(&v))?;
            let p = spectral_profile(&g)?;
            let mixing = if g.n() <= MIXING_CAP {
                let (a, b) = self_mixing_exact(&g)?;
                json!({ "mode": "exact", "numerator": a, "denominator": b, "value": number(a as f64 / b as f64, false) })
            } else {
                json!({ "mode": "spectral", "value": number(self_mixing(&g, MixingMode::Spectral)?, false) })
            };
            let girth = g.girth();
            let drift: Vec<Value> = (1..=girth.map_or(4, |x| (x - 1) / 2).clamp(1, 4))
                .filter_map(|s| markov_drift(&g, s, DriftMode::Exact).ok().map(|d| json!({ "s": s, "drift": number(d, false) })))
                .collect();
            let mut out = json!({
                "config": config("bounds", exact, &[("alpha", json!(alpha))], v.get("spec").cloned()),
                "n": g.n(),
                "degree": p.degree,
                "eigenvalues": p.eigenvalues.iter().map(|&e| number(e, false)).collect::<Vec<_>>(),
                "gamma": number(p.gamma, false),
                "gamma_plus": number(p.gamma_plus, false),
                "lambda_min": number(p.lambda_min, false),
                "self_mixing": mixing,
                "self_mixing_bound": number(-p.lambda_min / p.degree as f64, false),
                "girth": girth,
                "diameter": g.diameter(),
                "diameter_bound": diameter_bound(&g)?.map(|b| number(b, false)),
                "drift": drift,
            });
            if let (Some(a), Some(diam)) = (alpha, g.diameter()) {
                let net = expander_net(&g, *a)?;
                out["expander_net"] = json!({
                    "size": net.len(),
                    "bound": number(expander_net_bound(g.n(), p.degree, diam, *a), false),
                    "vertices": net,
                });
            }
            write_json(io.out.as_deref(), &out)
        }
        Command::Sweep { config: path, out } => {
            let cfg: sweep::SweepConfig =
                serde_json::from_value(read_json(path)?).map_err(|e| CliError::format(format!("sweep config: {e}")))?;
            let cfg = sweep::SweepConfig { exact_mode: cfg.exact_mode || exact, ..cfg };
            let rows = sweep::run_sweep(&cfg)?;
            let text = sweep::to_csv(&cfg, &rows)?;
            let target = out.clone().or_else(|| cfg.output.as_ref().map(PathBuf::from));
            write_text(target.as_deref(), &text)
        }
    }
}

fn config(command: &str, exact: bool, fields: &[(&str, Value)], source: Option<Value>) -> Value {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("exact".into(), json!(exact));
    for (k, v) in fields {
        m.insert((*k).into(), v.clone());
    }
    m.insert("source".into(), source.unwrap_or(Value::Null));
    Value::Object(m)
}

fn extraction(r: &ExtractionResult, x: &FiniteMetric, alpha: f64, arith: Arith, exact: bool, cfg: Value) -> Value {
    let mut m = Map::new();
    m.insert("config".into(), cfg);
    m.extend(extraction_to_json(r, exact));
    m.insert("verified".into(), json!(r.verify_distortion(x, alpha, arith)));
    Value::Object(m)
}

/// A metric, optional weights, and the spec that generated it when the
/// input is a `gen` artifact.
fn load_metric(v: &Value, arith: Arith) -> Result<(FiniteMetric, Option<Vec<f64>>, Option<Value>), CliError> {
    let m = v.get("metric").unwrap_or(v);
    let x = metric_from_json(m, arith)?;
    let weights = match v.get("weights").or_else(|| m.get("weights")) {
        None | Some(Value::Null) => None,
        Some(Value::Array(a)) => Some(a.iter().map(read_number).collect::<Result<Vec<_>, _>>()?),
        Some(_) => return Err(CliError::format("`weights` must be an array")),
    };
    Ok((x, weights, v.get("spec").cloned()))
}

fn read_input(io: &Io) -> Result<Value, CliError> {
    let path = io.input.as_ref().ok_or_else(|| CliError::Usage("missing --in FILE".into()))?;
    read_json(path)
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::format(format!("{}: {e}", path.display())))
}

fn write_json(path: Option<&Path>, v: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(v).expect("values serialize");
    text.push('\n');
    write_text(path, &text)
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
