//! Experiment sweeps: a grid of instances times distortions times
//! operations, one CSV row per cell.

use std::cmp::Ordering;
use std::time::Instant;

use metric_ramsey_core::instances::{generate, Family, InstanceParams, InstanceSpec};
use metric_ramsey_core::metric::{
    aspect_ratio, aspect_ratio_of, exact_ramsey_oracle, subdominant_ultrametric, Arith, FiniteMetric, Target, ORACLE_CAP,
};
use metric_ramsey_core::ramsey::{
    equilateral_extract, equilateral_psi, ramsey_extract, small_alpha_extract, DriverOptions, ExtractionResult,
    RamseyError,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const HEADER: [&str; 12] = [
    "family",
    "n",
    "alpha",
    "subset_size",
    "distortion_verified",
    "psi_claimed",
    "exponent_measured",
    "seed",
    "runtime_ms",
    "op",
    "error",
    "stage_trace",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operation {
    Extract,
    Equilateral,
    /// Runs the small-distortion pipeline with `ε = α - 2`.
    SmallAlpha,
    Oracle,
}

impl Operation {
    fn name(self) -> &'static str {
        match self {
            Operation::Extract => "extract",
            Operation::Equilateral => "equilateral",
            Operation::SmallAlpha => "small_alpha",
            Operation::Oracle => "oracle",
        }
    }
}

/// One family over a list of sizes and seeds. The size is the cube
/// dimension for `hypercube` and `gv_code` and the vertex or point count
/// otherwise; `params` supplies the remaining fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridEntry {
    pub family: Family,
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub params: InstanceParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub grid: Vec<GridEntry>,
    pub alphas: Vec<f64>,
    #[serde(default = "default_operations")]
    pub operations: Vec<Operation>,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub exact_mode: bool,
    /// Wall-clock times make the output nondeterministic, so they are only
    /// written when asked for.
    #[serde(default)]
    pub timing: bool,
    #[serde(default = "default_cap")]
    pub cap_n: usize,
}

fn default_operations() -> Vec<Operation> {
    vec![Operation::Extract]
}

fn default_cap() -> usize {
    ORACLE_CAP
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.grid.is_empty() || self.grid.iter().any(|g| g.sizes.is_empty() || g.seeds.is_empty()) {
            return Err(CliError::format("sweep grid must be nonempty in every family, size and seed list"));
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !a.is_finite()) {
            return Err(CliError::format("sweep needs a nonempty list of finite alphas"));
        }
        if self.operations.is_empty() {
            return Err(CliError::format("sweep needs at least one operation"));
        }
        Ok(())
    }

    pub fn specs(&self) -> Vec<InstanceSpec> {
        let mut out = Vec::new();
        for g in &self.grid {
            for &size in &g.sizes {
                for &seed in &g.seeds {
                    let mut params = g.params.clone();
                    match g.family {
                        Family::Hypercube | Family::GvCode => params.d = Some(size),
                        _ => params.n = Some(size),
                    }
                    out.push(InstanceSpec::new(g.family, params, seed));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub family: Family,
    pub n: usize,
    pub alpha: f64,
    pub op: Operation,
    pub seed: u64,
    pub subset_size: Option<usize>,
    pub distortion_verified: Option<f64>,
    pub psi_claimed: Option<f64>,
    pub runtime_ms: Option<f64>,
    pub error: Option<String>,
    pub stage_trace: String,
}

impl SweepRecord {
    /// `log |Y| / log n`.
    pub fn exponent_measured(&self) -> Option<f64> {
        match self.subset_size {
            Some(s) if self.n > 1 && s > 0 => Some((s as f64).ln() / (self.n as f64).ln()),
            _ => None,
        }
    }

    fn key_cmp(&self, o: &Self) -> Ordering {
        self.family
            .name()
            .cmp(o.family.name())
            .then(self.n.cmp(&o.n))
            .then(self.alpha.total_cmp(&o.alpha))
            .then(self.seed.cmp(&o.seed))
            .then(self.op.cmp(&o.op))
    }
}

/// Runs every cell; failures become rows with an error name.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>, CliError> {
    cfg.validate()?;
    let arith = if cfg.exact_mode { Arith::Exact } else { Arith::Float };
    let opts = DriverOptions { arith, oracle_cap: cfg.cap_n, ..DriverOptions::default() };
    let mut rows = Vec::new();
    for spec in cfg.specs() {
        let inst = generate(&spec).map_err(|e| e.to_string()).and_then(|i| {
            i.metric.ok_or_else(|| "Disconnected: the generated graph has no shortest-path metric".to_string())
        });
        for &alpha in &cfg.alphas {
            for &op in &cfg.operations {
                let base = SweepRecord {
                    family: spec.family,
                    n: inst.as_ref().map_or(spec.params.n.unwrap_or(0), |x| x.n()),
                    alpha,
                    op,
                    seed: spec.seed,
                    subset_size: None,
                    distortion_verified: None,
                    psi_claimed: None,
                    runtime_ms: None,
                    error: None,
                    stage_trace: String::new(),
                };
                let row = match &inst {
                    Err(e) => SweepRecord { error: Some(error_name(e)), ..base },
                    Ok(x) => {
                        let start = Instant::now();
                        let mut row = run_cell(x, alpha, op, &opts, base);
                        if cfg.timing {
                            row.runtime_ms = Some(start.elapsed().as_secs_f64() * 1e3);
                        }
                        row
                    }
                };
                rows.push(row);
            }
        }
    }
    rows.sort_by(|a, b| a.key_cmp(b));
    Ok(rows)
}

fn run_cell(x: &FiniteMetric, alpha: f64, op: Operation, opts: &DriverOptions, base: SweepRecord) -> SweepRecord {
    let from_result = |r: &ExtractionResult, base: SweepRecord| -> SweepRecord {
        let verified = r.tree.report_against(x).map(|rep| rep.distortion).ok();
        SweepRecord {
            subset_size: Some(r.len()),
            distortion_verified: verified,
            psi_claimed: Some(r.psi),
            stage_trace: r.trace.iter().map(|s| format!("{}:{}", s.op, s.size)).collect::<Vec<_>>().join(">"),
            ..base
        }
    };
    match op {
        Operation::Extract => match ramsey_extract(x, alpha, None, opts) {
            Ok(r) => from_result(&r, base),
            Err(RamseyError::AlphaAtMostTwo { fallback, .. }) => {
                SweepRecord { error: Some("AlphaAtMostTwo".into()), ..from_result(&fallback, base) }
            }
            Err(e) => SweepRecord { error: Some(error_name(&e.to_string())), ..base },
        },
        Operation::SmallAlpha => match small_alpha_extract(x, None, alpha - 2.0, 1.0, opts) {
            Ok(r) => from_result(&r, base),
            Err(e) => SweepRecord { error: Some(error_name(&e.to_string())), ..base },
        },
        Operation::Equilateral => {
            let s = equilateral_extract(x, alpha);
            SweepRecord {
                subset_size: Some(s.len()),
                distortion_verified: Some(aspect_ratio_of(x, s.indices())),
                psi_claimed: Some(equilateral_psi(aspect_ratio(x), alpha)),
                stage_trace: format!("equilateral:{}", s.len()),
                ..base
            }
        }
        Operation::Oracle => match exact_ramsey_oracle(x, alpha, Target::Ultrametric, opts.oracle_cap, opts.arith) {
            Ok(s) => SweepRecord {
                subset_size: Some(s.len()),
                distortion_verified: Some(subdominant_ultrametric(&x.restrict(s.indices())).1),
                stage_trace: format!("oracle:{}", s.len()),
                ..base
            },
            Err(e) => SweepRecord { error: Some(error_name(&e.to_string())), ..base },
        },
    }
}

/// The variant name that prefixes every domain error message.
fn error_name(msg: &str) -> String {
    msg.split(':').next().unwrap_or(msg).trim().to_string()
}

/// Formats with 17 significant digits, positional for moderate exponents.
pub fn fmt17(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci.split_once('e').map_or(0, |(_, e)| e.parse().unwrap_or(0));
    if (-5..17).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, x)
    } else {
        sci
    }
}

/// CSV text: a `#` line with the compact config, the header, then rows.
pub fn to_csv(cfg: &SweepConfig, rows: &[SweepRecord]) -> Result<String, CliError> {
    let mut out = format!("# config: {}\n", serde_json::to_string(cfg).map_err(|e| CliError::format(e.to_string()))?);
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(HEADER).map_err(io)?;
    let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.family.name().to_string(),
            r.n.to_string(),
            fmt17(r.alpha),
            r.subset_size.map(|s| s.to_string()).unwrap_or_default(),
            opt(r.distortion_verified),
            opt(r.psi_claimed),
            opt(r.exponent_measured()),
            r.seed.to_string(),
            opt(r.runtime_ms),
            r.op.name().to_string(),
            r.error.clone().unwrap_or_default(),
            r.stage_trace.clone(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
    Ok(out)
}
