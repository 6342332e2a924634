//! The `netpower` command line.
//!
//! Every command is a pure function of its flags, input files and seed. A
//! JSON file passed with `--config` supplies default flags (keys are flag
//! names); flags on the command line take precedence.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use netpower_core::oracle::{
    expected_power_design, power_design, trial_stream, type_one_design, CltPlan,
};
use netpower_core::{
    assign_labels, estimate_power_from_probs, flip_random, generate_graph,
    neighborhood_switch_probs, power_bernoulli_with, power_normal, switch_moments, Axis,
    BernoulliForm, ClassLabels, CltDiagnostics, DegreeMode, EdgeListOptions, GapRule, Graph,
    GraphModel, Grid, Label, MCEstimate, MeasurementModel, Source, SurfaceBase, SurfacePlan,
    SwitchProbs, TestConfig,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::format::{fmt_sig, round_sig, to_json};
use crate::{io, par, Error};

pub const SEED_ENV: &str = "NETPOWER_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "netpower",
    version,
    about = "Power of A/B tests under network interference"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form power for a given gap n_S - n_D.
    #[command(args_override_self = true)]
    Power(PowerArgs),
    /// Plug-in power for a network: labels, switching probabilities, power.
    #[command(args_override_self = true)]
    Estimate(EstimateArgs),
    /// Power over a grid of parameters, one CSV row per point.
    #[command(args_override_self = true)]
    Surface(SurfaceArgs),
    /// Monte Carlo simulation of the experiment.
    #[command(args_override_self = true)]
    Simulate(SimulateArgs),
    /// Degree distribution of a network.
    #[command(args_override_self = true)]
    DegreeDist(DegreeArgs),
    /// Writes a synthetic network as an edge list.
    #[command(args_override_self = true)]
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// Master seed; falls back to $NETPOWER_SEED, then 0.
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores). Never changes results.
    #[arg(long)]
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Primary output file (default: stdout). A `<stem>.config.json`
    /// sidecar is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Sidecar location when writing to stdout.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// JSON object of default flag values.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Normal,
    Bernoulli,
}

#[derive(Debug, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelKind::Normal)]
    pub model: ModelKind,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// μ_A − μ_B (normal model default: 1).
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long)]
    pub mu_a: Option<f64>,
    /// Defaults to 0 under the normal model.
    #[arg(long)]
    pub mu_b: Option<f64>,
    /// Bernoulli power with the first term divided by σ_{A,B}.
    #[arg(long)]
    pub bernoulli_as_printed: bool,
}

impl ModelArgs {
    /// Resolves the means. With `delta_swept`, a missing δ is left at 0 for
    /// the sweep to fill in.
    fn config(&self, delta_swept: bool) -> Result<TestConfig, Error> {
        let mu_b = match (self.model, self.mu_b, self.mu_a, self.delta) {
            (_, Some(mu_b), _, _) => mu_b,
            (ModelKind::Normal, None, _, _) => 0.0,
            (ModelKind::Bernoulli, None, Some(mu_a), Some(delta)) => mu_a - delta,
            (ModelKind::Bernoulli, None, _, _) => {
                return Err(Error::Usage("the bernoulli model needs --mu-b".into()))
            }
        };
        let mu_a = match (self.mu_a, self.delta) {
            (Some(mu_a), Some(delta)) if (mu_a - mu_b - delta).abs() > 1e-12 => {
                return Err(Error::Usage("--mu-a, --mu-b and --delta disagree".into()))
            }
            (Some(mu_a), _) => mu_a,
            (None, Some(delta)) => mu_b + delta,
            (None, None) if delta_swept => mu_b,
            (None, None) => match self.model {
                ModelKind::Normal => mu_b + 1.0,
                ModelKind::Bernoulli => {
                    return Err(Error::Usage(
                        "the bernoulli model needs --mu-a or --delta".into(),
                    ))
                }
            },
        };
        let mut cfg = match self.model {
            ModelKind::Normal => TestConfig::normal(self.alpha, mu_a, mu_b, self.sigma),
            ModelKind::Bernoulli => TestConfig::bernoulli(self.alpha, mu_a, mu_b),
        };
        if self.bernoulli_as_printed {
            cfg.bernoulli_form = BernoulliForm::AsPrinted;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct GraphArgs {
    /// Edge list: one `u v` pair per line, `#` comments.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Read edges as u -> v ("u follows v").
    #[arg(long)]
    pub directed: bool,
    /// Node count; ids are then indices 0..N-1 and isolated nodes are kept.
    #[arg(long)]
    pub nodes: Option<usize>,
}

impl GraphArgs {
    fn load(&self) -> Result<Option<Graph>, Error> {
        let Some(path) = &self.graph else {
            return Ok(None);
        };
        let opts = EdgeListOptions {
            directed: self.directed.then_some(true),
            nodes: self.nodes,
        };
        io::read_graph(path, opts).map(Some)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct PowerArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub n: usize,
    /// n_S − n_D.
    #[arg(long, allow_hyphen_values = true)]
    pub gap: f64,
    /// Realized class A size ñ_A (bernoulli; default n/2).
    #[arg(long)]
    pub na: Option<f64>,
    /// Realized class B size ñ_B (bernoulli; default n − ñ_A).
    #[arg(long)]
    pub nb: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct EstimateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    /// Fraction of units intended for A; ⌈n·p_A⌉ are drawn at random.
    #[arg(long, default_value_t = 0.5)]
    pub p_a: f64,
    /// Fixed intended labels, e.g. `A,B,B`.
    #[arg(long, conflicts_with = "labels_file")]
    pub labels: Option<String>,
    /// Fixed intended labels, one `A`/`B` per line.
    #[arg(long)]
    pub labels_file: Option<PathBuf>,
    #[arg(long)]
    pub write_labels: Option<PathBuf>,
    /// Per-node switching probabilities as `node_id,p` CSV.
    #[arg(long)]
    pub write_probs: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[group(id = "source", required = true, multiple = false)]
pub struct SourceArgs {
    /// Switching from the neighborhoods of this edge list.
    #[arg(long, group = "source")]
    pub graph: Option<PathBuf>,
    /// Switching on a generated network: `pa:N:M` or `er:N:P`.
    #[arg(long, group = "source")]
    pub generate: Option<String>,
    /// Every unit switches with probability --switch-prob.
    #[arg(long, group = "source")]
    pub uniform: bool,
    /// Fixed gap n_S − n_D.
    #[arg(long, group = "source", allow_hyphen_values = true)]
    pub gap: Option<f64>,
    /// Fixed gap as a fraction of n.
    #[arg(long, group = "source", allow_hyphen_values = true)]
    pub gap_fraction: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct SurfaceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub directed: bool,
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Grid values: `a,b,c` or `start:stop:step`.
    #[arg(long)]
    pub grid_n: Option<String>,
    #[arg(long)]
    pub grid_p_a: Option<String>,
    #[arg(long)]
    pub grid_switch_prob: Option<String>,
    #[arg(long)]
    pub grid_delta: Option<String>,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub p_a: f64,
    #[arg(long, default_value_t = 0.0)]
    pub switch_prob: f64,
    /// Random label assignments averaged per point on a network.
    #[arg(long, default_value_t = netpower_core::surface::DEFAULT_LABEL_DRAWS)]
    pub label_draws: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SimMode {
    /// Rejection rate under H1 with fixed realized labels.
    Power,
    /// Rejection rate under H0 with fixed realized labels.
    Type1,
    /// Rejection rate under H1 with labels switched at random.
    Expected,
    /// Distribution of the standardized gap.
    Clt,
}

#[derive(Debug, Args, Serialize)]
#[group(id = "probs", multiple = false)]
pub struct ProbArgs {
    /// Switching from the neighborhoods of this edge list.
    #[arg(long, group = "probs")]
    pub graph: Option<PathBuf>,
    /// Every unit switches with this probability.
    #[arg(long, group = "probs")]
    pub switch_prob: Option<f64>,
    /// Independent Uniform(0, 1) switching probabilities.
    #[arg(long, group = "probs")]
    pub random_p: bool,
    /// Switching probabilities from a `node_id,p` CSV.
    #[arg(long, group = "probs")]
    pub probs_file: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = SimMode::Power)]
    pub mode: SimMode,
    /// Units (default: the network size, else 100).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub p_a: f64,
    #[arg(long, conflicts_with = "labels_file")]
    pub labels: Option<String>,
    #[arg(long)]
    pub labels_file: Option<PathBuf>,
    /// Realized labels, e.g. `A,A,B`.
    #[arg(long, conflicts_with_all = ["realized_file", "n_d"])]
    pub realized: Option<String>,
    #[arg(long, conflicts_with = "n_d")]
    pub realized_file: Option<PathBuf>,
    /// Flip this many intended labels at random to get the realized ones.
    #[arg(long)]
    pub n_d: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub probs: ProbArgs,
    #[arg(long)]
    pub directed: bool,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long, default_value_t = 200_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 10_000)]
    pub replicates: u64,
    /// Per-trial outcomes (or per-replicate gaps) as CSV.
    #[arg(long)]
    pub dump_trials: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DegreeKind {
    In,
    Out,
    Undirected,
}

#[derive(Debug, Args, Serialize)]
pub struct DegreeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub directed: bool,
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Default: undirected for undirected graphs, out for directed ones.
    #[arg(long, value_enum)]
    pub mode: Option<DegreeKind>,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// `pa:N:M` (preferential attachment) or `er:N:P` (Erdős–Rényi).
    pub model: String,
}

/// What a command produced: the primary output plus sidecar material.
struct Outcome {
    primary: String,
    resolved: Value,
    summary: Value,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(args) => args,
        Err(e) => {
            eprintln!("netpower: {e}");
            return e.exit_code();
        }
    };
    let cli = match parse(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("netpower: {e}");
            e.exit_code()
        }
    }
}

pub fn parse(args: Vec<OsString>) -> Result<Cli, clap::Error> {
    let matches = Cli::command().try_get_matches_from(args)?;
    Cli::from_arg_matches(&matches)
}

/// Splices the flags from a `--config` file in right after the subcommand,
/// so that any flag given explicitly (which comes later) overrides them.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, Error> {
    let mut path = None;
    for (i, a) in args.iter().enumerate().skip(2) {
        let a = a.to_string_lossy();
        if a == "--config" {
            path = args.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = std::fs::read_to_string(&path).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    let format_err = |message: String| Error::Format {
        path: path.clone(),
        message,
    };
    let value: Value = serde_json::from_str(&text).map_err(|e| format_err(e.to_string()))?;
    let Value::Object(map) = value else {
        return Err(format_err("expected a JSON object of flags".into()));
    };
    let mut flags = Vec::new();
    for (key, value) in map {
        if key == "config" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        let text = match value {
            Value::Null | Value::Bool(false) => continue,
            Value::Bool(true) => {
                flags.push(OsString::from(flag));
                continue;
            }
            Value::String(s) => s,
            Value::Number(n) => n.to_string(),
            Value::Array(items) => items
                .iter()
                .map(|v| match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
            Value::Object(_) => return Err(format_err(format!("`{key}` must not be an object"))),
        };
        flags.push(OsString::from(format!("{flag}={text}")));
    }
    let mut out = args;
    out.splice(2..2, flags);
    Ok(out)
}

pub fn execute(cli: &Cli) -> Result<(), Error> {
    let (name, common, args): (&str, &Common, Value) = match &cli.command {
        Command::Power(a) => ("power", &a.common, to_value(a)),
        Command::Estimate(a) => ("estimate", &a.common, to_value(a)),
        Command::Surface(a) => ("surface", &a.common, to_value(a)),
        Command::Simulate(a) => ("simulate", &a.common, to_value(a)),
        Command::DegreeDist(a) => ("degree-dist", &a.common, to_value(a)),
        Command::Generate(a) => ("generate", &a.common, to_value(a)),
    };
    let outcome = par::with_threads(common.threads, || match &cli.command {
        Command::Power(a) => cmd_power(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Surface(a) => cmd_surface(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::DegreeDist(a) => cmd_degree_dist(a),
        Command::Generate(a) => cmd_generate(a),
    })??;

    io::emit(common.out.as_deref(), &outcome.primary)?;
    let sidecar = json!({
        "command": name,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": common.seed,
        "args": args,
        "resolved": outcome.resolved,
        "summary": outcome.summary,
    });
    let sidecar = to_json(&sidecar).expect("sidecar serializes");
    if let Some(path) = &common.sidecar {
        io::emit(Some(path), &sidecar)?;
    } else if let Some(out) = &common.out {
        io::write_sidecar(out, &sidecar)?;
    }
    Ok(())
}

fn to_value<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("arguments serialize")
}

fn json_text<T: Serialize>(value: &T) -> String {
    to_json(value).expect("output serializes")
}

fn single_row(header: &[&str], values: &[String]) -> String {
    format!("{}\n{}\n", header.join(","), values.join(","))
}

fn cmd_power(a: &PowerArgs) -> Result<Outcome, Error> {
    let cfg = a.model.config(false)?;
    let (beta, resolved) = match cfg.model {
        MeasurementModel::Normal { sigma, .. } => {
            let beta = power_normal(a.n, a.gap, cfg.delta(), sigma, cfg.alpha)?;
            (beta, json!({ "config": cfg }))
        }
        MeasurementModel::Bernoulli { mu_a, mu_b } => {
            let na =
                a.na.unwrap_or(a.n as f64 - a.nb.unwrap_or(a.n as f64 / 2.0));
            let nb = a.nb.unwrap_or(a.n as f64 - na);
            let beta = power_bernoulli_with(
                a.n,
                a.gap,
                na,
                nb,
                mu_a,
                mu_b,
                cfg.alpha,
                cfg.bernoulli_form,
            )?;
            (beta, json!({ "config": cfg, "na": na, "nb": nb }))
        }
    };
    let primary = match a.common.format {
        None => format!("{}\n", fmt_sig(beta)),
        Some(OutputFormat::Csv) => single_row(&["beta"], &[fmt_sig(beta)]),
        Some(OutputFormat::Json) => json_text(&json!({ "beta": beta })),
    };
    Ok(Outcome {
        primary,
        resolved,
        summary: json!({ "beta": beta }),
    })
}

fn inline_or_file(
    inline: &Option<String>,
    file: &Option<PathBuf>,
) -> Result<Option<ClassLabels>, Error> {
    match (inline, file) {
        (Some(s), _) => io::parse_inline_labels(s).map(Some),
        (None, Some(path)) => io::read_labels(path).map(Some),
        (None, None) => Ok(None),
    }
}

fn require_len(c: &ClassLabels, n: usize, what: &str) -> Result<(), Error> {
    if c.len() != n {
        return Err(Error::Usage(format!(
            "{what} has {} labels but {n} units are expected",
            c.len()
        )));
    }
    Ok(())
}

fn cmd_estimate(a: &EstimateArgs) -> Result<Outcome, Error> {
    let cfg = a.model.config(false)?;
    let g = a
        .graph
        .load()?
        .ok_or_else(|| Error::Usage("estimate needs --graph".into()))?;
    let n = g.node_count();
    let c = match inline_or_file(&a.labels, &a.labels_file)? {
        Some(c) => {
            require_len(&c, n, "the label vector")?;
            c
        }
        None => assign_labels(n, a.p_a, a.common.seed)?,
    };
    let p = neighborhood_switch_probs(&g, &c)?;
    let est = estimate_power_from_probs(&p, &c, &cfg)?;
    let m = switch_moments(&p, &c)?;
    if let Some(path) = &a.write_labels {
        io::write_labels(path, &c)?;
    }
    if let Some(path) = &a.write_probs {
        io::write_switch_probs(path, &p, Some(&g))?;
    }
    let primary = match a.common.format {
        None | Some(OutputFormat::Json) => json_text(&est),
        Some(OutputFormat::Csv) => single_row(
            &["n", "gap", "exp_nA", "exp_nB", "beta", "assumption_flags"],
            &[
                est.n.to_string(),
                fmt_sig(est.gap),
                fmt_sig(est.exp_nA),
                fmt_sig(est.exp_nB),
                fmt_sig(est.beta),
                flags_text(&est.assumption_flags),
            ],
        ),
    };
    Ok(Outcome {
        primary,
        resolved: json!({ "config": cfg }),
        summary: json!({
            "nodes": n,
            "edges": g.edge_count(),
            "directed": g.is_directed(),
            "n_a": c.count(Label::A),
            "n_b": c.count(Label::B),
            "moments": m,
            "mean_switch_prob": p.mean(),
            "beta": est.beta,
        }),
    })
}

fn flags_text(flags: &[netpower_core::AssumptionFlag]) -> String {
    flags
        .iter()
        .map(|f| f.as_str())
        .collect::<Vec<_>>()
        .join(";")
}

/// `pa:N:M` or `er:N:P`.
pub fn parse_graph_model(spec: &str) -> Result<GraphModel, Error> {
    let bad = || {
        Error::Usage(format!(
            "invalid graph model `{spec}` (expected pa:N:M or er:N:P)"
        ))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let [kind, n, x] = parts.as_slice() else {
        return Err(bad());
    };
    let n: usize = n.parse().map_err(|_| bad())?;
    match *kind {
        "pa" => Ok(GraphModel::PreferentialAttachment {
            n,
            m: x.parse().map_err(|_| bad())?,
        }),
        "er" => Ok(GraphModel::ErdosRenyi {
            n,
            edge_prob: x.parse().map_err(|_| bad())?,
        }),
        _ => Err(bad()),
    }
}

/// `a,b,c` or an inclusive range `start:stop:step`; values are rounded to
/// 12 significant digits so that ranges do not accumulate float noise.
pub fn parse_grid_values(flag: &str, spec: &str) -> Result<Vec<f64>, Error> {
    let bad = |why: &str| Error::Usage(format!("--{flag} `{spec}`: {why}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(bad("expected start:stop:step"));
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if !(step > 0.0) || !(stop >= start) {
            return Err(bad("need step > 0 and stop >= start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            return Err(bad("too many points"));
        }
        Ok((0..count)
            .map(|k| round_sig(start + k as f64 * step))
            .collect())
    } else {
        spec.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(num)
            .collect()
    }
}

fn cmd_surface(a: &SurfaceArgs) -> Result<Outcome, Error> {
    if a.common.out.is_none() {
        return Err(Error::Usage("surface needs --out".into()));
    }
    let cfg = a.model.config(a.grid_delta.is_some())?;
    let mut grid = Grid::new();
    for (axis, flag, spec) in [
        (Axis::N, "grid-n", &a.grid_n),
        (Axis::PA, "grid-p-a", &a.grid_p_a),
        (Axis::SwitchProb, "grid-switch-prob", &a.grid_switch_prob),
        (Axis::Delta, "grid-delta", &a.grid_delta),
    ] {
        if let Some(spec) = spec {
            grid = grid.axis(axis, parse_grid_values(flag, spec)?);
        }
    }
    let base = SurfaceBase {
        n: a.n,
        p_a: a.p_a,
        switch_prob: a.switch_prob,
        label_draws: a.label_draws,
        config: cfg,
    };
    let s = &a.source;
    let graph = if let Some(path) = &s.graph {
        let opts = EdgeListOptions {
            directed: a.directed.then_some(true),
            nodes: a.nodes,
        };
        Some(io::read_graph(path, opts)?)
    } else if let Some(spec) = &s.generate {
        Some(generate_graph(parse_graph_model(spec)?, a.common.seed)?)
    } else {
        None
    };
    let source = match (&graph, s.gap, s.gap_fraction) {
        (Some(g), _, _) => Source::Graph(g),
        (None, Some(gap), _) => Source::FixedGap(GapRule::Absolute(gap)),
        (None, None, Some(f)) => Source::FixedGap(GapRule::FractionOfN(f)),
        (None, None, None) => Source::UniformP,
    };
    let plan = SurfacePlan::new(grid, base, source, a.common.seed)?;
    let rows = par::power_surface(&plan)?;
    let axes: Vec<&str> = plan
        .grid()
        .axes()
        .iter()
        .map(|(axis, _)| axis.name())
        .collect();
    let primary = match a.common.format {
        None | Some(OutputFormat::Csv) => io::format_surface(&axes, &rows),
        Some(OutputFormat::Json) => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let mut obj = serde_json::Map::new();
                    for &(axis, v) in &r.point {
                        obj.insert(axis.name().into(), json!(v));
                    }
                    obj.insert("beta".into(), json!(r.beta));
                    obj.insert("assumption_flags".into(), json!(r.assumption_flags));
                    Value::Object(obj)
                })
                .collect();
            json_text(&rows)
        }
    };
    let mut summary = json!({ "points": rows.len() });
    if let Some(g) = &graph {
        summary["nodes"] = json!(g.node_count());
        summary["edges"] = json!(g.edge_count());
    }
    Ok(Outcome {
        primary,
        resolved: json!({ "base": base, "grid": axes_json(plan.grid()) }),
        summary,
    })
}

fn axes_json(grid: &Grid) -> Value {
    grid.axes()
        .iter()
        .map(|(axis, values)| json!({ "axis": axis.name(), "values": values }))
        .collect()
}

fn cmd_simulate(a: &SimulateArgs) -> Result<Outcome, Error> {
    let seed = a.common.seed;
    let graph = if let Some(path) = &a.probs.graph {
        let opts = EdgeListOptions {
            directed: a.directed.then_some(true),
            nodes: a.nodes,
        };
        Some(io::read_graph(path, opts)?)
    } else {
        None
    };
    let c = match inline_or_file(&a.labels, &a.labels_file)? {
        Some(c) => c,
        None => {
            let n = a.n.or(graph.as_ref().map(Graph::node_count)).unwrap_or(100);
            assign_labels(n, a.p_a, seed)?
        }
    };
    let n = c.len();
    if let Some(expected) = a.n {
        require_len(&c, expected, "the label vector")?;
    }
    if let Some(g) = &graph {
        require_len(&c, g.node_count(), "the label vector")?;
    }

    let mut summary = json!({ "mode": a.mode, "n": n, "n_a": c.count(Label::A) });
    let (primary_value, csv_row, dump): (Value, (Vec<&str>, Vec<String>), Option<String>) =
        match a.mode {
            SimMode::Power | SimMode::Type1 => {
                let d = match (&a.realized, &a.realized_file, a.n_d) {
                    (None, None, Some(k)) => flip_random(&c, k, seed)?,
                    (r, f, _) => inline_or_file(r, f)?.unwrap_or_else(|| c.clone()),
                };
                require_len(&d, n, "the realized label vector")?;
                let cfg = a.model.config(a.mode == SimMode::Type1)?;
                let outcomes = match a.mode {
                    SimMode::Power => {
                        let design = power_design(&c, &d, &cfg, a.trials)?;
                        trials_or_count(&design, a.trials, seed, a.dump_trials.is_some())
                    }
                    _ => {
                        let design = type_one_design(&c, &d, &cfg.null(), a.trials)?;
                        trials_or_count(&design, a.trials, seed, a.dump_trials.is_some())
                    }
                };
                let diff = c
                    .as_slice()
                    .iter()
                    .zip(d.as_slice())
                    .filter(|(x, y)| x != y)
                    .count();
                summary["n_d"] = json!(diff);
                summary["gap"] = json!(n as i64 - 2 * diff as i64);
                summary["config"] = json!(if a.mode == SimMode::Type1 {
                    cfg.null()
                } else {
                    cfg
                });
                mc_outputs(outcomes, a.trials, seed)
            }
            SimMode::Expected => {
                let cfg = a.model.config(false)?;
                let p = switch_probs(a, graph.as_ref(), &c)?;
                let design = expected_power_design(&p, &c, &cfg, a.trials)?;
                let outcomes = trials_or_count(&design, a.trials, seed, a.dump_trials.is_some());
                summary["moments"] = json!(switch_moments(&p, &c)?);
                summary["plug_in_beta"] = json!(estimate_power_from_probs(&p, &c, &cfg)?.beta);
                summary["config"] = json!(cfg);
                mc_outputs(outcomes, a.trials, seed)
            }
            SimMode::Clt => {
                let p = switch_probs(a, graph.as_ref(), &c)?;
                let plan = CltPlan::new(&p, &c, a.replicates)?;
                let values = par::standardized_gaps(&plan, a.replicates, seed);
                summary["moments"] = json!(plan.moments());
                let dump = a.dump_trials.as_ref().map(|_| {
                    let mut s = String::from("replicate,standardized_gap\n");
                    for (k, v) in values.iter().enumerate() {
                        s.push_str(&format!("{k},{}\n", fmt_sig(*v)));
                    }
                    s
                });
                let diag = CltDiagnostics::from_values(values, seed);
                (
                    to_value(&diag),
                    (
                        vec!["mean", "sd", "ks_distance", "replicates", "seed"],
                        vec![
                            fmt_sig(diag.mean),
                            fmt_sig(diag.sd),
                            fmt_sig(diag.ks_distance),
                            diag.replicates.to_string(),
                            diag.seed.to_string(),
                        ],
                    ),
                    dump,
                )
            }
        };
    if let (Some(path), Some(dump)) = (&a.dump_trials, dump) {
        std::fs::write(path, dump).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
    }
    let primary = match a.common.format {
        None | Some(OutputFormat::Json) => json_text(&primary_value),
        Some(OutputFormat::Csv) => single_row(&csv_row.0, &csv_row.1),
    };
    Ok(Outcome {
        primary,
        resolved: json!({ "trials": a.trials, "replicates": a.replicates }),
        summary,
    })
}

enum Trials {
    Count(u64),
    Each(Vec<bool>),
}

fn trials_or_count<D: netpower_core::oracle::Design>(
    design: &D,
    trials: u64,
    seed: u64,
    keep: bool,
) -> Trials {
    if keep {
        Trials::Each(par::par_trial_outcomes(design, trial_stream(seed), trials))
    } else {
        Trials::Count(par::par_count_rejections(
            design,
            trial_stream(seed),
            trials,
        ))
    }
}

type SimOutputs = (Value, (Vec<&'static str>, Vec<String>), Option<String>);

fn mc_outputs(outcomes: Trials, trials: u64, seed: u64) -> SimOutputs {
    let (hits, dump) = match outcomes {
        Trials::Count(h) => (h, None),
        Trials::Each(each) => {
            let mut s = String::from("trial,reject\n");
            for (k, r) in each.iter().enumerate() {
                s.push_str(&format!("{k},{}\n", *r as u8));
            }
            (each.iter().filter(|&&r| r).count() as u64, Some(s))
        }
    };
    let est = MCEstimate::from_counts(hits, trials, seed);
    (
        to_value(&est),
        (
            vec!["estimate", "std_error", "trials", "seed"],
            vec![
                fmt_sig(est.estimate),
                fmt_sig(est.std_error),
                est.trials.to_string(),
                est.seed.to_string(),
            ],
        ),
        dump,
    )
}

fn switch_probs(
    a: &SimulateArgs,
    g: Option<&Graph>,
    c: &ClassLabels,
) -> Result<SwitchProbs, Error> {
    let n = c.len();
    let p = if let Some(g) = g {
        neighborhood_switch_probs(g, c)?
    } else if let Some(q) = a.probs.switch_prob {
        SwitchProbs::uniform(n, q)?
    } else if a.probs.random_p {
        SwitchProbs::random_uniform(n, a.common.seed)
    } else if let Some(path) = &a.probs.probs_file {
        io::read_switch_probs(path)?
    } else {
        return Err(Error::Usage(
            "this mode needs switching probabilities: --graph, --switch-prob, --random-p or --probs-file"
                .into(),
        ));
    };
    if p.len() != n {
        return Err(Error::Usage(format!(
            "{} switching probabilities for {n} units",
            p.len()
        )));
    }
    Ok(p)
}

fn cmd_degree_dist(a: &DegreeArgs) -> Result<Outcome, Error> {
    let opts = EdgeListOptions {
        directed: a.directed.then_some(true),
        nodes: a.nodes,
    };
    let g = io::read_graph(&a.graph, opts)?;
    let mode = match a.mode {
        Some(DegreeKind::In) => DegreeMode::In,
        Some(DegreeKind::Out) => DegreeMode::Out,
        Some(DegreeKind::Undirected) => DegreeMode::Undirected,
        None if g.is_directed() => DegreeMode::Out,
        None => DegreeMode::Undirected,
    };
    let dist = g.degree_distribution(mode)?;
    let primary = match a.common.format {
        None | Some(OutputFormat::Csv) => io::format_degree_distribution(&dist),
        Some(OutputFormat::Json) => json_text(
            &dist
                .entries
                .iter()
                .map(|&(d, p)| json!({ "degree": d, "probability": p }))
                .collect::<Vec<_>>(),
        ),
    };
    Ok(Outcome {
        primary,
        resolved: json!({ "mode": mode.as_str(), "directed": g.is_directed() }),
        summary: json!({ "nodes": g.node_count(), "edges": g.edge_count() }),
    })
}

fn cmd_generate(a: &GenerateArgs) -> Result<Outcome, Error> {
    if a.common.format.is_some() {
        return Err(Error::Usage(
            "generate always writes an edge list; drop --format".into(),
        ));
    }
    let model = parse_graph_model(&a.model)?;
    let g = generate_graph(model, a.common.seed)?;
    Ok(Outcome {
        primary: g.to_edge_list(),
        resolved: json!({ "model": model }),
        summary: json!({ "nodes": g.node_count(), "edges": g.edge_count() }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn grid_values() {
        assert_eq!(parse_grid_values("g", "0.05:0.5:0.05").unwrap().len(), 10);
        assert_eq!(parse_grid_values("g", "0.05:0.5:0.05").unwrap()[2], 0.15);
        assert_eq!(parse_grid_values("g", "1,2.5").unwrap(), vec![1.0, 2.5]);
        assert!(parse_grid_values("g", "1:0:1").is_err());
        assert!(parse_grid_values("g", "a,b").is_err());
    }

    #[test]
    fn graph_models() {
        assert_eq!(
            parse_graph_model("pa:500:3").unwrap(),
            GraphModel::PreferentialAttachment { n: 500, m: 3 }
        );
        assert_eq!(
            parse_graph_model("er:100:0.1").unwrap(),
            GraphModel::ErdosRenyi {
                n: 100,
                edge_prob: 0.1
            }
        );
        assert!(parse_graph_model("ws:1:2").is_err());
    }

    #[test]
    fn explicit_flags_beat_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(
            &cfg,
            r#"{"n": 50, "gap": 10, "delta": 0.5, "bernoulli_as_printed": false}"#,
        )
        .unwrap();
        let expanded = expand_config(args(&[
            "netpower",
            "power",
            "--config",
            cfg.to_str().unwrap(),
            "--n",
            "100",
        ]))
        .unwrap();
        let Command::Power(p) = parse(expanded).unwrap().command else {
            panic!()
        };
        assert_eq!(p.n, 100);
        assert_eq!(p.gap, 10.0);
        assert_eq!(p.model.delta, Some(0.5));
    }

    #[test]
    fn model_resolution() {
        let parse_power = |extra: &[&str]| {
            let mut v = vec!["netpower", "power", "--n", "10", "--gap", "0"];
            v.extend_from_slice(extra);
            let Command::Power(p) = parse(args(&v)).unwrap().command else {
                panic!()
            };
            p.model.config(false)
        };
        let cfg = parse_power(&[]).unwrap();
        assert_eq!((cfg.mu_a(), cfg.mu_b()), (1.0, 0.0));
        let cfg =
            parse_power(&["--model", "bernoulli", "--mu-b", "0.4", "--delta", "0.2"]).unwrap();
        assert!((cfg.mu_a() - 0.6).abs() < 1e-15);
        assert!(parse_power(&["--model", "bernoulli", "--mu-b", "0.4"]).is_err());
        assert!(parse_power(&["--mu-a", "1", "--mu-b", "0", "--delta", "2"]).is_err());
    }
}
