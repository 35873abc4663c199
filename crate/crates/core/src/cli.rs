//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for argument errors (unknown subcommand,
//! malformed flags, out-of-range parameters, missing seed), 1 for runtime
//! failures such as truncated Monte Carlo replicas.

use std::ffi::OsString;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use crate::chain::{ChainParams, CountState};
use crate::error::Error;
use crate::exact::{self, DistributionVector};
use crate::monte_carlo::{self, EstimateWithCI};
use crate::output::{serialize, Format, Json, ObjectBuilder, OutputEnvelope, Table};

#[derive(Debug, Parser)]
#[command(
    name = "ehrenfest",
    version,
    about = "Generalized Ehrenfest genome chain: exact laws and seeded simulation"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,

    /// Master seed; required by every stochastic subcommand.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Stationary law of the ones-count.
    Stationary(StationaryArgs),
    /// Exact law of the ones-count after a number of steps.
    Evolve(EvolveArgs),
    /// Simulate the counting chain.
    Simulate(SimulateArgs),
    /// Expected return time to a state.
    ReturnTime(ReturnTimeArgs),
    /// Absorption time at all ones when p = 1.
    Absorb(AbsorbArgs),
    /// Simulate the spatial chain.
    Spatial(SpatialArgs),
    /// Distance between the stationary CDF and its Gaussian limit.
    GaussianCheck(GaussianArgs),
    /// Equilibrium ones-count N q.
    Equilibrium(EquilibriumArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("rates").required(true).args(["p", "p0"])))]
struct StationaryArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, conflicts_with_all = ["p0", "p1"])]
    p: Option<f64>,
    #[arg(long, requires = "p1")]
    p0: Option<f64>,
    #[arg(long, requires = "p0")]
    p1: Option<f64>,
    /// Report natural-log masses.
    #[arg(long)]
    log: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EvolveEmit {
    Dist,
    TvCurve,
}

#[derive(Debug, Args)]
struct EvolveArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    /// Initial state `k` or `uniform`.
    #[arg(long)]
    init: String,
    #[arg(long)]
    steps: u64,
    #[arg(long, value_enum, default_value_t = EvolveEmit::Dist)]
    emit: EvolveEmit,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SimulateEmit {
    Occupancy,
    Trajectory,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    init: usize,
    #[arg(long)]
    steps: u64,
    /// Defaults to ceil(20 N ln(N+1)) for occupancy and 0 for trajectories.
    #[arg(long)]
    burn_in: Option<u64>,
    #[arg(long, value_enum)]
    emit: SimulateEmit,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["exact", "replicas"])))]
struct ReturnTimeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    state: usize,
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    replicas: Option<u64>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["exact", "replicas"])))]
struct AbsorbArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    init: usize,
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    replicas: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SpatialEmit {
    Marginals,
    Covariance,
    Config,
}

#[derive(Debug, Args)]
struct SpatialArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    steps: u64,
    /// Thinning interval; defaults to N.
    #[arg(long)]
    sample_every: Option<u64>,
    #[arg(long, value_enum)]
    emit: SpatialEmit,
}

#[derive(Debug, Args)]
struct GaussianArgs {
    #[arg(long)]
    p: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    n_list: Vec<usize>,
}

#[derive(Debug, Args)]
struct EquilibriumArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Truncated { .. } => Failure::Runtime(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

type CmdResult = Result<OutputEnvelope, Failure>;

/// Parses `argv` (program name first) and runs the selected subcommand.
pub fn dispatch<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: 2,
                    stdout: Vec::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: 0,
                    stdout: text.into_bytes(),
                    stderr: String::new(),
                }
            };
        }
    };
    let format = match cli.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    };
    match run(&cli, format) {
        Ok(envelope) => Outcome {
            code: 0,
            stdout: serialize(&envelope, format),
            stderr: String::new(),
        },
        Err(Failure::Usage(msg)) => Outcome {
            code: 2,
            stdout: Vec::new(),
            stderr: format!("error: {msg}\n"),
        },
        Err(Failure::Runtime(msg)) => Outcome {
            code: 1,
            stdout: Vec::new(),
            stderr: format!("error: {msg}\n"),
        },
    }
}

fn format_name(format: Format) -> &'static str {
    match format {
        Format::Json => "json",
        Format::Csv => "csv",
    }
}

fn require_seed(seed: Option<u64>, command: &str) -> Result<u64, Failure> {
    seed.ok_or_else(|| Failure::Usage(format!("{command} is stochastic and requires --seed")))
}

fn run(cli: &Cli, format: Format) -> CmdResult {
    let fmt = format_name(format);
    match &cli.command {
        Command::Stationary(a) => stationary(a, fmt),
        Command::Evolve(a) => evolve(a, fmt),
        Command::Simulate(a) => simulate(a, require_seed(cli.seed, "simulate")?, fmt),
        Command::ReturnTime(a) => return_time(a, cli.seed, fmt),
        Command::Absorb(a) => absorb(a, cli.seed, fmt),
        Command::Spatial(a) => spatial(a, require_seed(cli.seed, "spatial")?, fmt),
        Command::GaussianCheck(a) => gaussian_check(a, fmt),
        Command::Equilibrium(a) => equilibrium(a, fmt),
    }
}

fn stationary(a: &StationaryArgs, fmt: &str) -> CmdResult {
    let mut params = ObjectBuilder::new().field("n", a.n);
    let chain = match (a.p, a.p0, a.p1) {
        (Some(p), _, _) => {
            params = params.field("p", p);
            ChainParams::new(a.n, p)?
        }
        (None, Some(p0), Some(p1)) => {
            params = params.field("p0", p0).field("p1", p1);
            ChainParams::general(a.n, p0, p1)?
        }
        _ => {
            return Err(Failure::Usage(
                "either --p or both --p0 and --p1 are required".into(),
            ))
        }
    };
    let params = params.field("log", a.log).field("format", fmt);
    let (q, _) = chain.stationary_q()?;
    let (key, values) = if a.log {
        ("log_mass", exact::stationary_count_log(&chain)?)
    } else {
        ("mass", exact::stationary_count(&chain)?.into_vec())
    };
    let mut table = Table::new(&["k", key]);
    for (k, v) in values.iter().enumerate() {
        table.row(vec![k.into(), (*v).into()]);
    }
    let results = ObjectBuilder::new()
        .field("q", q)
        .field(key, values)
        .build();
    Ok(OutputEnvelope::new(
        "stationary",
        params.into_fields(),
        results,
        table,
    ))
}

fn distribution_table(mass: &[f64]) -> Table {
    let mut table = Table::new(&["k", "mass"]);
    for (k, m) in mass.iter().enumerate() {
        table.row(vec![k.into(), (*m).into()]);
    }
    table
}

fn evolve(a: &EvolveArgs, fmt: &str) -> CmdResult {
    let chain = ChainParams::new(a.n, a.p)?;
    let (init_json, start) = if a.init == "uniform" {
        (Json::from("uniform"), DistributionVector::uniform(a.n))
    } else {
        let k: usize = a.init.parse().map_err(|_| {
            Failure::Usage(format!(
                "--init must be a state 0..={} or 'uniform', got '{}'",
                a.n, a.init
            ))
        })?;
        (Json::from(k), DistributionVector::point_mass(a.n, k)?)
    };
    let emit = match a.emit {
        EvolveEmit::Dist => "dist",
        EvolveEmit::TvCurve => "tv-curve",
    };
    let params = ObjectBuilder::new()
        .field("n", a.n)
        .field("p", a.p)
        .field("init", init_json)
        .field("steps", a.steps)
        .field("emit", emit)
        .field("format", fmt)
        .into_fields();
    let (results, table) = match a.emit {
        EvolveEmit::Dist => {
            let law = exact::evolve_distribution(&chain, &start, a.steps)?;
            let tv = exact::total_variation(&law, &exact::stationary_count(&chain)?)?;
            let table = distribution_table(law.as_slice());
            let results = ObjectBuilder::new()
                .field("tv_to_stationary", tv)
                .field("mass", law.into_vec())
                .build();
            (results, table)
        }
        EvolveEmit::TvCurve => {
            let curve = exact::tv_curve(&chain, &start, a.steps)?;
            let mut table = Table::new(&["t", "tv"]);
            for (t, tv) in curve.iter().enumerate() {
                table.row(vec![t.into(), (*tv).into()]);
            }
            (ObjectBuilder::new().field("tv", curve).build(), table)
        }
    };
    Ok(OutputEnvelope::new("evolve", params, results, table))
}

fn simulate(a: &SimulateArgs, seed: u64, fmt: &str) -> CmdResult {
    let chain = ChainParams::new(a.n, a.p)?;
    let init = chain.count_state(a.init)?;
    let burn_in = a.burn_in.unwrap_or(match a.emit {
        SimulateEmit::Occupancy => monte_carlo::default_burn_in(a.n),
        SimulateEmit::Trajectory => 0,
    });
    let emit = match a.emit {
        SimulateEmit::Occupancy => "occupancy",
        SimulateEmit::Trajectory => "trajectory",
    };
    let params = ObjectBuilder::new()
        .field("n", a.n)
        .field("p", a.p)
        .field("init", a.init)
        .field("steps", a.steps)
        .field("burn_in", burn_in)
        .field("seed", seed)
        .field("emit", emit)
        .field("format", fmt)
        .into_fields();
    let (results, table) = match a.emit {
        SimulateEmit::Occupancy => {
            let hist = monte_carlo::run_occupancy(&chain, init, a.steps, burn_in, seed)?;
            let freq = hist.frequencies();
            let mut table = Table::new(&["k", "count", "frequency"]);
            for (k, (c, f)) in hist.counts.iter().zip(&freq).enumerate() {
                table.row(vec![k.into(), (*c).into(), (*f).into()]);
            }
            let results = ObjectBuilder::new()
                .field("total_steps", hist.total_steps)
                .field("counts", hist.counts)
                .field("frequency", freq)
                .build();
            (results, table)
        }
        SimulateEmit::Trajectory => {
            let path = monte_carlo::run_trajectory(&chain, init, a.steps, burn_in, seed)?;
            let mut table = Table::new(&["t", "k"]);
            for (i, k) in path.iter().enumerate() {
                table.row(vec![(burn_in + i as u64).into(), (*k).into()]);
            }
            let results = ObjectBuilder::new()
                .field("start_time", burn_in)
                .field("states", path)
                .build();
            (results, table)
        }
    };
    Ok(OutputEnvelope::new("simulate", params, results, table))
}

fn estimate_payload(e: &EstimateWithCI) -> (Json, Table) {
    let mut table = Table::new(&["mean", "std_error", "replicas", "master_seed"]);
    table.row(vec![
        e.mean.into(),
        e.std_error.into(),
        e.replicas.into(),
        e.master_seed.into(),
    ]);
    let json = ObjectBuilder::new()
        .field("mean", e.mean)
        .field("std_error", e.std_error)
        .field("replicas", e.replicas)
        .field("master_seed", e.master_seed)
        .build();
    (json, table)
}

fn mode_params(
    builder: ObjectBuilder,
    exact: bool,
    replicas: Option<u64>,
    seed: Option<u64>,
) -> Result<(ObjectBuilder, Option<(u64, u64)>), Failure> {
    if exact {
        return Ok((builder.field("mode", "exact"), None));
    }
    let replicas = replicas.expect("clap enforces --exact or --replicas");
    let seed = seed.ok_or_else(|| Failure::Usage("--replicas requires --seed".into()))?;
    Ok((
        builder
            .field("mode", "monte-carlo")
            .field("replicas", replicas)
            .field("seed", seed),
        Some((replicas, seed)),
    ))
}

fn return_time(a: &ReturnTimeArgs, seed: Option<u64>, fmt: &str) -> CmdResult {
    let chain = ChainParams::new(a.n, a.p)?;
    let state = chain.count_state(a.state)?;
    let base = ObjectBuilder::new()
        .field("n", a.n)
        .field("p", a.p)
        .field("state", a.state);
    let (params, mc) = mode_params(base, a.exact, a.replicas, seed)?;
    let params = params.field("format", fmt).into_fields();
    let (results, table) = match mc {
        None => {
            let t = exact::expected_return_time(&chain, state)?;
            let mut table = Table::new(&["log10_value", "value"]);
            table.row(vec![t.log10_value().into(), t.finite_value().into()]);
            let mut results = ObjectBuilder::new().field("log10_value", t.log10_value());
            if let Some(v) = t.finite_value() {
                results = results.field("value", v);
            }
            (results.build(), table)
        }
        Some((replicas, seed)) => {
            let e = monte_carlo::estimate_return_time(&chain, state, replicas, seed)?;
            estimate_payload(&e)
        }
    };
    Ok(OutputEnvelope::new("return-time", params, results, table))
}

fn absorb(a: &AbsorbArgs, seed: Option<u64>, fmt: &str) -> CmdResult {
    let base = ObjectBuilder::new().field("n", a.n).field("init", a.init);
    let (params, mc) = mode_params(base, a.exact, a.replicas, seed)?;
    let params = params.field("format", fmt).into_fields();
    let (results, table) = match mc {
        None => {
            let v = exact::absorption_expectation(a.n, a.init)?;
            let mut table = Table::new(&["expectation"]);
            table.row(vec![v.into()]);
            (ObjectBuilder::new().field("expectation", v).build(), table)
        }
        Some((replicas, seed)) => {
            let e = monte_carlo::estimate_absorption_time(
                a.n,
                CountState::new(a.init),
                replicas,
                seed,
            )?;
            estimate_payload(&e)
        }
    };
    Ok(OutputEnvelope::new("absorb", params, results, table))
}

fn spatial(a: &SpatialArgs, seed: u64, fmt: &str) -> CmdResult {
    let chain = ChainParams::new(a.n, a.p)?;
    let sample_every = a.sample_every.unwrap_or(a.n as u64);
    let burn_in = monte_carlo::default_burn_in(a.n);
    let emit = match a.emit {
        SpatialEmit::Marginals => "marginals",
        SpatialEmit::Covariance => "covariance",
        SpatialEmit::Config => "config",
    };
    let params = ObjectBuilder::new()
        .field("n", a.n)
        .field("p", a.p)
        .field("steps", a.steps)
        .field("burn_in", burn_in)
        .field("sample_every", sample_every)
        .field("seed", seed)
        .field("emit", emit)
        .field("format", fmt)
        .into_fields();
    let run = monte_carlo::run_spatial(&chain, a.steps, burn_in, sample_every, seed)?;
    let m = &run.marginals;
    let (results, table) = match a.emit {
        SpatialEmit::Marginals => {
            let mut table = Table::new(&["site", "frequency"]);
            for (s, f) in m.per_site_frequency.iter().enumerate() {
                table.row(vec![(s + 1).into(), (*f).into()]);
            }
            let results = ObjectBuilder::new()
                .field("samples", m.samples)
                .field("per_site_frequency", m.per_site_frequency.clone())
                .field("max_abs_pair_covariance", m.max_abs_pair_covariance)
                .field("ones_count_histogram", run.ones_count_histogram.clone())
                .build();
            (results, table)
        }
        SpatialEmit::Covariance => {
            let n = a.n;
            let mut table = Table::new(&["site_i", "site_j", "covariance"]);
            let mut rows = Vec::with_capacity(n);
            for i in 0..n {
                let row = run.covariance[i * n..(i + 1) * n].to_vec();
                for (j, c) in row.iter().enumerate() {
                    table.row(vec![(i + 1).into(), (j + 1).into(), (*c).into()]);
                }
                rows.push(Json::from(row));
            }
            let results = ObjectBuilder::new()
                .field("samples", m.samples)
                .field("max_abs_pair_covariance", m.max_abs_pair_covariance)
                .field("covariance", Json::Array(rows))
                .build();
            (results, table)
        }
        SpatialEmit::Config => {
            let bits = run.final_config.bits();
            let mut table = Table::new(&["site", "state"]);
            for (s, b) in bits.iter().enumerate() {
                table.row(vec![(s + 1).into(), u32::from(*b).into()]);
            }
            let ones = bits.iter().filter(|&&b| b == 1).count();
            let results = ObjectBuilder::new()
                .field("ones", ones)
                .field(
                    "config",
                    bits.into_iter().map(u32::from).collect::<Vec<_>>(),
                )
                .build();
            (results, table)
        }
    };
    Ok(OutputEnvelope::new("spatial", params, results, table))
}

fn gaussian_check(a: &GaussianArgs, fmt: &str) -> CmdResult {
    let params = ObjectBuilder::new()
        .field("p", a.p)
        .field("n_list", a.n_list.clone())
        .field("format", fmt)
        .into_fields();
    let mut table = Table::new(&["n", "deviation", "deviation_sqrt_n"]);
    let mut rows = Vec::with_capacity(a.n_list.len());
    for &n in &a.n_list {
        let d = exact::gaussian_deviation(&ChainParams::new(n, a.p)?)?;
        let scaled = d * (n as f64).sqrt();
        table.row(vec![n.into(), d.into(), scaled.into()]);
        rows.push(
            ObjectBuilder::new()
                .field("n", n)
                .field("deviation", d)
                .field("deviation_sqrt_n", scaled)
                .build(),
        );
    }
    let results = ObjectBuilder::new()
        .field("deviations", Json::Array(rows))
        .build();
    Ok(OutputEnvelope::new(
        "gaussian-check",
        params,
        results,
        table,
    ))
}

fn equilibrium(a: &EquilibriumArgs, fmt: &str) -> CmdResult {
    let chain = ChainParams::new(a.n, a.p)?;
    let e = chain.equilibrium_state()?;
    let (lo, hi) = (e.floor() as u64, e.ceil() as u64);
    let params = ObjectBuilder::new()
        .field("n", a.n)
        .field("p", a.p)
        .field("format", fmt)
        .into_fields();
    let mut table = Table::new(&["equilibrium", "floor", "ceil"]);
    table.row(vec![e.into(), lo.into(), hi.into()]);
    let results = ObjectBuilder::new()
        .field("equilibrium", e)
        .field("floor", lo)
        .field("ceil", hi)
        .build();
    Ok(OutputEnvelope::new("equilibrium", params, results, table))
}
