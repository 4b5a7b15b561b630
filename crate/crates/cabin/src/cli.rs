//! Command-line front end: discretize, learn, tune, train, simulate, and
//! compare.
//!
//! Exit codes: 0 success, 2 configuration or I/O problems, 3 data or
//! algorithm failures, 4 semantic misuse (e.g. evidence on a tunable node).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::bayesnet::{
    k2_learn, learn_parameters, order_nodes, BayesianNetworkModel, Evidence, NodeRole,
};
use crate::discretizer::{
    build_scheme_with, is_degenerate_series, label_to_value, single_value_scheme,
    DiscretizationScheme, SampleSeries, DEFAULT_EPSILON, DEFAULT_K_MAX,
};
use crate::fmt::{json_escape, sig12};
use crate::sim::{
    derive_seed, run_comparison, run_session, train_cabin, CompareConfig, LearnKnobs,
    ScenarioConfig, Strategy, QOS_VARIABLE,
};
use crate::tuner::{recommend, recommend_best, TunerError, TuningRecommendation};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_USAGE: i32 = 4;

struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    fn data(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DATA,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

type CliResult = Result<(), CliError>;

#[derive(Parser)]
#[command(
    name = "cabin",
    about = "Context-aware QoS pipeline: Gaussian-mixture discretization, K2 Bayesian networks, context tuning, and a conferencing simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a discretization scheme for one trace variable
    Discretize(DiscretizeArgs),
    /// Learn a Bayesian network from a trace
    Learn(LearnArgs),
    /// Recommend tunable-context values for a QoS target
    Tune(TuneArgs),
    /// Run warm-up sessions and train a model
    Train(TrainArgs),
    /// Simulate one conferencing session
    Simulate(SimulateArgs),
    /// Run the full strategy-comparison grid
    Compare(CompareArgs),
}

/// Optional JSON config file; command-line flags override its values, which
/// override the built-in defaults.
#[derive(Deserialize, Default, Clone)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    participants: Option<usize>,
    duration_s: Option<f64>,
    tick_s: Option<f64>,
    epoch_s: Option<f64>,
    seed: Option<u64>,
    base_capacity_kbps: Option<f64>,
    bw_noise_frac: Option<f64>,
    rate_min_kbps: Option<f64>,
    rate_max_kbps: Option<f64>,
    frame_rate_fps: Option<f64>,
    startup_delay_s: Option<f64>,
    initial_rate_kbps: Option<f64>,
    k_max: Option<usize>,
    epsilon: Option<f64>,
    max_parents: Option<usize>,
    alpha: Option<f64>,
    p_min: Option<f64>,
    sessions: Option<usize>,
    reps: Option<usize>,
    scenarios: Option<Vec<usize>>,
    strategies: Option<Vec<String>>,
    jobs: Option<usize>,
}

impl FileConfig {
    fn load(path: Option<&PathBuf>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("invalid config {}: {e}", path.display())))
    }
}

#[derive(Args)]
struct CommonSimArgs {
    /// JSON config file (flags override file values)
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    capacity: Option<f64>,
    #[arg(long)]
    bw_noise: Option<f64>,
    #[arg(long)]
    rate_min: Option<f64>,
    #[arg(long)]
    rate_max: Option<f64>,
    #[arg(long)]
    p_min: Option<f64>,
}

impl CommonSimArgs {
    fn scenario(&self, file: &FileConfig) -> Result<ScenarioConfig, CliError> {
        let d = ScenarioConfig::default();
        let cfg = ScenarioConfig {
            duration_s: self.duration.or(file.duration_s).unwrap_or(d.duration_s),
            tick_s: file.tick_s.unwrap_or(d.tick_s),
            epoch_s: file.epoch_s.unwrap_or(d.epoch_s),
            base_capacity_kbps: self
                .capacity
                .or(file.base_capacity_kbps)
                .unwrap_or(d.base_capacity_kbps),
            bw_noise_frac: self.bw_noise.or(file.bw_noise_frac).unwrap_or(d.bw_noise_frac),
            rate_min_kbps: self.rate_min.or(file.rate_min_kbps).unwrap_or(d.rate_min_kbps),
            rate_max_kbps: self.rate_max.or(file.rate_max_kbps).unwrap_or(d.rate_max_kbps),
            frame_rate_fps: file.frame_rate_fps.unwrap_or(d.frame_rate_fps),
            startup_delay_s: file.startup_delay_s.unwrap_or(d.startup_delay_s),
            initial_rate_kbps: file.initial_rate_kbps.unwrap_or(d.initial_rate_kbps),
            p_min: self.p_min.or(file.p_min).unwrap_or(d.p_min),
            ..d
        };
        cfg.validate()
            .map_err(|e| CliError::config(e.to_string()))?;
        Ok(cfg)
    }

    fn knobs(
        &self,
        file: &FileConfig,
        k_max: Option<usize>,
        epsilon: Option<f64>,
        max_parents: Option<usize>,
        alpha: Option<f64>,
    ) -> Result<LearnKnobs, CliError> {
        let d = LearnKnobs::default();
        let knobs = LearnKnobs {
            k_max: k_max.or(file.k_max).unwrap_or(d.k_max),
            epsilon: epsilon.or(file.epsilon).unwrap_or(d.epsilon),
            max_parents: max_parents.or(file.max_parents).unwrap_or(d.max_parents),
            alpha: alpha.or(file.alpha).unwrap_or(d.alpha),
        };
        if knobs.k_max == 0 || knobs.k_max > 16 {
            return Err(CliError::config("k_max must be in 1..=16"));
        }
        if !(knobs.epsilon >= 0.0) {
            return Err(CliError::config("epsilon must be non-negative"));
        }
        if knobs.max_parents == 0 {
            return Err(CliError::config("max_parents must be at least 1"));
        }
        if !(knobs.alpha > 0.0) {
            return Err(CliError::config("alpha must be positive"));
        }
        Ok(knobs)
    }
}

#[derive(Args)]
struct DiscretizeArgs {
    /// Input trace CSV
    #[arg(long)]
    input: PathBuf,
    /// Column to discretize
    #[arg(long)]
    variable: String,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Output scheme JSON (default: <variable>.scheme.json)
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct LearnArgs {
    /// Input trace CSV
    #[arg(long)]
    input: PathBuf,
    /// Name of the QoS metric column
    #[arg(long)]
    qos: String,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_parents: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Tunable context columns (defaults to video_rate_kbps when present)
    #[arg(long, value_delimiter = ',')]
    tunable: Vec<String>,
    /// Output model JSON
    #[arg(long, default_value = "model.json")]
    output: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct TuneArgs {
    /// Model JSON produced by `learn` or `train`
    #[arg(long)]
    model: PathBuf,
    /// Target QoS label, or "best" to walk labels by descending class mean
    #[arg(long)]
    target: String,
    /// Observed evidence as name=label pairs
    #[arg(long, value_delimiter = ',')]
    evidence: Vec<String>,
    #[arg(long)]
    p_min: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Number of warm-up sessions
    #[arg(long)]
    sessions: Option<usize>,
    /// Participants per warm-up session
    #[arg(long)]
    participants: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_parents: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Output model JSON
    #[arg(long, default_value = "model.json")]
    output: PathBuf,
    #[command(flatten)]
    sim: CommonSimArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Rate-control strategy: cabin, ton, or don
    #[arg(long)]
    strategy: String,
    #[arg(long)]
    participants: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Model JSON (required for the cabin strategy)
    #[arg(long)]
    model: Option<PathBuf>,
    /// Epoch trace CSV output
    #[arg(long, default_value = "trace.csv")]
    trace_out: PathBuf,
    /// Session summary JSON output
    #[arg(long, default_value = "summary.json")]
    summary_out: PathBuf,
    #[command(flatten)]
    sim: CommonSimArgs,
}

#[derive(Args)]
struct CompareArgs {
    /// Participant counts, comma separated
    #[arg(long, value_delimiter = ',')]
    scenarios: Vec<usize>,
    #[arg(long)]
    reps: Option<usize>,
    /// Strategies to compare, comma separated
    #[arg(long, value_delimiter = ',')]
    strategies: Vec<String>,
    /// Base seed; repetition r runs with seed base+r
    #[arg(long)]
    seed: Option<u64>,
    /// Model JSON for cabin (trained automatically when omitted)
    #[arg(long)]
    model: Option<PathBuf>,
    /// Worker threads for session cells
    #[arg(long)]
    jobs: Option<usize>,
    /// Report CSV output
    #[arg(long, default_value = "report.csv")]
    output: PathBuf,
    #[command(flatten)]
    sim: CommonSimArgs,
}

/// Parses argv, runs the selected command, and returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Discretize(args) => cmd_discretize(args),
        Command::Learn(args) => cmd_learn(args),
        Command::Tune(args) => cmd_tune(args),
        Command::Train(args) => cmd_train(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Compare(args) => cmd_compare(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

// ---------------------------------------------------------------- trace I/O

/// Columns that describe a trace row rather than a measured variable.
const META_COLUMNS: [&str; 3] = ["time_s", "participant_id", "strategy"];

struct TraceTable {
    columns: Vec<(String, Vec<f64>)>,
}

impl TraceTable {
    fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| CliError::data(format!("{}: empty file", path.display())))?;
        let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let mut numeric: Vec<Option<Vec<f64>>> = vec![Some(Vec::new()); names.len()];
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != names.len() {
                return Err(CliError::data(format!(
                    "{}: line {} has {} fields, expected {}",
                    path.display(),
                    lineno + 2,
                    cells.len(),
                    names.len()
                )));
            }
            for (slot, cell) in numeric.iter_mut().zip(&cells) {
                if let Some(values) = slot {
                    match cell.trim().parse::<f64>() {
                        Ok(v) if v.is_finite() => values.push(v),
                        // Non-numeric column (e.g. the strategy label).
                        _ => *slot = None,
                    }
                }
            }
        }
        let columns = names
            .into_iter()
            .zip(numeric)
            .filter_map(|(name, values)| values.map(|v| (name, v)))
            .collect();
        Ok(Self { columns })
    }

    fn series(&self, name: &str) -> Option<SampleSeries> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(n, v)| SampleSeries::new(n.clone(), "", v.clone()).expect("finite trace values"))
    }

    /// Measured variable columns, in file order.
    fn variables(&self) -> Vec<&str> {
        self.columns
            .iter()
            .map(|(n, _)| n.as_str())
            .filter(|n| !META_COLUMNS.contains(n))
            .collect()
    }
}

fn write_file(path: &Path, contents: &str) -> CliResult {
    std::fs::write(path, contents)
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
}

// ---------------------------------------------------------------- commands

fn cmd_discretize(args: DiscretizeArgs) -> CliResult {
    let file = FileConfig::load(args.config.as_ref())?;
    let k_max = args.k_max.or(file.k_max).unwrap_or(DEFAULT_K_MAX);
    let epsilon = args.epsilon.or(file.epsilon).unwrap_or(DEFAULT_EPSILON);
    if k_max == 0 {
        return Err(CliError::config("k_max must be at least 1"));
    }

    let table = TraceTable::read(&args.input)?;
    let series = table
        .series(&args.variable)
        .ok_or_else(|| CliError::data(format!("unknown variable `{}`", args.variable)))?;

    let scheme = if is_degenerate_series(&series) {
        eprintln!(
            "warning: `{}` is constant; emitting a single-value scheme",
            args.variable
        );
        single_value_scheme(&series)
    } else {
        build_scheme_with(&series, k_max, epsilon)
            .map_err(|e| CliError::data(format!("variable `{}`: {e}", args.variable)))?
    };

    println!("label        a                b                c");
    for (label, term) in scheme.terms.iter().enumerate() {
        println!(
            "{label:<5} {:>16} {:>16} {:>16}",
            sig12(term.amplitude),
            sig12(term.mean),
            sig12(term.width)
        );
    }
    let output = args
        .output
        .unwrap_or_else(|| PathBuf::from(format!("{}.scheme.json", args.variable)));
    write_file(&output, &scheme.to_json())?;
    println!("scheme written to {}", output.display());
    Ok(())
}

fn cmd_learn(args: LearnArgs) -> CliResult {
    let file = FileConfig::load(args.config.as_ref())?;
    let knobs = LearnKnobs {
        k_max: args.k_max.or(file.k_max).unwrap_or(DEFAULT_K_MAX),
        epsilon: args.epsilon.or(file.epsilon).unwrap_or(DEFAULT_EPSILON),
        max_parents: args
            .max_parents
            .or(file.max_parents)
            .unwrap_or(crate::bayesnet::DEFAULT_MAX_PARENTS),
        alpha: args.alpha.or(file.alpha).unwrap_or(crate::bayesnet::DEFAULT_ALPHA),
    };

    let table = TraceTable::read(&args.input)?;
    let variables = table.variables();
    if !variables.contains(&args.qos.as_str()) {
        return Err(CliError::data(format!("unknown variable `{}`", args.qos)));
    }
    if variables.len() < 2 {
        return Err(CliError::data(
            "the trace needs the QoS column and at least one context column",
        ));
    }

    let mut schemes: BTreeMap<String, DiscretizationScheme> = BTreeMap::new();
    let mut series_list = Vec::new();
    for name in &variables {
        let series = table.series(name).expect("listed variable");
        let scheme = if is_degenerate_series(&series) {
            eprintln!("warning: `{name}` is constant; treated as single-valued");
            single_value_scheme(&series)
        } else {
            build_scheme_with(&series, knobs.k_max, knobs.epsilon)
                .map_err(|e| CliError::data(format!("variable `{name}`: {e}")))?
        };
        schemes.insert((*name).to_string(), scheme);
        series_list.push(series);
    }
    let data = crate::sim::dataset_from_series(&series_list, &schemes)
        .map_err(|e| CliError::data(e.to_string()))?;

    let ordering = order_nodes(&data, &args.qos).map_err(|e| CliError::data(e.to_string()))?;
    let mut dag =
        k2_learn(&data, &ordering, knobs.max_parents).map_err(|e| CliError::data(e.to_string()))?;
    dag.set_role(&args.qos, NodeRole::QosMetric, false)
        .map_err(|e| CliError::data(e.to_string()))?;
    let tunable: Vec<String> = if args.tunable.is_empty() {
        variables
            .iter()
            .filter(|v| **v == "video_rate_kbps")
            .map(|v| v.to_string())
            .collect()
    } else {
        args.tunable.clone()
    };
    for name in &tunable {
        if name == &args.qos {
            return Err(CliError::usage("the QoS column cannot be tunable"));
        }
        dag.set_role(name, NodeRole::Context, true)
            .map_err(|e| CliError::data(e.to_string()))?;
    }
    let cpts =
        learn_parameters(&dag, &data, knobs.alpha).map_err(|e| CliError::data(e.to_string()))?;
    let model =
        BayesianNetworkModel::new(dag, cpts, schemes).map_err(|e| CliError::data(e.to_string()))?;

    println!("edges:");
    for (p, c) in model.dag().edges() {
        println!(
            "  {} -> {}",
            model.dag().node(p).name,
            model.dag().node(c).name
        );
    }
    let parents = model
        .dag()
        .parents_named(&args.qos)
        .map_err(|e| CliError::data(e.to_string()))?;
    println!("direct causes of {}: {}", args.qos, parents.join(", "));
    write_file(&args.output, &model.to_json())?;
    println!("model written to {}", args.output.display());
    Ok(())
}

fn recommendation_json(
    model: &BayesianNetworkModel,
    rec: &TuningRecommendation,
) -> Result<String, CliError> {
    let scheme_value = |name: &str, label: usize| -> Result<f64, CliError> {
        let scheme = model
            .scheme(name)
            .ok_or_else(|| CliError::data(format!("no scheme for `{name}`")))?;
        label_to_value(scheme, label).map_err(|e| CliError::data(e.to_string()))
    };
    let target_value = scheme_value(&rec.qos_node, rec.target_label)?;
    let mut out = format!(
        "{{\"qos_node\":\"{}\",\"target_label\":{},\"target_value\":{},\"assignment\":{{",
        json_escape(&rec.qos_node),
        rec.target_label,
        sig12(target_value)
    );
    for (i, (name, &label)) in rec.assignment.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format!(
            "\"{}\":{{\"label\":{},\"value\":{}}}",
            json_escape(name),
            label,
            sig12(scheme_value(name, label)?)
        ));
    }
    out.push_str(&format!(
        "}},\"probability\":{}}}",
        sig12(rec.probability)
    ));
    Ok(out)
}

fn cmd_tune(args: TuneArgs) -> CliResult {
    let file = FileConfig::load(args.config.as_ref())?;
    let p_min = args.p_min.or(file.p_min).unwrap_or(crate::tuner::DEFAULT_P_MIN);
    let model = BayesianNetworkModel::load(&args.model)
        .map_err(|e| CliError::config(format!("cannot load model: {e}")))?;
    let qos = model.qos_node().to_string();

    let mut observed = Evidence::new();
    for pair in &args.evidence {
        let (name, label) = pair
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("evidence `{pair}` is not name=label")))?;
        let label: usize = label
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("evidence label in `{pair}` is not an integer")))?;
        let name = name.trim();
        let idx = model
            .dag()
            .node_index(name)
            .map_err(|_| CliError::usage(format!("unknown evidence node `{name}`")))?;
        if model.dag().node(idx).tunable {
            return Err(CliError::usage(format!(
                "evidence on `{name}`: tunable nodes are outputs"
            )));
        }
        observed.set(name, label);
    }

    let tuner_err = |e: TunerError| match e {
        TunerError::Bayes(inner) => CliError::data(inner.to_string()),
        other => CliError::usage(other.to_string()),
    };
    let rec = if args.target == "best" {
        let cardinality = model
            .dag()
            .node(model.dag().node_index(&qos).expect("qos exists"))
            .cardinality;
        let preference: Vec<usize> = (0..cardinality).rev().collect();
        recommend_best(&model, &qos, &preference, &observed, p_min).map_err(tuner_err)?
    } else {
        let target: usize = args.target.parse().map_err(|_| {
            CliError::usage(format!("target `{}` is not a label or `best`", args.target))
        })?;
        recommend(&model, &qos, target, &observed).map_err(tuner_err)?
    };
    println!("{}", recommendation_json(&model, &rec)?);
    Ok(())
}

/// Warm-up scenario configs for training: session i runs with a seed derived
/// from (seed, 100, i).
fn warmup_configs(
    template: &ScenarioConfig,
    sessions: usize,
    participants: usize,
    seed: u64,
) -> Vec<ScenarioConfig> {
    (0..sessions)
        .map(|i| ScenarioConfig {
            participants,
            seed: derive_seed(seed, &[100, i as u64]),
            ..template.clone()
        })
        .collect()
}

fn cmd_train(args: TrainArgs) -> CliResult {
    let file = FileConfig::load(args.sim.config.as_ref())?;
    let template = args.sim.scenario(&file)?;
    let knobs = args
        .sim
        .knobs(&file, args.k_max, args.epsilon, args.max_parents, args.alpha)?;
    let sessions = args.sessions.or(file.sessions).unwrap_or(8);
    let participants = args.participants.or(file.participants).unwrap_or(8);
    let seed = args.seed.or(file.seed).unwrap_or(0);
    if sessions == 0 {
        return Err(CliError::config("sessions must be at least 1"));
    }

    let cfgs = warmup_configs(&template, sessions, participants, seed);
    let model = train_cabin(&cfgs, &knobs).map_err(|e| CliError::data(e.to_string()))?;
    let parents = model
        .dag()
        .parents_named(QOS_VARIABLE)
        .map_err(|e| CliError::data(e.to_string()))?;
    println!("direct causes of {}: {}", QOS_VARIABLE, parents.join(", "));
    write_file(&args.output, &model.to_json())?;
    println!("model written to {}", args.output.display());
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> CliResult {
    let file = FileConfig::load(args.sim.config.as_ref())?;
    let strategy = Strategy::parse(&args.strategy)
        .ok_or_else(|| CliError::config(format!("unknown strategy `{}`", args.strategy)))?;
    let cfg = ScenarioConfig {
        participants: args.participants.or(file.participants).unwrap_or(4),
        seed: args.seed.or(file.seed).unwrap_or(1),
        strategy,
        ..args.sim.scenario(&file)?
    };
    cfg.validate().map_err(|e| CliError::config(e.to_string()))?;

    let model = match (&args.model, strategy) {
        (Some(path), _) => Some(
            BayesianNetworkModel::load(path)
                .map_err(|e| CliError::config(format!("cannot load model: {e}")))?,
        ),
        (None, Strategy::Cabin) => {
            return Err(CliError::config(
                "the cabin strategy needs --model; train one with `cabin train`",
            ))
        }
        (None, _) => None,
    };

    let report = run_session(&cfg, model.as_ref()).map_err(|e| CliError::data(e.to_string()))?;
    write_file(&args.trace_out, &report.trace_csv())?;
    write_file(&args.summary_out, &report.summary_json())?;
    println!("{}", report.summary_json());
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> CliResult {
    let file = FileConfig::load(args.sim.config.as_ref())?;
    let template = args.sim.scenario(&file)?;
    let seed = args.seed.or(file.seed).unwrap_or(0);

    let scenarios = if !args.scenarios.is_empty() {
        args.scenarios.clone()
    } else {
        file.scenarios.clone().unwrap_or_else(|| vec![4, 8, 12, 16])
    };
    let strategy_names: Vec<String> = if !args.strategies.is_empty() {
        args.strategies.clone()
    } else {
        file.strategies
            .clone()
            .unwrap_or_else(|| vec!["cabin".into(), "ton".into(), "don".into()])
    };
    let strategies: Vec<Strategy> = strategy_names
        .iter()
        .map(|s| {
            Strategy::parse(s).ok_or_else(|| CliError::config(format!("unknown strategy `{s}`")))
        })
        .collect::<Result<_, _>>()?;
    let reps = args.reps.or(file.reps).unwrap_or(5);
    if reps == 0 {
        return Err(CliError::config("reps must be at least 1"));
    }
    if reps == 1 {
        eprintln!("warning: confidence intervals are undefined with a single repetition");
    }

    let model = match &args.model {
        Some(path) => Some(
            BayesianNetworkModel::load(path)
                .map_err(|e| CliError::config(format!("cannot load model: {e}")))?,
        ),
        None if strategies.contains(&Strategy::Cabin) => {
            eprintln!("no --model given; training one from warm-up sessions (seed {seed})");
            let cfgs = warmup_configs(&template, 8, 8, seed);
            Some(
                train_cabin(&cfgs, &LearnKnobs::default())
                    .map_err(|e| CliError::data(e.to_string()))?,
            )
        }
        None => None,
    };

    let compare = CompareConfig {
        scenarios,
        reps,
        strategies,
        seed_base: seed,
        jobs: args.jobs.or(file.jobs).unwrap_or(1),
        template,
    };
    let report =
        run_comparison(&compare, model.as_ref()).map_err(|e| CliError::data(e.to_string()))?;
    write_file(&args.output, &report.to_csv())?;
    for cell in &report.cells {
        println!(
            "participants {:>2} {:<6} psnr {:>8.3} dB  delay {:>9.2} ms  throughput {:>9.2} kbps",
            cell.participants,
            cell.strategy.name(),
            cell.psnr_db.mean,
            cell.playback_delay_ms.mean,
            cell.throughput_kbps.mean
        );
    }
    println!("report written to {}", args.output.display());
    Ok(())
}
