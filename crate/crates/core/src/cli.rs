//! Command-line front end: `powergame <solve|equilibria|bounds|simulate|experiment>`.
//!
//! Players are numbered from 0 and stages from 1. Scalar results are printed
//! as `key=value` lines; traces and experiments as CSV preceded by `#`
//! comment lines holding the seed and the full configuration.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelMode, ChannelProcess, ChannelSource, ChannelTrace};
use crate::efficiency::EfficiencyModel;
use crate::error::Error;
use crate::experiments::{apply_overrides, run_experiment, ExperimentConfig, ExperimentId, DEFAULT_SEED};
use crate::numfmt::num;
use crate::pareto::social_welfare;
use crate::repeated_game::{
    lambda_bound, t0_bound_with, write_trace_csv, Deviation, DeviationPower, DeviationScenario, Plan, StrategyMachine, T0Formula,
};
use crate::solvers::CharacteristicSinrs;
use crate::static_game::{equilibria, ChannelState, NetworkConfig};

#[derive(Debug, Parser)]
#[command(name = "powergame", version, about = "Energy-efficient power control games on a shared uplink")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// RNG seed for channel draws and Monte Carlo runs.
    #[arg(long, global = true, env = "POWERGAME_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Caps the number of worker threads.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Output file; `-` is standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Repeat for more log output on standard error.
    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Characteristic SINRs of an efficiency model.
    Solve(SolveArgs),
    /// NE, Stackelberg and operating-point powers and utilities.
    Equilibria(ScenarioArgs),
    /// Minimum horizon and discount factor for cooperation.
    Bounds(BoundsArgs),
    /// Repeated-game trace as CSV.
    Simulate(SimulateArgs),
    /// Regenerates a figure dataset as CSV.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    /// `(1 - e^{-x})^M`.
    Pkt,
    /// `e^{-c/x}` with `c = 2^R - 1`.
    Exp,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    /// Packet length for `pkt`.
    #[arg(long)]
    pub m: Option<u32>,
    /// Spectral efficiency in bit/s/Hz for `exp`.
    #[arg(long, conflicts_with = "c")]
    pub rate: Option<f64>,
    /// Threshold `c` for `exp`.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub n: f64,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// JSON scenario; the built-in two-player scenario when omitted.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// `key=value` override of a scenario field (dotted paths).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormulaArg {
    Standard,
    Unscaled,
    ExactDeviation,
}

impl From<FormulaArg> for T0Formula {
    fn from(f: FormulaArg) -> Self {
        match f {
            FormulaArg::Standard => T0Formula::Standard,
            FormulaArg::Unscaled => T0Formula::Unscaled,
            FormulaArg::ExactDeviation => T0Formula::ExactDeviation,
        }
    }
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, value_enum, default_value_t = FormulaArg::Standard)]
    pub formula: FormulaArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlanKind {
    Frg,
    Drg,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, value_enum)]
    pub plan: PlanKind,
    /// Number of stages (FRG); defaults to `2 T0`.
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Endgame length (FRG); defaults to the network bound.
    #[arg(long)]
    pub t0: Option<usize>,
    /// Discount factor (DRG).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// `player=I,stage=T,power=max|best|<watts>`; repeatable.
    #[arg(long = "deviate", value_parser = parse_deviation)]
    pub deviations: Vec<Deviation>,
    /// Replays gains from a `t,player,gain2` CSV instead of sampling.
    #[arg(long)]
    pub channel_trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(value_parser = parse_experiment)]
    pub id: ExperimentId,
    /// JSON experiment configuration; defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

fn parse_experiment(s: &str) -> Result<ExperimentId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses `player=I,stage=T,power=P` where `P` is `max`, `best` or watts.
pub fn parse_deviation(s: &str) -> Result<Deviation, String> {
    let (mut player, mut stage, mut power) = (None, None, None);
    for part in s.split(',') {
        let (key, value) = part.split_once('=').ok_or_else(|| format!("{part:?} is not key=value"))?;
        match key.trim() {
            "player" => player = Some(value.trim().parse::<usize>().map_err(|e| format!("player: {e}"))?),
            "stage" => stage = Some(value.trim().parse::<usize>().map_err(|e| format!("stage: {e}"))?),
            "power" => {
                power = Some(match value.trim() {
                    "max" => DeviationPower::Max,
                    "best" | "best_response" => DeviationPower::BestResponse,
                    w => DeviationPower::Fixed(w.parse::<f64>().map_err(|e| format!("power: {e}"))?),
                })
            }
            other => return Err(format!("unknown deviation key {other:?}")),
        }
    }
    match (player, stage, power) {
        (Some(player), Some(stage), Some(power)) => Ok(Deviation { player, stage, power }),
        _ => Err("deviation needs player, stage and power".into()),
    }
}

/// Sampling settings of the scenario's channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSettings {
    pub mode: ChannelMode,
    /// Mean of the untruncated exponential, per player; 1 when empty.
    #[serde(default)]
    pub mean_gain2: Vec<f64>,
}

impl Default for ChannelSettings {
    fn default() -> Self {
        Self { mode: ChannelMode::RedrawPerStage, mean_gain2: Vec::new() }
    }
}

/// JSON scenario consumed by `equilibria`, `bounds` and `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub model: EfficiencyModel,
    pub network: NetworkConfig,
    /// Static gains for `equilibria`; `eta_min` when absent.
    #[serde(default)]
    pub gains2: Option<Vec<f64>>,
    #[serde(default)]
    pub channel: ChannelSettings,
    #[serde(default)]
    pub leader: usize,
}

impl Default for Scenario {
    /// Two players, `N = 1`, `c = 0.5`, unit noise and constant unit gains.
    fn default() -> Self {
        Self {
            model: EfficiencyModel::InfoTheoretic { c: 0.5 },
            network: NetworkConfig {
                spreading: 1.0,
                sigma2: 1.0,
                rates: vec![1.0; 2],
                p_max: vec![10.0; 2],
                eta_min: vec![1.0; 2],
                eta_max: vec![1.0; 2],
            },
            gains2: None,
            channel: ChannelSettings::default(),
            leader: 0,
        }
    }
}

impl Scenario {
    pub fn load(path: Option<&Path>, overrides: &[String]) -> crate::Result<Self> {
        let mut doc = match path {
            Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
            None => serde_json::to_value(Self::default())?,
        };
        apply_overrides(&mut doc, overrides)?;
        let s: Self = serde_json::from_value(doc)?;
        s.model.validate()?;
        s.network.validate()?;
        Ok(s)
    }

    pub fn sinrs(&self) -> crate::Result<CharacteristicSinrs> {
        CharacteristicSinrs::solve(self.model, self.network.k(), self.network.spreading)
    }

    pub fn channel_state(&self) -> ChannelState {
        ChannelState::new(self.gains2.clone().unwrap_or_else(|| self.network.eta_min.clone()))
    }

    pub fn channel_process(&self, seed: u64) -> crate::Result<ChannelProcess> {
        let k = self.network.k();
        let means = if self.channel.mean_gain2.is_empty() { vec![1.0; k] } else { self.channel.mean_gain2.clone() };
        ChannelProcess::new(self.channel.mode, means, self.network.eta_min.clone(), self.network.eta_max.clone(), seed)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Run(#[from] Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Run(e.into())
    }
}

impl CliError {
    /// 2 usage, 3 saturated regime, 4 no Nash equilibrium, 5 no finite `T0`, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Run(Error::SaturatedRegime { .. }) => 3,
            Self::Run(Error::NoNashEquilibrium { .. }) => 4,
            Self::Run(Error::NoFiniteT0 { .. }) => 5,
            Self::Run(_) => 1,
        }
    }
}

/// Key-value writer for scalar results.
struct Kv<'a>(&'a mut dyn Write);

impl Kv<'_> {
    fn put(&mut self, key: &str, value: impl std::fmt::Display) -> std::io::Result<()> {
        writeln!(self.0, "{key}={value}")
    }

    fn num(&mut self, key: &str, x: f64) -> std::io::Result<()> {
        self.put(key, num(x))
    }

    fn vec(&mut self, key: &str, xs: &[f64]) -> std::io::Result<()> {
        for (i, x) in xs.iter().enumerate() {
            self.num(&format!("{key}.{i}"), *x)?;
        }
        Ok(())
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    match &cli.command {
        Command::Solve(a) => emit(cli, out, |w| solve(a, w)),
        Command::Equilibria(a) => emit(cli, out, |w| equilibria_cmd(a, w)),
        Command::Bounds(a) => emit(cli, out, |w| bounds_cmd(a, w)),
        Command::Simulate(a) => emit(cli, out, |w| simulate(a, cli.seed, w)),
        Command::Experiment(a) => experiment(a, cli, out),
    }
}

fn emit(cli: &Cli, out: &mut dyn Write, body: impl FnOnce(&mut dyn Write) -> Result<(), CliError>) -> Result<(), CliError> {
    match cli.output.as_deref() {
        None => body(out),
        Some(p) if p == Path::new("-") => body(out),
        Some(p) => {
            let mut buf = Vec::new();
            body(&mut buf)?;
            fs::write(p, buf)?;
            Ok(())
        }
    }
}

fn solve(a: &SolveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let model = match a.model {
        ModelKind::Pkt => EfficiencyModel::packet(a.m.ok_or_else(|| CliError::Usage("--model pkt requires --m".into()))?)?,
        ModelKind::Exp => match (a.rate, a.c) {
            (Some(r), None) => EfficiencyModel::from_rate(r)?,
            (None, Some(c)) => EfficiencyModel::info_theoretic(c)?,
            _ => return Err(CliError::Usage("--model exp requires --rate or --c".into())),
        },
    };
    let s = CharacteristicSinrs::solve(model, a.k, a.n)?;
    let mut kv = Kv(out);
    kv.put("model", serde_json::to_string(&model).map_err(Error::from)?)?;
    kv.put("k", a.k)?;
    kv.num("n", a.n)?;
    kv.num("beta_star", s.beta_star)?;
    kv.num("gamma_star", s.gamma_star)?;
    kv.num("gamma_tilde", s.gamma_tilde)?;
    kv.num("f_beta_star", s.f_beta_star())?;
    kv.num("phi_beta_star", s.phi(s.beta_star))?;
    kv.num("phi_gamma_star", s.phi(s.gamma_star))?;
    kv.num("phi_gamma_tilde", s.phi(s.gamma_tilde))?;
    kv.num("delta", s.delta())?;
    kv.put("op_condition", s.op_condition.holds)?;
    kv.put("roots_unique", s.roots_unique)?;
    Ok(())
}

fn equilibria_cmd(a: &ScenarioArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let sc = Scenario::load(a.scenario.as_deref(), &a.overrides)?;
    let s = sc.sinrs()?;
    let ch = sc.channel_state();
    ch.check_bounds(&sc.network)?;
    let e = equilibria(&sc.network, &s, &ch, sc.leader)?;
    let mut kv = Kv(out);
    kv.num("beta_star", s.beta_star)?;
    kv.num("gamma_star", s.gamma_star)?;
    kv.num("gamma_tilde", s.gamma_tilde)?;
    kv.vec("ne.power", &e.ne.0)?;
    kv.vec("ne.utility", &e.ne_utilities.0)?;
    kv.num("ne.welfare", social_welfare(&e.ne_utilities))?;
    kv.put("se.leader", e.se.leader)?;
    kv.vec("se.power", &e.se.powers.0)?;
    kv.vec("se.utility", &e.se.utilities.0)?;
    kv.num("se.welfare", social_welfare(&e.se.utilities))?;
    kv.vec("op.power", &e.op.0)?;
    kv.vec("op.utility", &e.op_utilities.0)?;
    kv.num("op.welfare", social_welfare(&e.op_utilities))?;
    Ok(())
}

fn bounds_cmd(a: &BoundsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let sc = Scenario::load(a.scenario.scenario.as_deref(), &a.scenario.overrides)?;
    let s = sc.sinrs()?;
    let t0 = t0_bound_with(&sc.network, &s, a.formula.into())?;
    let lambda = lambda_bound(&sc.network, &s)?;
    let mut kv = Kv(out);
    kv.put("t0", t0)?;
    kv.num("lambda_max", lambda)?;
    kv.num("delta", s.delta())?;
    Ok(())
}

fn simulate(a: &SimulateArgs, seed: u64, out: &mut dyn Write) -> Result<(), CliError> {
    let sc = Scenario::load(a.scenario.scenario.as_deref(), &a.scenario.overrides)?;
    let s = sc.sinrs()?;
    let plan = match a.plan {
        PlanKind::Frg => {
            if a.lambda.is_some() {
                return Err(CliError::Usage("--lambda applies to --plan drg".into()));
            }
            let t0 = match a.t0 {
                Some(t) => t,
                None => t0_bound_with(&sc.network, &s, T0Formula::Standard)? as usize,
            };
            Plan::Frg { horizon: a.horizon.unwrap_or(2 * t0), t0 }
        }
        PlanKind::Drg => {
            if a.horizon.is_some() || a.t0.is_some() {
                return Err(CliError::Usage("--horizon and --t0 apply to --plan frg".into()));
            }
            Plan::Drg { lambda: a.lambda.ok_or_else(|| CliError::Usage("--plan drg requires --lambda".into()))? }
        }
    };
    plan.validate()?;
    let channel: Box<dyn ChannelSource> = match &a.channel_trace {
        Some(p) => Box::new(ChannelTrace::read_csv(fs::File::open(p)?)?),
        None => Box::new(sc.channel_process(seed)?),
    };
    let mut machines = StrategyMachine::for_all(&sc.network, &s, plan)?;
    let scenario = DeviationScenario { deviations: a.deviations.clone() };
    let trace = crate::repeated_game::run_game(&sc.network, &sc.model, s.beta_star, channel.as_ref(), &mut machines, &scenario)?;

    writeln!(out, "# powergame {} simulate", env!("CARGO_PKG_VERSION"))?;
    writeln!(out, "# seed={seed}")?;
    writeln!(out, "# scenario={}", serde_json::to_string(&sc).map_err(Error::from)?)?;
    writeln!(out, "# plan={}", serde_json::to_string(&plan).map_err(Error::from)?)?;
    writeln!(out, "# deviations={}", serde_json::to_string(&scenario).map_err(Error::from)?)?;
    if let Some(p) = &a.channel_trace {
        writeln!(out, "# channel_trace={}", p.display())?;
    }
    write_trace_csv(&trace, out)?;
    Ok(())
}

fn experiment(a: &ExperimentArgs, cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let mut doc = match &a.config {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?).map_err(Error::from)?,
        None => ExperimentConfig::default_for(a.id).to_json(),
    };
    apply_overrides(&mut doc, &a.overrides)?;
    let config = ExperimentConfig::from_json(doc)?;
    if config.id() != a.id {
        return Err(CliError::Usage(format!("configuration is for {}, not {}", config.id().name(), a.id.name())));
    }
    log::info!("running {} with seed {}", a.id.name(), cli.seed);
    let result = run_experiment(&config, cli.seed)?;
    match cli.output.as_deref() {
        Some(p) if p == Path::new("-") => out.write_all(result.csv.as_bytes())?,
        Some(p) => fs::write(p, &result.csv)?,
        None => {
            let secs = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            let path = format!("{}_{secs}.csv", a.id.name());
            fs::write(&path, &result.csv)?;
            writeln!(out, "wrote={path}")?;
        }
    }
    Ok(())
}
