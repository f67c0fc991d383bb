//! Simulation runner: interface policies, the interaction loop, and CSV results.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{BayesConfig, BayesState, LinearInterface};
use crate::env::{self, Additive, EnvConfig, InteractionLog, TimeStep};
use crate::error::{Error, Result};
use crate::humans::{AdaptationRecord, HumanConfig, HumanKind, SimulatedHuman};
use crate::learner::{Dataset, Experience, LearnerConfig, LimitLearner, LossMode, LossReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Naive,
    Bayes,
    Convey,
    Distinguish,
    Limit,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Naive,
        Algorithm::Bayes,
        Algorithm::Convey,
        Algorithm::Distinguish,
        Algorithm::Limit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Naive => "naive",
            Algorithm::Bayes => "bayes",
            Algorithm::Convey => "convey",
            Algorithm::Distinguish => "distinguish",
            Algorithm::Limit => "limit",
        }
    }

    fn loss_mode(self) -> Option<LossMode> {
        match self {
            Algorithm::Convey => Some(LossMode::ConveyOnly),
            Algorithm::Distinguish => Some(LossMode::DistinguishOnly),
            Algorithm::Limit => Some(LossMode::Full),
            Algorithm::Naive | Algorithm::Bayes => None,
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

/// Learner hyperparameters shared by LIMIT and its ablations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerParams {
    pub hidden: Vec<usize>,
    pub horizon: usize,
    pub batch_size: usize,
    pub recency: f64,
    pub learning_rate: f64,
    /// Input scale for states; defaults to the environment's `theta_scale`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_scale: Option<f64>,
    /// Scale for `theta` inputs and decoder outputs; defaults to the environment's `theta_scale`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_scale: Option<f64>,
}

impl Default for LearnerParams {
    fn default() -> Self {
        let d = LearnerConfig::new(1, 1, 1);
        Self {
            hidden: d.hidden,
            horizon: d.horizon,
            batch_size: d.batch_size,
            recency: d.recency,
            learning_rate: d.learning_rate,
            state_scale: None,
            theta_scale: None,
        }
    }
}

impl LearnerParams {
    pub fn learner_config(&self, env: &EnvConfig, mode: LossMode, seed: u64) -> LearnerConfig {
        let scale = env.theta_scale();
        LearnerConfig {
            state_dim: env.state_dim,
            signal_dim: env.signal_dim,
            action_dim: env.state_dim,
            theta_dim: env.theta_dim,
            hidden: self.hidden.clone(),
            horizon: self.horizon,
            batch_size: self.batch_size,
            recency: self.recency,
            learning_rate: self.learning_rate,
            loss_mode: mode,
            state_scale: self.state_scale.unwrap_or(scale),
            theta_scale: self.theta_scale.unwrap_or(scale),
            seed,
        }
    }
}

/// Everything needed to reproduce a set of runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub env: EnvConfig,
    pub algorithm: Algorithm,
    pub human: HumanKind,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub learner: LearnerParams,
    #[serde(default)]
    pub human_config: HumanConfig,
    #[serde(default)]
    pub bayes: BayesConfig,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(preset: &str, algorithm: Algorithm, human: HumanKind, seeds: Vec<u64>) -> Result<Self> {
        Ok(Self {
            env: EnvConfig::preset(preset)?,
            algorithm,
            human,
            seeds,
            learner: LearnerParams::default(),
            human_config: HumanConfig::default(),
            bayes: BayesConfig::default(),
            output: None,
        })
    }
}

/// Receives the task reward at the end of an interaction.
pub trait RewardObserver {
    fn observe_reward(&mut self, reward: f64) -> Result<()>;
}

/// A policy that turns `(state, theta)` into signals during an interaction.
pub trait InterfacePolicy {
    fn algorithm(&self) -> Algorithm;

    fn begin_interaction(&mut self) -> Result<()> {
        Ok(())
    }

    /// Called before the signal of every timestep; LIMIT trains here.
    fn before_timestep(&mut self) -> Result<Option<LossReport>> {
        Ok(None)
    }

    fn signal(&mut self, state: &[f64], theta: &[f64]) -> Result<Vec<f64>>;

    fn record(&mut self, _exp: Experience) -> Result<()> {
        Ok(())
    }

    /// The channel through which the runner reports interaction rewards.
    /// Interfaces that must stay task-agnostic return `None`.
    fn reward_channel(&mut self) -> Option<&mut dyn RewardObserver> {
        None
    }

    /// Parameters that determine the signal; used for cadence checks.
    fn parameters(&self) -> Vec<f64>;
}

pub struct NaiveInterface {
    matrix: LinearInterface,
}

impl NaiveInterface {
    pub fn new(matrix: LinearInterface) -> Self {
        Self { matrix }
    }
}

impl InterfacePolicy for NaiveInterface {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Naive
    }

    fn signal(&mut self, state: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
        self.matrix.signal(state, theta)
    }

    fn parameters(&self) -> Vec<f64> {
        self.matrix.weights.clone()
    }
}

pub struct BayesInterface {
    state: BayesState,
    active: LinearInterface,
    rng: ChaCha8Rng,
}

impl BayesInterface {
    pub fn new(rows: usize, cols: usize, config: BayesConfig, rng: ChaCha8Rng) -> Self {
        Self {
            state: BayesState::new(rows * cols, config),
            active: LinearInterface {
                rows,
                cols,
                weights: vec![0.0; rows * cols],
            },
            rng,
        }
    }

    pub fn state(&self) -> &BayesState {
        &self.state
    }
}

impl InterfacePolicy for BayesInterface {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Bayes
    }

    fn begin_interaction(&mut self) -> Result<()> {
        self.active.weights = self.state.propose(&mut self.rng);
        Ok(())
    }

    fn signal(&mut self, state: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
        self.active.signal(state, theta)
    }

    fn reward_channel(&mut self) -> Option<&mut dyn RewardObserver> {
        Some(self)
    }

    fn parameters(&self) -> Vec<f64> {
        self.active.weights.clone()
    }
}

impl RewardObserver for BayesInterface {
    fn observe_reward(&mut self, reward: f64) -> Result<()> {
        let matrix = self.active.weights.clone();
        self.state.observe(&matrix, reward)
    }
}

/// LIMIT (or one of its ablations) with its experience dataset.
pub struct LimitInterface {
    learner: LimitLearner,
    dataset: Dataset,
}

impl LimitInterface {
    pub fn new(learner: LimitLearner) -> Self {
        Self {
            learner,
            dataset: Dataset::new(),
        }
    }

    pub fn learner(&self) -> &LimitLearner {
        &self.learner
    }

    pub fn into_learner(self) -> LimitLearner {
        self.learner
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }
}

impl InterfacePolicy for LimitInterface {
    fn algorithm(&self) -> Algorithm {
        match self.learner.config().loss_mode {
            LossMode::Full => Algorithm::Limit,
            LossMode::ConveyOnly => Algorithm::Convey,
            LossMode::DistinguishOnly => Algorithm::Distinguish,
        }
    }

    fn before_timestep(&mut self) -> Result<Option<LossReport>> {
        self.learner.train_step(&self.dataset, &Additive)
    }

    fn signal(&mut self, state: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
        self.learner.signal(state, theta)
    }

    fn record(&mut self, exp: Experience) -> Result<()> {
        self.dataset.push(exp)
    }

    fn parameters(&self) -> Vec<f64> {
        self.learner.interface().parameters().collect()
    }
}

/// Builds the interface for `algorithm`, drawing any randomness from `rng`.
pub fn build_interface(
    config: &ExperimentConfig,
    seed: u64,
    rng: &mut ChaCha8Rng,
) -> Result<Box<dyn InterfacePolicy + Send>> {
    let env = &config.env;
    let cols = env.state_dim + env.theta_dim;
    Ok(match config.algorithm {
        Algorithm::Naive => Box::new(NaiveInterface::new(LinearInterface::naive(
            rng,
            env.signal_dim,
            env.state_dim,
            env.theta_dim,
        ))),
        Algorithm::Bayes => Box::new(BayesInterface::new(
            env.signal_dim,
            cols,
            config.bayes.clone(),
            ChaCha8Rng::from_rng(rng).map_err(|e| Error::Config(e.to_string()))?,
        )),
        algo => {
            let mode = algo.loss_mode().expect("learning algorithms have a loss mode");
            let learner_seed = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(1);
            let cfg = config.learner.learner_config(env, mode, learner_seed);
            Box::new(LimitInterface::new(LimitLearner::new(cfg)?))
        }
    })
}

/// Result of one interaction.
#[derive(Debug, Clone)]
pub struct InteractionOutcome {
    pub log: InteractionLog,
    pub reward: f64,
    pub losses: Vec<LossReport>,
}

fn check_compatible(
    env: &EnvConfig,
    human: &SimulatedHuman,
    iface: &mut dyn InterfacePolicy,
) -> Result<()> {
    env.validate()?;
    let probe = iface.signal(&env.start, &env.theta_low)?;
    if probe.len() != env.signal_dim {
        return Err(Error::Shape {
            context: "interface signal",
            expected: env.signal_dim,
            actual: probe.len(),
        });
    }
    human.act(&env.start, &probe)?;
    Ok(())
}

/// Runs one interaction: `theta` is drawn, then for each timestep the
/// interface may train, emits a signal, the human acts and the state moves.
/// Afterwards the human re-fits its interpretation and, when the interface
/// exposes a reward channel, the reward is delivered to it.
pub fn run_interaction(
    env: &EnvConfig,
    human: &mut SimulatedHuman,
    interface: &mut dyn InterfacePolicy,
    history: &mut Vec<AdaptationRecord>,
    interaction: usize,
    env_rng: &mut ChaCha8Rng,
    human_rng: &mut ChaCha8Rng,
) -> Result<InteractionOutcome> {
    check_compatible(env, human, interface)?;
    interface.begin_interaction()?;
    let frozen = interface.algorithm() != Algorithm::Limit
        && interface.algorithm() != Algorithm::Convey
        && interface.algorithm() != Algorithm::Distinguish;
    let params_at_start = frozen.then(|| interface.parameters());

    let theta = env.sample_theta(env_rng);
    let mut log = InteractionLog::new(theta.clone(), env.start.clone());
    let mut losses = Vec::new();
    for t in 0..env.horizon {
        if let Some(report) = interface.before_timestep()? {
            losses.push(report);
        }
        let state = log.final_state.clone();
        let signal = interface.signal(&state, &theta)?;
        let action = human.act(&state, &signal)?;
        interface.record(Experience {
            state: state.clone(),
            signal: signal.clone(),
            action: action.clone(),
            theta: theta.clone(),
            interaction,
            timestep: t,
        })?;
        log.final_state = env::step(&state, &action)?;
        log.steps.push(TimeStep {
            state,
            signal,
            action,
        });
        log.duration += 1.0;
    }
    if let Some(start) = params_at_start {
        if start != interface.parameters() {
            return Err(Error::Config(format!(
                "{} interface changed within an interaction",
                interface.algorithm()
            )));
        }
    }

    let reward = env::reward(&log);
    history.push(AdaptationRecord {
        start: env.start.clone(),
        signals: log.steps.iter().map(|s| s.signal.clone()).collect(),
        theta: theta.clone(),
        reward,
    });
    human.adapt(history, human_rng);
    if let Some(channel) = interface.reward_channel() {
        channel.observe_reward(reward)?;
    }
    Ok(InteractionOutcome { log, reward, losses })
}

/// One CSV row: the outcome of a single interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub preset: String,
    pub algorithm: Algorithm,
    pub human: HumanKind,
    pub seed: u64,
    pub interaction: usize,
    pub error: f64,
    pub distance: f64,
    pub reward: f64,
    pub human_sign: f64,
    pub human_angle: f64,
    pub human_scale: f64,
    pub loss_convey: Option<f64>,
    pub loss_distinguish: Option<f64>,
    pub loss_total: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunResult {
    pub rows: Vec<RunRow>,
}

fn seed_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// All interactions for one seed.
pub fn run_seed(config: &ExperimentConfig, seed: u64) -> Result<Vec<RunRow>> {
    let env = &config.env;
    env.validate()?;
    let mut env_rng = seed_rng(seed, 1);
    let mut human_rng = seed_rng(seed, 2);
    let mut iface_rng = seed_rng(seed, 3);
    let mut human = SimulatedHuman::random(
        config.human,
        env.state_dim,
        env.signal_dim,
        config.human_config.clone(),
        &mut human_rng,
    )?;
    let mut interface = build_interface(config, seed, &mut iface_rng)?;
    let naive_params = (config.algorithm == Algorithm::Naive).then(|| interface.parameters());
    let mut history = Vec::new();
    let mut rows = Vec::with_capacity(env.interactions);
    for i in 0..env.interactions {
        let out = run_interaction(
            env,
            &mut human,
            interface.as_mut(),
            &mut history,
            i,
            &mut env_rng,
            &mut human_rng,
        )?;
        let m = env::metrics(&out.log);
        let mean = |f: fn(&LossReport) -> f64| {
            (!out.losses.is_empty())
                .then(|| out.losses.iter().map(f).sum::<f64>() / out.losses.len() as f64)
        };
        let interp = human.interpretation();
        rows.push(RunRow {
            preset: env.name.clone(),
            algorithm: config.algorithm,
            human: config.human,
            seed,
            interaction: i,
            error: m.error,
            distance: m.distance,
            reward: out.reward,
            human_sign: interp.sign,
            human_angle: interp.angle,
            human_scale: interp.scale,
            loss_convey: mean(|r| r.convey),
            loss_distinguish: mean(|r| r.distinguish),
            loss_total: mean(|r| r.total),
        });
    }
    if let Some(p) = naive_params {
        if p != interface.parameters() {
            return Err(Error::Config("naive interface changed during a run".into()));
        }
    }
    Ok(rows)
}

fn run_seeds(config: &ExperimentConfig, seeds: &[u64]) -> Result<Vec<Vec<RunRow>>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        seeds.par_iter().map(|&s| run_seed(config, s)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        seeds.iter().map(|&s| run_seed(config, s)).collect()
    }
}

fn chunk_size() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads().max(1)
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Runs every seed. When `config.output` is set, rows are streamed to a
/// `.partial` file that is renamed into place once all seeds have finished.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunResult> {
    config.env.validate()?;
    let mut writer = match &config.output {
        Some(path) => Some(PartialCsv::create(path)?),
        None => None,
    };
    let mut result = RunResult::default();
    for chunk in config.seeds.chunks(chunk_size()) {
        for rows in run_seeds(config, chunk)? {
            if let Some(w) = writer.as_mut() {
                w.write_rows(&rows)?;
            }
            result.rows.extend(rows);
        }
    }
    if let Some(w) = writer {
        w.finish()?;
    }
    Ok(result)
}

struct PartialCsv {
    target: PathBuf,
    partial: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl PartialCsv {
    fn create(target: &Path) -> Result<Self> {
        let mut partial = target.as_os_str().to_owned();
        partial.push(".partial");
        let partial = PathBuf::from(partial);
        let file = File::create(&partial)?;
        Ok(Self {
            target: target.to_path_buf(),
            partial,
            writer: csv::Writer::from_writer(BufWriter::new(file)),
        })
    }

    fn write_rows(&mut self, rows: &[RunRow]) -> Result<()> {
        for r in rows {
            self.writer.serialize(r)?;
        }
        self.writer.flush()?;
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        self.writer.flush()?;
        drop(self.writer);
        std::fs::rename(&self.partial, &self.target)?;
        Ok(())
    }
}

pub fn write_rows<W: Write>(rows: &[RunRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: std::io::Read>(reader: R) -> Result<Vec<RunRow>> {
    let mut r = csv::Reader::from_reader(reader);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn read_rows_path(path: &Path) -> Result<Vec<RunRow>> {
    read_rows(File::open(path)?)
}
