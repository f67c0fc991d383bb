//! Session logic for the colored-bar guessing game.
//!
//! A session is nine single-click trials. For each trial the hidden phone
//! position `theta` is drawn from the 2D prior, the active interface turns
//! `(s = origin, theta)` into a two-channel signal, and each channel is shown
//! as a colored bar. The player clicks once; the true position and the error
//! are then revealed. In `pretrained-online` mode each guess is also added to
//! the session's dataset and the interface takes one training step.
//!
//! This module is transport-agnostic: the HTTP service and the browser demo
//! both drive [`Playground`].

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::LinearInterface;
use crate::env::{Additive, EnvConfig};
use crate::error::{Error, Result};
use crate::humans::{HumanConfig, HumanKind, SimulatedHuman};
use crate::learner::{Dataset, Experience, LearnerConfig, LimitLearner};
use crate::runner::{run_interaction, LearnerParams, LimitInterface};

pub const TRIALS_PER_SESSION: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SessionMode {
    PretrainedFrozen,
    PretrainedOnline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaygroundAlgo {
    Naive,
    Limit,
}

/// Hue in degrees for a channel value: `-1` is blue (240), `+1` is red (0).
pub fn hue_for_value(v: f64) -> f64 {
    240.0 * (1.0 - (v.clamp(-1.0, 1.0) + 1.0) / 2.0)
}

/// Inverse of [`hue_for_value`] on `[0, 240]`.
pub fn value_for_hue(hue: f64) -> f64 {
    1.0 - hue / 120.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub hue: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialView {
    pub bars: Vec<Bar>,
    pub trial_index: usize,
    pub state: Vec<f64>,
}

impl TrialView {
    fn new(signal: &[f64], trial_index: usize) -> Self {
        Self {
            bars: signal
                .iter()
                .map(|&v| Bar {
                    hue: hue_for_value(v),
                    value: v,
                })
                .collect(),
            trial_index,
            state: vec![0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub theta: Vec<f64>,
    pub signal: Vec<f64>,
    pub guess: Vec<f64>,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub errors: Vec<f64>,
    pub mean_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuessOutcome {
    pub theta: Vec<f64>,
    pub error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trial: Option<TrialView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<SessionSummary>,
}

/// Public view of a session. The pending trial's `theta` is never included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub id: u64,
    pub mode: SessionMode,
    pub algo: PlaygroundAlgo,
    pub trial_index: usize,
    pub pending: Option<TrialView>,
    pub completed: Vec<TrialRecord>,
    pub summary: Option<SessionSummary>,
}

enum Policy {
    Naive(LinearInterface),
    Frozen(Arc<LimitLearner>),
    Online {
        learner: Box<LimitLearner>,
        dataset: Dataset,
    },
}

impl Policy {
    fn signal(&self, state: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
        match self {
            Policy::Naive(w) => w.signal(state, theta),
            Policy::Frozen(l) => l.signal(state, theta),
            Policy::Online { learner, .. } => learner.signal(state, theta),
        }
    }
}

pub struct Session {
    id: u64,
    mode: SessionMode,
    algo: PlaygroundAlgo,
    env: EnvConfig,
    policy: Policy,
    rng: ChaCha8Rng,
    trial_index: usize,
    theta: Vec<f64>,
    signal: Vec<f64>,
    records: Vec<TrialRecord>,
}

impl Session {
    fn new(
        id: u64,
        mode: SessionMode,
        algo: PlaygroundAlgo,
        seed: u64,
        pretrained: &Arc<LimitLearner>,
    ) -> Result<Self> {
        let env = EnvConfig::preset("sim2d")?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let policy = match (algo, mode) {
            (PlaygroundAlgo::Naive, _) => Policy::Naive(LinearInterface::naive(
                &mut rng,
                env.signal_dim,
                env.state_dim,
                env.theta_dim,
            )),
            (PlaygroundAlgo::Limit, SessionMode::PretrainedFrozen) => Policy::Frozen(Arc::clone(pretrained)),
            (PlaygroundAlgo::Limit, SessionMode::PretrainedOnline) => {
                let mut learner = LimitLearner::clone(pretrained);
                // A session holds at most nine experiences, so train on one at a time.
                learner.set_batch_size(1);
                Policy::Online {
                    learner: Box::new(learner),
                    dataset: Dataset::new(),
                }
            }
        };
        let mut session = Self {
            id,
            mode,
            algo,
            env,
            policy,
            rng,
            trial_index: 0,
            theta: Vec::new(),
            signal: Vec::new(),
            records: Vec::new(),
        };
        session.draw_trial()?;
        Ok(session)
    }

    fn origin(&self) -> Vec<f64> {
        vec![0.0; self.env.state_dim]
    }

    fn draw_trial(&mut self) -> Result<()> {
        self.theta = self.env.sample_theta(&mut self.rng);
        self.signal = self.policy.signal(&self.origin(), &self.theta)?;
        Ok(())
    }

    fn finished(&self) -> bool {
        self.trial_index >= TRIALS_PER_SESSION
    }

    fn view(&self) -> Option<TrialView> {
        (!self.finished()).then(|| TrialView::new(&self.signal, self.trial_index))
    }

    fn summary(&self) -> Option<SessionSummary> {
        self.finished().then(|| {
            let errors: Vec<f64> = self.records.iter().map(|r| r.error).collect();
            let mean_error = errors.iter().sum::<f64>() / errors.len() as f64;
            SessionSummary { errors, mean_error }
        })
    }

    fn snapshot(&self) -> SessionSnapshot {
        SessionSnapshot {
            id: self.id,
            mode: self.mode,
            algo: self.algo,
            trial_index: self.trial_index,
            pending: self.view(),
            completed: self.records.clone(),
            summary: self.summary(),
        }
    }

    fn submit(&mut self, guess: &[f64], expected_trial: Option<usize>) -> Result<GuessOutcome> {
        if self.finished() {
            return Err(Error::Rejected {
                id: self.id,
                reason: "session is complete".into(),
            });
        }
        if let Some(t) = expected_trial {
            if t != self.trial_index {
                return Err(Error::Rejected {
                    id: self.id,
                    reason: format!("guess for trial {t}, but trial {} is pending", self.trial_index),
                });
            }
        }
        if guess.len() != 2 || guess.iter().any(|g| !g.is_finite()) {
            return Err(Error::Rejected {
                id: self.id,
                reason: "guess must be two finite coordinates".into(),
            });
        }
        let theta = self.theta.clone();
        let error = crate::env::squared_distance(guess, &theta).sqrt();
        if let Policy::Online { learner, dataset } = &mut self.policy {
            dataset.push(Experience {
                state: vec![0.0, 0.0],
                signal: self.signal.clone(),
                action: guess.to_vec(),
                theta: theta.clone(),
                interaction: self.trial_index,
                timestep: 0,
            })?;
            learner.train_step(dataset, &Additive)?;
        }
        self.records.push(TrialRecord {
            theta: theta.clone(),
            signal: self.signal.clone(),
            guess: guess.to_vec(),
            error,
        });
        self.trial_index += 1;
        if !self.finished() {
            self.draw_trial()?;
        }
        Ok(GuessOutcome {
            theta,
            error,
            trial: self.view(),
            summary: self.summary(),
        })
    }

    /// The interface parameters currently in use, for checking the frozen contract.
    pub fn learner(&self) -> Option<&LimitLearner> {
        match &self.policy {
            Policy::Naive(_) => None,
            Policy::Frozen(l) => Some(l),
            Policy::Online { learner, .. } => Some(learner),
        }
    }

    /// `trial,theta_x,theta_y,x_0,x_1,guess_x,guess_y,error` for each completed trial.
    pub fn records_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["trial", "theta_x", "theta_y", "x_0", "x_1", "guess_x", "guess_y", "error"])?;
        for (i, r) in self.records.iter().enumerate() {
            let mut row = vec![i.to_string()];
            row.extend(
                r.theta
                    .iter()
                    .chain(&r.signal)
                    .chain(&r.guess)
                    .chain(std::iter::once(&r.error))
                    .map(|v| v.to_string()),
            );
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8_lossy(&bytes).into_owned())
    }
}

/// Trains a 2D learner offline against a simulated Align human.
pub fn pretrain(learner: LimitLearner, interactions: usize, seed: u64) -> Result<LimitLearner> {
    if interactions == 0 {
        return Ok(learner);
    }
    let mut env = EnvConfig::preset("sim2d")?;
    env.interactions = interactions;
    let mut human_rng = ChaCha8Rng::seed_from_u64(seed);
    human_rng.set_stream(2);
    let mut env_rng = ChaCha8Rng::seed_from_u64(seed);
    env_rng.set_stream(1);
    let mut human = SimulatedHuman::random(
        HumanKind::Align,
        env.state_dim,
        env.signal_dim,
        HumanConfig::default(),
        &mut human_rng,
    )?;
    let mut iface = LimitInterface::new(learner);
    let mut history = Vec::new();
    for i in 0..interactions {
        run_interaction(&env, &mut human, &mut iface, &mut history, i, &mut env_rng, &mut human_rng)?;
    }
    Ok(iface.into_learner())
}

/// Untrained learner with the default hyperparameters for the 2D world.
pub fn default_learner(seed: u64) -> Result<LimitLearner> {
    let env = EnvConfig::preset("sim2d")?;
    let cfg: LearnerConfig =
        LearnerParams::default().learner_config(&env, crate::learner::LossMode::Full, seed);
    LimitLearner::new(cfg)
}

/// In-memory session store. Sessions are independent; each is locked on its own.
pub struct Playground {
    pretrained: Arc<LimitLearner>,
    sessions: Mutex<HashMap<u64, Arc<Mutex<Session>>>>,
    next_id: AtomicU64,
}

impl Playground {
    pub fn new(pretrained: LimitLearner) -> Result<Self> {
        let c = pretrained.config();
        if (c.state_dim, c.signal_dim, c.theta_dim) != (2, 2, 2) {
            return Err(Error::Config("the playground needs a 2D learner with 2D signals".into()));
        }
        Ok(Self {
            pretrained: Arc::new(pretrained),
            sessions: Mutex::new(HashMap::new()),
            next_id: AtomicU64::new(1),
        })
    }

    pub fn pretrained(&self) -> &LimitLearner {
        &self.pretrained
    }

    /// Opens a session. Without a seed the session id is used as the seed.
    pub fn start_session(
        &self,
        mode: SessionMode,
        algo: PlaygroundAlgo,
        seed: Option<u64>,
    ) -> Result<(u64, TrialView)> {
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let session = Session::new(id, mode, algo, seed.unwrap_or(id), &self.pretrained)?;
        let view = session.view().expect("a new session has a pending trial");
        self.sessions
            .lock()
            .expect("session map poisoned")
            .insert(id, Arc::new(Mutex::new(session)));
        Ok((id, view))
    }

    fn session(&self, id: u64) -> Result<Arc<Mutex<Session>>> {
        self.sessions
            .lock()
            .expect("session map poisoned")
            .get(&id)
            .cloned()
            .ok_or(Error::UnknownSession(id))
    }

    /// Records a guess for the pending trial. When `expected_trial` is given
    /// and does not match the pending trial the guess is rejected, which
    /// makes retried submissions harmless.
    pub fn submit_guess(&self, id: u64, guess: &[f64], expected_trial: Option<usize>) -> Result<GuessOutcome> {
        let session = self.session(id)?;
        let mut s = session.lock().expect("session poisoned");
        s.submit(guess, expected_trial)
    }

    pub fn snapshot(&self, id: u64) -> Result<SessionSnapshot> {
        let session = self.session(id)?;
        let s = session.lock().expect("session poisoned");
        Ok(s.snapshot())
    }

    pub fn with_session<T>(&self, id: u64, f: impl FnOnce(&Session) -> T) -> Result<T> {
        let session = self.session(id)?;
        let s = session.lock().expect("session poisoned");
        Ok(f(&s))
    }

    /// The hidden position of the pending trial. Not exposed over any API;
    /// used by scripted players in tests.
    pub fn pending_theta_for_testing(&self, id: u64) -> Result<Option<Vec<f64>>> {
        self.with_session(id, |s| (!s.finished()).then(|| s.theta.clone()))
    }
}
