//! Point-mass worlds with a hidden goal.
//!
//! The state is a position, actions are displacements (`s' = s + a`, no
//! clipping) and the hidden information is one or more goal positions drawn
//! from a uniform box prior.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Deterministic state transition `s' = f(s, a)` with its vector-Jacobian product.
pub trait Dynamics {
    fn step(&self, state: &[f64], action: &[f64]) -> Vec<f64>;

    /// Given `g = dL/ds'`, returns `(dL/ds, dL/da)`.
    fn vjp(&self, state: &[f64], action: &[f64], upstream: &[f64]) -> (Vec<f64>, Vec<f64>);
}

/// `s' = s + a`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Additive;

impl Dynamics for Additive {
    fn step(&self, state: &[f64], action: &[f64]) -> Vec<f64> {
        state.iter().zip(action).map(|(s, a)| s + a).collect()
    }

    fn vjp(&self, _state: &[f64], _action: &[f64], upstream: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (upstream.to_vec(), upstream.to_vec())
    }
}

pub fn step(state: &[f64], action: &[f64]) -> Result<Vec<f64>> {
    check_len("action", state.len(), action.len())?;
    Ok(Additive.step(state, action))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub name: String,
    /// Dimension of both the state and the action.
    pub state_dim: usize,
    pub signal_dim: usize,
    pub theta_dim: usize,
    pub theta_low: Vec<f64>,
    pub theta_high: Vec<f64>,
    pub horizon: usize,
    pub start: Vec<f64>,
    pub interactions: usize,
}

pub const PRESETS: [&str; 4] = ["sim1d", "sim2d", "over4x2", "under2x4"];

impl EnvConfig {
    pub fn preset(name: &str) -> Result<Self> {
        let (state_dim, signal_dim, theta_dim, interactions) = match name {
            "sim1d" => (1, 1, 1, 40),
            "sim2d" => (2, 2, 2, 100),
            "over4x2" => (2, 4, 2, 100),
            "under2x4" => (2, 2, 4, 100),
            other => return Err(Error::Config(format!("unknown preset {other:?}"))),
        };
        Ok(Self {
            name: name.to_string(),
            state_dim,
            signal_dim,
            theta_dim,
            theta_low: vec![-10.0; theta_dim],
            theta_high: vec![10.0; theta_dim],
            horizon: 10,
            start: vec![0.0; state_dim],
            interactions,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.state_dim == 0 || self.signal_dim == 0 || self.theta_dim == 0 {
            return Err(Error::Config("dimensions must be positive".into()));
        }
        check_len("start state", self.state_dim, self.start.len())?;
        check_len("theta prior low", self.theta_dim, self.theta_low.len())?;
        check_len("theta prior high", self.theta_dim, self.theta_high.len())?;
        if self.theta_low.iter().zip(&self.theta_high).any(|(l, h)| l > h) {
            return Err(Error::Config("theta prior box has low > high".into()));
        }
        if self.theta_dim != self.state_dim && self.theta_dim != 2 * self.state_dim {
            return Err(Error::Config(
                "hidden information must hold one or two goal positions".into(),
            ));
        }
        Ok(())
    }

    /// Largest absolute coordinate of the prior box; used to normalize network inputs.
    pub fn theta_scale(&self) -> f64 {
        self.theta_low
            .iter()
            .chain(&self.theta_high)
            .fold(0.0_f64, |m, v| m.max(v.abs()))
            .max(1.0)
    }

    /// Uniform draw from the prior box. A degenerate box yields its single point.
    pub fn sample_theta<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.theta_low
            .iter()
            .zip(&self.theta_high)
            .map(|(&lo, &hi)| if lo < hi { rng.gen_range(lo..hi) } else { lo })
            .collect()
    }

    /// Position the human should reach for hidden information `theta`.
    ///
    /// With one goal per state this is `theta` itself; when `theta` holds two
    /// goal positions the target is their midpoint.
    pub fn goal(&self, theta: &[f64]) -> Vec<f64> {
        goal_for(self.state_dim, theta)
    }
}

pub(crate) fn goal_for(state_dim: usize, theta: &[f64]) -> Vec<f64> {
    if theta.len() == state_dim {
        return theta.to_vec();
    }
    let goals = theta.len() / state_dim;
    (0..state_dim)
        .map(|d| (0..goals).map(|g| theta[g * state_dim + d]).sum::<f64>() / goals as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeStep {
    pub state: Vec<f64>,
    pub signal: Vec<f64>,
    pub action: Vec<f64>,
}

/// One interaction: the hidden information, the `(s, x, a)` sequence and the final state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionLog {
    pub theta: Vec<f64>,
    pub steps: Vec<TimeStep>,
    pub final_state: Vec<f64>,
    /// Elapsed time; the number of timesteps in simulation.
    pub duration: f64,
}

impl InteractionLog {
    pub fn new(theta: Vec<f64>, start: Vec<f64>) -> Self {
        Self {
            theta,
            steps: Vec::new(),
            final_state: start,
            duration: 0.0,
        }
    }

    /// Visited states `s^0, ..., s^T`.
    pub fn trajectory(&self) -> Vec<&[f64]> {
        self.steps
            .iter()
            .map(|s| s.state.as_slice())
            .chain(std::iter::once(self.final_state.as_slice()))
            .collect()
    }
}

/// `R(xi, theta) = -||s^T - goal(theta)||^2`.
pub fn reward(log: &InteractionLog) -> f64 {
    let goal = goal_for(log.final_state.len(), &log.theta);
    -squared_distance(&log.final_state, &goal)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub error: f64,
    pub distance: f64,
    pub time: f64,
}

pub fn metrics(log: &InteractionLog) -> Metrics {
    let goal = goal_for(log.final_state.len(), &log.theta);
    let error = squared_distance(&log.final_state, &goal).sqrt();
    let distance = log
        .trajectory()
        .windows(2)
        .map(|w| squared_distance(w[0], w[1]).sqrt())
        .sum();
    Metrics {
        error,
        distance,
        time: log.duration,
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
