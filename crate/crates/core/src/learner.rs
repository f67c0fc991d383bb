//! The LIMIT learner.
//!
//! Three networks are trained jointly on the experience gathered so far:
//!
//! * the human model `H(s, x) -> a`,
//! * the interface policy `R(s, theta) -> x` (tanh head, signals in `[-1, 1]`),
//! * the decoder `D(tau) -> theta`, reading a flattened `k`-step rollout.
//!
//! The convey loss asks `H(s, R(s, theta))` to reproduce the observed action.
//! The distinguish loss rolls the composed models forward through the true
//! dynamics and asks the decoder to recover `theta` from the imagined
//! `(state, action)` sequence. Both are plain sums of squared errors over the
//! batch and are minimized together with Adam, one step per call to
//! [`LimitLearner::train_step`]. Batches favour recent experience with
//! geometric weights.
//!
//! The learner never sees task rewards: nothing in this module accepts one.

use std::io::{Read, Write};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::Dynamics;
use crate::error::{check_len, Error, Result};
use crate::net::{Activation, Adam, DenseNet, Gradients, NetCheckpoint, StepOutcome, Tape};

/// One observed timestep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experience {
    pub state: Vec<f64>,
    pub signal: Vec<f64>,
    pub action: Vec<f64>,
    pub theta: Vec<f64>,
    pub interaction: usize,
    pub timestep: usize,
}

/// Append-only experience store.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    items: Vec<Experience>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[Experience] {
        &self.items
    }

    pub fn last(&self) -> Option<&Experience> {
        self.items.last()
    }

    pub fn push(&mut self, exp: Experience) -> Result<()> {
        if let Some(first) = self.items.first() {
            check_len("experience state", first.state.len(), exp.state.len())?;
            check_len("experience signal", first.signal.len(), exp.signal.len())?;
            check_len("experience action", first.action.len(), exp.action.len())?;
            check_len("experience theta", first.theta.len(), exp.theta.len())?;
        }
        if let Some(last) = self.items.last() {
            if exp.interaction < last.interaction {
                return Err(Error::Config(format!(
                    "interaction index went backwards ({} after {})",
                    exp.interaction, last.interaction
                )));
            }
        }
        if exp.signal.iter().any(|x| !(-1.0..=1.0).contains(x)) {
            return Err(Error::Config("signal component outside [-1, 1]".into()));
        }
        self.items.push(exp);
        Ok(())
    }

    /// Writes `s_0..,x_0..,a_0..,th_0..,interaction,t`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let Some(first) = self.items.first() else {
            w.flush()?;
            return Ok(());
        };
        let mut header = Vec::new();
        for (prefix, n) in [
            ("s", first.state.len()),
            ("x", first.signal.len()),
            ("a", first.action.len()),
            ("th", first.theta.len()),
        ] {
            header.extend((0..n).map(|i| format!("{prefix}_{i}")));
        }
        header.push("interaction".into());
        header.push("t".into());
        w.write_record(&header)?;
        for e in &self.items {
            let mut row: Vec<String> = e
                .state
                .iter()
                .chain(&e.signal)
                .chain(&e.action)
                .chain(&e.theta)
                .map(|v| v.to_string())
                .collect();
            row.push(e.interaction.to_string());
            row.push(e.timestep.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        let count = |prefix: &str| {
            header
                .iter()
                .filter(|h| h.rsplit_once('_').is_some_and(|(p, _)| p == prefix))
                .count()
        };
        let dims = [count("s"), count("x"), count("a"), count("th")];
        let expected = dims.iter().sum::<usize>() + 2;
        check_len("dataset csv columns", expected, header.len())?;
        let mut out = Dataset::new();
        for record in r.records() {
            let record = record?;
            let parse = |i: usize| -> Result<f64> {
                record[i]
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad number {:?}: {e}", &record[i])))
            };
            let mut col = 0;
            let mut take = |n: usize| -> Result<Vec<f64>> {
                let v = (col..col + n).map(parse).collect::<Result<Vec<_>>>()?;
                col += n;
                Ok(v)
            };
            let state = take(dims[0])?;
            let signal = take(dims[1])?;
            let action = take(dims[2])?;
            let theta = take(dims[3])?;
            let index = |i: usize| -> Result<usize> {
                record[i]
                    .parse::<usize>()
                    .map_err(|e| Error::Config(format!("bad index {:?}: {e}", &record[i])))
            };
            out.push(Experience {
                state,
                signal,
                action,
                theta,
                interaction: index(expected - 2)?,
                timestep: index(expected - 1)?,
            })?;
        }
        Ok(out)
    }
}

/// Sampling weight of each position, `ratio^(N-1-i)`, newest last.
pub fn recency_weights(len: usize, ratio: f64) -> Vec<f64> {
    (0..len).map(|i| ratio.powi((len - 1 - i) as i32)).collect()
}

/// Draws `m` indices with replacement, item `i` weighted by `ratio^(N-1-i)`.
pub fn recency_sample_indices<R: Rng + ?Sized>(
    len: usize,
    m: usize,
    ratio: f64,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if m > len || len == 0 {
        return Err(Error::NotEnoughData {
            available: len,
            requested: m,
        });
    }
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::Config(format!("recency ratio {ratio} outside (0, 1]")));
    }
    let dist = WeightedIndex::new(recency_weights(len, ratio))
        .map_err(|e| Error::Config(format!("recency weights: {e}")))?;
    Ok((0..m).map(|_| dist.sample(rng)).collect())
}

pub fn recency_sample<'a, R: Rng + ?Sized>(
    dataset: &'a Dataset,
    m: usize,
    ratio: f64,
    rng: &mut R,
) -> Result<Vec<&'a Experience>> {
    Ok(recency_sample_indices(dataset.len(), m, ratio, rng)?
        .into_iter()
        .map(|i| &dataset.items[i])
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossMode {
    Full,
    ConveyOnly,
    DistinguishOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub state_dim: usize,
    pub signal_dim: usize,
    pub action_dim: usize,
    pub theta_dim: usize,
    pub hidden: Vec<usize>,
    /// Rollout horizon `k` of the distinguish loss.
    pub horizon: usize,
    pub batch_size: usize,
    /// Geometric recency ratio `r` in `(0, 1]`.
    pub recency: f64,
    pub learning_rate: f64,
    pub loss_mode: LossMode,
    /// States are divided by this before entering any network.
    pub state_scale: f64,
    /// Hidden information is divided by this on input and the decoder output multiplied by it.
    pub theta_scale: f64,
    pub seed: u64,
}

impl LearnerConfig {
    pub fn new(state_dim: usize, signal_dim: usize, theta_dim: usize) -> Self {
        Self {
            state_dim,
            signal_dim,
            action_dim: state_dim,
            theta_dim,
            hidden: vec![64, 64],
            horizon: 5,
            batch_size: 32,
            recency: 0.995,
            learning_rate: 1e-3,
            loss_mode: LossMode::Full,
            state_scale: 1.0,
            theta_scale: 1.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [self.state_dim, self.signal_dim, self.action_dim, self.theta_dim];
        if dims.contains(&0) || self.hidden.contains(&0) {
            return Err(Error::Config("learner dimensions must be positive".into()));
        }
        if self.horizon == 0 || self.batch_size == 0 {
            return Err(Error::Config("horizon and batch size must be at least 1".into()));
        }
        if !(self.recency > 0.0 && self.recency <= 1.0) {
            return Err(Error::Config("recency ratio must lie in (0, 1]".into()));
        }
        if !(self.state_scale > 0.0 && self.theta_scale > 0.0) {
            return Err(Error::Config("input scales must be positive".into()));
        }
        Ok(())
    }

    fn sizes(&self, input: usize, output: usize) -> Vec<usize> {
        std::iter::once(input)
            .chain(self.hidden.iter().copied())
            .chain(std::iter::once(output))
            .collect()
    }

    fn decoder_input_dim(&self) -> usize {
        self.horizon * (self.state_dim + self.action_dim)
    }
}

/// `k` imagined `(state, action)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutSequence {
    pub pairs: Vec<(Vec<f64>, Vec<f64>)>,
}

impl RolloutSequence {
    pub fn flatten(&self) -> Vec<f64> {
        self.pairs
            .iter()
            .flat_map(|(s, a)| s.iter().chain(a).copied())
            .collect()
    }
}

/// Losses measured on a batch before the update was applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub convey: f64,
    pub distinguish: f64,
    /// The optimized objective; depends on the loss mode.
    pub total: f64,
    /// True when a non-finite loss or gradient prevented the update.
    pub skipped: bool,
}

/// Gradients for the three networks, in the order human model, interface, decoder.
#[derive(Debug, Clone)]
pub struct LearnerGradients {
    pub human_model: Gradients,
    pub interface: Gradients,
    pub decoder: Gradients,
}

#[derive(Debug, Clone, Copy)]
struct Terms {
    convey: bool,
    distinguish: bool,
}

#[derive(Debug, Clone)]
pub struct LimitLearner {
    config: LearnerConfig,
    human_model: DenseNet,
    interface: DenseNet,
    decoder: DenseNet,
    opt_human: Adam,
    opt_interface: Adam,
    opt_decoder: Adam,
    rng: ChaCha8Rng,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LearnerCheckpoint {
    pub config: LearnerConfig,
    pub human_model: NetCheckpoint,
    pub interface: NetCheckpoint,
    pub decoder: NetCheckpoint,
}

struct Step {
    h_in_tape: Tape,
    r_tape: Tape,
    state: Vec<f64>,
    action: Vec<f64>,
}

impl LimitLearner {
    pub fn new(config: LearnerConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let human_model = DenseNet::uniform(
            &config.sizes(config.state_dim + config.signal_dim, config.action_dim),
            Activation::Tanh,
            Activation::Identity,
            &mut rng,
        )?;
        let interface = DenseNet::uniform(
            &config.sizes(config.state_dim + config.theta_dim, config.signal_dim),
            Activation::Tanh,
            Activation::Tanh,
            &mut rng,
        )?;
        let decoder = DenseNet::uniform(
            &config.sizes(config.decoder_input_dim(), config.theta_dim),
            Activation::Tanh,
            Activation::Identity,
            &mut rng,
        )?;
        Self::from_parts(config, human_model, interface, decoder)
    }

    /// Assembles a learner from explicit networks. The batch-sampling stream is
    /// seeded from `config.seed`.
    pub fn from_parts(
        config: LearnerConfig,
        human_model: DenseNet,
        interface: DenseNet,
        decoder: DenseNet,
    ) -> Result<Self> {
        config.validate()?;
        let io = [
            (&human_model, config.state_dim + config.signal_dim, config.action_dim),
            (&interface, config.state_dim + config.theta_dim, config.signal_dim),
            (&decoder, config.decoder_input_dim(), config.theta_dim),
        ];
        for (net, input, output) in io {
            check_len("network input", input, net.input_dim())?;
            check_len("network output", output, net.output_dim())?;
        }
        if interface.layers().last().map(|l| l.activation()) != Some(Activation::Tanh) {
            return Err(Error::Config("interface policy needs a tanh output layer".into()));
        }
        let lr = config.learning_rate;
        Ok(Self {
            opt_human: Adam::new(&human_model, lr),
            opt_interface: Adam::new(&interface, lr),
            opt_decoder: Adam::new(&decoder, lr),
            rng: ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed_ba7c),
            config,
            human_model,
            interface,
            decoder,
        })
    }

    pub fn config(&self) -> &LearnerConfig {
        &self.config
    }

    pub fn human_model(&self) -> &DenseNet {
        &self.human_model
    }

    pub fn interface(&self) -> &DenseNet {
        &self.interface
    }

    pub fn decoder(&self) -> &DenseNet {
        &self.decoder
    }

    /// Mutable access to the three networks (human model, interface, decoder).
    /// Optimizer moments are kept; shapes must not be changed.
    pub fn networks_mut(&mut self) -> (&mut DenseNet, &mut DenseNet, &mut DenseNet) {
        (&mut self.human_model, &mut self.interface, &mut self.decoder)
    }

    pub fn set_loss_mode(&mut self, mode: LossMode) {
        self.config.loss_mode = mode;
    }

    pub fn set_batch_size(&mut self, batch_size: usize) {
        self.config.batch_size = batch_size.max(1);
    }

    fn interface_input(&self, state: &[f64], theta: &[f64]) -> Vec<f64> {
        let (ss, ts) = (self.config.state_scale, self.config.theta_scale);
        state
            .iter()
            .map(|s| s / ss)
            .chain(theta.iter().map(|t| t / ts))
            .collect()
    }

    fn human_input(&self, state: &[f64], signal: &[f64]) -> Vec<f64> {
        let ss = self.config.state_scale;
        state.iter().map(|s| s / ss).chain(signal.iter().copied()).collect()
    }

    fn check_state_theta(&self, state: &[f64], theta: &[f64]) -> Result<()> {
        check_len("state", self.config.state_dim, state.len())?;
        check_len("theta", self.config.theta_dim, theta.len())
    }

    /// The signal shown to the human, `R(s, theta)`.
    pub fn signal(&self, state: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
        self.check_state_theta(state, theta)?;
        self.interface.predict(&self.interface_input(state, theta))
    }

    /// The human model's prediction `H(s, x)`.
    pub fn predict_action(&self, state: &[f64], signal: &[f64]) -> Result<Vec<f64>> {
        check_len("state", self.config.state_dim, state.len())?;
        check_len("signal", self.config.signal_dim, signal.len())?;
        self.human_model.predict(&self.human_input(state, signal))
    }

    /// Decoder estimate of `theta` from a rollout.
    pub fn decode(&self, rollout: &RolloutSequence) -> Result<Vec<f64>> {
        let out = self.decoder.predict(&self.decoder_input(rollout))?;
        Ok(out.iter().map(|v| v * self.config.theta_scale).collect())
    }

    fn decoder_input(&self, rollout: &RolloutSequence) -> Vec<f64> {
        let ss = self.config.state_scale;
        rollout
            .pairs
            .iter()
            .flat_map(|(s, a)| s.iter().map(move |v| v / ss).chain(a.iter().copied()))
            .collect()
    }

    /// Imagined `k`-step interaction from `state` under the composed models.
    pub fn rollout<D: Dynamics + ?Sized>(
        &self,
        state: &[f64],
        theta: &[f64],
        dynamics: &D,
        k: usize,
    ) -> Result<RolloutSequence> {
        self.check_state_theta(state, theta)?;
        if k == 0 {
            return Err(Error::Config("rollout horizon must be at least 1".into()));
        }
        let mut pairs = Vec::with_capacity(k);
        let mut s = state.to_vec();
        for i in 0..k {
            let x = self.signal(&s, theta)?;
            let a = self.predict_action(&s, &x)?;
            let next = if i + 1 < k { Some(dynamics.step(&s, &a)) } else { None };
            pairs.push((s, a));
            match next {
                Some(n) => s = n,
                None => break,
            }
        }
        Ok(RolloutSequence { pairs })
    }

    fn check_batch(&self, batch: &[&Experience]) -> Result<()> {
        if batch.is_empty() {
            return Err(Error::Config("empty batch".into()));
        }
        for e in batch {
            self.check_state_theta(&e.state, &e.theta)?;
            check_len("action", self.config.action_dim, e.action.len())?;
        }
        Ok(())
    }

    /// `sum ||a - H(s, R(s, theta))||^2` over the batch.
    pub fn loss_convey(&self, batch: &[&Experience]) -> Result<f64> {
        self.check_batch(batch)?;
        batch
            .iter()
            .map(|e| {
                let x = self.signal(&e.state, &e.theta)?;
                let p = self.predict_action(&e.state, &x)?;
                Ok(crate::env::squared_distance(&e.action, &p))
            })
            .sum()
    }

    /// `sum ||theta - D(tau(s, theta))||^2` over the batch.
    pub fn loss_distinguish<D: Dynamics + ?Sized>(
        &self,
        batch: &[&Experience],
        dynamics: &D,
    ) -> Result<f64> {
        self.check_batch(batch)?;
        batch
            .iter()
            .map(|e| {
                let tau = self.rollout(&e.state, &e.theta, dynamics, self.config.horizon)?;
                let est = self.decode(&tau)?;
                Ok(crate::env::squared_distance(&e.theta, &est))
            })
            .sum()
    }

    /// Losses and the gradient of the mode's objective.
    pub fn gradients<D: Dynamics + ?Sized>(
        &self,
        batch: &[&Experience],
        dynamics: &D,
    ) -> Result<(LossReport, LearnerGradients)> {
        self.check_batch(batch)?;
        let terms = match self.config.loss_mode {
            LossMode::Full => Terms {
                convey: true,
                distinguish: true,
            },
            LossMode::ConveyOnly => Terms {
                convey: true,
                distinguish: false,
            },
            LossMode::DistinguishOnly => Terms {
                convey: false,
                distinguish: true,
            },
        };
        let mut grads = LearnerGradients {
            human_model: Gradients::zeros_like(&self.human_model),
            interface: Gradients::zeros_like(&self.interface),
            decoder: Gradients::zeros_like(&self.decoder),
        };
        let mut convey = 0.0;
        let mut distinguish = 0.0;
        for e in batch {
            convey += self.convey_sample(e, terms.convey.then_some(&mut grads))?;
            distinguish += self.distinguish_sample(e, dynamics, terms.distinguish.then_some(&mut grads))?;
        }
        let total = match self.config.loss_mode {
            LossMode::Full => convey + distinguish,
            LossMode::ConveyOnly => convey,
            LossMode::DistinguishOnly => distinguish,
        };
        Ok((
            LossReport {
                convey,
                distinguish,
                total,
                skipped: false,
            },
            grads,
        ))
    }

    fn convey_sample(&self, e: &Experience, grads: Option<&mut LearnerGradients>) -> Result<f64> {
        let (x, r_tape) = self.interface.forward(&self.interface_input(&e.state, &e.theta))?;
        let (p, h_tape) = self.human_model.forward(&self.human_input(&e.state, &x))?;
        let resid: Vec<f64> = p.iter().zip(&e.action).map(|(p, a)| p - a).collect();
        let loss = resid.iter().map(|r| r * r).sum();
        if let Some(g) = grads {
            let upstream: Vec<f64> = resid.iter().map(|r| 2.0 * r).collect();
            let d_h_in = self
                .human_model
                .backward_accumulate(&h_tape, &upstream, &mut g.human_model)?;
            let d_x = &d_h_in[self.config.state_dim..];
            self.interface
                .backward_accumulate(&r_tape, d_x, &mut g.interface)?;
        }
        Ok(loss)
    }

    fn distinguish_sample<D: Dynamics + ?Sized>(
        &self,
        e: &Experience,
        dynamics: &D,
        grads: Option<&mut LearnerGradients>,
    ) -> Result<f64> {
        let cfg = &self.config;
        let (sd, ss, ts) = (cfg.state_dim, cfg.state_scale, cfg.theta_scale);
        let mut steps: Vec<Step> = Vec::with_capacity(cfg.horizon);
        let mut s = e.state.clone();
        for i in 0..cfg.horizon {
            let (x, r_tape) = self.interface.forward(&self.interface_input(&s, &e.theta))?;
            let (a, h_tape) = self.human_model.forward(&self.human_input(&s, &x))?;
            let next = (i + 1 < cfg.horizon).then(|| dynamics.step(&s, &a));
            steps.push(Step {
                h_in_tape: h_tape,
                r_tape,
                state: s,
                action: a,
            });
            match next {
                Some(n) => s = n,
                None => break,
            }
        }
        let dec_in: Vec<f64> = steps
            .iter()
            .flat_map(|st| st.state.iter().map(|v| v / ss).chain(st.action.iter().copied()))
            .collect();
        let (out, d_tape) = self.decoder.forward(&dec_in)?;
        let resid: Vec<f64> = out
            .iter()
            .zip(&e.theta)
            .map(|(o, t)| o * ts - t)
            .collect();
        let loss = resid.iter().map(|r| r * r).sum();
        let Some(g) = grads else {
            return Ok(loss);
        };
        let upstream: Vec<f64> = resid.iter().map(|r| 2.0 * r * ts).collect();
        let d_dec_in = self
            .decoder
            .backward_accumulate(&d_tape, &upstream, &mut g.decoder)?;
        let pair = sd + cfg.action_dim;
        // Gradient with respect to the state that follows the current step.
        let mut g_next: Option<Vec<f64>> = None;
        for (i, st) in steps.iter().enumerate().rev() {
            let slot = &d_dec_in[i * pair..(i + 1) * pair];
            let mut g_s: Vec<f64> = slot[..sd].iter().map(|v| v / ss).collect();
            let mut g_a: Vec<f64> = slot[sd..].to_vec();
            if let Some(gn) = &g_next {
                let (ds, da) = dynamics.vjp(&st.state, &st.action, gn);
                g_s.iter_mut().zip(&ds).for_each(|(x, d)| *x += d);
                g_a.iter_mut().zip(&da).for_each(|(x, d)| *x += d);
            }
            let d_h_in = self
                .human_model
                .backward_accumulate(&st.h_in_tape, &g_a, &mut g.human_model)?;
            g_s.iter_mut()
                .zip(&d_h_in[..sd])
                .for_each(|(x, d)| *x += d / ss);
            let d_r_in = self
                .interface
                .backward_accumulate(&st.r_tape, &d_h_in[sd..], &mut g.interface)?;
            g_s.iter_mut()
                .zip(&d_r_in[..sd])
                .for_each(|(x, d)| *x += d / ss);
            g_next = Some(g_s);
        }
        Ok(loss)
    }

    /// One Adam update on a recency-weighted batch. Returns `None` while the
    /// dataset holds fewer experiences than the batch size.
    pub fn train_step<D: Dynamics + ?Sized>(
        &mut self,
        dataset: &Dataset,
        dynamics: &D,
    ) -> Result<Option<LossReport>> {
        if dataset.len() < self.config.batch_size {
            return Ok(None);
        }
        let idx = recency_sample_indices(
            dataset.len(),
            self.config.batch_size,
            self.config.recency,
            &mut self.rng,
        )?;
        let batch: Vec<&Experience> = idx.iter().map(|&i| &dataset.items()[i]).collect();
        let (mut report, grads) = self.gradients(&batch, dynamics)?;
        if !report.total.is_finite() {
            report.skipped = true;
            return Ok(Some(report));
        }
        let all_finite = grads.human_model.is_finite()
            && grads.interface.is_finite()
            && grads.decoder.is_finite();
        if !all_finite {
            report.skipped = true;
            return Ok(Some(report));
        }
        let outcomes = [
            self.opt_human.step(&mut self.human_model, &grads.human_model)?,
            self.opt_interface.step(&mut self.interface, &grads.interface)?,
            self.opt_decoder.step(&mut self.decoder, &grads.decoder)?,
        ];
        report.skipped = outcomes.contains(&StepOutcome::SkippedNonFinite);
        Ok(Some(report))
    }

    pub fn checkpoint(&self) -> LearnerCheckpoint {
        LearnerCheckpoint {
            config: self.config.clone(),
            human_model: self.human_model.to_checkpoint(),
            interface: self.interface.to_checkpoint(),
            decoder: self.decoder.to_checkpoint(),
        }
    }

    /// Restores networks and hyperparameters; optimizer moments start fresh.
    pub fn from_checkpoint(ckpt: &LearnerCheckpoint) -> Result<Self> {
        Self::from_parts(
            ckpt.config.clone(),
            DenseNet::from_checkpoint(&ckpt.human_model)?,
            DenseNet::from_checkpoint(&ckpt.interface)?,
            DenseNet::from_checkpoint(&ckpt.decoder)?,
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.checkpoint())?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Self::from_checkpoint(&serde_json::from_str(json)?)
    }
}
