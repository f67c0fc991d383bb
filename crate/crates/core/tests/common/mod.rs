#![allow(dead_code)]

use limit_core::env::Additive;
use limit_core::info::TabularPolicy;
use limit_core::learner::{Experience, LearnerConfig, LimitLearner, LossMode};
use limit_core::net::DenseNet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FD_STEP: f64 = 1e-5;

/// Step for the five-point stencil used on the learner losses.
pub const LOSS_FD_STEP: f64 = 1e-3;

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Two-point central difference of `f` at zero offset with step [`FD_STEP`].
pub fn central_difference(mut f: impl FnMut(f64) -> f64) -> f64 {
    (f(FD_STEP) - f(-FD_STEP)) / (2.0 * FD_STEP)
}

/// Five-point central difference of `f` at zero offset with step
/// [`LOSS_FD_STEP`]; truncation error is fourth order in the step.
pub fn five_point_difference(mut f: impl FnMut(f64) -> f64) -> f64 {
    let h = LOSS_FD_STEP;
    (8.0 * (f(h) - f(-h)) - (f(2.0 * h) - f(-2.0 * h))) / (12.0 * h)
}

/// Numerical gradient of `loss` along every parameter of `net`, using
/// `difference` for each coordinate.
pub fn numeric_gradient_with(
    net: &DenseNet,
    difference: fn(&mut dyn FnMut(f64) -> f64) -> f64,
    mut loss: impl FnMut(&DenseNet) -> f64,
) -> Vec<f64> {
    let mut probe = net.clone();
    (0..net.parameter_count())
        .map(|i| {
            let p = *probe.parameter_mut(i).unwrap();
            let d = difference(&mut |offset| {
                *probe.parameter_mut(i).unwrap() = p + offset;
                loss(&probe)
            });
            *probe.parameter_mut(i).unwrap() = p;
            d
        })
        .collect()
}

/// Two-point central difference of `loss` along every parameter of `net`.
pub fn numeric_gradient(net: &DenseNet, loss: impl FnMut(&DenseNet) -> f64) -> Vec<f64> {
    numeric_gradient_with(net, |f| central_difference(f), loss)
}

/// A dims-1/1/1/1, horizon-2 learner with small hidden layers and
/// non-unit input scales, plus a random batch of two experiences.
pub fn tiny_learner(seed: u64) -> (LimitLearner, Vec<Experience>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cfg = LearnerConfig::new(1, 1, 1);
    cfg.hidden = vec![4, 3];
    cfg.horizon = 2;
    cfg.batch_size = 2;
    cfg.state_scale = 2.0;
    cfg.theta_scale = 3.0;
    cfg.seed = seed;
    let mut learner = LimitLearner::new(cfg).unwrap();
    let (h, r, d) = learner.networks_mut();
    for net in [h, r, d] {
        for i in 0..net.parameter_count() {
            *net.parameter_mut(i).unwrap() = rng.gen_range(-1.0..1.0);
        }
    }
    let batch = (0..2)
        .map(|t| Experience {
            state: vec![rng.gen_range(-3.0..3.0)],
            signal: vec![rng.gen_range(-1.0..1.0)],
            action: vec![rng.gen_range(-1.0..1.0)],
            theta: vec![rng.gen_range(-5.0..5.0)],
            interaction: 0,
            timestep: t,
        })
        .collect();
    (learner, batch)
}

fn loss_for(learner: &LimitLearner, batch: &[&Experience], mode: LossMode) -> f64 {
    let c = || learner.loss_convey(batch).unwrap();
    let d = || learner.loss_distinguish(batch, &Additive).unwrap();
    match mode {
        LossMode::Full => c() + d(),
        LossMode::ConveyOnly => c(),
        LossMode::DistinguishOnly => d(),
    }
}

/// Largest relative error between analytic and finite-difference gradients
/// over every parameter of all three networks, for the given objective.
pub fn learner_gradient_error(seed: u64, mode: LossMode) -> f64 {
    let (mut learner, batch) = tiny_learner(seed);
    learner.set_loss_mode(mode);
    let refs: Vec<&Experience> = batch.iter().collect();
    let (_, grads) = learner.gradients(&refs, &Additive).unwrap();
    let analytic = [grads.human_model, grads.interface, grads.decoder];
    let mut worst = 0.0_f64;
    for (which, g) in analytic.iter().enumerate() {
        let net = match which {
            0 => learner.human_model().clone(),
            1 => learner.interface().clone(),
            _ => learner.decoder().clone(),
        };
        let numeric = numeric_gradient_with(&net, |f| five_point_difference(f), |probe| {
            let mut l = learner.clone();
            let (h, r, d) = l.networks_mut();
            match which {
                0 => *h = probe.clone(),
                1 => *r = probe.clone(),
                _ => *d = probe.clone(),
            }
            loss_for(&l, &refs, mode)
        });
        for (a, n) in g.iter().zip(numeric) {
            worst = worst.max(relative_error(a, n));
        }
    }
    worst
}

fn random_distribution(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..n)
        .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen::<f64>() })
        .collect();
    if p.iter().all(|v| *v == 0.0) {
        p[rng.gen_range(0..n)] = 1.0;
    }
    let sum: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= sum);
    p
}

/// A valid random table with sizes drawn from `1..=4` per axis; about one
/// entry in five is an exact zero.
pub fn random_policy(seed: u64) -> TabularPolicy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ns = rng.gen_range(1..=4);
    let nt = rng.gen_range(1..=4);
    let nx = rng.gen_range(1..=4);
    let na = rng.gen_range(1..=4);
    random_policy_with(&mut rng, ns, nt, nx, na)
}

pub fn random_policy_with(rng: &mut ChaCha8Rng, ns: usize, nt: usize, nx: usize, na: usize) -> TabularPolicy {
    TabularPolicy {
        human: (0..ns)
            .map(|_| (0..nx).map(|_| random_distribution(rng, na)).collect())
            .collect(),
        interface: (0..ns)
            .map(|_| (0..nt).map(|_| random_distribution(rng, nx)).collect())
            .collect(),
        state_prior: random_distribution(rng, ns),
        theta_prior: random_distribution(rng, nt),
    }
}

/// Pairs a frozen linear interface `x = 0.1 R(beta) theta` with a Rotate human
/// that starts at a wrong angle, and returns the number of adaptation rounds
/// until the human's angle is within one grid cell of `-beta`.
pub fn coadaptation_rounds(seed: u64, max_rounds: usize) -> Option<usize> {
    use limit_core::baselines::LinearInterface;
    use limit_core::env::EnvConfig;
    use limit_core::humans::{angle_distance, grid_angle, HumanConfig, HumanKind, Interpretation, SimulatedHuman};
    use limit_core::runner::{run_interaction, NaiveInterface};

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = HumanConfig::default();
    let cells = config.angle_grid;
    let beta = grid_angle(rng.gen_range(0..cells), cells);
    let target = (-beta).rem_euclid(2.0 * std::f64::consts::PI);
    let mut start = grid_angle(rng.gen_range(0..cells), cells);
    while angle_distance(start, target) <= grid_angle(1, cells) {
        start = grid_angle(rng.gen_range(0..cells), cells);
    }
    let interp = Interpretation { angle: start, ..Interpretation::IDENTITY };
    let mut human = SimulatedHuman::new(HumanKind::Rotate, 2, 2, interp, config).unwrap();
    let (sin, cos) = beta.sin_cos();
    let weights = vec![0.0, 0.0, 0.1 * cos, -0.1 * sin, 0.0, 0.0, 0.1 * sin, 0.1 * cos];
    let mut iface = NaiveInterface::new(LinearInterface::new(2, 4, weights).unwrap());
    let env = EnvConfig::preset("sim2d").unwrap();
    let mut history = Vec::new();
    let mut env_rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa5a5);
    let mut human_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5a5a);
    for round in 1..=max_rounds {
        run_interaction(&env, &mut human, &mut iface, &mut history, round - 1, &mut env_rng, &mut human_rng).unwrap();
        if angle_distance(human.interpretation().angle, target) <= grid_angle(1, cells) + 1e-12 {
            return Some(round);
        }
    }
    None
}
