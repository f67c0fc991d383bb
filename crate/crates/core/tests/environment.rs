use limit_core::env::{metrics, reward, EnvConfig, InteractionLog, TimeStep};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_log(rng: &mut ChaCha8Rng, dim: usize, steps: usize) -> InteractionLog {
    let theta: Vec<f64> = (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect();
    let mut log = InteractionLog::new(theta, vec![0.0; dim]);
    for _ in 0..steps {
        let state = log.final_state.clone();
        let action: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
        log.final_state = state.iter().zip(&action).map(|(s, a)| s + a).collect();
        log.steps.push(TimeStep {
            state,
            signal: vec![0.0; dim],
            action,
        });
        log.duration += 1.0;
    }
    log
}

#[test]
fn one_dimensional_prior_samples_are_uniform_on_the_box() {
    let env = EnvConfig::preset("sim1d").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let n = 100_000;
    let samples: Vec<f64> = (0..n).map(|_| env.sample_theta(&mut rng)[0]).collect();
    let mean = samples.iter().sum::<f64>() / n as f64;
    // Uniform on [-10, 10] has variance 400 / 12.
    let sigma = (400.0 / 12.0 / n as f64).sqrt();
    assert!(mean.abs() <= 3.0 * sigma, "mean {mean}");
    assert!(samples.iter().all(|v| (-10.0..=10.0).contains(v)));
}

#[test]
fn under_actuated_theta_holds_two_positions_in_the_box() {
    let env = EnvConfig::preset("under2x4").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let theta = env.sample_theta(&mut rng);
        assert_eq!(theta.len(), 4);
        assert!(theta.iter().all(|v| (-10.0..=10.0).contains(v)));
        let goal = env.goal(&theta);
        assert_eq!(goal, vec![(theta[0] + theta[2]) / 2.0, (theta[1] + theta[3]) / 2.0]);
    }
}

#[test]
fn preset_shapes() {
    let dims = |name: &str| {
        let e = EnvConfig::preset(name).unwrap();
        (e.state_dim, e.signal_dim, e.theta_dim, e.horizon, e.interactions)
    };
    assert_eq!(dims("sim1d"), (1, 1, 1, 10, 40));
    assert_eq!(dims("sim2d"), (2, 2, 2, 10, 100));
    assert_eq!(dims("over4x2").1, 4);
    assert_eq!(dims("under2x4").2, 4);
    assert!(EnvConfig::preset("sim3d").is_err());
}

#[test]
fn straight_walk_to_theta() {
    let theta = 7.5;
    let mut log = InteractionLog::new(vec![theta], vec![0.0]);
    for _ in 0..10 {
        let s = log.final_state[0];
        log.steps.push(TimeStep {
            state: vec![s],
            signal: vec![0.0],
            action: vec![theta / 10.0],
        });
        log.final_state = vec![s + theta / 10.0];
        log.duration += 1.0;
    }
    let m = metrics(&log);
    assert!(m.error < 1e-12);
    assert!((m.distance - theta).abs() < 1e-12);
    assert_eq!(m.time, 10.0);
}

proptest! {
    #[test]
    fn metrics_match_recomputation(seed in any::<u64>(), dim in 1usize..=2, steps in 1usize..=12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let log = random_log(&mut rng, dim, steps);
        let m = metrics(&log);
        let gap: f64 = log.final_state.iter().zip(&log.theta).map(|(s, t)| (s - t).powi(2)).sum::<f64>().sqrt();
        let path: f64 = log.steps.iter().map(|s| s.action.iter().map(|a| a * a).sum::<f64>().sqrt()).sum();
        prop_assert!((m.error - gap).abs() <= 1e-12);
        prop_assert!((m.distance - path).abs() <= 1e-9);
        let displacement: f64 = log.final_state.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(m.distance + 1e-9 >= displacement);
        prop_assert_eq!(m.time, steps as f64);
        prop_assert!((reward(&log) + gap * gap).abs() <= 1e-9);
        prop_assert!((reward(&log) + m.error * m.error).abs() <= 1e-9 * (1.0 + gap * gap));
    }
}
