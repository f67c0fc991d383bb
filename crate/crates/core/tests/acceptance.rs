//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! The process exits with status 0 so that the workspace test run reports the
//! lines without aborting; set `LIMIT_ACCEPTANCE_STRICT=1` to exit with status
//! 1 when any criterion fails.

mod common;

use std::time::{Duration, Instant};

use limit_core::env::PRESETS;
use limit_core::humans::HumanKind;
use limit_core::info::{
    action_entropy_given_state, cond_mutual_info_direct, cond_mutual_info_factored, theta_entropy,
    TabularPolicy,
};
use limit_core::learner::{Experience, LossMode};
use limit_core::runner::{build_interface, run_experiment, write_rows, Algorithm, ExperimentConfig, RunRow};
use limit_core::stats::aggregate_stats;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEEDS: u64 = 20;
const WINDOW: usize = 5;
const ALPHA: f64 = 0.05;

type Criterion = (&'static str, Duration, Box<dyn FnOnce() -> Outcome>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(name: &str, elapsed: Duration, outcome: Outcome, failures: &mut usize) {
    let tag = if outcome.pass { "PASS" } else { "FAIL" };
    if !outcome.pass {
        *failures += 1;
    }
    println!("{tag} {name} ({:.1} s): {}", elapsed.as_secs_f64(), outcome.detail);
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> (Duration, Outcome) {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    if elapsed > limit {
        out.pass = false;
        out.detail.push_str(&format!("; exceeded {} s", limit.as_secs()));
    }
    (elapsed, out)
}

fn gradient_fidelity() -> Outcome {
    let mut worst = 0.0_f64;
    for seed in 0..100 {
        for mode in [LossMode::ConveyOnly, LossMode::DistinguishOnly, LossMode::Full] {
            worst = worst.max(common::learner_gradient_error(seed, mode));
        }
    }
    Outcome {
        pass: worst <= 1e-4,
        detail: format!("worst relative error {worst:.2e} over 100 seeds x 3 losses"),
    }
}

fn mi_identity() -> Outcome {
    let mut worst_gap = 0.0_f64;
    let mut violations = 0;
    for seed in 0..100 {
        let pol = common::random_policy(seed);
        let d = cond_mutual_info_direct(&pol).unwrap();
        let f = cond_mutual_info_factored(&pol).unwrap();
        worst_gap = worst_gap.max((d - f).abs());
        let h_theta = theta_entropy(&pol).unwrap();
        let h_a = action_entropy_given_state(&pol).unwrap();
        if d < 0.0 || d > h_theta + 1e-12 || d > h_a + 1e-12 {
            violations += 1;
        }
    }
    Outcome {
        pass: worst_gap <= 1e-10 && violations == 0,
        detail: format!("max |direct - factored| {worst_gap:.2e}, bound violations {violations}"),
    }
}

fn one_to_one_maximum() -> Outcome {
    let n = 8;
    let perm = |shift: usize| -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| (0..n).map(|j| if (i + shift) % n == j { 1.0 } else { 0.0 }).collect())
            .collect()
    };
    let pol = TabularPolicy {
        human: vec![perm(5)],
        interface: vec![perm(2)],
        state_prior: vec![1.0],
        theta_prior: vec![1.0 / n as f64; n],
    };
    let i = cond_mutual_info_direct(&pol).unwrap();
    let gap = (i - (n as f64).ln()).abs();
    Outcome {
        pass: gap <= 1e-10,
        detail: format!("I = {i:.12}, |I - ln 8| = {gap:.2e}"),
    }
}

fn run(preset: &str, algorithm: Algorithm) -> Vec<RunRow> {
    let cfg = ExperimentConfig::new(preset, algorithm, HumanKind::Align, (0..SEEDS).collect()).unwrap();
    run_experiment(&cfg).unwrap().rows
}

/// Runs LIMIT and `others` on `preset` and checks that LIMIT's final-window
/// error is lower than each algorithm in `gated` at the significance level.
fn simulation(preset: &str, others: &[Algorithm], gated: &[Algorithm]) -> Outcome {
    let mut rows = run(preset, Algorithm::Limit);
    for &algo in others {
        rows.extend(run(preset, algo));
    }
    let stats = aggregate_stats(&rows, WINDOW).unwrap();
    let mean = |a| stats.summary(a).map(|s| s.mean).unwrap_or(f64::NAN);
    let mut pass = true;
    let mut parts = vec![format!("limit {:.3}", mean(Algorithm::Limit))];
    for &algo in others {
        let c = stats.comparison(Algorithm::Limit, algo).unwrap();
        let better = c.mean_difference < 0.0 && c.p < ALPHA;
        let gate = gated.contains(&algo);
        if gate && !better {
            pass = false;
        }
        parts.push(format!(
            "{algo} {:.3} (diff {:+.3}, p {:.3}{})",
            mean(algo),
            c.mean_difference,
            c.p,
            if gate { "" } else { ", reported only" }
        ));
    }
    Outcome {
        pass,
        detail: parts.join(", "),
    }
}

fn mismatch_robustness() -> Outcome {
    let over = simulation("over4x2", &[Algorithm::Naive], &[Algorithm::Naive]);
    let under = simulation("under2x4", &[Algorithm::Naive], &[Algorithm::Naive]);
    Outcome {
        pass: over.pass && under.pass,
        detail: format!("over4x2: {}; under2x4: {}", over.detail, under.detail),
    }
}

fn information_firewall() -> Outcome {
    // Exhaustive pattern over everything a learner trains on: any added field
    // (a reward, for instance) stops this from compiling.
    let Experience {
        state: _,
        signal: _,
        action: _,
        theta: _,
        interaction: _,
        timestep: _,
    } = Experience {
        state: vec![],
        signal: vec![],
        action: vec![],
        theta: vec![],
        interaction: 0,
        timestep: 0,
    };
    let mut leaks = Vec::new();
    for preset in PRESETS {
        for algo in Algorithm::ALL {
            let cfg = ExperimentConfig::new(preset, algo, HumanKind::Align, vec![0]).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let mut iface = build_interface(&cfg, 0, &mut rng).unwrap();
            let has_channel = iface.reward_channel().is_some();
            if has_channel != (algo == Algorithm::Bayes) {
                leaks.push(format!("{preset}/{algo}"));
            }
        }
    }
    Outcome {
        pass: leaks.is_empty(),
        detail: if leaks.is_empty() {
            "only bayes exposes a reward channel on every preset".into()
        } else {
            format!("unexpected reward channels: {}", leaks.join(", "))
        },
    }
}

fn csv_bytes(cfg: &ExperimentConfig) -> Vec<u8> {
    let rows = run_experiment(cfg).unwrap().rows;
    let mut out = Vec::new();
    write_rows(&rows, &mut out).unwrap();
    out
}

fn determinism() -> Outcome {
    let mut differing = Vec::new();
    let mut checked = 0;
    for preset in PRESETS {
        for algo in Algorithm::ALL {
            let mut cfg = ExperimentConfig::new(preset, algo, HumanKind::Align, vec![11]).unwrap();
            cfg.env.interactions = 8;
            if csv_bytes(&cfg) != csv_bytes(&cfg) {
                differing.push(format!("{preset}/{algo}"));
            }
            checked += 1;
        }
    }
    let full = ExperimentConfig::new("sim1d", Algorithm::Limit, HumanKind::Rotate, vec![0, 1]).unwrap();
    if csv_bytes(&full) != csv_bytes(&full) {
        differing.push("sim1d/limit full length".into());
    }
    checked += 1;
    Outcome {
        pass: differing.is_empty(),
        detail: format!("{checked} configurations rerun, {} differed {:?}", differing.len(), differing),
    }
}

fn coadaptation() -> Outcome {
    let rounds: Vec<Option<usize>> = (0..10).map(|s| common::coadaptation_rounds(s, 3)).collect();
    let converged = rounds.iter().filter(|r| r.is_some()).count();
    Outcome {
        pass: converged >= 9,
        detail: format!("converged within 3 rounds on {converged}/10 seeds {rounds:?}"),
    }
}

fn main() {
    let mut failures = 0;
    let secs = Duration::from_secs;
    let criteria: Vec<Criterion> = vec![
        ("gradient fidelity", secs(10), Box::new(gradient_fidelity)),
        ("MI-oracle identity", secs(10), Box::new(mi_identity)),
        ("one-to-one maximum", secs(10), Box::new(one_to_one_maximum)),
        (
            "1D simulation",
            secs(5 * 60),
            Box::new(|| simulation("sim1d", &[Algorithm::Naive], &[Algorithm::Naive])),
        ),
        (
            "2D simulation",
            secs(20 * 60),
            Box::new(|| {
                simulation(
                    "sim2d",
                    &[Algorithm::Naive, Algorithm::Convey, Algorithm::Bayes],
                    &[Algorithm::Naive, Algorithm::Convey],
                )
            }),
        ),
        ("mismatch robustness", secs(30 * 60), Box::new(mismatch_robustness)),
        ("information firewall", secs(60), Box::new(information_firewall)),
        ("determinism", secs(5 * 60), Box::new(determinism)),
        ("co-adaptation sanity", secs(60), Box::new(coadaptation)),
    ];
    for (name, limit, check) in criteria {
        let (elapsed, outcome) = timed(limit, check);
        report(name, elapsed, outcome, &mut failures);
    }
    println!("{failures} criteria failed");
    let strict = std::env::var("LIMIT_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && failures > 0 {
        std::process::exit(1);
    }
}
