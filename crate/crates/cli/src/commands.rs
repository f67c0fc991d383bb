use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use limit_core::humans::HumanKind;
use limit_core::learner::LimitLearner;
use limit_core::playground;
use limit_core::runner::{self, Algorithm, ExperimentConfig, RunRow};
use limit_core::stats::{aggregate_stats, StatsSummary};

/// Options of `limit run` that may override a config file.
#[derive(Debug, Default, Clone)]
pub struct RunOptions {
    pub config: Option<PathBuf>,
    pub preset: Option<String>,
    pub algorithms: Vec<Algorithm>,
    pub human: Option<HumanKind>,
    pub seeds: Option<Vec<u64>>,
    pub learning_rate: Option<f64>,
    pub out: Option<PathBuf>,
}

/// Resolves the experiment configs: one per algorithm.
pub fn run_configs(opts: &RunOptions) -> anyhow::Result<Vec<ExperimentConfig>> {
    let base = match &opts.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<ExperimentConfig>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => {
            let preset = opts.preset.as_deref().unwrap_or("sim1d");
            ExperimentConfig::new(preset, Algorithm::Limit, HumanKind::Align, (0..20).collect())?
        }
    };
    let mut base = base;
    if let (Some(p), Some(_)) = (&opts.preset, &opts.config) {
        base.env = limit_core::env::EnvConfig::preset(p)?;
    }
    if let Some(h) = opts.human {
        base.human = h;
    }
    if let Some(s) = &opts.seeds {
        base.seeds = s.clone();
    }
    if let Some(lr) = opts.learning_rate {
        base.learner.learning_rate = lr;
    }
    let algorithms = if opts.algorithms.is_empty() {
        vec![base.algorithm]
    } else {
        opts.algorithms.clone()
    };
    Ok(algorithms
        .into_iter()
        .map(|algorithm| ExperimentConfig {
            algorithm,
            output: None,
            ..base.clone()
        })
        .collect())
}

/// Runs every configured algorithm and writes all rows to `out` (or stdout).
pub fn run(opts: &RunOptions) -> anyhow::Result<Vec<RunRow>> {
    let configs = run_configs(opts)?;
    let out = opts.out.clone().or_else(|| opts.config.as_ref().and(configs[0].output.clone()));
    if configs.len() == 1 {
        let mut cfg = configs.into_iter().next().expect("one config");
        cfg.output = out.clone();
        let result = runner::run_experiment(&cfg)?;
        if out.is_none() {
            runner::write_rows(&result.rows, std::io::stdout().lock())?;
        }
        return Ok(result.rows);
    }
    let mut rows = Vec::new();
    for cfg in &configs {
        eprintln!("running {} on {} ({} seeds)", cfg.algorithm, cfg.env.name, cfg.seeds.len());
        rows.extend(runner::run_experiment(cfg)?.rows);
    }
    match &out {
        Some(path) => write_atomically(path, &rows)?,
        None => runner::write_rows(&rows, std::io::stdout().lock())?,
    }
    Ok(rows)
}

fn write_atomically(path: &Path, rows: &[RunRow]) -> anyhow::Result<()> {
    let tmp = partial_path(path);
    runner::write_rows(rows, fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn partial_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".partial");
    PathBuf::from(name)
}

pub fn read_inputs(paths: &[PathBuf]) -> anyhow::Result<Vec<RunRow>> {
    if paths.is_empty() {
        bail!("no input files");
    }
    let mut rows = Vec::new();
    for p in paths {
        rows.extend(runner::read_rows_path(p).with_context(|| format!("reading {}", p.display()))?);
    }
    Ok(rows)
}

pub fn stats(paths: &[PathBuf], window: usize) -> anyhow::Result<StatsSummary> {
    Ok(aggregate_stats(&read_inputs(paths)?, window)?)
}

pub fn plot(paths: &[PathBuf], out: &Path, title: Option<&str>) -> anyhow::Result<()> {
    let rows = read_inputs(paths)?;
    let title = match title {
        Some(t) => t.to_owned(),
        None => format!("{} error per interaction", rows[0].preset),
    };
    fs::write(out, limit_core::plot::error_curves_svg(&rows, &title))?;
    Ok(())
}

pub fn pretrain(interactions: usize, seed: u64) -> anyhow::Result<LimitLearner> {
    Ok(playground::pretrain(playground::default_learner(seed)?, interactions, seed)?)
}

pub fn load_or_pretrain(checkpoint: Option<&Path>, interactions: usize, seed: u64) -> anyhow::Result<LimitLearner> {
    match checkpoint {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(LimitLearner::from_json(&text)?)
        }
        None => pretrain(interactions, seed),
    }
}
