//! Final-window error summaries and paired t-tests between algorithms.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::runner::{Algorithm, RunRow};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub seeds: usize,
    /// Mean over seeds of the per-seed final-window mean error.
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedTest {
    pub first: Algorithm,
    pub second: Algorithm,
    /// Mean of `first - second` across seeds.
    pub mean_difference: f64,
    pub t: f64,
    pub df: usize,
    /// Two-sided p-value.
    pub p: f64,
    /// Every seed differs by the same amount, so the variance is zero.
    pub exact_difference: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub window: usize,
    pub algorithms: Vec<AlgorithmSummary>,
    pub comparisons: Vec<PairedTest>,
}

impl StatsSummary {
    pub fn comparison(&self, first: Algorithm, second: Algorithm) -> Option<&PairedTest> {
        self.comparisons
            .iter()
            .find(|c| c.first == first && c.second == second)
    }

    pub fn summary(&self, algorithm: Algorithm) -> Option<&AlgorithmSummary> {
        self.algorithms.iter().find(|s| s.algorithm == algorithm)
    }
}

impl std::fmt::Display for StatsSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "final-window error (last {} interactions)", self.window)?;
        writeln!(f, "{:<12} {:>6} {:>10} {:>10}", "algorithm", "seeds", "mean", "stderr")?;
        for s in &self.algorithms {
            writeln!(
                f,
                "{:<12} {:>6} {:>10.4} {:>10.4}",
                s.algorithm.name(),
                s.seeds,
                s.mean,
                s.stderr
            )?;
        }
        writeln!(f)?;
        writeln!(
            f,
            "{:<12} {:<12} {:>10} {:>9} {:>4} {:>10}",
            "first", "second", "mean diff", "t", "df", "p"
        )?;
        for c in &self.comparisons {
            let note = if c.exact_difference { "  (exact difference)" } else { "" };
            writeln!(
                f,
                "{:<12} {:<12} {:>10.4} {:>9.3} {:>4} {:>10.3e}{note}",
                c.first.name(),
                c.second.name(),
                c.mean_difference,
                c.t,
                c.df,
                c.p
            )?;
        }
        Ok(())
    }
}

/// Paired t-test on `first[i] - second[i]`.
pub fn paired_t_test(first: &[f64], second: &[f64]) -> Result<(f64, f64, usize, bool, f64)> {
    if first.len() != second.len() {
        return Err(Error::Mismatch("paired samples differ in length".into()));
    }
    let n = first.len();
    if n < 2 {
        return Err(Error::Mismatch("a paired t-test needs at least two seeds".into()));
    }
    let diffs: Vec<f64> = first.iter().zip(second).map(|(a, b)| a - b).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let df = n - 1;
    if var == 0.0 {
        return Ok(if mean == 0.0 {
            (0.0, 1.0, df, false, mean)
        } else {
            (f64::INFINITY.copysign(mean), 0.0, df, true, mean)
        });
    }
    let t = mean / (var / n as f64).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df as f64)
        .map_err(|e| Error::Config(format!("t distribution: {e}")))?;
    let p = (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0);
    Ok((t, p, df, false, mean))
}

/// Per-seed mean error over the last `window` interactions, keyed by algorithm then seed.
pub fn window_means(rows: &[RunRow], window: usize) -> Result<BTreeMap<Algorithm, BTreeMap<u64, f64>>> {
    if window == 0 {
        return Err(Error::Config("window must be at least 1".into()));
    }
    let presets: BTreeSet<&str> = rows.iter().map(|r| r.preset.as_str()).collect();
    if presets.len() > 1 {
        return Err(Error::Mismatch(format!("rows mix environments {presets:?}")));
    }
    let mut grouped: BTreeMap<Algorithm, BTreeMap<u64, Vec<(usize, f64)>>> = BTreeMap::new();
    for r in rows {
        grouped
            .entry(r.algorithm)
            .or_default()
            .entry(r.seed)
            .or_default()
            .push((r.interaction, r.error));
    }
    let mut out = BTreeMap::new();
    for (algo, seeds) in grouped {
        let mut means = BTreeMap::new();
        for (seed, mut errs) in seeds {
            errs.sort_by_key(|e| e.0);
            let tail = &errs[errs.len().saturating_sub(window)..];
            means.insert(seed, tail.iter().map(|e| e.1).sum::<f64>() / tail.len() as f64);
        }
        out.insert(algo, means);
    }
    Ok(out)
}

/// Summaries per algorithm and one paired test per pair of algorithms.
/// LIMIT is always the `first` member of the pairs it takes part in.
pub fn aggregate_stats(rows: &[RunRow], window: usize) -> Result<StatsSummary> {
    let means = window_means(rows, window)?;
    let mut seed_sets = means.values().map(|m| m.keys().copied().collect::<Vec<_>>());
    if let Some(reference) = seed_sets.next() {
        if seed_sets.any(|s| s != reference) {
            return Err(Error::Mismatch("algorithms were run on different seeds".into()));
        }
    }
    let algorithms = means
        .iter()
        .map(|(&algorithm, m)| {
            let v: Vec<f64> = m.values().copied().collect();
            let n = v.len();
            let mean = v.iter().sum::<f64>() / n as f64;
            let stderr = if n > 1 {
                (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
                    / (n as f64).sqrt()
            } else {
                0.0
            };
            AlgorithmSummary {
                algorithm,
                seeds: n,
                mean,
                stderr,
            }
        })
        .collect();
    let keys: Vec<Algorithm> = means.keys().copied().collect();
    let mut comparisons = Vec::new();
    for (i, &a) in keys.iter().enumerate() {
        for &b in &keys[i + 1..] {
            let (first, second) = if b == Algorithm::Limit { (b, a) } else { (a, b) };
            let x: Vec<f64> = means[&first].values().copied().collect();
            let y: Vec<f64> = means[&second].values().copied().collect();
            if x.len() < 2 {
                continue;
            }
            let (t, p, df, exact_difference, mean_difference) = paired_t_test(&x, &y)?;
            comparisons.push(PairedTest {
                first,
                second,
                mean_difference,
                t,
                df,
                p,
                exact_difference,
            });
        }
    }
    Ok(StatsSummary {
        window,
        algorithms,
        comparisons,
    })
}
