//! Exact conditional mutual information `I(a; theta | s)` on finite spaces.
//!
//! Two independent routes are provided. [`cond_mutual_info_direct`] builds the
//! joint `P(s, a, theta)` and sums `P(s,a,theta) log P(a|theta,s) / P(a|s)`
//! from its marginals. [`cond_mutual_info_factored`] never forms the joint: it
//! evaluates the policy-level convey term `sum_x P(a|s,x) P(x|s,theta)` and the
//! distinguish term `sum_x P(a|s,x) sum_theta' P(x|s,theta') P(theta')` and
//! combines them as `sum P(s,theta) T_conv log(T_conv / T_dist)`.
//!
//! Logs are natural; `0 log 0 = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::LimitLearner;

/// Largest `|S| |A| |X| |Theta|` the oracle accepts.
pub const MAX_TABLE_PRODUCT: usize = 1_000_000;

const SUM_TOLERANCE: f64 = 1e-12;

/// Discrete human and interface policies with their priors.
///
/// Axis order: `interface[s][theta][x] = P(x | s, theta)` and
/// `human[s][x][a] = P(a | s, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularPolicy {
    pub human: Vec<Vec<Vec<f64>>>,
    pub interface: Vec<Vec<Vec<f64>>>,
    pub state_prior: Vec<f64>,
    pub theta_prior: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableDims {
    pub states: usize,
    pub signals: usize,
    pub actions: usize,
    pub thetas: usize,
}

fn check_distribution(p: &[f64], what: &str) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Table(format!("{what} is empty")));
    }
    if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Table(format!("{what} has a negative or non-finite entry")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::Table(format!("{what} sums to {sum}")));
    }
    Ok(())
}

impl TabularPolicy {
    pub fn validate(&self) -> Result<TableDims> {
        let states = self.state_prior.len();
        let thetas = self.theta_prior.len();
        check_distribution(&self.state_prior, "state prior")?;
        check_distribution(&self.theta_prior, "theta prior")?;
        if self.interface.len() != states || self.human.len() != states {
            return Err(Error::Table("tables disagree on the number of states".into()));
        }
        let signals = self.human[0].len();
        let actions = self.human[0].first().map_or(0, Vec::len);
        if signals == 0 || actions == 0 {
            return Err(Error::Table("empty signal or action axis".into()));
        }
        if states * signals * actions * thetas > MAX_TABLE_PRODUCT {
            return Err(Error::Table(format!(
                "|S||A||X||Theta| exceeds {MAX_TABLE_PRODUCT}"
            )));
        }
        for s in 0..states {
            if self.interface[s].len() != thetas {
                return Err(Error::Table("interface table has the wrong theta axis".into()));
            }
            for row in &self.interface[s] {
                if row.len() != signals {
                    return Err(Error::Table("interface table has the wrong signal axis".into()));
                }
                check_distribution(row, "interface slice")?;
            }
            if self.human[s].len() != signals {
                return Err(Error::Table("human table has the wrong signal axis".into()));
            }
            for row in &self.human[s] {
                if row.len() != actions {
                    return Err(Error::Table("human table has the wrong action axis".into()));
                }
                check_distribution(row, "human slice")?;
            }
        }
        Ok(TableDims {
            states,
            signals,
            actions,
            thetas,
        })
    }

    /// `P(s, a, theta)` indexed `[s][a][theta]`.
    pub fn joint(&self) -> Result<Vec<Vec<Vec<f64>>>> {
        let d = self.validate()?;
        let mut joint = vec![vec![vec![0.0; d.thetas]; d.actions]; d.states];
        for s in 0..d.states {
            for t in 0..d.thetas {
                let w = self.state_prior[s] * self.theta_prior[t];
                for x in 0..d.signals {
                    let px = self.interface[s][t][x];
                    if px == 0.0 {
                        continue;
                    }
                    for a in 0..d.actions {
                        joint[s][a][t] += w * px * self.human[s][x][a];
                    }
                }
            }
        }
        Ok(joint)
    }
}

fn xlogy_ratio(p: f64, num: f64, den: f64) -> f64 {
    if p == 0.0 || num == 0.0 {
        0.0
    } else {
        p * (num / den).ln()
    }
}

/// `I(a; theta | s)` from the joint distribution and its marginals.
pub fn cond_mutual_info_direct(pol: &TabularPolicy) -> Result<f64> {
    let joint = pol.joint()?;
    let mut total = 0.0;
    for by_a in &joint {
        let p_s: f64 = by_a.iter().flatten().sum();
        if p_s == 0.0 {
            continue;
        }
        let thetas = by_a[0].len();
        let p_s_theta: Vec<f64> = (0..thetas).map(|t| by_a.iter().map(|r| r[t]).sum()).collect();
        for row in by_a {
            let p_s_a: f64 = row.iter().sum();
            for (t, &p) in row.iter().enumerate() {
                // P(a|theta,s) / P(a|s) = P(s,a,theta) P(s) / (P(s,theta) P(s,a))
                total += xlogy_ratio(p, p * p_s, p_s_theta[t] * p_s_a);
            }
        }
    }
    Ok(total.max(0.0))
}

/// `I(a; theta | s)` through the convey and distinguish terms of the policies.
pub fn cond_mutual_info_factored(pol: &TabularPolicy) -> Result<f64> {
    let d = pol.validate()?;
    let mut total = 0.0;
    for s in 0..d.states {
        // Signal marginal sum_theta' P(x|s,theta') P(theta').
        let x_marginal: Vec<f64> = (0..d.signals)
            .map(|x| {
                (0..d.thetas)
                    .map(|t| pol.interface[s][t][x] * pol.theta_prior[t])
                    .sum()
            })
            .collect();
        let distinguish: Vec<f64> = (0..d.actions)
            .map(|a| (0..d.signals).map(|x| pol.human[s][x][a] * x_marginal[x]).sum())
            .collect();
        for t in 0..d.thetas {
            let weight = pol.state_prior[s] * pol.theta_prior[t];
            if weight == 0.0 {
                continue;
            }
            for a in 0..d.actions {
                let convey: f64 = (0..d.signals)
                    .map(|x| pol.human[s][x][a] * pol.interface[s][t][x])
                    .sum();
                total += weight * xlogy_ratio(convey, convey, distinguish[a]);
            }
        }
    }
    Ok(total.max(0.0))
}

fn entropy(p: impl Iterator<Item = f64>) -> f64 {
    p.filter(|v| *v > 0.0).map(|v| -v * v.ln()).sum()
}

/// `H(theta)` of the prior.
pub fn theta_entropy(pol: &TabularPolicy) -> Result<f64> {
    pol.validate()?;
    Ok(entropy(pol.theta_prior.iter().copied()))
}

/// `H(a | s)` under the joint induced by the policies.
pub fn action_entropy_given_state(pol: &TabularPolicy) -> Result<f64> {
    let joint = pol.joint()?;
    Ok(joint
        .iter()
        .map(|by_a| {
            let p_s_a: Vec<f64> = by_a.iter().map(|r| r.iter().sum()).collect();
            let p_s: f64 = p_s_a.iter().sum();
            if p_s == 0.0 {
                0.0
            } else {
                p_s * entropy(p_s_a.iter().map(|v| v / p_s))
            }
        })
        .sum())
}

/// Finite grids used to discretize a continuous learner.
///
/// `states` and `thetas` are support points (uniform priors); `signals` and
/// `actions` are cell representatives. A continuous output is assigned to the
/// nearest representative, and exact ties go to the lower index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grids {
    pub states: Vec<Vec<f64>>,
    pub thetas: Vec<Vec<f64>>,
    pub signals: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
}

impl Grids {
    /// Evenly spaced 1D points covering `[lo, hi]`.
    pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<Vec<f64>> {
        match n {
            0 => Vec::new(),
            1 => vec![vec![0.5 * (lo + hi)]],
            _ => (0..n)
                .map(|i| vec![lo + (hi - lo) * i as f64 / (n - 1) as f64])
                .collect(),
        }
    }

    /// Cartesian product of 1D point lists.
    pub fn product(axes: &[Vec<Vec<f64>>]) -> Vec<Vec<f64>> {
        axes.iter().fold(vec![Vec::new()], |acc, axis| {
            acc.iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |p| {
                        let mut v = prefix.clone();
                        v.extend(p);
                        v
                    })
                })
                .collect()
        })
    }
}

/// Index of the nearest cell; the lower index wins exact ties.
pub fn nearest_cell(cells: &[Vec<f64>], value: &[f64]) -> Result<usize> {
    if cells.is_empty() {
        return Err(Error::Table("empty grid".into()));
    }
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in cells.iter().enumerate() {
        let d = crate::env::squared_distance(c, value);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    Ok(best)
}

fn one_hot(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

/// Discretizes deterministic interface and human maps onto `grids`.
pub fn tabularize_with<R, H>(grids: &Grids, mut interface: R, mut human: H) -> Result<TabularPolicy>
where
    R: FnMut(&[f64], &[f64]) -> Result<Vec<f64>>,
    H: FnMut(&[f64], &[f64]) -> Result<Vec<f64>>,
{
    if [&grids.states, &grids.thetas, &grids.signals, &grids.actions]
        .iter()
        .any(|g| g.is_empty())
    {
        return Err(Error::Table("empty grid".into()));
    }
    let (ns, nt, nx, na) = (
        grids.states.len(),
        grids.thetas.len(),
        grids.signals.len(),
        grids.actions.len(),
    );
    if ns * nt * nx * na > MAX_TABLE_PRODUCT {
        return Err(Error::Table(format!("grid product exceeds {MAX_TABLE_PRODUCT}")));
    }
    let mut interface_table = Vec::with_capacity(ns);
    let mut human_table = Vec::with_capacity(ns);
    for s in &grids.states {
        let rows = grids
            .thetas
            .iter()
            .map(|t| Ok(one_hot(nx, nearest_cell(&grids.signals, &interface(s, t)?)?)))
            .collect::<Result<Vec<_>>>()?;
        interface_table.push(rows);
        let rows = grids
            .signals
            .iter()
            .map(|x| Ok(one_hot(na, nearest_cell(&grids.actions, &human(s, x)?)?)))
            .collect::<Result<Vec<_>>>()?;
        human_table.push(rows);
    }
    Ok(TabularPolicy {
        human: human_table,
        interface: interface_table,
        state_prior: vec![1.0 / ns as f64; ns],
        theta_prior: vec![1.0 / nt as f64; nt],
    })
}

/// Discretizes the learner's interface policy composed with its own human model.
pub fn tabularize(learner: &LimitLearner, grids: &Grids) -> Result<TabularPolicy> {
    tabularize_with(
        grids,
        |s, t| learner.signal(s, t),
        |s, x| learner.predict_action(s, x),
    )
}
