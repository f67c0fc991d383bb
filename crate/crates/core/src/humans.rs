//! Simulated co-adaptive humans.
//!
//! A human reads the signal through its current interpretation (a sign flip
//! in 1D, a planar rotation in 2D, optionally followed by a scale) and moves
//! by the result. After every interaction it replays a few recent
//! interactions under each candidate interpretation on a fixed grid and
//! keeps the one that would have ended closest to the goal.
//!
//! Signals wider than the action space are read pairwise: channel `i` and
//! channel `i + dim` are averaged before interpretation.

use std::f64::consts::PI;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{goal_for, squared_distance};
use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HumanKind {
    Rotate,
    Align,
}

impl std::str::FromStr for HumanKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rotate" => Ok(HumanKind::Rotate),
            "align" => Ok(HumanKind::Align),
            other => Err(Error::Config(format!("unknown human {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanConfig {
    /// Rotation candidates in 2D, evenly spaced over the circle.
    pub angle_grid: usize,
    /// Scale candidates for the Align human, evenly spaced over `[-1, 1]`.
    pub scale_grid: usize,
    /// Interactions replayed per adaptation.
    pub adapt_samples: usize,
    /// How many of the latest interactions are eligible for replay.
    pub memory: usize,
}

impl Default for HumanConfig {
    fn default() -> Self {
        Self {
            angle_grid: 72,
            scale_grid: 21,
            adapt_samples: 5,
            memory: 10,
        }
    }
}

/// How the human maps a perceived signal to an action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interpretation {
    /// `+1` or `-1`; only used in 1D.
    pub sign: f64,
    /// Rotation angle in `[0, 2 pi)`; only used in 2D.
    pub angle: f64,
    pub scale: f64,
}

impl Interpretation {
    pub const IDENTITY: Interpretation = Interpretation {
        sign: 1.0,
        angle: 0.0,
        scale: 1.0,
    };

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        match x {
            [v] => vec![self.sign * self.scale * v],
            [u, v] => {
                let (sin, cos) = self.angle.sin_cos();
                vec![
                    self.scale * (cos * u - sin * v),
                    self.scale * (sin * u + cos * v),
                ]
            }
            _ => unreachable!("perceived signals are 1D or 2D"),
        }
    }
}

/// What the human remembers about one finished interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationRecord {
    pub start: Vec<f64>,
    pub signals: Vec<Vec<f64>>,
    pub theta: Vec<f64>,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedHuman {
    kind: HumanKind,
    dim: usize,
    signal_dim: usize,
    interpretation: Interpretation,
    config: HumanConfig,
}

impl SimulatedHuman {
    pub fn new(
        kind: HumanKind,
        dim: usize,
        signal_dim: usize,
        interpretation: Interpretation,
        config: HumanConfig,
    ) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::Config(format!("humans act in 1 or 2 dimensions, not {dim}")));
        }
        if signal_dim != dim && signal_dim != 2 * dim {
            return Err(Error::Config(format!(
                "a {dim}D human cannot read {signal_dim}D signals"
            )));
        }
        if config.angle_grid == 0 || config.scale_grid == 0 || config.adapt_samples == 0 {
            return Err(Error::Config("adaptation grids must be nonempty".into()));
        }
        Ok(Self {
            kind,
            dim,
            signal_dim,
            interpretation,
            config,
        })
    }

    /// A human whose starting interpretation is a uniformly drawn grid
    /// candidate rotation (or sign) with unit scale.
    pub fn random<R: Rng + ?Sized>(
        kind: HumanKind,
        dim: usize,
        signal_dim: usize,
        config: HumanConfig,
        rng: &mut R,
    ) -> Result<Self> {
        let mut interp = Interpretation::IDENTITY;
        if dim == 1 {
            interp.sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        } else {
            let k = rng.gen_range(0..config.angle_grid.max(1));
            interp.angle = grid_angle(k, config.angle_grid);
        }
        Self::new(kind, dim, signal_dim, interp, config)
    }

    pub fn kind(&self) -> HumanKind {
        self.kind
    }

    pub fn interpretation(&self) -> Interpretation {
        self.interpretation
    }

    pub fn config(&self) -> &HumanConfig {
        &self.config
    }

    fn perceive(&self, x: &[f64]) -> Vec<f64> {
        if self.signal_dim == self.dim {
            x.to_vec()
        } else {
            (0..self.dim).map(|i| 0.5 * (x[i] + x[i + self.dim])).collect()
        }
    }

    pub fn act(&self, state: &[f64], signal: &[f64]) -> Result<Vec<f64>> {
        check_len("human state", self.dim, state.len())?;
        check_len("human signal", self.signal_dim, signal.len())?;
        Ok(self.interpretation.apply(&self.perceive(signal)))
    }

    /// Every interpretation on the search grid, in tie-breaking order.
    pub fn candidates(&self) -> Vec<Interpretation> {
        let scales: Vec<f64> = match self.kind {
            HumanKind::Rotate => vec![1.0],
            HumanKind::Align => scale_grid(self.config.scale_grid),
        };
        let mut out = Vec::new();
        if self.dim == 1 {
            for sign in [1.0, -1.0] {
                for &scale in &scales {
                    out.push(Interpretation {
                        sign,
                        angle: 0.0,
                        scale,
                    });
                }
            }
        } else {
            for k in 0..self.config.angle_grid {
                for &scale in &scales {
                    out.push(Interpretation {
                        sign: 1.0,
                        angle: grid_angle(k, self.config.angle_grid),
                        scale,
                    });
                }
            }
        }
        out
    }

    /// Reward the record would have earned had the human read its signals
    /// through `interp`.
    pub fn retrospective_reward(&self, record: &AdaptationRecord, interp: &Interpretation) -> f64 {
        let summed = self.summed_perception(record);
        retro_reward(record, &summed, interp)
    }

    fn summed_perception(&self, record: &AdaptationRecord) -> Vec<f64> {
        let mut sum = vec![0.0; self.dim];
        for x in &record.signals {
            for (acc, v) in sum.iter_mut().zip(self.perceive(x)) {
                *acc += v;
            }
        }
        sum
    }

    /// Re-fits the interpretation on a uniform sample of recent records and
    /// returns the indices of the records that were replayed.
    pub fn adapt<R: Rng + ?Sized>(
        &mut self,
        records: &[AdaptationRecord],
        rng: &mut R,
    ) -> Vec<usize> {
        if records.is_empty() {
            return Vec::new();
        }
        let window = records.len().min(self.config.memory.max(1));
        let offset = records.len() - window;
        let n = self.config.adapt_samples.min(window);
        let mut chosen: Vec<usize> = index::sample(rng, window, n)
            .into_iter()
            .map(|i| i + offset)
            .collect();
        chosen.sort_unstable();
        let sample: Vec<&AdaptationRecord> = chosen.iter().map(|&i| &records[i]).collect();
        self.interpretation = self.best_interpretation(&sample);
        chosen
    }

    /// Exhaustive argmax of summed retrospective reward; first candidate wins ties.
    pub fn best_interpretation(&self, records: &[&AdaptationRecord]) -> Interpretation {
        let sums: Vec<Vec<f64>> = records.iter().map(|r| self.summed_perception(r)).collect();
        let mut best = self.interpretation;
        let mut best_score = f64::NEG_INFINITY;
        for cand in self.candidates() {
            let score: f64 = records
                .iter()
                .zip(&sums)
                .map(|(r, s)| retro_reward(r, s, &cand))
                .sum();
            if score > best_score {
                best_score = score;
                best = cand;
            }
        }
        best
    }
}

fn retro_reward(record: &AdaptationRecord, summed: &[f64], interp: &Interpretation) -> f64 {
    let moved = interp.apply(summed);
    let end: Vec<f64> = record.start.iter().zip(&moved).map(|(s, m)| s + m).collect();
    -squared_distance(&end, &goal_for(end.len(), &record.theta))
}

pub fn grid_angle(k: usize, n: usize) -> f64 {
    2.0 * PI * k as f64 / n as f64
}

pub fn scale_grid(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect()
}

/// Smallest absolute difference between two angles on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn identity_interpretation() {
        let h = SimulatedHuman::new(HumanKind::Align, 2, 2, Interpretation::IDENTITY, HumanConfig::default()).unwrap();
        assert!(close(&h.act(&[0.0, 0.0], &[0.5, 0.2]).unwrap(), &[0.5, 0.2]));
    }

    #[test]
    fn one_dimensional_sign_flip() {
        let interp = Interpretation {
            sign: -1.0,
            ..Interpretation::IDENTITY
        };
        let h = SimulatedHuman::new(HumanKind::Rotate, 1, 1, interp, HumanConfig::default()).unwrap();
        assert_eq!(h.act(&[0.0], &[0.7]).unwrap(), vec![-0.7]);
    }

    #[test]
    fn quarter_rotation() {
        let interp = Interpretation {
            angle: PI / 2.0,
            ..Interpretation::IDENTITY
        };
        let h = SimulatedHuman::new(HumanKind::Rotate, 2, 2, interp, HumanConfig::default()).unwrap();
        assert!(close(&h.act(&[0.0, 0.0], &[1.0, 0.0]).unwrap(), &[0.0, 1.0]));
    }

    #[test]
    fn wide_signals_are_averaged() {
        let h = SimulatedHuman::new(HumanKind::Align, 2, 4, Interpretation::IDENTITY, HumanConfig::default()).unwrap();
        assert!(close(&h.act(&[0.0, 0.0], &[1.0, 0.5, 0.0, -0.5]).unwrap(), &[0.5, 0.0]));
        assert!(h.act(&[0.0, 0.0], &[1.0, 0.5]).is_err());
    }

    #[test]
    fn unsupported_dimensions_rejected() {
        let cfg = HumanConfig::default();
        assert!(SimulatedHuman::new(HumanKind::Rotate, 3, 3, Interpretation::IDENTITY, cfg.clone()).is_err());
        assert!(SimulatedHuman::new(HumanKind::Rotate, 2, 3, Interpretation::IDENTITY, cfg).is_err());
    }

    #[test]
    fn adapt_flips_sign_when_signals_point_away() {
        let mut h = SimulatedHuman::new(HumanKind::Rotate, 1, 1, Interpretation::IDENTITY, HumanConfig::default()).unwrap();
        let rec = AdaptationRecord {
            start: vec![0.0],
            signals: vec![vec![-0.5]; 10],
            theta: vec![5.0],
            reward: -100.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(h.adapt(&[rec], &mut rng), vec![0]);
        assert_eq!(h.interpretation().sign, -1.0);
    }

    #[test]
    fn adapt_without_records_is_noop() {
        let mut h = SimulatedHuman::new(HumanKind::Align, 2, 2, Interpretation::IDENTITY, HumanConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(h.adapt(&[], &mut rng).is_empty());
        assert_eq!(h.interpretation(), Interpretation::IDENTITY);
    }

    #[test]
    fn candidate_counts() {
        let cfg = HumanConfig::default();
        let count = |kind, dim| {
            SimulatedHuman::new(kind, dim, dim, Interpretation::IDENTITY, cfg.clone())
                .unwrap()
                .candidates()
                .len()
        };
        assert_eq!(count(HumanKind::Rotate, 1), 2);
        assert_eq!(count(HumanKind::Align, 1), 42);
        assert_eq!(count(HumanKind::Rotate, 2), 72);
        assert_eq!(count(HumanKind::Align, 2), 72 * 21);
    }

    #[test]
    fn adapt_samples_recent_window() {
        let mut h = SimulatedHuman::new(HumanKind::Rotate, 2, 2, Interpretation::IDENTITY, HumanConfig::default()).unwrap();
        let rec = AdaptationRecord {
            start: vec![0.0, 0.0],
            signals: vec![vec![0.1, 0.0]],
            theta: vec![1.0, 0.0],
            reward: 0.0,
        };
        let records = vec![rec; 30];
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let chosen = h.adapt(&records, &mut rng);
        assert_eq!(chosen.len(), 5);
        assert!(chosen.iter().all(|&i| i >= 20));
    }

    #[test]
    fn angle_distance_wraps() {
        assert!((angle_distance(0.1, 2.0 * PI - 0.1) - 0.2).abs() < 1e-12);
        assert_eq!(angle_distance(1.0, 1.0), 0.0);
    }
}
