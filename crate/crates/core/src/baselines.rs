//! Linear interface baselines.
//!
//! `Naive` draws a matrix once and keeps it. `Bayes` treats the matrix
//! entries as a black-box search space and, once per interaction, proposes a
//! new matrix by Gaussian-process Bayesian optimization of the observed
//! interaction reward.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{check_len, Error, Result};

/// `x = clamp(W (s, theta), -1, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearInterface {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows x cols`.
    pub weights: Vec<f64>,
}

impl LinearInterface {
    pub fn new(rows: usize, cols: usize, weights: Vec<f64>) -> Result<Self> {
        check_len("linear interface weights", rows * cols, weights.len())?;
        Ok(Self { rows, cols, weights })
    }

    /// Entries i.i.d. uniform in `[-1, 1]`.
    pub fn naive<R: Rng + ?Sized>(
        rng: &mut R,
        signal_dim: usize,
        state_dim: usize,
        theta_dim: usize,
    ) -> Self {
        let cols = state_dim + theta_dim;
        let weights = (0..signal_dim * cols)
            .map(|_| rng.gen_range(-1.0..=1.0))
            .collect();
        Self {
            rows: signal_dim,
            cols,
            weights,
        }
    }

    pub fn signal(&self, state: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
        check_len("linear interface input", self.cols, state.len() + theta.len())?;
        Ok(self
            .weights
            .chunks_exact(self.cols)
            .map(|row| {
                let z: f64 = row
                    .iter()
                    .zip(state.iter().chain(theta))
                    .map(|(w, v)| w * v)
                    .sum();
                z.clamp(-1.0, 1.0)
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesConfig {
    /// Proposals drawn uniformly before the surrogate is used.
    pub warmup: usize,
    pub length_scale: f64,
    pub noise: f64,
    /// Random candidates scored by expected improvement.
    pub candidates: usize,
    /// Perturbations of the incumbent scored after the random sweep.
    pub refinements: usize,
    /// Half-width of the refinement perturbations.
    pub refine_radius: f64,
    /// Exploration margin in standardized reward units.
    pub xi: f64,
}

impl Default for BayesConfig {
    fn default() -> Self {
        Self {
            warmup: 5,
            length_scale: 0.5,
            noise: 1e-3,
            candidates: 256,
            refinements: 64,
            refine_radius: 0.1,
            xi: 0.01,
        }
    }
}

/// Observations of `(matrix entries, interaction reward)` over the box `[-1, 1]^dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesState {
    pub dim: usize,
    pub points: Vec<(Vec<f64>, f64)>,
    pub config: BayesConfig,
}

/// Gaussian-process posterior fitted to standardized rewards.
pub struct Surrogate<'a> {
    state: &'a BayesState,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    alpha: DVector<f64>,
    mean: f64,
    std: f64,
    best: f64,
}

impl BayesState {
    pub fn new(dim: usize, config: BayesConfig) -> Self {
        Self {
            dim,
            points: Vec::new(),
            config,
        }
    }

    /// Appends one observation. Repeated matrices are kept as separate noisy samples.
    pub fn observe(&mut self, matrix: &[f64], reward: f64) -> Result<()> {
        check_len("bayes point", self.dim, matrix.len())?;
        if !reward.is_finite() || matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("non-finite bayes observation".into()));
        }
        self.points.push((matrix.to_vec(), reward));
        Ok(())
    }

    pub fn best(&self) -> Option<&(Vec<f64>, f64)> {
        self.points.iter().max_by(|a, b| a.1.total_cmp(&b.1))
    }

    fn uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.dim).map(|_| rng.gen_range(-1.0..=1.0)).collect()
    }

    fn kernel(&self, a: &[f64], b: &[f64]) -> f64 {
        let d2 = crate::env::squared_distance(a, b);
        (-0.5 * d2 / (self.config.length_scale * self.config.length_scale)).exp()
    }

    pub fn surrogate(&self) -> Option<Surrogate<'_>> {
        let n = self.points.len();
        if n == 0 {
            return None;
        }
        let ys: Vec<f64> = self.points.iter().map(|p| p.1).collect();
        let mean = ys.iter().sum::<f64>() / n as f64;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n as f64;
        let std = if var > 0.0 { var.sqrt() } else { 1.0 };
        let y = DVector::from_iterator(n, ys.iter().map(|v| (v - mean) / std));
        let k = DMatrix::from_fn(n, n, |i, j| {
            let mut v = self.kernel(&self.points[i].0, &self.points[j].0);
            if i == j {
                v += self.config.noise;
            }
            v
        });
        let chol = k.cholesky()?;
        let alpha = chol.solve(&y);
        let best = y.max();
        Some(Surrogate {
            state: self,
            chol,
            alpha,
            mean,
            std,
            best,
        })
    }

    /// Next matrix to try, always inside the box.
    pub fn propose<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        if self.points.len() < self.config.warmup {
            return self.uniform(rng);
        }
        let Some(model) = self.surrogate() else {
            return self.uniform(rng);
        };
        let mut best_point = self.uniform(rng);
        let mut best_ei = model.expected_improvement(&best_point);
        for _ in 1..self.config.candidates {
            let c = self.uniform(rng);
            let ei = model.expected_improvement(&c);
            if ei > best_ei {
                best_ei = ei;
                best_point = c;
            }
        }
        let incumbent = self.best().map(|p| p.0.clone()).unwrap_or_default();
        let r = self.config.refine_radius;
        for i in 0..self.config.refinements {
            let centre = if i % 2 == 0 { &incumbent } else { &best_point };
            let c: Vec<f64> = centre
                .iter()
                .map(|v| (v + rng.gen_range(-r..=r)).clamp(-1.0, 1.0))
                .collect();
            let ei = model.expected_improvement(&c);
            if ei > best_ei {
                best_ei = ei;
                best_point = c;
            }
        }
        best_point
    }
}

impl Surrogate<'_> {
    /// Posterior mean and standard deviation, in reward units.
    pub fn predict(&self, point: &[f64]) -> (f64, f64) {
        let (mu, sigma) = self.predict_standardized(point);
        (self.mean + self.std * mu, self.std * sigma)
    }

    fn predict_standardized(&self, point: &[f64]) -> (f64, f64) {
        let pts = &self.state.points;
        let kx = DVector::from_iterator(pts.len(), pts.iter().map(|p| self.state.kernel(&p.0, point)));
        let mu = kx.dot(&self.alpha);
        let v = self.chol.l().solve_lower_triangular(&kx).unwrap_or(kx);
        let var = (1.0 - v.dot(&v)).max(1e-12);
        (mu, var.sqrt())
    }

    /// Expected improvement over the best standardized observation.
    pub fn expected_improvement(&self, point: &[f64]) -> f64 {
        let (mu, sigma) = self.predict_standardized(point);
        let improvement = mu - self.best - self.state.config.xi;
        let z = improvement / sigma;
        let normal = Normal::standard();
        (improvement * normal.cdf(z) + sigma * normal.pdf(z)).max(0.0)
    }
}
