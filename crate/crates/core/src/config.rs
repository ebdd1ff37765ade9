//! Numerical settings shared by the solvers.

use serde::{Deserialize, Serialize};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Tolerances and solver knobs. Every field has a documented default and is
/// echoed in CLI metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    /// Largest accepted imaginary part of a root; `None` means
    /// `1e-7 (1 + max |f_i|)`.
    pub hyper_tol: Option<f64>,
    /// Relative gap below which two roots are one multiple root.
    pub cluster_tol: f64,
    /// Newton convergence threshold on scaled power-sum residuals.
    pub residual_tol: f64,
    /// Converged points closer than this (normalized coordinates) are one solution.
    pub solution_radius: f64,
    /// Relative coefficient tolerance for `|h_i - f_i|`, `i <= s`, on every result.
    pub verify_tol: f64,
    /// Multistart cloud size for square systems.
    pub starts: usize,
    pub max_newton_iter: usize,
    /// Initial root split, relative to the root spread of `f`.
    pub split_delta: f64,
    pub min_split_delta: f64,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            hyper_tol: None,
            cluster_tol: 1e-6,
            residual_tol: 1e-12,
            solution_radius: 1e-7,
            verify_tol: 1e-9,
            starts: 200,
            max_newton_iter: 100,
            split_delta: 1e-3,
            min_split_delta: 1e-12,
            seed: DEFAULT_SEED,
        }
    }
}

impl Config {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_starts(mut self, starts: usize) -> Self {
        self.starts = starts;
        self
    }
}
