//! Tolerances and sampling parameters, kept in one record.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Hermiticity slack, relative to the element norm.
    pub herm: f64,
    /// Positive-semidefiniteness slack, relative to the natural scale.
    pub psd: f64,
    /// Allowed `‖T(1) − 1‖`.
    pub unital: f64,
    /// Eigendecomposition reconstruction slack, relative to `‖T‖`.
    pub eig: f64,
    /// Inverse residual slack per unit of condition number.
    pub inv: f64,
    /// Relative singular-value threshold below which a map is singular.
    pub sing: f64,
    /// Entry rounding slack for 0/1 matrix detection.
    pub entry: f64,
    /// Minimum eigenvalue of a faithful density.
    pub faithful: f64,
    /// `|λ| ≥ 1 − unimodular` counts as unimodular.
    pub unimodular: f64,
    /// Eigenvalues closer than this (relative to `max(1, ‖T‖)`) form a cluster.
    pub cluster: f64,
    /// Relative singular-value threshold used for numerical rank.
    pub rank: f64,
    /// Eigenbasis condition number above which a map is reported non-diagonalizable.
    pub kappa_max: f64,
    /// Eigenbasis condition number above which spectral projections use the Schur route.
    pub kappa_projection: f64,
    /// Norm slack for isometry and contraction checks.
    pub norm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            herm: 1e-9,
            psd: 1e-9,
            unital: 1e-9,
            eig: 1e-8,
            inv: 1e-9,
            sing: 1e-12,
            entry: 1e-9,
            faithful: 1e-12,
            unimodular: 1e-6,
            cluster: 1e-6,
            rank: 1e-9,
            kappa_max: 1e8,
            kappa_projection: 1e6,
            norm: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub tol: Tolerances,
    /// Random trials per sampling-based check.
    pub samples: usize,
    pub seed: u64,
    /// Horizon `N` for the empirical `max_{|n|≤N} ‖Tⁿ‖`.
    pub horizon: u32,
    pub recurrence_eps: f64,
    pub recurrence_budget: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            tol: Tolerances::default(),
            samples: 1000,
            seed: 0,
            horizon: 64,
            recurrence_eps: 1e-6,
            recurrence_budget: 100_000,
        }
    }
}

impl Config {
    pub fn with_seed(seed: u64) -> Self {
        Config { seed, ..Config::default() }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    /// Deterministic generator for one named sampling stream.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}
