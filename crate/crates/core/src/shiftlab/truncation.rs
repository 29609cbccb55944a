//! Finite analogues of the perturbed shift: the weighted shift on the cycle
//! `ℤ/(2N+1)` with the same ½-perturbation at index 0, plus the `α`
//! coordinate. They are positive and unital, but their spectrum falls inside
//! the disk (the cycle weights multiply to ½), so in finite dimension they do
//! not contradict anything.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::algebra::spectral_norm;
use crate::config::Config;
use crate::error::{invalid, Result};
use crate::positivity;
use crate::spectral;
use crate::structure::{self, ImplicationStatus};
use crate::superop::Superoperator;

/// Coordinates: `j ∈ [−N, N]` at `j + N`, then `α` at `2N + 1`.
pub fn truncation_matrix(n: usize) -> Result<DMatrix<f64>> {
    if n == 0 {
        return invalid("the truncation needs N ≥ 1");
    }
    let len = 2 * n + 1;
    let at = |j: i64| (j + n as i64).rem_euclid(len as i64) as usize;
    let mut m = DMatrix::zeros(len + 1, len + 1);
    for j in -(n as i64)..=n as i64 {
        let w = if j - 1 == 0 { 0.5 } else { 1.0 };
        m[(at(j), at(j - 1))] = w;
    }
    m[(at(1), len)] = 0.5;
    m[(len, len)] = 1.0;
    Ok(m)
}

pub fn finite_truncation(n: usize) -> Result<Superoperator> {
    Superoperator::stochastic(&truncation_matrix(n)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationRow {
    pub n: usize,
    pub dim: usize,
    pub positive: bool,
    pub unital: bool,
    pub spectral_radius_gap: f64,
    pub in_unit_circle: bool,
    pub inverse_positive: bool,
    /// `max_{1≤k≤K} ‖T_N^{−k}‖∞`.
    pub max_inverse_power_norm: f64,
    pub inconsistencies: usize,
    pub doubly_power_bounded: bool,
    pub density_hypothesis: bool,
}

/// Row sums of `|m|`, the operator norm on `ℓ∞`.
fn sup_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Analyzes `T_N` for `N = 1..=n_max` and tracks `‖T_N^{−k}‖` for `k ≤ powers`.
pub fn truncation_experiment(n_max: usize, powers: u32, cfg: &Config) -> Result<Vec<TruncationRow>> {
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let m = truncation_matrix(n)?;
        let t = Superoperator::stochastic(&m)?;
        let report = structure::analyze(&t, None, cfg)?;
        let inv = m.clone().try_inverse().ok_or_else(|| crate::error::Error::Numerical("truncation not invertible".into()))?;
        let mut p = DMatrix::identity(m.nrows(), m.ncols());
        let mut max_norm: f64 = 1.0;
        for _ in 0..powers {
            p = &inv * p;
            max_norm = max_norm.max(sup_norm(&p));
        }
        let eig = spectral::eigendecompose(&t, &cfg.tol)?;
        let min_modulus = eig.eigenvalues().iter().map(|l| l.norm()).fold(f64::INFINITY, f64::min);
        rows.push(TruncationRow {
            n,
            dim: m.nrows(),
            positive: report.positive.is_certified(),
            unital: report.unital.is_certified(),
            spectral_radius_gap: 1.0 - min_modulus,
            in_unit_circle: report.spectrum.in_unit_circle,
            inverse_positive: report.inverse_positive.is_certified(),
            max_inverse_power_norm: max_norm,
            inconsistencies: report.implications.iter().filter(|i| i.status == ImplicationStatus::Inconsistent).count(),
            doubly_power_bounded: report.doubly_power_bounded.is_certified(),
            density_hypothesis: report.density.found && report.density.faithful,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchSummary {
    pub trials: usize,
    pub positive_unital: usize,
    pub circle_spectrum: usize,
    pub inverse_positive: usize,
    /// Positive unital maps with spectrum in the circle but a non-positive
    /// inverse. Finite dimension rules these out, so this stays empty.
    pub counterexamples: Vec<Vec<Vec<f64>>>,
}

/// Random search over small row-stochastic matrices, mixed towards
/// permutations, for a positive unital map with unimodular spectrum whose
/// inverse is not positive.
pub fn search_candidates(trials: usize, max_dim: usize, cfg: &Config) -> Result<SearchSummary> {
    let mut rng = cfg.rng(0x534541);
    let mut summary = SearchSummary { trials, positive_unital: 0, circle_spectrum: 0, inverse_positive: 0, counterexamples: Vec::new() };
    for _ in 0..trials {
        let n = rand::Rng::random_range(&mut rng, 2..=max_dim.max(2));
        let s = structure::random_stochastic(n, 0.5, &mut rng);
        let t = Superoperator::stochastic(&s)?;
        if !(positivity::check_positive(&t, cfg).is_certified() && positivity::check_unital(&t, cfg).is_certified()) {
            continue;
        }
        summary.positive_unital += 1;
        if !spectral::classify_spectrum(&t, cfg.tol.unimodular)?.in_unit_circle {
            continue;
        }
        summary.circle_spectrum += 1;
        let inv = t.inverse(cfg.tol.sing)?;
        if positivity::check_positive(&inv.map, cfg).is_certified() {
            summary.inverse_positive += 1;
        } else {
            summary.counterexamples.push(s.row_iter().map(|r| r.iter().copied().collect()).collect());
        }
    }
    Ok(summary)
}

/// `‖T_N‖₂`, used to sanity-check the construction.
pub fn truncation_spectral_norm(n: usize) -> Result<f64> {
    Ok(spectral_norm(finite_truncation(n)?.matrix()))
}
