//! Generators shared by the integration tests.
#![allow(dead_code)]

use posinv::algebra::{spectral_norm, Algebra, CMatrix, Element};
use posinv::random::{gaussian_matrix, haar_unitary};
use posinv::{Config, Superoperator, C64};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const GOLDEN: f64 = 0.618_033_988_749_894_8;

pub fn cfg(samples: usize) -> Config {
    Config::default().with_samples(samples)
}

pub fn cis(turns: f64) -> C64 {
    C64::from_polar(1.0, std::f64::consts::TAU * turns)
}

pub fn random_kraus(alg: &Algebra, count: usize, rng: &mut ChaCha8Rng) -> Superoperator {
    let ops: Vec<Element> = (0..count)
        .map(|_| alg.element(alg.block_dims().iter().map(|&n| gaussian_matrix(n, n, rng)).collect()).unwrap())
        .collect();
    Superoperator::kraus(alg, &ops).unwrap()
}

/// 0: completely positive; 1: blockwise transpose after a CP map (positive,
/// not CP); otherwise a Gaussian map, almost never positive.
pub fn random_map(kind: u8, alg: &Algebra, rng: &mut ChaCha8Rng) -> Superoperator {
    match kind {
        0 => random_kraus(alg, rng.random_range(1..=3), rng),
        1 => Superoperator::transpose(alg).compose(&random_kraus(alg, rng.random_range(1..=3), rng)).unwrap(),
        _ => Superoperator::random(alg, 1.0, rng),
    }
}

/// `x ↦ u x u*` on `M_n` with `u = V diag(e^{2πiφ_j}) V*`, `V` Haar.
pub fn phase_conjugation(phases: &[f64], rng: &mut ChaCha8Rng) -> Superoperator {
    let n = phases.len();
    let v = haar_unitary(n, rng);
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, phases.iter().map(|&p| cis(p))));
    let u = &v * d * v.adjoint();
    Superoperator::unitary_conjugation(&Element::from_blocks(vec![u]).unwrap()).unwrap()
}

/// Phase sets of the conjugating unitary; the induced map has at most six
/// distinct eigenphases, one of them the golden angle.
pub fn golden_phase_sets() -> Vec<Vec<f64>> {
    vec![vec![0.0, GOLDEN], vec![0.0, GOLDEN, 2.0 * GOLDEN], vec![0.0, GOLDEN, 0.5], vec![0.25, 0.25 + GOLDEN]]
}

/// `S diag(λ) S⁻¹` with unimodular `λ` at roots of unity of order dividing 12
/// and the rest of modulus at most 0.8, `S = U(I + 0.2 G/‖G‖)`. The algebra
/// only fixes the dimension.
pub fn mixed_spectrum(rng: &mut ChaCha8Rng) -> Superoperator {
    let shapes: [&[usize]; 6] = [&[1, 1, 1], &[1, 1, 1, 1, 1], &[2], &[2, 1], &[1, 1, 2], &[1, 1, 1, 1, 1, 1]];
    let alg = Algebra::new(shapes.choose(rng).unwrap()).unwrap();
    let n = alg.total_dim();
    let unimodular = rng.random_range(1..n);
    let values: Vec<C64> = (0..n)
        .map(|i| {
            if i < unimodular {
                let q = *[1u32, 2, 3, 4, 6].choose(rng).unwrap();
                cis(rng.random_range(0..q) as f64 / q as f64)
            } else {
                C64::from_polar(rng.random_range(0.0..=0.8), std::f64::consts::TAU * rng.random::<f64>())
            }
        })
        .collect();
    let g = gaussian_matrix(n, n, rng);
    let s = haar_unitary(n, rng) * (CMatrix::identity(n, n) + &g * C64::new(0.2 / spectral_norm(&g), 0.0));
    let sinv = s.clone().try_inverse().unwrap();
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(values));
    Superoperator::new(alg, &s * d * sinv).unwrap()
}

/// Block shapes up to `[3, 2, 1]`, with repeated sizes so block permutations occur.
pub fn jordan_shapes() -> Vec<Vec<usize>> {
    vec![vec![1], vec![2], vec![3], vec![1, 1, 1], vec![2, 1], vec![2, 2], vec![3, 1], vec![3, 2], vec![2, 2, 1], vec![3, 2, 1]]
}
