//! Random matrices and elements used by the sampling checks and the test
//! generators.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::{Algebra, CMatrix, CVector, Element, C64};

/// Standard complex Gaussian: real and imaginary parts `N(0, 1/2)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    CVector::from_fn(n, |_, _| complex_gaussian(rng))
}

/// Haar-distributed unitary, from the QR factorization of a Gaussian matrix
/// with the phases of `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let qr = gaussian_matrix(n, n, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Wishart sample `G*G`.
pub fn wishart<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = gaussian_matrix(n, n, rng);
    g.adjoint() * g
}

/// Rank-one projection onto a uniformly random unit vector.
pub fn random_projector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let v = gaussian_vector(n, rng);
    let v = &v / C64::new(v.norm(), 0.0);
    &v * v.adjoint()
}

pub fn random_element<R: Rng + ?Sized>(alg: &Algebra, rng: &mut R) -> Element {
    let blocks = alg.block_dims().iter().map(|&n| gaussian_matrix(n, n, rng)).collect();
    alg.element(blocks).expect("shapes match")
}

pub fn random_hermitian<R: Rng + ?Sized>(alg: &Algebra, rng: &mut R) -> Element {
    random_element(alg, rng).map_blocks(|g| (g + g.adjoint()) * C64::new(0.5, 0.0))
}

/// Positive element with a Wishart block in every summand.
pub fn random_positive<R: Rng + ?Sized>(alg: &Algebra, rng: &mut R) -> Element {
    let blocks = alg.block_dims().iter().map(|&n| wishart(n, rng)).collect();
    alg.element(blocks).expect("shapes match")
}

/// Rank-one positive element supported in a single random block.
pub fn random_pure_state<R: Rng + ?Sized>(alg: &Algebra, rng: &mut R) -> Element {
    let k = rng.random_range(0..alg.num_blocks());
    let mut x = alg.zero();
    *x.block_mut(k) = random_projector(alg.block_dims()[k], rng);
    x
}

pub fn random_unitary<R: Rng + ?Sized>(alg: &Algebra, rng: &mut R) -> Element {
    let blocks = alg.block_dims().iter().map(|&n| haar_unitary(n, rng)).collect();
    alg.element(blocks).expect("shapes match")
}
