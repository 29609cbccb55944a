//! Linear maps on an [`Algebra`], stored as dense matrices over the
//! coordinate basis.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{spectral_norm, Algebra, CMatrix, CVector, Element, C64, ONE, ZERO};
use crate::config::Config;
use crate::error::{invalid, Error, Result};
use crate::positivity::{self, Status, Verdict};
use crate::random;

#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    algebra: Algebra,
    matrix: CMatrix,
}

/// An inverse together with the condition number of the inverted matrix.
#[derive(Debug, Clone)]
pub struct Inverse {
    pub map: Superoperator,
    pub condition: f64,
}

/// Operator norm on the C*-norm, exact when it can be, else bracketed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum MapNorm {
    /// `‖T‖ = ‖T(1)‖`, valid for positive maps.
    PositiveUnit { value: f64 },
    /// Maximal absolute row sum, exact on commutative algebras.
    RowSums { value: f64 },
    Interval { lower: f64, upper: f64 },
}

impl MapNorm {
    pub fn upper(&self) -> f64 {
        match *self {
            MapNorm::PositiveUnit { value } | MapNorm::RowSums { value } => value,
            MapNorm::Interval { upper, .. } => upper,
        }
    }

    pub fn lower(&self) -> f64 {
        match *self {
            MapNorm::PositiveUnit { value } | MapNorm::RowSums { value } => value,
            MapNorm::Interval { lower, .. } => lower,
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, MapNorm::Interval { .. })
    }
}

impl Superoperator {
    pub fn new(algebra: Algebra, matrix: CMatrix) -> Result<Self> {
        let d = algebra.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return invalid(format!(
                "matrix is {}x{} but the algebra has dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            ));
        }
        Ok(Superoperator { algebra, matrix })
    }

    /// Builds the matrix column by column from the images of the basis.
    pub fn from_fn(algebra: &Algebra, f: impl Fn(&Element) -> Element) -> Result<Self> {
        let d = algebra.total_dim();
        let mut m = CMatrix::zeros(d, d);
        for (j, e) in algebra.basis().iter().enumerate() {
            let y = f(e);
            algebra.check(&y)?;
            m.set_column(j, &y.vectorize());
        }
        Superoperator::new(algebra.clone(), m)
    }

    pub fn identity(algebra: &Algebra) -> Self {
        let d = algebra.total_dim();
        Superoperator { algebra: algebra.clone(), matrix: CMatrix::identity(d, d) }
    }

    /// Blockwise transpose.
    pub fn transpose(algebra: &Algebra) -> Self {
        Self::partial_transpose(algebra, &vec![true; algebra.num_blocks()])
    }

    /// Transposes the blocks flagged in `which` and leaves the rest alone.
    pub fn partial_transpose(algebra: &Algebra, which: &[bool]) -> Self {
        let d = algebra.total_dim();
        let mut m = CMatrix::zeros(d, d);
        for i in 0..d {
            let (k, r, c) = algebra.locate(i);
            let target = if which[k] { algebra.coord(k, c, r) } else { i };
            m[(target, i)] = ONE;
        }
        Superoperator { algebra: algebra.clone(), matrix: m }
    }

    /// `x ↦ u x u*`.
    pub fn unitary_conjugation(u: &Element) -> Result<Self> {
        let alg = u.algebra();
        let ua = u.adjoint();
        Self::from_fn(&alg, |x| u.mul(x).and_then(|y| y.mul(&ua)).expect("same algebra"))
    }

    /// `x ↦ Σ_i K_i x K_i*`.
    pub fn kraus(algebra: &Algebra, ops: &[Element]) -> Result<Self> {
        if ops.is_empty() {
            return invalid("a Kraus representation needs at least one operator");
        }
        for k in ops {
            algebra.check(k)?;
        }
        Self::from_fn(algebra, |x| {
            ops.iter().fold(algebra.zero(), |acc, k| {
                let y = k.mul(x).and_then(|y| y.mul(&k.adjoint())).expect("same algebra");
                acc.add(&y).expect("same algebra")
            })
        })
    }

    /// A matrix acting on `ℂⁿ`, the commutative algebra with `n` one-dimensional blocks.
    pub fn stochastic(s: &nalgebra::DMatrix<f64>) -> Result<Self> {
        if s.nrows() != s.ncols() || s.nrows() == 0 {
            return invalid("a matrix on ℂⁿ must be square and nonempty");
        }
        let alg = Algebra::commutative(s.nrows())?;
        Superoperator::new(alg, s.map(|v| C64::new(v, 0.0)))
    }

    /// Block permutation: block `k` of the input lands in block `perm[k]`.
    pub fn block_permutation(algebra: &Algebra, perm: &[usize]) -> Result<Self> {
        let dims = algebra.block_dims();
        let mut seen = vec![false; dims.len()];
        if perm.len() != dims.len() {
            return invalid("permutation length differs from the number of blocks");
        }
        for (k, &p) in perm.iter().enumerate() {
            if p >= dims.len() || seen[p] || dims[p] != dims[k] {
                return invalid(format!("{perm:?} is not a permutation of equal-sized blocks"));
            }
            seen[p] = true;
        }
        let d = algebra.total_dim();
        let mut m = CMatrix::zeros(d, d);
        for i in 0..d {
            let (k, r, c) = algebra.locate(i);
            m[(algebra.coord(perm[k], r, c), i)] = ONE;
        }
        Superoperator::new(algebra.clone(), m)
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, x: &Element) -> Result<Element> {
        self.algebra.check(x)?;
        self.algebra.from_vector(&(&self.matrix * x.vectorize()))
    }

    fn same_algebra(&self, other: &Superoperator) -> Result<()> {
        if self.algebra == other.algebra {
            Ok(())
        } else {
            invalid(format!(
                "maps act on different algebras {:?} and {:?}",
                self.algebra.block_dims(),
                other.algebra.block_dims()
            ))
        }
    }

    fn with_matrix(&self, matrix: CMatrix) -> Superoperator {
        Superoperator { algebra: self.algebra.clone(), matrix }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Superoperator) -> Result<Superoperator> {
        self.same_algebra(other)?;
        Ok(self.with_matrix(&self.matrix * &other.matrix))
    }

    pub fn add(&self, other: &Superoperator) -> Result<Superoperator> {
        self.same_algebra(other)?;
        Ok(self.with_matrix(&self.matrix + &other.matrix))
    }

    pub fn sub(&self, other: &Superoperator) -> Result<Superoperator> {
        self.same_algebra(other)?;
        Ok(self.with_matrix(&self.matrix - &other.matrix))
    }

    pub fn scale(&self, c: C64) -> Superoperator {
        self.with_matrix(&self.matrix * c)
    }

    /// `Tⁿ` by repeated squaring.
    pub fn power(&self, n: u64) -> Superoperator {
        self.with_matrix(matrix_power(&self.matrix, n))
    }

    /// Spectral norm of the representing matrix.
    pub fn matrix_norm(&self) -> f64 {
        spectral_norm(&self.matrix)
    }

    /// `‖self − other‖` in the spectral norm of the representing matrices.
    pub fn distance(&self, other: &Superoperator) -> f64 {
        spectral_norm(&(&self.matrix - &other.matrix))
    }

    /// Inverse via the singular value decomposition; fails when the smallest
    /// singular value is below `sing · largest`.
    pub fn inverse(&self, sing: f64) -> Result<Inverse> {
        let svd = self.matrix.clone().svd(true, true);
        let s = &svd.singular_values;
        let largest = s.iter().copied().fold(0.0, f64::max);
        let smallest = s.iter().copied().fold(f64::INFINITY, f64::min);
        if !(smallest > sing * largest) {
            return Err(Error::SingularOperator { smallest, largest });
        }
        let u = svd.u.as_ref().expect("requested");
        let vt = svd.v_t.as_ref().expect("requested");
        let inv_s = CMatrix::from_diagonal(&CVector::from_iterator(s.len(), s.iter().map(|&v| C64::new(1.0 / v, 0.0))));
        let m = vt.adjoint() * inv_s * u.adjoint();
        Ok(Inverse { map: self.with_matrix(m), condition: largest / smallest })
    }

    /// Adjoint for the bilinear trace pairing: `⟨T x, y⟩ = ⟨x, T_* y⟩`.
    ///
    /// With `J` the blockwise transpose permutation of coordinates this is `J Mᵀ J`.
    pub fn pre_adjoint(&self) -> Superoperator {
        let alg = &self.algebra;
        let d = alg.total_dim();
        let j: Vec<usize> = (0..d)
            .map(|i| {
                let (k, r, c) = alg.locate(i);
                alg.coord(k, c, r)
            })
            .collect();
        let m = CMatrix::from_fn(d, d, |r, c| self.matrix[(j[c], j[r])]);
        self.with_matrix(m)
    }

    /// Choi matrix of the map extended to `M_N`, `N = Σ n_k`, by compressing
    /// to the block diagonal first.
    pub fn choi_matrix(&self) -> ChoiMatrix {
        let alg = &self.algebra;
        let dims = alg.block_dims();
        let n = alg.embedding_dim();
        let starts: Vec<usize> = dims.iter().scan(0, |acc, &d| {
            let s = *acc;
            *acc += d;
            Some(s)
        }).collect();
        let mut c = CMatrix::zeros(n * n, n * n);
        for col in 0..alg.total_dim() {
            let (k, i, j) = alg.locate(col);
            let gi = starts[k] + i;
            let gj = starts[k] + j;
            for row in 0..alg.total_dim() {
                let v = self.matrix[(row, col)];
                if v == ZERO {
                    continue;
                }
                let (l, a, b) = alg.locate(row);
                let ga = starts[l] + a;
                let gb = starts[l] + b;
                c[(gi * n + ga, gj * n + gb)] = v;
            }
        }
        ChoiMatrix { matrix: c, embedding_dim: n }
    }

    /// `T ⊗ id_n` on the algebra whose block dimensions are multiplied by `n`.
    ///
    /// Block `k` of the ampliated algebra is `M_n(M_{n_k})`: the entry
    /// `(p·n_k + a, q·n_k + b)` is entry `(a, b)` of the `(p, q)` sub-block.
    pub fn ampliation(&self, n: usize) -> Result<Superoperator> {
        if n < 1 {
            return invalid("ampliation order must be at least 1");
        }
        if n == 1 {
            return Ok(self.clone());
        }
        let alg = &self.algebra;
        let dims = alg.block_dims();
        let big = Algebra::new(&dims.iter().map(|&d| d * n).collect::<Vec<_>>())?;
        let d = big.total_dim();
        let mut m = CMatrix::zeros(d, d);
        for col in 0..alg.total_dim() {
            let (k, a, b) = alg.locate(col);
            for row in 0..alg.total_dim() {
                let v = self.matrix[(row, col)];
                if v == ZERO {
                    continue;
                }
                let (l, ra, rb) = alg.locate(row);
                for p in 0..n {
                    for q in 0..n {
                        let src = big.coord(k, p * dims[k] + a, q * dims[k] + b);
                        let dst = big.coord(l, p * dims[l] + ra, q * dims[l] + rb);
                        m[(dst, src)] = v;
                    }
                }
            }
        }
        Superoperator::new(big, m)
    }

    /// `‖T(1) − 1‖`.
    pub fn unit_defect(&self) -> f64 {
        let u = self.algebra.unit();
        self.apply(&u).expect("own algebra").sub(&u).expect("same algebra").norm()
    }

    /// Norm on the C*-norm. Exact for maps that `positive` certifies and on
    /// commutative algebras; otherwise an interval with a sampled lower bound
    /// and the upper bound `‖M‖₂·√(Σ n_k)`.
    pub fn map_norm_given(&self, positive: &Verdict, cfg: &Config) -> MapNorm {
        if positive.status == Status::Certified {
            let value = self.apply(&self.algebra.unit()).expect("own algebra").norm();
            return MapNorm::PositiveUnit { value };
        }
        if self.algebra.is_commutative() {
            let value = self.matrix.row_iter().map(|r| r.iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max);
            return MapNorm::RowSums { value };
        }
        let upper = self.matrix_norm() * (self.algebra.embedding_dim() as f64).sqrt();
        let mut rng = cfg.rng(0x4e4f524d);
        let mut lower = self.apply(&self.algebra.unit()).expect("own algebra").norm();
        let mut probe = |x: Element| {
            let nx = x.norm();
            if nx > 0.0 {
                lower = lower.max(self.apply(&x).expect("own algebra").norm() / nx);
            }
        };
        for e in self.algebra.hermitian_basis() {
            probe(e);
        }
        for i in 0..cfg.samples {
            let x = if i % 2 == 0 {
                random::random_hermitian(&self.algebra, &mut rng)
            } else {
                random::random_unitary(&self.algebra, &mut rng)
            };
            probe(x);
        }
        MapNorm::Interval { lower: lower.min(upper), upper }
    }

    pub fn map_norm(&self, cfg: &Config) -> MapNorm {
        self.map_norm_given(&positivity::check_positive(self, cfg), cfg)
    }

    /// Random map with i.i.d. complex Gaussian matrix entries scaled to spectral norm `scale`.
    pub fn random<R: Rng + ?Sized>(algebra: &Algebra, scale: f64, rng: &mut R) -> Superoperator {
        let d = algebra.total_dim();
        let g = random::gaussian_matrix(d, d, rng);
        let n = spectral_norm(&g);
        Superoperator { algebra: algebra.clone(), matrix: g * C64::new(scale / n, 0.0) }
    }
}

pub fn matrix_power(m: &CMatrix, mut n: u64) -> CMatrix {
    let d = m.nrows();
    let mut result = CMatrix::identity(d, d);
    let mut base = m.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Choi matrix `Σ_ij E_ij ⊗ T(E_ij)` over `M_N`; row index `i·N + a`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    matrix: CMatrix,
    embedding_dim: usize,
}

impl ChoiMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn embedding_dim(&self) -> usize {
        self.embedding_dim
    }

    /// `‖C − C*‖`.
    pub fn hermitian_defect(&self) -> f64 {
        spectral_norm(&(&self.matrix - self.matrix.adjoint()))
    }

    /// Eigenvalues of the Hermitian part, ascending, with eigenvectors as columns.
    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        crate::algebra::hermitian_eigen(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen().0[0]
    }

    pub fn norm(&self) -> f64 {
        spectral_norm(&self.matrix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::I;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m2() -> Algebra {
        Algebra::new(&[2]).unwrap()
    }

    fn depolarizing(alg: &Algebra) -> Superoperator {
        let n = alg.block_dims()[0] as f64;
        Superoperator::from_fn(alg, |x| alg.unit().scale(x.trace() / n)).unwrap()
    }

    #[test]
    fn apply_examples() {
        let a = m2();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random::random_element(&a, &mut rng);
        assert_eq!(Superoperator::identity(&a).apply(&x).unwrap(), x);
        let t = Superoperator::transpose(&a);
        assert_eq!(t.apply(&a.matrix_unit(0, 0, 1)).unwrap(), a.matrix_unit(0, 1, 0));
        let s = nalgebra::DMatrix::from_row_slice(3, 3, &[0.2, 0.3, 0.5, 1.0, 0.0, 0.0, 0.25, 0.25, 0.5]);
        let s = Superoperator::stochastic(&s).unwrap();
        let u = s.algebra().unit();
        assert!(s.apply(&u).unwrap().max_abs_diff(&u) < 1e-15);
        assert!(t.apply(&Algebra::new(&[1]).unwrap().unit()).is_err());
    }

    #[test]
    fn compose_and_power_examples() {
        let a = Algebra::new(&[2, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = Superoperator::random(&a, 1.0, &mut rng);
        assert_eq!(t.compose(&Superoperator::identity(&a)).unwrap(), t);
        let tr = Superoperator::transpose(&a);
        assert_eq!(tr.power(2), Superoperator::identity(&a));
        assert_eq!(tr.power(0), Superoperator::identity(&a));

        let c = Algebra::commutative(2).unwrap();
        let rot = Superoperator::new(c.clone(), CMatrix::from_diagonal(&CVector::from_vec(vec![I, ONE]))).unwrap();
        assert!(rot.power(4).distance(&Superoperator::identity(&c)) < 1e-15);
        assert!(rot.power(2).distance(&Superoperator::identity(&c)) > 1.0);
        assert!(t.compose(&Superoperator::identity(&c)).is_err());
    }

    #[test]
    fn inverse_examples() {
        let a = m2();
        let inv = Superoperator::identity(&a).inverse(1e-12).unwrap();
        assert!(inv.map.distance(&Superoperator::identity(&a)) < 1e-14);
        assert!((inv.condition - 1.0).abs() < 1e-12);
        match depolarizing(&a).inverse(1e-12) {
            Err(Error::SingularOperator { smallest, .. }) => assert!(smallest < 1e-12),
            other => panic!("expected a singular operator, got {other:?}"),
        }
    }

    #[test]
    fn pre_adjoint_examples() {
        let a = Algebra::new(&[2, 1]).unwrap();
        assert_eq!(Superoperator::identity(&a).pre_adjoint(), Superoperator::identity(&a));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random::random_unitary(&a, &mut rng);
        let ad = Superoperator::unitary_conjugation(&u).unwrap();
        let ad_star = Superoperator::unitary_conjugation(&u.adjoint()).unwrap();
        assert!(ad.pre_adjoint().distance(&ad_star) < 1e-12);

        let s = nalgebra::DMatrix::from_row_slice(2, 2, &[0.1, 0.9, 0.7, 0.3]);
        let t = Superoperator::stochastic(&s).unwrap();
        assert_eq!(t.pre_adjoint().matrix(), &t.matrix().transpose());
    }

    #[test]
    fn choi_examples() {
        let a = m2();
        // Oracle: Σ E_ij ⊗ E_ij = 2|Ω⟩⟨Ω| with Ω = (e₀⊗e₀ + e₁⊗e₁)/√2.
        let c = Superoperator::identity(&a).choi_matrix();
        let mut want = CMatrix::zeros(4, 4);
        for &i in &[0usize, 3] {
            for &j in &[0usize, 3] {
                want[(i, j)] = ONE;
            }
        }
        assert_eq!(c.matrix(), &want);
        let (vals, _) = c.eigen();
        for (v, w) in vals.iter().zip([0.0, 0.0, 0.0, 2.0]) {
            assert!((v - w).abs() < 1e-12);
        }

        // Transpose: the swap operator.
        let c = Superoperator::transpose(&a).choi_matrix();
        let swap = CMatrix::from_fn(4, 4, |r, col| if r == (col % 2) * 2 + col / 2 { ONE } else { ZERO });
        assert_eq!(c.matrix(), &swap);
        let (vals, _) = c.eigen();
        for (v, w) in vals.iter().zip([-1.0, 1.0, 1.0, 1.0]) {
            assert!((v - w).abs() < 1e-12);
        }

        let c = depolarizing(&a).choi_matrix();
        assert!((c.matrix() - CMatrix::identity(4, 4) * C64::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn ampliation_examples() {
        let a = Algebra::new(&[2, 1]).unwrap();
        let id3 = Superoperator::identity(&a).ampliation(3).unwrap();
        assert_eq!(id3, Superoperator::identity(&Algebra::new(&[6, 3]).unwrap()));
        assert!(Superoperator::identity(&a).ampliation(0).is_err());

        // Partial transpose of the maximally entangled state is not positive.
        let m = m2();
        let t2 = Superoperator::transpose(&m).ampliation(2).unwrap();
        let choi = Superoperator::identity(&m).choi_matrix();
        let state = t2.algebra().element(vec![choi.matrix().clone()]).unwrap();
        assert!(state.is_positive(1e-12));
        let image = t2.apply(&state).unwrap();
        assert!((image.min_eigenvalue() + 1.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random::random_unitary(&a, &mut rng);
        let t = Superoperator::unitary_conjugation(&u).unwrap();
        assert!(t.ampliation(2).unwrap().unit_defect() < 1e-12);
    }

    #[test]
    fn map_norm_examples() {
        let cfg = Config::default().with_samples(50);
        let a = m2();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random::random_unitary(&a, &mut rng);
        let t = Superoperator::unitary_conjugation(&u).unwrap();
        let n = t.map_norm(&cfg);
        assert!(n.is_exact());
        assert!((n.upper() - 1.0).abs() < 1e-12);

        let two = Superoperator::identity(&a).scale(C64::new(2.0, 0.0));
        assert!((two.map_norm(&cfg).upper() - 2.0).abs() < 1e-12);

        let tr = Superoperator::transpose(&a).map_norm(&cfg);
        assert!(matches!(tr, MapNorm::PositiveUnit { .. }));
        assert!((tr.upper() - 1.0).abs() < 1e-12);

        let neg = Superoperator::identity(&a).scale(C64::new(-1.0, 0.0)).map_norm(&cfg);
        assert!(neg.lower() <= 1.0 + 1e-12 && neg.upper() >= 1.0);
    }
}
