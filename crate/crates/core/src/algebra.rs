//! Finite-dimensional C*-algebras `M_{n_1} ⊕ … ⊕ M_{n_m}` and their elements.
//!
//! Elements are stored block-wise. The coordinate vector of an element lists
//! the blocks in order, each block column-major; superoperator matrices act on
//! this vectorization.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "AlgebraDoc", into = "AlgebraDoc")]
pub struct Algebra {
    block_dims: Vec<usize>,
    offsets: Vec<usize>,
    total_dim: usize,
}

#[derive(Serialize, Deserialize)]
struct AlgebraDoc {
    blocks: Vec<usize>,
}

impl TryFrom<AlgebraDoc> for Algebra {
    type Error = Error;
    fn try_from(doc: AlgebraDoc) -> Result<Self> {
        Algebra::new(&doc.blocks)
    }
}

impl From<Algebra> for AlgebraDoc {
    fn from(a: Algebra) -> Self {
        AlgebraDoc { blocks: a.block_dims }
    }
}

impl Algebra {
    pub fn new(block_dims: &[usize]) -> Result<Self> {
        if block_dims.is_empty() {
            return invalid("an algebra needs at least one block");
        }
        if block_dims.contains(&0) {
            return invalid(format!("block dimensions must be positive, got {block_dims:?}"));
        }
        let mut offsets = Vec::with_capacity(block_dims.len());
        let mut total = 0;
        for &n in block_dims {
            offsets.push(total);
            total += n * n;
        }
        Ok(Algebra { block_dims: block_dims.to_vec(), offsets, total_dim: total })
    }

    /// The commutative algebra `ℂⁿ`.
    pub fn commutative(n: usize) -> Result<Self> {
        Algebra::new(&vec![1; n])
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    /// `Σ n_k²`, the complex dimension.
    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// `Σ n_k`, the side of the smallest full matrix algebra containing this one.
    pub fn embedding_dim(&self) -> usize {
        self.block_dims.iter().sum()
    }

    pub fn is_commutative(&self) -> bool {
        self.block_dims.iter().all(|&n| n == 1)
    }

    pub fn unit(&self) -> Element {
        Element { blocks: self.block_dims.iter().map(|&n| CMatrix::identity(n, n)).collect() }
    }

    pub fn zero(&self) -> Element {
        Element { blocks: self.block_dims.iter().map(|&n| CMatrix::zeros(n, n)).collect() }
    }

    /// Coordinate index of entry `(row, col)` of block `k`.
    pub fn coord(&self, k: usize, row: usize, col: usize) -> usize {
        self.offsets[k] + col * self.block_dims[k] + row
    }

    /// Inverse of [`Algebra::coord`].
    pub fn locate(&self, idx: usize) -> (usize, usize, usize) {
        let k = match self.offsets.binary_search(&idx) {
            Ok(k) => k,
            Err(k) => k - 1,
        };
        let n = self.block_dims[k];
        let local = idx - self.offsets[k];
        (k, local % n, local / n)
    }

    /// Matrix unit `E_{row,col}` in block `k`.
    pub fn matrix_unit(&self, k: usize, row: usize, col: usize) -> Element {
        let mut e = self.zero();
        e.blocks[k][(row, col)] = ONE;
        e
    }

    /// The coordinate basis, in vectorization order.
    pub fn basis(&self) -> Vec<Element> {
        (0..self.total_dim)
            .map(|i| {
                let (k, r, c) = self.locate(i);
                self.matrix_unit(k, r, c)
            })
            .collect()
    }

    /// A real basis of the self-adjoint part: `E_aa`, `E_ab + E_ba` and
    /// `i(E_ab − E_ba)` for `a < b` in every block.
    pub fn hermitian_basis(&self) -> Vec<Element> {
        let mut out = Vec::with_capacity(self.total_dim);
        for (k, &n) in self.block_dims.iter().enumerate() {
            for a in 0..n {
                out.push(self.matrix_unit(k, a, a));
                for b in a + 1..n {
                    let mut sym = self.zero();
                    sym.blocks[k][(a, b)] = ONE;
                    sym.blocks[k][(b, a)] = ONE;
                    out.push(sym);
                    let mut anti = self.zero();
                    anti.blocks[k][(a, b)] = I;
                    anti.blocks[k][(b, a)] = -I;
                    out.push(anti);
                }
            }
        }
        out
    }

    pub fn element(&self, blocks: Vec<CMatrix>) -> Result<Element> {
        let e = Element { blocks };
        self.check(&e)?;
        Ok(e)
    }

    pub fn from_vector(&self, v: &CVector) -> Result<Element> {
        if v.len() != self.total_dim {
            return invalid(format!("vector of length {} for algebra of dimension {}", v.len(), self.total_dim));
        }
        let blocks = self
            .block_dims
            .iter()
            .zip(&self.offsets)
            .map(|(&n, &off)| CMatrix::from_column_slice(n, n, &v.as_slice()[off..off + n * n]))
            .collect();
        Ok(Element { blocks })
    }

    /// Element with the given diagonal in the commutative case, or one
    /// value per 1×1 block.
    pub fn diagonal_element(&self, values: &[C64]) -> Result<Element> {
        if !self.is_commutative() || values.len() != self.num_blocks() {
            return invalid("diagonal_element needs a commutative algebra and one value per block");
        }
        Ok(Element { blocks: values.iter().map(|&v| CMatrix::from_element(1, 1, v)).collect() })
    }

    pub fn contains(&self, x: &Element) -> bool {
        x.blocks.len() == self.block_dims.len()
            && x.blocks.iter().zip(&self.block_dims).all(|(b, &n)| b.nrows() == n && b.ncols() == n)
    }

    pub fn check(&self, x: &Element) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            invalid(format!("element with block shapes {:?} is not in algebra {:?}", x.shape(), self.block_dims))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    blocks: Vec<CMatrix>,
}

impl Element {
    /// Builds an element, inferring the algebra from the block shapes.
    pub fn from_blocks(blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.is_empty() || blocks.iter().any(|b| b.nrows() != b.ncols() || b.nrows() == 0) {
            return invalid("element blocks must be nonempty square matrices");
        }
        Ok(Element { blocks })
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &CMatrix {
        &self.blocks[k]
    }

    pub fn block_mut(&mut self, k: usize) -> &mut CMatrix {
        &mut self.blocks[k]
    }

    pub fn into_blocks(self) -> Vec<CMatrix> {
        self.blocks
    }

    pub fn shape(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.nrows()).collect()
    }

    pub fn algebra(&self) -> Algebra {
        Algebra::new(&self.shape()).expect("element blocks are nonempty")
    }

    fn same_shape(&self, other: &Element) -> Result<()> {
        if self.shape() == other.shape() {
            Ok(())
        } else {
            invalid(format!("mismatched algebras {:?} and {:?}", self.shape(), other.shape()))
        }
    }

    fn zip_with(&self, other: &Element, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Result<Element> {
        self.same_shape(other)?;
        Ok(Element { blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect() })
    }

    pub fn map_blocks(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Element {
        Element { blocks: self.blocks.iter().map(f).collect() }
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: C64) -> Element {
        self.map_blocks(|b| b * c)
    }

    pub fn scale_real(&self, c: f64) -> Element {
        self.scale(C64::new(c, 0.0))
    }

    pub fn adjoint(&self) -> Element {
        self.map_blocks(|b| b.adjoint())
    }

    pub fn transpose(&self) -> Element {
        self.map_blocks(|b| b.transpose())
    }

    pub fn vectorize(&self) -> CVector {
        let data: Vec<C64> = self.blocks.iter().flat_map(|b| b.as_slice().iter().copied()).collect();
        CVector::from_vec(data)
    }

    /// C*-norm: largest singular value over all blocks.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(spectral_norm).fold(0.0, f64::max)
    }

    /// Euclidean norm of the coordinate vector.
    pub fn frobenius_norm(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Element) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }

    /// `‖x − x*‖` relative to `‖x‖`, compared against `tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let defect = self.sub(&self.adjoint()).expect("same shape").norm();
        defect <= tol * self.norm()
    }

    /// Smallest eigenvalue of the Hermitian part over all blocks.
    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| hermitian_eigen(b).0.iter().copied().fold(f64::INFINITY, f64::min))
            .fold(f64::INFINITY, f64::min)
    }

    /// How far `self` is from the positive cone: the larger of the
    /// anti-Hermitian part's norm and the most negative Hermitian eigenvalue.
    pub fn psd_violation(&self) -> f64 {
        let anti = self.sub(&self.adjoint()).expect("same shape").norm() / 2.0;
        anti.max(-self.min_eigenvalue()).max(0.0)
    }

    pub fn is_positive(&self, tol: f64) -> bool {
        self.psd_violation() <= tol * self.norm()
    }

    pub fn trace(&self) -> C64 {
        self.blocks.iter().map(|b| b.trace()).sum()
    }
}

/// Largest singular value of a dense matrix.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.nrows() == 1 && m.ncols() == 1 {
        return m[(0, 0)].norm();
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Eigenvalues (ascending) and eigenvectors of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let n = h.nrows();
    if n == 1 {
        return (vec![h[(0, 0)].re], CMatrix::identity(1, 1));
    }
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// `x = x₁ + i·x₂` with `x₁ = (x + x*)/2`, `x₂ = (x − x*)/(2i)`, both Hermitian.
pub fn hermitian_parts(x: &Element) -> (Element, Element) {
    let adj = x.adjoint();
    let re = x.add(&adj).expect("same shape").scale_real(0.5);
    let im = x.sub(&adj).expect("same shape").scale(C64::new(0.0, -0.5));
    (re, im)
}

/// `a = a⁺ − a⁻` with orthogonal positive parts, from the blockwise spectral
/// decomposition.
pub fn positive_negative_parts(a: &Element, tol_herm: f64) -> Result<(Element, Element)> {
    if !a.is_hermitian(tol_herm) {
        return invalid("positive_negative_parts needs a Hermitian element");
    }
    let mut plus = Vec::with_capacity(a.blocks.len());
    let mut minus = Vec::with_capacity(a.blocks.len());
    for b in &a.blocks {
        let (vals, vecs) = hermitian_eigen(b);
        let rebuild = |f: &dyn Fn(f64) -> f64| {
            let d = CMatrix::from_diagonal(&CVector::from_iterator(vals.len(), vals.iter().map(|&v| C64::new(f(v), 0.0))));
            &vecs * d * vecs.adjoint()
        };
        plus.push(rebuild(&|v| v.max(0.0)));
        minus.push(rebuild(&|v| (-v).max(0.0)));
    }
    Ok((Element { blocks: plus }, Element { blocks: minus }))
}

/// Positive square root of a positive element (negative eigenvalues clamp to 0).
pub fn positive_sqrt(a: &Element) -> Element {
    a.map_blocks(|b| {
        let (vals, vecs) = hermitian_eigen(b);
        let d = CMatrix::from_diagonal(&CVector::from_iterator(
            vals.len(),
            vals.iter().map(|&v| C64::new(v.max(0.0).sqrt(), 0.0)),
        ));
        &vecs * d * vecs.adjoint()
    })
}

/// Jordan product `x ∘ y = (xy + yx)/2`.
pub fn jordan_product(x: &Element, y: &Element) -> Result<Element> {
    let xy = x.mul(y)?;
    let yx = y.mul(x)?;
    Ok(xy.add(&yx)?.scale_real(0.5))
}

/// The bilinear trace pairing `⟨x, y⟩ = Σ_k tr(x_k y_k)`.
pub fn trace_pairing(x: &Element, y: &Element) -> Result<C64> {
    x.same_shape(y)?;
    Ok(x.blocks
        .iter()
        .zip(&y.blocks)
        .map(|(a, b)| {
            let mut s = ZERO;
            for r in 0..a.nrows() {
                for c in 0..a.ncols() {
                    s += a[(r, c)] * b[(c, r)];
                }
            }
            s
        })
        .sum())
}

/// Element serialization: `{"blocks": [[[re, im], ...], ...]}` with each block
/// given as rows.
#[derive(Serialize, Deserialize)]
struct ElementDoc {
    blocks: Vec<Vec<Vec<[f64; 2]>>>,
}

pub fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect()
}

pub fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return invalid("ragged matrix rows");
    }
    Ok(CMatrix::from_fn(n, m, |r, c| C64::new(rows[r][c][0], rows[r][c][1])))
}

impl Serialize for Element {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ElementDoc { blocks: self.blocks.iter().map(matrix_to_rows).collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Element {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = ElementDoc::deserialize(d)?;
        let blocks = doc
            .blocks
            .iter()
            .map(|rows| matrix_from_rows(rows))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        Element::from_blocks(blocks).map_err(serde::de::Error::custom)
    }
}
