//! Eventually-constant two-sided sequences and the perturbed shift acting on
//! `ℓ∞(ℤ) × ℂ`.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::exact::{rational, rational_string, Gaussian, Scalar, FLOAT_SCALAR_TOL};

/// A two-sided sequence given by its values on `[lo, hi]` and constant tails.
#[derive(Debug, Clone)]
pub struct ExtSeq<S> {
    lo: i64,
    values: Vec<S>,
    tail_left: S,
    tail_right: S,
}

impl<S: Scalar> ExtSeq<S> {
    pub fn new(lo: i64, values: Vec<S>, tail_left: S, tail_right: S) -> Self {
        ExtSeq { lo, values, tail_left, tail_right }
    }

    pub fn constant(c: S) -> Self {
        ExtSeq { lo: 0, values: Vec::new(), tail_left: c.clone(), tail_right: c }
    }

    pub fn zero() -> Self {
        Self::constant(S::zero_value())
    }

    /// The unit `e = (…, 1, 1, …)`.
    pub fn ones() -> Self {
        Self::constant(S::one_value())
    }

    /// The canonical unit vector `e_j`.
    pub fn delta(j: i64) -> Self {
        ExtSeq { lo: j, values: vec![S::one_value()], tail_left: S::zero_value(), tail_right: S::zero_value() }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    /// `lo − 1` for an empty window.
    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn tail_left(&self) -> &S {
        &self.tail_left
    }

    pub fn tail_right(&self) -> &S {
        &self.tail_right
    }

    pub fn get(&self, j: i64) -> S {
        if j < self.lo {
            self.tail_left.clone()
        } else if j > self.hi() {
            self.tail_right.clone()
        } else {
            self.values[(j - self.lo) as usize].clone()
        }
    }

    /// The same sequence with explicit values on `[lo, hi] ⊇` the current window.
    pub fn expanded(&self, lo: i64, hi: i64) -> Self {
        let lo = lo.min(self.lo);
        let hi = hi.max(self.hi());
        ExtSeq {
            lo,
            values: (lo..=hi).map(|j| self.get(j)).collect(),
            tail_left: self.tail_left.clone(),
            tail_right: self.tail_right.clone(),
        }
    }

    /// Smallest window: entries equal to the adjacent tail are dropped.
    pub fn normalized(&self) -> Self {
        let mut start = 0;
        let mut end = self.values.len();
        while start < end && self.values[start].same(&self.tail_left) {
            start += 1;
        }
        while end > start && self.values[end - 1].same(&self.tail_right) {
            end -= 1;
        }
        let lo = if start == end && self.tail_left.same(&self.tail_right) { 0 } else { self.lo + start as i64 };
        ExtSeq { lo, values: self.values[start..end].to_vec(), tail_left: self.tail_left.clone(), tail_right: self.tail_right.clone() }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Self {
        let (lo, hi) = (self.lo.min(other.lo), self.hi().max(other.hi()));
        ExtSeq {
            lo,
            values: (lo..=hi).map(|j| f(&self.get(j), &other.get(j))).collect(),
            tail_left: f(&self.tail_left, &other.tail_left),
            tail_right: f(&self.tail_right, &other.tail_right),
        }
        .normalized()
    }

    pub fn map<T>(&self, f: impl Fn(&S) -> T) -> ExtSeq<T> {
        ExtSeq { lo: self.lo, values: self.values.iter().map(&f).collect(), tail_left: f(&self.tail_left), tail_right: f(&self.tail_right) }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, S::plus)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, S::minus)
    }

    /// Entrywise product.
    pub fn times(&self, other: &Self) -> Self {
        self.zip_with(other, S::times)
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|v| v.times(c)).normalized()
    }

    /// `Rˢ`, with `(Rx)(j) = x(j − 1)`.
    pub fn shifted(&self, s: i64) -> Self {
        ExtSeq { lo: self.lo + s, ..self.clone() }
    }

    pub fn right_shift(&self) -> Self {
        self.shifted(1)
    }

    /// `(Lx)(j) = x(j + 1)`.
    pub fn left_shift(&self) -> Self {
        self.shifted(-1)
    }

    /// Multiplies the entry at `j` by `c`.
    pub fn times_at(&self, j: i64, c: &S) -> Self {
        let current = self.get(j);
        if current.vanishes() {
            return self.clone();
        }
        let mut out = self.expanded(j, j);
        out.values[(j - out.lo) as usize] = current.times(c);
        out.normalized()
    }

    /// Adds `c` to the entry at `j`.
    pub fn add_at(&self, j: i64, c: &S) -> Self {
        if c.vanishes() {
            return self.clone();
        }
        let mut out = self.expanded(j, j);
        let k = (j - out.lo) as usize;
        out.values[k] = out.values[k].plus(c);
        out.normalized()
    }

    /// `M`: halves the entry at index 0.
    pub fn mul_m(&self) -> Self {
        self.times_at(0, &S::from_rational(&rational(1, 2)))
    }

    pub fn mul_m_inv(&self) -> Self {
        self.times_at(0, &S::from_rational(&rational(2, 1)))
    }

    /// Window values followed by both tails.
    pub fn entries(&self) -> impl Iterator<Item = &S> {
        self.values.iter().chain([&self.tail_left, &self.tail_right])
    }

    /// `sup |x(j)|` in floating point.
    pub fn norm_f64(&self) -> f64 {
        self.entries().map(|v| v.to_c64().norm()).fold(0.0, f64::max)
    }
}

impl ExtSeq<BigRational> {
    /// Exact sup-norm.
    pub fn norm(&self) -> BigRational {
        self.entries().map(|v| v.abs()).fold(BigRational::zero(), |a, b| if b > a { b } else { a })
    }
}

impl ExtSeq<Gaussian> {
    /// Exact square of the sup-norm.
    pub fn norm_sq(&self) -> BigRational {
        self.entries().map(Gaussian::norm_sq).fold(BigRational::zero(), |a, b| if b > a { b } else { a })
    }
}

impl<S: Scalar> PartialEq for ExtSeq<S> {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = (self.normalized(), other.normalized());
        a.lo == b.lo
            && a.values.len() == b.values.len()
            && a.values.iter().zip(&b.values).all(|(x, y)| x.same(y))
            && a.tail_left.same(&b.tail_left)
            && a.tail_right.same(&b.tail_right)
    }
}

/// Text form: `{"lo", "hi", "values", "tail_left", "tail_right"}` with every
/// scalar an `[re, im]` pair of `"p/q"` strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtSeqDoc {
    pub lo: i64,
    pub hi: i64,
    pub values: Vec<Gaussian>,
    pub tail_left: Gaussian,
    pub tail_right: Gaussian,
}

impl From<&ExtSeq<Gaussian>> for ExtSeqDoc {
    fn from(s: &ExtSeq<Gaussian>) -> Self {
        ExtSeqDoc { lo: s.lo, hi: s.hi(), values: s.values.clone(), tail_left: s.tail_left.clone(), tail_right: s.tail_right.clone() }
    }
}

impl TryFrom<ExtSeqDoc> for ExtSeq<Gaussian> {
    type Error = crate::error::Error;
    fn try_from(d: ExtSeqDoc) -> crate::error::Result<Self> {
        if d.hi - d.lo + 1 != d.values.len() as i64 {
            return Err(crate::error::Error::InvalidArgument(format!(
                "window [{}, {}] does not match {} values",
                d.lo,
                d.hi,
                d.values.len()
            )));
        }
        Ok(ExtSeq::new(d.lo, d.values, d.tail_left, d.tail_right))
    }
}

impl Serialize for ExtSeq<Gaussian> {
    fn serialize<Z: serde::Serializer>(&self, s: Z) -> Result<Z::Ok, Z::Error> {
        ExtSeqDoc::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExtSeq<Gaussian> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        ExtSeq::try_from(ExtSeqDoc::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Order structure of the scalars that can be positive.
pub trait Nonnegative {
    fn is_nonneg(&self) -> bool;
}

impl Nonnegative for BigRational {
    fn is_nonneg(&self) -> bool {
        !self.is_negative()
    }
}

impl Nonnegative for Gaussian {
    fn is_nonneg(&self) -> bool {
        self.is_real_nonneg()
    }
}

impl Nonnegative for Complex64 {
    fn is_nonneg(&self) -> bool {
        self.im.abs() <= FLOAT_SCALAR_TOL && self.re >= -FLOAT_SCALAR_TOL
    }
}

/// An element `(x, α)` of `ℓ∞(ℤ) × ℂ`.
#[derive(Debug, Clone)]
pub struct ShiftElement<S> {
    pub seq: ExtSeq<S>,
    pub alpha: S,
}

impl<S: Scalar> ShiftElement<S> {
    pub fn new(seq: ExtSeq<S>, alpha: S) -> Self {
        ShiftElement { seq, alpha }
    }

    /// `𝟙 = (e, 1)`.
    pub fn unit() -> Self {
        ShiftElement { seq: ExtSeq::ones(), alpha: S::one_value() }
    }

    pub fn zero() -> Self {
        ShiftElement { seq: ExtSeq::zero(), alpha: S::zero_value() }
    }

    pub fn add(&self, other: &Self) -> Self {
        ShiftElement { seq: self.seq.add(&other.seq), alpha: self.alpha.plus(&other.alpha) }
    }

    pub fn scale(&self, c: &S) -> Self {
        ShiftElement { seq: self.seq.scale(c), alpha: self.alpha.times(c) }
    }

    pub fn norm_f64(&self) -> f64 {
        self.seq.norm_f64().max(self.alpha.to_c64().norm())
    }
}

impl<S: Scalar + Nonnegative> ShiftElement<S> {
    /// All entries, both tails and `α` are real and nonnegative.
    pub fn is_positive(&self) -> bool {
        self.seq.entries().all(Nonnegative::is_nonneg) && self.alpha.is_nonneg()
    }
}

impl ShiftElement<BigRational> {
    pub fn norm(&self) -> BigRational {
        let a = self.alpha.abs();
        let s = self.seq.norm();
        if a > s {
            a
        } else {
            s
        }
    }
}

impl<S: Scalar> PartialEq for ShiftElement<S> {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq && self.alpha.same(&other.alpha)
    }
}

#[derive(Serialize)]
struct ShiftElementDoc<'a> {
    x: &'a ExtSeq<Gaussian>,
    alpha: &'a Gaussian,
}

impl Serialize for ShiftElement<Gaussian> {
    fn serialize<Z: serde::Serializer>(&self, s: Z) -> Result<Z::Ok, Z::Error> {
        ShiftElementDoc { x: &self.seq, alpha: &self.alpha }.serialize(s)
    }
}

/// `T(x, α) = (RMx + ½αe₁, α)`.
pub fn shift_apply<S: Scalar>(xi: &ShiftElement<S>) -> ShiftElement<S> {
    let half = S::from_rational(&rational(1, 2));
    ShiftElement { seq: xi.seq.mul_m().right_shift().add_at(1, &xi.alpha.times(&half)), alpha: xi.alpha.clone() }
}

/// `T⁻¹(x, α) = (M⁻¹Lx − αe₀, α)`.
pub fn shift_inverse_apply<S: Scalar>(xi: &ShiftElement<S>) -> ShiftElement<S> {
    ShiftElement { seq: xi.seq.left_shift().mul_m_inv().add_at(0, &xi.alpha.negated()), alpha: xi.alpha.clone() }
}

/// An operator of the form `(x, α) ↦ (w ⊙ Rˢx + α·a, α)`. Every power of
/// the perturbed shift has this form.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftOperator {
    pub s: i64,
    pub w: ExtSeq<BigRational>,
    pub a: ExtSeq<BigRational>,
}

impl ShiftOperator {
    pub fn identity() -> Self {
        ShiftOperator { s: 0, w: ExtSeq::ones(), a: ExtSeq::zero() }
    }

    /// `T`: `w(j) = m_{j−1}`, `a = ½e₁`.
    pub fn forward() -> Self {
        ShiftOperator {
            s: 1,
            w: ExtSeq::ones().times_at(1, &rational(1, 2)),
            a: ExtSeq::delta(1).scale(&rational(1, 2)),
        }
    }

    /// `T⁻¹`: `w(j) = 1/m_j`, `a = −e₀`.
    pub fn backward() -> Self {
        ShiftOperator { s: -1, w: ExtSeq::ones().times_at(0, &rational(2, 1)), a: ExtSeq::delta(0).scale(&rational(-1, 1)) }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &ShiftOperator) -> ShiftOperator {
        ShiftOperator {
            s: self.s + other.s,
            w: self.w.times(&other.w.shifted(self.s)),
            a: self.w.times(&other.a.shifted(self.s)).add(&self.a),
        }
    }

    /// `Tⁿ` for any integer `n`.
    pub fn power(n: i64) -> ShiftOperator {
        let step = if n >= 0 { ShiftOperator::forward() } else { ShiftOperator::backward() };
        (0..n.unsigned_abs()).fold(ShiftOperator::identity(), |acc, _| step.compose(&acc))
    }

    pub fn apply(&self, xi: &ShiftElement<BigRational>) -> ShiftElement<BigRational> {
        ShiftElement { seq: self.w.times(&xi.seq.shifted(self.s)).add(&self.a.scale(&xi.alpha)), alpha: xi.alpha.clone() }
    }

    /// Operator norm on the sup-norm: the largest absolute coefficient sum of
    /// an output coordinate, `sup_j |w(j)| + |a(j)|`, and `1` for `α`.
    pub fn norm(&self) -> BigRational {
        let sums = self.w.map(|v| v.abs()).add(&self.a.map(|v| v.abs()));
        let one = BigRational::from_integer(1.into());
        let n = sums.norm();
        if n > one {
            n
        } else {
            one
        }
    }
}

/// Exact `‖Tⁿ‖`.
pub fn shift_power_norm(n: i64) -> BigRational {
    ShiftOperator::power(n).norm()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftPositivityReport {
    pub witness_input: ShiftElement<Gaussian>,
    pub witness_output: ShiftElement<Gaussian>,
    pub inverse_positive_at_witness: bool,
    pub samples: usize,
    pub forward_failures: usize,
    pub unit_fixed: bool,
}

/// The witness `(0, 1) ↦ (−e₀, 1)` against positivity of `T⁻¹`, and a sampled
/// check that `T` preserves positivity.
pub fn shift_positivity_report<R: Rng + ?Sized>(samples: usize, rng: &mut R) -> ShiftPositivityReport {
    let input = ShiftElement::new(ExtSeq::zero(), Gaussian::from_ints(1, 0));
    let output = shift_inverse_apply(&input);
    let forward_failures = (0..samples)
        .filter(|_| {
            let xi = random_positive_element(rng);
            !shift_apply(&xi).is_positive()
        })
        .count();
    let unit = ShiftElement::<Gaussian>::unit();
    ShiftPositivityReport {
        inverse_positive_at_witness: output.is_positive(),
        witness_input: input,
        witness_output: output,
        samples,
        forward_failures,
        unit_fixed: shift_apply(&unit) == unit && shift_inverse_apply(&unit) == unit,
    }
}

fn random_rational<R: Rng + ?Sized>(rng: &mut R, signed: bool) -> BigRational {
    let den = rng.random_range(1..=12);
    let num = if signed { rng.random_range(-24..=24) } else { rng.random_range(0..=24) };
    rational(num, den)
}

fn random_sequence<R: Rng + ?Sized>(rng: &mut R, signed: bool) -> ExtSeq<Gaussian> {
    let lo = rng.random_range(-6..=6);
    let len = rng.random_range(0..=8);
    let draw = |rng: &mut R| {
        if signed {
            Gaussian::new(random_rational(rng, true), random_rational(rng, true))
        } else {
            Gaussian::real(random_rational(rng, false))
        }
    };
    let values = (0..len).map(|_| draw(rng)).collect();
    ExtSeq::new(lo, values, draw(rng), draw(rng))
}

/// Random element with nonnegative rational entries, tails and `α`.
pub fn random_positive_element<R: Rng + ?Sized>(rng: &mut R) -> ShiftElement<Gaussian> {
    ShiftElement::new(random_sequence(rng, false), Gaussian::real(random_rational(rng, false)))
}

/// Random element with Gaussian-rational entries.
pub fn random_element<R: Rng + ?Sized>(rng: &mut R) -> ShiftElement<Gaussian> {
    let alpha = Gaussian::new(random_rational(rng, true), random_rational(rng, true));
    ShiftElement::new(random_sequence(rng, true), alpha)
}

#[derive(Serialize)]
pub struct NormRow {
    pub n: i64,
    #[serde(with = "rational_string")]
    pub norm: BigRational,
}

/// `‖Tⁿ‖` for `−max ≤ n ≤ max`.
pub fn norm_table(max: i64) -> Vec<NormRow> {
    let mut rows = Vec::new();
    let mut fwd = ShiftOperator::identity();
    let mut bwd = ShiftOperator::identity();
    rows.push(NormRow { n: 0, norm: fwd.norm() });
    for n in 1..=max {
        fwd = ShiftOperator::forward().compose(&fwd);
        bwd = ShiftOperator::backward().compose(&bwd);
        rows.push(NormRow { n, norm: fwd.norm() });
        rows.push(NormRow { n: -n, norm: bwd.norm() });
    }
    rows.sort_by_key(|r| r.n);
    rows
}
