//! Eigenvectors of the perturbed shift. They are not eventually constant, so
//! they live in [`GeoSeq`], whose tails are geometric, and are verified through
//! the local stencil `(T(x, α))(j) = m_{j−1}x(j−1) + ½αδ_{j1}`.

use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::seq::ExtSeq;
use crate::error::{invalid, Result};
use crate::exact::{parse_rational, rational, Conjugate, Cyclotomic, Gaussian, Scalar};

/// A two-sided sequence with explicit values on `[lo, hi]` and geometric
/// tails: `x(j) = left_anchor·left_ratio^{lo−1−j}` for `j < lo` and
/// `x(j) = right_anchor·right_ratio^{j−hi−1}` for `j > hi`.
#[derive(Debug, Clone)]
pub struct GeoSeq<S> {
    lo: i64,
    values: Vec<S>,
    left_anchor: S,
    left_ratio: S,
    right_anchor: S,
    right_ratio: S,
}

fn pow<S: Scalar>(base: &S, mut e: u64) -> S {
    let mut acc = S::one_value();
    let mut b = base.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.times(&b);
        }
        b = b.times(&b);
        e >>= 1;
    }
    acc
}

impl<S: Scalar> GeoSeq<S> {
    pub fn new(lo: i64, values: Vec<S>, left: (S, S), right: (S, S)) -> Self {
        GeoSeq { lo, values, left_anchor: left.0, left_ratio: left.1, right_anchor: right.0, right_ratio: right.1 }
    }

    pub fn from_ext(x: &ExtSeq<S>) -> Self {
        GeoSeq::new(x.lo(), x.values().to_vec(), (x.tail_left().clone(), S::one_value()), (x.tail_right().clone(), S::one_value()))
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn get(&self, j: i64) -> S {
        if j < self.lo {
            self.left_anchor.times(&pow(&self.left_ratio, (self.lo - 1 - j) as u64))
        } else if j > self.hi() {
            self.right_anchor.times(&pow(&self.right_ratio, (j - self.hi() - 1) as u64))
        } else {
            self.values[(j - self.lo) as usize].clone()
        }
    }

    /// Pulls tail entries into the window until it covers `[lo, hi]`.
    pub fn expanded(&self, lo: i64, hi: i64) -> Self {
        let mut out = self.clone();
        while out.lo > lo {
            out.values.insert(0, out.left_anchor.clone());
            out.left_anchor = out.left_anchor.times(&out.left_ratio);
            out.lo -= 1;
        }
        while out.hi() < hi {
            out.values.push(out.right_anchor.clone());
            out.right_anchor = out.right_anchor.times(&out.right_ratio);
        }
        out
    }

    pub fn scale(&self, c: &S) -> Self {
        GeoSeq {
            lo: self.lo,
            values: self.values.iter().map(|v| v.times(c)).collect(),
            left_anchor: self.left_anchor.times(c),
            left_ratio: self.left_ratio.clone(),
            right_anchor: self.right_anchor.times(c),
            right_ratio: self.right_ratio.clone(),
        }
    }
}

impl<S: Scalar> PartialEq for GeoSeq<S> {
    /// Equal as sequences: same values on a common window and the same tails
    /// (ratios only matter when the anchor is nonzero).
    fn eq(&self, other: &Self) -> bool {
        let (lo, hi) = (self.lo.min(other.lo), self.hi().max(other.hi()));
        let (a, b) = (self.expanded(lo, hi), other.expanded(lo, hi));
        let tail = |xa: &S, ra: &S, xb: &S, rb: &S| xa.same(xb) && (xa.vanishes() || ra.same(rb));
        a.values.len() == b.values.len()
            && a.values.iter().zip(&b.values).all(|(x, y)| x.same(y))
            && tail(&a.left_anchor, &a.left_ratio, &b.left_anchor, &b.left_ratio)
            && tail(&a.right_anchor, &a.right_ratio, &b.right_anchor, &b.right_ratio)
    }
}

/// `(x, α)` with `x` a [`GeoSeq`].
#[derive(Debug, Clone)]
pub struct EigenVector<S> {
    pub seq: GeoSeq<S>,
    pub alpha: S,
}

impl<S: Scalar> PartialEq for EigenVector<S> {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq && self.alpha.same(&other.alpha)
    }
}

fn weight<S: Scalar>(j: i64) -> S {
    if j == 0 {
        S::from_rational(&rational(1, 2))
    } else {
        S::one_value()
    }
}

/// `T` applied to a geometric-tailed element, exactly.
pub fn geo_shift_apply<S: Scalar>(v: &EigenVector<S>) -> EigenVector<S> {
    let x = v.seq.expanded(v.seq.lo.min(0), v.seq.hi().max(0));
    let half = S::from_rational(&rational(1, 2));
    let mut values: Vec<S> = (x.lo..=x.hi()).map(|j| weight::<S>(j).times(&x.get(j))).collect();
    // y(j) = (Mx)(j − 1), so y lives on [lo + 1, hi + 1] and contains j = 1.
    let k = (1 - (x.lo + 1)) as usize;
    values[k] = values[k].plus(&v.alpha.times(&half));
    EigenVector {
        seq: GeoSeq::new(x.lo + 1, values, (x.left_anchor.clone(), x.left_ratio.clone()), (x.right_anchor.clone(), x.right_ratio.clone())),
        alpha: v.alpha.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StencilCheck {
    /// `j ≤ 0`, `j = 1`, `j ≥ 2`, or one of the two symbolic tails.
    pub regime: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<i64>,
    pub passed: bool,
}

fn regime(j: i64) -> &'static str {
    match j {
        j if j <= 0 => "j ≤ 0",
        1 => "j = 1",
        _ => "j ≥ 2",
    }
}

/// Proves `T(x, α) = λ(x, α)` for every index: pointwise on the window (which
/// contains both regime boundaries 0 and 1) plus one identity per geometric
/// tail. Inside a tail the stencil has constant coefficients, so the tail
/// identity covers all of its indices at once.
pub fn verify_stencil<S: Scalar>(v: &EigenVector<S>, lambda: &S) -> Vec<StencilCheck> {
    let x = v.seq.expanded(v.seq.lo.min(0), v.seq.hi().max(1));
    let half = S::from_rational(&rational(1, 2));
    let mut checks = vec![StencilCheck { regime: "α".into(), j: None, passed: lambda.times(&v.alpha).same(&v.alpha) }];
    for j in x.lo..=x.hi() + 1 {
        let mut lhs = weight::<S>(j - 1).times(&x.get(j - 1));
        if j == 1 {
            lhs = lhs.plus(&v.alpha.times(&half));
        }
        checks.push(StencilCheck { regime: regime(j).into(), j: Some(j), passed: lhs.same(&lambda.times(&x.get(j))) });
    }
    // j < lo: x(j − 1) = r_L·x(j), so the stencil reads r_L·x(j) = λ·x(j).
    let left = x.left_anchor.times(&x.left_ratio.minus(lambda));
    checks.push(StencilCheck { regime: "left tail".into(), j: None, passed: left.vanishes() });
    // j > hi + 1: x(j) = r_R·x(j − 1), so the stencil reads x(j − 1) = λ·r_R·x(j − 1).
    let right = x.right_anchor.times(&S::one_value().minus(&lambda.times(&x.right_ratio)));
    checks.push(StencilCheck { regime: "right tail".into(), j: None, passed: right.vanishes() });
    checks
}

/// The eigenvectors for `λ`: the fixed space basis `{𝟙, (step, 0)}` when
/// `λ = 1`, otherwise `x(j) = 2λ^{−j}` for `j ≤ 0` and `λ^{−j}` for `j ≥ 1`,
/// explicit on `[−n, n]`.
pub fn eigenvectors<S: Conjugate>(lambda: &S, n: i64) -> Result<Vec<EigenVector<S>>> {
    if !lambda.is_unimodular() {
        return invalid("eigenvalues of the perturbed shift lie on the unit circle");
    }
    let n = n.max(1);
    let two = S::from_rational(&rational(2, 1));
    let one = S::one_value();
    if lambda.same(&one) {
        let unit = EigenVector { seq: GeoSeq::from_ext(&ExtSeq::ones()), alpha: one.clone() };
        let step = EigenVector { seq: GeoSeq::from_ext(&ExtSeq::new(1, vec![], two, one)), alpha: S::zero_value() };
        return Ok(vec![unit, step]);
    }
    let inv = lambda.conjugate();
    let values = (-n..=n)
        .map(|j| if j <= 0 { two.times(&pow(lambda, (-j) as u64)) } else { pow(&inv, j as u64) })
        .collect();
    let left = (two.times(&pow(lambda, (n + 1) as u64)), lambda.clone());
    let right = (pow(&inv, (n + 1) as u64), inv);
    Ok(vec![EigenVector { seq: GeoSeq::new(-n, values, left, right), alpha: S::zero_value() }])
}

/// Dimension of the solution space of the stencil equation, and whether the
/// given vectors are the solutions determined by `x(1)` (and `α` when
/// `λ = 1`).
///
/// The second coordinate forces `α(λ − 1) = 0`. Given `x(1)` and `α`, the
/// recurrence `λx(j) = m_{j−1}x(j−1) + ½αδ_{j1}` fixes every other entry,
/// forwards and backwards. So the space has dimension `1 + [λ = 1]`.
pub fn check_simplicity<S: Conjugate>(lambda: &S, vectors: &[EigenVector<S>], n: i64) -> (usize, bool) {
    let one = S::one_value();
    let alpha_free = lambda.same(&one);
    let dimension = 1 + alpha_free as usize;
    let half = S::from_rational(&rational(1, 2));
    let inv = lambda.conjugate();
    let solve = |x1: &S, alpha: &S| -> Vec<S> {
        // Values on [−n, n] from x(1) and α.
        let mut vals = vec![S::zero_value(); (2 * n + 1) as usize];
        let idx = |j: i64| (j + n) as usize;
        vals[idx(1)] = x1.clone();
        for j in 2..=n {
            vals[idx(j)] = inv.times(&vals[idx(j - 1)]);
        }
        // m_0 x(0) = λx(1) − ½α
        let two = S::from_rational(&rational(2, 1));
        vals[idx(0)] = two.times(&lambda.times(x1).minus(&alpha.times(&half)));
        for j in (-n + 1..=0).rev() {
            vals[idx(j - 1)] = lambda.times(&vals[idx(j)]);
        }
        vals
    };
    let matches = vectors.iter().all(|v| {
        let x = v.seq.expanded(-n, n);
        let expect = solve(&x.get(1), &v.alpha);
        (-n..=n).all(|j| x.get(j).same(&expect[(j + n) as usize]))
    });
    let independent = match vectors {
        [_] => true,
        // α separates the unit from the step vector, which is nonzero.
        [a, b] => !a.alpha.same(&b.alpha) && !(a.alpha.vanishes() && b.alpha.vanishes()),
        _ => false,
    };
    (dimension, matches && independent && vectors.len() == dimension)
}

/// Points of the unit circle accepted as eigenvalues.
#[derive(Debug, Clone)]
pub enum UnitRoot {
    /// `exp(2πi·p/q)`, exact.
    Root { p: i64, q: u32, value: Cyclotomic },
    /// A Gaussian rational of modulus 1, exact.
    Gaussian(Gaussian),
    /// `exp(2πi·t)` in floating point.
    Float { turns: f64, value: Complex64 },
}

impl UnitRoot {
    /// `"p/q"` (turns, exact), `"gauss:re,im"` (exact), or a decimal number of
    /// turns (floating).
    pub fn parse(s: &str) -> Result<UnitRoot> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("gauss:") {
            let (re, im) = rest.split_once(',').ok_or_else(|| crate::error::Error::InvalidArgument(format!("expected gauss:re,im, got {s:?}")))?;
            let g = Gaussian::new(parse_rational(re)?, parse_rational(im)?);
            if !g.is_unimodular() {
                return invalid(format!("{g} is not on the unit circle"));
            }
            return Ok(UnitRoot::Gaussian(g));
        }
        if s.contains('/') || s.parse::<i64>().is_ok() {
            let r = parse_rational(s)?;
            let p = r.numer().to_i64().ok_or_else(|| crate::error::Error::InvalidArgument(format!("{s:?} is too large")))?;
            let q = r.denom().to_u32().filter(|&q| q <= 720).ok_or_else(|| {
                crate::error::Error::InvalidArgument(format!("denominator of {s:?} is too large for the exact path"))
            })?;
            return Ok(UnitRoot::Root { p, q, value: Cyclotomic::root_of_unity(p, q)? });
        }
        let turns: f64 = s.parse().map_err(|_| crate::error::Error::InvalidArgument(format!("cannot parse {s:?} as a point of the unit circle")))?;
        if !turns.is_finite() {
            return invalid("angle must be finite");
        }
        Ok(UnitRoot::Float { turns, value: Complex64::from_polar(1.0, std::f64::consts::TAU * turns) })
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            UnitRoot::Root { value, .. } => value.to_c64(),
            UnitRoot::Gaussian(g) => g.to_c64(),
            UnitRoot::Float { value, .. } => *value,
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, UnitRoot::Float { .. })
    }

    /// Order as a root of unity, when known.
    pub fn order(&self) -> Option<u32> {
        match self {
            UnitRoot::Root { p, q, .. } => {
                let g = num_integer::gcd(p.unsigned_abs(), *q as u64);
                Some(if g == 0 { 1 } else { (*q as u64 / g) as u32 })
            }
            UnitRoot::Gaussian(g) => [1u32, 2, 4].into_iter().find(|&k| pow(g, k as u64).same(&Gaussian::one_value())),
            UnitRoot::Float { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenReport {
    pub lambda: [f64; 2],
    pub exact: bool,
    pub vectors: usize,
    pub dimension: usize,
    pub simple_as_expected: bool,
    pub checks: Vec<StencilCheck>,
    pub verified: bool,
    /// `T^q v = v` for the order `q` of `λ`, when `q ≤ 64`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period_check: Option<bool>,
}

fn report_for<S: Conjugate>(lambda: &S, order: Option<u32>, exact: bool, n: i64) -> Result<EigenReport> {
    let vectors = eigenvectors(lambda, n)?;
    let mut checks = Vec::new();
    for v in &vectors {
        checks.extend(verify_stencil(v, lambda));
    }
    let (dimension, simple_as_expected) = check_simplicity(lambda, &vectors, n.max(1));
    let period_check = order.filter(|&q| q <= 64).map(|q| {
        vectors.iter().all(|v| {
            let mut w = v.clone();
            for _ in 0..q {
                w = geo_shift_apply(&w);
            }
            w == *v
        })
    });
    let c = lambda.to_c64();
    Ok(EigenReport {
        lambda: [c.re, c.im],
        exact,
        vectors: vectors.len(),
        dimension,
        simple_as_expected,
        verified: checks.iter().all(|c| c.passed) && simple_as_expected && period_check.unwrap_or(true),
        checks,
        period_check,
    })
}

/// Constructs and verifies the eigenvectors for `λ`, explicit on `[−n, n]`.
pub fn shift_eigenvector(lambda: &UnitRoot, n: i64) -> Result<EigenReport> {
    let order = lambda.order();
    match lambda {
        UnitRoot::Root { value, .. } => report_for(value, order, true, n),
        UnitRoot::Gaussian(g) => report_for(g, order, true, n),
        UnitRoot::Float { value, .. } => report_for(value, order, false, n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_space() {
        let rep = shift_eigenvector(&UnitRoot::parse("0/1").unwrap(), 4).unwrap();
        assert!(rep.verified, "{rep:?}");
        assert_eq!((rep.vectors, rep.dimension), (2, 2));
        let v = eigenvectors(&Gaussian::one_value(), 3).unwrap();
        assert_eq!(v[1].seq.get(-10), Gaussian::from_ints(2, 0));
        assert_eq!(v[1].seq.get(0), Gaussian::from_ints(2, 0));
        assert_eq!(v[1].seq.get(1), Gaussian::from_ints(1, 0));
        assert_eq!(geo_shift_apply(&v[1]), v[1]);
    }

    #[test]
    fn minus_one() {
        let l = Gaussian::from_ints(-1, 0);
        let v = &eigenvectors(&l, 3).unwrap()[0];
        for j in -9..=9i64 {
            let sign = if j.rem_euclid(2) == 0 { 1 } else { -1 };
            let want = if j <= 0 { 2 * sign } else { sign };
            assert_eq!(v.seq.get(j), Gaussian::from_ints(want, 0), "j = {j}");
        }
        assert!(verify_stencil(v, &l).iter().all(|c| c.passed));
        assert_eq!(geo_shift_apply(v), EigenVector { seq: v.seq.scale(&l), alpha: Gaussian::zero_value() });
    }

    #[test]
    fn imaginary_unit() {
        let rep = shift_eigenvector(&UnitRoot::parse("1/4").unwrap(), 5).unwrap();
        assert!(rep.verified);
        assert_eq!(rep.period_check, Some(true));
        let rep = shift_eigenvector(&UnitRoot::parse("gauss:0,1").unwrap(), 5).unwrap();
        assert!(rep.verified && rep.period_check == Some(true));
        // Gaussian oracle: x(−1) = 2i, x(2) = i⁻² = −1.
        let v = &eigenvectors(&Gaussian::i(), 2).unwrap()[0];
        assert_eq!(v.seq.get(-1), Gaussian::from_ints(0, 2));
        assert_eq!(v.seq.get(2), Gaussian::from_ints(-1, 0));
        assert_eq!(v.seq.get(-7), Gaussian::from_ints(0, -2));
    }

    #[test]
    fn wrong_vector_fails() {
        let l = Gaussian::i();
        let mut v = eigenvectors(&l, 2).unwrap().remove(0);
        v.seq.values[1] = Gaussian::from_ints(5, 0);
        assert!(!verify_stencil(&v, &l).iter().all(|c| c.passed));
        let mut w = eigenvectors(&l, 2).unwrap().remove(0);
        w.seq.right_ratio = Gaussian::from_ints(1, 0);
        let checks = verify_stencil(&w, &l);
        assert!(!checks.iter().find(|c| c.regime == "right tail").unwrap().passed);
    }

    #[test]
    fn inputs() {
        assert!(UnitRoot::parse("gauss:1,1").is_err());
        assert!(UnitRoot::parse("gauss:3/5,4/5").is_ok());
        assert!(UnitRoot::parse("x").is_err());
        assert!(eigenvectors(&Gaussian::from_ints(2, 0), 2).is_err());
        let rep = shift_eigenvector(&UnitRoot::parse("0.6180339887498949").unwrap(), 6).unwrap();
        assert!(!rep.exact && rep.verified);
        assert_eq!(UnitRoot::parse("3/12").unwrap().order(), Some(4));
    }
}
