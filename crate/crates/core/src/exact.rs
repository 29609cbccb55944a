//! Exact scalar fields used by the shift simulator and the sequence splitter.
//!
//! Three exact fields are provided: plain rationals, Gaussian rationals
//! `Q(i)`, and cyclotomic fields `Q(ζ_q)` (enough to represent every root of
//! unity exactly). A floating [`Complex64`] implementation of the same trait
//! backs the tolerance-based path for irrational angles.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Field operations needed by the sequence types.
pub trait Scalar: Clone + fmt::Debug {
    fn zero_value() -> Self;
    fn one_value() -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn negated(&self) -> Self;
    fn vanishes(&self) -> bool;
    /// Equality; exact for the exact fields, tolerance based for floats.
    fn same(&self, other: &Self) -> bool;
    fn to_c64(&self) -> Complex64;
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"-0.125"` exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("cannot parse {s:?} as a rational"));
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::InvalidArgument(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let negative = int_part.starts_with('-');
    let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let mut value = BigRational::from_integer(BigInt::from_str(&digits).map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Ok(if negative { -value } else { value })
}

pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Converts a finite `f64` through its shortest round-trip decimal form.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite value {x}")));
    }
    parse_rational(&format!("{x:e}"))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Serde adapter writing a rational as a `"p/q"` string.
pub mod rational_string {
    use super::*;

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let text = RationalText::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(format_rational))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Vec<BigRational>, D::Error> {
            let items = Vec::<RationalText>::deserialize(d)?;
            items
                .into_iter()
                .map(|t| t.parse().map_err(serde::de::Error::custom))
                .collect()
        }
    }
}

/// A JSON scalar that is either a string (`"p/q"`, decimal) or a number.
#[derive(Deserialize)]
#[serde(untagged)]
enum RationalText {
    Text(String),
    Int(i64),
    Float(f64),
}

impl RationalText {
    fn parse(self) -> Result<BigRational> {
        match self {
            RationalText::Text(s) => parse_rational(&s),
            RationalText::Int(i) => Ok(BigRational::from_integer(BigInt::from(i))),
            RationalText::Float(f) => rational_from_f64(f),
        }
    }
}

impl Scalar for BigRational {
    fn zero_value() -> Self {
        Zero::zero()
    }
    fn one_value() -> Self {
        One::one()
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        -self
    }
    fn vanishes(&self) -> bool {
        Zero::is_zero(self)
    }
    fn same(&self, other: &Self) -> bool {
        self == other
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(self), 0.0)
    }
}

/// Gaussian rational `re + i·im`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gaussian {
    pub re: BigRational,
    pub im: BigRational,
}

impl Gaussian {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Gaussian { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        Gaussian { re, im: Zero::zero() }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        Gaussian::new(rational(re, 1), rational(im, 1))
    }

    pub fn i() -> Self {
        Gaussian::from_ints(0, 1)
    }

    pub fn conj(&self) -> Self {
        Gaussian::new(self.re.clone(), -&self.im)
    }

    pub fn norm_sq(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn is_real_nonneg(&self) -> bool {
        self.im.is_zero() && !self.re.is_negative()
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Gaussian::new(&self.re * r, &self.im * r)
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.norm_sq();
        if n.is_zero() {
            return None;
        }
        Some(Gaussian::new(&self.re / &n, -&self.im / &n))
    }
}

impl fmt::Display for Gaussian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", format_rational(&self.re))
        } else if self.re.is_zero() {
            write!(f, "{}i", format_rational(&self.im))
        } else if self.im.is_negative() {
            write!(f, "{}-{}i", format_rational(&self.re), format_rational(&-&self.im))
        } else {
            write!(f, "{}+{}i", format_rational(&self.re), format_rational(&self.im))
        }
    }
}

impl Serialize for Gaussian {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [format_rational(&self.re), format_rational(&self.im)].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Gaussian {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [re, im] = <[RationalText; 2]>::deserialize(d)?;
        let re = re.parse().map_err(serde::de::Error::custom)?;
        let im = im.parse().map_err(serde::de::Error::custom)?;
        Ok(Gaussian::new(re, im))
    }
}

impl Scalar for Gaussian {
    fn zero_value() -> Self {
        Gaussian::from_ints(0, 0)
    }
    fn one_value() -> Self {
        Gaussian::from_ints(1, 0)
    }
    fn from_rational(r: &BigRational) -> Self {
        Gaussian::real(r.clone())
    }
    fn plus(&self, o: &Self) -> Self {
        Gaussian::new(&self.re + &o.re, &self.im + &o.im)
    }
    fn minus(&self, o: &Self) -> Self {
        Gaussian::new(&self.re - &o.re, &self.im - &o.im)
    }
    fn times(&self, o: &Self) -> Self {
        Gaussian::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
    fn negated(&self) -> Self {
        Gaussian::new(-&self.re, -&self.im)
    }
    fn vanishes(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn same(&self, o: &Self) -> bool {
        self == o
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
}

/// Coefficients of the cyclotomic polynomial `Φ_q`, lowest degree first.
pub fn cyclotomic_polynomial(q: u32) -> Vec<BigInt> {
    assert!(q >= 1, "cyclotomic order must be positive");
    // x^q - 1 divided by Φ_d for every proper divisor d.
    let mut poly: Vec<BigInt> = vec![BigInt::zero(); q as usize + 1];
    poly[0] = BigInt::from(-1);
    poly[q as usize] = BigInt::one();
    for d in (1..q).filter(|d| q % d == 0) {
        poly = exact_divide(&poly, &cyclotomic_polynomial(d));
    }
    poly
}

// Division by a monic integer polynomial that is known to be exact.
fn exact_divide(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let mut quot = vec![BigInt::zero(); rem.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dd].clone();
        if c.is_zero() {
            continue;
        }
        for (j, dj) in den.iter().enumerate() {
            rem[i + j] -= &c * dj;
        }
        quot[i] = c;
    }
    debug_assert!(rem.iter().all(|c| c.is_zero()));
    quot
}

/// Element of the cyclotomic field `Q(ζ_q)`, `ζ_q = exp(2πi/q)`, stored as a
/// polynomial in `ζ_q` reduced modulo `Φ_q`.
///
/// Order 1 is the rational subfield. Binary operations on elements of
/// different orders lift both operands to the lcm order first.
#[derive(Clone, Debug)]
pub struct Cyclotomic {
    order: u32,
    coeffs: Vec<BigRational>,
}

impl Cyclotomic {
    pub fn from_rational_value(r: BigRational) -> Self {
        Cyclotomic { order: 1, coeffs: vec![r] }
    }

    /// `ζ_q^p`, i.e. `exp(2πi·p/q)`.
    pub fn root_of_unity(p: i64, q: u32) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidArgument("root of unity with order 0".into()));
        }
        let e = p.rem_euclid(q as i64) as usize;
        let mut coeffs = vec![BigRational::zero(); e + 1];
        coeffs[e] = BigRational::one();
        Ok(Cyclotomic::reduce(q, coeffs))
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coeffs
    }

    fn reduce(order: u32, mut coeffs: Vec<BigRational>) -> Self {
        let phi = cyclotomic_polynomial(order);
        let deg = phi.len() - 1;
        if coeffs.len() > deg {
            for i in (deg..coeffs.len()).rev() {
                let c = std::mem::replace(&mut coeffs[i], BigRational::zero());
                if c.is_zero() {
                    continue;
                }
                // Φ is monic: x^deg ≡ -Σ_{j<deg} φ_j x^j.
                for (j, pj) in phi.iter().take(deg).enumerate() {
                    coeffs[i - deg + j] -= &c * BigRational::from_integer(pj.clone());
                }
            }
        }
        coeffs.resize(deg, BigRational::zero());
        Cyclotomic { order, coeffs }
    }

    fn lift(&self, target: u32) -> Self {
        if target == self.order {
            return self.clone();
        }
        debug_assert_eq!(target % self.order, 0);
        let step = (target / self.order) as usize;
        let mut coeffs = vec![BigRational::zero(); (self.coeffs.len().max(1) - 1) * step + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * step] = c.clone();
        }
        Cyclotomic::reduce(target, coeffs)
    }

    fn aligned(&self, other: &Self) -> (Self, Self) {
        let l = self.order.lcm(&other.order);
        (self.lift(l), other.lift(l))
    }

    /// Complex conjugate (`ζ ↦ ζ^{-1}`).
    pub fn conj(&self) -> Self {
        let q = self.order as usize;
        let mut coeffs = vec![BigRational::zero(); q];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[(q - i % q) % q] += c;
        }
        Cyclotomic::reduce(self.order, coeffs)
    }
}

impl Scalar for Cyclotomic {
    fn zero_value() -> Self {
        Cyclotomic::from_rational_value(BigRational::zero())
    }
    fn one_value() -> Self {
        Cyclotomic::from_rational_value(BigRational::one())
    }
    fn from_rational(r: &BigRational) -> Self {
        Cyclotomic::from_rational_value(r.clone())
    }
    fn plus(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect();
        Cyclotomic { order: a.order, coeffs }
    }
    fn minus(&self, other: &Self) -> Self {
        self.plus(&other.negated())
    }
    fn times(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        let n = a.coeffs.len() + b.coeffs.len();
        let mut prod = vec![BigRational::zero(); n.saturating_sub(1).max(1)];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                prod[i + j] += x * y;
            }
        }
        Cyclotomic::reduce(a.order, prod)
    }
    fn negated(&self) -> Self {
        Cyclotomic { order: self.order, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
    fn vanishes(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
    fn same(&self, other: &Self) -> bool {
        let (a, b) = self.aligned(other);
        a.coeffs == b.coeffs
    }
    fn to_c64(&self) -> Complex64 {
        let q = self.order as f64;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| Complex64::from_polar(rational_to_f64(c), std::f64::consts::TAU * k as f64 / q))
            .sum()
    }
}

/// Scalars with a complex conjugation, so points of the unit circle can be
/// inverted exactly as `λ⁻¹ = λ̄`.
pub trait Conjugate: Scalar {
    fn conjugate(&self) -> Self;

    fn is_unimodular(&self) -> bool {
        self.times(&self.conjugate()).same(&Self::one_value())
    }
}

impl Conjugate for Gaussian {
    fn conjugate(&self) -> Self {
        self.conj()
    }
}

impl Conjugate for Cyclotomic {
    fn conjugate(&self) -> Self {
        self.conj()
    }
}

impl Conjugate for Complex64 {
    fn conjugate(&self) -> Self {
        self.conj()
    }
}

/// Relative tolerance of the floating [`Scalar`] implementation.
pub const FLOAT_SCALAR_TOL: f64 = 1e-12;

impl Scalar for Complex64 {
    fn zero_value() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one_value() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_rational(r: &BigRational) -> Self {
        Complex64::new(rational_to_f64(r), 0.0)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negated(&self) -> Self {
        -self
    }
    fn vanishes(&self) -> bool {
        self.norm() <= FLOAT_SCALAR_TOL
    }
    fn same(&self, o: &Self) -> bool {
        (self - o).norm() <= FLOAT_SCALAR_TOL * self.norm().max(o.norm()).max(1.0)
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_polynomials_match_known_values() {
        let as_i64 = |q| -> Vec<i64> {
            cyclotomic_polynomial(q).iter().map(|c| c.to_i64().unwrap()).collect()
        };
        assert_eq!(as_i64(1), vec![-1, 1]);
        assert_eq!(as_i64(2), vec![1, 1]);
        assert_eq!(as_i64(4), vec![1, 0, 1]);
        assert_eq!(as_i64(6), vec![1, -1, 1]);
        assert_eq!(as_i64(8), vec![1, 0, 0, 0, 1]);
        assert_eq!(as_i64(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn roots_of_unity_have_the_right_order() {
        for q in 1..=16u32 {
            let z = Cyclotomic::root_of_unity(1, q).unwrap();
            let mut acc = Cyclotomic::one_value();
            for k in 1..=q {
                acc = acc.times(&z);
                assert_eq!(acc.same(&Cyclotomic::one_value()), k == q, "q={q} k={k}");
            }
        }
    }

    #[test]
    fn cyclotomic_mixes_orders() {
        // i = ζ_8^2 and -1 = ζ_2
        let i4 = Cyclotomic::root_of_unity(1, 4).unwrap();
        let i8 = Cyclotomic::root_of_unity(2, 8).unwrap();
        assert!(i4.same(&i8));
        let minus_one = Cyclotomic::root_of_unity(1, 2).unwrap();
        assert!(i4.times(&i8).same(&minus_one));
        let z = Cyclotomic::root_of_unity(3, 16).unwrap();
        assert!(z.times(&z.conj()).same(&Cyclotomic::one_value()));
        assert!((z.to_c64() - Complex64::from_polar(1.0, std::f64::consts::TAU * 3.0 / 16.0)).norm() < 1e-14);
    }

    #[test]
    fn parses_rationals_exactly() {
        assert_eq!(parse_rational("3/6").unwrap(), rational(1, 2));
        assert_eq!(parse_rational("-0.125").unwrap(), rational(-1, 8));
        assert_eq!(parse_rational("2.5e-1").unwrap(), rational(1, 4));
        assert_eq!(parse_rational("7").unwrap(), rational(7, 1));
        assert_eq!(rational_from_f64(0.1).unwrap(), rational(1, 10));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn gaussian_arithmetic() {
        let a = Gaussian::from_ints(1, 2);
        let b = Gaussian::from_ints(3, -1);
        assert_eq!(a.times(&b), Gaussian::from_ints(5, 5));
        assert_eq!(a.times(&a.inverse().unwrap()), Gaussian::one_value());
        assert_eq!(Gaussian::i().times(&Gaussian::i()), Gaussian::from_ints(-1, 0));
        let json = serde_json::to_string(&Gaussian::new(rational(1, 2), rational(-3, 1))).unwrap();
        assert_eq!(json, r#"["1/2","-3"]"#);
        let back: Gaussian = serde_json::from_str(&json).unwrap();
        assert_eq!(back, Gaussian::new(rational(1, 2), rational(-3, 1)));
    }
}
