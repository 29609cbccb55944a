//! Factorization `x = yz` of a nonnegative summable sequence with `y` summable
//! and `z → 0`, by repeatedly doubling tails.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::exact::{rational_from_f64, rational_string};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitResult {
    pub p: f64,
    /// The sequence split exactly: the input for `p = 1`, else its `p`-th power.
    #[serde(with = "rational_string::vec")]
    pub x: Vec<BigRational>,
    #[serde(with = "rational_string::vec")]
    pub y: Vec<BigRational>,
    #[serde(with = "rational_string::vec")]
    pub z: Vec<BigRational>,
    /// `k_n`: from index `k_n` on, stage `n` doubles `y`.
    pub stage_indices: Vec<usize>,
    /// `‖y^{(n+1)} − y^{(n)}‖₁`.
    #[serde(with = "rational_string::vec")]
    pub increments: Vec<BigRational>,
    /// `y_k = 2^{e_k} x_k`.
    pub exponents: Vec<u32>,
    /// For `p ≠ 1`, the `p`-th roots: `input = y_root · z_root` with
    /// `y_root ∈ ℓᵖ`, `z_root ∈ c₀`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_root: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_root: Option<Vec<f64>>,
}

/// Least common multiple of the denominators. Machine-sized denominators
/// only need `l mod d`, so each step costs one pass over `l` instead of a big
/// gcd.
fn common_denominator(x: &[BigRational]) -> BigInt {
    let mut l = BigInt::one();
    for v in x {
        match v.denom().to_u64() {
            Some(d) => {
                let r = (&l % d).to_u64().expect("remainder below d");
                let g = r.gcd(&d);
                if g != d {
                    l *= d / g;
                }
            }
            None => l = l.lcm(v.denom()),
        }
    }
    l
}

/// Exact sum over the common denominator; adding pairwise would redo a big
/// gcd at every step.
fn sum(x: &[BigRational]) -> BigRational {
    let l = common_denominator(x);
    let num = x.iter().fold(BigInt::zero(), |acc, v| acc + v.numer() * (&l / v.denom()));
    BigRational::new(num, l)
}

fn pow2(e: u32) -> BigRational {
    BigRational::from_integer(BigInt::one() << e)
}

/// The doubling recursion for `p = 1`.
fn split_l1(x: &[BigRational]) -> SplitResult {
    let len = x.len();
    let l = common_denominator(x);
    // y^{(n)}_k = (num_k << e_k) / l
    let num: Vec<BigInt> = x.iter().map(|v| v.numer() * (&l / v.denom())).collect();
    let mut exponents = vec![0u32; len];
    let mut stage_indices = Vec::new();
    let mut increments = Vec::new();
    let mut n = 1u32;
    loop {
        // k_n: the smallest index whose tail sum is at most 2^{−n}, i.e.
        // tail_num·2ⁿ ≤ l. Tails grow as k decreases, so scan from the end.
        let mut tail = BigInt::zero();
        let mut k = len;
        while k > 0 {
            let next = &tail + (&num[k - 1] << exponents[k - 1]);
            if (&next << n) > l {
                break;
            }
            tail = next;
            k -= 1;
        }
        stage_indices.push(k);
        increments.push(BigRational::new(tail.clone(), l.clone()));
        if tail.is_zero() {
            // Doubling zeros changes nothing from here on.
            break;
        }
        for e in &mut exponents[k..] {
            *e += 1;
        }
        n += 1;
    }
    let y: Vec<BigRational> = x.iter().zip(&exponents).map(|(v, &e)| v * pow2(e)).collect();
    let z: Vec<BigRational> = x
        .iter()
        .zip(&exponents)
        .map(|(v, &e)| if v.is_zero() { BigRational::zero() } else { pow2(e).recip() })
        .collect();
    SplitResult { p: 1.0, x: x.to_vec(), y, z, stage_indices, increments, exponents, y_root: None, z_root: None }
}

/// Splits `0 ≤ x ∈ ℓᵖ` (finitely many entries) as `x = yz`. For `p ≠ 1` the
/// recursion runs on `xᵖ` (exactly when `p` is an integer) and the `p`-th
/// roots of the factors are returned in floating point.
pub fn lp_split(x: &[BigRational], p: f64) -> Result<SplitResult> {
    if !(p.is_finite() && p >= 1.0) {
        return invalid(format!("p must be a finite real ≥ 1, got {p}"));
    }
    if let Some(k) = x.iter().position(|v| v.is_negative()) {
        return invalid(format!("entry {k} is negative"));
    }
    if p == 1.0 {
        return Ok(split_l1(x));
    }
    let powered: Vec<BigRational> = if p.fract() == 0.0 && p <= u32::MAX as f64 {
        x.iter().map(|v| num_traits::pow(v.clone(), p as usize)).collect()
    } else {
        x.iter()
            .map(|v| rational_from_f64(v.to_f64().unwrap_or(f64::NAN).powf(p)))
            .collect::<Result<_>>()?
    };
    let mut out = split_l1(&powered);
    out.p = p;
    out.y_root = Some(
        x.iter().zip(&out.exponents).map(|(v, &e)| v.to_f64().unwrap_or(f64::NAN) * 2f64.powf(e as f64 / p)).collect(),
    );
    out.z_root = Some(
        x.iter().zip(&out.exponents).map(|(v, &e)| if v.is_zero() { 0.0 } else { 2f64.powf(-(e as f64) / p) }).collect(),
    );
    Ok(out)
}

/// Checks every guarantee of a split exactly; returns a description of the
/// first failure.
pub fn audit_split(r: &SplitResult) -> std::result::Result<(), String> {
    for (k, ((x, y), z)) in r.x.iter().zip(&r.y).zip(&r.z).enumerate() {
        if &(y * z) != x {
            return Err(format!("x ≠ yz at {k}"));
        }
        if y < x || y.is_negative() || z.is_negative() {
            return Err(format!("sign or order violated at {k}"));
        }
    }
    for (i, inc) in r.increments.iter().enumerate() {
        if inc > &pow2(i as u32 + 1).recip() {
            return Err(format!("increment {} exceeds 2^-{}", i + 1, i + 1));
        }
    }
    if r.stage_indices.windows(2).any(|w| w[0] > w[1]) {
        return Err("stage indices decrease".into());
    }
    // For every n: z_k ≤ 2^{−n} beyond max(k_1, …, k_n), for each doubling stage.
    let doubling = r.increments.iter().filter(|i| !i.is_zero()).count();
    for n in 1..=doubling {
        let front = r.stage_indices[..n].iter().copied().max().unwrap_or(0);
        let bound = pow2(n as u32).recip();
        if let Some(k) = (front..r.z.len()).find(|&k| r.z[k] > bound) {
            return Err(format!("z_{k} exceeds 2^-{n} beyond the stage-{n} front {front}"));
        }
    }
    if sum(&r.y) > sum(&r.x) + BigRational::one() {
        return Err("‖y‖₁ exceeds ‖x‖₁ + 1".into());
    }
    Ok(())
}
