//! Three-valued verdicts for positivity, Schwarz, n-positivity and complete
//! positivity of a [`Superoperator`].
//!
//! A `Certified` verdict always names its certificate; a `Refuted` verdict
//! always carries an input that reproduces the violation.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{hermitian_eigen, positive_sqrt, spectral_norm, Algebra, CMatrix, CVector, Element, ONE};
use crate::config::Config;
use crate::error::{invalid, Result};
use crate::random;
use crate::superop::{MapNorm, Superoperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Certified,
    Refuted,
    Unknown,
}

impl Status {
    pub fn from_bool(b: bool) -> Status {
        if b {
            Status::Certified
        } else {
            Status::Refuted
        }
    }

    /// Three-valued conjunction.
    pub fn and(self, other: Status) -> Status {
        match (self, other) {
            (Status::Refuted, _) | (_, Status::Refuted) => Status::Refuted,
            (Status::Certified, Status::Certified) => Status::Certified,
            _ => Status::Unknown,
        }
    }

    /// Three-valued disjunction.
    pub fn or(self, other: Status) -> Status {
        match (self, other) {
            (Status::Certified, _) | (_, Status::Certified) => Status::Certified,
            (Status::Refuted, Status::Refuted) => Status::Refuted,
            _ => Status::Unknown,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// An input whose image violates the property.
    Input { x: Element },
    /// A pair of inputs violating a product identity.
    Pair { x: Element, y: Element },
    /// An eigenvector, e.g. of the Choi matrix, as `[re, im]` pairs.
    Vector { v: Vec<[f64; 2]> },
    Eigenvalue { value: [f64; 2] },
    Entry { row: usize, col: usize, value: [f64; 2] },
    Note { text: String },
}

impl Witness {
    pub fn vector(v: &CVector) -> Witness {
        Witness::Vector { v: v.iter().map(|z| [z.re, z.im]).collect() }
    }

    pub fn note(text: impl Into<String>) -> Witness {
        Witness::Note { text: text.into() }
    }

    pub fn input(&self) -> Option<&Element> {
        match self {
            Witness::Input { x } => Some(x),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default, with = "detail_map")]
    pub detail: BTreeMap<String, f64>,
}

/// Detail values as JSON numbers, with non-finite ones written as the
/// strings `"inf"`, `"-inf"` and `"nan"` so reports read back losslessly.
mod detail_map {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Value {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
        let out: BTreeMap<&str, Value> = m
            .iter()
            .map(|(k, &v)| {
                let v = match v {
                    v if v.is_finite() => Value::Number(v),
                    v if v.is_nan() => Value::Text("nan".into()),
                    v if v > 0.0 => Value::Text("inf".into()),
                    _ => Value::Text("-inf".into()),
                };
                (k.as_str(), v)
            })
            .collect();
        out.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        BTreeMap::<String, Value>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| {
                let v = match v {
                    Value::Number(v) => v,
                    Value::Text(t) => match t.as_str() {
                        "inf" => f64::INFINITY,
                        "-inf" => f64::NEG_INFINITY,
                        "nan" => f64::NAN,
                        _ => return Err(serde::de::Error::custom(format!("bad detail value {t:?}"))),
                    },
                };
                Ok((k, v))
            })
            .collect()
    }
}

impl Verdict {
    pub fn certified(certificate: impl Into<String>) -> Verdict {
        Verdict { status: Status::Certified, certificate: Some(certificate.into()), witness: None, detail: BTreeMap::new() }
    }

    pub fn refuted(witness: Witness) -> Verdict {
        Verdict { status: Status::Refuted, certificate: None, witness: Some(witness), detail: BTreeMap::new() }
    }

    pub fn unknown() -> Verdict {
        Verdict { status: Status::Unknown, certificate: None, witness: None, detail: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: f64) -> Verdict {
        self.detail.insert(key.to_string(), value);
        self
    }

    pub fn is_certified(&self) -> bool {
        self.status == Status::Certified
    }

    pub fn is_refuted(&self) -> bool {
        self.status == Status::Refuted
    }
}

/// Largest eigenvalue of the Hermitian part of `m`, plus its anti-Hermitian
/// norm: how far `m` is from being negative semidefinite.
fn nsd_violation(m: &CMatrix) -> f64 {
    let anti = spectral_norm(&(m - m.adjoint())) / 2.0;
    let top = hermitian_eigen(m).0.last().copied().unwrap_or(0.0);
    anti.max(top).max(0.0)
}

/// Blockwise violation of `y ≤ 0`.
fn element_nsd_violation(y: &Element) -> f64 {
    y.blocks().iter().map(nsd_violation).fold(0.0, f64::max)
}

pub fn check_unital(t: &Superoperator, cfg: &Config) -> Verdict {
    let defect = t.unit_defect();
    if defect <= cfg.tol.unital {
        Verdict::certified("T(1) = 1").with("unit_defect", defect)
    } else {
        Verdict::refuted(Witness::Input { x: t.algebra().unit() }).with("unit_defect", defect)
    }
}

/// Relative violation of positivity of `T(x)` for a positive input `x`.
pub fn positivity_violation(t: &Superoperator, x: &Element) -> Result<(f64, f64)> {
    let y = t.apply(x)?;
    let scale = y.norm().max(t.matrix_norm() * x.norm());
    Ok((y.psd_violation(), scale))
}

fn choi_psd(t: &Superoperator, cfg: &Config) -> (bool, f64, CVector) {
    let choi = t.choi_matrix();
    let scale = choi.norm().max(f64::MIN_POSITIVE);
    let (vals, vecs) = choi.eigen();
    let herm_ok = choi.hermitian_defect() <= cfg.tol.herm * scale;
    let min = vals[0];
    (herm_ok && min >= -cfg.tol.psd * scale, min, vecs.column(0).into_owned())
}

/// Positive probes used by every positivity check: the unit, the diagonal
/// matrix units, and random Wishart samples and pure states.
fn standard_probes(t: &Superoperator, cfg: &Config, stream: u64) -> Vec<Element> {
    let alg = t.algebra();
    let mut probes = vec![alg.unit()];
    for (k, &n) in alg.block_dims().iter().enumerate() {
        for a in 0..n {
            probes.push(alg.matrix_unit(k, a, a));
        }
    }
    let mut rng = cfg.rng(stream);
    for i in 0..cfg.samples {
        probes.push(if i % 2 == 0 {
            random::random_positive(alg, &mut rng)
        } else {
            random::random_pure_state(alg, &mut rng)
        });
    }
    probes
}

fn refute_by_probes(t: &Superoperator, probes: impl IntoIterator<Item = Element>, cfg: &Config) -> Option<Verdict> {
    let mut worst: Option<(f64, f64, Element)> = None;
    for x in probes {
        let (viol, scale) = positivity_violation(t, &x).expect("probe in the map's algebra");
        // Earlier probes win ties, so the simplest witness is reported.
        if viol > cfg.tol.psd * scale && worst.as_ref().is_none_or(|w| viol / scale > (w.0 / w.1) * (1.0 + 1e-9)) {
            worst = Some((viol, scale, x));
        }
    }
    worst.map(|(viol, scale, x)| Verdict::refuted(Witness::Input { x }).with("violation", viol).with("scale", scale))
}

fn check_positive_inner(t: &Superoperator, extra: Vec<Element>, structural: bool, cfg: &Config) -> Verdict {
    let alg = t.algebra();
    if alg.is_commutative() {
        // On ℂⁿ the positive cone is generated by the basis vectors, so
        // entrywise nonnegativity decides positivity exactly.
        let m = t.matrix();
        let scale = m.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut worst = (0.0, 0, 0);
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                let v = m[(r, c)];
                let bad = (-v.re).max(v.im.abs());
                if bad > worst.0 {
                    worst = (bad, r, c);
                }
            }
        }
        return if worst.0 <= cfg.tol.psd * scale {
            Verdict::certified("entrywise nonnegative").with("min_entry", m.iter().map(|v| v.re).fold(f64::INFINITY, f64::min))
        } else {
            let x = alg.matrix_unit(worst.2, 0, 0);
            let (viol, scale) = positivity_violation(t, &x).expect("own algebra");
            Verdict::refuted(Witness::Input { x })
                .with("violation", viol)
                .with("scale", scale)
                .with("entry_row", worst.1 as f64)
        };
    }

    if structural {
        let (psd, min, _) = choi_psd(t, cfg);
        if psd {
            return Verdict::certified("Choi PSD").with("choi_min_eigenvalue", min);
        }
        // T = Θ_S ∘ S with S completely positive and Θ_S the transpose on the
        // blocks in S: try every subset of the non-scalar blocks.
        let big: Vec<usize> = (0..alg.num_blocks()).filter(|&k| alg.block_dims()[k] >= 2).collect();
        for mask in 1u32..(1 << big.len()) {
            let mut which = vec![false; alg.num_blocks()];
            for (bit, &k) in big.iter().enumerate() {
                which[k] = mask & (1 << bit) != 0;
            }
            let theta = Superoperator::partial_transpose(alg, &which);
            let s = theta.compose(t).expect("same algebra");
            let (psd, min, _) = choi_psd(&s, cfg);
            if psd {
                let blocks: Vec<String> = which.iter().enumerate().filter(|(_, w)| **w).map(|(k, _)| k.to_string()).collect();
                return Verdict::certified(format!("blockwise transpose on blocks [{}] composed with a CP map", blocks.join(",")))
                    .with("choi_min_eigenvalue", min);
            }
        }
    }

    let probes = standard_probes(t, cfg, 0x504f53).into_iter().chain(extra);
    refute_by_probes(t, probes, cfg).unwrap_or_else(|| Verdict::unknown().with("probes", (cfg.samples + alg.embedding_dim() + 1) as f64))
}

/// Positivity: exact on commutative algebras, certified by a PSD Choi matrix
/// or a blockwise-transpose factorization, refuted by sampling.
pub fn check_positive(t: &Superoperator, cfg: &Config) -> Verdict {
    check_positive_inner(t, Vec::new(), true, cfg)
}

pub fn check_completely_positive(t: &Superoperator, cfg: &Config) -> Verdict {
    let (psd, min, v) = choi_psd(t, cfg);
    if psd {
        Verdict::certified("Choi PSD").with("choi_min_eigenvalue", min)
    } else {
        Verdict::refuted(Witness::vector(&v)).with("choi_min_eigenvalue", min)
    }
}

/// Maximally entangled projector `|Ω⟩⟨Ω|`, `Ω = Σ_a e_a ⊗ e_a`, in block `k`
/// of the `n`-fold ampliation of a block of size `inner`.
fn entangled_probe(big: &Algebra, k: usize, n: usize, inner: usize) -> Element {
    let mut x = big.zero();
    let b = x.block_mut(k);
    for p in 0..n.min(inner) {
        for q in 0..n.min(inner) {
            b[(p * inner + p, q * inner + q)] = ONE;
        }
    }
    x
}

/// Places `X = [[1, x], [x*, x*x]]` in the top-left 2×2 corner of the
/// ampliation; positive for every `x`.
fn schwarz_probe(big: &Algebra, x: &Element) -> Element {
    let xa = x.adjoint();
    let xx = xa.mul(x).expect("same algebra");
    let mut out = big.zero();
    for (k, xb) in x.blocks().iter().enumerate() {
        let d = xb.nrows();
        let b = out.block_mut(k);
        b.view_mut((0, 0), (d, d)).fill_with_identity();
        b.view_mut((0, d), (d, d)).copy_from(xb);
        b.view_mut((d, 0), (d, d)).copy_from(xa.block(k));
        b.view_mut((d, d), (d, d)).copy_from(xx.block(k));
    }
    out
}

/// Embeds `x` into the top-left corner of the `n`-fold ampliation.
fn corner(big: &Algebra, x: &Element) -> Element {
    let mut out = big.zero();
    for (k, b) in x.blocks().iter().enumerate() {
        let d = b.nrows();
        out.block_mut(k).view_mut((0, 0), (d, d)).copy_from(b);
    }
    out
}

/// Candidates for the Schwarz inequality: matrix units, eigen-elements of
/// `T`, and random elements.
fn schwarz_candidates(t: &Superoperator, cfg: &Config) -> Vec<Element> {
    let alg = t.algebra();
    let mut out = alg.basis();
    if let Ok(data) = crate::spectral::eigendecompose(t, &cfg.tol) {
        let v = data.eigenvectors();
        for j in 0..v.ncols() {
            let e = alg.from_vector(&v.column(j).into_owned()).expect("own algebra");
            out.push(e.add(&e.adjoint()).expect("same algebra"));
            out.push(e);
        }
    }
    let mut rng = cfg.rng(0x534357);
    for _ in 0..cfg.samples {
        let x = random::random_element(alg, &mut rng);
        let s: f64 = rng.random_range(0.25..2.0);
        out.push(x.scale_real(s));
    }
    out
}

/// The constant in `T(x)*T(x) ≤ c·T(x*x)`: `‖T‖`, exact for certified positive
/// maps and the interval's upper end otherwise.
pub fn schwarz_constant(t: &Superoperator, positive: &Verdict, cfg: &Config) -> MapNorm {
    t.map_norm_given(positive, cfg)
}

/// `(violation, scale)` of `T(x)*T(x) ≤ c·T(x*x)` at `x`.
pub fn schwarz_violation(t: &Superoperator, x: &Element, c: f64) -> Result<(f64, f64)> {
    let tx = t.apply(x)?;
    let lhs = tx.adjoint().mul(&tx)?;
    let rhs = t.apply(&x.adjoint().mul(x)?)?.scale_real(c);
    let diff = lhs.sub(&rhs)?;
    Ok((element_nsd_violation(&diff), lhs.norm().max(rhs.norm()).max(t.matrix_norm().powi(2) * x.norm().powi(2) * c.max(1.0))))
}

fn worst_schwarz(t: &Superoperator, candidates: &[Element], c: f64, cfg: &Config) -> Option<(f64, f64, Element)> {
    let mut worst: Option<(f64, f64, Element)> = None;
    for x in candidates {
        let (viol, scale) = schwarz_violation(t, x, c).expect("own algebra");
        if viol > cfg.tol.psd * scale && worst.as_ref().is_none_or(|w| viol / scale > w.0 / w.1) {
            worst = Some((viol, scale, x.clone()));
        }
    }
    worst
}

/// `n`-positivity, i.e. positivity of `T ⊗ id_n`.
///
/// A map that is not positive is refuted through the corner embedding; a
/// completely positive map is certified outright. Otherwise the ampliation is
/// probed with the standard probes, maximally entangled projectors, and (for
/// `n ≥ 2`) the positive matrices `[[1, x], [x*, x*x]]` built from the Schwarz
/// candidates.
pub fn check_n_positive(t: &Superoperator, n: usize, cfg: &Config) -> Result<Verdict> {
    if n < 1 {
        return invalid("n-positivity needs n ≥ 1");
    }
    let positive = check_positive(t, cfg);
    if n == 1 {
        return Ok(positive);
    }
    let big = t.ampliation(n)?;
    if positive.is_refuted() {
        let x = positive.witness.as_ref().and_then(Witness::input).expect("refutations carry an input");
        let probe = corner(big.algebra(), x);
        let (viol, scale) = positivity_violation(&big, &probe)?;
        return Ok(Verdict::refuted(Witness::Input { x: probe }).with("violation", viol).with("scale", scale));
    }
    let cp = check_completely_positive(t, cfg);
    if cp.is_certified() {
        return Ok(Verdict::certified("completely positive (Choi PSD)").with("choi_min_eigenvalue", cp.detail["choi_min_eigenvalue"]));
    }
    let dims = t.algebra().block_dims();
    let mut extra: Vec<Element> = (0..dims.len()).map(|k| entangled_probe(big.algebra(), k, n, dims[k])).collect();
    let c = schwarz_constant(t, &positive, cfg).upper();
    let candidates = schwarz_candidates(t, cfg);
    if let Some((_, _, x)) = worst_schwarz(t, &candidates, c, cfg) {
        // A Schwarz violation forces the 2×2 probe to fail: try it first.
        extra.insert(0, schwarz_probe(big.algebra(), &x));
    }
    for x in candidates.iter().take(t.dim() + 32) {
        extra.push(schwarz_probe(big.algebra(), x));
    }
    if let Some(v) = refute_by_probes(&big, extra.clone(), cfg) {
        return Ok(v);
    }
    Ok(check_positive_inner(&big, extra, false, cfg))
}

/// Schwarz inequality `T(x)*T(x) ≤ ‖T‖·T(x*x)`.
pub fn check_schwarz(t: &Superoperator, cfg: &Config) -> Verdict {
    let positive = check_positive(t, cfg);
    let norm = schwarz_constant(t, &positive, cfg);
    let c = norm.upper();
    if positive.is_refuted() {
        // Schwarz maps are positive: x = √p for the refuting p violates it.
        let p = positive.witness.as_ref().and_then(Witness::input).expect("refutations carry an input");
        let x = positive_sqrt(p);
        let (viol, scale) = schwarz_violation(t, &x, c).expect("own algebra");
        return Verdict::refuted(Witness::Input { x }).with("violation", viol).with("scale", scale).with("constant", c);
    }
    if let Some((viol, scale, x)) = worst_schwarz(t, &schwarz_candidates(t, cfg), c, cfg) {
        return Verdict::refuted(Witness::Input { x }).with("violation", viol).with("scale", scale).with("constant", c);
    }
    let two = check_n_positive(t, 2, cfg).expect("n = 2 is valid");
    if two.is_certified() {
        return Verdict::certified("2-positive").with("constant", c);
    }
    Verdict::unknown().with("constant", c).with("candidates", cfg.samples as f64)
}

/// Kadison inequality `T(a)² ≤ ‖T‖·T(a²)` on sampled Hermitian `a`.
pub fn check_kadison(t: &Superoperator, cfg: &Config) -> Result<Verdict> {
    let positive = check_positive(t, cfg);
    if positive.is_refuted() {
        return invalid("the Kadison inequality is only asserted for positive maps");
    }
    let c = t.map_norm_given(&positive, cfg).upper();
    let alg = t.algebra();
    let mut rng = cfg.rng(0x4b4144);
    let samples = alg.hermitian_basis().into_iter().chain((0..cfg.samples).map(|_| random::random_hermitian(alg, &mut rng)));
    let mut trials = 0usize;
    for a in samples {
        trials += 1;
        let (viol, scale) = kadison_violation(t, &a, c)?;
        if viol > cfg.tol.psd * scale {
            return Ok(Verdict::refuted(Witness::Input { x: a }).with("violation", viol).with("scale", scale));
        }
    }
    Ok(Verdict::certified(format!("sampled, {trials} trials")).with("constant", c))
}

pub fn kadison_violation(t: &Superoperator, a: &Element, c: f64) -> Result<(f64, f64)> {
    let ta = t.apply(a)?;
    let lhs = ta.mul(&ta)?;
    let rhs = t.apply(&a.mul(a)?)?.scale_real(c);
    let scale = lhs.norm().max(rhs.norm()).max(f64::MIN_POSITIVE);
    Ok((element_nsd_violation(&lhs.sub(&rhs)?), scale))
}

/// For unital maps positivity and contractivity coincide; check that the
/// verdicts agree.
pub fn check_contraction_consistency(t: &Superoperator, cfg: &Config) -> Result<Verdict> {
    if !check_unital(t, cfg).is_certified() {
        return invalid("contraction consistency is defined for unital maps");
    }
    let positive = check_positive(t, cfg);
    let alg = t.algebra();
    let mut rng = cfg.rng(0x434f4e);
    let mut worst: (f64, Option<Element>) = (0.0, None);
    let candidates = alg.basis().into_iter().chain(alg.hermitian_basis()).chain((0..cfg.samples).map(|i| {
        if i % 2 == 0 {
            random::random_unitary(alg, &mut rng)
        } else {
            random::random_hermitian(alg, &mut rng)
        }
    }));
    for x in candidates {
        let nx = x.norm();
        if nx == 0.0 {
            continue;
        }
        let ratio = t.apply(&x)?.norm() / nx;
        if ratio > worst.0 {
            worst = (ratio, Some(x));
        }
    }
    let threshold = 1.0 + cfg.tol.norm;
    if positive.is_certified() {
        let norm = t.map_norm_given(&positive, cfg).upper();
        if (norm - 1.0).abs() > cfg.tol.norm || worst.0 > threshold {
            let x = worst.1.unwrap_or_else(|| alg.unit());
            return Ok(Verdict::refuted(Witness::Input { x }).with("norm", norm).with("sampled_ratio", worst.0));
        }
        return Ok(Verdict::certified("positive with norm 1").with("norm", norm).with("sampled_ratio", worst.0));
    }
    if worst.0 > threshold && !positive.is_refuted() {
        let x = worst.1.expect("ratio above one came from a sample");
        return Ok(Verdict::refuted(Witness::Input { x }).with("sampled_ratio", worst.0));
    }
    Ok(Verdict::certified(if positive.is_refuted() { "not positive and not contractive" } else { "no contraction violation found" })
        .with("sampled_ratio", worst.0))
}
