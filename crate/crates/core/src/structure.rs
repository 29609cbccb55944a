//! Jordan and C*-automorphisms, isometries, permutations, sub-invariant
//! densities, and [`analyze`], which runs every check on one map and audits
//! the implications between the verdicts.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{hermitian_eigen, jordan_product, trace_pairing, Algebra, CMatrix, Element, C64};
use crate::config::{Config, Tolerances};
use crate::error::{invalid, Error, Result};
use crate::positivity::{self, Status, Verdict, Witness};
use crate::random;
use crate::spectral::{self, ProjectionRoute, RecurrenceWitness, SpectrumClass};
use crate::superop::{MapNorm, Superoperator};

/// Positive element `b` playing the role of an injective trace-class density;
/// `φ(x) = ⟨b, x⟩` is the matching state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityElement {
    b: Element,
    min_eigenvalue: f64,
    faithful: bool,
}

impl DensityElement {
    /// Fails unless `b` is Hermitian and positive semidefinite.
    pub fn new(b: Element, tol: &Tolerances) -> Result<Self> {
        let scale = b.norm().max(f64::MIN_POSITIVE);
        if !b.is_hermitian(tol.herm * scale) {
            return invalid("density is not Hermitian");
        }
        let min_eigenvalue = b.min_eigenvalue();
        if min_eigenvalue < -tol.psd * scale {
            return invalid(format!("density is not positive (minimum eigenvalue {min_eigenvalue:e})"));
        }
        Ok(DensityElement { faithful: min_eigenvalue > tol.faithful, b, min_eigenvalue })
    }

    pub fn element(&self) -> &Element {
        &self.b
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn faithful(&self) -> bool {
        self.faithful
    }

    /// `φ(x) = ⟨b, x⟩`.
    pub fn state(&self, x: &Element) -> Result<C64> {
        trace_pairing(&self.b, x)
    }
}

fn not_bijective(t: &Superoperator, cfg: &Config) -> Option<Verdict> {
    match t.inverse(cfg.tol.sing) {
        Ok(_) => None,
        Err(Error::SingularOperator { smallest, .. }) => {
            Some(Verdict::refuted(Witness::note("not bijective")).with("smallest_singular_value", smallest))
        }
        Err(e) => Some(Verdict::refuted(Witness::note(e.to_string()))),
    }
}

fn identity_defect(lhs: &Element, rhs: &Element) -> (f64, f64) {
    let diff = lhs.sub(rhs).expect("same algebra").norm();
    (diff, lhs.norm().max(rhs.norm()).max(1.0))
}

/// Jordan *-automorphism: bijective, Hermitian-preserving and
/// `T(x ∘ y) = T(x) ∘ T(y)`, checked on all pairs of a Hermitian basis.
pub fn check_jordan_automorphism(t: &Superoperator, cfg: &Config) -> Verdict {
    if let Some(v) = not_bijective(t, cfg) {
        return v;
    }
    let basis = t.algebra().hermitian_basis();
    let images: Vec<Element> = basis.iter().map(|e| t.apply(e).expect("own algebra")).collect();
    let tol = cfg.tol.norm;
    let mut worst: f64 = 0.0;
    for (e, te) in basis.iter().zip(&images) {
        let defect = te.sub(&te.adjoint()).expect("same algebra").norm();
        if defect > tol * te.norm().max(1.0) {
            return Verdict::refuted(Witness::Input { x: e.clone() }).with("hermitian_defect", defect);
        }
    }
    for i in 0..basis.len() {
        for j in i..basis.len() {
            let lhs = t.apply(&jordan_product(&basis[i], &basis[j]).expect("same algebra")).expect("own algebra");
            let rhs = jordan_product(&images[i], &images[j]).expect("same algebra");
            let (d, scale) = identity_defect(&lhs, &rhs);
            if d > tol * scale {
                return Verdict::refuted(Witness::Pair { x: basis[i].clone(), y: basis[j].clone() }).with("defect", d);
            }
            worst = worst.max(d / scale);
        }
    }
    Verdict::certified(format!("Jordan identity on all {} Hermitian basis pairs", basis.len() * (basis.len() + 1) / 2))
        .with("max_defect", worst)
}

/// C*-automorphism: bijective, multiplicative and *-preserving on the matrix
/// units. The pairs `(e*, e)` come first since `T(x*x) = T(x)*T(x)` is the
/// identity the positivity arguments rely on.
pub fn check_star_automorphism(t: &Superoperator, cfg: &Config) -> Verdict {
    if let Some(v) = not_bijective(t, cfg) {
        return v;
    }
    let alg = t.algebra();
    let basis = alg.basis();
    let images: Vec<Element> = basis.iter().map(|e| t.apply(e).expect("own algebra")).collect();
    let image_of = |x: &Element| t.apply(x).expect("own algebra");
    let tol = cfg.tol.norm;
    let mut worst: f64 = 0.0;
    let mut pairs: Vec<(Element, Element)> = basis.iter().map(|e| (e.adjoint(), e.clone())).collect();
    for x in &basis {
        for y in &basis {
            pairs.push((x.clone(), y.clone()));
        }
    }
    for (x, y) in pairs {
        let lhs = image_of(&x.mul(&y).expect("same algebra"));
        let rhs = image_of(&x).mul(&image_of(&y)).expect("same algebra");
        let (d, scale) = identity_defect(&lhs, &rhs);
        if d > tol * scale {
            return Verdict::refuted(Witness::Pair { x, y }).with("defect", d);
        }
        worst = worst.max(d / scale);
    }
    for (e, te) in basis.iter().zip(&images) {
        let (d, scale) = identity_defect(&image_of(&e.adjoint()), &te.adjoint());
        if d > tol * scale {
            return Verdict::refuted(Witness::Input { x: e.clone() }).with("adjoint_defect", d);
        }
        worst = worst.max(d / scale);
    }
    Verdict::certified("multiplicative and *-preserving on all matrix-unit pairs").with("max_defect", worst)
}

fn max_row_sum(m: &CMatrix) -> (f64, usize) {
    m.row_iter()
        .enumerate()
        .map(|(i, r)| (r.iter().map(|v| v.norm()).sum::<f64>(), i))
        .fold((0.0, 0), |a, b| if b.0 > a.0 { b } else { a })
}

/// The unimodular vector aligned with row `i`: `‖Mx‖∞ = Σ_j |m_ij|`.
fn aligned_sign_vector(m: &CMatrix, i: usize) -> Vec<C64> {
    m.row(i).iter().map(|v| if v.norm() > 0.0 { v.conj() / v.norm() } else { C64::new(1.0, 0.0) }).collect()
}

/// Isometry for the C*-norm. On `ℂⁿ` this is exact: `T` is isometric iff both
/// `T` and `T⁻¹` have row sums at most 1. Otherwise a certified Jordan
/// *-automorphism is isometric, and sampling refutes.
pub fn check_isometry(t: &Superoperator, cfg: &Config) -> Verdict {
    let alg = t.algebra();
    let tol = cfg.tol.norm;
    if alg.is_commutative() {
        let m = t.matrix();
        let inverse = match t.inverse(cfg.tol.sing) {
            Ok(inv) => inv,
            Err(_) => {
                // A kernel vector is mapped to 0.
                let svd = m.clone().svd(false, true);
                let vt = svd.v_t.expect("requested");
                let k = svd.singular_values.imin();
                let v = vt.row(k).adjoint();
                let x = alg.from_vector(&v).expect("length matches");
                let x = x.scale_real(1.0 / x.norm());
                return Verdict::refuted(Witness::Input { x }).with("image_norm", svd.singular_values[k]);
            }
        };
        let (forward, i) = max_row_sum(m);
        if forward > 1.0 + tol {
            let x = alg.diagonal_element(&aligned_sign_vector(m, i)).expect("length matches");
            return Verdict::refuted(Witness::Input { x }).with("norm", forward);
        }
        let (backward, i) = max_row_sum(inverse.map.matrix());
        if backward > 1.0 + tol {
            let y = alg.diagonal_element(&aligned_sign_vector(inverse.map.matrix(), i)).expect("length matches");
            let x = inverse.map.apply(&y).expect("own algebra");
            return Verdict::refuted(Witness::Input { x }).with("inverse_norm", backward);
        }
        return Verdict::certified("row sums of T and T⁻¹ at most 1").with("norm", forward).with("inverse_norm", backward);
    }
    let mut rng = cfg.rng(0x49534f);
    let probes = alg
        .basis()
        .into_iter()
        .chain(alg.hermitian_basis())
        .chain((0..cfg.samples).map(|i| match i % 3 {
            0 => random::random_unitary(alg, &mut rng),
            1 => random::random_hermitian(alg, &mut rng),
            _ => random::random_element(alg, &mut rng),
        }));
    let mut worst: Option<(f64, Element)> = None;
    for x in probes {
        let nx = x.norm();
        let gap = (t.apply(&x).expect("own algebra").norm() - nx).abs();
        if gap > tol * nx.max(1.0) && worst.as_ref().is_none_or(|w| gap > w.0) {
            worst = Some((gap, x));
        }
    }
    if let Some((gap, x)) = worst {
        return Verdict::refuted(Witness::Input { x }).with("norm_gap", gap);
    }
    let jordan = check_jordan_automorphism(t, cfg);
    if jordan.is_certified() {
        return Verdict::certified("Jordan *-automorphism");
    }
    Verdict::unknown().with("samples", cfg.samples as f64)
}

/// Whether `T(1) = 1` and `T ≥ 0` on `ℂⁿ`, i.e. `T` is row-stochastic.
fn row_stochastic(t: &Superoperator, cfg: &Config) -> bool {
    positivity::check_unital(t, cfg).is_certified() && positivity::check_positive(t, cfg).is_certified()
}

/// Whether a row-stochastic matrix is a permutation matrix, after rounding
/// every entry to 0 or 1.
pub fn detect_permutation(t: &Superoperator, cfg: &Config) -> Result<Verdict> {
    if !t.algebra().is_commutative() {
        return invalid("permutation detection needs a commutative algebra");
    }
    if !row_stochastic(t, cfg) {
        return invalid("permutation detection needs a row-stochastic matrix");
    }
    let m = t.matrix();
    let n = m.nrows();
    let mut rounding: f64 = 0.0;
    let mut col_hits = vec![0usize; n];
    let mut perm = vec![0usize; n];
    for r in 0..n {
        let mut hits = 0;
        for c in 0..n {
            let v = m[(r, c)];
            let target = if v.re >= 0.5 { 1.0 } else { 0.0 };
            let err = (v - C64::new(target, 0.0)).norm();
            if err > cfg.tol.entry {
                return Ok(Verdict::refuted(Witness::Entry { row: r, col: c, value: [v.re, v.im] }));
            }
            rounding = rounding.max(err);
            if target == 1.0 {
                hits += 1;
                col_hits[c] += 1;
                perm[r] = c;
            }
        }
        if hits != 1 {
            return Ok(Verdict::refuted(Witness::note(format!("row {r} has {hits} unit entries"))));
        }
    }
    if let Some(c) = col_hits.iter().position(|&h| h != 1) {
        return Ok(Verdict::refuted(Witness::note(format!("column {c} has {} unit entries", col_hits[c]))));
    }
    let perm: Vec<String> = perm.iter().map(usize::to_string).collect();
    Ok(Verdict::certified(format!("permutation [{}]", perm.join(","))).with("rounding_error", rounding))
}

/// `T_* b ≤ b` for the pre-adjoint `T_*`.
pub fn check_subinvariant_density(t: &Superoperator, b: &DensityElement, cfg: &Config) -> Result<Verdict> {
    let alg = t.algebra();
    alg.check(b.element())?;
    let image = t.pre_adjoint().apply(b.element())?;
    let d = b.element().sub(&image)?;
    let scale = b.element().norm().max(image.norm()).max(f64::MIN_POSITIVE);
    let herm = d.sub(&d.adjoint())?.norm() / 2.0;
    let mut min = f64::INFINITY;
    let mut witness = None;
    for (k, block) in d.blocks().iter().enumerate() {
        let h = (block + block.adjoint()) * C64::new(0.5, 0.0);
        let (vals, vecs) = hermitian_eigen(&h);
        if vals[0] < min {
            min = vals[0];
            let v = vecs.column(0);
            let mut p = alg.zero();
            *p.block_mut(k) = &v * v.adjoint();
            witness = Some(p);
        }
    }
    let verdict = if herm <= cfg.tol.herm * scale && min >= -cfg.tol.psd * scale {
        Verdict::certified("b − T_* b ≥ 0")
    } else {
        Verdict::refuted(Witness::Input { x: witness.expect("at least one block") })
    };
    Ok(verdict
        .with("min_eigenvalue", min)
        .with("defect_norm", d.norm())
        .with("density_min_eigenvalue", b.min_eigenvalue()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImplicationStatus {
    /// Antecedent certified and consequent confirmed.
    Pass,
    /// Antecedent certified and consequent refuted.
    Inconsistent,
    /// Antecedent refuted; nothing to check.
    NotApplicable,
    /// Something needed was undecided.
    NotEvaluated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Implication {
    pub id: u8,
    pub statement: String,
    pub status: ImplicationStatus,
}

fn implication(id: u8, statement: &str, antecedent: Status, consequent: Status) -> Implication {
    let status = match (antecedent, consequent) {
        (Status::Refuted, _) => ImplicationStatus::NotApplicable,
        (Status::Unknown, _) => ImplicationStatus::NotEvaluated,
        (Status::Certified, Status::Certified) => ImplicationStatus::Pass,
        (Status::Certified, Status::Refuted) => ImplicationStatus::Inconsistent,
        (Status::Certified, Status::Unknown) => ImplicationStatus::NotEvaluated,
    };
    Implication { id, statement: statement.to_string(), status }
}

/// All `sides` agree whenever the antecedent holds.
fn equivalence(id: u8, statement: &str, antecedent: Status, sides: &[Status]) -> Implication {
    let decided: Vec<Status> = sides.iter().copied().filter(|s| *s != Status::Unknown).collect();
    let conflict = decided.windows(2).any(|w| w[0] != w[1]);
    let status = match antecedent {
        Status::Refuted => ImplicationStatus::NotApplicable,
        Status::Unknown => ImplicationStatus::NotEvaluated,
        Status::Certified if conflict => ImplicationStatus::Inconsistent,
        Status::Certified if decided.len() == sides.len() => ImplicationStatus::Pass,
        Status::Certified => ImplicationStatus::NotEvaluated,
    };
    Implication { id, statement: statement.to_string(), status }
}

/// `‖T‖ ≤ 1` from a norm bracket.
fn contractive(norm: &MapNorm, tol: f64) -> Status {
    if norm.upper() <= 1.0 + tol {
        Status::Certified
    } else if norm.lower() > 1.0 + tol {
        Status::Refuted
    } else {
        Status::Unknown
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceSummary {
    pub witness: RecurrenceWitness,
    pub reached: bool,
    /// Index `n` used for the approximate inverse `T^{n−1}`.
    pub index: u64,
    /// `‖T^{n−1} − T⁻¹‖`.
    pub inverse_error: f64,
    /// Positivity of `T^{n−1}`.
    pub power_inverse_positive: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JdLGSummary {
    pub route: ProjectionRoute,
    pub reversible_dim: usize,
    pub idempotence_defect: f64,
    pub commutation_defect: f64,
    pub kernel_decay: f64,
    pub decay_horizon: u32,
    pub inner_spectral_radius: f64,
    pub recurrence_reached: bool,
    pub final_defect: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRecord {
    pub found: bool,
    /// Where `b` came from: `supplied`, `unit` or `fixed_point`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityElement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subinvariant: Option<Verdict>,
    pub faithful: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_eigenvalue: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub algebra: Algebra,
    pub unital: Verdict,
    pub positive: Verdict,
    pub schwarz: Verdict,
    pub two_positive: Verdict,
    pub completely_positive: Verdict,
    pub norm: MapNorm,
    pub spectrum: SpectrumClass,
    pub power_bounded: Verdict,
    pub doubly_power_bounded: Verdict,
    pub inverse_exists: Verdict,
    pub inverse_positive: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inverse_schwarz: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inverse_norm: Option<MapNorm>,
    pub jordan_automorphism: Verdict,
    pub star_automorphism: Verdict,
    pub isometry: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub permutation: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recurrence: Option<RecurrenceSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jdlg: Option<JdLGSummary>,
    pub density: DensityRecord,
    pub implications: Vec<Implication>,
    pub notes: Vec<String>,
}

impl AnalysisReport {
    pub fn inconsistencies(&self) -> Vec<&Implication> {
        self.implications.iter().filter(|i| i.status == ImplicationStatus::Inconsistent).collect()
    }

    pub fn is_consistent(&self) -> bool {
        self.inconsistencies().is_empty()
    }
}

/// Candidate densities for the sub-invariance hypothesis: the unit, then
/// positive definite Hermitian fixed points of `T_*`.
fn density_candidates(t: &Superoperator, cfg: &Config) -> Vec<(String, Element)> {
    let alg = t.algebra();
    let mut out = vec![("unit".to_string(), alg.unit())];
    let pre = t.pre_adjoint();
    let n = pre.dim();
    let shifted = pre.matrix() - CMatrix::identity(n, n);
    let svd = shifted.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let scale = pre.matrix_norm().max(1.0);
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s > cfg.tol.rank * scale {
            continue;
        }
        let x = alg.from_vector(&vt.row(i).adjoint()).expect("length matches");
        let (re, im) = crate::algebra::hermitian_parts(&x);
        for h in [re, im] {
            for sign in [1.0, -1.0] {
                let h = h.scale_real(sign);
                if h.norm() > 0.0 && h.min_eigenvalue() > cfg.tol.faithful * h.norm() {
                    out.push(("fixed_point".to_string(), h.scale_real(1.0 / h.norm())));
                }
            }
        }
    }
    out
}

fn density_record(t: &Superoperator, supplied: Option<&DensityElement>, cfg: &Config) -> Result<DensityRecord> {
    let candidates: Vec<(String, DensityElement)> = match supplied {
        Some(b) => vec![("supplied".to_string(), b.clone())],
        None => density_candidates(t, cfg)
            .into_iter()
            .filter_map(|(src, b)| DensityElement::new(b, &cfg.tol).ok().map(|d| (src, d)))
            .collect(),
    };
    let mut first: Option<DensityRecord> = None;
    for (source, b) in candidates {
        let verdict = check_subinvariant_density(t, &b, cfg)?;
        let record = DensityRecord {
            found: verdict.is_certified(),
            source: Some(source),
            faithful: b.faithful(),
            min_eigenvalue: Some(b.min_eigenvalue()),
            density: Some(b),
            subinvariant: Some(verdict),
        };
        if record.found && record.faithful {
            return Ok(record);
        }
        first.get_or_insert(record);
    }
    Ok(first.unwrap_or(DensityRecord { found: false, source: None, density: None, subinvariant: None, faithful: false, min_eigenvalue: None }))
}

/// Runs every verdict on `t` and records, for each implication between them,
/// whether it passes, is inconsistent, or does not apply.
pub fn analyze(t: &Superoperator, density: Option<&DensityElement>, cfg: &Config) -> Result<AnalysisReport> {
    let alg = t.algebra().clone();
    let mut notes = vec!["finite dimension: every orbit is relatively compact, so power-boundedness alone gives the splitting".to_string()];

    let unital = positivity::check_unital(t, cfg);
    let positive = positivity::check_positive(t, cfg);
    let completely_positive = positivity::check_completely_positive(t, cfg);
    let two_positive = positivity::check_n_positive(t, 2, cfg)?;
    let schwarz = positivity::check_schwarz(t, cfg);
    let norm = t.map_norm_given(&positive, cfg);
    let spectrum = spectral::classify_spectrum(t, cfg.tol.unimodular)?;
    let power_bounded = spectral::power_bounded(t, cfg)?;
    let doubly_power_bounded = spectral::doubly_power_bounded(t, cfg)?;

    let inverse = t.inverse(cfg.tol.sing);
    let (inverse_exists, inverse_positive, inverse_schwarz, inverse_norm) = match &inverse {
        Ok(inv) => {
            let pos = positivity::check_positive(&inv.map, cfg);
            let inv_norm = inv.map.map_norm_given(&pos, cfg);
            (
                Verdict::certified("matrix inverse").with("condition", inv.condition),
                pos,
                Some(positivity::check_schwarz(&inv.map, cfg)),
                Some(inv_norm),
            )
        }
        Err(Error::SingularOperator { smallest, largest }) => {
            let v = Verdict::refuted(Witness::note("0 ∈ Sp(T)")).with("smallest_singular_value", *smallest).with("largest_singular_value", *largest);
            (v.clone(), v, None, None)
        }
        Err(e) => return Err(Error::Numerical(e.to_string())),
    };

    let jordan_automorphism = check_jordan_automorphism(t, cfg);
    let star_automorphism = check_star_automorphism(t, cfg);
    let isometry = check_isometry(t, cfg);
    let permutation = if alg.is_commutative() && row_stochastic(t, cfg) { Some(detect_permutation(t, cfg)?) } else { None };

    let recurrence = if doubly_power_bounded.is_certified() {
        let p = spectral::best_inverse_via_powers(t, cfg.recurrence_eps, cfg.recurrence_budget, cfg)?;
        let inverse_error = match &inverse {
            Ok(inv) => p.map.distance(&inv.map),
            Err(_) => f64::INFINITY,
        };
        if !p.reached {
            notes.push(format!(
                "recurrence target {:e} not reached within {} steps; best defect {:e} at n = {}",
                cfg.recurrence_eps, cfg.recurrence_budget, p.defect, p.index
            ));
        }
        Some(RecurrenceSummary {
            power_inverse_positive: positivity::check_positive(&p.map, cfg).status,
            reached: p.reached,
            index: p.index,
            inverse_error,
            witness: p.witness,
        })
    } else {
        None
    };

    let jdlg = if power_bounded.is_certified() {
        let j = spectral::jdlg_projection(t, cfg)?;
        Some(JdLGSummary {
            route: j.route,
            reversible_dim: j.reversible_basis.ncols(),
            idempotence_defect: j.idempotence_defect,
            commutation_defect: j.commutation_defect,
            kernel_decay: j.kernel_decay,
            decay_horizon: j.decay_horizon,
            inner_spectral_radius: j.inner_spectral_radius,
            recurrence_reached: j.recurrence.reached(),
            final_defect: j.recurrence.final_defect(),
            warnings: j.warnings,
        })
    } else {
        None
    };

    let density = density_record(t, density, cfg)?;

    // Implication audit.
    let pu = positive.status.and(unital.status);
    let on_circle = Status::from_bool(spectrum.in_unit_circle);
    let inv_ok = inverse_exists.status.and(inverse_positive.status);
    let t_contractive = contractive(&norm, cfg.tol.norm);
    let inv_contractive = inverse_norm.as_ref().map_or(Status::Refuted, |n| contractive(n, cfg.tol.norm));
    let inv_schwarz = inverse_schwarz.as_ref().map_or(Status::Refuted, |v| v.status);
    let hypothesis = density.subinvariant.as_ref().map_or(Status::Refuted, |v| v.status).and(Status::from_bool(density.faithful));

    let mut implications = vec![
        implication(
            1,
            "positive, unital, spectrum in the unit circle ⇒ inverse exists, is positive, and T is a Jordan automorphism",
            pu.and(on_circle),
            inv_ok.and(jordan_automorphism.status),
        ),
        implication(
            2,
            "additionally Schwarz or 2-positive ⇒ T is a C*-automorphism",
            pu.and(on_circle).and(schwarz.status.or(two_positive.status)),
            star_automorphism.status,
        ),
        equivalence(
            3,
            "positive and unital: (0 ∉ Sp(T) and T⁻¹ positive) ⇔ T is a bijective isometry",
            pu,
            &[inv_ok, isometry.status],
        ),
        equivalence(
            4,
            "positive, unital, faithful sub-invariant density: T⁻¹ positive ⇔ bijective isometry ⇔ doubly power bounded",
            pu.and(hypothesis),
            &[inv_ok, isometry.status, doubly_power_bounded.status],
        ),
        implication(
            5,
            "T and T⁻¹ positive contractions ⇒ T is a Jordan automorphism",
            positive.status.and(t_contractive).and(inv_ok).and(inv_contractive),
            jordan_automorphism.status,
        ),
        implication(
            6,
            "T and T⁻¹ contractive Schwarz maps ⇒ T is a C*-automorphism",
            schwarz.status.and(t_contractive).and(inverse_exists.status).and(inv_schwarz).and(inv_contractive),
            star_automorphism.status,
        ),
    ];
    if let Some(p) = &permutation {
        implications.push(implication(7, "row-stochastic with spectrum in the unit circle ⇒ permutation matrix", on_circle, p.status));
    }
    // The verdict lattice CP ⇒ 2-positive ⇒ Schwarz ⇒ positive.
    let chain = [&completely_positive, &two_positive, &schwarz, &positive];
    let labels = ["completely positive", "2-positive", "Schwarz", "positive"];
    for i in 0..3 {
        implications.push(implication(8 + i as u8, &format!("{} ⇒ {}", labels[i], labels[i + 1]), chain[i].status, chain[i + 1].status));
    }
    if implications.iter().any(|i| i.status == ImplicationStatus::Inconsistent) {
        notes.push("inconsistency: a proved implication failed; this indicates a bug or a tolerance problem".to_string());
    }

    Ok(AnalysisReport {
        algebra: alg,
        unital,
        positive,
        schwarz,
        two_positive,
        completely_positive,
        norm,
        spectrum,
        power_bounded,
        doubly_power_bounded,
        inverse_exists,
        inverse_positive,
        inverse_schwarz,
        inverse_norm,
        jordan_automorphism,
        star_automorphism,
        isometry,
        permutation,
        recurrence,
        jdlg,
        density,
        implications,
        notes,
    })
}

/// Random Jordan *-automorphism: a permutation of equal-sized blocks, a
/// unitary conjugation in every block, and a transpose on a random subset of
/// blocks. These are exactly the positive bijective isometries.
pub fn random_jordan_automorphism<R: Rng + ?Sized>(alg: &Algebra, rng: &mut R) -> Superoperator {
    let dims = alg.block_dims().to_vec();
    let mut target: Vec<usize> = (0..dims.len()).collect();
    let mut sizes = dims.clone();
    sizes.sort_unstable();
    sizes.dedup();
    for n in sizes {
        let group: Vec<usize> = (0..dims.len()).filter(|&k| dims[k] == n).collect();
        let mut shuffled = group.clone();
        shuffled.shuffle(rng);
        for (k, s) in group.into_iter().zip(shuffled) {
            target[k] = s;
        }
    }
    let unitaries: Vec<CMatrix> = dims.iter().map(|&n| random::haar_unitary(n, rng)).collect();
    let transpose: Vec<bool> = dims.iter().map(|&n| n > 1 && rng.random_bool(0.5)).collect();
    Superoperator::from_fn(alg, |x| {
        let mut blocks = vec![CMatrix::zeros(0, 0); dims.len()];
        for k in 0..dims.len() {
            let b = if transpose[k] { x.block(k).transpose() } else { x.block(k).clone() };
            let u = &unitaries[target[k]];
            blocks[target[k]] = u * b * u.adjoint();
        }
        Element::from_blocks(blocks).expect("square blocks")
    })
    .expect("block shapes are preserved")
}

/// Random row-stochastic matrix: a permutation with probability
/// `perm_prob`, otherwise a random convex combination of permutations and a
/// dense stochastic matrix.
pub fn random_stochastic<R: Rng + ?Sized>(n: usize, perm_prob: f64, rng: &mut R) -> nalgebra::DMatrix<f64> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let p = nalgebra::DMatrix::from_fn(n, n, |r, c| if perm[r] == c { 1.0 } else { 0.0 });
    if rng.random_bool(perm_prob) {
        return p;
    }
    let mut dense = nalgebra::DMatrix::from_fn(n, n, |_, _| rng.random::<f64>());
    for mut row in dense.row_iter_mut() {
        let s: f64 = row.sum();
        row /= s;
    }
    let w: f64 = rng.random_range(0.05..1.0);
    p * (1.0 - w) + dense * w
}
