//! Spectra, power-boundedness, recurrence indices and the spectral projection
//! onto the reversible part.

use nalgebra::Schur;
use serde::{Deserialize, Serialize};

use crate::algebra::{spectral_norm, CMatrix, CVector, C64, ZERO};
use crate::config::{Config, Tolerances};
use crate::error::{invalid, Error, Result};
use crate::positivity::{Verdict, Witness};
use crate::superop::{matrix_power, Superoperator};

/// A group of numerically equal eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    /// Mean of the member eigenvalues.
    pub value: [f64; 2],
    pub algebraic: usize,
    /// Dimension of the numerical null space of `A − λ`.
    pub geometric: usize,
}

impl Cluster {
    pub fn eigenvalue(&self) -> C64 {
        C64::new(self.value[0], self.value[1])
    }

    pub fn jordan_defect(&self) -> usize {
        self.algebraic - self.geometric
    }
}

#[derive(Debug, Clone)]
pub struct SpectralData {
    eigenvalues: Vec<C64>,
    clusters: Vec<Cluster>,
    /// Eigenvector columns grouped by cluster, `geometric` columns each.
    eigenvectors: CMatrix,
    kappa_v: f64,
    diagonalizable: bool,
    reconstruction_error: Option<f64>,
    norm: f64,
    schur_q: CMatrix,
    schur_t: CMatrix,
}

impl SpectralData {
    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    /// Condition number of the eigenvector matrix (infinite when defective).
    pub fn kappa_v(&self) -> f64 {
        self.kappa_v
    }

    pub fn diagonalizable(&self) -> bool {
        self.diagonalizable
    }

    /// `‖V diag(λ) V⁻¹ − A‖ / ‖A‖` when diagonalizable.
    pub fn reconstruction_error(&self) -> Option<f64> {
        self.reconstruction_error
    }

    pub fn jordan_defect(&self) -> Vec<(C64, usize)> {
        self.clusters.iter().map(|c| (c.eigenvalue(), c.jordan_defect())).collect()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max)
    }

    pub fn matrix_norm(&self) -> f64 {
        self.norm
    }

    /// Column range of cluster `k` inside [`SpectralData::eigenvectors`].
    fn columns(&self, k: usize) -> std::ops::Range<usize> {
        let start: usize = self.clusters[..k].iter().map(|c| c.geometric).sum();
        start..start + self.clusters[k].geometric
    }
}

/// Complex Schur form `A = Q T Q*` with `T` upper triangular.
pub fn schur(a: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let n = a.nrows();
    let iters = 1000 * n.max(10);
    let (mut q, mut t) = match Schur::try_new(a.clone(), f64::EPSILON, iters) {
        Some(s) => s.unpack(),
        None => {
            // Shifted QR can stall on equal-modulus spectra (permutations of
            // even order); a fixed unitary change of basis breaks the symmetry.
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0x5343485552);
            let mut found = None;
            for _ in 0..4 {
                let u = crate::random::haar_unitary(n, &mut rng);
                if let Some(s) = Schur::try_new(u.adjoint() * a * &u, f64::EPSILON, iters) {
                    let (q, t) = s.unpack();
                    found = Some((u * q, t));
                    break;
                }
            }
            found.ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?
        }
    };
    // Split any remaining 2×2 bumps with a unitary rotation.
    let scale = spectral_norm(a).max(f64::MIN_POSITIVE);
    for i in 0..n.saturating_sub(1) {
        if t[(i + 1, i)].norm() <= f64::EPSILON * scale {
            t[(i + 1, i)] = ZERO;
            continue;
        }
        let (p, qq, r, s) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
        let tr = p + s;
        let disc = ((p - s) * (p - s) + C64::new(4.0, 0.0) * qq * r).sqrt();
        let lambda = (tr + disc) * 0.5;
        let mut v = [qq, lambda - p];
        if v[0].norm() + v[1].norm() < (lambda - s).norm() + r.norm() {
            v = [lambda - s, r];
        }
        let nv = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        let (c0, c1) = (v[0] / nv, v[1] / nv);
        // G = [[c0, -c1*], [c1, c0*]] is unitary with first column v.
        let g = [[c0, -c1.conj()], [c1, c0.conj()]];
        for col in 0..n {
            let (x, y) = (t[(i, col)], t[(i + 1, col)]);
            t[(i, col)] = g[0][0].conj() * x + g[1][0].conj() * y;
            t[(i + 1, col)] = g[0][1].conj() * x + g[1][1].conj() * y;
        }
        for row in 0..n {
            let (x, y) = (t[(row, i)], t[(row, i + 1)]);
            t[(row, i)] = x * g[0][0] + y * g[1][0];
            t[(row, i + 1)] = x * g[0][1] + y * g[1][1];
            let (x, y) = (q[(row, i)], q[(row, i + 1)]);
            q[(row, i)] = x * g[0][0] + y * g[1][0];
            q[(row, i + 1)] = x * g[0][1] + y * g[1][1];
        }
        t[(i + 1, i)] = ZERO;
    }
    Ok((q, t))
}

/// Singular values in ascending order together with the matching right
/// singular vectors.
fn right_singular_pairs(m: &CMatrix) -> Vec<(f64, CVector)> {
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested");
    let mut pairs: Vec<(f64, CVector)> =
        svd.singular_values.iter().enumerate().map(|(i, &s)| (s, vt.row(i).adjoint())).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

pub fn condition_number(m: &CMatrix) -> f64 {
    if m.ncols() == 0 {
        return 1.0;
    }
    let s = m.singular_values();
    let max = s.iter().copied().fold(0.0, f64::max);
    let min = s.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

pub fn eigendecompose(t: &Superoperator, tol: &Tolerances) -> Result<SpectralData> {
    eigendecompose_matrix(t.matrix(), tol)
}

/// Eigenvalues from the complex Schur form, clustered; one eigenspace basis
/// per cluster from the null space of `A − λ`.
pub fn eigendecompose_matrix(a: &CMatrix, tol: &Tolerances) -> Result<SpectralData> {
    let n = a.nrows();
    let norm = spectral_norm(a);
    let (schur_q, schur_t) = schur(a)?;
    let eigenvalues: Vec<C64> = (0..n).map(|i| schur_t[(i, i)]).collect();

    // Single-linkage clustering.
    let radius = tol.cluster * norm.max(1.0);
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..n {
        for j in 0..i {
            if (eigenvalues[i] - eigenvalues[j]).norm() <= radius {
                let (ri, rj) = (find(&mut label, i), find(&mut label, j));
                label[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut label, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }

    let null_tol = tol.rank * norm.max(1.0);
    let mut clusters = Vec::with_capacity(groups.len());
    let mut columns: Vec<CVector> = Vec::with_capacity(n);
    for g in &groups {
        let mean = g.iter().map(|&i| eigenvalues[i]).sum::<C64>() / g.len() as f64;
        let shifted = a - CMatrix::identity(n, n) * mean;
        let pairs = right_singular_pairs(&shifted);
        let nullity = pairs.iter().filter(|p| p.0 <= null_tol).count();
        let geometric = nullity.clamp(1, g.len());
        columns.extend(pairs.into_iter().take(geometric).map(|p| p.1));
        clusters.push(Cluster { value: [mean.re, mean.im], algebraic: g.len(), geometric });
    }
    let eigenvectors = if columns.is_empty() { CMatrix::zeros(n, 0) } else { CMatrix::from_columns(&columns) };
    let defective = clusters.iter().any(|c| c.jordan_defect() > 0);
    let kappa_v = if defective { f64::INFINITY } else { condition_number(&eigenvectors) };
    let mut diagonalizable = !defective && kappa_v <= tol.kappa_max;
    let mut reconstruction_error = None;
    if diagonalizable {
        let values: Vec<C64> = clusters.iter().flat_map(|c| std::iter::repeat_n(c.eigenvalue(), c.geometric)).collect();
        match eigenvectors.clone().try_inverse() {
            Some(inv) => {
                let rebuilt = &eigenvectors * CMatrix::from_diagonal(&CVector::from_vec(values)) * inv;
                let err = spectral_norm(&(rebuilt - a)) / norm.max(f64::MIN_POSITIVE);
                reconstruction_error = Some(err);
                if err > tol.eig {
                    diagonalizable = false;
                }
            }
            None => diagonalizable = false,
        }
    }
    Ok(SpectralData { eigenvalues, clusters, eigenvectors, kappa_v, diagonalizable, reconstruction_error, norm, schur_q, schur_t })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumClass {
    pub eigenvalues: Vec<[f64; 2]>,
    pub spectral_radius: f64,
    pub in_unit_circle: bool,
    pub in_disk: bool,
    pub zero_in_spectrum: bool,
}

pub fn classify_eigenvalues(eigenvalues: &[C64], tol: f64) -> SpectrumClass {
    let moduli: Vec<f64> = eigenvalues.iter().map(|l| l.norm()).collect();
    SpectrumClass {
        eigenvalues: eigenvalues.iter().map(|l| [l.re, l.im]).collect(),
        spectral_radius: moduli.iter().copied().fold(0.0, f64::max),
        in_unit_circle: moduli.iter().all(|&m| (m - 1.0).abs() <= tol),
        in_disk: moduli.iter().all(|&m| m <= 1.0 + tol),
        zero_in_spectrum: moduli.iter().any(|&m| m <= tol),
    }
}

pub fn classify_spectrum(t: &Superoperator, tol: f64) -> Result<SpectrumClass> {
    let (_, tri) = schur(t.matrix())?;
    let eig: Vec<C64> = (0..tri.nrows()).map(|i| tri[(i, i)]).collect();
    Ok(classify_eigenvalues(&eig, tol))
}

/// `max_{0≤n≤N} ‖Aⁿ‖`.
fn observed_sup(a: &CMatrix, horizon: u32) -> f64 {
    let n = a.nrows();
    let mut p = CMatrix::identity(n, n);
    let mut sup: f64 = 1.0;
    for _ in 0..horizon {
        p = &p * a;
        sup = sup.max(spectral_norm(&p));
    }
    sup
}

fn eigen_witness(l: C64) -> Witness {
    Witness::Eigenvalue { value: [l.re, l.im] }
}

/// Power-bounded iff the spectrum lies in the closed disk and every unimodular
/// eigenvalue is semisimple.
pub fn power_bounded(t: &Superoperator, cfg: &Config) -> Result<Verdict> {
    let sd = eigendecompose(t, &cfg.tol)?;
    let sup = observed_sup(t.matrix(), cfg.horizon);
    let tol = cfg.tol.unimodular;
    let verdict = if let Some(c) = sd.clusters.iter().find(|c| c.eigenvalue().norm() > 1.0 + tol) {
        Verdict::refuted(eigen_witness(c.eigenvalue()))
    } else if let Some(c) = sd.clusters.iter().find(|c| c.eigenvalue().norm() >= 1.0 - tol && c.jordan_defect() > 0) {
        Verdict::refuted(eigen_witness(c.eigenvalue())).with("jordan_defect", c.jordan_defect() as f64)
    } else {
        Verdict::certified("spectrum in the closed disk, unimodular eigenvalues semisimple")
    };
    Ok(verdict.with("observed_sup", sup).with("spectral_radius", sd.spectral_radius()))
}

/// Doubly power-bounded iff diagonalizable with spectrum in the unit circle.
pub fn doubly_power_bounded(t: &Superoperator, cfg: &Config) -> Result<Verdict> {
    let inverse = match t.inverse(cfg.tol.sing) {
        Ok(inv) => inv,
        Err(Error::SingularOperator { smallest, largest }) => {
            return Ok(Verdict::refuted(Witness::note("0 ∈ Sp(T)")).with("smallest_singular_value", smallest).with("largest_singular_value", largest));
        }
        Err(e) => return Err(e),
    };
    let sd = eigendecompose(t, &cfg.tol)?;
    let tol = cfg.tol.unimodular;
    let sup = observed_sup(t.matrix(), cfg.horizon).max(observed_sup(inverse.map.matrix(), cfg.horizon));
    let verdict = if let Some(c) = sd.clusters.iter().find(|c| (c.eigenvalue().norm() - 1.0).abs() > tol) {
        Verdict::refuted(eigen_witness(c.eigenvalue()))
    } else if !sd.diagonalizable {
        let c = sd.clusters.iter().max_by_key(|c| c.jordan_defect()).expect("nonempty spectrum");
        Verdict::refuted(eigen_witness(c.eigenvalue())).with("kappa_v", sd.kappa_v)
    } else {
        Verdict::certified("diagonalizable with unimodular spectrum").with("kappa_v", sd.kappa_v)
    };
    Ok(verdict.with("observed_sup", sup))
}

/// Indices `n_k` along which `Tⁿ` approaches the identity (or the projection
/// onto the reversible part), with the defects actually measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceWitness {
    pub indices: Vec<u64>,
    pub defects: Vec<f64>,
    pub target_tolerance: f64,
}

impl RecurrenceWitness {
    pub fn last_index(&self) -> Option<u64> {
        self.indices.last().copied()
    }

    pub fn final_defect(&self) -> f64 {
        self.defects.last().copied().unwrap_or(f64::INFINITY)
    }

    pub fn best_defect(&self) -> f64 {
        self.defects.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Index with the smallest measured defect.
    pub fn best_index(&self) -> Option<u64> {
        self.indices
            .iter()
            .zip(&self.defects)
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(&n, _)| n)
    }

    pub fn reached(&self) -> bool {
        self.final_defect() <= self.target_tolerance
    }
}

/// `max_j |λ_jⁿ − 1|` with the phases given in turns.
fn phase_defect(phases: &[f64], n: u64) -> f64 {
    phases
        .iter()
        .map(|&theta| {
            let x = (n as f64 * theta).fract();
            2.0 * (std::f64::consts::PI * x).sin().abs()
        })
        .fold(0.0, f64::max)
}

fn phases_of(values: impl Iterator<Item = C64>) -> Vec<f64> {
    let mut phases: Vec<f64> = values.map(|l| l.arg().rem_euclid(std::f64::consts::TAU) / std::f64::consts::TAU).collect();
    phases.sort_by(f64::total_cmp);
    phases.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    phases
}

/// Streams `n = start, start+1, …` and keeps every `n` that improves the phase
/// defect. When the phase defect falls below `phase_target`, `measure(n)`
/// decides; the search ends once the measured defect is at most `eps`.
fn stream_recurrence(
    phases: &[f64],
    start: u64,
    budget: u64,
    eps: f64,
    phase_target: f64,
    measure: impl Fn(u64) -> f64,
) -> RecurrenceWitness {
    let mut witness = RecurrenceWitness { indices: Vec::new(), defects: Vec::new(), target_tolerance: eps };
    let mut best = f64::INFINITY;
    let mut target = phase_target;
    let end = start.saturating_add(budget);
    let mut n = start.max(1);
    while n < end {
        let d = phase_defect(phases, n);
        if d < best {
            best = d;
            let measured = measure(n);
            witness.indices.push(n);
            witness.defects.push(measured);
            if measured <= eps {
                return witness;
            }
            if d <= target {
                // The eigenbasis bound was optimistic; demand more.
                target = d / 2.0;
            }
        }
        n += 1;
    }
    witness
}

/// Recurrence indices with `‖T^{n_k} − id‖ → 0`; requires a doubly
/// power-bounded map.
pub fn find_recurrence(t: &Superoperator, eps: f64, budget: u64, cfg: &Config) -> Result<RecurrenceWitness> {
    let sd = eigendecompose(t, &cfg.tol)?;
    let tol = cfg.tol.unimodular;
    if !sd.diagonalizable || sd.clusters.iter().any(|c| (c.eigenvalue().norm() - 1.0).abs() > tol) {
        return invalid("recurrence search needs a diagonalizable map with unimodular spectrum");
    }
    let phases = phases_of(sd.clusters.iter().map(Cluster::eigenvalue));
    let a = t.matrix();
    let id = CMatrix::identity(a.nrows(), a.ncols());
    let witness = stream_recurrence(&phases, 1, budget, eps, eps / sd.kappa_v.max(1.0), |n| {
        spectral_norm(&(matrix_power(a, n) - &id))
    });
    if witness.reached() {
        Ok(witness)
    } else {
        Err(Error::BudgetExceeded { budget, best: Box::new(witness) })
    }
}

/// `T^{n−1}` for a recurrence index `n`, an approximate inverse of `T`.
#[derive(Debug, Clone)]
pub struct PowerInverse {
    pub map: Superoperator,
    pub index: u64,
    /// Measured `‖Tⁿ − id‖`.
    pub defect: f64,
    pub reached: bool,
    pub witness: RecurrenceWitness,
}

/// `T^{n_K − 1}` for the last recurrence index; `‖T^{n_K−1} T − id‖ ≤ eps`.
pub fn inverse_via_powers(t: &Superoperator, eps: f64, budget: u64, cfg: &Config) -> Result<PowerInverse> {
    let witness = find_recurrence(t, eps, budget, cfg)?;
    let index = witness.last_index().expect("a reached witness is nonempty");
    Ok(PowerInverse { map: t.power(index - 1), index, defect: witness.final_defect(), reached: true, witness })
}

/// Like [`inverse_via_powers`], but an exhausted budget still yields the power
/// at the best index found, flagged with `reached = false`.
pub fn best_inverse_via_powers(t: &Superoperator, eps: f64, budget: u64, cfg: &Config) -> Result<PowerInverse> {
    match inverse_via_powers(t, eps, budget, cfg) {
        Err(Error::BudgetExceeded { best, .. }) => {
            let witness = *best;
            let index = witness.best_index().ok_or_else(|| Error::Numerical("empty recurrence witness".into()))?;
            let defect = witness.best_defect();
            Ok(PowerInverse { map: t.power(index - 1), index, defect, reached: false, witness })
        }
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionRoute {
    Eigenbasis,
    Schur,
}

#[derive(Debug, Clone)]
pub struct JdLGData {
    pub projection: Superoperator,
    /// Columns spanning the range of `P`.
    pub reversible_basis: CMatrix,
    /// Columns spanning `ker P`.
    pub kernel_basis: CMatrix,
    pub recurrence: RecurrenceWitness,
    pub route: ProjectionRoute,
    pub idempotence_defect: f64,
    pub commutation_defect: f64,
    /// `max ‖T^h x‖ / ‖x‖` over the kernel basis, `h` the decay horizon.
    pub kernel_decay: f64,
    pub decay_horizon: u32,
    pub inner_spectral_radius: f64,
    /// Condition number of `T` restricted to the reversible part.
    pub reversible_condition: f64,
    pub warnings: Vec<String>,
}

/// Swaps the adjacent diagonal entries `k`, `k+1` of the triangular `t`,
/// updating `q` so that `q t q*` is unchanged.
fn swap_schur(t: &mut CMatrix, q: &mut CMatrix, k: usize) {
    let n = t.nrows();
    let (t11, t22) = (t[(k, k)], t[(k + 1, k + 1)]);
    let (cs, sn) = givens(t[(k, k + 1)], t22 - t11);
    // rows k, k+1 from column k+2 on
    for j in k + 2..n {
        let (x, y) = (t[(k, j)], t[(k + 1, j)]);
        t[(k, j)] = x * cs + sn * y;
        t[(k + 1, j)] = y * cs - sn.conj() * x;
    }
    // columns k, k+1 above row k
    let snc = sn.conj();
    for i in 0..k {
        let (x, y) = (t[(i, k)], t[(i, k + 1)]);
        t[(i, k)] = x * cs + snc * y;
        t[(i, k + 1)] = y * cs - snc.conj() * x;
    }
    t[(k, k)] = t22;
    t[(k + 1, k + 1)] = t11;
    for i in 0..n {
        let (x, y) = (q[(i, k)], q[(i, k + 1)]);
        q[(i, k)] = x * cs + snc * y;
        q[(i, k + 1)] = y * cs - snc.conj() * x;
    }
}

/// Plane rotation with real cosine: `[cs sn; −sn̄ cs]·[f; g] = [r; 0]`.
fn givens(f: C64, g: C64) -> (f64, C64) {
    if g == ZERO {
        return (1.0, ZERO);
    }
    if f == ZERO {
        return (0.0, g.conj() / g.norm());
    }
    let norm = (f.norm_sqr() + g.norm_sqr()).sqrt();
    let fs = f / f.norm();
    (f.norm() / norm, fs * g.conj() / norm)
}

/// Solves `T11 R − R T22 = C` for upper triangular `T11`, `T22` with disjoint spectra.
fn triangular_sylvester(t11: &CMatrix, t22: &CMatrix, c: &CMatrix) -> CMatrix {
    let (m, p) = (t11.nrows(), t22.nrows());
    let mut r = CMatrix::zeros(m, p);
    for j in 0..p {
        // (T11 − t22[j,j]) r_j = c_j + Σ_{i<j} r_i t22[i,j]
        let mut rhs = c.column(j).into_owned();
        for i in 0..j {
            let coeff = t22[(i, j)];
            if coeff != ZERO {
                rhs += r.column(i) * coeff;
            }
        }
        let shift = t22[(j, j)];
        for row in (0..m).rev() {
            let mut s = rhs[row];
            for col in row + 1..m {
                s -= t11[(row, col)] * r[(col, j)];
            }
            r[(row, j)] = s / (t11[(row, row)] - shift);
        }
    }
    r
}

/// Spectral projection `P = Vr·Wr` onto the eigenvalues with `|λ| ≥ 1 − tol`,
/// returned with bases of its range and kernel.
fn spectral_projection(sd: &SpectralData, cfg: &Config) -> (ProjectionRoute, CMatrix, CMatrix, CMatrix) {
    let n = sd.schur_t.nrows();
    let cut = 1.0 - cfg.tol.unimodular;
    if sd.diagonalizable && sd.kappa_v <= cfg.tol.kappa_projection {
        let v = &sd.eigenvectors;
        let w = v.clone().try_inverse().expect("diagonalizable eigenbasis is invertible");
        let mut sel = Vec::new();
        let mut rest = Vec::new();
        for (k, c) in sd.clusters.iter().enumerate() {
            let cols = sd.columns(k);
            if c.eigenvalue().norm() >= cut {
                sel.extend(cols);
            } else {
                rest.extend(cols);
            }
        }
        let vr = CMatrix::from_fn(n, sel.len(), |r, c| v[(r, sel[c])]);
        let wr = CMatrix::from_fn(sel.len(), n, |r, c| w[(sel[r], c)]);
        let kernel = CMatrix::from_fn(n, rest.len(), |r, c| v[(r, rest[c])]);
        return (ProjectionRoute::Eigenbasis, vr, wr, kernel);
    }
    let mut t = sd.schur_t.clone();
    let mut q = sd.schur_q.clone();
    let mut pos = 0;
    for k in 0..n {
        if t[(k, k)].norm() >= cut {
            for j in (pos..k).rev() {
                swap_schur(&mut t, &mut q, j);
            }
            pos += 1;
        }
    }
    let m = pos;
    let t11 = t.view((0, 0), (m, m)).into_owned();
    let t22 = t.view((m, m), (n - m, n - m)).into_owned();
    let t12 = t.view((0, m), (m, n - m)).into_owned();
    let r = triangular_sylvester(&t11, &t22, &(-t12));
    let vr = q.columns(0, m).into_owned();
    let mut left = CMatrix::zeros(m, n);
    left.view_mut((0, 0), (m, m)).fill_with_identity();
    left.view_mut((0, m), (m, n - m)).copy_from(&(-&r));
    let wr = left * q.adjoint();
    let mut stacked = CMatrix::zeros(n, n - m);
    stacked.view_mut((0, 0), (m, n - m)).copy_from(&r);
    stacked.view_mut((m, 0), (n - m, n - m)).fill_with_identity();
    let kernel = &q * stacked;
    (ProjectionRoute::Schur, vr, wr, kernel)
}

/// Finite-dimensional Jacobs–de Leeuw–Glicksberg splitting of a power-bounded
/// map: the reversible part spanned by unimodular eigenvectors and the
/// decaying part `ker P`.
pub fn jdlg_projection(t: &Superoperator, cfg: &Config) -> Result<JdLGData> {
    if !power_bounded(t, cfg)?.is_certified() {
        return invalid("the spectral projection is only built for power-bounded maps");
    }
    let sd = eigendecompose(t, &cfg.tol)?;
    let a = t.matrix();
    let n = a.nrows();
    let cut = 1.0 - cfg.tol.unimodular;
    let (route, vr, wr, kernel_basis) = spectral_projection(&sd, cfg);
    let p = &vr * &wr;
    let m = vr.ncols();

    let mut warnings = Vec::new();
    let margin = cfg.tol.cluster * sd.norm.max(1.0);
    for l in &sd.eigenvalues {
        if (l.norm() - cut).abs() <= margin {
            warnings.push(format!("eigenvalue {l} lies within {margin:e} of the unimodular cutoff"));
        }
    }

    let idempotence_defect = spectral_norm(&(&p * &p - &p));
    let commutation_defect = spectral_norm(&(&p * a - a * &p));
    let decay_horizon = cfg.horizon;
    let a_h = matrix_power(a, decay_horizon as u64);
    let kernel_decay = kernel_basis
        .column_iter()
        .map(|x| (&a_h * x).norm() / x.norm())
        .fold(0.0, f64::max);
    let inner_spectral_radius =
        sd.eigenvalues.iter().map(|l| l.norm()).filter(|&r| r < cut).fold(0.0, f64::max);

    // Restriction to the reversible part, B = Wr A Vr.
    let b = &wr * a * &vr;
    let reversible_condition = if m == 0 { 1.0 } else { condition_number(&b) };
    let restricted = if m == 0 { None } else { Some(eigendecompose_matrix(&b, &cfg.tol)?) };
    let kappa_b = restricted.as_ref().map_or(1.0, |r| r.kappa_v.min(1e12));
    let phases = restricted.as_ref().map_or_else(Vec::new, |r| phases_of(r.clusters.iter().map(Cluster::eigenvalue)));

    // Start late enough that the decaying part is already below eps/2.
    let eps = cfg.recurrence_eps;
    let complement = CMatrix::identity(n, n) - &p;
    let mut start = 1u64;
    while start < cfg.recurrence_budget {
        if spectral_norm(&(matrix_power(a, start) * &complement)) <= eps / 2.0 {
            break;
        }
        start *= 2;
    }
    let factor = spectral_norm(&vr).max(1.0) * spectral_norm(&wr).max(1.0) * kappa_b;
    let recurrence = stream_recurrence(&phases, start, cfg.recurrence_budget, eps, eps / (2.0 * factor), |k| {
        spectral_norm(&(matrix_power(a, k) - &p))
    });
    if !recurrence.reached() {
        warnings.push(format!(
            "recurrence target {eps:e} not reached within {} steps; best defect {:e}",
            cfg.recurrence_budget,
            recurrence.best_defect()
        ));
    }

    Ok(JdLGData {
        projection: Superoperator::new(t.algebra().clone(), p)?,
        reversible_basis: vr,
        kernel_basis,
        recurrence,
        route,
        idempotence_defect,
        commutation_defect,
        kernel_decay,
        decay_horizon,
        inner_spectral_radius,
        reversible_condition,
        warnings,
    })
}
