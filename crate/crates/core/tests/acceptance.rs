//! Acceptance run: every criterion at its stated tolerance, one PASS/FAIL line
//! each. Runs with its own `main` so the lines show up in `cargo test`.

mod common;

use std::time::{Duration, Instant};

use common::{cfg, golden_phase_sets, jordan_shapes, mixed_spectrum, phase_conjugation, random_map};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use posinv::algebra::{spectral_norm, Algebra, CMatrix};
use posinv::exact::{rational, Gaussian};
use posinv::positivity::{check_completely_positive, check_n_positive, check_positive, check_schwarz};
use posinv::shiftlab::seq::random_positive_element;
use posinv::shiftlab::{
    lp_split, shift_apply, shift_eigenvector, shift_inverse_apply, shift_power_norm, ExtSeq, ShiftElement, UnitRoot,
};
use posinv::spectral::{classify_spectrum, eigendecompose, inverse_via_powers, jdlg_projection};
use posinv::structure::{
    analyze, check_isometry, detect_permutation, random_jordan_automorphism, random_stochastic,
};
use posinv::superop::matrix_power;
use posinv::{Error, Status, Superoperator, Witness};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit, || format!("took {:.2} s, limit {limit} s", elapsed.as_secs_f64()))
}

fn norm_table() -> Outcome {
    let start = Instant::now();
    for n in 0..=50 {
        ensure(shift_power_norm(n) == BigRational::one(), || format!("‖T^{n}‖ = {} ≠ 1", shift_power_norm(n)))?;
    }
    for n in 1..=50 {
        ensure(shift_power_norm(-n) == rational(3, 1), || format!("‖T^-{n}‖ = {} ≠ 3", shift_power_norm(-n)))?;
    }
    within(start.elapsed(), 5.0)?;
    Ok(format!("‖Tⁿ‖ = 1 for n = 0..50, ‖T⁻ⁿ‖ = 3 for n = 1..50, exact ({:.3} s)", start.elapsed().as_secs_f64()))
}

fn positivity_witness() -> Outcome {
    let input = ShiftElement::new(ExtSeq::zero(), Gaussian::from_ints(1, 0));
    let expected = ShiftElement::new(ExtSeq::delta(0).scale(&Gaussian::from_ints(-1, 0)), Gaussian::from_ints(1, 0));
    let out = shift_inverse_apply(&input);
    ensure(out == expected, || format!("T⁻¹(0, 1) = {out:?}"))?;
    ensure(!out.is_positive(), || "witness image is positive".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = 0;
    for _ in 0..1000 {
        let xi = random_positive_element(&mut rng);
        if !xi.is_positive() || !shift_apply(&xi).is_positive() {
            failures += 1;
        }
    }
    ensure(failures == 0, || format!("{failures} positive inputs lost positivity"))?;
    Ok("T⁻¹(0, 1) = (−e₀, 1) exactly; 1000/1000 positive inputs stay positive".into())
}

fn eigenvectors() -> Outcome {
    let start = Instant::now();
    for k in 0..16 {
        let rep = shift_eigenvector(&UnitRoot::parse(&format!("{k}/16")).map_err(|e| e.to_string())?, 16)
            .map_err(|e| e.to_string())?;
        ensure(rep.exact && rep.verified, || format!("λ = e^(2πi·{k}/16) not verified"))?;
        let want = if k == 0 { 2 } else { 1 };
        ensure(rep.dimension == want && rep.vectors == want, || format!("k = {k}: dimension {}", rep.dimension))?;
    }
    within(start.elapsed(), 5.0)?;
    Ok(format!("16/16 roots verified exactly, fixed space of dimension 2 ({:.3} s)", start.elapsed().as_secs_f64()))
}

fn jordan_pipeline() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let shapes = jordan_shapes();
    let c = cfg(100);
    ensure(c.tol.eig <= 1e-8, || "eigen tolerance above 1e-8".into())?;
    for i in 0..200 {
        let alg = Algebra::new(shapes.choose(&mut rng).unwrap()).unwrap();
        let t = random_jordan_automorphism(&alg, &mut rng);
        let r = analyze(&t, None, &c).map_err(|e| e.to_string())?;
        let ok = r.unital.is_certified()
            && r.positive.is_certified()
            && r.spectrum.in_unit_circle
            && r.inverse_positive.is_certified()
            && r.jordan_automorphism.is_certified()
            && r.is_consistent();
        ensure(ok, || format!("instance {i} on {:?}: {:?}", alg.block_dims(), r.inconsistencies()))?;
    }
    within(start.elapsed(), 60.0)?;
    Ok(format!("200/200 maps: inverse positive, Jordan automorphism, no inconsistency ({:.1} s)", start.elapsed().as_secs_f64()))
}

fn transpose_discriminator() -> Outcome {
    let m2 = Algebra::new(&[2]).unwrap();
    let t = Superoperator::transpose(&m2);
    let c = cfg(200);
    let sd = eigendecompose(&t, &c.tol).map_err(|e| e.to_string())?;
    let off = sd.eigenvalues().iter().map(|l| (l.norm() - 1.0).abs()).fold(0.0, f64::max);
    ensure(off <= 1e-10, || format!("eigenvalues off the circle by {off:e}"))?;
    let r = analyze(&t, None, &c).map_err(|e| e.to_string())?;
    ensure(r.inverse_positive.is_certified(), || "inverse not certified positive".into())?;
    ensure(r.jordan_automorphism.is_certified(), || "Jordan automorphism not certified".into())?;
    let min = t.choi_matrix().min_eigenvalue();
    ensure((min + 1.0).abs() <= 1e-9, || format!("Choi minimum eigenvalue {min}"))?;
    ensure(check_completely_positive(&t, &c).is_refuted(), || "CP not refuted".into())?;
    ensure(r.star_automorphism.is_refuted(), || "*-automorphism not refuted".into())?;
    let Some(Witness::Pair { x, y }) = &r.star_automorphism.witness else {
        return Err("no witness pair".into());
    };
    // T(xy) ≠ T(x)T(y) for the reported pair.
    let lhs = t.apply(&x.mul(y).unwrap()).unwrap();
    let rhs = t.apply(x).unwrap().mul(&t.apply(y).unwrap()).unwrap();
    let gap = lhs.max_abs_diff(&rhs);
    ensure(gap > 0.5, || format!("witness pair defect only {gap}"))?;
    Ok(format!("Sp ⊆ 𝕋 (off by {off:.1e}), Choi min {min:.12}, witness pair defect {gap}"))
}

fn recurrence_inverse() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let c = cfg(50);
    let mut lines = Vec::new();
    let mut failures = Vec::new();
    for phases in golden_phase_sets() {
        let start = Instant::now();
        let t = phase_conjugation(&phases, &mut rng);
        let direct = t.inverse(c.tol.sing).map_err(|e| e.to_string())?.map;
        match inverse_via_powers(&t, 1e-6, 1_000_000, &c) {
            Ok(p) => {
                let err = p.map.distance(&direct);
                lines.push(format!("n = {} error {err:.1e}", p.index));
                if err > 1e-5 {
                    failures.push(format!("phases {phases:?}: ‖T^(n−1) − T⁻¹‖ = {err:e}"));
                }
            }
            Err(Error::BudgetExceeded { best, .. }) => {
                // The best power the search found, for the record.
                let n = best.best_index().unwrap_or(1);
                let err = t.power(n - 1).distance(&direct);
                failures.push(format!(
                    "phases {phases:?}: budget 10⁶ exhausted, best defect {:.1e} at n = {n} (T^(n−1) within {err:.1e} of T⁻¹)",
                    best.best_defect()
                ));
            }
            Err(e) => failures.push(format!("phases {phases:?}: {e}")),
        }
        if start.elapsed().as_secs_f64() >= 30.0 {
            failures.push(format!("phases {phases:?}: took {:.1} s", start.elapsed().as_secs_f64()));
        }
    }
    if failures.is_empty() {
        Ok(lines.join("; "))
    } else {
        Err(failures.join("; "))
    }
}

fn jdlg() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let c = cfg(50);
    let mut worst = [0.0f64; 4];
    for i in 0..100 {
        let t = mixed_spectrum(&mut rng);
        let j = jdlg_projection(&t, &c).map_err(|e| e.to_string())?;
        let p = j.projection.matrix();
        let a = t.matrix();
        let idem = spectral_norm(&(p * p - p));
        let comm = spectral_norm(&(p * a - a * p));
        let h64 = matrix_power(a, 64);
        let decay = j.kernel_basis.column_iter().map(|x| (&h64 * x).norm() / x.norm()).fold(0.0, f64::max);
        let n = j.recurrence.last_index().ok_or("empty recurrence witness")?;
        let defect = spectral_norm(&(matrix_power(a, n) - p));
        let dims = j.reversible_basis.ncols() + j.kernel_basis.ncols();
        ensure(dims == t.dim(), || format!("instance {i}: bases span {dims} of {}", t.dim()))?;
        ensure(idem <= 1e-8 && comm <= 1e-8 && decay <= 1e-6 && defect <= 1e-4, || {
            format!("instance {i}: ‖P²−P‖ {idem:e}, ‖PT−TP‖ {comm:e}, decay {decay:e}, ‖T^n−P‖ {defect:e}")
        })?;
        for (w, v) in worst.iter_mut().zip([idem, comm, decay, defect]) {
            *w = w.max(v);
        }
    }
    Ok(format!(
        "100/100: max ‖P²−P‖ {:.1e}, ‖PT−TP‖ {:.1e}, decay at 64 {:.1e}, ‖T^n−P‖ {:.1e}",
        worst[0], worst[1], worst[2], worst[3]
    ))
}

fn permutations() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let c = cfg(10);
    let mut detected = 0;
    for i in 0..100 {
        let n = rng.random_range(1..=8);
        let s = random_stochastic(n, 0.4, &mut rng);
        let t = Superoperator::stochastic(&s).map_err(|e| e.to_string())?;
        let on_circle = classify_spectrum(&t, 1e-8).map_err(|e| e.to_string())?.in_unit_circle;
        let v = detect_permutation(&t, &c).map_err(|e| e.to_string())?;
        ensure(v.status != Status::Unknown, || format!("instance {i}: undecided"))?;
        ensure(on_circle == v.is_certified(), || format!("instance {i}: on circle {on_circle}, permutation {:?}", v.status))?;
        if v.is_certified() {
            detected += 1;
            let rounded = s.map(f64::round);
            ensure(rounded == s, || format!("instance {i}: rounding changes the matrix"))?;
        }
    }
    Ok(format!("100/100 agree: {detected} permutations on the circle, {} others off it", 100 - detected))
}

fn split() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for s in 0..50 {
        let (a, b) = (rng.random_range(1..=9i64), rng.random_range(1..=9i64));
        let x: Vec<BigRational> = (0..10_000i64).map(|k| rational(a, b * (k + 1) * (k + 1))).collect();
        let r = lp_split(&x, 1.0).map_err(|e| e.to_string())?;
        for k in 0..x.len() {
            ensure(&r.y[k] * &r.z[k] == x[k], || format!("sequence {s}: x ≠ yz at {k}"))?;
        }
        let mut front = 0;
        for (i, inc) in r.increments.iter().enumerate() {
            let bound = BigRational::new(BigInt::one(), BigInt::one() << (i + 1));
            ensure(*inc <= bound, || format!("sequence {s}: increment {} too large", i + 1))?;
            if inc.is_zero() {
                break;
            }
            front = front.max(r.stage_indices[i]);
            ensure(r.z[front..].iter().all(|z| *z <= bound), || format!("sequence {s}: z above 2^-{} beyond {front}", i + 1))?;
        }
    }
    within(start.elapsed(), 60.0)?;
    Ok(format!("50/50 sequences of length 10⁴ split exactly ({:.1} s)", start.elapsed().as_secs_f64()))
}

fn hierarchy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let c = cfg(150);
    let shapes: [&[usize]; 4] = [&[2], &[1, 2], &[3], &[2, 2]];
    let mut violations = 0;
    let mut by_kind = [[0usize; 2]; 3];
    for i in 0..200 {
        let kind = (i % 3) as u8;
        let alg = Algebra::new(shapes.choose(&mut rng).unwrap()).unwrap();
        let t = random_map(kind, &alg, &mut rng);
        let chain = [
            check_completely_positive(&t, &c).status,
            check_n_positive(&t, 2, &c).map_err(|e| e.to_string())?.status,
            check_schwarz(&t, &c).status,
            check_positive(&t, &c).status,
        ];
        // CP certified, or any later link not refuted, forces the next one.
        if chain[0] == Status::Certified && chain[1] == Status::Refuted {
            violations += 1;
        }
        for w in chain[1..].windows(2) {
            if w[0] != Status::Refuted && w[1] == Status::Refuted {
                violations += 1;
            }
        }
        by_kind[kind as usize][(chain[3] == Status::Refuted) as usize] += 1;
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok(format!(
        "200 maps, 0 violations (positive/refuted: CP {:?}, transposed {:?}, random {:?})",
        by_kind[0], by_kind[1], by_kind[2]
    ))
}

fn isometries() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let c = cfg(150);
    let shapes = jordan_shapes();
    for i in 0..200 {
        let alg = Algebra::new(shapes.choose(&mut rng).unwrap()).unwrap();
        let t = random_jordan_automorphism(&alg, &mut rng);
        ensure(check_isometry(&t, &c).is_certified(), || format!("instance {i}: not an isometry"))?;
        ensure(check_positive(&t, &c).is_certified(), || format!("instance {i}: not positive"))?;
        let inv = t.inverse(c.tol.sing).map_err(|e| e.to_string())?;
        ensure(!check_positive(&inv.map, &c).is_refuted(), || format!("instance {i}: inverse refuted"))?;
        let id = CMatrix::identity(t.dim(), t.dim());
        ensure(spectral_norm(&(t.matrix() * inv.map.matrix() - id)) < 1e-9, || format!("instance {i}: bad inverse"))?;
    }
    Ok("200/200 positive bijective isometries have a non-refuted positive inverse".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("counterexample norm table", norm_table),
        ("counterexample positivity witness", positivity_witness),
        ("eigenvector suite", eigenvectors),
        ("unit-circle spectrum pipeline", jordan_pipeline),
        ("transpose discriminator", transpose_discriminator),
        ("recurrence inversion accuracy", recurrence_inverse),
        ("JdLG decomposition", jdlg),
        ("permutation detection", permutations),
        ("lp_split conformance", split),
        ("positivity hierarchy audit", hierarchy),
        ("isometries have positive inverses", isometries),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
