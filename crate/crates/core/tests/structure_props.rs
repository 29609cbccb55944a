mod common;

use common::{cfg, jordan_shapes};
use nalgebra::DMatrix;
use posinv::positivity::check_positive;
use posinv::shiftlab::truncation::{finite_truncation, truncation_experiment};
use posinv::structure::{analyze, detect_permutation, random_jordan_automorphism, random_stochastic, ImplicationStatus};
use posinv::{Algebra, Status, Superoperator};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn status(report: &posinv::structure::AnalysisReport, id: u8) -> ImplicationStatus {
    report.implications.iter().find(|i| i.id == id).unwrap().status
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn jordan_automorphisms_pass_the_audit(d in prop::sample::select(jordan_shapes()), seed in any::<u64>()) {
        let alg = Algebra::new(&d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_jordan_automorphism(&alg, &mut rng);
        let mut c = cfg(60);
        c.recurrence_budget = 20_000;
        let r = analyze(&t, None, &c).unwrap();
        prop_assert!(r.inverse_positive.is_certified());
        prop_assert!(r.isometry.is_certified());
        prop_assert!(r.doubly_power_bounded.is_certified());
        prop_assert!(r.jordan_automorphism.is_certified());
        prop_assert!(r.is_consistent(), "{:?}", r.inconsistencies());
        for id in [1, 3, 4, 5] {
            prop_assert_eq!(status(&r, id), ImplicationStatus::Pass, "line {}", id);
        }
        // Lines 2 and 6 need a Schwarz map; a transpose on some block removes that.
        let star = r.star_automorphism.status;
        for id in [2, 6] {
            let want = if star == Status::Certified { ImplicationStatus::Pass } else { ImplicationStatus::NotApplicable };
            prop_assert_eq!(status(&r, id), want, "line {}", id);
        }
    }

    #[test]
    fn positive_isometries_have_positive_inverses(d in prop::sample::select(jordan_shapes()), seed in any::<u64>()) {
        let alg = Algebra::new(&d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_jordan_automorphism(&alg, &mut rng);
        let c = cfg(100);
        prop_assert!(posinv::structure::check_isometry(&t, &c).is_certified());
        let inv = t.inverse(c.tol.sing).unwrap();
        prop_assert!(check_positive(&inv.map, &c).status != Status::Refuted);
    }

    #[test]
    fn detected_permutations_round_exactly(n in 1usize..=8, p in 0.0f64..1.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_stochastic(n, p, &mut rng);
        let t = Superoperator::stochastic(&s).unwrap();
        let c = cfg(10);
        let v = detect_permutation(&t, &c).unwrap();
        let rounded = s.map(|x| x.round());
        let is_perm = rounded.iter().all(|&x| x == 0.0 || x == 1.0)
            && rounded.row_iter().all(|r| r.sum() == 1.0)
            && rounded.column_iter().all(|col| col.sum() == 1.0);
        let err = (&s - &rounded).abs().max();
        if v.is_certified() {
            prop_assert!(is_perm && err <= c.tol.entry);
            prop_assert!(v.detail["rounding_error"] <= c.tol.entry);
        } else {
            prop_assert!(!(is_perm && err <= c.tol.entry));
        }
    }
}

#[test]
fn truncations_trigger_no_inconsistency() {
    let c = cfg(60);
    for row in truncation_experiment(6, 32, &c).unwrap() {
        assert_eq!(row.inconsistencies, 0, "{row:?}");
        // Positive and unital, yet the inverse is not positive: there is no
        // faithful sub-invariant density, so line 4 must stay silent.
        assert!(row.positive && row.unital && !row.inverse_positive);
        assert!(!row.density_hypothesis);
    }
    for n in 1..=6 {
        let r = analyze(&finite_truncation(n).unwrap(), None, &c).unwrap();
        assert!(r.is_consistent());
        assert_ne!(status(&r, 4), ImplicationStatus::Pass);
        assert!(r.doubly_power_bounded.is_refuted());
    }
}

#[test]
fn non_stochastic_input_is_rejected() {
    let c = cfg(10);
    let t = Superoperator::stochastic(&DMatrix::from_row_slice(2, 2, &[0.5, 0.6, 0.5, 0.5])).unwrap();
    assert!(detect_permutation(&t, &c).is_err());
    let m2 = Algebra::new(&[2]).unwrap();
    assert!(detect_permutation(&Superoperator::identity(&m2), &c).is_err());
}
