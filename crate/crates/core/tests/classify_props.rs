use qmeas_core::classify::{classify, post_processing_decomposition};
use qmeas_core::linalg::ComplexMatrix;
use qmeas_core::models::{random_commutative_povm, random_povm_with, rng, PovmClass};
use qmeas_core::{Observable, Tolerances};

const CLASSES: [PovmClass; 5] =
    [PovmClass::Generic, PovmClass::Sharp, PovmClass::Norm1Unsharp, PovmClass::CompletelyUnsharp, PovmClass::SmallRank];

#[test]
fn implication_lattice_on_random_observables() {
    let tol = Tolerances::default();
    let mut checked = 0;
    for seed in 0..500u64 {
        let mut g = rng(seed);
        let class = CLASSES[(seed % 5) as usize];
        let dim = 2 + (seed / 5 % 3) as usize;
        let outcomes = 2 + (seed / 15 % 2) as usize;
        let Ok(e) = random_povm_with(dim, outcomes, class, &mut g, &tol) else { continue };
        let c = classify(&e, &tol);
        if c.is_sharp {
            assert!(c.is_norm1 && c.is_commutative, "seed {seed}");
        }
        if c.is_completely_unsharp {
            assert!(!c.is_norm1 && !c.is_small_rank, "seed {seed}");
            assert!(c.per_effect_ranks.iter().all(|&r| r == dim));
        }
        if c.is_small_rank {
            assert!(c.is_non_degenerate, "seed {seed}");
        }
        checked += 1;
    }
    assert!(checked > 400);
}

#[test]
fn complete_unsharpness_matches_strict_post_processing() {
    let tol = Tolerances::default();
    for seed in 0..100u64 {
        let mut g = rng(seed);
        let strict = seed % 2 == 0;
        let (e, _) = random_commutative_povm(3, 2, strict, &mut g, &tol).unwrap();
        let c = classify(&e, &tol);
        let pp = post_processing_decomposition(&e, &tol).unwrap();
        for x in 0..e.len() {
            assert!(pp.reconstruct(x).distance(e.effect(x)) < 1e-8);
        }
        for y in 0..pp.sharp_base.len() {
            let col: f64 = pp.p.iter().map(|row| row[y]).sum();
            assert!((col - 1.0).abs() < 1e-9);
        }
        assert_eq!(c.is_completely_unsharp, pp.is_strictly_mixing(tol.rank_threshold), "seed {seed}");
    }
}

#[test]
fn rank_one_and_large_rank_sharp() {
    let tol = Tolerances::default();
    let c = classify(&Observable::computational(3), &tol);
    assert!(c.is_small_rank && c.is_non_degenerate);
    let effects = vec![ComplexMatrix::diag(&[1.0, 1.0, 0.0, 0.0]), ComplexMatrix::diag(&[0.0, 0.0, 1.0, 1.0])];
    let c = classify(&Observable::from_effects(effects, &tol).unwrap(), &tol);
    assert!(c.is_sharp && !c.is_small_rank && !c.is_non_degenerate);
}
