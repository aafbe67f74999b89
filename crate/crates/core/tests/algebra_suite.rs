use qmeas_core::algebra::{decompose_instrument, effect_blocks, fixed_point_space, verify_algebra};
use qmeas_core::classify::classify;
use qmeas_core::linalg::{hermitian_eig, ComplexMatrix};
use qmeas_core::models::{self, rng};
use qmeas_core::thirdlaw::{cesaro_average, check_scheme_thirdlaw};
use qmeas_core::{Instrument, MeasurementScheme, Observable, State, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn constrained_fixtures() -> Vec<(&'static str, MeasurementScheme)> {
    let t = tol();
    let xi = models::default_extremal_xi(&t);
    let unsharp =
        Observable::from_effects(vec![ComplexMatrix::diag(&[0.75, 0.25]), ComplexMatrix::diag(&[0.25, 0.75])], &t)
            .unwrap();
    let mut out = vec![
        ("swap", models::build_swap_nondisturbance_scheme(&xi, &t).unwrap()),
        ("shift2", models::build_firstkind_shift_model(2, &[0.3, 0.7], &t).unwrap()),
        ("shift3", models::build_firstkind_shift_model(3, &[0.2, 0.5, 0.3], &t).unwrap()),
        ("extremal", models::build_extremal_model(&xi, &t).unwrap().scheme),
        ("luders", models::build_luders_scheme(&unsharp, &t).unwrap()),
        (
            "trivial-swap",
            models::build_trivial_swap_scheme(
                &State::diagonal(&[0.6, 0.4], &t).unwrap(),
                &Observable::computational(2),
                &t,
            )
            .unwrap(),
        ),
    ];
    for seed in 0..12 {
        out.push(("random", models::random_constrained_scheme(seed, &t).unwrap()));
    }
    out
}

#[test]
fn swap_scheme_has_one_square_block_with_ancilla_state() {
    let t = tol();
    let xi = State::diagonal(&[0.7, 0.3], &t).unwrap();
    let m = models::build_swap_nondisturbance_scheme(&xi, &t).unwrap();
    let inst = m.to_instrument(&t).unwrap();
    let (v, f) = decompose_instrument(&inst, &t, &mut rng(1)).unwrap();
    assert_eq!(v.len(), 4);
    assert_eq!(f.shape(), vec![(2, 2)]);
    assert!(f.blocks[0].omega.matrix().distance(xi.matrix()) < 1e-8);
    assert!(f.reconstructed_space().distance(&v) < 1e-7);
}

#[test]
fn shift_model_has_singleton_blocks() {
    let t = tol();
    for (n, q) in [(2, vec![0.3, 0.7]), (3, vec![0.2, 0.5, 0.3]), (4, vec![0.1, 0.2, 0.3, 0.4])] {
        let m = models::build_firstkind_shift_model(n, &q, &t).unwrap();
        let inst = m.to_instrument(&t).unwrap();
        let (v, f) = decompose_instrument(&inst, &t, &mut rng(2)).unwrap();
        assert_eq!(v.len(), n);
        assert_eq!(f.shape(), vec![(1, 1); n]);
        assert!(f.reconstructed_space().distance(&v) < 1e-7);
        let e = inst.induced_observable(&t).unwrap();
        let blocks = effect_blocks(&e, &f, &t).unwrap();
        let (lo, hi) = blocks.spectral_range(&t);
        assert!(lo > t.rank_threshold && hi < 1.0 - t.rank_threshold);
    }
}

#[test]
fn fixed_points_commute_with_measured_effects() {
    let t = tol();
    for (name, m) in constrained_fixtures() {
        assert!(check_scheme_thirdlaw(&m, &t).constrained, "{name}");
        let inst = m.to_instrument(&t).unwrap();
        let e = inst.induced_observable(&t).unwrap();
        let v = fixed_point_space(&inst, &t).unwrap();
        assert!(verify_algebra(&v, &t), "{name}");
        assert!(v.max_commutator_with(&e) < 1e-7, "{name}");
    }
}

#[test]
fn averaged_channel_is_an_idempotent_projection() {
    let t = tol();
    for (name, m) in constrained_fixtures() {
        let s = m.to_instrument(&t).unwrap().total_superoperator();
        let avg = cesaro_average(&s).unwrap();
        assert!((avg.matmul(&s) - avg.clone()).frobenius_norm() < 1e-8, "{name}");
        assert!((avg.matmul(&avg) - avg.clone()).frobenius_norm() < 1e-8, "{name}");
    }
}

#[test]
fn decompositions_reconstruct_and_split_effects() {
    let t = tol();
    for (name, m) in constrained_fixtures() {
        let inst = m.to_instrument(&t).unwrap();
        let e = inst.induced_observable(&t).unwrap();
        let (v, f) = decompose_instrument(&inst, &t, &mut rng(3)).unwrap();
        assert!(f.projection_defect() < 1e-8, "{name}");
        assert!(f.reconstructed_space().distance(&v) < 1e-7, "{name}");
        for b in &f.blocks {
            assert_eq!(b.dim_k * b.dim_r, qmeas_core::linalg::numerical_rank(&b.projection, &t));
            assert!(b.omega.is_full_rank(&t), "{name}");
        }
        if classify(&e, &t).is_trivial {
            continue;
        }
        let blocks = effect_blocks(&e, &f, &t).unwrap();
        assert!(blocks.residual < 1e-7, "{name}");
        // Every block effect is neither zero nor the identity.
        for per_x in &blocks.blocks {
            for ex in per_x {
                let spec = hermitian_eig(ex, &t).unwrap();
                assert!(spec.max() > t.rank_threshold, "{name}");
                assert!(spec.min() < 1.0 - t.rank_threshold, "{name}");
            }
        }
    }
}

#[test]
fn small_rank_pointer_gives_trivial_fixed_points() {
    let t = tol();
    let m = models::build_trivial_swap_scheme(
        &State::diagonal(&[0.6, 0.4], &t).unwrap(),
        &Observable::computational(2),
        &t,
    )
    .unwrap();
    let inst = m.to_instrument(&t).unwrap();
    let c = classify(&inst.induced_observable(&t).unwrap(), &t);
    assert!(c.is_small_rank);
    let v = fixed_point_space(&inst, &t).unwrap();
    assert_eq!(v.len(), 1);
    assert!(v.residual(&ComplexMatrix::identity(2)) < 1e-9);
}

#[test]
fn non_degenerate_observables_give_abelian_fixed_points() {
    let t = tol();
    for (name, m) in constrained_fixtures() {
        let inst: Instrument = m.to_instrument(&t).unwrap();
        if !classify(&inst.induced_observable(&t).unwrap(), &t).is_non_degenerate {
            continue;
        }
        let v = fixed_point_space(&inst, &t).unwrap();
        assert!(v.max_internal_commutator() < 1e-7, "{name}");
    }
}
