use qmeas_core::batch::{constrained_scheme_sweep, Execution};
use qmeas_core::linalg::ComplexMatrix;
use qmeas_core::models::{self, random_instrument};
use qmeas_core::properties::{
    check_extremal, check_extremal_scheme_identity, check_first_kind, check_ideal, check_non_disturbance,
    check_repeatable, property_report, rank_bound_holds, Verdict,
};
use qmeas_core::{Instrument, Observable, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn fixture_instruments() -> Vec<Instrument> {
    let t = tol();
    let mut out = Vec::new();
    for entry in models::catalog(&t).unwrap() {
        match entry.model {
            models::CatalogModel::Scheme(m) => out.push(m.to_instrument(&t).unwrap()),
            models::CatalogModel::Instrument { instrument, .. } => out.push(instrument),
            models::CatalogModel::Channel(_) => {}
        }
    }
    out.push(Instrument::luders(&Observable::computational(3), &t).unwrap());
    out
}

#[test]
fn repeatable_implies_first_kind() {
    let t = tol();
    let mut insts = fixture_instruments();
    for seed in 0..200u64 {
        insts.push(random_instrument(2 + (seed % 2) as usize, 2, 1 + (seed % 3) as usize, seed));
    }
    let mut repeatable = 0;
    for inst in &insts {
        if check_repeatable(inst, &t).holds {
            repeatable += 1;
            assert!(check_first_kind(inst, &t).holds);
        }
    }
    assert!(repeatable > 0);
}

#[test]
fn non_disturbance_of_measured_observable_is_first_kind() {
    let t = tol();
    let mut insts = fixture_instruments();
    for seed in 0..50u64 {
        insts.push(random_instrument(2, 2, 2, seed));
    }
    for inst in &insts {
        let e = inst.induced_observable(&t).unwrap();
        assert_eq!(check_non_disturbance(inst, &e, &t).unwrap().holds, check_first_kind(inst, &t).holds);
    }
}

#[test]
fn non_disturbance_rejects_mismatched_dimensions() {
    let t = tol();
    let inst = Instrument::luders(&Observable::computational(2), &t).unwrap();
    assert!(check_non_disturbance(&inst, &Observable::computational(3), &t).is_err());
}

#[test]
fn nondisturbance_example_leaves_noncommuting_observable_intact() {
    let t = tol();
    let m = models::build_nondisturbance_example(&t).unwrap();
    assert!(m.e.max_cross_commutator(&m.f) > 0.1);
    assert!(check_non_disturbance(&m.instrument, &m.f, &t).unwrap().holds);
    assert!(!check_repeatable(&m.instrument, &t).holds);
}

#[test]
fn catalog_flags_are_reproduced() {
    let t = tol();
    for entry in models::catalog(&t).unwrap() {
        assert_eq!(entry.mismatches(&t).unwrap(), Vec::<&str>::new(), "{}", entry.name);
    }
}

#[test]
fn luders_instrument_of_sharp_observable_is_ideal_and_repeatable() {
    let t = tol();
    let e = Observable::from_effects(
        vec![ComplexMatrix::diag(&[1.0, 1.0, 0.0]), ComplexMatrix::diag(&[0.0, 0.0, 1.0])],
        &t,
    )
    .unwrap();
    let inst = Instrument::luders(&e, &t).unwrap();
    let r = property_report(&inst, Some(&e), &t).unwrap();
    assert!(r.first_kind && r.repeatable);
    assert_eq!(r.ideal, Verdict::True);
    assert!(r.non_disturbance_of.unwrap().holds);
}

#[test]
fn extremal_model_matches_its_scheme() {
    let t = tol();
    let xi = models::default_extremal_xi(&t);
    let m = models::build_extremal_model(&xi, &t).unwrap();
    let induced = m.instrument.induced_observable(&t).unwrap();
    let sharp = Observable::from_effects(
        (0..2).map(|x| ComplexMatrix::identity(2).kron(&ComplexMatrix::unit(2, x, x))).collect(),
        &t,
    )
    .unwrap();
    assert!(induced.distance(&sharp) < 1e-9);
    assert!(m.scheme.to_instrument(&t).unwrap().distance(&m.instrument) < 1e-9);
    let ext = check_extremal(&m.instrument, &t);
    assert_eq!(ext.kraus_ranks, vec![2, 2]);
    assert_eq!(ext.gram_rank, 8);
    assert_eq!(ext.product_count, 8);
    assert!(ext.extremal);
    assert!(rank_bound_holds(&ext.kraus_ranks, 4));
    assert!(check_extremal_scheme_identity(&m.scheme, &m.instrument, &t).unwrap().holds);
    assert_eq!(check_ideal(&m.instrument, &t).verdict, Verdict::False);
}

#[test]
fn extremal_identity_rejects_a_foreign_instrument() {
    let t = tol();
    let m = models::build_extremal_model(&models::default_extremal_xi(&t), &t).unwrap();
    let other = Instrument::luders(&m.instrument.induced_observable(&t).unwrap(), &t).unwrap();
    assert!(check_extremal_scheme_identity(&m.scheme, &other, &t).is_err());
}

#[test]
fn extremal_constrained_instruments_satisfy_the_rank_bound() {
    let t = tol();
    let mut extremal = 0;
    let mut schemes: Vec<_> = (0..40u64).map(|s| models::random_constrained_scheme(s, &t).unwrap()).collect();
    for entry in models::catalog(&t).unwrap() {
        if let models::CatalogModel::Scheme(m) = entry.model {
            schemes.push(m);
        }
    }
    for m in schemes {
        let inst = m.to_instrument(&t).unwrap();
        let e = inst.induced_observable(&t).unwrap();
        let ext = check_extremal(&inst, &t);
        if ext.extremal {
            extremal += 1;
            let ranks: Vec<usize> = e.effects().iter().map(|x| qmeas_core::linalg::numerical_rank(x, &t)).collect();
            assert!(rank_bound_holds(&ranks, inst.dim()));
        }
    }
    assert!(extremal >= 2);
}

#[test]
fn unconstrained_instruments_can_be_extremal_below_the_bound() {
    let t = tol();
    let inst = Instrument::luders(&Observable::computational(3), &t).unwrap();
    let ext = check_extremal(&inst, &t);
    assert!(ext.extremal);
    assert!(!rank_bound_holds(&[1, 1, 1], 3));
}

#[test]
fn random_constrained_schemes_respect_the_impossibility_results() {
    let recs = constrained_scheme_sweep(Execution::Parallel, 0..60, &tol());
    let bad: Vec<_> = recs.iter().filter(|r| !r.consistent()).collect();
    assert!(bad.is_empty(), "{bad:?}");
    assert!(recs.iter().all(|r| r.constrained));
}
