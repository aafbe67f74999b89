use qmeas_core::io::{parse_model, read_model, to_json_string, write_model, Model, ModelKind};
use qmeas_core::models::{self, random_channel, random_constrained_scheme, random_full_rank_state, random_povm};
use qmeas_core::{Error, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

#[test]
fn catalog_round_trips_through_json() {
    let t = tol();
    for entry in models::catalog(&t).unwrap() {
        let model: Model = entry.model.into();
        let text = to_json_string(&model);
        let back = parse_model(&text, &t).unwrap();
        assert_eq!(back, model, "{}", entry.name);
        assert_eq!(to_json_string(&back), text);
    }
}

#[test]
fn random_models_round_trip_through_files() {
    let t = tol();
    let dir = std::env::temp_dir().join(format!("qmeas-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let models = vec![
        Model::Observable(random_povm(3, 4, 1)),
        Model::State(random_full_rank_state(3, 2, None)),
        Model::Channel(random_channel(2, 3, 2, 3)),
        Model::Scheme(random_constrained_scheme(4, &t).unwrap()),
        Model::Instrument(models::random_instrument(2, 3, 2, 5)),
    ];
    for (i, m) in models.into_iter().enumerate() {
        let path = dir.join(format!("{i}.json"));
        write_model(&path, &m).unwrap();
        assert_eq!(read_model(&path, &t).unwrap(), m);
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn choi_payloads_are_accepted() {
    let t = tol();
    let phi = random_channel(2, 2, 2, 9);
    let choi: Vec<Vec<[f64; 2]>> = {
        let c = phi.choi();
        (0..c.rows()).map(|i| (0..c.cols()).map(|j| [c[(i, j)].re, c[(i, j)].im]).collect()).collect()
    };
    let text = serde_json::json!({"schema_version": "1", "kind": "channel", "dims": [2, 2], "payload": {"choi": choi}})
        .to_string();
    let Model::Channel(back) = parse_model(&text, &t).unwrap() else { panic!("wrong kind") };
    assert!(back.as_operation().distance(phi.as_operation()) < 1e-8);
}

#[test]
fn malformed_files_are_format_errors() {
    let t = tol();
    let cases = [
        "not json",
        r#"{"schema_version": "2", "kind": "state", "dims": [1], "payload": {"matrix": [[[1.0, 0.0]]]}}"#,
        r#"{"schema_version": "1", "kind": "state", "dims": [1], "payload": {"matrix": [[[1.0, 0.0]]], "extra": 1}}"#,
        r#"{"schema_version": "1", "kind": "gizmo", "dims": [1], "payload": {}}"#,
    ];
    for c in cases {
        assert!(matches!(parse_model(c, &t), Err(Error::Format(_))), "{c}");
    }
    let bad_state = r#"{"schema_version": "1", "kind": "state", "dims": [1], "payload": {"matrix": [[[2.0, 0.0]]]}}"#;
    assert!(parse_model(bad_state, &t).is_err());
    let wrong_dims = r#"{"schema_version": "1", "kind": "state", "dims": [2], "payload": {"matrix": [[[1.0, 0.0]]]}}"#;
    assert!(matches!(parse_model(wrong_dims, &t), Err(Error::DimensionMismatch(_))));
}

#[test]
fn generators_are_reproducible() {
    let t = tol();
    assert_eq!(random_povm(3, 3, 42), random_povm(3, 3, 42));
    assert_ne!(random_povm(3, 3, 42), random_povm(3, 3, 43));
    assert_eq!(random_channel(2, 3, 2, 8), random_channel(2, 3, 2, 8));
    assert_eq!(random_constrained_scheme(11, &t).unwrap(), random_constrained_scheme(11, &t).unwrap());
    let a = models::random_bistochastic(3, 2, 5);
    let b = models::random_bistochastic(3, 2, 5);
    assert!(a.as_operation().distance(b.as_operation()) == 0.0);
    let s = random_full_rank_state(4, 6, None);
    assert!(s.matrix().distance(random_full_rank_state(4, 6, None).matrix()) == 0.0);
    assert!(s.min_eigenvalue(&t) > 0.0);
    assert_eq!(Model::State(s).kind(), ModelKind::State);
}
