//! JSON model files.
//!
//! ```json
//! {"schema_version": "1", "kind": "observable", "dims": [2],
//!  "payload": {"labels": ["0", "1"], "effects": [[[[1,0],[0,0]],[[0,0],[0,0]]], ...]}}
//! ```
//!
//! Complex entries are `[re, im]`, matrices are arrays of rows. Channels and
//! operations carry `{"kraus": [...]}` or `{"choi": ...}`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Tolerances, C64};
use crate::models::CatalogModel;
use crate::qm::{Channel, Instrument, MeasurementScheme, Observable, Operation, State};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Observable,
    State,
    Channel,
    Operation,
    Instrument,
    Scheme,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Observable => "observable",
            ModelKind::State => "state",
            ModelKind::Channel => "channel",
            ModelKind::Operation => "operation",
            ModelKind::Instrument => "instrument",
            ModelKind::Scheme => "scheme",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: String,
    pub kind: ModelKind,
    pub dims: Vec<usize>,
    pub payload: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Observable(Observable),
    State(State),
    Channel(Channel),
    Operation(Operation),
    Instrument(Instrument),
    Scheme(MeasurementScheme),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Observable(_) => ModelKind::Observable,
            Model::State(_) => ModelKind::State,
            Model::Channel(_) => ModelKind::Channel,
            Model::Operation(_) => ModelKind::Operation,
            Model::Instrument(_) => ModelKind::Instrument,
            Model::Scheme(_) => ModelKind::Scheme,
        }
    }
}

impl From<CatalogModel> for Model {
    fn from(m: CatalogModel) -> Self {
        match m {
            CatalogModel::Scheme(s) => Model::Scheme(s),
            CatalogModel::Instrument { instrument, .. } => Model::Instrument(instrument),
            CatalogModel::Channel(c) => Model::Channel(c),
        }
    }
}

type MatrixJson = Vec<Vec<[f64; 2]>>;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObservablePayload {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    effects: Vec<MatrixJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StatePayload {
    matrix: MatrixJson,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MapPayload {
    Kraus { kraus: Vec<MatrixJson> },
    Choi { choi: MatrixJson },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstrumentPayload {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    operations: Vec<MapPayload>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemePayload {
    xi: MatrixJson,
    interaction: MapPayload,
    pointer: ObservablePayload,
}

fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

fn matrix_from_json(m: &MatrixJson) -> Result<ComplexMatrix> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::Format("empty matrix".into()));
    }
    if m.iter().any(|r| r.len() != cols) {
        return Err(Error::Format("ragged matrix rows".into()));
    }
    let data = m.iter().flatten().map(|[re, im]| C64::new(*re, *im)).collect();
    Ok(ComplexMatrix::from_vec(rows, cols, data))
}

fn format_err(e: serde_json::Error) -> Error {
    Error::Format(e.to_string())
}

fn map_to_json(op: &Operation) -> MapPayload {
    MapPayload::Kraus { kraus: op.kraus().iter().map(matrix_to_json).collect() }
}

fn map_from_json(p: &MapPayload, dim_in: usize, dim_out: usize, tol: &Tolerances) -> Result<Operation> {
    match p {
        MapPayload::Kraus { kraus } => {
            let ks = kraus.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
            Operation::new(dim_in, dim_out, ks, tol)
        }
        MapPayload::Choi { choi } => Operation::from_choi(&matrix_from_json(choi)?, dim_in, dim_out, tol),
    }
}

fn observable_to_json(e: &Observable) -> ObservablePayload {
    ObservablePayload { labels: Some(e.labels().to_vec()), effects: e.effects().iter().map(matrix_to_json).collect() }
}

fn observable_from_json(p: &ObservablePayload, tol: &Tolerances) -> Result<Observable> {
    let effects = p.effects.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
    match &p.labels {
        Some(l) => Observable::new(l.clone(), effects, tol),
        None => Observable::from_effects(effects, tol),
    }
}

pub fn to_model_file(model: &Model) -> ModelFile {
    let (dims, payload) = match model {
        Model::Observable(e) => (vec![e.dim()], serde_json::to_value(observable_to_json(e))),
        Model::State(s) => (vec![s.dim()], serde_json::to_value(StatePayload { matrix: matrix_to_json(s.matrix()) })),
        Model::Channel(c) => (vec![c.dim_in(), c.dim_out()], serde_json::to_value(map_to_json(c))),
        Model::Operation(o) => (vec![o.dim_in(), o.dim_out()], serde_json::to_value(map_to_json(o))),
        Model::Instrument(i) => (
            vec![i.dim()],
            serde_json::to_value(InstrumentPayload {
                labels: Some(i.labels().to_vec()),
                operations: i.operations().iter().map(map_to_json).collect(),
            }),
        ),
        Model::Scheme(m) => (
            vec![m.system_dim(), m.ancilla_dim()],
            serde_json::to_value(SchemePayload {
                xi: matrix_to_json(m.xi().matrix()),
                interaction: map_to_json(m.interaction()),
                pointer: observable_to_json(m.pointer()),
            }),
        ),
    };
    ModelFile {
        schema_version: SCHEMA_VERSION.into(),
        kind: model.kind(),
        dims,
        payload: payload.expect("plain data serialises"),
    }
}

fn dims<const N: usize>(f: &ModelFile) -> Result<[usize; N]> {
    <[usize; N]>::try_from(f.dims.as_slice())
        .ok()
        .filter(|d| d.iter().all(|&v| v > 0))
        .ok_or_else(|| Error::Format(format!("{} expects {N} positive dims, got {:?}", f.kind.name(), f.dims)))
}

fn payload<T: serde::de::DeserializeOwned>(f: &ModelFile) -> Result<T> {
    serde_json::from_value(f.payload.clone()).map_err(format_err)
}

fn check_dim(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch(format!("{what}: dims say {expected}, payload has {got}")));
    }
    Ok(())
}

pub fn from_model_file(f: &ModelFile, tol: &Tolerances) -> Result<Model> {
    if f.schema_version != SCHEMA_VERSION {
        return Err(Error::Format(format!("unsupported schema_version {:?}", f.schema_version)));
    }
    Ok(match f.kind {
        ModelKind::Observable => {
            let [d] = dims(f)?;
            let e = observable_from_json(&payload(f)?, tol)?;
            check_dim("observable", d, e.dim())?;
            Model::Observable(e)
        }
        ModelKind::State => {
            let [d] = dims(f)?;
            let p: StatePayload = payload(f)?;
            let s = State::new(matrix_from_json(&p.matrix)?, tol)?;
            check_dim("state", d, s.dim())?;
            Model::State(s)
        }
        ModelKind::Channel => {
            let [din, dout] = dims(f)?;
            let op = map_from_json(&payload(f)?, din, dout, tol)?;
            Model::Channel(Channel::from_operation(op, tol)?)
        }
        ModelKind::Operation => {
            let [din, dout] = dims(f)?;
            Model::Operation(map_from_json(&payload(f)?, din, dout, tol)?)
        }
        ModelKind::Instrument => {
            let [d] = dims(f)?;
            let p: InstrumentPayload = payload(f)?;
            let ops = p.operations.iter().map(|o| map_from_json(o, d, d, tol)).collect::<Result<Vec<_>>>()?;
            let labels = p.labels.unwrap_or_else(|| (0..ops.len()).map(|x| x.to_string()).collect());
            Model::Instrument(Instrument::new(labels, ops, tol)?)
        }
        ModelKind::Scheme => {
            let [ds, da] = dims(f)?;
            let p: SchemePayload = payload(f)?;
            let xi = State::new(matrix_from_json(&p.xi)?, tol)?;
            check_dim("ancilla state", da, xi.dim())?;
            let pointer = observable_from_json(&p.pointer, tol)?;
            check_dim("pointer", da, pointer.dim())?;
            let n = ds * da;
            let interaction = Channel::from_operation(map_from_json(&p.interaction, n, n, tol)?, tol)?;
            Model::Scheme(MeasurementScheme::new(ds, xi, interaction, pointer)?)
        }
    })
}

pub fn to_json_string(model: &Model) -> String {
    serde_json::to_string_pretty(&to_model_file(model)).expect("plain data serialises")
}

pub fn parse_model(text: &str, tol: &Tolerances) -> Result<Model> {
    let f: ModelFile = serde_json::from_str(text).map_err(format_err)?;
    from_model_file(&f, tol)
}

pub fn read_model(path: &Path, tol: &Tolerances) -> Result<Model> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    parse_model(&text, tol)
}

pub fn write_model(path: &Path, model: &Model) -> Result<()> {
    std::fs::write(path, to_json_string(model)).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn observable_round_trip_is_exact() {
        let e = models::random_povm(3, 2, 5);
        let back = parse_model(&to_json_string(&Model::Observable(e.clone())), &tol()).unwrap();
        assert_eq!(back, Model::Observable(e));
    }

    #[test]
    fn choi_payload_is_accepted() {
        let phi = models::random_channel(2, 2, 2, 1);
        let text = serde_json::json!({
            "schema_version": "1",
            "kind": "channel",
            "dims": [2, 2],
            "payload": {"choi": matrix_to_json(&phi.choi())}
        })
        .to_string();
        let Model::Channel(back) = parse_model(&text, &tol()).unwrap() else { panic!("kind") };
        assert!(back.distance(&phi) < 1e-10);
    }

    #[test]
    fn bad_effect_sum_is_rejected() {
        let text = r#"{"schema_version":"1","kind":"observable","dims":[2],
            "payload":{"effects":[[[[1,0],[0,0]],[[0,0],[0,0]]],[[[0.5,0],[0,0]],[[0,0],[1,0]]]]}}"#;
        assert!(matches!(parse_model(text, &tol()), Err(Error::InvalidObservable { .. })));
    }

    #[test]
    fn wrong_version_and_kind_mismatch() {
        let e = Model::Observable(Observable::computational(2));
        let mut f = to_model_file(&e);
        f.schema_version = "2".into();
        assert!(from_model_file(&f, &tol()).is_err());
        let mut f = to_model_file(&e);
        f.kind = ModelKind::State;
        assert!(from_model_file(&f, &tol()).is_err());
    }
}
