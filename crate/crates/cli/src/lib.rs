//! Command-line front end: model files in, verdict reports out.
//!
//! [`run`] does all the work and never panics past its boundary; the binary
//! only forwards its output and exit code.

use std::ffi::OsString;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use qmeas_core::algebra::decompose_instrument;
use qmeas_core::classify::classify;
use qmeas_core::io::{read_model, to_json_string, write_model, Model};
use qmeas_core::linalg::{numerical_rank, ComplexMatrix};
use qmeas_core::models::{self, rng, CatalogModel};
use qmeas_core::properties::{
    check_extremal, check_first_kind, check_ideal, check_non_disturbance, check_repeatable, Verdict,
};
use qmeas_core::table::reproduce_table1;
use qmeas_core::thirdlaw::{check_channel_thirdlaw, check_scheme_thirdlaw, purify_via_unconstrained};
use qmeas_core::{Instrument, Observable, State, Tolerances};

pub const EXIT_TRUE: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "qmeas", version, about = "Third-law checks for finite-dimensional measurement models")]
pub struct Cli {
    /// Absolute tolerance for equality checks.
    #[arg(long, global = true, env = "QMEAS_TOL_ATOL")]
    pub tol_atol: Option<f64>,
    /// Relative threshold for numerical rank.
    #[arg(long, global = true)]
    pub tol_rank: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Emit a JSON report.
    #[arg(long, global = true, conflicts_with = "human")]
    pub json: bool,
    /// Emit a plain-text report (default).
    #[arg(long, global = true)]
    pub human: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classify the observable stored in PATH.
    Classify { path: PathBuf },
    /// Run one property check on the model stored in PATH.
    Check {
        #[arg(value_enum)]
        what: CheckKind,
        path: PathBuf,
        /// Observable file for the non-disturbance check.
        #[arg(long)]
        against: Option<PathBuf>,
    },
    /// Rebuild the possibility table and compare it with the expected one.
    Table1,
    /// Run a worked example.
    Demo { name: String },
    /// Export a model file; `list` shows the available names, `all` writes the catalog to --out.
    Gen {
        name: String,
        /// Output file, or directory for `all`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Export the observable measured by the model instead of the model.
        #[arg(long)]
        observable: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckKind {
    ChannelThirdlaw,
    SchemeThirdlaw,
    Nondisturbance,
    Firstkind,
    Repeatable,
    Ideal,
    Extremal,
}

/// Everything a process would print, plus its exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: Vec<String>,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub verdict: String,
    pub result: Value,
    pub exit_status: i32,
    #[serde(skip)]
    pub text: Option<String>,
}

struct Ctx {
    tol: Tolerances,
    seed: u64,
}

type Res<T> = Result<T, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: EXIT_ERROR, stdout: String::new(), stderr: text }
            } else {
                Outcome { code: EXIT_TRUE, stdout: text, stderr: String::new() }
            };
        }
    };
    let echo: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match catch_unwind(AssertUnwindSafe(|| execute(&cli, echo.clone()))) {
        Ok(o) => o,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            Outcome { code: EXIT_ERROR, stdout: String::new(), stderr: format!("internal error: {msg}\n") }
        }
    }
}

fn tolerances(cli: &Cli) -> Res<Tolerances> {
    let mut tol = Tolerances::default();
    if let Some(a) = cli.tol_atol {
        tol = tol.with_atol(a);
    }
    if let Some(r) = cli.tol_rank {
        tol = tol.with_rank_threshold(r);
    }
    tol.validate().map_err(err)?;
    Ok(tol)
}

fn execute(cli: &Cli, echo: Vec<String>) -> Outcome {
    let tol = match tolerances(cli) {
        Ok(t) => t,
        Err(e) => return Outcome { code: EXIT_ERROR, stdout: String::new(), stderr: format!("error: {e}\n") },
    };
    let ctx = Ctx { tol, seed: cli.seed };
    if let Command::Gen { name, out: None, observable } = &cli.command {
        if name != "list" && name != "all" {
            return match gen_model(name, *observable, &ctx) {
                Ok(m) => Outcome { code: EXIT_TRUE, stdout: to_json_string(&m) + "\n", stderr: String::new() },
                Err(e) => Outcome { code: EXIT_ERROR, stdout: String::new(), stderr: format!("error: {e}\n") },
            };
        }
    }
    let result = match &cli.command {
        Command::Classify { path } => cmd_classify(path, &ctx),
        Command::Check { what, path, against } => cmd_check(*what, path, against.as_deref(), &ctx),
        Command::Table1 => cmd_table1(&ctx),
        Command::Demo { name } => cmd_demo(name, &ctx),
        Command::Gen { name, out, observable } => cmd_gen(name, out.as_deref(), *observable, &ctx),
    };
    let (verdict, body, code, text) = match result {
        Ok(r) => (r.verdict, r.body, r.code, r.text),
        Err(e) => ("error".to_string(), json!({ "error": e }), EXIT_ERROR, None),
    };
    let report =
        Report { command: echo, tolerances: ctx.tol, seed: ctx.seed, verdict, result: body, exit_status: code, text };
    let stdout = if cli.json {
        serde_json::to_string_pretty(&report).expect("report serialises") + "\n"
    } else {
        render_human(&report)
    };
    let stderr = if code == EXIT_ERROR && cli.json {
        format!("error: {}\n", report.result["error"].as_str().unwrap_or("failed"))
    } else {
        String::new()
    };
    Outcome { code, stdout, stderr }
}

struct CmdResult {
    verdict: String,
    body: Value,
    code: i32,
    text: Option<String>,
}

fn verdict_of(holds: bool) -> (String, i32) {
    if holds {
        ("true".into(), EXIT_TRUE)
    } else {
        ("false".into(), EXIT_FALSE)
    }
}

fn done(holds: bool, body: Value) -> Res<CmdResult> {
    let (verdict, code) = verdict_of(holds);
    Ok(CmdResult { verdict, body, code, text: None })
}

fn matrix_json(m: &ComplexMatrix) -> Value {
    json!((0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn load(path: &Path, ctx: &Ctx) -> Res<Model> {
    read_model(path, &ctx.tol).map_err(err)
}

fn load_observable(path: &Path, ctx: &Ctx) -> Res<Observable> {
    match load(path, ctx)? {
        Model::Observable(e) => Ok(e),
        other => Err(format!("expected an observable file, found kind {}", other.kind().name())),
    }
}

fn load_instrument(path: &Path, ctx: &Ctx) -> Res<Instrument> {
    match load(path, ctx)? {
        Model::Instrument(i) => Ok(i),
        Model::Scheme(m) => m.to_instrument(&ctx.tol).map_err(err),
        other => Err(format!("expected an instrument or scheme file, found kind {}", other.kind().name())),
    }
}

fn cmd_classify(path: &Path, ctx: &Ctx) -> Res<CmdResult> {
    let e = load_observable(path, ctx)?;
    let c = classify(&e, &ctx.tol);
    Ok(CmdResult {
        verdict: "classified".into(),
        body: serde_json::to_value(&c).map_err(err)?,
        code: EXIT_TRUE,
        text: None,
    })
}

fn cmd_check(what: CheckKind, path: &Path, against: Option<&Path>, ctx: &Ctx) -> Res<CmdResult> {
    let tol = &ctx.tol;
    match what {
        CheckKind::ChannelThirdlaw => {
            let phi = match load(path, ctx)? {
                Model::Channel(c) => c,
                other => {
                    return Err(format!("channel-thirdlaw needs a channel file, found kind {}", other.kind().name()))
                }
            };
            let v = check_channel_thirdlaw(&phi, tol);
            let mut body = serde_json::to_value(&v).map_err(err)?;
            body["witness"] = v.witness.as_ref().map_or(Value::Null, |w| matrix_json(w.matrix()));
            done(v.constrained, body)
        }
        CheckKind::SchemeThirdlaw => {
            let m = match load(path, ctx)? {
                Model::Scheme(m) => m,
                other => {
                    return Err(format!("scheme-thirdlaw needs a scheme file, found kind {}", other.kind().name()))
                }
            };
            let v = check_scheme_thirdlaw(&m, tol);
            let mut body = serde_json::to_value(&v).map_err(err)?;
            body["witness"] = v.witness.as_ref().map_or(Value::Null, |w| matrix_json(w.matrix()));
            done(v.constrained, body)
        }
        CheckKind::Nondisturbance => {
            let against = against.ok_or("nondisturbance needs --against <observable file>")?;
            let inst = load_instrument(path, ctx)?;
            let f = load_observable(against, ctx)?;
            let c = check_non_disturbance(&inst, &f, tol).map_err(err)?;
            done(c.holds, serde_json::to_value(c).map_err(err)?)
        }
        CheckKind::Firstkind => {
            let c = check_first_kind(&load_instrument(path, ctx)?, tol);
            done(c.holds, serde_json::to_value(c).map_err(err)?)
        }
        CheckKind::Repeatable => {
            let c = check_repeatable(&load_instrument(path, ctx)?, tol);
            done(c.holds, serde_json::to_value(c).map_err(err)?)
        }
        CheckKind::Ideal => {
            let c = check_ideal(&load_instrument(path, ctx)?, tol);
            let code = if c.verdict == Verdict::True { EXIT_TRUE } else { EXIT_FALSE };
            let verdict = serde_json::to_value(c.verdict).map_err(err)?.as_str().unwrap_or_default().to_string();
            Ok(CmdResult { verdict, body: serde_json::to_value(&c).map_err(err)?, code, text: None })
        }
        CheckKind::Extremal => {
            let c = check_extremal(&load_instrument(path, ctx)?, tol);
            done(c.extremal, serde_json::to_value(&c).map_err(err)?)
        }
    }
}

fn cmd_table1(ctx: &Ctx) -> Res<CmdResult> {
    let t = reproduce_table1(&ctx.tol).map_err(err)?;
    let ok = t.matches_expected();
    let mut body = serde_json::to_value(&t).map_err(err)?;
    body["matches_expected"] = json!(ok);
    body["mismatches"] =
        json!(t.mismatches().iter().map(|(p, c)| format!("{} / {}", p.name(), c.title())).collect::<Vec<_>>());
    let (verdict, code) = if ok { ("match".to_string(), EXIT_TRUE) } else { ("mismatch".to_string(), EXIT_FALSE) };
    let mut text = t.render();
    text.push('\n');
    for row in &t.rows {
        for (cell, class) in row.cells.iter().zip(&t.columns) {
            let sym = if cell.possible() { "✓" } else { "✗" };
            text.push_str(&format!(
                "{} {} / {}: {sym} {}\n",
                row.property.roman(),
                row.property.name(),
                class.title(),
                cell.basis
            ));
        }
    }
    Ok(CmdResult { verdict, body, code, text: Some(text) })
}

fn cmd_demo(name: &str, ctx: &Ctx) -> Res<CmdResult> {
    let tol = &ctx.tol;
    match name {
        "purify" => {
            let rho0 = models::random_full_rank_state(2, ctx.seed, None);
            let xi = State::basis(2, 0);
            let target = models::random_state_of_rank(2, 1, &mut rng(ctx.seed.wrapping_add(1)));
            let r = purify_via_unconstrained(&rho0, &xi, &target, tol).map_err(err)?;
            let ok = r.fidelity > 1.0 - 1e-9;
            let body = json!({
                "rho0": matrix_json(rho0.matrix()),
                "xi": matrix_json(xi.matrix()),
                "target": matrix_json(target.matrix()),
                "depth": r.depth,
                "restricted": matrix_json(r.restricted.matrix()),
                "output": matrix_json(r.output.matrix()),
                "leaked_weight": r.leaked_weight,
                "fidelity": r.fidelity,
            });
            done(ok, body)
        }
        "luders-scheme" => {
            let e = models::random_povm_class(2, 2, models::PovmClass::CompletelyUnsharp, ctx.seed).map_err(err)?;
            let m = models::build_luders_scheme(&e, tol).map_err(err)?;
            let constrained = check_scheme_thirdlaw(&m, tol).constrained;
            let inst = m.to_instrument(tol).map_err(err)?;
            let luders = Instrument::luders(&e, tol).map_err(err)?;
            let residual = inst.distance(&luders);
            let body = json!({
                "effects": e.effects().iter().map(matrix_json).collect::<Vec<_>>(),
                "ancilla_state": matrix_json(m.xi().matrix()),
                "interaction_kraus": m.interaction().as_operation().kraus().iter().map(matrix_json).collect::<Vec<_>>(),
                "constrained": constrained,
                "residual_to_luders": residual,
            });
            done(constrained && residual < 1e-9, body)
        }
        "decompose" => {
            let xi = models::default_extremal_xi(tol);
            let m = models::build_swap_nondisturbance_scheme(&xi, tol).map_err(err)?;
            let inst = m.to_instrument(tol).map_err(err)?;
            let (v, f) = decompose_instrument(&inst, tol, &mut rng(ctx.seed)).map_err(err)?;
            let reconstruction = f.reconstructed_space().distance(&v);
            let blocks: Vec<Value> = f
                .blocks
                .iter()
                .map(|b| {
                    json!({
                        "dim_k": b.dim_k,
                        "dim_r": b.dim_r,
                        "projection_rank": numerical_rank(&b.projection, tol),
                        "omega": matrix_json(b.omega.matrix()),
                        "omega_distance_to_xi": b.omega.matrix().distance(xi.matrix()),
                    })
                })
                .collect();
            let body = json!({
                "scheme": "swap-scheme",
                "fixed_point_dimension": v.len(),
                "blocks": blocks,
                "reconstruction_distance": reconstruction,
                "projection_defect": f.projection_defect(),
            });
            done(reconstruction < 1e-7, body)
        }
        other => Err(format!("unknown demo {other:?}; expected purify, luders-scheme or decompose")),
    }
}

const EXTRA_MODELS: [&str; 6] =
    ["pure-swap-scheme", "nondisturbance-f", "random-povm", "random-channel", "random-instrument", "random-scheme"];

/// Model named `name`, or the observable it measures when `observable` is set.
fn gen_model(name: &str, observable: bool, ctx: &Ctx) -> Res<Model> {
    let tol = &ctx.tol;
    let model = match name {
        "pure-swap-scheme" => Model::Scheme(
            models::build_trivial_swap_scheme(&State::basis(2, 0), &Observable::computational(2), tol).map_err(err)?,
        ),
        "nondisturbance-f" => Model::Observable(models::build_nondisturbance_example(tol).map_err(err)?.f),
        "random-povm" => Model::Observable(models::random_povm(3, 3, ctx.seed)),
        "random-channel" => Model::Channel(models::random_channel(3, 3, 2, ctx.seed)),
        "random-instrument" => Model::Instrument(models::random_instrument(3, 2, 2, ctx.seed)),
        "random-scheme" => Model::Scheme(models::random_constrained_scheme(ctx.seed, tol).map_err(err)?),
        _ => {
            let entry = models::catalog(tol)
                .map_err(err)?
                .into_iter()
                .find(|e| e.name == name)
                .ok_or_else(|| format!("unknown model {name:?}; run `qmeas gen list`"))?;
            if observable {
                if let CatalogModel::Instrument { observable, .. } = entry.model {
                    return Ok(Model::Observable(observable));
                }
            }
            entry.model.into()
        }
    };
    if !observable {
        return Ok(model);
    }
    match model {
        Model::Observable(e) => Ok(Model::Observable(e)),
        Model::Instrument(i) => Ok(Model::Observable(i.induced_observable(tol).map_err(err)?)),
        Model::Scheme(m) => {
            Ok(Model::Observable(m.to_instrument(tol).map_err(err)?.induced_observable(tol).map_err(err)?))
        }
        other => Err(format!("model {name:?} of kind {} measures no observable", other.kind().name())),
    }
}

fn cmd_gen(name: &str, out: Option<&Path>, observable: bool, ctx: &Ctx) -> Res<CmdResult> {
    let catalog = models::catalog(&ctx.tol).map_err(err)?;
    match name {
        "list" => {
            let entries: Vec<Value> = catalog
                .iter()
                .map(|e| json!({ "name": e.name, "description": e.location, "kind": Model::from(e.model.clone()).kind().name() }))
                .chain(EXTRA_MODELS.iter().map(|n| json!({ "name": n })))
                .collect();
            Ok(CmdResult { verdict: "listed".into(), body: json!({ "models": entries }), code: EXIT_TRUE, text: None })
        }
        "all" => {
            let dir = out.ok_or("gen all needs --out <directory>")?;
            std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
            let mut written = Vec::new();
            for entry in &catalog {
                let path = dir.join(format!("{}.json", entry.name));
                write_model(&path, &Model::from(entry.model.clone())).map_err(err)?;
                written.push(path.display().to_string());
            }
            Ok(CmdResult { verdict: "written".into(), body: json!({ "files": written }), code: EXIT_TRUE, text: None })
        }
        _ => {
            let path = out.expect("stdout export is handled before dispatch");
            let model = gen_model(name, observable, ctx)?;
            write_model(path, &model).map_err(err)?;
            let body = json!({ "file": path.display().to_string(), "kind": model.kind().name() });
            Ok(CmdResult { verdict: "written".into(), body, code: EXIT_TRUE, text: None })
        }
    }
}

// ---------------------------------------------------------------------------
// Human rendering
// ---------------------------------------------------------------------------

fn as_matrix(v: &Value) -> Option<Vec<Vec<(f64, f64)>>> {
    let rows = v.as_array()?;
    if rows.is_empty() {
        return None;
    }
    rows.iter()
        .map(|r| {
            r.as_array()?
                .iter()
                .map(|z| {
                    let z = z.as_array()?;
                    (z.len() == 2).then_some(())?;
                    Some((z[0].as_f64()?, z[1].as_f64()?))
                })
                .collect::<Option<Vec<_>>>()
        })
        .collect()
}

fn fmt_complex((re, im): (f64, f64)) -> String {
    let clean = |x: f64| if x.abs() < 1e-12 { 0.0 } else { x };
    let (re, im) = (clean(re), clean(im));
    if im == 0.0 {
        format!("{re:.6}")
    } else {
        format!("{re:.6}{im:+.6}i")
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<String>) {
    if let Some(m) = as_matrix(v) {
        out.push(format!("{prefix}:"));
        for row in m {
            out.push(format!("    [{}]", row.into_iter().map(fmt_complex).collect::<Vec<_>>().join(", ")));
        }
        return;
    }
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(xs) if xs.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in xs.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Value::Array(xs) => out.push(format!("{prefix}: [{}]", xs.iter().map(scalar).collect::<Vec<_>>().join(", "))),
        other => out.push(format!("{prefix}: {}", scalar(other))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => format!("{f:.6e}"),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

pub fn render_human(r: &Report) -> String {
    let t = &r.tolerances;
    let mut lines = vec![
        format!("command     qmeas {}", r.command.join(" ")),
        format!(
            "tolerances  atol={:e} rank={:e} kernel={:e} cluster={:e}",
            t.atol_equality, t.rank_threshold, t.kernel_threshold, t.cluster_gap
        ),
        format!("seed        {}", r.seed),
        format!("verdict     {}", r.verdict),
        format!("exit        {}", r.exit_status),
    ];
    lines.push(String::new());
    match &r.text {
        Some(text) => {
            lines.extend(text.lines().map(str::to_string));
            if let Some(m) = r.result.get("mismatches") {
                flatten("mismatches", m, &mut lines);
            }
        }
        None => flatten("", &r.result, &mut lines),
    }
    lines.join("\n") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrices_render_as_rows() {
        let mut lines = Vec::new();
        flatten("m", &json!([[[1.0, 0.0], [0.0, -0.5]], [[0.0, 0.5], [2.0, 0.0]]]), &mut lines);
        assert_eq!(lines, ["m:", "    [1.000000, 0.000000-0.500000i]", "    [0.000000+0.500000i, 2.000000]"]);
    }

    #[test]
    fn plain_arrays_stay_on_one_line() {
        let mut lines = Vec::new();
        flatten("", &json!({ "ranks": [2, 2], "ok": true }), &mut lines);
        assert_eq!(lines, ["ok: true", "ranks: [2, 2]"]);
    }

    #[test]
    fn unknown_gen_name_is_an_error() {
        let out = run(["qmeas", "gen", "nothing"]);
        assert_eq!(out.code, EXIT_ERROR);
        assert!(out.stderr.contains("unknown model"));
    }
}
