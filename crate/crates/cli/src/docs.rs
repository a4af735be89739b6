//! Set, camera and report documents.

use std::collections::BTreeMap;

use epicompat::{
    make_set, Camera, Certificate, Classification, CompatibilityReport, Error, FundamentalSet, LongFormMode, Tolerances,
};
use nalgebra::{Matrix3, Matrix3x4};
use serde_json::Value;

use crate::json::Json;

/// A failure that maps to exit code 3.
#[derive(Debug)]
pub struct InputError {
    pub kind: String,
    pub message: String,
}

impl InputError {
    pub fn new(kind: &str, message: impl Into<String>) -> Self {
        Self { kind: kind.into(), message: message.into() }
    }

    pub fn to_json(&self) -> Json {
        Json::obj([("error", Json::from(self.kind.as_str())), ("message", Json::from(self.message.as_str()))])
    }
}

impl From<Error> for InputError {
    fn from(e: Error) -> Self {
        Self::new(e.kind(), e.to_string())
    }
}

fn format_error(message: impl Into<String>) -> InputError {
    InputError::new("FormatError", message)
}

pub fn parse(text: &str) -> Result<Value, InputError> {
    serde_json::from_str(text).map_err(|e| InputError::new("ParseError", e.to_string()))
}

fn field<'a>(v: &'a Value, key: &str, ctx: &str) -> Result<&'a Value, InputError> {
    v.get(key).ok_or_else(|| format_error(format!("{ctx}: missing field \"{key}\"")))
}

fn index(v: &Value, key: &str, ctx: &str) -> Result<usize, InputError> {
    field(v, key, ctx)?
        .as_u64()
        .map(|i| i as usize)
        .ok_or_else(|| format_error(format!("{ctx}: \"{key}\" must be a non-negative integer")))
}

/// Row-major numbers from a nested `rows x cols` array or a flat array.
fn matrix_entries(v: &Value, rows: usize, cols: usize, ctx: &str) -> Result<Vec<f64>, InputError> {
    let bad = || format_error(format!("{ctx}: matrix must be {rows}x{cols} numbers, nested or flat"));
    let items = v.as_array().ok_or_else(bad)?;
    let flat: Vec<&Value> = if items.len() == rows && items.iter().all(Value::is_array) {
        let mut out = Vec::with_capacity(rows * cols);
        for row in items {
            let row = row.as_array().expect("checked above");
            if row.len() != cols {
                return Err(bad());
            }
            out.extend(row);
        }
        out
    } else {
        items.iter().collect()
    };
    if flat.len() != rows * cols {
        return Err(bad());
    }
    flat.iter().map(|x| x.as_f64().filter(|x| x.is_finite()).ok_or_else(bad)).collect()
}

fn tolerances(doc: &Value) -> Result<Tolerances, InputError> {
    let mut tol = Tolerances::default();
    let Some(block) = doc.get("tolerances") else {
        return Ok(tol);
    };
    let obj = block.as_object().ok_or_else(|| format_error("tolerances must be an object"))?;
    for (key, value) in obj {
        let x = value.as_f64().ok_or_else(|| format_error(format!("tolerance \"{key}\" must be a number")))?;
        match key.as_str() {
            "rank" => tol.rank = x,
            "equal" => tol.equal = x,
            "compat" => tol.compat = x,
            "classify" => tol.classify = x,
            other => return Err(format_error(format!("unknown tolerance \"{other}\""))),
        }
    }
    tol.validate()?;
    Ok(tol)
}

/// A parsed set document with its tolerance overrides.
pub fn read_set(text: &str) -> Result<(FundamentalSet, Tolerances), InputError> {
    let doc = parse(text)?;
    let n = index(&doc, "n", "set")?;
    let entries = field(&doc, "fundamental", "set")?
        .as_array()
        .ok_or_else(|| format_error("set: \"fundamental\" must be an array"))?;
    let mut raw = BTreeMap::new();
    for (k, entry) in entries.iter().enumerate() {
        let ctx = format!("fundamental[{k}]");
        let (i, j) = (index(entry, "i", &ctx)?, index(entry, "j", &ctx)?);
        let m = Matrix3::from_row_slice(&matrix_entries(field(entry, "matrix", &ctx)?, 3, 3, &ctx)?);
        if raw.insert((i, j), m).is_some() {
            return Err(format_error(format!("{ctx}: pair ({i}, {j}) appears twice")));
        }
    }
    let tol = tolerances(&doc)?;
    Ok((make_set(n, &raw, &tol)?, tol))
}

pub fn read_cameras(text: &str) -> Result<Vec<Camera>, InputError> {
    let doc = parse(text)?;
    let items = field(&doc, "cameras", "cameras")?
        .as_array()
        .ok_or_else(|| format_error("\"cameras\" must be an array"))?;
    let mut by_id = BTreeMap::new();
    for (k, item) in items.iter().enumerate() {
        let ctx = format!("cameras[{k}]");
        let id = index(item, "id", &ctx)?;
        let m = Matrix3x4::from_row_slice(&matrix_entries(field(item, "matrix", &ctx)?, 3, 4, &ctx)?);
        let cam = Camera::new(m).map_err(|e| InputError::new(e.kind(), format!("{ctx}: {e}")))?;
        if by_id.insert(id, cam).is_some() {
            return Err(format_error(format!("{ctx}: camera id {id} appears twice")));
        }
    }
    if by_id.keys().copied().ne(1..=by_id.len()) {
        return Err(format_error("camera ids must be contiguous from 1"));
    }
    Ok(by_id.into_values().collect())
}

fn rows<const R: usize, const C: usize>(m: &nalgebra::SMatrix<f64, R, C>) -> Json {
    Json::Arr((0..R).map(|r| Json::nums((0..C).map(|c| m[(r, c)]))).collect())
}

pub fn set_json(set: &FundamentalSet) -> Json {
    let entries = set
        .pairs()
        .map(|(i, j)| Json::obj([("i", Json::from(i)), ("j", Json::from(j)), ("matrix", rows(&set.get(i, j)))]))
        .collect();
    Json::obj([("fundamental", Json::Arr(entries)), ("n", Json::from(set.n()))])
}

pub fn cameras_json(cameras: &[Camera]) -> Json {
    let items = cameras
        .iter()
        .enumerate()
        .map(|(k, c)| Json::obj([("id", Json::from(k + 1)), ("matrix", rows(c.matrix()))]))
        .collect();
    Json::obj([("cameras", Json::Arr(items))])
}

fn num_map<K: ToString>(map: impl IntoIterator<Item = (K, f64)>) -> Json {
    Json::Obj(map.into_iter().map(|(k, v)| (k.to_string(), Json::Num(v))).collect())
}

pub fn classification_json(class: &Classification) -> Json {
    let mut out = BTreeMap::from([("label".to_string(), Json::from(class.label()))]);
    match class {
        Classification::Triple(t) => {
            out.insert("coincidence".into(), Json::nums(t.coincidence));
        }
        Classification::Quadruple(q) => {
            out.insert("defects".into(), Json::nums(q.defects));
            out.insert("coincidence".into(), Json::Arr(q.coincidence.iter().map(|c| Json::nums(*c)).collect()));
            if let epicompat::QuadCase::Case3(t) = q.case {
                out.insert("collinear_triple".into(), Json::Arr(t.iter().map(|&v| Json::from(v)).collect()));
            }
        }
        Classification::Multiview { n, collinear } => {
            out.insert("n".into(), Json::from(*n));
            out.insert("collinear".into(), Json::from(*collinear));
        }
        Classification::Pair => {}
    }
    Json::Obj(out)
}

pub fn report_json(report: &CompatibilityReport) -> Json {
    let subsets = report
        .subsets
        .iter()
        .map(|s| {
            Json::obj([
                ("case", Json::from(s.case.as_str())),
                ("verdict", Json::from(s.verdict.to_string())),
                ("views", Json::Arr(s.views.iter().map(|&v| Json::from(v)).collect())),
                ("worst_residual", Json::Num(s.worst_residual)),
            ])
        })
        .collect();
    let long_form = match report.long_form {
        Some(LongFormMode::Canonical) => Json::from("Canonical"),
        Some(LongFormMode::FixedScaling) => Json::from("FixedScaling"),
        None => Json::Null,
    };
    Json::obj([
        ("classification", classification_json(&report.classification)),
        ("diagnostics", num_map(report.diagnostics.iter().map(|(k, &v)| (k, v)))),
        ("long_form", long_form),
        ("notes", Json::Arr(report.notes.iter().map(|n| Json::from(n.as_str())).collect())),
        ("residuals", num_map(report.residuals.iter().map(|(k, &v)| (k, v)))),
        ("subsets", Json::Arr(subsets)),
        ("tolerance", Json::Num(report.tolerance)),
        ("verdict", Json::from(report.verdict.to_string())),
        ("version", Json::from(crate::VERSION)),
    ])
}

pub fn certificate_json(cert: &Certificate) -> Json {
    Json::obj([
        ("passed", Json::from(cert.passed)),
        ("residuals", num_map(cert.residuals.iter().map(|(&(i, j), &r)| (format!("{i}-{j}"), r)))),
        ("tolerance", Json::Num(cert.tolerance)),
        ("worst", Json::Num(cert.worst())),
    ])
}
