//! Browser bindings for the epicompat demo page.
//!
//! Every export takes plain numbers and strings and returns a JSON string;
//! failures come back as `{"error": kind, "message": text}`.

use std::fmt::Write;

use epicompat::{
    check_multiview, generate_cameras, perturb_set, reconstruct_multiview, set_from_cameras, Camera, CaseLabel, CaseSpec,
    CheckOptions, Error, FundamentalSet, Tolerances,
};
use nalgebra::{Vector3, Vector4};
use wasm_bindgen::prelude::wasm_bindgen;

type Scene = (Vec<Camera>, FundamentalSet);

/// Seeded synthetic set, optionally with one perturbed entry.
fn scene(case: &str, n: usize, seed: u64, pair: (usize, usize), eps: f64) -> Result<Scene, Error> {
    let spec = CaseSpec::new(case.parse::<CaseLabel>()?, n, seed);
    spec.validate()?;
    let cams = generate_cameras(&spec)?;
    let set = set_from_cameras(&cams)?;
    if eps <= 0.0 {
        return Ok((cams, set));
    }
    let (i, j) = pair;
    if !(1 <= i && i < j && j <= n) {
        return Err(Error::InvalidArgument(format!("pair ({i}, {j}) is not a pair of views 1..={n}")));
    }
    Ok((cams, perturb_set(&set, pair, eps, seed)?))
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        "null".into()
    }
}

fn string(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if (c as u32) < 0x20 => write!(out, "\\u{:04x}", c as u32).expect("write to string"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn error_json(e: &Error) -> String {
    format!("{{\"error\": {}, \"message\": {}}}", string(e.kind()), string(&e.to_string()))
}

fn respond(result: Result<String, Error>) -> String {
    result.unwrap_or_else(|e| error_json(&e))
}

/// Classification, verdict, residuals and, when compatible, the worst
/// certificate residual of the reconstructed cameras.
pub fn analyze_json(case: &str, n: usize, seed: u64, pair: (usize, usize), eps: f64) -> Result<String, Error> {
    let (_, set) = scene(case, n, seed, pair, eps)?;
    let tol = Tolerances::default();
    let report = check_multiview(&set, &CheckOptions::with_tolerances(tol));
    let residuals: Vec<String> = report.residuals.iter().map(|(k, v)| format!("{}: {}", string(k), num(*v))).collect();
    let certificate = if report.is_compatible() {
        match reconstruct_multiview(&set, &tol) {
            Ok(sol) => num(sol.certificate.worst()),
            Err(e) => error_json(&e),
        }
    } else {
        "null".into()
    };
    Ok(format!(
        "{{\"classification\": {}, \"verdict\": {}, \"worst_residual\": {}, \"tolerance\": {}, \"residuals\": {{{}}}, \"certificate\": {}}}",
        string(&report.classification.label()),
        string(&report.verdict.to_string()),
        num(report.worst_residual()),
        num(report.tolerance),
        residuals.join(", "),
        certificate,
    ))
}

/// Picture of image `image`: the epipoles of the other views and, for one
/// seeded world point, the epipolar lines `F^{image,j} x_j` together with
/// its true projection. Lines are `(a, b, c)` with `a x + b y + c = 0`.
pub fn epipolar_lines_json(case: &str, n: usize, seed: u64, pair: (usize, usize), eps: f64, image: usize) -> Result<String, Error> {
    let (cams, set) = scene(case, n, seed, pair, eps)?;
    if !(1..=n).contains(&image) {
        return Err(Error::InvalidArgument(format!("image {image} is not a view 1..={n}")));
    }
    let x = Vector4::new(0.31, -0.27, 0.45, 1.0);
    let point = |v: &Vector3<f64>| -> String {
        if v[2].abs() < 1e-12 * v.norm() {
            "null".into()
        } else {
            format!("[{}, {}]", num(v[0] / v[2]), num(v[1] / v[2]))
        }
    };
    let mut epipoles = Vec::new();
    let mut lines = Vec::new();
    for j in (1..=n).filter(|&j| j != image) {
        epipoles.push(format!("{{\"view\": {j}, \"at\": {}}}", point(set.epipole(j, image).coords())));
        let l = set.get(image, j) * cams[j - 1].project(&x);
        let l = l / l.fixed_rows::<2>(0).norm().max(1e-300);
        lines.push(format!("{{\"view\": {j}, \"line\": [{}, {}, {}]}}", num(l[0]), num(l[1]), num(l[2])));
    }
    Ok(format!(
        "{{\"image\": {image}, \"projection\": {}, \"epipoles\": [{}], \"lines\": [{}]}}",
        point(&cams[image - 1].project(&x)),
        epipoles.join(", "),
        lines.join(", "),
    ))
}

/// Worst residual and verdict for `steps` log-spaced perturbation sizes.
pub fn sweep_json(case: &str, n: usize, seed: u64, pair: (usize, usize), eps_min: f64, eps_max: f64, steps: usize) -> Result<String, Error> {
    if !(eps_min > 0.0 && eps_max >= eps_min && eps_max.is_finite()) || !(2..=200).contains(&steps) {
        return Err(Error::InvalidArgument("need 0 < eps_min <= eps_max and 2 <= steps <= 200".into()));
    }
    let opts = CheckOptions::default();
    let ratio = (eps_max / eps_min).ln() / (steps - 1) as f64;
    let mut rows = Vec::with_capacity(steps);
    for k in 0..steps {
        let eps = eps_min * (ratio * k as f64).exp();
        let (_, set) = scene(case, n, seed, pair, eps)?;
        let report = check_multiview(&set, &opts);
        rows.push(format!(
            "{{\"eps\": {}, \"worst_residual\": {}, \"verdict\": {}}}",
            num(eps),
            num(report.worst_residual()),
            string(&report.verdict.to_string()),
        ));
    }
    Ok(format!("{{\"tolerance\": {}, \"points\": [{}]}}", num(opts.tolerances.compat), rows.join(", ")))
}

#[wasm_bindgen]
pub fn analyze(case: &str, n: usize, seed: u32, pair_i: usize, pair_j: usize, eps: f64) -> String {
    respond(analyze_json(case, n, seed.into(), (pair_i, pair_j), eps))
}

#[wasm_bindgen]
pub fn epipolar_lines(case: &str, n: usize, seed: u32, pair_i: usize, pair_j: usize, eps: f64, image: usize) -> String {
    respond(epipolar_lines_json(case, n, seed.into(), (pair_i, pair_j), eps, image))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn sweep(case: &str, n: usize, seed: u32, pair_i: usize, pair_j: usize, eps_min: f64, eps_max: f64, steps: usize) -> String {
    respond(sweep_json(case, n, seed.into(), (pair_i, pair_j), eps_min, eps_max, steps))
}
