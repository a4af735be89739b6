use epicompat_web::{analyze, analyze_json, epipolar_lines_json, sweep_json};
use serde_json::Value;

fn parse(text: &str) -> Value {
    serde_json::from_str(text).expect("valid JSON")
}

#[test]
fn analyze_reports_compatible_and_perturbed_sets() {
    let doc = parse(&analyze_json("case1", 4, 0, (1, 2), 0.0).unwrap());
    assert_eq!(doc["verdict"], "Compatible");
    assert_eq!(doc["classification"], "Case1");
    assert!(doc["certificate"].as_f64().unwrap() <= 1e-8);
    let doc = parse(&analyze_json("case1", 4, 0, (1, 2), 1e-3).unwrap());
    assert_eq!(doc["verdict"], "Incompatible");
    assert!(doc["certificate"].is_null());
    assert!(doc["worst_residual"].as_f64().unwrap() > doc["tolerance"].as_f64().unwrap());
}

#[test]
fn lines_concur_at_the_projection_only_when_compatible() {
    let spread = |eps: f64| {
        let doc = parse(&epipolar_lines_json("generic", 5, 3, (1, 4), eps, 4).unwrap());
        let p = doc["projection"].as_array().unwrap();
        let (x, y) = (p[0].as_f64().unwrap(), p[1].as_f64().unwrap());
        doc["lines"]
            .as_array()
            .unwrap()
            .iter()
            .map(|l| {
                let l: Vec<f64> = l["line"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
                (l[0] * x + l[1] * y + l[2]).abs()
            })
            .fold(0.0, f64::max)
    };
    assert!(spread(0.0) <= 1e-9);
    assert!(spread(1e-2) > 1e-6);
    let doc = parse(&epipolar_lines_json("generic", 5, 3, (1, 2), 0.0, 4).unwrap());
    assert_eq!(doc["epipoles"].as_array().unwrap().len(), 4);
}

#[test]
fn sweep_flips_once_the_perturbation_is_visible() {
    let doc = parse(&sweep_json("case1", 4, 2, (2, 3), 1e-14, 1e-2, 7).unwrap());
    let points = doc["points"].as_array().unwrap();
    assert_eq!(points.len(), 7);
    assert_eq!(points[0]["verdict"], "Compatible");
    assert_eq!(points[6]["verdict"], "Incompatible");
}

#[test]
fn bad_arguments_come_back_as_error_objects() {
    let doc = parse(&analyze("case9", 4, 0, 1, 2, 0.0));
    assert_eq!(doc["error"], "InvalidArgument");
    let doc = parse(&analyze("case1", 4, 0, 3, 2, 1e-3));
    assert_eq!(doc["error"], "InvalidArgument");
    assert!(sweep_json("case1", 4, 0, (1, 2), 1e-3, 1e-6, 5).is_err());
    assert!(epipolar_lines_json("case1", 4, 0, (1, 2), 0.0, 7).is_err());
}
