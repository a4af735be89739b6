//! Triplewise, quadruplewise and n-view compatibility checks.
//!
//! Every check reports dimensionless residuals. Polynomial conditions are
//! divided by their largest monomial term, so a residual near machine
//! precision means the condition holds and a residual of order one means it
//! fails outright.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{Matrix3, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classify::{classify_quadruple, classify_triple, QuadCase, QuadClass, TripleClass, TripleLabel};
pub use crate::fundamental::AuxStrategy;
use crate::fundamental::{AuxiliaryPoints5, FundamentalSet, Representatives};
use crate::error::{Error, Result};
use crate::projective::{sin_angle, skew, Point2};
use crate::reconstruction::{case2_first_three, frame_cameras};
use crate::synth::sphere_point;
use crate::tolerances::Tolerances;

const TERM_FLOOR: f64 = 1e-30;
const CASE1_PRODUCT_FLOOR: f64 = 1e-20;
const AUX_REDRAWS: usize = 20;
const SELF_TEST_BOUND: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    Compatible,
    Incompatible,
    Degenerate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Compatible => "Compatible",
            Verdict::Incompatible => "Incompatible",
            Verdict::Degenerate => "Degenerate",
        })
    }
}

/// Representatives used for the long Case-2 equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LongFormMode {
    /// Stored unit epipoles, validated by the rescaling self-test.
    Canonical,
    /// Per-image scaling `e_i^l = e_i^j + e_i^k` for `j < k < l`.
    FixedScaling,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    Pair,
    Triple(TripleClass),
    Quadruple(QuadClass),
    Multiview { n: usize, collinear: bool },
}

impl Classification {
    pub fn label(&self) -> String {
        match self {
            Classification::Pair => "Pair".into(),
            Classification::Triple(t) => format!("{:?}", t.label),
            Classification::Quadruple(q) => q.case.to_string(),
            Classification::Multiview { collinear: true, .. } => "CollinearN".into(),
            Classification::Multiview { .. } => "MultiView".into(),
        }
    }

    fn is_ambiguous(&self) -> bool {
        match self {
            Classification::Triple(t) => t.label == TripleLabel::Ambiguous,
            Classification::Quadruple(q) => q.case == QuadCase::Ambiguous,
            _ => false,
        }
    }
}

/// Result of one 4-subset inside a multiview sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetOutcome {
    pub views: Vec<usize>,
    pub case: String,
    pub verdict: Verdict,
    pub worst_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport {
    pub verdict: Verdict,
    pub classification: Classification,
    /// Condition name to normalized residual; all must be at most
    /// `tolerance` for a compatible verdict.
    pub residuals: BTreeMap<String, f64>,
    /// Auxiliary measurements that are not residuals (separations, self-test
    /// deltas).
    pub diagnostics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub tolerance: f64,
    pub long_form: Option<LongFormMode>,
    pub subsets: Vec<SubsetOutcome>,
}

impl CompatibilityReport {
    fn new(classification: Classification, tol: &Tolerances) -> Self {
        Self {
            verdict: Verdict::Degenerate,
            classification,
            residuals: BTreeMap::new(),
            diagnostics: BTreeMap::new(),
            notes: Vec::new(),
            tolerance: tol.compat,
            long_form: None,
            subsets: Vec::new(),
        }
    }

    pub fn is_compatible(&self) -> bool {
        self.verdict == Verdict::Compatible
    }

    /// Largest residual; NaN counts as infinite.
    pub fn worst_residual(&self) -> f64 {
        self.residuals
            .values()
            .map(|&r| if r.is_nan() { f64::INFINITY } else { r })
            .fold(0.0, f64::max)
    }

    fn residuals_pass(&self) -> bool {
        self.residuals.values().all(|&r| r <= self.tolerance)
    }

    fn insert(&mut self, name: impl Into<String>, value: f64) {
        self.residuals.insert(name.into(), value);
    }

    /// Sets the verdict from the residuals unless a degeneracy was recorded.
    fn settle(mut self, degenerate: bool) -> Self {
        self.verdict = if degenerate || self.classification.is_ambiguous() {
            Verdict::Degenerate
        } else if self.residuals_pass() {
            Verdict::Compatible
        } else {
            Verdict::Incompatible
        };
        self
    }
}

/// Settings for the Case-2 check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Case2Options {
    pub strategy: AuxStrategy,
    /// Independent auxiliary draws; all must agree.
    pub draws: usize,
    pub seed: u64,
}

impl Default for Case2Options {
    fn default() -> Self {
        Self { strategy: AuxStrategy::Random, draws: 3, seed: 0 }
    }
}

/// Settings for the dispatching checks.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CheckOptions {
    pub tolerances: Tolerances,
    pub case2: Case2Options,
}

impl CheckOptions {
    pub fn with_tolerances(tolerances: Tolerances) -> Self {
        Self { tolerances, ..Self::default() }
    }
}

fn ratio(value: f64, terms: &[f64]) -> f64 {
    let scale = terms.iter().fold(TERM_FLOOR, |m, t| m.max(t.abs()));
    value.abs() / scale
}

fn triple_name(views: &[usize; 3]) -> String {
    format!("t{}{}{}", views[0], views[1], views[2])
}

/// Residuals of the non-collinear triple conditions on `views` of `set`.
fn noncollinear_residuals(set: &FundamentalSet, views: [usize; 3]) -> [(String, f64); 3] {
    let sub = set.subset(&views);
    let reps = Representatives::canonical(&sub);
    let tag = triple_name(&views);
    [
        (format!("{tag}.e3123"), reps.e(&sub, 3, 1, 2, 3).abs()),
        (format!("{tag}.e2132"), reps.e(&sub, 2, 1, 3, 2).abs()),
        (format!("{tag}.e1231"), reps.e(&sub, 1, 2, 3, 1).abs()),
    ]
}

/// `min_lambda |F^32 - lambda F^31 [e_1^2]_x F^12|` on `views` of `set`.
pub fn collinear_residual(set: &FundamentalSet, views: [usize; 3]) -> f64 {
    let [a, b, c] = views;
    let target = set.get(c, b);
    let m: Matrix3<f64> = set.get(c, a) * skew(set.epipole(b, a).coords()) * set.get(a, b);
    let mm = m.norm_squared();
    if mm <= 1e-300 {
        return target.norm();
    }
    let lambda = target.dot(&m) / mm;
    (target - m * lambda).norm()
}

fn collinear_entry(set: &FundamentalSet, views: [usize; 3]) -> (String, f64) {
    (format!("{}.collinear", triple_name(&views)), collinear_residual(set, views))
}

fn require_n(set: &FundamentalSet, n: usize) -> Result<()> {
    if set.n() != n {
        return Err(Error::InvalidArgument(format!("expected {n} views, got {}", set.n())));
    }
    Ok(())
}

/// Triplewise conditions for three views.
pub fn check_triple(set: &FundamentalSet, tol: &Tolerances) -> Result<CompatibilityReport> {
    require_n(set, 3)?;
    let class = classify_triple(set, tol);
    let mut report = CompatibilityReport::new(Classification::Triple(class), tol);
    match class.label {
        TripleLabel::Ambiguous => return Err(Error::AmbiguousClassification),
        TripleLabel::NonCollinear => {
            let reps = Representatives::canonical(set);
            report.insert("e3123", reps.e(set, 3, 1, 2, 3).abs());
            report.insert("e2132", reps.e(set, 2, 1, 3, 2).abs());
            report.insert("e1231", reps.e(set, 1, 2, 3, 1).abs());
        }
        TripleLabel::Collinear => report.insert("collinear", collinear_residual(set, [1, 2, 3])),
    }
    Ok(report.settle(false))
}

fn classify_for(set: &FundamentalSet, tol: &Tolerances, expected: &str) -> Result<QuadClass> {
    require_n(set, 4)?;
    let class = classify_quadruple(set, tol);
    match class.case {
        QuadCase::Ambiguous => Err(Error::AmbiguousClassification),
        c if c.name() != expected => Err(Error::WrongCase { expected: expected.into(), found: c.name().into() }),
        _ => Ok(class),
    }
}

const ALL_TRIPLES: [[usize; 3]; 4] = [[1, 2, 3], [1, 2, 4], [1, 3, 4], [2, 3, 4]];

fn add_noncollinear_triples(report: &mut CompatibilityReport, set: &FundamentalSet, skip: Option<[usize; 3]>) {
    for t in ALL_TRIPLES {
        if Some(t) != skip {
            for (name, r) in noncollinear_residuals(set, t) {
                report.insert(name, r);
            }
        }
    }
}

/// The two six-factor products of the Case-1 identity and their normalized
/// difference.
pub fn case1_identity(set: &FundamentalSet, reps: &Representatives) -> (f64, f64, f64) {
    let e = |s, i, j, t| reps.e(set, s, i, j, t);
    let l = e(4, 1, 2, 3) * e(2, 1, 3, 4) * e(3, 1, 4, 2) * e(4, 2, 3, 1) * e(1, 2, 4, 3) * e(2, 3, 4, 1);
    let r = e(3, 1, 2, 4) * e(4, 1, 3, 2) * e(2, 1, 4, 3) * e(1, 2, 3, 4) * e(3, 2, 4, 1) * e(1, 3, 4, 2);
    (ratio(l - r, &[l, r]), l, r)
}

/// Case 1: triplewise conditions plus the six-factor identity.
pub fn check_case1(set: &FundamentalSet, tol: &Tolerances) -> Result<CompatibilityReport> {
    let class = classify_for(set, tol, "Case1")?;
    let mut report = CompatibilityReport::new(Classification::Quadruple(class), tol);
    add_noncollinear_triples(&mut report, set, None);
    let (residual, l, r) = case1_identity(set, &Representatives::canonical(set));
    report.insert("identity", residual);
    report.diagnostics.insert("identity.lhs".into(), l);
    report.diagnostics.insert("identity.rhs".into(), r);
    let degenerate = l.abs().max(r.abs()) < CASE1_PRODUCT_FLOOR;
    if degenerate {
        report.notes.push("both six-factor products vanish".into());
    }
    Ok(report.settle(degenerate))
}

/// Case 1 through concurrence of the epipolar lines `F^4i C_i X` for the
/// explicit first three cameras and `X = (1, 1, 1, 1)`.
pub fn check_case1_geometric(set: &FundamentalSet, tol: &Tolerances) -> Result<CompatibilityReport> {
    let class = classify_for(set, tol, "Case1")?;
    let mut report = CompatibilityReport::new(Classification::Quadruple(class), tol);
    add_noncollinear_triples(&mut report, set, None);
    let reps = Representatives::canonical(set);
    let cams = frame_cameras(set, &reps)?;
    let p4 = Vector4::new(0.0, 0.0, 0.0, 1.0);
    for (k, c) in cams.iter().enumerate() {
        let i = k + 1;
        report
            .diagnostics
            .insert(format!("frame_p4.{i}"), sin_angle(&c.project(&p4), set.epipole(4, i).coords()));
    }
    let x = Vector4::repeat(1.0);
    let lines: Vec<Vector3<f64>> = cams
        .iter()
        .enumerate()
        .map(|(k, c)| (set.get(4, k + 1) * c.project(&x)).normalize())
        .collect();
    let concurrence = Matrix3::from_columns(&lines).determinant().abs();
    report.insert("concurrence", concurrence);
    let separation = (0..3)
        .flat_map(|a| (a + 1..3).map(move |b| (a, b)))
        .map(|(a, b)| sin_angle(&lines[a], &lines[b]))
        .fold(f64::INFINITY, f64::min);
    report.diagnostics.insert("line_separation".into(), separation);
    let degenerate = !(separation > tol.compat);
    if degenerate {
        report.notes.push("two epipolar lines coincide".into());
    }
    Ok(report.settle(degenerate))
}

fn aux_independent(set: &FundamentalSet, image: usize, p: &Vector3<f64>, tol: &Tolerances) -> bool {
    let others: Vec<usize> = (1..=4).filter(|&k| k != image).collect();
    let a = set.epipole(others[0], image).vector();
    let b = set.epipole(others[1], image).vector();
    let n = p.norm();
    n > 0.0 && Matrix3::from_columns(&[a, b, p / n]).determinant().abs() > tol.classify
}

fn random_aux_point<R: Rng>(set: &FundamentalSet, image: usize, rng: &mut R, tol: &Tolerances) -> Result<Vector3<f64>> {
    for _ in 0..AUX_REDRAWS {
        let p = sphere_point::<3, _>(rng);
        if aux_independent(set, image, &p, tol) {
            return Ok(p);
        }
    }
    Err(Error::AuxiliaryDegenerate)
}

/// Draws auxiliary points `e_i^5` for a four-view set.
pub fn draw_aux<R: Rng>(set: &FundamentalSet, strategy: AuxStrategy, rng: &mut R, tol: &Tolerances) -> Result<AuxiliaryPoints5> {
    let mut points = Vec::with_capacity(4);
    match strategy {
        AuxStrategy::Random | AuxStrategy::Projected => {
            for i in 1..=4 {
                points.push(random_aux_point(set, i, rng, tol)?);
            }
        }
        AuxStrategy::EpipolarLines => {
            let fixed = [
                set.get(1, 2) * set.epipole(4, 2).coords(),
                set.get(2, 3) * set.epipole(4, 3).coords(),
                set.get(3, 1) * set.epipole(4, 1).coords(),
            ];
            for (k, p) in fixed.iter().enumerate() {
                if !aux_independent(set, k + 1, p, tol) {
                    return Err(Error::AuxiliaryDegenerate);
                }
                points.push(*p);
            }
            points.push(random_aux_point(set, 4, rng, tol)?);
        }
    }
    let points = points.into_iter().map(Point2::new).collect::<Result<Vec<_>>>()?;
    Ok(AuxiliaryPoints5 { points, strategy })
}

fn others3(i: usize) -> [usize; 3] {
    let o: Vec<usize> = (1..=4).filter(|&k| k != i).collect();
    [o[0], o[1], o[2]]
}

/// Normalized residual of the short Case-2 equation for image `i`.
pub fn case2_short(set: &FundamentalSet, reps: &Representatives, i: usize) -> f64 {
    let [j, k, l] = others3(i);
    let e = |s, a, b, t| reps.e(set, s, a, b, t);
    let t1 = e(i, j, k, 5) * e(i, k, l, 5) * e(i, l, j, 5);
    let t2 = e(i, k, j, 5) * e(i, j, l, 5) * e(i, l, k, 5);
    ratio(t1 + t2, &[t1, t2])
}

/// Normalized residual of the six-term Case-2 equation.
pub fn case2_long(set: &FundamentalSet, reps: &Representatives) -> f64 {
    let e = |s, a, b, t| reps.e(set, s, a, b, t);
    let common = e(3, 2, 1, 5) * e(2, 3, 1, 5);
    let terms = [
        e(3, 2, 4, 5) * e(2, 3, 1, 5) * e(2, 4, 1, 5) * e(1, 3, 2, 5) * e(1, 4, 3, 5) * e(5, 1, 2, 5),
        -e(2, 3, 4, 5) * e(3, 2, 1, 5) * e(2, 4, 1, 5) * e(1, 3, 2, 5) * e(1, 4, 2, 5) * e(5, 1, 3, 5),
        -common * e(1, 3, 2, 5) * e(1, 4, 2, 5) * e(2, 4, 3, 5) * e(5, 1, 4, 5),
        -e(1, 3, 4, 5) * common * e(2, 4, 1, 5) * e(1, 4, 2, 5) * e(5, 2, 3, 5),
        -common * e(2, 4, 1, 5) * e(1, 3, 2, 5) * e(1, 4, 3, 5) * e(5, 2, 4, 5),
        common * e(2, 4, 1, 5) * e(1, 3, 2, 5) * e(1, 4, 2, 5) * e(5, 3, 4, 5),
    ];
    ratio(terms.iter().sum(), &terms)
}

/// Case 2: triplewise conditions, the four short equations and the long
/// equation, each evaluated on `draws` independent auxiliary samples.
pub fn check_case2(set: &FundamentalSet, tol: &Tolerances, opts: &Case2Options) -> Result<CompatibilityReport> {
    let class = classify_for(set, tol, "Case2")?;
    if opts.draws == 0 {
        return Err(Error::InvalidArgument("at least one auxiliary draw is required".into()));
    }
    let mut report = CompatibilityReport::new(Classification::Quadruple(class), tol);
    add_noncollinear_triples(&mut report, set, None);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let canonical = Representatives::canonical(set);

    // rescaling self-test on the long equation decides which representatives
    // to use for it
    let probe = draw_aux(set, opts.strategy, &mut rng, tol)?;
    let probe_reps = canonical.clone().with_aux(&probe);
    let scaled = probe_reps.rescaled(&mut rng, 0.1, 10.0);
    let delta = (case2_long(set, &probe_reps) - case2_long(set, &scaled)).abs();
    report.diagnostics.insert("selftest.long_delta".into(), delta);
    let mode = if delta <= SELF_TEST_BOUND { LongFormMode::Canonical } else { LongFormMode::FixedScaling };
    report.long_form = Some(mode);
    let long_base = match mode {
        LongFormMode::Canonical => canonical.clone(),
        LongFormMode::FixedScaling => canonical.with_sum_scaling()?,
    };

    let mut draw_passes = Vec::with_capacity(opts.draws);
    for d in 0..opts.draws {
        let mut pass = true;
        // one auxiliary sample per equation
        for i in 1..=4 {
            let aux = draw_aux(set, opts.strategy, &mut rng, tol)?;
            let r = case2_short(set, &canonical.clone().with_aux(&aux), i);
            pass &= r <= tol.compat;
            report.insert(format!("draw{d}.short{i}"), r);
        }
        let aux = draw_aux(set, opts.strategy, &mut rng, tol)?;
        let r = case2_long(set, &long_base.clone().with_aux(&aux));
        pass &= r <= tol.compat;
        report.insert(format!("draw{d}.long"), r);
        draw_passes.push(pass);
    }
    let unanimous = draw_passes.iter().all(|&p| p == draw_passes[0]);
    if !unanimous {
        report.notes.push("auxiliary draws disagree".into());
    }
    Ok(report.settle(!unanimous))
}

/// Case 2 through the three-term form valid when the auxiliary points in
/// images 1-3 are images of one world point under reconstructed cameras.
pub fn check_case2_simpler(set: &FundamentalSet, tol: &Tolerances, seed: u64) -> Result<CompatibilityReport> {
    let class = classify_for(set, tol, "Case2")?;
    let mut report = CompatibilityReport::new(Classification::Quadruple(class), tol);
    add_noncollinear_triples(&mut report, set, None);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let canonical = Representatives::canonical(set);
    for i in 1..=4 {
        let aux = draw_aux(set, AuxStrategy::Random, &mut rng, tol)?;
        report.insert(format!("short{i}"), case2_short(set, &canonical.clone().with_aux(&aux), i));
    }

    let (cams, _) = case2_first_three(set, tol, &mut rng)?;
    let centers: Vec<Vector4<f64>> = cams.iter().map(|c| c.center().vector()).collect();
    let mut p5 = None;
    for _ in 0..AUX_REDRAWS {
        let p = sphere_point::<4, _>(&mut rng);
        let m = nalgebra::Matrix4::from_columns(&[centers[0], centers[1], centers[2], p]);
        if m.determinant().abs() > 0.05 {
            p5 = Some(p);
            break;
        }
    }
    let p5 = p5.ok_or_else(|| Error::DegenerateReconstruction("no point off the center plane".into()))?;
    let mut points: Vec<Vector3<f64>> = cams.iter().map(|c| c.project(&p5)).collect();
    points.push(random_aux_point(set, 4, &mut rng, tol)?);
    let aux = AuxiliaryPoints5 {
        points: points.into_iter().map(Point2::new).collect::<Result<Vec<_>>>()?,
        strategy: AuxStrategy::Projected,
    };
    let reps = canonical.with_aux(&aux);
    let e = |s, a, b, t| reps.e(set, s, a, b, t);
    let terms = [
        e(1, 4, 2, 5) * e(2, 4, 3, 5) * e(5, 4, 1, 5),
        e(1, 4, 3, 5) * e(2, 4, 1, 5) * e(5, 4, 2, 5),
        -e(1, 4, 2, 5) * e(2, 4, 1, 5) * e(5, 4, 3, 5),
    ];
    report.insert("simpler", ratio(terms.iter().sum(), &terms));
    Ok(report.settle(false))
}

/// Case 3: collinear conditions on the collinear triple, non-collinear ones
/// on the other three.
pub fn check_case3(set: &FundamentalSet, tol: &Tolerances) -> Result<CompatibilityReport> {
    let class = classify_for(set, tol, "Case3")?;
    let QuadCase::Case3(triple) = class.case else { unreachable!("checked by classify_for") };
    let mut report = CompatibilityReport::new(Classification::Quadruple(class), tol);
    let (name, r) = collinear_entry(set, triple);
    report.insert(name, r);
    add_noncollinear_triples(&mut report, set, Some(triple));
    Ok(report.settle(false))
}

fn all_epipoles_coincide(set: &FundamentalSet, tol: &Tolerances) -> bool {
    let n = set.n();
    (1..=n).all(|image| {
        let eps: Vec<Point2> = (1..=n).filter(|&o| o != image).map(|o| set.epipole(o, image)).collect();
        eps.iter().all(|e| sin_angle(e.coords(), eps[0].coords()) <= tol.classify)
    })
}

fn triples(n: usize) -> impl Iterator<Item = [usize; 3]> {
    (1..=n).flat_map(move |a| (a + 1..=n).flat_map(move |b| (b + 1..=n).map(move |c| [a, b, c])))
}

/// All centers collinear, any `n >= 3`: collinear conditions on every triple.
pub fn check_case4(set: &FundamentalSet, tol: &Tolerances) -> Result<CompatibilityReport> {
    if set.n() < 3 {
        return Err(Error::InvalidArgument("Case 4 needs at least three views".into()));
    }
    if !all_epipoles_coincide(set, tol) {
        let found = if set.n() == 4 { classify_quadruple(set, tol).case.name() } else { "NotCollinear" };
        return Err(Error::WrongCase { expected: "Case4".into(), found: found.into() });
    }
    let classification = match set.n() {
        3 => Classification::Triple(classify_triple(set, tol)),
        4 => Classification::Quadruple(classify_quadruple(set, tol)),
        n => Classification::Multiview { n, collinear: true },
    };
    let mut report = CompatibilityReport::new(classification, tol);
    for t in triples(set.n()) {
        let (name, r) = collinear_entry(set, t);
        report.insert(name, r);
    }
    Ok(report.settle(false))
}

fn folded(result: Result<CompatibilityReport>, classification: Classification, tol: &Tolerances) -> CompatibilityReport {
    result.unwrap_or_else(|err| {
        let mut report = CompatibilityReport::new(classification, tol);
        report.notes.push(format!("{}: {err}", err.kind()));
        report
    })
}

/// Classifies four views and runs the matching check. Errors become a
/// degenerate verdict.
pub fn check_quadruple(set: &FundamentalSet, opts: &CheckOptions) -> CompatibilityReport {
    let tol = &opts.tolerances;
    if set.n() != 4 {
        let mut report = CompatibilityReport::new(Classification::Multiview { n: set.n(), collinear: false }, tol);
        report.notes.push("InvalidArgument: check_quadruple needs four views".into());
        return report;
    }
    let class = classify_quadruple(set, tol);
    let result = match class.case {
        QuadCase::Case1 => check_case1(set, tol),
        QuadCase::Case2 => check_case2(set, tol, &opts.case2),
        QuadCase::Case3(_) => check_case3(set, tol),
        QuadCase::Case4 => check_case4(set, tol),
        QuadCase::Ambiguous => Err(Error::AmbiguousClassification),
    };
    folded(result, Classification::Quadruple(class), tol)
}

/// Compatibility of `n` views from their triples (all collinear) or their
/// 4-subsets.
pub fn check_multiview(set: &FundamentalSet, opts: &CheckOptions) -> CompatibilityReport {
    let tol = &opts.tolerances;
    match set.n() {
        2 => return CompatibilityReport::new(Classification::Pair, tol).settle(false),
        3 => {
            let class = classify_triple(set, tol);
            return folded(check_triple(set, tol), Classification::Triple(class), tol);
        }
        4 => return check_quadruple(set, opts),
        _ => {}
    }
    let n = set.n();
    if all_epipoles_coincide(set, tol) {
        return folded(check_case4(set, tol), Classification::Multiview { n, collinear: true }, tol);
    }
    let mut report = CompatibilityReport::new(Classification::Multiview { n, collinear: false }, tol);
    let mut worst: Option<(f64, Vec<usize>)> = None;
    let mut any_degenerate = false;
    for a in 1..=n {
        for b in a + 1..=n {
            for c in b + 1..=n {
                for d in c + 1..=n {
                    let views = vec![a, b, c, d];
                    let sub = check_quadruple(&set.subset(&views), opts);
                    let w = sub.worst_residual();
                    let name = format!("q{a}-{b}-{c}-{d}");
                    if sub.residuals.is_empty() {
                        report.notes.push(format!("{name}: {}", sub.notes.join("; ")));
                    } else {
                        report.insert(name, w);
                    }
                    any_degenerate |= sub.verdict == Verdict::Degenerate;
                    if worst.as_ref().is_none_or(|(m, _)| w > *m) {
                        worst = Some((w, views.clone()));
                    }
                    report.subsets.push(SubsetOutcome {
                        views,
                        case: sub.classification.label(),
                        verdict: sub.verdict,
                        worst_residual: w,
                    });
                }
            }
        }
    }
    if let Some((w, views)) = worst {
        report.diagnostics.insert("worst_subset_residual".into(), w);
        report.notes.push(format!("worst subset {views:?}"));
    }
    let any_incompatible = report.subsets.iter().any(|s| s.verdict == Verdict::Incompatible);
    report.verdict = if any_incompatible {
        Verdict::Incompatible
    } else if any_degenerate {
        Verdict::Degenerate
    } else {
        Verdict::Compatible
    };
    report
}
