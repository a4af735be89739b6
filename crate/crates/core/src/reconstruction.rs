//! Witness cameras for compatible sets, and their certificates.

use std::collections::BTreeMap;

use nalgebra::{Matrix3, Matrix3x4, Matrix4, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classify::{classify_quadruple, classify_triple, QuadCase, TripleLabel};
use crate::compatibility::{
    check_case1, check_case2, check_case3, check_case4, check_multiview, check_triple, draw_aux, AuxStrategy,
    Case2Options, CheckOptions,
};
use crate::error::{Error, Result};
use crate::fundamental::{is_skew_certified, two_view_cameras, FundamentalMatrix, FundamentalSet, Representatives};
use crate::projective::{back_projected_line, camera_from_constraints, frame_quality, meet_lines, skew, transform_camera, Camera, Line3, Point2, Point3};
use crate::synth::sphere_point;
use crate::tolerances::Tolerances;

const FRAME_ATTEMPTS: usize = 50;
const WORLD_FRAME_FLOOR: f64 = 1e-2;
const IMAGE_FRAME_FLOOR: f64 = 1e-3;
const FRAME_DEGENERACY: f64 = 1e-9;
const INTERNAL_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Uniqueness {
    /// Unique up to a world transform in PGL(4).
    Unique,
    /// One member of a larger family of solutions.
    Family,
}

/// Skew-symmetry residuals of `C_i^T F^ij C_j` for every pair `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub residuals: BTreeMap<(usize, usize), f64>,
    pub tolerance: f64,
    pub passed: bool,
}

impl Certificate {
    pub fn worst(&self) -> f64 {
        self.residuals.values().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CameraSolution {
    pub cameras: Vec<Camera>,
    pub certificate: Certificate,
    pub uniqueness: Uniqueness,
    /// Construction-specific measurements, such as meet residuals.
    pub diagnostics: BTreeMap<String, f64>,
}

pub fn verify_solution(cameras: &[Camera], set: &FundamentalSet, tol: &Tolerances) -> Result<Certificate> {
    if cameras.len() != set.n() {
        return Err(Error::InvalidArgument(format!("{} cameras for {} views", cameras.len(), set.n())));
    }
    let mut residuals = BTreeMap::new();
    for (i, j) in set.pairs() {
        let (_, r) = is_skew_certified(&set.get(i, j), &cameras[i - 1], &cameras[j - 1], tol).map_err(|e| match e {
            Error::CentersCoincide(..) => Error::CentersCoincide(i, j),
            other => other,
        })?;
        residuals.insert((i, j), r);
    }
    let passed = residuals.values().all(|&r| r <= tol.compat);
    Ok(Certificate { residuals, tolerance: tol.compat, passed })
}

fn finish(
    cameras: Vec<Camera>,
    set: &FundamentalSet,
    tol: &Tolerances,
    uniqueness: Uniqueness,
    diagnostics: BTreeMap<String, f64>,
) -> Result<CameraSolution> {
    let certificate = verify_solution(&cameras, set, tol)?;
    if !certificate.passed {
        return Err(Error::DegenerateReconstruction(format!(
            "certificate residual {:e} exceeds {:e}",
            certificate.worst(),
            tol.compat
        )));
    }
    Ok(CameraSolution { cameras, certificate, uniqueness, diagnostics })
}

/// The canonical two-view solution with `v = 0`, `lambda = 1`.
pub fn reconstruct_two(f: &FundamentalMatrix, tol: &Tolerances) -> Result<CameraSolution> {
    let (p1, p2) = two_view_cameras(f, &Vector3::zeros(), 1.0)?;
    let set = FundamentalSet::from_entries(2, vec![*f]);
    finish(vec![p1, p2], &set, tol, Uniqueness::Family, BTreeMap::new())
}

/// The unique camera `C_k` compatible with `F^ka`, `F^kb` given `C_a`, `C_b`,
/// for a non-collinear triple `(a, b, k)`.
///
/// The center of `C_k` is the meet of the back-projections of `e_a^k` and
/// `e_b^k`; two random world points fix the remaining frame through the
/// epipolar lines they induce in image `k`.
pub fn extend_view<R: Rng>(
    set: &FundamentalSet,
    (a, ca): (usize, &Camera),
    (b, cb): (usize, &Camera),
    k: usize,
    tol: &Tolerances,
    rng: &mut R,
) -> Result<(Camera, f64)> {
    let la = back_projected_line(ca, &set.epipole(k, a));
    let lb = back_projected_line(cb, &set.epipole(k, b));
    let (pk, meet_residual) = meet_lines(&[la, lb], tol.equal)?;
    let (pa, pb) = (ca.center(), cb.center());
    let (eka, ekb) = (set.epipole(a, k), set.epipole(b, k));
    let fka = set.get(k, a) * ca.matrix();
    let fkb = set.get(k, b) * cb.matrix();
    let target = |x: &Vector4<f64>| (fka * x).cross(&(fkb * x));
    // first draw clearing both floors, else the best draw clear of degeneracy
    let mut best: Option<(f64, Vector4<f64>, Vector4<f64>)> = None;
    for _ in 0..FRAME_ATTEMPTS {
        let x = sphere_point::<4, _>(rng);
        let y = sphere_point::<4, _>(rng);
        let world = frame_quality(&[pa.vector(), pb.vector(), pk.vector(), x, y]);
        let image = frame_quality(&[eka.vector(), ekb.vector(), target(&x), target(&y)]);
        let score = (world / WORLD_FRAME_FLOOR).min(image / IMAGE_FRAME_FLOOR);
        if best.is_none_or(|(s, ..)| score > s) {
            best = Some((score, x, y));
        }
        if score > 1.0 {
            break;
        }
    }
    let (score, x, y) = best.expect("at least one attempt");
    if score * IMAGE_FRAME_FLOOR.min(WORLD_FRAME_FLOOR) <= FRAME_DEGENERACY {
        return Err(Error::FrameSamplingFailed);
    }
    let constraints = [
        (pa, Some(eka)),
        (pb, Some(ekb)),
        (pk, None),
        (Point3::new(x)?, Some(Point2::new(target(&x))?)),
        (Point3::new(y)?, Some(Point2::new(target(&y))?)),
    ];
    Ok((camera_from_constraints(&constraints, tol)?, meet_residual))
}

/// `P_1 = [I | 0]`, `P_i = [[e_i^1]_x F^i1 + e_i^1 w^T | (i - 1) e_i^1]` with
/// `w = e_1^2`.
///
/// Without the `w` term every `P_i`, `i > 1`, has its center at `(e_1^i, 0)`.
/// The term moves the centers apart along the baseline and leaves each
/// camera's pencil of epipolar lines unchanged.
fn collinear_cameras(set: &FundamentalSet) -> Result<Vec<Camera>> {
    let w = set.epipole(2, 1).vector();
    let mut cams = vec![Camera::canonical()];
    for i in 2..=set.n() {
        let e = set.epipole(1, i).vector();
        let mut m = Matrix3x4::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&(skew(&e) * set.get(i, 1) + e * w.transpose()));
        m.set_column(3, &(e * (i - 1) as f64));
        cams.push(Camera::new(m).map_err(|_| Error::DegenerateReconstruction(format!("camera {i} is rank deficient")))?);
    }
    Ok(cams)
}

fn triple_cameras<R: Rng>(set: &FundamentalSet, tol: &Tolerances, rng: &mut R) -> Result<(Vec<Camera>, f64)> {
    let (c1, c2) = two_view_cameras(&set.entry(1, 2), &Vector3::zeros(), 1.0)?;
    let (c3, meet) = extend_view(set, (1, &c1), (2, &c2), 3, tol, rng)?;
    Ok((vec![c1, c2, c3], meet))
}

/// Witness cameras for a compatible triple.
pub fn reconstruct_triple(set: &FundamentalSet, tol: &Tolerances) -> Result<CameraSolution> {
    reconstruct_triple_seeded(set, tol, INTERNAL_SEED)
}

/// As [`reconstruct_triple`], with the seed of the internal world-point draws.
pub fn reconstruct_triple_seeded(set: &FundamentalSet, tol: &Tolerances, seed: u64) -> Result<CameraSolution> {
    let report = check_triple(set, tol)?;
    if !report.is_compatible() {
        return Err(Error::NotCompatible);
    }
    match classify_triple(set, tol).label {
        TripleLabel::NonCollinear => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (cams, meet) = triple_cameras(set, tol, &mut rng)?;
            let diagnostics = BTreeMap::from([("p3_meet".to_string(), meet)]);
            finish(cams, set, tol, Uniqueness::Unique, diagnostics)
        }
        _ => finish(collinear_cameras(set)?, set, tol, Uniqueness::Family, BTreeMap::new()),
    }
}

/// The first three cameras of a Case-1 quadruple with columns scaled by
/// epipolar numbers; centers are the first three coordinate points and the
/// fourth coordinate point maps to `e_i^4`.
pub fn frame_cameras(set: &FundamentalSet, reps: &Representatives) -> Result<[Camera; 3]> {
    let e = |s, i, j, t| reps.e(set, s, i, j, t);
    let ep = |image, other| reps.epipole(image, other);
    let z = Vector3::zeros();
    let mats = [
        Matrix3x4::from_columns(&[z, ep(1, 2) * e(3, 1, 2, 4), -ep(1, 3) * e(4, 1, 2, 3), ep(1, 4) * e(3, 1, 2, 4)]),
        Matrix3x4::from_columns(&[-ep(2, 1) * e(4, 2, 3, 1), z, ep(2, 3) * e(1, 2, 3, 4), ep(2, 4) * e(1, 2, 3, 4)]),
        Matrix3x4::from_columns(&[ep(3, 1) * e(4, 1, 3, 2), -ep(3, 2) * e(2, 1, 3, 4), z, ep(3, 4) * e(4, 1, 3, 2)]),
    ];
    let mut out = [Camera::canonical(); 3];
    for (k, m) in mats.iter().enumerate() {
        out[k] = Camera::new(*m)
            .map_err(|_| Error::DegenerateReconstruction(format!("frame camera {} is rank deficient", k + 1)))?;
    }
    Ok(out)
}

fn unit4(k: usize) -> Vector4<f64> {
    let mut v = Vector4::zeros();
    v[k] = 1.0;
    v
}

/// Witness cameras for a compatible Case-1 quadruple.
pub fn reconstruct_case1(set: &FundamentalSet, tol: &Tolerances) -> Result<CameraSolution> {
    if !check_case1(set, tol)?.is_compatible() {
        return Err(Error::NotCompatible);
    }
    let reps = Representatives::canonical(set);
    let [c1, c2, c3] = frame_cameras(set, &reps)?;
    let x = Vector4::repeat(1.0);
    let lines: Vec<Vector3<f64>> = [c1, c2, c3]
        .iter()
        .enumerate()
        .map(|(k, c)| (set.get(4, k + 1) * c.project(&x)).normalize())
        .collect();
    let stack = nalgebra::DMatrix::from_fn(3, 3, |r, c| lines[r][c]);
    let svd = crate::linalg::RightSvd::new(&stack);
    let (v, x4_residual) = svd.smallest();
    let x4 = Point2::new(Vector3::new(v[0], v[1], v[2]))?;
    let constraints = [
        (Point3::new(unit4(0))?, Some(set.epipole(1, 4))),
        (Point3::new(unit4(1))?, Some(set.epipole(2, 4))),
        (Point3::new(unit4(2))?, Some(set.epipole(3, 4))),
        (Point3::new(unit4(3))?, None),
        (Point3::new(x)?, Some(x4)),
    ];
    let c4 = camera_from_constraints(&constraints, tol)?;
    let mut diagnostics = BTreeMap::from([("x4_residual".to_string(), x4_residual)]);
    for (k, c) in [c1, c2, c3].iter().enumerate() {
        let s = crate::projective::sin_angle(&c.project(&unit4(3)), set.epipole(4, k + 1).coords());
        diagnostics.insert(format!("frame_p4.{}", k + 1), s);
    }
    finish(vec![c1, c2, c3, c4], set, tol, Uniqueness::Unique, diagnostics)
}

/// Fundamental matrices of a Case-2 quadruple after the action
/// `H_i = [e_i^j | e_i^k | e_i^5]`, `j < k` the two smallest other views,
/// with the epipoles scaled so that `e_i^l = e_i^j + e_i^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GForm {
    pub h: [Matrix3<f64>; 4],
    pub g: BTreeMap<(usize, usize), Matrix3<f64>>,
}

impl GForm {
    pub fn new(set: &FundamentalSet, scaled: &Representatives, aux: &[Vector3<f64>]) -> Result<Self> {
        let mut h = [Matrix3::zeros(); 4];
        for i in 1..=4usize {
            let others: Vec<usize> = (1..=4).filter(|&k| k != i).collect();
            h[i - 1] = Matrix3::from_columns(&[scaled.epipole(i, others[0]), scaled.epipole(i, others[1]), aux[i - 1]]);
            if h[i - 1].try_inverse().is_none() {
                return Err(Error::SingularTransform(i));
            }
        }
        let g = set
            .pairs()
            .map(|(i, j)| ((i, j), h[i - 1].transpose() * set.get(i, j) * h[j - 1]))
            .collect();
        Ok(Self { h, g })
    }

    fn at(&self, i: usize, j: usize, r: usize, c: usize) -> f64 {
        self.g[&(i, j)][(r, c)]
    }

    pub fn x(&self, i: usize, j: usize) -> f64 {
        if (i, j) == (1, 2) {
            self.at(1, 2, 1, 2)
        } else {
            self.at(i, j, 0, 2)
        }
    }

    pub fn y(&self, i: usize, j: usize) -> f64 {
        if i == 1 {
            self.at(i, j, 2, 1)
        } else {
            self.at(i, j, 2, 0)
        }
    }

    pub fn z(&self, i: usize, j: usize) -> f64 {
        self.at(i, j, 2, 2)
    }

    /// Largest deviation from the displayed zero pattern, relative to each
    /// matrix norm.
    pub fn sparsity_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (&(i, j), g) in &self.g {
            let mut expected = Matrix3::zeros();
            let (x, y, z) = (self.x(i, j), self.y(i, j), self.z(i, j));
            if (i, j) == (1, 2) {
                expected[(1, 2)] = x;
            } else {
                expected[(0, 2)] = x;
            }
            if j == 4 {
                expected[(1, 2)] = -x;
            }
            if i == 1 {
                expected[(2, 1)] = y;
            } else {
                expected[(2, 0)] = y;
            }
            if (i, j) == (3, 4) {
                expected[(2, 1)] = -y;
            }
            expected[(2, 2)] = z;
            worst = worst.max((g - expected).norm() / g.norm());
        }
        worst
    }

    /// The explicit first three cameras, mapped back through `H_i`.
    pub fn cameras(&self) -> Result<[Camera; 3]> {
        let (x12, x13) = (self.x(1, 2), self.x(1, 3));
        let (y12, y13, y23) = (self.y(1, 2), self.y(1, 3), self.y(2, 3));
        let (z12, z13, z23) = (self.z(1, 2), self.z(1, 3), self.z(2, 3));
        let c1 = Matrix3x4::new(0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, x12 * x13 * y23);
        let c2 = Matrix3x4::new(
            1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 1.0, z12 * x13 * y23,
            0.0, 0.0, 0.0, -y12 * x13 * y23,
        );
        let c3 = Matrix3x4::new(
            1.0, 0.0, 0.0, z23 * x12 * y13,
            0.0, 1.0, 0.0, z13 * x12 * y23,
            0.0, 0.0, 0.0, -x12 * y13 * y23,
        );
        let mut out = [Camera::canonical(); 3];
        for (k, c) in [c1, c2, c3].iter().enumerate() {
            out[k] = Camera::new(self.h[k] * c)
                .map_err(|_| Error::DegenerateReconstruction(format!("normal-form camera {} is rank deficient", k + 1)))?;
        }
        Ok(out)
    }
}

/// Rescales the world's last coordinate so no camera has a negligible
/// fourth column; random world points then stay clear of the center plane.
fn balanced<const K: usize>(cams: [Camera; K]) -> Result<[Camera; K]> {
    let ratio = cams
        .iter()
        .map(|c| c.matrix().column(3).norm() / c.matrix().norm())
        .fold(0.0, f64::max);
    if ratio == 0.0 {
        return Ok(cams);
    }
    let h = Matrix4::from_diagonal(&Vector4::new(1.0, 1.0, 1.0, 1.0 / ratio));
    let mut out = cams;
    for c in out.iter_mut() {
        *c = transform_camera(c, &h)?;
    }
    Ok(out)
}

/// First three cameras of a Case-2 quadruple through the normal form.
pub(crate) fn case2_first_three<R: Rng>(set: &FundamentalSet, tol: &Tolerances, rng: &mut R) -> Result<([Camera; 3], GForm)> {
    let scaled = Representatives::canonical(set).with_sum_scaling()?;
    let aux = draw_aux(set, AuxStrategy::Random, rng, tol)?;
    let columns: Vec<Vector3<f64>> = aux.points.iter().map(|p| p.vector()).collect();
    let gform = GForm::new(set, &scaled, &columns)?;
    Ok((gform.cameras()?, gform))
}

/// Witness cameras for a compatible Case-2 quadruple.
///
/// The first three cameras come from the normal form; the fourth is the
/// unique extension of `(C_1, C_2)` by `F^41`, `F^42`.
pub fn reconstruct_case2(set: &FundamentalSet, tol: &Tolerances) -> Result<CameraSolution> {
    let opts = Case2Options { seed: INTERNAL_SEED, ..Case2Options::default() };
    if !check_case2(set, tol, &opts)?.is_compatible() {
        return Err(Error::NotCompatible);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(INTERNAL_SEED);
    let (first, gform) = case2_first_three(set, tol, &mut rng)?;
    let [c1, c2, c3] = balanced(first)?;
    let (c4, _) = extend_view(set, (1, &c1), (2, &c2), 4, tol, &mut rng)?;
    let lines: Vec<Line3> = [c1, c2, c3]
        .iter()
        .enumerate()
        .map(|(k, c)| back_projected_line(c, &set.epipole(4, k + 1)))
        .collect();
    let mut diagnostics = BTreeMap::from([("gform_sparsity".to_string(), gform.sparsity_residual())]);
    if let Ok((p4, meet)) = meet_lines(&lines, tol.equal) {
        diagnostics.insert("p4_meet".into(), meet);
        diagnostics.insert("p4_center_gap".into(), crate::projective::sin_angle(p4.coords(), c4.center().coords()));
    }
    finish(vec![c1, c2, c3, c4], set, tol, Uniqueness::Unique, diagnostics)
}

/// Witness cameras for a compatible Case-3 quadruple.
///
/// With collinear triple `{a, u, v}` and fourth view `d`, the non-collinear
/// triple `(u, v, d)` is reconstructed first and `C_a` is its extension from
/// the anchors `u`, `d`.
pub fn reconstruct_case3(set: &FundamentalSet, tol: &Tolerances) -> Result<CameraSolution> {
    let report = check_case3(set, tol)?;
    if !report.is_compatible() {
        return Err(Error::NotCompatible);
    }
    let QuadCase::Case3([a, u, v]) = classify_quadruple(set, tol).case else {
        return Err(Error::WrongCase { expected: "Case3".into(), found: "other".into() });
    };
    let d = (1..=4).find(|k| ![a, u, v].contains(k)).expect("four views");
    let mut rng = ChaCha8Rng::seed_from_u64(INTERNAL_SEED);
    let (cu, cv) = two_view_cameras(&set.entry(u, v), &Vector3::zeros(), 1.0)?;
    let (cd, _) = extend_view(set, (u, &cu), (v, &cv), d, tol, &mut rng)?;
    let (ca, _) = extend_view(set, (u, &cu), (d, &cd), a, tol, &mut rng)?;
    let mut cams = vec![Camera::canonical(); 4];
    cams[a - 1] = ca;
    cams[u - 1] = cu;
    cams[v - 1] = cv;
    cams[d - 1] = cd;
    let span = Line3::new(cu.center(), cv.center(), tol.equal)?;
    let diagnostics = BTreeMap::from([("collinear_center_distance".to_string(), span.distance(ca.center().coords()))]);
    finish(cams, set, tol, Uniqueness::Unique, diagnostics)
}

/// Witness cameras when all centers are collinear, any `n >= 3`.
pub fn reconstruct_case4(set: &FundamentalSet, tol: &Tolerances) -> Result<CameraSolution> {
    if !check_case4(set, tol)?.is_compatible() {
        return Err(Error::NotCompatible);
    }
    finish(collinear_cameras(set)?, set, tol, Uniqueness::Family, BTreeMap::new())
}

fn reconstruct_quadruple(set: &FundamentalSet, tol: &Tolerances) -> Result<CameraSolution> {
    match classify_quadruple(set, tol).case {
        QuadCase::Case1 => reconstruct_case1(set, tol),
        QuadCase::Case2 => reconstruct_case2(set, tol),
        QuadCase::Case3(_) => reconstruct_case3(set, tol),
        QuadCase::Case4 => reconstruct_case4(set, tol),
        QuadCase::Ambiguous => Err(Error::AmbiguousClassification),
    }
}

/// Witness cameras for any compatible set.
///
/// Four or more views start from a 4-subset of Case 1 or 2 when one exists
/// and add each remaining view as the unique extension of the lowest anchor
/// pair forming a non-collinear triple with it.
pub fn reconstruct_multiview(set: &FundamentalSet, tol: &Tolerances) -> Result<CameraSolution> {
    let n = set.n();
    match n {
        2 => return reconstruct_two(&set.entry(1, 2), tol),
        3 => return reconstruct_triple(set, tol),
        _ => {}
    }
    let report = check_multiview(set, &CheckOptions::with_tolerances(*tol));
    if !report.is_compatible() {
        return Err(Error::NotCompatible);
    }
    if n == 4 {
        return reconstruct_quadruple(set, tol);
    }
    if report.classification.label() == "CollinearN" {
        return reconstruct_case4(set, tol);
    }

    let subsets = report.subsets;
    let seed_views = subsets
        .iter()
        .find(|s| s.case == "Case1" || s.case == "Case2")
        .or_else(|| subsets.first())
        .map(|s| s.views.clone())
        .ok_or_else(|| Error::DegenerateReconstruction("no 4-subset".into()))?;
    let seed = reconstruct_quadruple(&set.subset(&seed_views), tol)?;
    let mut cams: Vec<Option<Camera>> = vec![None; n];
    for (k, &v) in seed_views.iter().enumerate() {
        cams[v - 1] = Some(seed.cameras[k]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(INTERNAL_SEED);
    for k in 1..=n {
        if cams[k - 1].is_some() {
            continue;
        }
        let known: Vec<usize> = (1..=n).filter(|&v| cams[v - 1].is_some()).collect();
        let anchor = known
            .iter()
            .flat_map(|&a| known.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
            .find(|&(a, b)| classify_triple(&set.subset(&[a, b, k]), tol).label == TripleLabel::NonCollinear)
            .ok_or(Error::NoAnchorPair(k))?;
        let (a, b) = anchor;
        let (ca, cb) = (cams[a - 1].expect("known"), cams[b - 1].expect("known"));
        let (ck, _) = extend_view(set, (a, &ca), (b, &cb), k, tol, &mut rng)?;
        cams[k - 1] = Some(ck);
    }
    let cameras = cams.into_iter().map(|c| c.expect("every view placed")).collect();
    finish(cameras, set, tol, Uniqueness::Unique, BTreeMap::new())
}
