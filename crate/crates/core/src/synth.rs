//! Seeded camera generators for each center configuration, and corruption
//! helpers for negative tests.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix3, Matrix3x2, Matrix3x4, Quaternion, SVector, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fundamental::{psi, FundamentalMatrix, FundamentalSet};
use crate::linalg::{project_rank2, RightSvd};
use crate::projective::Camera;
use crate::tolerances::Tolerances;

const PLACEMENT_ATTEMPTS: usize = 2000;
const RESTARTS: usize = 50;
const VOLUME_FLOOR: f64 = 0.1;
const AREA_FLOOR: f64 = 0.05;
const SPACING_FLOOR: f64 = 0.1;
const OFF_LINE_FLOOR: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseLabel {
    Case1,
    Case2,
    Case3,
    Case4,
    GenericN,
    CollinearN,
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseLabel::Case1 => "case1",
            CaseLabel::Case2 => "case2",
            CaseLabel::Case3 => "case3",
            CaseLabel::Case4 => "case4",
            CaseLabel::GenericN => "generic",
            CaseLabel::CollinearN => "collinear",
        })
    }
}

impl FromStr for CaseLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "case1" => Ok(CaseLabel::Case1),
            "case2" => Ok(CaseLabel::Case2),
            "case3" => Ok(CaseLabel::Case3),
            "case4" => Ok(CaseLabel::Case4),
            "generic" | "genericn" => Ok(CaseLabel::GenericN),
            "collinear" | "collinearn" => Ok(CaseLabel::CollinearN),
            other => Err(Error::InvalidArgument(format!("unknown case '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CaseSpec {
    pub case: CaseLabel,
    pub n: usize,
    pub seed: u64,
}

impl CaseSpec {
    pub fn new(case: CaseLabel, n: usize, seed: u64) -> Self {
        Self { case, n, seed }
    }

    /// Four views for Cases 1-4, the given count otherwise.
    pub fn quad(case: CaseLabel, seed: u64) -> Self {
        Self { case, n: 4, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.case {
            CaseLabel::Case1 | CaseLabel::Case2 | CaseLabel::Case3 => self.n == 4,
            CaseLabel::Case4 | CaseLabel::CollinearN => self.n >= 3,
            CaseLabel::GenericN => self.n >= 2,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("{} does not support n = {}", self.case, self.n)))
        }
    }
}

/// Uniform point of the unit sphere in R^D.
pub fn sphere_point<const D: usize, R: Rng + ?Sized>(rng: &mut R) -> SVector<f64, D> {
    loop {
        let v = SVector::<f64, D>::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

fn random_rotation<R: Rng>(rng: &mut R) -> Matrix3<f64> {
    let q = sphere_point::<4, _>(rng);
    UnitQuaternion::from_quaternion(Quaternion::new(q[0], q[1], q[2], q[3]))
        .to_rotation_matrix()
        .into_inner()
}

fn cube_point<R: Rng>(rng: &mut R) -> Vector3<f64> {
    Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0))
}

fn max_edge(points: &[Vector3<f64>]) -> f64 {
    let mut m: f64 = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            m = m.max((a - b).norm());
        }
    }
    m
}

/// `|det[b - a, c - a, d - a]|` over the cube of the longest edge.
fn normalized_volume(p: [&Vector3<f64>; 4]) -> f64 {
    let m = Matrix3::from_columns(&[p[1] - p[0], p[2] - p[0], p[3] - p[0]]);
    let e = max_edge(&[*p[0], *p[1], *p[2], *p[3]]);
    if e == 0.0 {
        0.0
    } else {
        m.determinant().abs() / e.powi(3)
    }
}

/// Twice the triangle area over the square of the longest edge.
fn normalized_area(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
    let e = max_edge(&[*a, *b, *c]);
    if e == 0.0 {
        0.0
    } else {
        (b - a).cross(&(c - a)).norm() / (e * e)
    }
}

/// Places points one at a time, redrawing each until `accept` holds for the
/// prefix; restarts from scratch when a point cannot be placed.
fn place<R: Rng>(
    rng: &mut R,
    n: usize,
    mut draw: impl FnMut(&mut R, usize) -> Vector3<f64>,
    accept: impl Fn(&[Vector3<f64>]) -> bool,
) -> Result<Vec<Vector3<f64>>> {
    'restart: for _ in 0..RESTARTS {
        let mut pts: Vec<Vector3<f64>> = Vec::with_capacity(n);
        for k in 0..n {
            let mut placed = false;
            for _ in 0..PLACEMENT_ATTEMPTS {
                pts.push(draw(rng, k));
                if accept(&pts) {
                    placed = true;
                    break;
                }
                pts.pop();
            }
            if !placed {
                continue 'restart;
            }
        }
        return Ok(pts);
    }
    Err(Error::GeneratorExhausted)
}

fn spaced(pts: &[Vector3<f64>]) -> bool {
    let last = pts.last().expect("nonempty");
    pts[..pts.len() - 1].iter().all(|p| (p - last).norm() > SPACING_FLOOR)
}

fn no_three_collinear(pts: &[Vector3<f64>]) -> bool {
    let k = pts.len() - 1;
    (0..k).all(|a| (a + 1..k).all(|b| normalized_area(&pts[a], &pts[b], &pts[k]) > AREA_FLOOR))
}

fn all_volumes(pts: &[Vector3<f64>]) -> bool {
    let k = pts.len() - 1;
    (0..k).all(|a| (a + 1..k).all(|b| (b + 1..k).all(|c| normalized_volume([&pts[a], &pts[b], &pts[c], &pts[k]]) > VOLUME_FLOOR)))
}

fn random_line<R: Rng>(rng: &mut R) -> (Vector3<f64>, Vector3<f64>) {
    (cube_point(rng) * 0.5, sphere_point::<3, _>(rng))
}

fn centers_for<R: Rng>(spec: &CaseSpec, rng: &mut R) -> Result<Vec<Vector3<f64>>> {
    let n = spec.n;
    match spec.case {
        CaseLabel::Case1 | CaseLabel::GenericN => place(rng, n, |r, _| cube_point(r), |p| {
            spaced(p) && no_three_collinear(p) && all_volumes(p)
        }),
        CaseLabel::Case2 => {
            let o = cube_point(rng) * 0.5;
            let u = sphere_point::<3, _>(rng);
            let w = sphere_point::<3, _>(rng);
            let v = (w - u * u.dot(&w)).normalize();
            place(
                rng,
                n,
                |r, _| o + u * r.random_range(-1.0..1.0) + v * r.random_range(-1.0..1.0),
                |p| spaced(p) && no_three_collinear(p),
            )
        }
        CaseLabel::Case3 => {
            let (o, d) = random_line(rng);
            place(
                rng,
                n,
                |r, k| if k < 3 { o + d * r.random_range(-1.0..1.0) } else { cube_point(r) },
                |p| {
                    if !spaced(p) {
                        return false;
                    }
                    match p.len() {
                        4 => {
                            let off = p[3] - o;
                            (off - d * d.dot(&off)).norm() > OFF_LINE_FLOOR && no_three_collinear(p)
                        }
                        _ => true,
                    }
                },
            )
        }
        CaseLabel::Case4 | CaseLabel::CollinearN => {
            let (o, d) = random_line(rng);
            let span = 1.0f64.max(0.2 * n as f64);
            place(rng, n, |r, _| o + d * r.random_range(-span..span), spaced)
        }
    }
}

/// Cameras `R_i [I | t_i]` with the centers `-t_i` placed per case.
pub fn generate_cameras(spec: &CaseSpec) -> Result<Vec<Camera>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let centers = centers_for(spec, &mut rng)?;
    centers
        .iter()
        .map(|c| {
            let r = random_rotation(&mut rng);
            let mut m = Matrix3x4::zeros();
            m.fixed_view_mut::<3, 3>(0, 0).copy_from(&r);
            m.set_column(3, &(r * -c));
            Camera::new(m)
        })
        .collect()
}

/// `F^ij = psi(P_i, P_j)` for every pair.
pub fn set_from_cameras(cameras: &[Camera]) -> Result<FundamentalSet> {
    let n = cameras.len();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two cameras".into()));
    }
    let mut entries = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            entries.push(psi(&cameras[i], &cameras[j]).map_err(|e| match e {
                Error::CentersCoincide(..) => Error::CentersCoincide(i + 1, j + 1),
                other => other,
            })?);
        }
    }
    Ok(FundamentalSet::from_entries(n, entries))
}

fn ordered_pair(set: &FundamentalSet, (i, j): (usize, usize)) -> Result<(usize, usize, bool)> {
    if i == j || i == 0 || j == 0 || i > set.n() || j > set.n() {
        return Err(Error::InvalidArgument(format!("({i}, {j}) is not a pair of distinct views")));
    }
    Ok((i.min(j), i.max(j), i > j))
}

/// Adds `delta` to `F^ij`, then projects back to rank 2.
pub fn perturb_with(set: &FundamentalSet, pair: (usize, usize), delta: &Matrix3<f64>) -> Result<FundamentalSet> {
    let (i, j, flipped) = ordered_pair(set, pair)?;
    let delta = if flipped { delta.transpose() } else { *delta };
    let (projected, _) = project_rank2(&(set.get(i, j) + delta));
    let f = FundamentalMatrix::new(projected, Tolerances::default().rank).map_err(|_| Error::NotRankTwo(i, j))?;
    Ok(set.with_entry(i, j, f))
}

/// Adds a random matrix of Frobenius norm `eps` to `F^ij` and projects back to
/// rank 2.
pub fn perturb_set(set: &FundamentalSet, pair: (usize, usize), eps: f64, seed: u64) -> Result<FundamentalSet> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument("eps must be a nonnegative number".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0));
    perturb_with(set, pair, &(d * (eps / d.norm())))
}

/// Perturbs `F^ij` by `eps` while keeping both of its epipoles, and
/// optionally every triple condition `(e_i^k)^T F^ij e_j^k = 0`.
pub fn perturb_within_epipoles(
    set: &FundamentalSet,
    pair: (usize, usize),
    eps: f64,
    seed: u64,
    keep_triples: bool,
) -> Result<FundamentalSet> {
    let (i, j, _) = ordered_pair(set, pair)?;
    let f = set.get(i, j);
    let right = set.epipole(i, j).vector();
    let left = set.epipole(j, i).vector();
    let mut rows: Vec<[f64; 9]> = Vec::new();
    for a in 0..3 {
        let mut r = [0.0; 9];
        let mut c = [0.0; 9];
        for b in 0..3 {
            r[a * 3 + b] = right[b];
            c[b * 3 + a] = left[b];
        }
        rows.push(r);
        rows.push(c);
    }
    if keep_triples {
        for k in (1..=set.n()).filter(|&k| k != i && k != j) {
            let u = set.epipole(k, i).vector();
            let v = set.epipole(k, j).vector();
            let mut r = [0.0; 9];
            for a in 0..3 {
                for b in 0..3 {
                    r[a * 3 + b] = u[a] * v[b];
                }
            }
            rows.push(r);
        }
    }
    // the span of F is removed so the perturbation is a genuine change
    let fv: Vec<f64> = f.transpose().iter().copied().collect();
    rows.push(fv.as_slice().try_into().expect("nine entries"));
    let m = DMatrix::from_fn(rows.len(), 9, |r, c| rows[r][c]);
    let svd = RightSvd::new(&m);
    let rank = svd.rank(1e-9);
    if rank == 9 {
        return Err(Error::InvalidArgument("no perturbation keeps these constraints".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = nalgebra::DVector::zeros(9);
    for v in &svd.vectors[rank..] {
        d += v * rng.random_range(-1.0..1.0);
    }
    let d = Matrix3::from_row_slice(d.as_slice());
    let d = d * (eps / d.norm());
    let f2 = FundamentalMatrix::new(f + d, Tolerances::default().rank).map_err(|_| Error::NotRankTwo(i, j))?;
    Ok(set.with_entry(i, j, f2))
}

/// Independent random rank-2 matrices for every pair.
pub fn random_rank2_set(n: usize, seed: u64) -> Result<FundamentalSet> {
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two views".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(n * (n - 1) / 2);
    for _ in 0..n * (n - 1) / 2 {
        loop {
            let a = Matrix3x2::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let b = nalgebra::Matrix2x3::from_fn(|_, _| rng.random_range(-1.0..1.0));
            if let Ok(f) = FundamentalMatrix::new(a * b, Tolerances::default().rank) {
                entries.push(f);
                break;
            }
        }
    }
    Ok(FundamentalSet::from_entries(n, entries))
}

/// `n` random image transforms with condition number at most 20.
pub fn random_actions<R: Rng>(n: usize, rng: &mut R) -> Vec<Matrix3<f64>> {
    (0..n)
        .map(|_| loop {
            let h = Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let s = h.singular_values();
            if s.min() > 0.0 && s.max() / s.min() < 20.0 {
                break h;
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{classify_quadruple, QuadCase};
    use crate::projective::sin_angle;

    #[test]
    fn generators_hit_their_case() {
        let tol = Tolerances::default();
        for seed in 0..20 {
            let label = |c| classify_quadruple(&set_from_cameras(&generate_cameras(&CaseSpec::quad(c, seed)).unwrap()).unwrap(), &tol).case;
            assert_eq!(label(CaseLabel::Case1), QuadCase::Case1);
            assert_eq!(label(CaseLabel::Case2), QuadCase::Case2);
            assert_eq!(label(CaseLabel::Case3), QuadCase::Case3([1, 2, 3]));
            assert_eq!(label(CaseLabel::Case4), QuadCase::Case4);
        }
    }

    #[test]
    fn collinear_five_has_coincident_epipoles() {
        let cams = generate_cameras(&CaseSpec::new(CaseLabel::Case4, 5, 3)).unwrap();
        let set = set_from_cameras(&cams).unwrap();
        for image in 1..=5 {
            let eps: Vec<_> = (1..=5).filter(|&o| o != image).map(|o| set.epipole(o, image)).collect();
            for e in &eps {
                assert!(sin_angle(e.coords(), eps[0].coords()) < 1e-10);
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = CaseSpec::new(CaseLabel::GenericN, 6, 11);
        assert_eq!(generate_cameras(&spec).unwrap(), generate_cameras(&spec).unwrap());
        assert_ne!(generate_cameras(&spec).unwrap(), generate_cameras(&CaseSpec { seed: 12, ..spec }).unwrap());
        assert_eq!(random_rank2_set(4, 5).unwrap(), random_rank2_set(4, 5).unwrap());
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(generate_cameras(&CaseSpec::new(CaseLabel::Case1, 5, 0)).is_err());
        assert!(generate_cameras(&CaseSpec::new(CaseLabel::CollinearN, 2, 0)).is_err());
    }

    #[test]
    fn duplicated_camera_is_rejected() {
        let c = Camera::canonical();
        assert_eq!(set_from_cameras(&[c, c]), Err(Error::CentersCoincide(1, 2)));
    }

    #[test]
    fn perturbation_behaviour() {
        let cams = generate_cameras(&CaseSpec::quad(CaseLabel::Case1, 0)).unwrap();
        let set = set_from_cameras(&cams).unwrap();
        let same = perturb_set(&set, (1, 2), 0.0, 0).unwrap();
        for (i, j) in set.pairs() {
            assert!((same.get(i, j) - set.get(i, j)).norm() < 1e-14);
        }
        let moved = perturb_set(&set, (2, 1), 1e-3, 0).unwrap();
        assert!((moved.get(1, 2) - set.get(1, 2)).norm() > 1e-5);
        assert_eq!(moved.get(3, 4), set.get(3, 4));

        // cancel F and add a rank-one matrix: nothing of rank two survives
        let rank1 = Vector3::new(1.0, 2.0, 3.0) * Vector3::new(0.5, -1.0, 2.0).transpose();
        let delta = -set.get(1, 2) + rank1 * 10.0;
        assert_eq!(perturb_with(&set, (1, 2), &delta), Err(Error::NotRankTwo(1, 2)));
    }

    #[test]
    fn epipole_preserving_perturbation() {
        let cams = generate_cameras(&CaseSpec::quad(CaseLabel::Case2, 1)).unwrap();
        let set = set_from_cameras(&cams).unwrap();
        let moved = perturb_within_epipoles(&set, (1, 3), 1e-3, 4, true).unwrap();
        assert!((moved.get(1, 3) - set.get(1, 3)).norm() > 1e-4);
        assert!(sin_angle(moved.epipole(1, 3).coords(), set.epipole(1, 3).coords()) < 1e-10);
        assert!(sin_angle(moved.epipole(3, 1).coords(), set.epipole(3, 1).coords()) < 1e-10);
        for k in [2, 4] {
            let v = set.epipole(k, 1).coords().dot(&(moved.get(1, 3) * set.epipole(k, 3).coords()));
            assert!(v.abs() < 1e-12);
        }
    }
}
