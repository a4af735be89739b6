//! Projective primitives: canonical representatives, equality up to scale,
//! the cross-product matrix, nullspaces, lines of P^3 and cameras fitted to
//! point constraints.
//!
//! Every stored projective quantity uses one canonical representative: unit
//! (Frobenius) norm, with the sign chosen so that the entry of largest
//! magnitude is positive. Entries are scanned in row-major order and the
//! first maximal entry wins ties.

use nalgebra::{DMatrix, Matrix3, Matrix3x4, Matrix4, SMatrix, SVector, Vector3, Vector4};

use crate::error::{Error, Result};
use crate::linalg::RightSvd;
use crate::tolerances::Tolerances;

const ZERO_NORM: f64 = 1e-300;

/// A point of P^(D-1) stored as its canonical unit representative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homogeneous<const D: usize>(SVector<f64, D>);

/// Point (or line) of the projective plane.
pub type Point2 = Homogeneous<3>;
/// Point of projective 3-space.
pub type Point3 = Homogeneous<4>;

impl<const D: usize> Homogeneous<D> {
    pub fn new(v: SVector<f64, D>) -> Result<Self> {
        normalize(&v).map(Self)
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != D {
            return Err(Error::InvalidArgument(format!("expected {D} coordinates, got {}", v.len())));
        }
        Self::new(SVector::from_column_slice(v))
    }

    pub fn coords(&self) -> &SVector<f64, D> {
        &self.0
    }

    pub fn vector(&self) -> SVector<f64, D> {
        self.0
    }

    pub fn proj_eq(&self, other: &Self, tol: f64) -> bool {
        sign_distance(&self.0, &other.0) <= tol
    }
}

fn sign_fix<const R: usize, const C: usize>(m: &mut SMatrix<f64, R, C>) {
    let mut best = 0.0;
    let mut sign = 1.0;
    for r in 0..R {
        for c in 0..C {
            let a = m[(r, c)].abs();
            if a > best {
                best = a;
                sign = m[(r, c)].signum();
            }
        }
    }
    if sign < 0.0 {
        *m = -*m;
    }
}

/// Canonical representative: unit Frobenius norm, largest entry positive.
pub fn normalize<const R: usize, const C: usize>(m: &SMatrix<f64, R, C>) -> Result<SMatrix<f64, R, C>> {
    let n = m.norm();
    if !(n > ZERO_NORM) || !n.is_finite() {
        return Err(Error::ZeroInput);
    }
    let mut out = m / n;
    sign_fix(&mut out);
    Ok(out)
}

fn sign_distance<const R: usize, const C: usize>(u: &SMatrix<f64, R, C>, v: &SMatrix<f64, R, C>) -> f64 {
    (u - v).norm().min((u + v).norm())
}

/// Projective equality of two same-shaped quantities.
///
/// Returns whether the unit representatives agree up to sign within `tol`,
/// and the least-squares scale `lambda` minimizing `|u - lambda v|`.
pub fn proj_equal<const R: usize, const C: usize>(
    u: &SMatrix<f64, R, C>,
    v: &SMatrix<f64, R, C>,
    tol: f64,
) -> Result<(bool, f64)> {
    let un = normalize(u)?;
    let vn = normalize(v)?;
    let scale = u.dot(v) / v.norm_squared();
    Ok((sign_distance(&un, &vn) <= tol, scale))
}

/// Sine of the angle between two nonzero quantities, treated as vectors.
pub fn sin_angle<const R: usize, const C: usize>(u: &SMatrix<f64, R, C>, v: &SMatrix<f64, R, C>) -> f64 {
    let (nu, nv) = (u.norm(), v.norm());
    if nu <= ZERO_NORM || nv <= ZERO_NORM {
        return 1.0;
    }
    let a = u / nu;
    let b = v / nv;
    (a - b * a.dot(&b)).norm().min(1.0)
}

/// The cross-product matrix `[t]_x`, with `skew(t) * u == t.cross(u)`.
pub fn skew(t: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -t.z, t.y, t.z, 0.0, -t.x, -t.y, t.x, 0.0)
}

/// Unit right singular vector of the smallest singular value, after checking
/// that the numerical rank equals `expected_rank`.
pub fn right_nullvector<const R: usize, const C: usize>(
    m: &SMatrix<f64, R, C>,
    expected_rank: usize,
    tol_rank: f64,
) -> Result<Homogeneous<C>> {
    if m.norm() <= ZERO_NORM {
        return Err(Error::ZeroInput);
    }
    let svd = RightSvd::new(&DMatrix::from_fn(R, C, |r, c| m[(r, c)]));
    let found = svd.rank(tol_rank);
    if found != expected_rank {
        return Err(Error::RankMismatch {
            expected: expected_rank,
            found,
        });
    }
    let (v, _) = svd.smallest();
    Homogeneous::new(SVector::from_iterator(v.iter().copied()))
}

/// Full-rank 3x4 projective camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    matrix: Matrix3x4<f64>,
    center: Point3,
}

impl Camera {
    /// Normalizes `m` and checks rank 3 at the default rank tolerance.
    pub fn new(m: Matrix3x4<f64>) -> Result<Self> {
        Self::with_rank_tol(m, Tolerances::default().rank)
    }

    pub fn with_rank_tol(m: Matrix3x4<f64>, tol_rank: f64) -> Result<Self> {
        let matrix = normalize(&m)?;
        let center = right_nullvector(&matrix, 3, tol_rank)?;
        Ok(Self { matrix, center })
    }

    /// `[I | 0]`.
    pub fn canonical() -> Self {
        Self::new(Matrix3x4::identity()).expect("[I|0] has full rank")
    }

    pub fn matrix(&self) -> &Matrix3x4<f64> {
        &self.matrix
    }

    pub fn center(&self) -> Point3 {
        self.center
    }

    /// Unnormalized image of a world point.
    pub fn project(&self, x: &Vector4<f64>) -> Vector3<f64> {
        self.matrix * x
    }

    /// Right inverse `C^T (C C^T)^-1`.
    pub fn pseudo_inverse(&self) -> nalgebra::Matrix4x3<f64> {
        let m = self.matrix;
        let g = m * m.transpose();
        let inv = g.try_inverse().expect("full-rank camera has invertible Gram matrix");
        m.transpose() * inv
    }
}

pub fn camera_center(c: &Camera) -> Point3 {
    c.center()
}

/// Projective line of P^3 spanned by two distinct points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line3 {
    pub base: Point3,
    pub direction_point: Point3,
}

impl Line3 {
    pub fn new(base: Point3, direction_point: Point3, tol_equal: f64) -> Result<Self> {
        if base.proj_eq(&direction_point, tol_equal) {
            return Err(Error::InvalidArgument("line needs two distinct points".into()));
        }
        Ok(Self { base, direction_point })
    }

    /// Orthonormal basis of the 2-dimensional subspace of R^4 the line spans.
    pub fn basis(&self) -> [Vector4<f64>; 2] {
        let a = self.base.vector();
        let b = self.direction_point.vector();
        let b = b - a * a.dot(&b);
        [a, b.normalize()]
    }

    /// Two unit vectors orthogonal to the line; `z` lies on the line iff both
    /// incidence products vanish.
    pub fn incidence(&self) -> [Vector4<f64>; 2] {
        let m = DMatrix::from_fn(2, 4, |r, c| if r == 0 { self.base.coords()[c] } else { self.direction_point.coords()[c] });
        let svd = RightSvd::new(&m);
        let v = |k: usize| Vector4::from_iterator(svd.vectors[k].iter().copied());
        [v(2), v(3)]
    }

    /// Sine of the angle between `z` and the plane of the line.
    pub fn distance(&self, z: &Vector4<f64>) -> f64 {
        let z = z.normalize();
        let [a, b] = self.basis();
        (z - a * a.dot(&z) - b * b.dot(&z)).norm()
    }

    pub fn point_at(&self, mu0: f64, mu1: f64) -> Vector4<f64> {
        self.base.vector() * mu0 + self.direction_point.vector() * mu1
    }

    pub fn same_as(&self, other: &Line3, tol: f64) -> bool {
        self.distance(other.base.coords()) <= tol && self.distance(other.direction_point.coords()) <= tol
    }
}

/// Smallest singular value of the stacked unit points; zero iff they lie on
/// one projective line.
pub fn collinearity_defect(points: &[Point2]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let m = DMatrix::from_fn(points.len(), 3, |r, c| points[r].coords()[c]);
    RightSvd::new(&m).values[2]
}

/// The line through the camera center and `C^+ x`.
pub fn back_projected_line(c: &Camera, x: &Point2) -> Line3 {
    let through = c.pseudo_inverse() * x.coords();
    let through = Point3::new(through).expect("C C^+ x = x is nonzero");
    Line3 {
        base: c.center(),
        direction_point: through,
    }
}

/// Least-squares common point of two or three lines.
///
/// The residual is the smallest singular value of the stacked incidence
/// constraints; it vanishes exactly when the lines share a point.
pub fn meet_lines(lines: &[Line3], tol_equal: f64) -> Result<(Point3, f64)> {
    if lines.len() < 2 {
        return Err(Error::InvalidArgument("need at least two lines".into()));
    }
    for (i, a) in lines.iter().enumerate() {
        for b in &lines[i + 1..] {
            if a.same_as(b, tol_equal) {
                return Err(Error::LinesIdentical);
            }
        }
    }
    let rows: Vec<Vector4<f64>> = lines.iter().flat_map(|l| l.incidence()).collect();
    let m = DMatrix::from_fn(rows.len(), 4, |r, c| rows[r][c]);
    let svd = RightSvd::new(&m);
    let (v, residual) = svd.smallest();
    let p = Point3::new(Vector4::from_iterator(v.iter().copied()))?;
    Ok((p, residual))
}

/// Smallest |det| over all `D`-subsets of the unit-normalized points.
pub(crate) fn frame_quality<const D: usize>(points: &[SVector<f64, D>]) -> f64 {
    let unit: Vec<SVector<f64, D>> = points.iter().map(|p| p.normalize()).collect();
    let mut best = f64::INFINITY;
    let k = unit.len();
    let mut idx: Vec<usize> = (0..D).collect();
    if k < D {
        return 0.0;
    }
    loop {
        let m = DMatrix::from_fn(D, D, |r, c| unit[idx[c]][r]);
        best = best.min(m.determinant().abs());
        // next combination
        let mut i = D;
        while i > 0 && idx[i - 1] == k - D + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        idx[i - 1] += 1;
        for j in i..D {
            idx[j] = idx[j - 1] + 1;
        }
    }
    best
}

/// Fits the camera sending one world point to zero and four world points to
/// given image points.
///
/// `C w ~ x` is encoded by the two largest rows of `[x]_x C w = 0`, the zero
/// target by `C w = 0`, and the camera is the one-dimensional nullspace of
/// the stacked 11x12 system.
pub fn camera_from_constraints(constraints: &[(Point3, Option<Point2>)], tol: &Tolerances) -> Result<Camera> {
    if constraints.len() != 5 || constraints.iter().filter(|(_, x)| x.is_none()).count() != 1 {
        return Err(Error::DegenerateFrame);
    }
    let world: Vec<Vector4<f64>> = constraints.iter().map(|(w, _)| w.vector()).collect();
    if frame_quality(&world) <= tol.rank {
        return Err(Error::DegenerateFrame);
    }

    let mut rows: Vec<[f64; 12]> = Vec::with_capacity(11);
    for (w, x) in constraints {
        let w = w.coords();
        match x {
            None => {
                for a in 0..3 {
                    let mut row = [0.0; 12];
                    for b in 0..4 {
                        row[a * 4 + b] = w[b];
                    }
                    rows.push(row);
                }
            }
            Some(x) => {
                let s = skew(x.coords());
                let mut order = [0usize, 1, 2];
                order.sort_by(|&i, &j| s.row(j).norm().total_cmp(&s.row(i).norm()));
                for &r in &order[..2] {
                    let mut row = [0.0; 12];
                    for a in 0..3 {
                        for b in 0..4 {
                            row[a * 4 + b] = s[(r, a)] * w[b];
                        }
                    }
                    rows.push(row);
                }
            }
        }
    }
    let m = DMatrix::from_fn(rows.len(), 12, |r, c| rows[r][c]);
    let svd = RightSvd::new(&m);
    let nullity = 12 - svd.rank(tol.rank);
    if nullity != 1 {
        return Err(Error::NoUniqueSolution { nullity });
    }
    let (v, _) = svd.smallest();
    let cam = Matrix3x4::from_row_slice(v.as_slice());
    let targets: Vec<Vector3<f64>> = constraints.iter().filter_map(|(_, x)| x.map(|x| x.vector())).collect();
    if frame_quality(&targets) <= tol.rank {
        return Err(Error::DegenerateFrame);
    }
    Camera::with_rank_tol(cam, tol.rank).map_err(|_| Error::DegenerateFrame)
}

/// Applies a 4x4 world transform on the right of a camera.
pub fn transform_camera(c: &Camera, h: &Matrix4<f64>) -> Result<Camera> {
    Camera::new(c.matrix() * h)
}
