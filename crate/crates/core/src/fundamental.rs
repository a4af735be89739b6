//! Fundamental matrices, fundamental sets and epipolar numbers.

use std::collections::BTreeMap;

use nalgebra::{Matrix3, Matrix3x2, Matrix3x4, Matrix4, Vector3};
use rand::Rng;

use crate::error::{Error, Result};
use crate::projective::{normalize, right_nullvector, skew, Camera, Point2};
use crate::tolerances::Tolerances;

/// Rank-2 fundamental matrix with both epipoles.
///
/// `left` spans the left kernel (`F^T left = 0`) and `right` the right kernel.
/// For `F = F^12`, `left = e_1^2` and `right = e_2^1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalMatrix {
    matrix: Matrix3<f64>,
    left: Point2,
    right: Point2,
}

impl FundamentalMatrix {
    pub fn new(m: Matrix3<f64>, tol_rank: f64) -> Result<Self> {
        let matrix = normalize(&m)?;
        let right = right_nullvector(&matrix, 2, tol_rank)?;
        let left = right_nullvector(&matrix.transpose(), 2, tol_rank)?;
        Ok(Self { matrix, left, right })
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }

    pub fn left_epipole(&self) -> Point2 {
        self.left
    }

    pub fn right_epipole(&self) -> Point2 {
        self.right
    }

    fn transposed(&self) -> Self {
        Self {
            matrix: self.matrix.transpose(),
            left: self.right,
            right: self.left,
        }
    }
}

/// Coefficient matrix of the bilinear form
/// `det [[P1, x, 0], [P2, 0, y]] = x^T F y`, without normalization.
///
/// `F[a][b]` is `(-1)^(a+b)` times the 4x4 minor built from the rows of `P1`
/// other than `a` followed by the rows of `P2` other than `b`.
pub fn psi_raw(p1: &Matrix3x4<f64>, p2: &Matrix3x4<f64>) -> Matrix3<f64> {
    let others = |k: usize| -> [usize; 2] {
        match k {
            0 => [1, 2],
            1 => [0, 2],
            _ => [0, 1],
        }
    };
    Matrix3::from_fn(|a, b| {
        let [r0, r1] = others(a);
        let [s0, s1] = others(b);
        let m = Matrix4::from_rows(&[p1.row(r0), p1.row(r1), p2.row(s0), p2.row(s1)]);
        let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
        sign * m.determinant()
    })
}

/// Fundamental matrix of a camera pair.
pub fn psi(p1: &Camera, p2: &Camera) -> Result<FundamentalMatrix> {
    let raw = psi_raw(p1.matrix(), p2.matrix());
    let scale = p1.matrix().norm_squared() * p2.matrix().norm_squared();
    if raw.amax() <= 1e-12 * scale {
        return Err(Error::CentersCoincide(1, 2));
    }
    FundamentalMatrix::new(raw, Tolerances::default().rank).map_err(|_| Error::CentersCoincide(1, 2))
}

/// Complete set `{F^ij}` over `n` views, stored for `i < j` only.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalSet {
    n: usize,
    entries: Vec<FundamentalMatrix>,
}

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(1 <= i && i < j && j <= n);
    (i - 1) * n - (i - 1) * i / 2 + (j - i - 1)
}

impl FundamentalSet {
    /// Builds a set from already validated entries listed in lexicographic
    /// `(i, j)` order.
    pub(crate) fn from_entries(n: usize, entries: Vec<FundamentalMatrix>) -> Self {
        assert_eq!(entries.len(), n * (n - 1) / 2);
        Self { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored entry for `i < j`.
    pub fn entry(&self, i: usize, j: usize) -> FundamentalMatrix {
        if i < j {
            self.entries[pair_index(self.n, i, j)]
        } else {
            self.entries[pair_index(self.n, j, i)].transposed()
        }
    }

    /// `F^ij`; for `i > j` this is exactly the transpose of the stored `F^ji`.
    pub fn get(&self, i: usize, j: usize) -> Matrix3<f64> {
        assert!(i != j, "F^ii is undefined");
        *self.entry(i, j).matrix()
    }

    /// `e_j^i`, the right kernel of `F^ij`.
    pub fn epipole(&self, i: usize, j: usize) -> Point2 {
        assert!(i != j, "epipole needs two distinct views");
        self.entry(i, j).right_epipole()
    }

    /// All pairs `(i, j)` with `i < j`, in storage order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        (1..=n).flat_map(move |i| (i + 1..=n).map(move |j| (i, j)))
    }

    /// Restriction to `views` (1-based), relabeled `1..=views.len()` in the
    /// given order. Entries and epipoles are carried over without recomputation.
    pub fn subset(&self, views: &[usize]) -> FundamentalSet {
        let m = views.len();
        let mut entries = Vec::with_capacity(m * (m - 1) / 2);
        for a in 0..m {
            for b in a + 1..m {
                entries.push(self.entry(views[a], views[b]));
            }
        }
        FundamentalSet { n: m, entries }
    }

    /// Replaces one entry (i < j).
    pub(crate) fn with_entry(&self, i: usize, j: usize, f: FundamentalMatrix) -> FundamentalSet {
        let mut out = self.clone();
        out.entries[pair_index(self.n, i, j)] = f;
        out
    }
}

/// Validates and normalizes raw matrices keyed by `(i, j)`, `i < j`.
pub fn make_set(n: usize, raw: &BTreeMap<(usize, usize), Matrix3<f64>>, tol: &Tolerances) -> Result<FundamentalSet> {
    if n < 2 {
        return Err(Error::InvalidArgument("a fundamental set needs at least two views".into()));
    }
    if let Some(&(i, j)) = raw.keys().find(|&&(i, j)| !(1 <= i && i < j && j <= n)) {
        return Err(Error::InvalidArgument(format!("pair ({i}, {j}) is not a valid i < j pair")));
    }
    let mut entries = Vec::with_capacity(n * (n - 1) / 2);
    for i in 1..=n {
        for j in i + 1..=n {
            let m = raw.get(&(i, j)).ok_or(Error::MissingPair(i, j))?;
            let f = FundamentalMatrix::new(*m, tol.rank).map_err(|_| Error::NotRankTwo(i, j))?;
            entries.push(f);
        }
    }
    Ok(FundamentalSet { n, entries })
}

/// How the auxiliary points `e_i^5` were chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AuxStrategy {
    /// Uniform on the sphere, rejected until independent of the epipoles.
    #[default]
    Random,
    /// `e_1^5 = F^12 e_2^4`, `e_2^5 = F^23 e_3^4`, `e_3^5 = F^31 e_1^4`, `e_4^5` random.
    EpipolarLines,
    /// Images of a world point under reconstructed cameras.
    Projected,
}

/// One auxiliary point per image (four-view sets).
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryPoints5 {
    pub points: Vec<Point2>,
    pub strategy: AuxStrategy,
}

/// Left or right index of an epipolar number: a view, or the auxiliary point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    View(usize),
    Aux,
}

/// Affine representatives of every epipole (and optionally the auxiliary
/// points) used to evaluate epipolar numbers.
///
/// The canonical table holds the stored unit epipoles; other tables arise by
/// rescaling individual representatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Representatives {
    n: usize,
    epi: Vec<Vector3<f64>>,
    aux: Option<Vec<Vector3<f64>>>,
}

impl Representatives {
    pub fn canonical(set: &FundamentalSet) -> Self {
        let n = set.n();
        let mut epi = vec![Vector3::zeros(); n * n];
        for image in 1..=n {
            for other in 1..=n {
                if image != other {
                    epi[(image - 1) * n + other - 1] = set.epipole(other, image).vector();
                }
            }
        }
        Self { n, epi, aux: None }
    }

    pub fn with_aux(mut self, aux: &AuxiliaryPoints5) -> Self {
        self.aux = Some(aux.points.iter().map(|p| p.vector()).collect());
        self
    }

    /// `e_image^other`.
    pub fn epipole(&self, image: usize, other: usize) -> Vector3<f64> {
        self.epi[(image - 1) * self.n + other - 1]
    }

    pub fn set_epipole(&mut self, image: usize, other: usize, v: Vector3<f64>) {
        self.epi[(image - 1) * self.n + other - 1] = v;
    }

    pub fn aux(&self, image: usize) -> Option<Vector3<f64>> {
        self.aux.as_ref().map(|a| a[image - 1])
    }

    /// Multiplies every representative by an independent factor drawn
    /// uniformly from `[lo, hi]`.
    pub fn rescaled<R: Rng>(&self, rng: &mut R, lo: f64, hi: f64) -> Self {
        let mut out = self.clone();
        for v in out.epi.iter_mut() {
            *v *= rng.random_range(lo..=hi);
        }
        if let Some(aux) = out.aux.as_mut() {
            for v in aux.iter_mut() {
                *v *= rng.random_range(lo..=hi);
            }
        }
        out
    }

    fn source(&self, image: usize, s: Source) -> Result<Vector3<f64>> {
        match s {
            Source::View(v) => Ok(self.epipole(image, v)),
            Source::Aux => self.aux(image).ok_or(Error::MissingAuxiliary),
        }
    }

    /// `e_{sijt} = (e_i^s)^T F^ij e_j^t`.
    pub fn number(&self, set: &FundamentalSet, s: Source, i: usize, j: usize, t: Source) -> Result<f64> {
        Ok(self.source(i, s)?.dot(&(set.get(i, j) * self.source(j, t)?)))
    }

    /// Shorthand for four-view formulas where index 5 names the auxiliary
    /// point.
    pub(crate) fn e(&self, set: &FundamentalSet, s: usize, i: usize, j: usize, t: usize) -> f64 {
        let src = |k: usize| if k == 5 && self.n == 4 { Source::Aux } else { Source::View(k) };
        self.number(set, src(s), i, j, src(t)).expect("auxiliary points supplied")
    }

    /// Four-view rescaling with `e_i^l = e_i^j + e_i^k` for `j < k < l` in
    /// every image; the largest-index epipole keeps its canonical scale.
    pub fn with_sum_scaling(&self) -> Result<Self> {
        if self.n != 4 {
            return Err(Error::InvalidArgument("sum scaling is defined for four views".into()));
        }
        let mut out = self.clone();
        for i in 1..=4usize {
            let others: Vec<usize> = (1..=4).filter(|&k| k != i).collect();
            let (j, k, l) = (others[0], others[1], others[2]);
            let basis = Matrix3x2::from_columns(&[self.epipole(i, j), self.epipole(i, k)]);
            let coef = basis
                .svd(true, true)
                .solve(&self.epipole(i, l), 1e-14)
                .map_err(|e| Error::InvalidArgument(e.into()))?;
            if coef[0].abs() < 1e-12 || coef[1].abs() < 1e-12 {
                return Err(Error::InvalidArgument("epipoles are not three distinct collinear points".into()));
            }
            out.set_epipole(i, j, self.epipole(i, j) * coef[0]);
            out.set_epipole(i, k, self.epipole(i, k) * coef[1]);
        }
        Ok(out)
    }
}

/// `e_j^i`: image of camera `i`'s center in image `j`.
pub fn epipole(set: &FundamentalSet, i: usize, j: usize) -> Point2 {
    set.epipole(i, j)
}

/// Epipolar number evaluated with canonical representatives.
pub fn epipolar_number(
    set: &FundamentalSet,
    s: Source,
    i: usize,
    j: usize,
    t: Source,
    aux: Option<&AuxiliaryPoints5>,
) -> Result<f64> {
    if i == j || s == Source::View(i) || t == Source::View(j) {
        return Err(Error::InvalidArgument("epipolar number needs s != i, i != j, t != j".into()));
    }
    let mut reps = Representatives::canonical(set);
    if let Some(aux) = aux {
        reps = reps.with_aux(aux);
    }
    reps.number(set, s, i, j, t)
}

/// Line `F^ij x` in image `i` for a point `x` of image `j`.
pub fn epipolar_line(set: &FundamentalSet, i: usize, j: usize, x: &Point2) -> Result<Point2> {
    let l = set.get(i, j) * x.coords();
    if l.norm() <= 1e-12 {
        return Err(Error::DegenerateLine);
    }
    Point2::new(l)
}

/// The fundamental action `F^ij -> H_i^T F^ij H_j`.
pub fn apply_action(set: &FundamentalSet, hs: &[Matrix3<f64>], tol: &Tolerances) -> Result<FundamentalSet> {
    if hs.len() != set.n() {
        return Err(Error::InvalidArgument(format!("expected {} transforms, got {}", set.n(), hs.len())));
    }
    for (k, h) in hs.iter().enumerate() {
        let scale = h.norm().powi(3);
        if !(scale > 0.0) || (h.determinant() / scale).abs() <= tol.rank {
            return Err(Error::SingularTransform(k + 1));
        }
    }
    let mut entries = Vec::with_capacity(set.entries.len());
    for (i, j) in set.pairs() {
        let g = hs[i - 1].transpose() * set.get(i, j) * hs[j - 1];
        if g == set.get(i, j) {
            entries.push(set.entry(i, j));
            continue;
        }
        entries.push(FundamentalMatrix::new(g, tol.rank).map_err(|_| Error::NotRankTwo(i, j))?);
    }
    Ok(FundamentalSet::from_entries(set.n(), entries))
}

/// Skew-symmetry certificate of `F ~ psi(P1, P2)`.
///
/// Returns the relative symmetric part `|S + S^T| / |S|` of `S = P1^T F P2`.
pub fn is_skew_certified(f: &Matrix3<f64>, p1: &Camera, p2: &Camera, tol: &Tolerances) -> Result<(bool, f64)> {
    if p1.center().proj_eq(&p2.center(), tol.equal) {
        return Err(Error::CentersCoincide(1, 2));
    }
    let s = p1.matrix().transpose() * f * p2.matrix();
    let norm = s.norm();
    let residual = if norm > 0.0 { (s + s.transpose()).norm() / norm } else { f64::INFINITY };
    Ok((residual <= tol.compat, residual))
}

/// `P1 = [[e]_x F + e v^T | lambda e]`, `P2 = [I | 0]` with `e = e_1^2`.
pub fn two_view_cameras(f: &FundamentalMatrix, v: &Vector3<f64>, lambda: f64) -> Result<(Camera, Camera)> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidArgument("lambda must be nonzero".into()));
    }
    let e = f.left_epipole().vector();
    let a = skew(&e) * f.matrix() + e * v.transpose();
    let mut p1 = Matrix3x4::zeros();
    p1.fixed_view_mut::<3, 3>(0, 0).copy_from(&a);
    p1.set_column(3, &(e * lambda));
    Ok((Camera::new(p1)?, Camera::canonical()))
}
