//! Camera-center geometry read off the epipole configuration.

use std::fmt;

use crate::fundamental::FundamentalSet;
use crate::projective::{collinearity_defect, sin_angle, Point2};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TripleLabel {
    NonCollinear,
    Collinear,
    Ambiguous,
}

/// Triple classification with the per-image epipole separations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleClass {
    pub label: TripleLabel,
    /// `coincidence[i]` is the sine of the angle between the two epipoles in
    /// image `i + 1`.
    pub coincidence: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadCase {
    Case1,
    Case2,
    /// Three collinear centers, listed in increasing order.
    Case3([usize; 3]),
    Case4,
    Ambiguous,
}

impl QuadCase {
    pub fn name(&self) -> &'static str {
        match self {
            QuadCase::Case1 => "Case1",
            QuadCase::Case2 => "Case2",
            QuadCase::Case3(_) => "Case3",
            QuadCase::Case4 => "Case4",
            QuadCase::Ambiguous => "Ambiguous",
        }
    }
}

impl fmt::Display for QuadCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadCase::Case3([a, b, c]) => write!(f, "Case3({a},{b},{c})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Quadruple classification with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadClass {
    pub case: QuadCase,
    /// Collinearity defect of the three epipoles in each image.
    pub defects: [f64; 4],
    /// `coincidence[i][m]` separates the pair of epipoles of image `i + 1`
    /// that omits the `m`-th of the other views (in increasing order).
    pub coincidence: [[f64; 3]; 4],
}

fn images_of(set: &FundamentalSet, image: usize, others: &[usize]) -> Vec<Point2> {
    others.iter().map(|&o| set.epipole(o, image)).collect()
}

pub fn classify_triple(set: &FundamentalSet, tol: &Tolerances) -> TripleClass {
    assert_eq!(set.n(), 3, "classify_triple needs three views");
    let mut coincidence = [0.0; 3];
    for i in 1..=3 {
        let others: Vec<usize> = (1..=3).filter(|&k| k != i).collect();
        let e = images_of(set, i, &others);
        coincidence[i - 1] = sin_angle(e[0].coords(), e[1].coords());
    }
    let label = if coincidence.iter().all(|&d| d > tol.classify) {
        TripleLabel::NonCollinear
    } else if coincidence.iter().all(|&d| d <= tol.classify) {
        TripleLabel::Collinear
    } else {
        TripleLabel::Ambiguous
    };
    TripleClass { label, coincidence }
}

pub fn classify_quadruple(set: &FundamentalSet, tol: &Tolerances) -> QuadClass {
    assert_eq!(set.n(), 4, "classify_quadruple needs four views");
    let t = tol.classify;
    let mut defects = [0.0; 4];
    let mut coincidence = [[0.0; 3]; 4];
    let mut others_of = [[0usize; 3]; 4];
    for i in 1..=4 {
        let others: Vec<usize> = (1..=4).filter(|&k| k != i).collect();
        others_of[i - 1] = [others[0], others[1], others[2]];
        let e = images_of(set, i, &others);
        defects[i - 1] = collinearity_defect(&e);
        for m in 0..3 {
            let (a, b) = match m {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            coincidence[i - 1][m] = sin_angle(e[a].coords(), e[b].coords());
        }
    }
    let distinct = |i: usize| coincidence[i].iter().all(|&d| d > t);
    let all_distinct = (0..4).all(distinct);
    let case = if all_distinct && defects.iter().all(|&d| d > t) {
        QuadCase::Case1
    } else if all_distinct && defects.iter().all(|&d| d <= t) {
        QuadCase::Case2
    } else if coincidence.iter().flatten().all(|&d| d <= t) {
        QuadCase::Case4
    } else {
        find_case3(&coincidence, &defects, &others_of, t).unwrap_or(QuadCase::Ambiguous)
    };
    QuadClass { case, defects, coincidence }
}

fn find_case3(coincidence: &[[f64; 3]; 4], defects: &[f64; 4], others_of: &[[usize; 3]; 4], t: f64) -> Option<QuadCase> {
    for d in 1..=4usize {
        let triple: Vec<usize> = (1..=4).filter(|&k| k != d).collect();
        // in image a of the triple, the pair omitting d must coincide and the
        // two pairs containing d must not
        let collinear_images = triple.iter().all(|&a| {
            let row = &coincidence[a - 1];
            let m_d = others_of[a - 1].iter().position(|&o| o == d).expect("d is another view");
            (0..3).all(|m| if m == m_d { row[m] <= t } else { row[m] > t })
        });
        let last = coincidence[d - 1].iter().all(|&x| x > t) && defects[d - 1] <= t;
        if collinear_images && last {
            return Some(QuadCase::Case3([triple[0], triple[1], triple[2]]));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projective::Camera;
    use crate::synth::set_from_cameras;
    use nalgebra::{Matrix3x4, Vector3};

    fn translated(ts: &[[f64; 3]]) -> FundamentalSet {
        let cams: Vec<Camera> = ts
            .iter()
            .map(|t| {
                let mut m = Matrix3x4::identity();
                m.set_column(3, &Vector3::from(*t));
                Camera::new(m).unwrap()
            })
            .collect();
        set_from_cameras(&cams).unwrap()
    }

    #[test]
    fn triple_examples() {
        let tol = Tolerances::default();
        let set = translated(&[[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        assert_eq!(classify_triple(&set, &tol).label, TripleLabel::NonCollinear);
        let set = translated(&[[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]);
        assert_eq!(classify_triple(&set, &tol).label, TripleLabel::Collinear);
    }

    #[test]
    fn ambiguous_triple_from_mixed_sets() {
        let tol = Tolerances::default();
        let a = translated(&[[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        let b = translated(&[[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]);
        // F^12 and F^13 from the collinear set make image 1 coincident while
        // F^23 from the non-collinear set keeps images 2 and 3 distinct
        let mixed = FundamentalSet::from_entries(3, vec![b.entry(1, 2), b.entry(1, 3), a.entry(2, 3)]);
        let class = classify_triple(&mixed, &tol);
        assert!(class.coincidence[0] <= tol.classify);
        assert_eq!(class.label, TripleLabel::Ambiguous);
    }

    #[test]
    fn quadruple_examples() {
        let tol = Tolerances::default();
        let e = |x: f64, y: f64, z: f64| [x, y, z];
        let cases = [
            (vec![e(0., 0., 0.), e(1., 0., 0.), e(0., 1., 0.), e(0., 0., 1.)], QuadCase::Case1),
            (vec![e(0., 0., 0.), e(1., 0., 0.), e(0., 1., 0.), e(1., 1., 0.)], QuadCase::Case2),
            (vec![e(0., 0., 0.), e(1., 0., 0.), e(2., 0., 0.), e(0., 1., 0.)], QuadCase::Case3([1, 2, 3])),
            (vec![e(0., 0., 0.), e(1., 0., 0.), e(2., 0., 0.), e(3., 0., 0.)], QuadCase::Case4),
            (vec![e(0., 1., 0.), e(0., 0., 0.), e(1., 0., 0.), e(2., 0., 0.)], QuadCase::Case3([2, 3, 4])),
        ];
        for (ts, expected) in cases {
            assert_eq!(classify_quadruple(&translated(&ts), &tol).case, expected, "{ts:?}");
        }
    }
}
