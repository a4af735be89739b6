//! Property-based checks of the projective primitives and the set-level
//! invariants.

use epicompat::projective::{back_projected_line, normalize, proj_equal, sin_angle, skew, transform_camera};
use epicompat::synth::random_actions;
use epicompat::{
    apply_action, classify_quadruple, generate_cameras, psi, reconstruct_multiview, set_from_cameras,
    two_view_cameras, verify_solution, Camera, CaseLabel, CaseSpec, Point2, Tolerances,
};
use nalgebra::{Matrix3, Matrix3x4, Matrix4, Vector3, Vector4};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn coord() -> impl Strategy<Value = f64> {
    -1.0..1.0f64
}

fn vec3() -> impl Strategy<Value = Vector3<f64>> {
    proptest::array::uniform3(coord()).prop_map(Vector3::from)
}

fn nonzero_vec3() -> impl Strategy<Value = Vector3<f64>> {
    vec3().prop_filter("away from zero", |v| v.norm() > 0.1)
}

fn scale() -> impl Strategy<Value = f64> {
    prop_oneof![-1e3..-1e-3f64, 1e-3..1e3f64]
}

/// Well-conditioned camera `R [I | -c]` with a random rotation and center.
fn camera() -> impl Strategy<Value = Camera> {
    (vec3(), nonzero_vec3(), -3.0..3.0f64).prop_map(|(c, axis, angle)| {
        let r = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle);
        let mut m = Matrix3x4::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(r.matrix());
        m.set_column(3, &(-(r.matrix() * c)));
        Camera::new(m).expect("rotation has full rank")
    })
}

fn camera_pair() -> impl Strategy<Value = (Camera, Camera)> {
    (camera(), camera()).prop_filter("distinct centers", |(a, b)| sin_angle(a.center().coords(), b.center().coords()) > 0.05)
}

fn world_transform() -> impl Strategy<Value = Matrix4<f64>> {
    proptest::array::uniform16(coord())
        .prop_map(|a| Matrix4::identity() + 0.3 * Matrix4::from_row_slice(&a))
        .prop_filter("well conditioned", |h| {
            let s = h.singular_values();
            s.min() / s.max() > 0.05
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn skew_is_the_cross_product(t in vec3(), u in vec3()) {
        prop_assert!((skew(&t) * u - t.cross(&u)).norm() <= 1e-15);
        prop_assert!((skew(&t) + skew(&t).transpose()).norm() == 0.0);
    }

    #[test]
    fn normalization_ignores_scale(a in proptest::array::uniform9(coord()), s in scale()) {
        let m = Matrix3::from_row_slice(&a);
        prop_assume!(m.norm() > 1e-3);
        let (p, q) = (normalize(&m).unwrap(), normalize(&(m * s)).unwrap());
        prop_assert!((p - q).norm() <= 1e-12);
        let (equal, lambda) = proj_equal(&(m * s), &m, 1e-12).unwrap();
        prop_assert!(equal);
        prop_assert!((lambda - s).abs() <= 1e-9 * s.abs());
        prop_assert!((p.norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn back_projected_points_reproject(c in camera(), x in nonzero_vec3(), mu in proptest::array::uniform2(coord())) {
        let x = Point2::new(x).unwrap();
        let line = back_projected_line(&c, &x);
        let z = line.point_at(mu[0], mu[1]);
        let image = c.project(&z);
        prop_assume!(image.norm() > 1e-6);
        prop_assert!(sin_angle(&image, x.coords()) <= 1e-9);
        prop_assert!(line.distance(c.center().coords()) <= 1e-12);
    }

    #[test]
    fn psi_transposes_when_views_swap((a, b) in camera_pair()) {
        let f = psi(&a, &b).unwrap();
        let g = psi(&b, &a).unwrap();
        prop_assert!(proj_equal(&f.matrix().transpose(), g.matrix(), 1e-9).unwrap().0);
    }

    #[test]
    fn psi_ignores_world_transforms((a, b) in camera_pair(), h in world_transform()) {
        let f = psi(&a, &b).unwrap();
        let g = psi(&transform_camera(&a, &h).unwrap(), &transform_camera(&b, &h).unwrap()).unwrap();
        prop_assert!(sin_angle(f.matrix(), g.matrix()) <= 1e-8);
    }

    #[test]
    fn psi_cameras_certify((a, b) in camera_pair()) {
        let f = psi(&a, &b).unwrap();
        let (r, x) = (a.matrix().transpose() * f.matrix() * b.matrix(), a.matrix().norm() * b.matrix().norm());
        prop_assert!((r + r.transpose()).norm() <= 1e-12 * x);
    }

    #[test]
    fn two_view_family_realizes_f((a, b) in camera_pair(), v in vec3(), lambda in scale()) {
        let f = psi(&a, &b).unwrap();
        let (p1, p2) = two_view_cameras(&f, &v, lambda).unwrap();
        prop_assert!(sin_angle(psi(&p1, &p2).unwrap().matrix(), f.matrix()) <= 1e-7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn classification_survives_the_action(seed in any::<u64>(), case in 0usize..4) {
        let tol = Tolerances::default();
        let label = [CaseLabel::Case1, CaseLabel::Case2, CaseLabel::Case3, CaseLabel::Case4][case];
        let set = set_from_cameras(&generate_cameras(&CaseSpec::new(label, 4, seed)).unwrap()).unwrap();
        let before = classify_quadruple(&set, &tol).case;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let moved = apply_action(&set, &random_actions(4, &mut rng), &tol).unwrap();
        prop_assert_eq!(classify_quadruple(&moved, &tol).case, before);
    }

    #[test]
    fn reconstructions_keep_certifying_under_gauge(seed in any::<u64>(), case in 0usize..4, h in world_transform()) {
        let tol = Tolerances::default();
        let label = [CaseLabel::Case1, CaseLabel::Case2, CaseLabel::Case3, CaseLabel::Case4][case];
        let set = set_from_cameras(&generate_cameras(&CaseSpec::new(label, 4, seed)).unwrap()).unwrap();
        let sol = reconstruct_multiview(&set, &tol).unwrap();
        let moved: Vec<Camera> = sol.cameras.iter().map(|c| transform_camera(c, &h).unwrap()).collect();
        let cert = verify_solution(&moved, &set, &tol).unwrap();
        prop_assert!(cert.passed);
        for (pair, r) in &cert.residuals {
            prop_assert!((r - sol.certificate.residuals[pair]).abs() <= 1e-9);
        }
    }

    #[test]
    fn generator_cameras_certify_their_set(seed in any::<u64>(), n in 2usize..7) {
        let tol = Tolerances::default();
        let cams = generate_cameras(&CaseSpec::new(CaseLabel::GenericN, n, seed)).unwrap();
        let set = set_from_cameras(&cams).unwrap();
        prop_assert!(verify_solution(&cams, &set, &tol).unwrap().passed);
    }
}

#[test]
fn homogeneous_points_keep_their_sign_convention() {
    let p = Point2::new(Vector3::new(-3.0, 1.0, 2.0)).unwrap();
    assert!((p.coords().norm() - 1.0).abs() <= 1e-12);
    assert!(p.coords()[0] > 0.0);
    let z = Vector4::new(0.0, -2.0, 2.0, 1.0);
    let q = epicompat::Point3::new(z).unwrap();
    assert!(q.coords()[1] > 0.0);
}
