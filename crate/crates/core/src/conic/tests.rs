use std::f64::consts::FRAC_PI_4;

use nalgebra::Vector2;

use super::suites;
use super::svg::{render, Scene};
use super::*;
use crate::linalg::{DenseMatrix, PsdMatrix, TolerancePolicy, Vector};
use crate::random::SeedStream;

fn close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol
}

fn conic_close(c: &Conic2, q11: f64, q12: f64, q22: f64, tol: f64) -> bool {
    close(c.q11, q11, tol) && close(c.q12, q12, tol) && close(c.q22, q22, tol)
}

#[test]
fn rotation_and_angle_ellipses() {
    assert_eq!(rotation(0.0), nalgebra::Matrix2::identity());
    let quarter = rotation(std::f64::consts::FRAC_PI_2);
    assert!((quarter - nalgebra::Matrix2::new(0.0, -1.0, 1.0, 0.0)).amax() < 1e-15);

    assert!(conic_close(&ellipse_at_angle(0.7, 1.0).unwrap(), 1.0, 0.0, 1.0, 1e-15));
    assert!(conic_close(&ellipse_at_angle(0.0, 3.0).unwrap(), 1.0, 0.0, 3.0, 0.0));
    let e = ellipse_at_angle(FRAC_PI_4, 9.0).unwrap();
    assert!(conic_close(&e, 5.0, -4.0, 5.0, 1e-12));
    // Axis endpoints: unit along phi, 1/3 across it.
    let (s, c) = FRAC_PI_4.sin_cos();
    assert!(e.residual(&Vector2::new(c, s)) < 1e-12);
    assert!(e.residual(&Vector2::new(-s / 3.0, c / 3.0)) < 1e-12);
    assert_eq!(ellipse_at_angle(0.3, 0.0), Err(Error::NonPositiveR(0.0)));
}

#[test]
fn conic_json_round_trip_and_validation() {
    let c = Conic2::new(5.0, -4.0, 5.0).unwrap();
    let json = serde_json::to_string(&c).unwrap();
    assert_eq!(json, r#"{"q11":5.0,"q12":-4.0,"q22":5.0}"#);
    assert_eq!(serde_json::from_str::<Conic2>(&json).unwrap(), c);
    assert!(serde_json::from_str::<Conic2>(r#"{"q11":1.0,"q12":2.0,"q22":1.0}"#).is_err());
    assert!(matches!(
        Conic2::new(1.0, 0.0, -1.0),
        Err(Error::NotPositiveDefinite { .. })
    ));
    assert_eq!(Conic2::new(f64::NAN, 0.0, 1.0), Err(Error::NonFinite));
}

#[test]
fn intersection_examples() {
    let circle = Conic2::unit_circle();
    assert_eq!(intersect_concentric(&circle, &circle).kind, IntersectionKind::Identical);

    let other = Conic2::new(4.0, 0.0, 0.25).unwrap();
    let cut = intersect_concentric(&circle, &other);
    assert_eq!(cut.kind, IntersectionKind::Crossing);
    assert_eq!(cut.points.len(), 4);
    let (x, y) = (0.2_f64.sqrt(), 0.8_f64.sqrt());
    let reps: Vec<Vector2<f64>> = cut.representatives().collect();
    assert!((reps[0] - Vector2::new(x, y)).amax() < 1e-12);
    assert!((reps[1] - Vector2::new(-x, y)).amax() < 1e-12);
    assert_eq!(cut.points[1], [-cut.points[0][0], -cut.points[0][1]]);

    assert_eq!(
        intersect_concentric(&circle, &Conic2::circle(0.5).unwrap()).kind,
        IntersectionKind::Disjoint
    );

    let q = Conic2::new(4.0, 0.0, 9.0).unwrap();
    let sol = touching_ellipse(&q, FRAC_PI_4).unwrap();
    let touch = intersect_concentric(&circle, &sol.conic);
    assert_eq!(touch.kind, IntersectionKind::Touching);
    assert_eq!(touch.points.len(), 2);
    // Tangency oracle: the circle's normal p is parallel to C p.
    let p = touch.representatives().next().unwrap();
    let g = sol.conic.matrix() * p;
    assert!((p.x * g.y - p.y * g.x).abs() < 1e-9 * g.norm());
}

#[test]
fn inside_and_containment() {
    assert!(lies_inside_unit_circle(&Conic2::new(4.0, 0.0, 9.0).unwrap()));
    assert!(!lies_inside_unit_circle(&Conic2::unit_circle()));
    assert!(!lies_inside_unit_circle(&Conic2::new(0.5, 0.0, 9.0).unwrap()));

    let inner = Conic2::new(4.0, 0.0, 9.0).unwrap();
    assert!(contains(&Conic2::unit_circle(), &inner));
    assert!(!contains(&inner, &Conic2::unit_circle()));

    // Congruent copies of a nested pair stay nested; check on sampled points.
    let s = nalgebra::Matrix2::new(1.3, 0.4, -0.2, 0.9);
    let t = |c: &Conic2| Conic2::from_matrix(&(s.transpose() * c.matrix() * s)).unwrap();
    let (outer, inner) = (t(&Conic2::unit_circle()), t(&inner));
    assert!(contains(&outer, &inner));
    for k in 0..64 {
        let a = std::f64::consts::TAU * k as f64 / 64.0;
        let p = inner.point_along(&Vector2::new(a.cos(), a.sin()));
        assert!(outer.value(&p) < 1.0);
    }
}

#[test]
fn touching_examples() {
    let q = Conic2::new(4.0, 0.0, 9.0).unwrap();
    let sol = touching_ellipse(&q, FRAC_PI_4).unwrap();
    assert!(close(sol.r, 59.0 / 11.0, 1e-12));
    assert!(sol.det_residual(&q) < 1e-12);
    assert!(sol.membership_residual(&q) < 1e-12);
    assert!(sol.gradient_angle(&q) < 1e-9);

    // Independent root of det(Q - C(r)) by bisection.
    let det = |r: f64| (q.matrix() - ellipse_at_angle(FRAC_PI_4, r).unwrap().matrix()).determinant();
    let (mut lo, mut hi) = (1.0, 9.0);
    assert!(det(lo) * det(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if det(lo) * det(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    assert!(close(sol.r, lo, 1e-12));

    let c = 6.0;
    let sol = touching_ellipse(&Conic2::new(c, 0.0, c).unwrap(), 0.4).unwrap();
    assert!(close(sol.r, c, 1e-12));
    assert!(close(Vector2::from(sol.touch_point).norm(), 1.0 / c.sqrt(), 1e-12));

    assert!(matches!(
        touching_ellipse(&Conic2::unit_circle(), 0.3),
        Err(Error::NotInsideUnitCircle { .. })
    ));
    assert!(matches!(touching_ellipse(&q, 0.0), Err(Error::DomainError(_))));
}

#[test]
fn closed_forms() {
    assert!(close(
        touching_r_closed_form(4.0, 9.0, FRAC_PI_4).unwrap(),
        59.0 / 11.0,
        1e-12
    ));
    assert!(close(touching_r_closed_form(3.0, 3.0, 1.1).unwrap(), 3.0, 1e-12));
    assert!(close(touching_r_closed_form(4.0, 9.0, 1e-9).unwrap(), 9.0, 1e-9));
    assert!(matches!(
        touching_r_closed_form(1.0, 9.0, 0.5),
        Err(Error::DomainError(_))
    ));

    let m = touching_conic_matrix(4.0, 9.0, FRAC_PI_4).unwrap();
    assert!(conic_close(&m, 35.0 / 11.0, -24.0 / 11.0, 35.0 / 11.0, 1e-12));
    let via_angle = ellipse_at_angle(FRAC_PI_4, 59.0 / 11.0).unwrap();
    assert!(m.distance(&via_angle) < 1e-12);
    // a = b: the touching parameter is r = a, so the conic is R diag(1, a) R^T.
    let equal = touching_conic_matrix(5.0, 5.0, 0.8).unwrap();
    assert!(equal.distance(&ellipse_at_angle(0.8, 5.0).unwrap()) < 1e-12);
    assert!(matches!(
        touching_conic_matrix(0.5, 9.0, 0.5),
        Err(Error::DomainError(_))
    ));
}

#[test]
fn vertical_geometry() {
    let phi = phi_for_vertical_intersection(0.5, 9.0).unwrap();
    assert!(close(phi, 0.5 * (-0.25_f64).acos(), 1e-15));
    assert!(close(phi, 0.9117383, 1e-7));
    assert!(close(vertical_intersection(9.0, phi), 0.5, 1e-12));
    assert!(close(vertical_intersection(1.0, 0.7), 1.0, 1e-15));
    for angle in [phi, -phi] {
        let e = ellipse_at_angle(angle, 9.0).unwrap();
        assert!(e.residual(&Vector2::new(0.0, 0.5)) < 1e-12);
    }
    // rho0^2 r = 1 puts the arccos argument at 1.
    assert!(matches!(
        phi_for_vertical_intersection(1.0 / 3.0, 9.0),
        Err(Error::InfeasibleConfiguration(_))
    ));
    assert!(matches!(
        phi_for_vertical_intersection(1.2, 9.0),
        Err(Error::InfeasibleConfiguration(_))
    ));
}

#[test]
fn witness_touching_examples() {
    let q = Conic2::new(4.0, 0.0, 9.0).unwrap();
    let w = witness_touching_ellipse(&q, &Conic2::unit_circle(), FRAC_PI_4).unwrap();
    assert!(w.distance(&touching_ellipse(&q, FRAC_PI_4).unwrap().conic) < 1e-12);

    // Circles of radius 1/4 inside radius 1/2: scaling by 2 gives radius 1/2
    // in the unit circle, where r = 4; scaling back multiplies Q by 4.
    let w = witness_touching_ellipse(
        &Conic2::new(16.0, 0.0, 16.0).unwrap(),
        &Conic2::new(4.0, 0.0, 4.0).unwrap(),
        0.6,
    )
    .unwrap();
    let r = touching_r_closed_form(4.0, 4.0, 0.6).unwrap();
    let expect = ellipse_at_angle(0.6, r).unwrap();
    assert!(conic_close(
        &w,
        4.0 * expect.q11,
        4.0 * expect.q12,
        4.0 * expect.q22,
        1e-10
    ));

    assert_eq!(
        witness_touching_ellipse(&Conic2::unit_circle(), &q, 0.5),
        Err(Error::NotNested)
    );
}

#[test]
fn eq_ab_and_circle_images() {
    assert_eq!(touching_params_ab(4.0, 1.0, 1.0).unwrap(), (7.0, 7.0));
    let (a, b) = touching_params_ab(2.5, 1.7, 1e-9).unwrap();
    assert!(close(a, 2.5, 1e-12) && close(b, base_b0(2.5, 1.7), 1e-12));
    let (a, b) = touching_params_ab(3.0, 0.8, 2.3).unwrap();
    assert!(close((a - 1.0) / (b - 1.0), 0.64, 1e-12));
    assert!(matches!(touching_params_ab(3.0, 1.0, 0.0), Err(Error::DomainError(_))));

    assert_eq!(
        image_of_circle(4.0, 1.0, 4.0).unwrap(),
        StandardEllipse { a: 4.0, b: 4.0 }
    );
    let e = image_of_circle(2.0, 1.0, 1.0 / 0.09).unwrap();
    assert!(close(e.a, e.b, 1e-12) && close(e.a, 4.3704, 1e-4));
    let on_axis = phi_hat(2.0, 1.0, [0.3, 0.0]).unwrap();
    assert!(close(on_axis[0], 1.0 / e.a.sqrt(), 1e-12));
    assert!(matches!(image_of_circle(2.0, 1.0, 3.0), Err(Error::DomainError(_))));
}

#[test]
fn phi_hat_examples() {
    for p in [[0.3, -0.4], [-0.2, 0.0], [0.0, 0.9]] {
        let q = phi_hat(4.0, 1.0, p).unwrap();
        assert!((Vector2::from(q) - canonical(Vector2::from(p))).amax() < 1e-15);
    }
    let q = phi_hat(2.0, 1.0, [0.3, 0.0]).unwrap();
    assert!(close(q[0], 0.478345, 1e-6) && q[1] == 0.0);
    assert_eq!(phi_hat(3.0, 0.7, [0.0, 0.0]).unwrap(), [0.0, 0.0]);

    let back = phi_hat_inverse(2.0, 1.0, [0.478345, 0.0]).unwrap();
    assert!(close(back[0], 0.3, 1e-6) && back[1] == 0.0);
    assert_eq!(phi_hat_inverse(4.0, 1.0, [0.1, 0.2]).unwrap(), [0.1, 0.2]);

    // Rays are preserved: q1 / q2 = x / (gamma y).
    let (a0, gamma, p) = (2.5, 1.3, [0.2, 0.35]);
    let q = phi_hat(a0, gamma, p).unwrap();
    assert!(close(q[0] / q[1], p[0] / (gamma * p[1]), 1e-12));
    let back = phi_hat_inverse(a0, gamma, q).unwrap();
    assert!((Vector2::from(back) - Vector2::from(p)).amax() < 1e-12);

    // Inside the unit disk the radicand is always positive; with a0 > 4 it
    // turns negative far out along the x-axis.
    assert!(phi_hat(9.0, 3.0, [0.999, 0.0]).is_ok());
    assert!(phi_hat(3.0, 3.0, [5.0, 0.0]).is_ok());
    assert!(matches!(
        phi_hat(9.0, 3.0, [2.0, 0.0]),
        Err(Error::ImaginaryDenominator { .. })
    ));
    assert!(matches!(
        phi_hat_inverse(2.0, 1.0, [1.3, 0.0]),
        Err(Error::NotInRange { .. })
    ));
}

#[test]
fn quadric_transport_examples() {
    let c = quadric_image_coeffs(4.0, 1.0, 2.0, 0.5, 3.0).unwrap();
    assert!(close(c.a, 2.0, 1e-15) && close(c.b, 0.5, 1e-15) && close(c.c, 3.0, 1e-15));

    let c = quadric_image_coeffs(2.0, 1.0, 9.0, 0.0, 16.0).unwrap();
    assert!(close(c.a, 11.0 / 3.0, 1e-12) && c.b == 0.0 && close(c.c, 6.0, 1e-12));
    for k in 0..64 {
        let t = std::f64::consts::TAU * k as f64 / 64.0;
        let p = [t.cos() / 3.0, t.sin() / 4.0];
        assert!(c.residual(phi_hat(2.0, 1.0, p).unwrap()) < 1e-12);
    }

    // The circle of radius 1/2 maps onto the base ellipse, the unit circle to itself.
    let (a0, gamma) = (2.7, 0.8);
    let c = quadric_image_coeffs(a0, gamma, 1.0, 0.0, 1.0).unwrap();
    assert!(close(c.a, 1.0, 1e-12) && close(c.c, 1.0, 1e-12));
    let c = quadric_image_coeffs(a0, gamma, 4.0, 0.0, 4.0).unwrap();
    assert!(close(c.a, a0, 1e-12) && c.b == 0.0 && close(c.c, base_b0(a0, gamma), 1e-12));
}

#[test]
fn surjectivity_examples() {
    let r = surjectivity_constraints(4.0, 1.0).unwrap();
    assert!(r.upper_bounds_hold && r.lower_bounds_hold && r.rigid);
    let r = surjectivity_constraints(3.0, 1.0).unwrap();
    assert!(r.upper_bounds_hold && !r.lower_bounds_hold && !r.rigid);
    assert!(!surjectivity_constraints(4.0, 2.0).unwrap().rigid);
    assert!(matches!(surjectivity_constraints(1.0, 1.0), Err(Error::DomainError(_))));
}

#[test]
fn four_ellipse_identity_regime() {
    let c = four_ellipse_configuration(0.5, 9.0, 1.0, 4.0).unwrap();
    let phi = phi_for_vertical_intersection(0.5, 9.0).unwrap();
    let preimages = [
        ellipse_at_angle(phi, 9.0).unwrap(),
        ellipse_at_angle(-phi, 9.0).unwrap(),
        ellipse_at_angle(std::f64::consts::FRAC_PI_2 - phi, 9.0).unwrap(),
        ellipse_at_angle(phi - std::f64::consts::FRAC_PI_2, 9.0).unwrap(),
    ];
    for (img, pre) in c.images().iter().zip(&preimages) {
        assert!(img.distance(pre) < 1e-10, "{img:?} vs {pre:?}");
    }
    let circle = image_of_circle(4.0, 1.0, 9.0).unwrap();
    assert!(close(c.touching.a, circle.a, 1e-10) && close(c.touching.b, circle.b, 1e-10));
    assert!(c.incidence_residual < 1e-12 && c.tangency_residual < 1e-10);
    assert!(close(c.vertical_point[1], 0.5, 1e-12) && close(c.horizontal_point[0], 0.5, 1e-12));
    assert_eq!(c.conics().len(), 6);
}

#[test]
fn four_ellipse_general_regime() {
    let (gamma, a0) = (2.0, 4.0);
    let c = four_ellipse_configuration(0.5, 9.0, gamma, a0).unwrap();
    assert!(!surjectivity_constraints(a0, gamma).unwrap().rigid);
    assert!(c.tangency_residual < 1e-7 && c.incidence_residual < 1e-8);
    for e in c.images() {
        assert_eq!(
            intersect_concentric(&e, &c.touching.conic()).kind,
            IntersectionKind::Touching
        );
    }
    // Height of the E1/E2 crossing from the (a, b, t) formula.
    let t = c.phi.tan();
    let (a, b) = (c.touching.a, c.touching.b);
    let g2t2 = gamma * gamma * t * t;
    let height = ((a - 1.0) + (b - 1.0) * g2t2).sqrt() / ((a - 1.0) * b + (b - 1.0) * g2t2).sqrt();
    assert!(close(c.vertical_point[1], height, 1e-12) && c.vertical_point[0].abs() < 1e-12);
    assert!(close(height, 1.0 / base_b0(a0, gamma).sqrt(), 1e-12));
}

fn policy() -> TolerancePolicy {
    TolerancePolicy::default()
}

fn planar(entries: &[f64], n: usize) -> PlanarEllipseND {
    let m = DenseMatrix::from_diagonal(&Vector::from_row_slice(entries));
    assert_eq!(m.nrows(), n);
    PlanarEllipseND::new(PsdMatrix::new(m, &policy()).unwrap(), &policy()).unwrap()
}

#[test]
fn coplanarity_examples() {
    let e = planar(&[1.0, 1.0, 0.0, 0.0], 4);
    let f = planar(&[4.0, 9.0, 0.0, 0.0], 4);
    let g = planar(&[1.0, 0.0, 1.0, 0.0], 4);
    assert!(same_plane(&e, &f));
    let rep = coplanarity_by_incidence(&e, &f).unwrap();
    assert!(rep.coplanar && rep.count_e1 == 4 && rep.count_e2 == 4);
    for x in &rep.points {
        assert!(f.contains(x));
        assert!((x[0] * x[0] * rep.witness.q11 + x[1] * x[1] * rep.witness.q22 - 1.0).abs() < 1e-10);
    }

    assert!(!same_plane(&e, &g));
    let rep = coplanarity_by_incidence(&e, &g).unwrap();
    assert!(!rep.coplanar && rep.count_e2 <= 2);

    let rank_one = PsdMatrix::new(
        DenseMatrix::from_diagonal(&Vector::from_row_slice(&[1.0, 0.0, 0.0])),
        &policy(),
    )
    .unwrap();
    assert_eq!(
        PlanarEllipseND::new(rank_one, &policy()).unwrap_err(),
        Error::RankNotTwo(1)
    );
}

#[test]
fn svg_rendering() {
    let empty = render(&Scene::default());
    assert!(empty.starts_with("<svg") && empty.trim_end().ends_with("</svg>"));
    assert_eq!(empty.matches("<path").count(), 0);

    let q = Conic2::new(4.0, 0.0, 9.0).unwrap();
    let sol = touching_ellipse(&q, FRAC_PI_4).unwrap();
    let scene = Scene {
        conics: vec![Conic2::unit_circle(), sol.conic],
        points: vec![sol.touch_point],
    };
    let out = render(&scene);
    assert_eq!(out.matches("<path").count(), 2);
    assert_eq!(out.matches("<circle").count(), 1);
    assert_eq!(out, render(&scene));

    let config = four_ellipse_configuration(0.5, 9.0, 2.0, 4.0).unwrap();
    let scene = Scene {
        conics: config.conics(),
        points: vec![],
    };
    assert_eq!(render(&scene).matches("<path").count(), 6);
    let parsed: Scene = serde_json::from_str(r#"{"conics":[{"q11":1.0,"q12":0.0,"q22":1.0}]}"#).unwrap();
    assert_eq!(parsed.conics.len(), 1);
}

#[test]
fn random_suites_small() {
    let seeds = SeedStream::new(5);
    let reports = [
        suites::tangency(60, seeds),
        suites::closed_form_agreement(60, seeds),
        suites::rigidity_identity(200, seeds),
        suites::quadric_transport(10, 32, seeds),
        suites::vertical_round_trip(40, seeds),
        suites::configuration_incidence(40, seeds),
        suites::coplanarity_agreement(5, 60, seeds, &policy()),
    ];
    for r in &reports {
        assert!(r.passed(), "{r:?}");
    }
}
