use super::*;
use crate::linalg::{congruence, leading_identity, outer, rank_with_reference, unit_vector};
use crate::random::{random_invertible, random_psd, rng_from_seed};
use crate::test_support::exact_rank;

fn p() -> TolerancePolicy {
    TolerancePolicy::default()
}

fn diag(values: &[f64]) -> DenseMatrix {
    DenseMatrix::from_diagonal(&Vector::from_row_slice(values))
}

fn psd(m: DenseMatrix) -> PsdMatrix {
    PsdMatrix::new(m, &p()).unwrap()
}

#[test]
fn rank_predicate_examples() {
    let e1 = leading_identity(3, 1);
    let e2 = leading_identity(3, 2);
    let b = diag(&[3.0, 1.0, 0.5]);
    assert!(minus_leq_rank(&DenseMatrix::zeros(3, 3), &b, &p()).unwrap());
    assert!(minus_leq_rank(&e1, &e2, &p()).unwrap());
    assert!(!minus_leq_rank(&e2, &e1, &p()).unwrap());

    let a = diag(&[1.0, 1.0, 0.0]);
    let b = diag(&[2.0, 2.0, 0.0]);
    let exact = exact_rank(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 0]]) as i64
        == exact_rank(&[vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 0]]) as i64
            - exact_rank(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 0]]) as i64;
    assert!(!exact);
    assert_eq!(minus_leq_rank(&a, &b, &p()).unwrap(), exact);

    let wide = DenseMatrix::zeros(2, 3);
    assert!(matches!(
        minus_leq_rank(&wide, &a, &p()),
        Err(Error::ShapeMismatch { .. })
    ));
}

#[test]
fn inner_inverse_feasibility_examples() {
    let a = random_psd(&mut rng_from_seed(3), 4, 2, &p()).into_matrix();
    let v = minus_leq_inner(&a, &a, &p()).unwrap();
    assert!(v.holds);
    let x = v.witness.unwrap();
    assert!((&x - moore_penrose(&a, &p())).amax() < 1e-7);

    let e1 = leading_identity(3, 1);
    let id = DenseMatrix::identity(3, 3);
    let v = minus_leq_inner(&e1, &id, &p()).unwrap();
    assert!(v.holds);
    let x = v.witness.unwrap();
    assert!((&e1 * &x * &e1 - &e1).amax() < 1e-7);
    assert!((&x * &e1 - &x * &id).amax() < 1e-7);
    assert!((&e1 * &x - &id * &x).amax() < 1e-7);

    let v = minus_leq_inner(&id, &e1, &p()).unwrap();
    assert!(!v.holds && v.witness.is_none());
}

#[test]
fn image_and_strict_examples() {
    let e1 = leading_identity(3, 1);
    let e2 = leading_identity(3, 2);
    let a = diag(&[2.0, 0.5, 0.0]);
    assert!(minus_leq_image(&a, &a, &p()).unwrap());
    assert!(minus_leq_image(&e1, &e2, &p()).unwrap());
    assert!(!minus_leq_image(&e2, &e1, &p()).unwrap());

    assert!(!minus_lt(&a, &a, &p()).unwrap());
    assert!(minus_lt(&e1, &e2, &p()).unwrap());
    let nudged = &e2 + crate::linalg::matrix_unit(3, 0, 0) * 1e-15;
    assert!(!minus_lt(&e2, &nudged, &p()).unwrap());
}

#[test]
fn verdict_json_keys() {
    let e1 = leading_identity(2, 1);
    let v = minus_leq_inner(&e1, &DenseMatrix::identity(2, 2), &p()).unwrap();
    let json: serde_json::Value = serde_json::to_value(&v).unwrap();
    let keys: Vec<&str> = json.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["holds", "method", "residual", "witness"]);
    assert_eq!(json["method"], "InnerInverseFeasibility");
    let back: OrderVerdict = serde_json::from_value(json).unwrap();
    assert_eq!(back, v);

    let r = minus_leq_rank_verdict(&e1, &e1, &p()).unwrap();
    assert!(serde_json::to_value(&r).unwrap().get("witness").is_none());
}

#[test]
fn rank_one_domination_examples() {
    let id = PsdMatrix::identity(3, &p());
    assert!(rank_one_dominated(&unit_vector(3, 0), &id, &p()).unwrap());

    let a = psd(diag(&[2.0, 3.0, 0.0]));
    let x = Vector::from_row_slice(&[1.0, 1.5_f64.sqrt(), 0.0]);
    assert!(rank_one_dominated(&x, &a, &p()).unwrap());
    // Independent check through rank subtractivity.
    let rest = a.matrix() - outer(&x);
    assert_eq!(rank_with_reference(&rest, 3.0, &p()), a.rank() - 1);

    assert!(!rank_one_dominated(&unit_vector(3, 2), &a, &p()).unwrap());
    assert_eq!(rank_one_dominated(&Vector::zeros(3), &a, &p()), Err(Error::ZeroVector));
    assert_eq!(
        rank_one_dominated(&x, &PsdMatrix::zeros(3, &p()), &p()),
        Err(Error::ZeroMatrix)
    );
}

#[test]
fn dominated_coordinates() {
    let a = psd(diag(&[4.0]));
    assert_eq!(
        dominated_rank_ones_coords(&Vector::from_row_slice(&[2.0]), &a, &p())
            .unwrap()
            .len(),
        1
    );
    let beta = dominated_rank_ones_coords(&Vector::from_row_slice(&[2.0]), &a, &p()).unwrap();
    assert!((beta[0].abs() - 2.0).abs() < 1e-12);

    let a = psd(diag(&[2.0, 3.0, 0.0]));
    let x = Vector::from_row_slice(&[1.0, 1.5_f64.sqrt(), 0.0]);
    let beta = dominated_rank_ones_coords(&x, &a, &p()).unwrap();
    assert_eq!(beta.len(), 2);
    let total: f64 = beta.iter().zip(a.eigenvalues()).map(|(b, l)| b * b / l).sum();
    assert!((total - 1.0).abs() < 1e-8);
    assert!((beta[0].abs() - 1.5_f64.sqrt()).abs() < 1e-12);
    assert!((beta[1].abs() - 1.0).abs() < 1e-12);

    let y = Vector::from_row_slice(&[0.3, -1.2, 2.0]);
    let a = psd(outer(&y));
    let beta = dominated_rank_ones_coords(&y, &a, &p()).unwrap();
    assert_eq!(beta.len(), 1);
    assert!((beta[0].abs() - y.norm()).abs() < 1e-12);

    assert_eq!(
        dominated_rank_ones_coords(&(y * 2.0), &a, &p()),
        Err(Error::NotDominated)
    );
}

#[test]
fn ellipsoid_sampling() {
    let a = psd(leading_identity(4, 2));
    let desc = ellipsoid_of(&a, &p()).unwrap();
    assert_eq!(desc.dim, 2);
    for x in sample_ellipsoid(&desc, 50, 11) {
        assert!((x.norm() - 1.0).abs() < 1e-12);
        assert!(x[2].abs() < 1e-14 && x[3].abs() < 1e-14);
    }

    let a = psd(diag(&[4.0, 9.0]));
    let desc = ellipsoid_of(&a, &p()).unwrap();
    for x in sample_ellipsoid(&desc, 100, 5) {
        assert!((x[0] * x[0] / 4.0 + x[1] * x[1] / 9.0 - 1.0).abs() < 1e-12);
    }

    let a = psd(diag(&[2.0, 3.0, 0.0]));
    let desc = ellipsoid_of(&a, &p()).unwrap();
    let first = sample_ellipsoid(&desc, 100, 99);
    assert_eq!(first, sample_ellipsoid(&desc, 100, 99));
    for x in &first {
        assert!((x[0] * x[0] / 2.0 + x[1] * x[1] / 3.0 - 1.0).abs() < 1e-8);
        assert!(rank_one_dominated(x, &a, &p()).unwrap());
    }

    let s = random_invertible(&mut rng_from_seed(8), 3);
    let b = psd(congruence(&s, a.matrix(), &p()).unwrap());
    let desc = ellipsoid_of(&b, &p()).unwrap();
    assert_eq!(desc.dim, 2);
    assert!(sample_ellipsoid(&desc, 30, 1)
        .iter()
        .all(|x| rank_one_dominated(x, &b, &p()).unwrap()));

    assert!(matches!(
        ellipsoid_of(&PsdMatrix::zeros(2, &p()), &p()),
        Err(Error::ZeroMatrix)
    ));
}

#[test]
fn minorant_equality() {
    let a = psd(diag(&[2.0, 3.0, 0.0]));
    let eq = equal_by_minorants(&a, &a, 9, &p(), 4).unwrap();
    assert!(eq.sampled && eq.exact);

    let b = psd(diag(&[3.0, 2.0, 0.0]));
    let eq = equal_by_minorants(&a, &b, 9, &p(), 4).unwrap();
    assert!(!eq.sampled && !eq.exact);
    // Brute force: some point of E_A misses E_B.
    let eb = ellipsoid_of(&b, &p()).unwrap();
    let ea = ellipsoid_of(&a, &p()).unwrap();
    assert!(sample_ellipsoid(&ea, 9, 4)
        .iter()
        .any(|x| (x.dot(&(&eb.pinv * x)) - 1.0).abs() > 1e-8));

    let s = random_invertible(&mut rng_from_seed(21), 3);
    let c = psd(congruence(&s, a.matrix(), &p()).unwrap());
    let eq = equal_by_minorants(&a, &c, 9, &p(), 4).unwrap();
    assert!(!eq.sampled && !eq.exact);
}

#[test]
fn idempotents_below_identity() {
    let q = crate::random::random_orthogonal(&mut rng_from_seed(2), 4);
    let basis = q.columns(0, 2).into_owned();
    let proj = &basis * basis.transpose();
    assert!(is_idempotent_below_identity(&proj, &p()).unwrap());
    assert!(!is_idempotent_below_identity(&diag(&[2.0, 0.0]), &p()).unwrap());

    // Oblique idempotent with integer S and S^-1, so P^2 = P exactly.
    let s = DenseMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.0, 1.0, 3.0, 0.0, 0.0, 1.0]);
    let s_inv = DenseMatrix::from_row_slice(3, 3, &[1.0, -2.0, 6.0, 0.0, 1.0, -3.0, 0.0, 0.0, 1.0]);
    assert_eq!(&s * &s_inv, DenseMatrix::identity(3, 3));
    let pk = &s * leading_identity(3, 2) * &s_inv;
    assert_eq!(&pk * &pk, pk);
    assert!(is_idempotent_below_identity(&pk, &p()).unwrap());
}
