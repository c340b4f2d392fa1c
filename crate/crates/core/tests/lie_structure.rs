use okl_core::lie_structure::{build_structure, build_weyl, GroupSpec, StructureData, StructureError};
use okl_core::linalg::{bracket, frob, Mat};
use proptest::prelude::*;

fn sl(n: usize) -> StructureData {
    build_structure(&GroupSpec::sl(n)).unwrap()
}

fn traceless_diag(h: &[f64]) -> Mat {
    let mean = h.iter().sum::<f64>() / h.len() as f64;
    Mat::from_diagonal(&nalgebra::DVector::from_iterator(h.len(), h.iter().map(|v| v - mean)))
}

fn algebra_element(n: usize, c: &[f64]) -> Mat {
    let mut x = Mat::from_fn(n, n, |i, j| c[i * n + j]);
    let tr = x.trace() / n as f64;
    for i in 0..n {
        x[(i, i)] -= tr;
    }
    x
}

#[test]
fn sl3_counts() {
    let s = sl(3);
    assert_eq!(s.roots.len(), 6);
    assert!(s.roots.iter().all(|r| r.multiplicity == 1));
    assert_eq!((s.rank, s.k_dim, s.dim), (2, 3, 8));
    assert_eq!(s.simple_roots.len(), 2);
    assert_eq!(s.m_basis.len(), 0);
    assert_eq!(build_weyl(&s).unwrap().len(), 6);
}

#[test]
fn sl2_counts() {
    let s = sl(2);
    assert_eq!((s.roots.len(), s.rank, s.k_dim), (2, 1, 1));
    assert_eq!(build_weyl(&s).unwrap().len(), 2);
}

/// Roots of sl(n) on the diagonal are `h_i - h_j`, independent of any basis choice.
#[test]
fn root_values_match_diagonal_differences() {
    for n in [2, 3, 4] {
        let s = sl(n);
        let h: Vec<f64> = (0..n).map(|i| 0.37 * (i as f64 + 1.0).powi(2) - 0.11 * i as f64).collect();
        let hm = traceless_diag(&h);
        let mut got: Vec<f64> = (0..s.roots.len()).map(|r| s.root_value(r, &hm)).collect();
        let mut want: Vec<f64> = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| h[i] - h[j]).collect();
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&want) {
            approx::assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }
}

/// Killing form of sl(n) is `2n tr(XY)`; the involution is `-X^T`.
#[test]
fn killing_and_involution_closed_forms() {
    let s = sl(3);
    let x = algebra_element(3, &[0.3, -1.0, 0.5, 2.0, 0.1, -0.7, 0.4, 0.9, -0.2]);
    let y = algebra_element(3, &[-0.6, 0.2, 1.5, 0.0, 0.8, 0.3, -1.1, 0.4, 0.6]);
    approx::assert_relative_eq!(s.killing(&x, &y), 6.0 * (&x * &y).trace(), max_relative = 1e-12);
    assert!(frob(&(s.theta(&x) + x.transpose())) < 1e-13);
    approx::assert_relative_eq!(s.inner(&x, &y), -6.0 * (&x * s.theta(&y)).trace(), max_relative = 1e-12);
}

#[test]
fn positive_roots_come_first_and_simple_roots_span() {
    let s = sl(3);
    let npos = s.positive_roots().count();
    assert_eq!(npos, 3);
    for (i, r) in s.roots.iter().enumerate() {
        assert_eq!(r.is_positive, i < npos);
        let c = &r.simple_coeffs;
        assert!(c.iter().all(|v| (v - v.round()).abs() < 1e-10));
        assert!(c.iter().all(|v| *v >= -1e-10) || c.iter().all(|v| *v <= 1e-10));
    }
    for (i, _) in s.positive_roots() {
        let neg = &s.roots[s.negative_of(i)].functional;
        for (a, b) in s.roots[i].functional.iter().zip(neg) {
            approx::assert_abs_diff_eq!(*a, -*b, epsilon = 1e-12);
        }
    }
}

#[test]
fn weyl_c_matrices_are_integral_and_invertible() {
    let s = sl(3);
    let w = build_weyl(&s).unwrap();
    assert_eq!(w.index_of("e"), Some(0));
    for e in &w.elements {
        assert!(e.c_matrix.iter().all(|v| (v - v.round()).abs() < 1e-9), "{}", e.name);
        approx::assert_abs_diff_eq!(e.c_matrix.determinant().abs(), 1.0, epsilon = 1e-9);
        assert!(frob(&(&e.representative * &e.representative_inv - Mat::identity(3, 3))) < 1e-12);
        approx::assert_abs_diff_eq!(e.representative.determinant(), 1.0, epsilon = 1e-12);
    }
}

#[test]
fn rejects_unknown_groups() {
    assert!(matches!(GroupSpec::by_name("so3"), Err(StructureError::UnknownGroup(_))));
    assert!(matches!(GroupSpec::by_name("sl1"), Err(StructureError::UnknownGroup(_))));
    let mut bad = GroupSpec::sl(2);
    bad.algebra_basis[1] = bad.algebra_basis[0].clone();
    assert!(matches!(build_structure(&bad), Err(StructureError::InvalidSpec(_))));
}

#[test]
fn json_round_trip_preserves_coordinates() {
    let s = sl(3);
    let back = StructureData::from_json(&serde_json::to_string(&s).unwrap()).unwrap();
    let x = algebra_element(3, &[0.3, -1.0, 0.5, 2.0, 0.1, -0.7, 0.4, 0.9, -0.2]);
    assert_eq!(s.coords(&x), back.coords(&x));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_relations_hold_on_all_of_a(h in prop::collection::vec(-2.0f64..2.0, 3)) {
        let s = sl(3);
        let hm = traceless_diag(&h);
        for (r, root) in s.roots.iter().enumerate() {
            let v = s.root_value(r, &hm);
            for x in &root.root_vectors {
                prop_assert!(frob(&(bracket(&hm, x) - x * v)) < 1e-12 * (1.0 + frob(&hm)));
            }
        }
    }

    #[test]
    fn ad_adjoint_is_minus_ad_theta(
        a in prop::collection::vec(-1.0f64..1.0, 9),
        b in prop::collection::vec(-1.0f64..1.0, 9),
        c in prop::collection::vec(-1.0f64..1.0, 9),
    ) {
        let s = sl(3);
        let (x, y, z) = (algebra_element(3, &a), algebra_element(3, &b), algebra_element(3, &c));
        let lhs = s.inner(&bracket(&x, &z), &y);
        let rhs = -s.inner(&z, &bracket(&s.theta(&x), &y));
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn theta_form_is_positive(a in prop::collection::vec(-1.0f64..1.0, 9)) {
        let s = sl(3);
        let x = algebra_element(3, &a);
        prop_assume!(frob(&x) > 1e-6);
        prop_assert!(s.inner(&x, &x) > 0.0);
        prop_assert!((s.inner(&x, &x) + s.killing(&x, &s.theta(&x))).abs() < 1e-12 * s.inner(&x, &x));
    }

    #[test]
    fn coordinates_round_trip(a in prop::collection::vec(-3.0f64..3.0, 9)) {
        let s = sl(3);
        let x = algebra_element(3, &a);
        prop_assert!(frob(&(s.from_coords(&s.coords(&x)) - &x)) < 1e-13 * (1.0 + frob(&x)));
    }
}
