use okl_core::decompositions::{adjoint_coefficients, check_n_minus, iwasawa_kan, iwasawa_nak, DecompError, Variant};
use okl_core::lie_structure::{build_structure, GroupSpec, StructureData};
use okl_core::linalg::{expm, frob, inv, Mat};
use proptest::prelude::*;

fn sl(n: usize) -> StructureData {
    build_structure(&GroupSpec::sl(n)).unwrap()
}

/// Matrix from 9 (or 4) entries, flipped and rescaled into SL(n); `None` if nearly singular.
fn to_sl(n: usize, e: &[f64]) -> Option<Mat> {
    let mut g = Mat::from_fn(n, n, |i, j| e[i * n + j]);
    let d = g.determinant();
    if d.abs() < 1e-2 {
        return None;
    }
    if d < 0.0 {
        g.row_mut(0).neg_mut();
    }
    Some(g / d.abs().powf(1.0 / n as f64))
}

/// Householder QR with the signs moved so that `R` has a positive diagonal.
fn qr_oracle(g: &Mat) -> (Mat, Mat) {
    let qr = g.clone().qr();
    let (mut q, mut r) = (qr.q(), qr.r());
    for i in 0..g.nrows() {
        if r[(i, i)] < 0.0 {
            q.column_mut(i).neg_mut();
            r.row_mut(i).neg_mut();
        }
    }
    (q, r)
}

fn is_diag_positive(a: &Mat) -> bool {
    (0..a.nrows()).all(|i| a[(i, i)] > 0.0 && (0..a.ncols()).all(|j| i == j || a[(i, j)] == 0.0))
}

#[test]
fn kan_agrees_with_householder_qr() {
    let s = sl(3);
    let g = to_sl(3, &[1.0, 2.0, -0.5, 0.3, -1.2, 2.2, 0.7, 0.1, 1.4]).unwrap();
    let f = iwasawa_kan(&g, &s).unwrap();
    let (q, r) = qr_oracle(&g);
    assert!(frob(&(&f.k - q)) < 1e-13);
    assert!(frob(&(&f.a * &f.n - r)) < 1e-13);
}

#[test]
fn errors() {
    let s = sl(3);
    let g = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -1.0, 1.0]));
    assert!(iwasawa_kan(&g, &s).is_ok());
    let neg = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 1.0, 1.0]));
    assert!(matches!(iwasawa_nak(&neg, &s), Err(DecompError::NotInGroup(_))));
    let upper = expm(&(&s.n_plus_basis[0] * 0.4));
    assert!(matches!(check_n_minus(&upper, &s), Err(DecompError::NotInNMinus)));
    assert!(check_n_minus(&expm(&(&s.n_minus_basis[2] * -1.3)), &s).is_ok());
}

/// Coefficients re-summed against `n^{-1} X_l n` computed by conjugation.
#[test]
fn coefficients_match_direct_expansion() {
    let s = sl(3);
    for (i, u) in [(0usize, 0.7), (1, -1.1), (2, 0.35)] {
        let y = s.n_plus_basis[i].clone();
        let n = expm(&(&s.n_minus_basis[i] * u));
        let c = adjoint_coefficients(&y, &Mat::identity(3, 3), &n, &s).unwrap();
        let z = inv(&n) * &y * &n;
        let mut recon = Mat::zeros(3, 3);
        for (b, v) in s.n_plus_basis.iter().zip(&c.c_plus) {
            recon += b * *v;
        }
        for (b, v) in s.n_minus_basis.iter().zip(&c.c_minus) {
            recon += b * *v;
        }
        for (b, v) in s.dual_basis.iter().zip(&c.c_h) {
            recon += b * *v;
        }
        assert!(frob(&(recon - z)) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kan_and_nak_reconstruct(e in prop::collection::vec(-3.0f64..3.0, 9)) {
        let s = sl(3);
        let Some(g) = to_sl(3, &e) else { return Ok(()) };
        let scale = frob(&g);
        let kan = iwasawa_kan(&g, &s).unwrap();
        prop_assert_eq!(kan.variant, Variant::Kan);
        prop_assert!(frob(&(kan.product() - &g)) <= 1e-10 * scale);
        prop_assert!(frob(&(kan.k.transpose() * &kan.k - Mat::identity(3, 3))) < 1e-12);
        prop_assert!(is_diag_positive(&kan.a));
        prop_assert!((kan.a.determinant() - 1.0).abs() < 1e-10);
        prop_assert!((0..3).all(|i| kan.n[(i, i)] == 1.0 && (0..i).all(|j| kan.n[(i, j)] == 0.0)));

        let nak = iwasawa_nak(&g, &s).unwrap();
        prop_assert!(frob(&(nak.product() - &g)) <= 1e-10 * scale);
        prop_assert!(is_diag_positive(&nak.a));
        prop_assert!((kan.k.determinant() - 1.0).abs() < 1e-12 && (nak.k.determinant() - 1.0).abs() < 1e-12);
        prop_assert!(check_n_minus(&nak.n, &s).is_ok());
    }

    #[test]
    fn sl2_kan_reconstructs(e in prop::collection::vec(-3.0f64..3.0, 4)) {
        let s = sl(2);
        let Some(g) = to_sl(2, &e) else { return Ok(()) };
        let kan = iwasawa_kan(&g, &s).unwrap();
        let (q, r) = qr_oracle(&g);
        prop_assert!(frob(&(kan.product() - &g)) <= 1e-10 * frob(&g));
        prop_assert!(frob(&(&kan.k - q)) < 1e-12);
        prop_assert!(frob(&(&kan.a * &kan.n - r)) < 1e-12 * frob(&g));
    }

    #[test]
    fn coefficients_reconstruct_and_are_linear(
        e in prop::collection::vec(-2.0f64..2.0, 9),
        y1 in prop::collection::vec(-1.0f64..1.0, 8),
        y2 in prop::collection::vec(-1.0f64..1.0, 8),
        u in prop::collection::vec(-1.5f64..1.5, 3),
        lam in -2.0f64..2.0,
    ) {
        let s = sl(3);
        let Some(g) = to_sl(3, &e) else { return Ok(()) };
        let n = expm(&s.from_n_minus_coords(&u));
        let ya = s.from_coords(&nalgebra::DVector::from_vec(y1));
        let yb = s.from_coords(&nalgebra::DVector::from_vec(y2));
        let ca = adjoint_coefficients(&ya, &g, &n, &s).unwrap();
        let cb = adjoint_coefficients(&yb, &g, &n, &s).unwrap();
        let cs = adjoint_coefficients(&(&ya + &yb * lam), &g, &n, &s).unwrap();
        prop_assert!(ca.residual <= 1e-10);
        let size = 1.0 + ca.c_plus.iter().chain(&cb.c_plus).map(|v| v.abs()).fold(0.0, f64::max);
        for (x, (a, b)) in cs.c_minus.iter().zip(ca.c_minus.iter().zip(&cb.c_minus))
            .chain(cs.c_plus.iter().zip(ca.c_plus.iter().zip(&cb.c_plus)))
            .chain(cs.c_h.iter().zip(ca.c_h.iter().zip(&cb.c_h)))
        {
            prop_assert!((x - (a + lam * b)).abs() < 1e-10 * size);
        }
    }
}
