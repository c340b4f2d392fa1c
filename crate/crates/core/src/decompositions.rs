//! Iwasawa factorisations `G = KAN` and `G = N^- A K`, and the coefficient
//! expansion of `Ad((gn)^{-1}) Y` in the root-space basis.

use crate::lie_structure::StructureData;
use crate::linalg::{cond, frob, inv, log_unipotent, mat_serde, Mat};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecompError {
    #[error("SINGULAR_INPUT: pivot norm {0:.3e} below 1e-12")]
    SingularInput(f64),
    #[error("NOT_IN_GROUP: det(g) = {0}")]
    NotInGroup(f64),
    #[error("NOT_IN_N_MINUS: matrix is not in N^-")]
    NotInNMinus,
    #[error("BASIS_ILL_CONDITIONED: Gram condition number {0:.3e}")]
    BasisIllConditioned(f64),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "UPPERCASE")]
pub enum Variant {
    Kan,
    Nak,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IwasawaFactors {
    #[serde(with = "mat_serde")]
    pub k: Mat,
    #[serde(with = "mat_serde")]
    pub a: Mat,
    #[serde(with = "mat_serde")]
    pub n: Mat,
    pub variant: Variant,
}

impl IwasawaFactors {
    pub fn product(&self) -> Mat {
        match self.variant {
            Variant::Kan => &self.k * &self.a * &self.n,
            Variant::Nak => &self.n * &self.a * &self.k,
        }
    }

    /// `log a` as a diagonal matrix.
    pub fn log_a(&self) -> Mat {
        Mat::from_diagonal(&self.a.diagonal().map(f64::ln))
    }
}

fn check_det(g: &Mat) -> Result<(), DecompError> {
    let n = g.nrows();
    let det = g.determinant();
    let scale = frob(g).powi(n as i32).max(1.0);
    if det <= 0.0 || (det - 1.0).abs() > 1e-10 * scale {
        return Err(DecompError::NotInGroup(det));
    }
    Ok(())
}

/// `g = k a n` by Gram–Schmidt on the columns of `g` (with one
/// reorthogonalisation pass), positive normalisers.
pub fn iwasawa_kan(g: &Mat, _s: &StructureData) -> Result<IwasawaFactors, DecompError> {
    check_det(g)?;
    kan_raw(g)
}

fn kan_raw(g: &Mat) -> Result<IwasawaFactors, DecompError> {
    let n = g.nrows();
    let mut q = Mat::zeros(n, n);
    let mut r = Mat::zeros(n, n);
    for j in 0..n {
        let mut v = g.column(j).into_owned();
        for _ in 0..2 {
            for i in 0..j {
                let c = q.column(i).dot(&v);
                r[(i, j)] += c;
                v -= q.column(i) * c;
            }
        }
        let nv = v.norm();
        if nv < 1e-12 {
            return Err(DecompError::SingularInput(nv));
        }
        r[(j, j)] = nv;
        q.set_column(j, &(v / nv));
    }
    let d = r.diagonal();
    let a = Mat::from_diagonal(&d);
    let mut un = Mat::identity(n, n);
    for i in 0..n {
        for j in i + 1..n {
            un[(i, j)] = r[(i, j)] / d[i];
        }
    }
    Ok(IwasawaFactors { k: q, a, n: un, variant: Variant::Kan })
}

/// `g = n a k` with `n` lower unipotent, via the KAN routine applied to `g^T`.
pub fn iwasawa_nak(g: &Mat, _s: &StructureData) -> Result<IwasawaFactors, DecompError> {
    check_det(g)?;
    nak_raw(g)
}

pub(crate) fn nak_raw(g: &Mat) -> Result<IwasawaFactors, DecompError> {
    let f = kan_raw(&g.transpose())?;
    Ok(IwasawaFactors {
        k: f.k.transpose(),
        a: f.a,
        n: f.n.transpose(),
        variant: Variant::Nak,
    })
}

/// Coefficients of `Ad((gn)^{-1}) Y` in the basis `{X_{l,i}, X_{-l,i}, H_i, m}`.
/// `c_plus` and `c_minus` follow the order of `n_plus_basis` / `n_minus_basis`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompCoefficients {
    pub c_plus: Vec<f64>,
    pub c_minus: Vec<f64>,
    pub c_h: Vec<f64>,
    #[serde(with = "mat_serde")]
    pub m_residual: Mat,
    /// `|Z - (expansion + m part)| / max(1, |Z|)` in the theta norm.
    pub residual: f64,
}

/// Checks that `n` lies in `N^-` (its logarithm is in the span of `n_minus_basis`).
pub fn check_n_minus(n: &Mat, s: &StructureData) -> Result<(), DecompError> {
    let dim = n.nrows();
    let nil = n - Mat::identity(dim, dim);
    let mut p = nil.clone();
    for _ in 0..dim {
        p = &p * &nil;
    }
    if frob(&p) > 1e-9 * (1.0 + frob(&nil)).powi(dim as i32 + 1) {
        return Err(DecompError::NotInNMinus);
    }
    let l = log_unipotent(n);
    let back = s.from_n_minus_coords(&s.n_minus_coords(&l));
    if frob(&(back - &l)) > 1e-9 * (1.0 + frob(&l)) {
        return Err(DecompError::NotInNMinus);
    }
    Ok(())
}

pub fn adjoint_coefficients(y: &Mat, g: &Mat, n: &Mat, s: &StructureData) -> Result<DecompCoefficients, DecompError> {
    check_n_minus(n, s)?;
    let gn = g * n;
    let z = inv(&gn) * y * &gn;
    expand_in_root_basis(&z, s)
}

/// Expansion of an algebra element in `{X_{l,i}, X_{-l,i}, H_i, m}`.
pub fn expand_in_root_basis(z: &Mat, s: &StructureData) -> Result<DecompCoefficients, DecompError> {
    let k = s.k_dim;
    let l = s.rank;
    let basis: Vec<&Mat> = s
        .n_plus_basis
        .iter()
        .chain(&s.n_minus_basis)
        .chain(&s.dual_basis)
        .chain(&s.m_basis)
        .collect();
    let cs: Vec<DVector<f64>> = basis.iter().map(|b| s.coords(b)).collect();
    let gcs: Vec<DVector<f64>> = cs.iter().map(|c| &s.theta_form * c).collect();
    let nb = basis.len();
    let gram = Mat::from_fn(nb, nb, |i, j| cs[i].dot(&gcs[j]));
    let kappa = cond(&gram);
    if !(kappa <= 1e12) {
        return Err(DecompError::BasisIllConditioned(kappa));
    }
    let zc = s.coords(z);
    let rhs = DVector::from_fn(nb, |i, _| gcs[i].dot(&zc));
    let sol = gram
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or(DecompError::BasisIllConditioned(f64::INFINITY))?;
    let mut m_part = Mat::zeros(s.n, s.n);
    for (mi, mb) in s.m_basis.iter().enumerate() {
        m_part += mb * sol[2 * k + l + mi];
    }
    let mut recon = m_part.clone();
    for (b, c) in basis.iter().zip(sol.iter()).take(2 * k + l) {
        recon += *b * *c;
    }
    let residual = s.norm(&(z - recon)) / s.norm(z).max(1.0);
    Ok(DecompCoefficients {
        c_plus: sol.rows(0, k).iter().cloned().collect(),
        c_minus: sol.rows(k, k).iter().cloned().collect(),
        c_h: sol.rows(2 * k, l).iter().cloned().collect(),
        m_residual: m_part,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_structure::{build_structure, GroupSpec};
    use crate::linalg::expm;

    fn sl(n: usize) -> StructureData {
        build_structure(&GroupSpec::sl(n)).unwrap()
    }

    #[test]
    fn kan_hand_example() {
        let s = sl(2);
        let g = Mat::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
        let f = iwasawa_kan(&g, &s).unwrap();
        let r = 0.5f64.sqrt();
        assert!(frob(&(f.k - Mat::from_row_slice(2, 2, &[r, -r, r, r]))) < 1e-14);
        assert!(frob(&(f.a - Mat::from_row_slice(2, 2, &[2f64.sqrt(), 0.0, 0.0, r]))) < 1e-14);
        assert!(frob(&(f.n - Mat::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]))) < 1e-14);
    }

    #[test]
    fn trivial_factorisations() {
        let s = sl(2);
        let d = Mat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let f = iwasawa_kan(&d, &s).unwrap();
        assert!(frob(&(f.a - &d)) < 1e-15 && frob(&(f.k - Mat::identity(2, 2))) < 1e-15);
        let nm = Mat::from_row_slice(2, 2, &[1.0, 0.0, -3.0, 1.0]);
        let f = iwasawa_nak(&nm, &s).unwrap();
        assert!(frob(&(f.n - &nm)) < 1e-14 && frob(&(f.a - Mat::identity(2, 2))) < 1e-14);
        let th: f64 = 0.7;
        let k0 = Mat::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
        let f = iwasawa_nak(&k0, &s).unwrap();
        assert!(frob(&(f.k - &k0)) < 1e-14 && frob(&(f.n - Mat::identity(2, 2))) < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        let s = sl(2);
        let g = Mat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        assert!(matches!(iwasawa_kan(&g, &s), Err(DecompError::NotInGroup(_))));
        let upper = Mat::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(
            adjoint_coefficients(&s.dual_basis[0], &Mat::identity(2, 2), &upper, &s),
            Err(DecompError::NotInNMinus)
        ));
    }

    #[test]
    fn identity_cases() {
        let s = sl(3);
        let e = Mat::identity(3, 3);
        let c = adjoint_coefficients(&s.dual_basis[0], &e, &e, &s).unwrap();
        assert!((c.c_h[0] - 1.0).abs() < 1e-12 && c.c_h[1].abs() < 1e-12);
        assert!(c.c_plus.iter().chain(&c.c_minus).all(|v| v.abs() < 1e-12));
        let c = adjoint_coefficients(&s.n_plus_basis[0], &e, &e, &s).unwrap();
        assert!((c.c_plus[0] - 1.0).abs() < 1e-12);
        assert!(c.c_plus[1..].iter().chain(&c.c_minus).chain(&c.c_h).all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn sl2_worked_example() {
        let s = sl(2);
        for &u in &[-1.3, 0.0, 0.4, 2.5] {
            let n = expm(&(&s.n_minus_basis[0] * u));
            let c = adjoint_coefficients(&s.n_plus_basis[0], &Mat::identity(2, 2), &n, &s).unwrap();
            assert!((c.c_plus[0] - 1.0).abs() < 1e-10);
            assert!((c.c_h[0] - 2.0 * u).abs() < 1e-10);
            assert!((c.c_minus[0] + u * u).abs() < 1e-10);
            assert!(c.residual < 1e-12);
        }
    }
}
