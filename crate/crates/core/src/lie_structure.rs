//! Cartan decomposition, restricted roots, dual basis and Weyl group data of a
//! real semisimple matrix Lie algebra given by an explicit basis.
//!
//! All inner products are taken in the positive form
//! `<X,Y>_theta = -B(X, theta Y)` with `B` the Killing form. The root vectors
//! stored on each `RestrictedRoot` are orthonormal for this form. The bases
//! `n_plus_basis`, `n_minus_basis` used for coordinates are rescaled so that
//! `X_a, X_{-a} = -theta X_a, [X_a, X_{-a}]` is a standard sl(2)-triple,
//! i.e. `<X_a, X_a>_theta = 2 / <a, a>`; for sl(n) these are the `E_ij`.

use crate::linalg::{bracket, expm, frob, inv, mat_serde, mat_vec_serde, Mat};
use nalgebra::{DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StructureError {
    #[error("DEGENERATE_ALGEBRA: {0}")]
    DegenerateAlgebra(String),
    #[error("NOT_SEMISIMPLE: Killing form is singular")]
    NotSemisimple,
    #[error("REPRESENTATIVE_NOT_FOUND: no t in (0, 4pi] realises the reflection in simple root {0}")]
    RepresentativeNotFound(usize),
    #[error("INVALID_SPEC: {0}")]
    InvalidSpec(String),
    #[error("UNKNOWN_GROUP: {0}")]
    UnknownGroup(String),
}

/// A matrix realisation of a real semisimple Lie algebra together with its
/// Cartan involution, written as a matrix on basis coordinates.
#[derive(Clone, Debug)]
pub struct GroupSpec {
    pub name: String,
    pub n: usize,
    pub algebra_basis: Vec<Mat>,
    pub cartan_involution: Mat,
}

impl GroupSpec {
    /// sl(n,R) with basis: diagonal `E_ii - E_{i+1,i+1}` first, then `E_ij`
    /// (i != j) in row-major order; involution `X -> -X^T`.
    pub fn sl(n: usize) -> Self {
        let mut basis = Vec::new();
        for i in 0..n - 1 {
            let mut h = Mat::zeros(n, n);
            h[(i, i)] = 1.0;
            h[(i + 1, i + 1)] = -1.0;
            basis.push(h);
        }
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let mut e = Mat::zeros(n, n);
                    e[(i, j)] = 1.0;
                    basis.push(e);
                }
            }
        }
        let coord = Coordinates::new(n, &basis);
        let d = basis.len();
        let theta = Mat::from_fn(d, d, |r, c| {
            let img = -basis[c].transpose();
            coord.of(&img)[r]
        });
        GroupSpec {
            name: format!("sl{n}"),
            n,
            algebra_basis: basis,
            cartan_involution: theta,
        }
    }

    /// Parses identifiers of the form `slN` with `N >= 2`.
    pub fn by_name(name: &str) -> Result<Self, StructureError> {
        let n = name
            .strip_prefix("sl")
            .and_then(|s| s.parse::<usize>().ok())
            .filter(|&n| (2..=6).contains(&n))
            .ok_or_else(|| StructureError::UnknownGroup(name.to_string()))?;
        Ok(Self::sl(n))
    }

    pub fn dim(&self) -> usize {
        self.algebra_basis.len()
    }

    pub fn validate(&self) -> Result<(), StructureError> {
        let d = self.dim();
        if d == 0 {
            return Err(StructureError::InvalidSpec("empty basis".into()));
        }
        for b in &self.algebra_basis {
            if b.nrows() != self.n || b.ncols() != self.n {
                return Err(StructureError::InvalidSpec("basis matrix has wrong size".into()));
            }
            if b.trace().abs() > 1e-12 {
                return Err(StructureError::InvalidSpec("basis matrix is not trace-free".into()));
            }
        }
        let stacked = Mat::from_fn(self.n * self.n, d, |r, c| self.algebra_basis[c][(r / self.n, r % self.n)]);
        if stacked.rank(1e-10) != d {
            return Err(StructureError::InvalidSpec("basis is linearly dependent".into()));
        }
        let t = &self.cartan_involution;
        if t.nrows() != d || t.ncols() != d {
            return Err(StructureError::InvalidSpec("involution has wrong size".into()));
        }
        if frob(&(t * t - Mat::identity(d, d))) > 1e-12 {
            return Err(StructureError::InvalidSpec("involution does not square to the identity".into()));
        }
        Ok(())
    }
}

/// Least-squares coordinates of a matrix in a fixed basis.
#[derive(Clone, Debug, Default)]
pub struct Coordinates {
    n: usize,
    pinv: Mat,
}

impl Coordinates {
    pub fn new(n: usize, basis: &[Mat]) -> Self {
        let d = basis.len();
        let stacked = Mat::from_fn(n * n, d, |r, c| basis[c][(r / n, r % n)]);
        let pinv = stacked.pseudo_inverse(1e-14).expect("svd of basis");
        Coordinates { n, pinv }
    }

    pub fn of(&self, x: &Mat) -> DVector<f64> {
        let n = self.n;
        let v = DVector::from_fn(n * n, |r, _| x[(r / n, r % n)]);
        &self.pinv * v
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RestrictedRoot {
    /// Values on `a_basis`.
    pub functional: Vec<f64>,
    pub multiplicity: usize,
    #[serde(with = "mat_vec_serde")]
    pub root_vectors: Vec<Mat>,
    pub is_positive: bool,
    pub is_simple: bool,
    /// Expansion in the simple roots (integers up to rounding).
    pub simple_coeffs: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StructureData {
    pub group: String,
    pub n: usize,
    pub dim: usize,
    pub rank: usize,
    pub k_dim: usize,
    #[serde(with = "mat_vec_serde")]
    pub algebra_basis: Vec<Mat>,
    #[serde(with = "mat_serde")]
    pub theta_matrix: Mat,
    #[serde(with = "mat_serde")]
    pub killing_form: Mat,
    #[serde(with = "mat_serde")]
    pub theta_form: Mat,
    #[serde(with = "mat_vec_serde")]
    pub k_basis: Vec<Mat>,
    #[serde(with = "mat_vec_serde")]
    pub p_basis: Vec<Mat>,
    #[serde(with = "mat_vec_serde")]
    pub a_basis: Vec<Mat>,
    #[serde(with = "mat_serde")]
    pub h_generic: Mat,
    /// Positive roots (ordered by height) followed by their negatives.
    pub roots: Vec<RestrictedRoot>,
    pub simple_roots: Vec<usize>,
    pub rho: Vec<f64>,
    #[serde(with = "mat_vec_serde")]
    pub dual_basis: Vec<Mat>,
    #[serde(with = "mat_vec_serde")]
    pub m_basis: Vec<Mat>,
    #[serde(with = "mat_vec_serde")]
    pub n_minus_basis: Vec<Mat>,
    #[serde(with = "mat_vec_serde")]
    pub n_plus_basis: Vec<Mat>,
    /// For each entry of `n_minus_basis`: (index of the positive root, i).
    pub n_index: Vec<(usize, usize)>,
    #[serde(skip)]
    coords: Coordinates,
}

impl StructureData {
    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        let mut d: StructureData = serde_json::from_str(s)?;
        d.coords = Coordinates::new(d.n, &d.algebra_basis);
        Ok(d)
    }

    pub fn coords(&self, x: &Mat) -> DVector<f64> {
        self.coords.of(x)
    }

    pub fn from_coords(&self, c: &DVector<f64>) -> Mat {
        let mut out = Mat::zeros(self.n, self.n);
        for (b, ci) in self.algebra_basis.iter().zip(c.iter()) {
            out += b * *ci;
        }
        out
    }

    pub fn theta(&self, x: &Mat) -> Mat {
        self.from_coords(&(&self.theta_matrix * self.coords(x)))
    }

    /// The positive form `<X,Y>_theta`.
    pub fn inner(&self, x: &Mat, y: &Mat) -> f64 {
        let cx = self.coords(x);
        let cy = self.coords(y);
        cx.dot(&(&self.theta_form * cy))
    }

    pub fn killing(&self, x: &Mat, y: &Mat) -> f64 {
        let cx = self.coords(x);
        let cy = self.coords(y);
        cx.dot(&(&self.killing_form * cy))
    }

    pub fn norm(&self, x: &Mat) -> f64 {
        self.inner(x, x).max(0.0).sqrt()
    }

    /// Coordinates of `H` with respect to the orthonormal `a_basis`.
    pub fn a_coords(&self, h: &Mat) -> Vec<f64> {
        self.a_basis.iter().map(|a| self.inner(a, h)).collect()
    }

    pub fn from_a_coords(&self, c: &[f64]) -> Mat {
        let mut out = Mat::zeros(self.n, self.n);
        for (a, ci) in self.a_basis.iter().zip(c) {
            out += a * *ci;
        }
        out
    }

    pub fn root_value(&self, root: usize, h: &Mat) -> f64 {
        let c = self.a_coords(h);
        self.roots[root].functional.iter().zip(&c).map(|(f, x)| f * x).sum()
    }

    /// Values `alpha_j(H)` of the simple roots.
    pub fn simple_values(&self, h: &Mat) -> Vec<f64> {
        self.simple_roots.iter().map(|&r| self.root_value(r, h)).collect()
    }

    /// `sum_j c_j H_j` in terms of the dual basis.
    pub fn from_dual_coeffs(&self, c: &[f64]) -> Mat {
        let mut out = Mat::zeros(self.n, self.n);
        for (h, ci) in self.dual_basis.iter().zip(c) {
            out += h * *ci;
        }
        out
    }

    pub fn positive_roots(&self) -> impl Iterator<Item = (usize, &RestrictedRoot)> {
        self.roots.iter().enumerate().filter(|(_, r)| r.is_positive)
    }

    /// Index of the negative of a positive root.
    pub fn negative_of(&self, root: usize) -> usize {
        let npos = self.roots.iter().filter(|r| r.is_positive).count();
        root + npos
    }

    /// `lambda(H_j)` for the root attached to each `n_minus_basis` entry.
    pub fn n_exponents(&self) -> Vec<Vec<f64>> {
        self.n_index
            .iter()
            .map(|&(r, _)| self.roots[r].simple_coeffs.clone())
            .collect()
    }

    /// Coefficients of an element of the span of `n_minus_basis`.
    pub fn n_minus_coords(&self, x: &Mat) -> Vec<f64> {
        self.n_minus_basis
            .iter()
            .map(|b| self.inner(b, x) / self.inner(b, b))
            .collect()
    }

    pub fn from_n_minus_coords(&self, u: &[f64]) -> Mat {
        let mut out = Mat::zeros(self.n, self.n);
        for (b, ui) in self.n_minus_basis.iter().zip(u) {
            out += b * *ui;
        }
        out
    }

    /// Matrix of `ad U` restricted to the nilpotent algebra spanned by `n_minus_basis`.
    pub fn ad_n_minus(&self, u: &Mat) -> Mat {
        let k = self.k_dim;
        let mut out = Mat::zeros(k, k);
        for (j, b) in self.n_minus_basis.iter().enumerate() {
            let c = self.n_minus_coords(&bracket(u, b));
            for i in 0..k {
                out[(i, j)] = c[i];
            }
        }
        out
    }

    /// Squared Killing length `<a, a>` of a root, computed on `a*`.
    pub fn root_norm_sq(&self, root: usize) -> f64 {
        self.roots[root].functional.iter().map(|v| v * v).sum()
    }
}

/// `X = k + p` with `theta k = k`, `theta p = -p`.
pub fn cartan_split(x: &Mat, s: &StructureData) -> (Mat, Mat) {
    let tx = s.theta(x);
    ((x + &tx) * 0.5, (x - &tx) * 0.5)
}

fn gram_schmidt(cands: &[DVector<f64>], g: &Mat, tol: f64, limit: usize) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for c in cands {
        if out.len() >= limit {
            break;
        }
        let mut v = c.clone();
        for _ in 0..2 {
            for q in &out {
                let proj = q.dot(&(g * &v));
                v -= q * proj;
            }
        }
        let nrm = v.dot(&(g * &v)).max(0.0).sqrt();
        if nrm > tol {
            out.push(v / nrm);
        }
    }
    out
}

fn null_space(m: &Mat, tol: f64) -> Vec<DVector<f64>> {
    let mtm = m.transpose() * m;
    let eig = SymmetricEigen::new(mtm);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    idx.into_iter()
        .filter(|&i| eig.eigenvalues[i].abs() < tol * tol)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect()
}

fn fix_sign(m: &Mat) -> Mat {
    let maxabs = m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            if v.abs() > 1e-9 * maxabs {
                return if v < 0.0 { -m } else { m.clone() };
            }
        }
    }
    m.clone()
}

fn lex_desc(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > 1e-9 {
            return y.partial_cmp(x).unwrap();
        }
    }
    std::cmp::Ordering::Equal
}

/// Computes the Cartan/root-space skeleton of `spec`.
pub fn build_structure(spec: &GroupSpec) -> Result<StructureData, StructureError> {
    spec.validate()?;
    let n = spec.n;
    let d = spec.dim();
    let basis = &spec.algebra_basis;
    let coord = Coordinates::new(n, basis);
    let from = |c: &DVector<f64>| -> Mat {
        let mut out = Mat::zeros(n, n);
        for (b, ci) in basis.iter().zip(c.iter()) {
            out += b * *ci;
        }
        out
    };
    let ad = |x: &Mat| -> Mat {
        let mut m = Mat::zeros(d, d);
        for (j, b) in basis.iter().enumerate() {
            let c = coord.of(&bracket(x, b));
            m.set_column(j, &c);
        }
        m
    };
    let ads: Vec<Mat> = basis.iter().map(&ad).collect();
    let killing = Mat::from_fn(d, d, |i, j| (&ads[i] * &ads[j]).trace());
    let keig = SymmetricEigen::new(killing.clone());
    let kmax = keig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let kmin = keig.eigenvalues.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    if kmin <= 1e-10 * kmax {
        return Err(StructureError::NotSemisimple);
    }
    let theta = spec.cartan_involution.clone();
    let gth = {
        let g = -(&killing * &theta);
        (&g + g.transpose()) * 0.5
    };
    let chol = gth
        .clone()
        .cholesky()
        .ok_or_else(|| StructureError::InvalidSpec("theta form is not positive definite".into()))?;

    let eye = Mat::identity(d, d);
    let pk = (&eye + &theta) * 0.5;
    let pp = (&eye - &theta) * 0.5;
    let units: Vec<DVector<f64>> = (0..d).map(|i| eye.column(i).into_owned()).collect();
    let k_c = gram_schmidt(&units.iter().map(|e| &pk * e).collect::<Vec<_>>(), &gth, 1e-10, d);
    let p_c = gram_schmidt(&units.iter().map(|e| &pp * e).collect::<Vec<_>>(), &gth, 1e-10, d);
    let p_mats: Vec<Mat> = p_c.iter().map(&from).collect();

    // Maximal abelian subspace of p: greedy commuting selection, then extend by
    // the centraliser in p until it is self-centralising.
    let mut a_c: Vec<DVector<f64>> = Vec::new();
    for (pc, pm) in p_c.iter().zip(&p_mats) {
        let commutes = a_c.iter().all(|ac| frob(&bracket(&from(ac), pm)) < 1e-10);
        if commutes {
            let cand = gram_schmidt(std::slice::from_ref(pc), &gth, 1e-10, 1);
            let mut all = a_c.clone();
            all.extend(cand);
            a_c = gram_schmidt(&all, &gth, 1e-10, d);
        }
    }
    loop {
        let a_mats: Vec<Mat> = a_c.iter().map(&from).collect();
        let rows = a_mats.len() * d;
        let mut lin = Mat::zeros(rows.max(1), p_c.len());
        for (j, pm) in p_mats.iter().enumerate() {
            for (m, am) in a_mats.iter().enumerate() {
                let c = coord.of(&bracket(am, pm));
                for r in 0..d {
                    lin[(m * d + r, j)] = c[r];
                }
            }
        }
        let mut extended = false;
        for y in null_space(&lin, 1e-9) {
            let mut v = DVector::zeros(d);
            for (j, pc) in p_c.iter().enumerate() {
                v += pc * y[j];
            }
            let mut all = a_c.clone();
            all.push(v);
            let gs = gram_schmidt(&all, &gth, 1e-8, d);
            if gs.len() > a_c.len() {
                a_c = gs;
                extended = true;
                break;
            }
        }
        if !extended {
            break;
        }
    }
    let l = a_c.len();
    let a_mats: Vec<Mat> = a_c.iter().map(&from).collect();
    let ad_a: Vec<Mat> = a_mats.iter().map(&ad).collect();

    let mut h_gen = Mat::zeros(n, n);
    for (j, a) in a_mats.iter().enumerate() {
        let jj = (j + 1) as f64;
        h_gen += a * (jj + PI / jj);
    }
    let h_gen_a: Vec<f64> = (0..l).map(|j| (j + 1) as f64 + PI / (j + 1) as f64).collect();

    // Simultaneous eigendecomposition through the symmetric form of ad(H).
    let lmat = chol.l();
    let lt = lmat.transpose();
    let lt_inv = inv(&lt);
    let ad_h = ad(&h_gen);
    let sym = &lt * &ad_h * &lt_inv;
    let sym = (&sym + sym.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match clusters.last_mut() {
            Some(c) if (eig.eigenvalues[i] - eig.eigenvalues[c[0]]).abs() <= 1e-9 => c.push(i),
            _ => clusters.push(vec![i]),
        }
    }

    struct Space {
        value: f64,
        functional: Vec<f64>,
        vecs: Vec<DVector<f64>>,
    }
    let mut spaces: Vec<Space> = Vec::new();
    let mut zero_space: Option<Vec<DVector<f64>>> = None;
    for c in &clusters {
        let value = eig.eigenvalues[c[0]];
        let ys: Vec<DVector<f64>> = c.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
        // Deterministic basis: project the standard coordinate vectors.
        let mut proj = Mat::zeros(d, d);
        for y in &ys {
            proj += y * y.transpose();
        }
        let cands: Vec<DVector<f64>> = (0..d).map(|i| &proj * (&lt * eye.column(i))).collect();
        let ortho = gram_schmidt(&cands, &eye, 1e-8, ys.len());
        if ortho.len() != ys.len() {
            return Err(StructureError::DegenerateAlgebra("eigenspace basis extraction failed".into()));
        }
        let xs: Vec<DVector<f64>> = ortho.iter().map(|y| &lt_inv * y).collect();
        let x0 = &xs[0];
        let functional: Vec<f64> = ad_a
            .iter()
            .map(|am| x0.dot(&(&gth * (am * x0))) / x0.dot(&(&gth * x0)))
            .collect();
        for x in &xs {
            for (m, am) in ad_a.iter().enumerate() {
                let r = am * x - x * functional[m];
                if r.norm() > 1e-8 * (1.0 + x.norm()) {
                    return Err(StructureError::DegenerateAlgebra(format!(
                        "eigenvalue cluster at {value:.3e} is not a joint eigenspace of ad(a)"
                    )));
                }
            }
        }
        if value.abs() <= 1e-9 {
            if functional.iter().any(|f| f.abs() > 1e-8) {
                return Err(StructureError::DegenerateAlgebra("zero cluster carries a root".into()));
            }
            zero_space = Some(xs);
        } else {
            spaces.push(Space { value, functional, vecs: xs });
        }
    }
    let zero_space = zero_space.ok_or_else(|| StructureError::DegenerateAlgebra("no centraliser found".into()))?;
    if zero_space.len() < l {
        return Err(StructureError::DegenerateAlgebra("centraliser smaller than a".into()));
    }
    let m_c = {
        let cands: Vec<DVector<f64>> = zero_space.iter().map(|z| &pk * z).collect();
        gram_schmidt(&cands, &gth, 1e-8, zero_space.len() - l)
    };
    if m_c.len() + l != zero_space.len() {
        return Err(StructureError::DegenerateAlgebra("centraliser does not split as m + a".into()));
    }

    // Positive system and simple roots.
    let key = |f: &[f64]| -> Vec<f64> {
        let mut k = vec![f.iter().zip(&h_gen_a).map(|(x, y)| x * y).sum::<f64>()];
        k.extend_from_slice(f);
        k
    };
    let pos: Vec<&Space> = spaces.iter().filter(|s| s.value > 0.0).collect();
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-9);
    let mut simple: Vec<usize> = (0..pos.len())
        .filter(|&i| {
            !(0..pos.len()).any(|j| {
                (0..pos.len()).any(|k| {
                    let sum: Vec<f64> = pos[j].functional.iter().zip(&pos[k].functional).map(|(x, y)| x + y).collect();
                    close(&sum, &pos[i].functional)
                })
            })
        })
        .collect();
    simple.sort_by(|&a, &b| lex_desc(&key(&pos[a].functional), &key(&pos[b].functional)));
    if simple.len() != l {
        return Err(StructureError::DegenerateAlgebra(format!(
            "found {} simple roots for rank {l}",
            simple.len()
        )));
    }
    let amat = Mat::from_fn(l, l, |i, j| pos[simple[i]].functional[j]);
    let amat_t_inv = inv(&amat.transpose());
    let coeffs_of = |f: &[f64]| -> Vec<f64> {
        let c = &amat_t_inv * DVector::from_column_slice(f);
        c.iter().map(|v| if (v - v.round()).abs() < 1e-8 { v.round() } else { *v }).collect()
    };
    let mut pos_order: Vec<usize> = (0..pos.len()).collect();
    pos_order.sort_by(|&a, &b| {
        let ha: f64 = coeffs_of(&pos[a].functional).iter().sum();
        let hb: f64 = coeffs_of(&pos[b].functional).iter().sum();
        ha.partial_cmp(&hb)
            .unwrap()
            .then_with(|| lex_desc(&key(&pos[a].functional), &key(&pos[b].functional)))
    });

    let mut roots: Vec<RestrictedRoot> = Vec::new();
    let mut n_minus = Vec::new();
    let mut n_plus = Vec::new();
    let mut n_index = Vec::new();
    let mut negs: Vec<RestrictedRoot> = Vec::new();
    for (ri, &pi) in pos_order.iter().enumerate() {
        let sp = pos[pi];
        let norm_sq: f64 = sp.functional.iter().map(|v| v * v).sum();
        let target = (2.0 / norm_sq).sqrt();
        let coeffs = coeffs_of(&sp.functional);
        if coeffs.iter().any(|c| *c < -1e-9) {
            return Err(StructureError::DegenerateAlgebra("positive root with negative simple coefficient".into()));
        }
        let mut vecs = Vec::new();
        let mut nvecs = Vec::new();
        for (i, x) in sp.vecs.iter().enumerate() {
            let xm = fix_sign(&from(x));
            let nrm = {
                let c = coord.of(&xm);
                c.dot(&(&gth * &c)).sqrt()
            };
            let xm = xm * (target / nrm);
            let xneg = -from(&(&theta * coord.of(&xm)));
            n_plus.push(xm.clone());
            n_minus.push(xneg.clone());
            n_index.push((ri, i));
            vecs.push(&xm / target);
            nvecs.push(&xneg / target);
        }
        let is_simple = simple.contains(&pi);
        roots.push(RestrictedRoot {
            functional: sp.functional.clone(),
            multiplicity: sp.vecs.len(),
            root_vectors: vecs,
            is_positive: true,
            is_simple,
            simple_coeffs: coeffs.clone(),
        });
        negs.push(RestrictedRoot {
            functional: sp.functional.iter().map(|v| -v).collect(),
            multiplicity: sp.vecs.len(),
            root_vectors: nvecs,
            is_positive: false,
            is_simple: false,
            simple_coeffs: coeffs.iter().map(|c| -c).collect(),
        });
    }
    roots.extend(negs);
    let simple_idx: Vec<usize> = simple
        .iter()
        .map(|&s| pos_order.iter().position(|&p| p == s).unwrap())
        .collect();
    let mut rho = vec![0.0; l];
    for r in roots.iter().filter(|r| r.is_positive) {
        for j in 0..l {
            rho[j] += 0.5 * r.multiplicity as f64 * r.functional[j];
        }
    }
    // Dual basis: alpha_i(H_j) = delta_ij.
    let simple_mat = Mat::from_fn(l, l, |i, j| roots[simple_idx[i]].functional[j]);
    let cinv = inv(&simple_mat);
    let dual: Vec<Mat> = (0..l)
        .map(|j| {
            let mut h = Mat::zeros(n, n);
            for m in 0..l {
                h += &a_mats[m] * cinv[(m, j)];
            }
            h
        })
        .collect();
    let k_dim = n_minus.len();
    Ok(StructureData {
        group: spec.name.clone(),
        n,
        dim: d,
        rank: l,
        k_dim,
        algebra_basis: basis.clone(),
        theta_matrix: theta,
        killing_form: killing,
        theta_form: gth,
        k_basis: k_c.iter().map(&from).collect(),
        p_basis: p_mats,
        a_basis: a_mats,
        h_generic: h_gen,
        roots,
        simple_roots: simple_idx,
        rho,
        dual_basis: dual,
        m_basis: m_c.iter().map(&from).collect(),
        n_minus_basis: n_minus,
        n_plus_basis: n_plus,
        n_index,
        coords: coord,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeylElement {
    pub name: String,
    pub word: Vec<usize>,
    /// Action on `a` in `a_basis` coordinates.
    #[serde(with = "mat_serde")]
    pub matrix: Mat,
    #[serde(with = "mat_serde")]
    pub representative: Mat,
    #[serde(with = "mat_serde")]
    pub representative_inv: Mat,
    /// `Ad(m_w^{-1}) H_i = sum_j c_ij H_j`.
    #[serde(with = "mat_serde")]
    pub c_matrix: Mat,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeylGroupData {
    pub elements: Vec<WeylElement>,
    #[serde(with = "mat_vec_serde")]
    pub generators: Vec<Mat>,
    /// Parameters `t*` of the generator representatives `exp(t* Z_i)`.
    pub t_star: Vec<f64>,
}

impl WeylGroupData {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.elements.iter().position(|e| e.name == name)
    }

    pub fn find_matrix(&self, m: &Mat) -> Option<usize> {
        self.elements.iter().position(|e| frob(&(&e.matrix - m)) < 1e-9)
    }
}

fn ad_on_a_residual(s: &StructureData, g: &Mat, gi: &Mat, target: &Mat) -> f64 {
    let mut worst = 0.0f64;
    for (m, a) in s.a_basis.iter().enumerate() {
        let img = g * a * gi;
        let mut want = Mat::zeros(s.n, s.n);
        for (j, aj) in s.a_basis.iter().enumerate() {
            want += aj * target[(j, m)];
        }
        worst = worst.max(s.norm(&(img - want)));
    }
    worst
}

fn find_t_star(s: &StructureData, z: &Mat, target: &Mat) -> Option<f64> {
    let res = |t: f64| -> f64 {
        let g = expm(&(z * t));
        let gi = expm(&(z * -t));
        ad_on_a_residual(s, &g, &gi, target)
    };
    let steps = 2000;
    let h = 4.0 * PI / steps as f64;
    let vals: Vec<f64> = (0..=steps + 1).map(|k| res(k as f64 * h)).collect();
    for k in 1..=steps {
        if vals[k] <= vals[k - 1] && vals[k] <= vals[k + 1] {
            let (mut lo, mut hi) = ((k - 1) as f64 * h, (k + 1) as f64 * h);
            let gr = (5f64.sqrt() - 1.0) / 2.0;
            let mut c = hi - gr * (hi - lo);
            let mut dd = lo + gr * (hi - lo);
            let (mut fc, mut fd) = (res(c), res(dd));
            while hi - lo > 1e-14 {
                if fc < fd {
                    hi = dd;
                    dd = c;
                    fd = fc;
                    c = hi - gr * (hi - lo);
                    fc = res(c);
                } else {
                    lo = c;
                    c = dd;
                    fc = fd;
                    dd = lo + gr * (hi - lo);
                    fd = res(dd);
                }
            }
            let t = 0.5 * (lo + hi);
            if t > 0.0 && t <= 4.0 * PI && res(t) < 1e-8 {
                return Some(t);
            }
        }
    }
    None
}

/// Weyl group as the reflection closure, with representatives in `M*`.
pub fn build_weyl(s: &StructureData) -> Result<WeylGroupData, StructureError> {
    let l = s.rank;
    let n = s.n;
    let mut gens = Vec::new();
    let mut gen_reps = Vec::new();
    let mut t_star = Vec::new();
    for (i, &r) in s.simple_roots.iter().enumerate() {
        let a = DVector::from_column_slice(&s.roots[r].functional);
        let refl = Mat::identity(l, l) - (&a * a.transpose()) * (2.0 / a.dot(&a));
        let neg = s.negative_of(r);
        let z = &s.roots[r].root_vectors[0] - &s.roots[neg].root_vectors[0];
        let t = find_t_star(s, &z, &refl).ok_or(StructureError::RepresentativeNotFound(i + 1))?;
        gen_reps.push(expm(&(&z * t)));
        gens.push(refl);
        t_star.push(t);
    }
    let dual_a: Mat = Mat::from_fn(l, l, |m, j| s.a_coords(&s.dual_basis[j])[m]);
    let dual_a_inv = inv(&dual_a);
    let make = |name: String, word: Vec<usize>, matrix: Mat, rep: Mat| -> WeylElement {
        let rep_inv = inv(&rep);
        let mut c = Mat::zeros(l, l);
        for i in 0..l {
            let img = &rep_inv * &s.dual_basis[i] * &rep;
            let ac = DVector::from_vec(s.a_coords(&img));
            let hc = &dual_a_inv * ac;
            for j in 0..l {
                c[(i, j)] = hc[j];
            }
        }
        WeylElement { name, word, matrix, representative: rep, representative_inv: rep_inv, c_matrix: c }
    };
    let mut elements = vec![make("e".into(), vec![], Mat::identity(l, l), Mat::identity(n, n))];
    let mut head = 0;
    while head < elements.len() {
        for (i, g) in gens.iter().enumerate() {
            let m = &elements[head].matrix * g;
            if elements.iter().any(|e| frob(&(&e.matrix - &m)) < 1e-9) {
                continue;
            }
            let mut word = elements[head].word.clone();
            word.push(i + 1);
            let name: String = word.iter().map(|w| format!("s{w}")).collect();
            let rep = &elements[head].representative * &gen_reps[i];
            elements.push(make(name, word, m, rep));
        }
        head += 1;
        if elements.len() > 10_000 {
            return Err(StructureError::DegenerateAlgebra("Weyl closure did not terminate".into()));
        }
    }
    Ok(WeylGroupData { elements, generators: gens, t_star })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sl(n: usize) -> StructureData {
        build_structure(&GroupSpec::sl(n)).unwrap()
    }

    #[test]
    fn sl2_skeleton() {
        let s = sl(2);
        assert_eq!((s.rank, s.k_dim, s.roots.len()), (1, 1, 2));
        let h1 = &s.dual_basis[0];
        assert!((h1[(0, 0)] - 0.5).abs() < 1e-12 && (h1[(1, 1)] + 0.5).abs() < 1e-12);
        // rho = alpha / 2
        let a = &s.roots[0].functional;
        assert!((s.rho[0] - a[0] / 2.0).abs() < 1e-12);
        let xa = &s.n_plus_basis[0];
        let xm = &s.n_minus_basis[0];
        assert!((xa[(0, 1)] - 1.0).abs() < 1e-12 && (xm[(1, 0)] - 1.0).abs() < 1e-12);
        assert!(frob(&(bracket(xm, xa) + h1 * 2.0)) < 1e-12);
    }

    #[test]
    fn sl3_counts_and_ordering() {
        let s = sl(3);
        assert_eq!((s.rank, s.k_dim, s.roots.len()), (2, 3, 6));
        assert!(s.roots.iter().all(|r| r.multiplicity == 1));
        // n^- spanned by E21, E32, E31 in that order
        let expect = [(1, 0), (2, 1), (2, 0)];
        for (b, &(i, j)) in s.n_minus_basis.iter().zip(&expect) {
            assert!((b[(i, j)] - 1.0).abs() < 1e-12, "{b}");
        }
        for (i, hi) in s.dual_basis.iter().enumerate() {
            let v = s.simple_values(hi);
            for (j, vj) in v.iter().enumerate() {
                assert!((vj - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cartan_split_examples() {
        let s = sl(2);
        let mut e12 = Mat::zeros(2, 2);
        e12[(0, 1)] = 1.0;
        let (k, p) = cartan_split(&e12, &s);
        assert!((k[(0, 1)] - 0.5).abs() < 1e-14 && (k[(1, 0)] + 0.5).abs() < 1e-14);
        assert!((p[(0, 1)] - 0.5).abs() < 1e-14 && (p[(1, 0)] - 0.5).abs() < 1e-14);
        let sym = Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, -1.0]);
        let (k, p) = cartan_split(&sym, &s);
        assert!(frob(&k) < 1e-14 && frob(&(p - sym)) < 1e-14);
    }

    #[test]
    fn weyl_orders_and_identity() {
        let s2 = sl(2);
        let w2 = build_weyl(&s2).unwrap();
        assert_eq!(w2.len(), 2);
        // Z = (E12 - E21)/2 has unit length, so the quarter turn is at t = pi.
        assert!((w2.t_star[0] - PI).abs() < 1e-9);
        let quarter = Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(frob(&(&w2.elements[1].representative - quarter)) < 1e-9);
        assert!((w2.elements[1].c_matrix[(0, 0)] + 1.0).abs() < 1e-9);
        let s3 = sl(3);
        let w3 = build_weyl(&s3).unwrap();
        assert_eq!(w3.len(), 6);
        assert!(frob(&(&w3.elements[0].c_matrix - Mat::identity(2, 2))) < 1e-14);
    }

    #[test]
    fn json_roundtrip() {
        let s = sl(3);
        let js = serde_json::to_string(&s).unwrap();
        let back = StructureData::from_json(&js).unwrap();
        assert_eq!(back.roots, s.roots);
        let x = &s.n_plus_basis[2];
        assert!((back.inner(x, x) - s.inner(x, x)).abs() < 1e-12);
    }

    #[test]
    fn unknown_group_rejected() {
        assert!(matches!(GroupSpec::by_name("so5"), Err(StructureError::UnknownGroup(_))));
    }
}
