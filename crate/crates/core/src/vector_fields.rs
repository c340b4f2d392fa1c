//! Left-invariant and fundamental vector fields in chart coordinates, and the
//! matrix `Gamma(x, g)` of derivatives of `n_j` and `chi_j`.

use crate::decompositions::{adjoint_coefficients, DecompError};
use crate::linalg::{expm, inv, mat_serde, Mat};
use crate::oshima_atlas::{Atlas, AtlasError, OshimaPoint};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VfError {
    #[error("SINGULAR_GAMMA: |det| = {0:.3e}")]
    SingularGamma(f64),
    #[error("DIMENSION_MISMATCH: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Atlas(#[from] AtlasError),
    #[error(transparent)]
    Decomp(#[from] DecompError),
}

/// Tangent vector in the frame `{X_{-l,i}}` (pushed to `N^-`) and `d/dt_j`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TangentVector {
    pub dn: Vec<f64>,
    pub dt: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GammaMatrix {
    #[serde(with = "mat_serde")]
    pub entries: Mat,
    pub x: OshimaPoint,
    #[serde(with = "mat_serde")]
    pub g: Mat,
    pub det: f64,
}

/// `|t|^e = prod_j |t_j|^{e_j}` with `0^0 = 1`.
pub fn monomial(t: &[f64], e: &[f64]) -> f64 {
    t.iter().zip(e).map(|(ti, ei)| ti.abs().powf(*ei)).product()
}

pub fn left_invariant_vf(at: &Atlas, c_minus: &[f64], c_h: &[f64], p: &OshimaPoint) -> Result<TangentVector, VfError> {
    let s = &at.s;
    if c_minus.len() != s.k_dim || c_h.len() != s.rank || p.t.len() != s.rank {
        return Err(VfError::DimensionMismatch("coefficient lengths".into()));
    }
    let ex = s.n_exponents();
    let dn = c_minus.iter().zip(&ex).map(|(c, e)| c * monomial(&p.t, e)).collect();
    let dt = c_h.iter().zip(&p.t).map(|(c, t)| -c * t).collect();
    Ok(TangentVector { dn, dt })
}

/// Field of `Y` in the chart `phi_{g m_w}` at coordinates `p`, i.e. the
/// vector `d/ds exp(s Y) g m_w n a K` expressed through `(n, t)`.
pub fn fundamental_vf(at: &Atlas, y: &Mat, g: &Mat, p: &OshimaPoint) -> Result<TangentVector, VfError> {
    let w = at.chart_index(&p.chart)?;
    let s = &at.s;
    if p.n.len() != s.k_dim || p.t.len() != s.rank {
        return Err(VfError::DimensionMismatch("point coordinates".into()));
    }
    let gm = g * &at.weyl.elements[w].representative;
    let c = adjoint_coefficients(y, &gm, &at.n_matrix(&p.n), s)?;
    let ex = s.n_exponents();
    let dn = (0..s.k_dim)
        .map(|i| {
            let e2: Vec<f64> = ex[i].iter().map(|v| 2.0 * v).collect();
            c.c_plus[i] * monomial(&p.t, &e2) + c.c_minus[i]
        })
        .collect();
    let dt = c.c_h.iter().zip(&p.t).map(|(c, t)| -c * t).collect();
    Ok(TangentVector { dn, dt })
}

fn bernoulli_plus(m: usize) -> Vec<f64> {
    // B_j with B_1 = +1/2, from sum_{j<=n} C(n+1, j) B_j = n + 1.
    let mut b = vec![0.0; m + 1];
    for n in 0..=m {
        let mut acc = (n + 1) as f64;
        let mut binom = 1.0;
        for j in 0..n {
            acc -= binom * b[j];
            binom = binom * (n + 1 - j) as f64 / (j + 1) as f64;
        }
        b[n] = acc / binom;
    }
    b
}

/// `psi(ad U) = ad U / (1 - exp(-ad U))` on the nilpotent algebra `n^-`;
/// maps frame coefficients to increments of exponential coordinates.
pub fn dexp_inverse(at: &Atlas, u: &[f64]) -> Mat {
    let s = &at.s;
    let k = s.k_dim;
    let adu = s.ad_n_minus(&s.from_n_minus_coords(u));
    let b = bernoulli_plus(k);
    let mut out = Mat::identity(k, k);
    let mut pow = Mat::identity(k, k);
    let mut fact = 1.0;
    for (m, bm) in b.iter().enumerate().skip(1) {
        pow = &pow * &adu;
        fact *= m as f64;
        out += &pow * (bm / fact);
    }
    out
}

/// Converts a tangent vector into increments `(du, dt)` of the chart
/// coordinates.
pub fn coordinate_increments(at: &Atlas, p: &OshimaPoint, v: &TangentVector) -> (Vec<f64>, Vec<f64>) {
    let m = dexp_inverse(at, &p.n);
    let du = &m * nalgebra::DVector::from_column_slice(&v.dn);
    (du.iter().cloned().collect(), v.dt.clone())
}

/// Central-difference flow of `exp(s Y)` in the chart `phi_{g m_w}`:
/// coordinates of `g^{-1} exp(+-eps Y) g . p`.
pub fn flow_increment(at: &Atlas, y: &Mat, g: &Mat, p: &OshimaPoint, eps: f64) -> Result<(Vec<f64>, Vec<f64>), VfError> {
    let gi = inv(g);
    let fwd = at.act_unchecked(&(&gi * expm(&(y * eps)) * g), p)?;
    let bwd = at.act_unchecked(&(&gi * expm(&(y * -eps)) * g), p)?;
    let du = fwd.n.iter().zip(&bwd.n).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
    let dt = fwd.t.iter().zip(&bwd.t).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
    Ok((du, dt))
}

fn gamma_interior(at: &Atlas, p: &OshimaPoint, g: &Mat, h: f64) -> Result<Mat, VfError> {
    let s = &at.s;
    let (k, l) = (s.k_dim, s.rank);
    let dirs: Vec<&Mat> = s.n_minus_basis.iter().chain(&s.dual_basis).collect();
    let mut out = Mat::zeros(k + l, k + l);
    let eval = |x: &Mat, step: f64| -> Result<Vec<f64>, VfError> {
        let gg = expm(&(x * -step)) * g;
        let q = at.act_unchecked(&gg, p)?;
        let mut v = q.n.clone();
        v.extend(q.t.iter().zip(&p.t).map(|(a, b)| a / b));
        Ok(v)
    };
    for (r, x) in dirs.iter().enumerate() {
        let d = |hh: f64| -> Result<Vec<f64>, VfError> {
            let a = eval(x, hh)?;
            let b = eval(x, -hh)?;
            Ok(a.iter().zip(&b).map(|(u, v)| (u - v) / (2.0 * hh)).collect())
        };
        let d1 = d(h)?;
        let d2 = d(h / 2.0)?;
        for c in 0..k + l {
            out[(r, c)] = (4.0 * d2[c] - d1[c]) / 3.0;
        }
    }
    Ok(out)
}

/// `Gamma(x, g)` with rows `X_{-l,i}` then `H_i` and columns `n_j` then
/// `chi_j`; entries `d/ds f(exp(-sX) g)` at `s = 0`. Boundary points are
/// handled by Richardson extrapolation in the vanishing `t_j`.
pub fn gamma_matrix(at: &Atlas, p: &OshimaPoint, g: &Mat, h: f64) -> Result<GammaMatrix, VfError> {
    at.chart_index(&p.chart)?;
    let entries = if p.is_interior() {
        gamma_interior(at, p, g, h)?
    } else {
        let levels = at.cfg.extrap_levels.max(2);
        let mut mats = Vec::with_capacity(levels);
        for m in 0..levels {
            let hh = at.cfg.extrap_eps * 0.5f64.powi(m as i32);
            let t: Vec<f64> = p.t.iter().map(|v| if *v == 0.0 { hh } else { *v }).collect();
            let q = OshimaPoint { chart: p.chart.clone(), n: p.n.clone(), t };
            mats.push(gamma_interior(at, &q, g, h)?);
        }
        let dim = mats[0].nrows();
        let mut out = Mat::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                let col: Vec<f64> = mats.iter().map(|m| m[(i, j)]).collect();
                out[(i, j)] = crate::oshima_atlas::richardson(&col, 2.0).0;
            }
        }
        out
    };
    let det = entries.determinant();
    if det.abs() < 1e-8 {
        return Err(VfError::SingularGamma(det.abs()));
    }
    Ok(GammaMatrix { entries, x: p.clone(), g: g.clone(), det })
}
