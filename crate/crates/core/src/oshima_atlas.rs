//! Weyl-indexed charts `(n, t)` of the compactification, the G-action on the
//! open orbits, the `chi_j` factors and chart transitions.
//!
//! A point `(n, t)` in chart `w` with all `t_i != 0` is the coset
//! `m_w exp(sum n_i X_{-i}) exp(-sum_i H_i log|t_i|) K` in the copy of `G/K`
//! labelled by `sgn t`.

use crate::decompositions::{nak_raw, DecompError};
use crate::lie_structure::{build_structure, build_weyl, GroupSpec, StructureData, StructureError, WeylGroupData};
use crate::linalg::{exp_nilpotent, log_unipotent, Mat};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AtlasError {
    #[error("LEFT_CHART: coordinates n={n:?} t={t:?} leave the chart box")]
    LeftChart { n: Vec<f64>, t: Vec<f64> },
    #[error("NOT_INTERIOR: point has a vanishing t coordinate")]
    NotInterior,
    #[error("NOT_IN_OVERLAP: boundary points are not transported between charts")]
    NotInOverlap,
    #[error("EXTRAPOLATION_DIVERGED: successive estimates differ by {0:.3e}")]
    ExtrapolationDiverged(f64),
    #[error("UNKNOWN_CHART: {0}")]
    UnknownChart(String),
    #[error("DIMENSION_MISMATCH: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Decomp(#[from] DecompError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OshimaPoint {
    pub chart: String,
    pub n: Vec<f64>,
    pub t: Vec<f64>,
}

impl OshimaPoint {
    pub fn new(chart: &str, n: Vec<f64>, t: Vec<f64>) -> Self {
        OshimaPoint { chart: chart.to_string(), n, t }
    }

    pub fn is_interior(&self) -> bool {
        self.t.iter().all(|v| *v != 0.0)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Signature {
    pub signs: Vec<i8>,
    /// 1-based indices `i` of the simple roots with `t_i != 0`.
    pub theta: Vec<usize>,
}

pub fn signature(p: &OshimaPoint) -> Signature {
    let signs: Vec<i8> = p
        .t
        .iter()
        .map(|v| if *v > 0.0 { 1 } else if *v < 0.0 { -1 } else { 0 })
        .collect();
    let theta = signs.iter().enumerate().filter(|(_, s)| **s != 0).map(|(i, _)| i + 1).collect();
    Signature { signs, theta }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ChiMethod {
    Interior,
    Extrapolated,
    OneParameter,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ChiValue {
    /// 1-based simple root index.
    pub j: usize,
    pub value: f64,
    pub method: ChiMethod,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct AtlasConfig {
    pub n_box: f64,
    pub t_box: f64,
    /// Radius of the group neighbourhood `V^1` in the `|g|` proxy (Killing norm).
    pub v_radius: f64,
    pub extrap_eps: f64,
    pub extrap_levels: usize,
    pub extrap_tol: f64,
}

impl Default for AtlasConfig {
    fn default() -> Self {
        AtlasConfig { n_box: 2.0, t_box: 1.5, v_radius: 1.5, extrap_eps: 1e-2, extrap_levels: 5, extrap_tol: 1e-5 }
    }
}

/// One-parameter subgroups with closed-form `chi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OneParameter {
    /// `exp(s H_i)`, 1-based `i`.
    Cartan(usize),
    /// `exp(s X_{-l,i})` for the given `n_minus_basis` index (chart `e` only).
    NilMinus(usize),
}

#[derive(Clone, Debug)]
pub struct Atlas {
    pub s: StructureData,
    pub weyl: WeylGroupData,
    pub cfg: AtlasConfig,
}

impl Atlas {
    pub fn new(s: StructureData, weyl: WeylGroupData, cfg: AtlasConfig) -> Self {
        Atlas { s, weyl, cfg }
    }

    pub fn for_group(name: &str, cfg: AtlasConfig) -> Result<Self, AtlasError> {
        let s = build_structure(&GroupSpec::by_name(name)?)?;
        let weyl = build_weyl(&s)?;
        Ok(Atlas { s, weyl, cfg })
    }

    pub fn chart_index(&self, chart: &str) -> Result<usize, AtlasError> {
        self.weyl.index_of(chart).ok_or_else(|| AtlasError::UnknownChart(chart.to_string()))
    }

    fn check_dims(&self, p: &OshimaPoint) -> Result<usize, AtlasError> {
        if p.n.len() != self.s.k_dim || p.t.len() != self.s.rank {
            return Err(AtlasError::DimensionMismatch(format!(
                "expected {} n and {} t coordinates, got {} and {}",
                self.s.k_dim,
                self.s.rank,
                p.n.len(),
                p.t.len()
            )));
        }
        self.chart_index(&p.chart)
    }

    pub fn in_box(&self, n: &[f64], t: &[f64]) -> bool {
        n.iter().all(|v| v.abs() < self.cfg.n_box) && t.iter().all(|v| v.abs() < self.cfg.t_box)
    }

    pub fn n_matrix(&self, n: &[f64]) -> Mat {
        exp_nilpotent(&self.s.from_n_minus_coords(n))
    }

    /// `exp(-sum H_i log|t_i|)` (interior `t` only).
    pub fn a_matrix(&self, t: &[f64]) -> Mat {
        let c: Vec<f64> = t.iter().map(|v| -v.abs().ln()).collect();
        let h = self.s.from_dual_coeffs(&c);
        Mat::from_diagonal(&h.diagonal().map(f64::exp))
    }

    /// The group element `m_w n a` representing an interior point.
    pub fn group_element(&self, p: &OshimaPoint) -> Result<Mat, AtlasError> {
        let w = self.check_dims(p)?;
        if !p.is_interior() {
            return Err(AtlasError::NotInterior);
        }
        Ok(&self.weyl.elements[w].representative * self.n_matrix(&p.n) * self.a_matrix(&p.t))
    }

    /// Chart coordinates of `m_w^{-1} x K` for `x` a group element, with the
    /// given sign vector.
    fn coords_of(&self, h: &Mat, signs: &[f64]) -> Result<(Vec<f64>, Vec<f64>), AtlasError> {
        let f = nak_raw(h)?;
        let la = f.log_a();
        let n = self.s.n_minus_coords(&log_unipotent(&f.n));
        let t = self
            .s
            .simple_values(&la)
            .iter()
            .zip(signs)
            .map(|(v, sg)| sg * (-v).exp())
            .collect();
        Ok((n, t))
    }

    /// Action without the chart-box check; valid on the whole open orbit.
    pub fn act_unchecked(&self, g: &Mat, p: &OshimaPoint) -> Result<OshimaPoint, AtlasError> {
        let w = self.check_dims(p)?;
        if !p.is_interior() {
            return Err(AtlasError::NotInterior);
        }
        let we = &self.weyl.elements[w];
        let h = &we.representative_inv * g * &we.representative;
        let x = h * self.n_matrix(&p.n) * self.a_matrix(&p.t);
        let signs: Vec<f64> = p.t.iter().map(|v| v.signum()).collect();
        let (n, t) = self.coords_of(&x, &signs)?;
        Ok(OshimaPoint { chart: p.chart.clone(), n, t })
    }

    pub fn act_interior(&self, g: &Mat, p: &OshimaPoint) -> Result<OshimaPoint, AtlasError> {
        let q = self.act_unchecked(g, p)?;
        if !self.in_box(&q.n, &q.t) {
            return Err(AtlasError::LeftChart { n: q.n, t: q.t });
        }
        Ok(q)
    }

    fn chi_interior(&self, g: &Mat, p: &OshimaPoint) -> Result<Vec<f64>, AtlasError> {
        let q = self.act_unchecked(g, p)?;
        Ok(q.t.iter().zip(&p.t).map(|(a, b)| a / b).collect())
    }

    /// All `chi_j(g, p)`; boundary points are handled by Richardson
    /// extrapolation from interior points with the zero coordinates set to
    /// `eps 2^{-m}`.
    pub fn chi_all(&self, g: &Mat, p: &OshimaPoint) -> Result<Vec<ChiValue>, AtlasError> {
        self.check_dims(p)?;
        let l = self.s.rank;
        if p.is_interior() {
            return Ok(self
                .chi_interior(g, p)?
                .into_iter()
                .enumerate()
                .map(|(j, value)| ChiValue { j: j + 1, value, method: ChiMethod::Interior })
                .collect());
        }
        let levels = self.cfg.extrap_levels.max(2);
        let mut samples: Vec<Vec<f64>> = Vec::with_capacity(levels);
        for m in 0..levels {
            let h = self.cfg.extrap_eps * 0.5f64.powi(m as i32);
            let t: Vec<f64> = p.t.iter().map(|v| if *v == 0.0 { h } else { *v }).collect();
            let q = OshimaPoint { chart: p.chart.clone(), n: p.n.clone(), t };
            samples.push(self.chi_interior(g, &q)?);
        }
        let mut out = Vec::with_capacity(l);
        for j in 0..l {
            let col: Vec<f64> = samples.iter().map(|s| s[j]).collect();
            let (value, diff) = richardson(&col, 2.0);
            if diff > self.cfg.extrap_tol {
                return Err(AtlasError::ExtrapolationDiverged(diff));
            }
            out.push(ChiValue { j: j + 1, value, method: ChiMethod::Extrapolated });
        }
        Ok(out)
    }

    /// `chi_j(g, p)` for a 1-based index `j`.
    pub fn chi(&self, g: &Mat, p: &OshimaPoint, j: usize) -> Result<ChiValue, AtlasError> {
        if j == 0 || j > self.s.rank {
            return Err(AtlasError::DimensionMismatch(format!("chi index {j} out of range")));
        }
        Ok(self.chi_all(g, p)?.swap_remove(j - 1))
    }

    /// Closed-form `chi_j` along one-parameter subgroups.
    pub fn chi_one_parameter(&self, sub: OneParameter, s: f64, chart: &str, j: usize) -> Result<ChiValue, AtlasError> {
        let w = self.chart_index(chart)?;
        let value = match sub {
            OneParameter::Cartan(i) => (-self.weyl.elements[w].c_matrix[(i - 1, j - 1)] * s).exp(),
            OneParameter::NilMinus(_) => {
                if w != 0 {
                    return Err(AtlasError::UnknownChart(format!("{chart} (closed form only in chart e)")));
                }
                let _ = s;
                1.0
            }
        };
        Ok(ChiValue { j, value, method: ChiMethod::OneParameter })
    }

    /// Coordinates of the same point in chart `w_target`. Signs of `t` are
    /// preserved: charts glue points of equal signature.
    pub fn transition(&self, p: &OshimaPoint, w_target: &str) -> Result<OshimaPoint, AtlasError> {
        let w = self.check_dims(p)?;
        let wt = self.chart_index(w_target)?;
        if w == wt {
            return Ok(p.clone());
        }
        if !p.is_interior() {
            return Err(AtlasError::NotInOverlap);
        }
        let x = &self.weyl.elements[wt].representative_inv
            * &self.weyl.elements[w].representative
            * self.n_matrix(&p.n)
            * self.a_matrix(&p.t);
        let signs: Vec<f64> = p.t.iter().map(|v| v.signum()).collect();
        let (n, t) = self.coords_of(&x, &signs)?;
        if !self.in_box(&n, &t) {
            return Err(AtlasError::LeftChart { n, t });
        }
        Ok(OshimaPoint { chart: w_target.to_string(), n, t })
    }
}

/// Richardson extrapolation of samples at `h, h/r, h/r^2, ...` assuming an
/// expansion in integer powers of `h`. Returns the final diagonal entry and
/// its distance from the previous one.
pub fn richardson(samples: &[f64], ratio: f64) -> (f64, f64) {
    let m = samples.len();
    let mut table = vec![vec![0.0; m]; m];
    for i in 0..m {
        table[i][0] = samples[i];
        for k in 1..=i {
            let f = ratio.powi(k as i32);
            table[i][k] = (f * table[i][k - 1] - table[i - 1][k - 1]) / (f - 1.0);
        }
    }
    let last = table[m - 1][m - 1];
    let prev = if m > 1 { table[m - 2][m - 2] } else { last };
    (last, (last - prev).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm, frob};

    fn atlas(name: &str) -> Atlas {
        Atlas::for_group(name, AtlasConfig::default()).unwrap()
    }

    #[test]
    fn signature_examples() {
        let s = signature(&OshimaPoint::new("e", vec![0.0], vec![1.0]));
        assert_eq!((s.signs, s.theta), (vec![1], vec![1]));
        let s = signature(&OshimaPoint::new("e", vec![0.0], vec![0.0]));
        assert_eq!((s.signs, s.theta), (vec![0], vec![]));
        let s = signature(&OshimaPoint::new("e", vec![0.0; 3], vec![0.5, 0.0]));
        assert_eq!((s.signs, s.theta), (vec![1, 0], vec![1]));
    }

    #[test]
    fn sl2_cartan_and_nilpotent_action() {
        let at = atlas("sl2");
        let p = OshimaPoint::new("e", vec![0.0], vec![0.8]);
        let s = 0.3;
        let q = at.act_interior(&expm(&(&at.s.dual_basis[0] * s)), &p).unwrap();
        assert!((q.t[0] - 0.8 * (-s).exp()).abs() < 1e-14 && q.n[0].abs() < 1e-14);
        let p = OshimaPoint::new("e", vec![0.4], vec![-0.7]);
        let q = at.act_interior(&expm(&(&at.s.n_minus_basis[0] * 0.5)), &p).unwrap();
        assert!((q.n[0] - 0.9).abs() < 1e-14 && (q.t[0] + 0.7).abs() < 1e-14);
        let q = at.act_interior(&Mat::identity(2, 2), &p).unwrap();
        assert!((q.n[0] - 0.4).abs() < 1e-14 && (q.t[0] + 0.7).abs() < 1e-14);
    }

    #[test]
    fn left_chart_and_boundary_errors() {
        let at = atlas("sl2");
        let p = OshimaPoint::new("e", vec![0.0], vec![1.0]);
        let big = expm(&(&at.s.dual_basis[0] * -1.0));
        assert!(matches!(at.act_interior(&big, &p), Err(AtlasError::LeftChart { .. })));
        let b = OshimaPoint::new("e", vec![0.0], vec![0.0]);
        assert_eq!(at.act_interior(&big, &b), Err(AtlasError::NotInterior));
        assert_eq!(at.transition(&b, "s1"), Err(AtlasError::NotInOverlap));
    }

    #[test]
    fn sl2_transition_hand_value() {
        // chart s1 at n = 0: m_w^{-1} a_t m_w = a_{1/t}.
        let at = atlas("sl2");
        let p = OshimaPoint::new("e", vec![0.0], vec![-0.9]);
        let q = at.transition(&p, "s1").unwrap();
        assert!(q.n[0].abs() < 1e-14 && (q.t[0] + 1.0 / 0.9).abs() < 1e-13);
        let back = at.transition(&q, "e").unwrap();
        assert!((back.t[0] + 0.9).abs() < 1e-13);
    }

    #[test]
    fn chi_boundary_identity_and_one_parameter() {
        let at = atlas("sl3");
        let p = OshimaPoint::new("e", vec![0.2, -0.1, 0.3], vec![0.0, 0.6]);
        for c in at.chi_all(&Mat::identity(3, 3), &p).unwrap() {
            assert!((c.value - 1.0).abs() < 1e-12 && c.method == ChiMethod::Extrapolated);
        }
        let g = expm(&(&at.s.dual_basis[1] * 0.25));
        let c = at.chi(&g, &OshimaPoint::new("e", vec![0.0; 3], vec![0.5, -0.5]), 2).unwrap();
        let closed = at.chi_one_parameter(OneParameter::Cartan(2), 0.25, "e", 2).unwrap();
        assert!((c.value - closed.value).abs() < 1e-12);
    }

    #[test]
    fn richardson_exact_on_polynomials() {
        let f = |h: f64| 3.0 + 2.0 * h - h * h + 0.5 * h.powi(3);
        let s: Vec<f64> = (0..5).map(|m| f(0.1 * 0.5f64.powi(m))).collect();
        let (v, _) = richardson(&s, 2.0);
        assert!((v - 3.0).abs() < 1e-13);
    }

    #[test]
    fn group_element_reconstructs_point() {
        let at = atlas("sl3");
        let p = OshimaPoint::new("s1s2", vec![0.3, -0.2, 0.1], vec![0.7, -1.1]);
        let g = at.group_element(&p).unwrap();
        // The identity acts trivially, and the element has determinant one.
        assert!((g.determinant() - 1.0).abs() < 1e-12);
        let q = at.act_interior(&Mat::identity(3, 3), &p).unwrap();
        assert!(frob(&Mat::from_row_slice(1, 3, &[q.n[0] - 0.3, q.n[1] + 0.2, q.n[2] - 0.1])) < 1e-13);
    }
}
