//! Symbols and kernels of the operators `pi(f)`, `(pi(f) phi)(x) = int_G f(g) phi(g x) dg`,
//! on the Riemannian symmetric space of SL(2,R).
//!
//! Conventions:
//! * `X = G/K` is the hyperbolic plane of curvature -1; `d` is its distance,
//!   equal to `|P|_theta / sqrt(2)` for `g = exp(P) k`.
//! * Haar measure `dg = dA(g o) dk` with `dk` of unit mass, so that `h_tau`
//!   (heat kernel at time `tau` of the Laplace–Beltrami operator) has unit mass.
//! * Chart densities: `dA = du dt / t^2` in every chart.
//! * The cutoff `c_gamma` depends on `|P|_theta` only: equal to one up to
//!   `cutoff_inner * cutoff_radius`, then a C^4 polynomial step in `1 - e^{-d}`
//!   down to zero at `cutoff_radius`.

pub mod fiber;
pub mod fits;
pub mod geometry;
pub mod heat;
pub mod quad;
pub mod resolvent;
pub mod semigroup;
pub mod seminorm;
pub mod symbol;

use crate::linalg::Mat;
use crate::oshima_atlas::{Atlas, AtlasError, OshimaPoint};
use geometry::{chart_e_coords, mobius, na, M2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("QUADRATURE_FAIL: value {value:.6e} with error estimate {error:.3e}")]
    QuadratureFail { value: f64, error: f64 },
    #[error("DIVERGENT_TAIL: Re lambda = {re_lambda} <= omega_est = {omega}")]
    DivergentTail { re_lambda: f64, omega: f64 },
    #[error("TRUNCATION_DOMINATED: boundary shell carries {0:.3e} of the integral")]
    TruncationDominated(f64),
    #[error("INTERIOR_REQUIRED: the kernel base point needs t != 0")]
    InteriorRequired,
    #[error("LEFT_CHART: {0}")]
    LeftChart(String),
    #[error("UNSUPPORTED_GROUP: {0}")]
    UnsupportedGroup(String),
    #[error("INVALID_ARGUMENT: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Atlas(#[from] AtlasError),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FunctionKind {
    Heat,
    Resolvent,
    GaussianBump,
    Custom,
}

/// Radial profile `f(g) = F(d(o, g o))`, linearly interpolated, zero past the
/// last abscissa.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RadialTable {
    pub r: Vec<f64>,
    pub re: Vec<f64>,
    #[serde(default)]
    pub im: Vec<f64>,
}

impl RadialTable {
    pub fn eval(&self, r: f64) -> Complex64 {
        let n = self.r.len();
        if n == 0 || r > self.r[n - 1] || r < self.r[0] {
            return Complex64::new(0.0, 0.0);
        }
        let i = self.r.partition_point(|v| *v <= r).clamp(1, n - 1);
        let (r0, r1) = (self.r[i - 1], self.r[i]);
        let s = if r1 > r0 { (r - r0) / (r1 - r0) } else { 0.0 };
        let im = |k: usize| self.im.get(k).cloned().unwrap_or(0.0);
        Complex64::new(
            self.re[i - 1] + s * (self.re[i] - self.re[i - 1]),
            im(i - 1) + s * (im(i) - im(i - 1)),
        )
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GroupFunctionSpec {
    pub kind: FunctionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// `[Re lambda, Im lambda]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    /// Asserted exponential decay rate in `d`, used to size truncation radii.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_decay: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<RadialTable>,
}

impl GroupFunctionSpec {
    fn empty(kind: FunctionKind) -> Self {
        GroupFunctionSpec { kind, tau: None, alpha: None, lambda: None, width: None, kappa_decay: None, table: None }
    }

    pub fn heat(tau: f64) -> Self {
        GroupFunctionSpec { tau: Some(tau), ..Self::empty(FunctionKind::Heat) }
    }

    pub fn bump(width: f64) -> Self {
        GroupFunctionSpec { width: Some(width), ..Self::empty(FunctionKind::GaussianBump) }
    }

    pub fn resolvent(alpha: f64, lambda: Complex64) -> Self {
        GroupFunctionSpec { alpha: Some(alpha), lambda: Some([lambda.re, lambda.im]), ..Self::empty(FunctionKind::Resolvent) }
    }

    pub fn custom(table: RadialTable) -> Self {
        GroupFunctionSpec { table: Some(table), ..Self::empty(FunctionKind::Custom) }
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        let bad = |m: &str| Err(KernelError::InvalidArgument(m.to_string()));
        match self.kind {
            FunctionKind::Heat => match self.tau {
                Some(t) if t > 0.0 && t.is_finite() => Ok(()),
                _ => bad("HEAT requires tau > 0"),
            },
            FunctionKind::GaussianBump => match self.width {
                Some(w) if w > 0.0 && w.is_finite() => Ok(()),
                _ => bad("GAUSSIAN_BUMP requires width > 0"),
            },
            FunctionKind::Resolvent => match (self.alpha, self.lambda) {
                (Some(a), Some(_)) if a > 0.0 => Ok(()),
                _ => bad("RESOLVENT requires alpha > 0 and lambda"),
            },
            FunctionKind::Custom => match &self.table {
                Some(t) if !t.r.is_empty()
                    && t.r.len() == t.re.len()
                    && (t.im.is_empty() || t.im.len() == t.r.len())
                    && t.r.windows(2).all(|w| w[1] > w[0]) =>
                {
                    Ok(())
                }
                _ => bad("CUSTOM requires a strictly increasing radial table"),
            },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct KernelConfig {
    pub xi_max: f64,
    pub dxi: f64,
    pub n_rho: usize,
    pub n_psi: usize,
    pub n_theta: usize,
    pub n_theta_fiber: usize,
    /// Radius of `V^1` in `|P|_theta` (Killing) units.
    pub cutoff_radius: f64,
    /// `c_gamma = 1` up to this fraction of `cutoff_radius`.
    pub cutoff_inner: f64,
    /// Cached growth rate of the semigroup; fitted when absent.
    pub omega_est: Option<f64>,
    pub chunk: usize,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            xi_max: 36.0,
            dxi: 0.5625,
            n_rho: 40,
            n_psi: 32,
            n_theta: 32,
            n_theta_fiber: 128,
            cutoff_radius: 1.5,
            cutoff_inner: 0.25,
            omega_est: None,
            chunk: 2048,
        }
    }
}

impl KernelConfig {
    pub fn n_xi(&self) -> usize {
        (2.0 * self.xi_max / self.dxi).round() as usize
    }

    /// Cutoff radius in hyperbolic distance.
    pub fn cutoff_rho(&self) -> f64 {
        self.cutoff_radius / 2f64.sqrt()
    }

    /// `c_gamma` as a function of `d(o, g o)`: a degree-9 step in
    /// `s = 1 - e^{-d}`, which is linear in `t` along the geodesic below `o`.
    pub fn cutoff(&self, rho: f64) -> f64 {
        let d1 = self.cutoff_rho();
        let d0 = self.cutoff_inner * d1;
        if rho <= d0 {
            1.0
        } else if rho >= d1 {
            0.0
        } else {
            let s = |d: f64| -(-d).exp_m1();
            1.0 - smootherstep((s(rho) - s(d0)) / (s(d1) - s(d0)))
        }
    }
}

/// Degree-9 step, C^4 at both ends.
pub fn smootherstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x.powi(5) * (126.0 + x * (-420.0 + x * (540.0 + x * (-315.0 + 70.0 * x))))
}

/// A group function ready for evaluation at `g = exp(P) k_phi`, with
/// `rho = d(o, g o)`.
#[derive(Clone, Debug)]
pub struct GroupFunction {
    pub spec: GroupFunctionSpec,
    norm: f64,
    table: Option<resolvent::LogRadialTable>,
}

impl GroupFunction {
    pub fn new(spec: &GroupFunctionSpec, cfg: &KernelConfig) -> Result<Self, KernelError> {
        spec.validate()?;
        let mut gf = GroupFunction { spec: spec.clone(), norm: 1.0, table: None };
        match spec.kind {
            FunctionKind::GaussianBump => {
                let w = spec.width.unwrap();
                let rr = quad::gl(200, 0.0, gf.rho_support(0.0));
                let radial: f64 = rr.iter().map(|(r, wt)| wt * 2.0 * PI * r.sinh() * (-(r * r) / (w * w)).exp()).sum();
                let th = gf.theta_half().unwrap();
                let ang: f64 = quad::gl(200, -th, th)
                    .iter()
                    .map(|(t, wt)| wt / (2.0 * PI) * (-4.0 * t * t / (w * w)).exp())
                    .sum();
                gf.norm = 1.0 / (radial * ang);
            }
            FunctionKind::Resolvent => {
                let alpha = spec.alpha.unwrap();
                let l = spec.lambda.unwrap();
                let lambda = Complex64::new(l[0], l[1]);
                let omega = cfg.omega_est.unwrap_or(0.0);
                gf.table = Some(resolvent::LogRadialTable::build(alpha, lambda, omega, gf.rho_support(0.0))?);
            }
            _ => {}
        }
        Ok(gf)
    }

    pub fn k_invariant(&self) -> bool {
        self.spec.kind != FunctionKind::GaussianBump
    }

    /// Half-width of the `k`-support for functions concentrated near `K = e`.
    pub fn theta_half(&self) -> Option<f64> {
        match self.spec.kind {
            FunctionKind::GaussianBump => Some((self.spec.width.unwrap() * 10f64.sqrt()).min(PI)),
            _ => None,
        }
    }

    /// Radius in `d` past which `|f| sinh(d) e^{kappa |g|}` is negligible.
    pub fn rho_support(&self, kappa: f64) -> f64 {
        let extra = self.spec.kappa_decay.unwrap_or(0.0);
        match self.spec.kind {
            FunctionKind::GaussianBump => self.spec.width.unwrap() * 40f64.sqrt() * (1.0 + kappa),
            FunctionKind::Heat => {
                // d^2/4tau - (1/2 + sqrt2 kappa) d > 40
                let tau = self.spec.tau.unwrap();
                let b = 0.5 + 2f64.sqrt() * kappa + extra;
                2.0 * tau * b + (4.0 * tau * tau * b * b + 160.0 * tau).sqrt()
            }
            FunctionKind::Resolvent => {
                let l = self.spec.lambda.unwrap();
                let rate = 0.5 + (0.25 + l[0].max(0.0)).sqrt() - 1.0 - 2f64.sqrt() * kappa - extra;
                (40.0 / rate.max(0.25)).min(60.0)
            }
            FunctionKind::Custom => *self.spec.table.as_ref().unwrap().r.last().unwrap(),
        }
    }

    pub fn value(&self, rho: f64, phi: f64) -> Result<Complex64, KernelError> {
        Ok(match self.spec.kind {
            FunctionKind::Heat => Complex64::new(heat::heat_kernel_radial(self.spec.tau.unwrap(), rho)?, 0.0),
            FunctionKind::GaussianBump => {
                let w = self.spec.width.unwrap();
                Complex64::new(self.norm * (-(2.0 * rho * rho + 8.0 * phi * phi) / (2.0 * w * w)).exp(), 0.0)
            }
            FunctionKind::Resolvent => self.table.as_ref().unwrap().eval(rho),
            FunctionKind::Custom => self.spec.table.as_ref().unwrap().eval(rho),
        })
    }

    pub fn value_at(&self, g: &M2) -> Result<Complex64, KernelError> {
        self.value(geometry::dist_origin(g), geometry::polar_angle(g))
    }
}

/// The `|g|` proxy `|P|_theta + |log k|_theta` of `g = exp(P) k`.
pub fn g_norm(g: &M2) -> f64 {
    2f64.sqrt() * geometry::dist_origin(g) + 2.0 * 2f64.sqrt() * geometry::polar_angle(g).abs()
}

/// SL(2,R) harness: atlas plus numerical settings.
#[derive(Clone, Debug)]
pub struct KernelLab {
    pub atlas: Atlas,
    pub cfg: KernelConfig,
    reps: Vec<M2>,
}

fn to_m2(m: &Mat) -> M2 {
    M2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

impl KernelLab {
    pub fn new(atlas: Atlas, cfg: KernelConfig) -> Result<Self, KernelError> {
        let s = &atlas.s;
        if s.n != 2 || s.rank != 1 || s.k_dim != 1 {
            return Err(KernelError::UnsupportedGroup(format!(
                "kernel evaluation is implemented for SL(2,R) only, got {}",
                s.group
            )));
        }
        if !(cfg.xi_max > 0.0 && cfg.dxi > 0.0 && cfg.cutoff_radius > 0.0 && cfg.cutoff_inner > 0.0 && cfg.cutoff_inner < 1.0) {
            return Err(KernelError::InvalidArgument("grid and cutoff must be positive".into()));
        }
        if cfg.n_rho == 0 || cfg.n_psi == 0 || cfg.n_theta == 0 || cfg.n_theta_fiber == 0 || cfg.chunk == 0 {
            return Err(KernelError::InvalidArgument("quadrature orders must be positive".into()));
        }
        let reps = atlas.weyl.elements.iter().map(|e| to_m2(&e.representative)).collect();
        Ok(KernelLab { atlas, cfg, reps })
    }

    fn rep(&self, chart: &str) -> Result<M2, KernelError> {
        Ok(self.reps[self.atlas.chart_index(chart)?])
    }

    /// Group element `m_w n a` of an interior point (sign of `t` dropped).
    pub fn point_group(&self, p: &OshimaPoint) -> Result<M2, KernelError> {
        if p.n.len() != 1 || p.t.len() != 1 {
            return Err(KernelError::InvalidArgument("SL(2) points have one n and one t coordinate".into()));
        }
        if p.t[0] == 0.0 {
            return Err(KernelError::InteriorRequired);
        }
        Ok(self.rep(&p.chart)? * na(p.n[0], p.t[0].abs()))
    }

    /// Chart coordinates `(n, t)` of `g x`, valid on the whole open orbit.
    pub fn act(&self, g: &M2, p: &OshimaPoint) -> Result<(f64, f64), KernelError> {
        let xg = self.point_group(p)?;
        let m = self.rep(&p.chart)?;
        let z = mobius(&(geometry::inv2(&m) * g * xg), Complex64::i());
        let (u, t) = chart_e_coords(z);
        Ok((u, t * p.t[0].signum()))
    }

    /// The point of the standard upper half-plane model carried by `p`.
    pub fn model_point(&self, p: &OshimaPoint) -> Result<Complex64, KernelError> {
        Ok(mobius(&self.point_group(p)?, Complex64::i()))
    }

    /// Inverse of [`model_point`](Self::model_point) on the orbit with the given sign.
    pub fn from_model(&self, chart: &str, sign: f64, z: Complex64) -> Result<OshimaPoint, KernelError> {
        let m = self.rep(chart)?;
        let (u, t) = chart_e_coords(mobius(&geometry::inv2(&m), z));
        Ok(OshimaPoint::new(chart, vec![u], vec![sign.signum() * t]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oshima_atlas::AtlasConfig;

    pub(crate) fn lab() -> KernelLab {
        KernelLab::new(Atlas::for_group("sl2", AtlasConfig::default()).unwrap(), KernelConfig::default()).unwrap()
    }

    #[test]
    fn fast_action_matches_atlas() {
        let lab = lab();
        let g = geometry::polar_node(0.4, 2.0, 0.3);
        let gd = Mat::from_row_slice(2, 2, &[g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]]);
        for p in [OshimaPoint::new("e", vec![0.2], vec![-0.8]), OshimaPoint::new("s1", vec![-0.3], vec![1.1])] {
            let (u, t) = lab.act(&g, &p).unwrap();
            let q = lab.atlas.act_unchecked(&gd, &p).unwrap();
            assert!((u - q.n[0]).abs() < 1e-12 && (t - q.t[0]).abs() < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn rejects_sl3() {
        let at = Atlas::for_group("sl3", AtlasConfig::default()).unwrap();
        assert!(matches!(KernelLab::new(at, KernelConfig::default()), Err(KernelError::UnsupportedGroup(_))));
    }

    #[test]
    fn cutoff_shape() {
        let c = KernelConfig::default();
        assert_eq!(c.cutoff(0.0), 1.0);
        assert_eq!(c.cutoff(0.2), 1.0);
        assert_eq!(c.cutoff(c.cutoff_rho()), 0.0);
        let (d0, d1) = (c.cutoff_inner * c.cutoff_rho(), c.cutoff_rho());
        let mid = -((0.5 * ((-d0).exp() + (-d1).exp())).ln());
        assert!((c.cutoff(mid) - 0.5).abs() < 1e-12);
        assert!(c.cutoff(0.9 * d1) > 0.0 && c.cutoff(0.9 * d1) < c.cutoff(0.8 * d1));
        assert_eq!(c.n_xi(), 128);
    }

    #[test]
    fn spec_validation() {
        assert!(GroupFunctionSpec::heat(-1.0).validate().is_err());
        assert!(GroupFunctionSpec::bump(0.0).validate().is_err());
        assert!(GroupFunctionSpec::resolvent(1.0, Complex64::new(4.0, 0.0)).validate().is_ok());
        let t = RadialTable { r: vec![0.0, 1.0], re: vec![1.0, 0.0], im: vec![] };
        assert_eq!(t.eval(0.25), Complex64::new(0.75, 0.0));
        assert_eq!(t.eval(2.0), Complex64::new(0.0, 0.0));
    }
}
