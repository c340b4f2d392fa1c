//! Local symbol `a(x, xi) = int_G e^{i w(g, x) . xi} c(g) f(g) dg` on a uniform
//! frequency grid, with `w(g, x) = (u' - x_u, t'/x_t - 1)` for `g x = (u', t')`,
//! and the inverse transform back to kernels.

use super::geometry::{dist, polar_node};
use super::quad::{gl, trapezoid_circle, HaarRule};
use super::{GroupFunction, KernelError, KernelLab};
use crate::oshima_atlas::OshimaPoint;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct XiGrid {
    pub xi_max: f64,
    pub dxi: f64,
    pub n: usize,
}

impl XiGrid {
    pub fn xi(&self, m: usize) -> f64 {
        -self.xi_max + m as f64 * self.dxi
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n).map(|m| self.xi(m)).collect()
    }

    /// Spacing of the dual grid produced by the FFT.
    pub fn dz(&self) -> f64 {
        2.0 * PI / (self.n as f64 * self.dxi)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SymbolGrid {
    pub x: OshimaPoint,
    pub xi_grid: XiGrid,
    /// Row-major, `values[m1 * n + m2]` at `(xi_{m1}, xi_{m2})`.
    pub values: Vec<Complex64>,
    pub cutoff_spec: String,
    /// `int |c f| dg`, an upper bound for every `|a(x, xi)|`.
    pub abs_mass: f64,
    pub nodes: usize,
    /// Share of `abs_mass` on nodes with `|w1|` or `|w2|` past the half
    /// period `pi / dxi`; that part folds back onto the dual grid.
    pub alias_fraction: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum KernelMethod {
    FourierGrid,
    LaplaceOfSemigroup,
    FiberIntegral,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct KernelSample {
    pub x: OshimaPoint,
    pub y: OshimaPoint,
    pub value: Complex64,
    pub err_estimate: f64,
    pub method: KernelMethod,
    pub settings: String,
}

/// Kernel on the dual grid `y = (x_u - z1, x_t (1 - z2))`, `z_j = j dz`,
/// `j = -n/2 .. n/2 - 1`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct KernelGrid {
    pub x: OshimaPoint,
    pub z: Vec<f64>,
    /// Row-major over `(z1, z2)`.
    pub values: Vec<Complex64>,
    pub err_estimate: f64,
}

impl KernelGrid {
    pub fn y(&self, i1: usize, i2: usize) -> OshimaPoint {
        OshimaPoint::new(&self.x.chart, vec![self.x.n[0] - self.z[i1]], vec![self.x.t[0] * (1.0 - self.z[i2])])
    }
}

/// Trapezoid size resolving `e^{i b cos(.)}` on the circle.
fn periodic_nodes(bandwidth: f64, floor: usize) -> usize {
    let n = (1.1 * bandwidth + 16.0).ceil() as usize;
    n.max(floor).div_ceil(4) * 4
}

/// Weighted displacements `(w1, w2, W)` of the quadrature nodes.
///
/// Radial Gauss–Legendre panels split at the cutoff seam. The angular rules
/// are sized per radius from the phase bandwidth: the nodes at `(rho, ., theta)`
/// trace a circle of chart radius `t_c sinh(rho)` around `k_theta x`, with
/// `t_c <= e^{d(o, x)}`, and `w2` carries an extra `1/|x_t|`.
pub fn symbol_nodes(lab: &KernelLab, f: &GroupFunction, x: &OshimaPoint, xi_max: f64) -> Result<Vec<(f64, f64, Complex64)>, KernelError> {
    lab.point_group(x)?;
    let (xu, xt) = (x.n[0], x.t[0]);
    let cfg = &lab.cfg;
    let rho_max = f.rho_support(0.0).min(cfg.cutoff_rho());
    let seam = (cfg.cutoff_inner * cfg.cutoff_rho()).min(rho_max);
    let radial = HaarRule::with_breaks(&[0.0, seam, rho_max], Some(1.0), cfg.n_rho, 1, 1).rho;
    let d_ox = dist(Complex64::new(xu, xt.abs()), Complex64::i());
    let spread = 1.0 + 1.0 / xt.abs();
    let per_rho: Vec<Result<Vec<(f64, f64, Complex64)>, KernelError>> = radial
        .par_iter()
        .map(|&(rho, wr)| {
            let c = cfg.cutoff(rho);
            let mut out = Vec::new();
            if c == 0.0 {
                return Ok(out);
            }
            let psi = trapezoid_circle(periodic_nodes(xi_max * rho.sinh() * d_ox.exp() * spread, cfg.n_psi));
            let theta: Vec<(f64, f64)> = match f.theta_half() {
                Some(h) => gl(cfg.n_theta, -h, h),
                None => trapezoid_circle(periodic_nodes(xi_max * d_ox.sinh() * rho.exp() * spread, cfg.n_theta)),
            };
            let radial_value = if f.k_invariant() { Some(f.value(rho, 0.0)?) } else { None };
            out.reserve(psi.len() * theta.len());
            for &(th, wt) in &theta {
                let fv = match radial_value {
                    Some(v) => v,
                    None => f.value(rho, th)?,
                };
                if fv == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let wt = wt / (2.0 * PI);
                for &(ps, wp) in &psi {
                    let g = polar_node(rho, ps, th);
                    let (u, t) = lab.act(&g, x)?;
                    if !(u.is_finite() && t.is_finite()) || t == 0.0 {
                        return Err(KernelError::LeftChart(format!("node rho={rho} psi={ps} theta={th}")));
                    }
                    out.push((u - xu, t / xt - 1.0, fv * (c * wr * wt * wp)));
                }
            }
            Ok(out)
        })
        .collect();
    let mut nodes = Vec::new();
    for r in per_rho {
        nodes.extend(r?);
    }
    Ok(nodes)
}

/// `sum_q W_q e^{i (xi_{m1} w1_q + xi_{m2} w2_q)}` as four real products per
/// chunk; chunks are reduced in their fixed order.
pub fn assemble(nodes: &[(f64, f64, Complex64)], grid: &XiGrid, chunk: usize) -> Vec<Complex64> {
    let n = grid.n;
    let xi = grid.values();
    let partial: Vec<(DMatrix<f64>, DMatrix<f64>)> = nodes
        .par_chunks(chunk)
        .map(|ch| {
            let q = ch.len();
            let mut ar = DMatrix::<f64>::zeros(n, q);
            let mut ai = DMatrix::<f64>::zeros(n, q);
            let mut br = DMatrix::<f64>::zeros(q, n);
            let mut bi = DMatrix::<f64>::zeros(q, n);
            for (j, &(w1, w2, wt)) in ch.iter().enumerate() {
                for m in 0..n {
                    let e1 = wt * Complex64::from_polar(1.0, xi[m] * w1);
                    ar[(m, j)] = e1.re;
                    ai[(m, j)] = e1.im;
                    let (s, c) = (xi[m] * w2).sin_cos();
                    br[(j, m)] = c;
                    bi[(j, m)] = s;
                }
            }
            (&ar * &br - &ai * &bi, &ar * &bi + &ai * &br)
        })
        .collect();
    let mut re = DMatrix::<f64>::zeros(n, n);
    let mut im = DMatrix::<f64>::zeros(n, n);
    for (r, i) in &partial {
        re += r;
        im += i;
    }
    (0..n * n).map(|k| Complex64::new(re[(k / n, k % n)], im[(k / n, k % n)])).collect()
}

pub fn default_grid(lab: &KernelLab) -> XiGrid {
    XiGrid { xi_max: lab.cfg.xi_max, dxi: lab.cfg.dxi, n: lab.cfg.n_xi() }
}

pub fn symbol(lab: &KernelLab, f: &GroupFunction, x: &OshimaPoint, grid: &XiGrid) -> Result<SymbolGrid, KernelError> {
    if grid.n < 2 || !(grid.dxi > 0.0) {
        return Err(KernelError::InvalidArgument("xi grid needs n >= 2 and positive spacing".into()));
    }
    if !lab.atlas.in_box(&x.n, &x.t) {
        return Err(KernelError::LeftChart(format!("base point {x:?} outside the chart box")));
    }
    let nodes = symbol_nodes(lab, f, x, grid.xi_max.max(grid.xi(grid.n - 1).abs()))?;
    let abs_mass: f64 = nodes.iter().map(|n| n.2.norm()).sum();
    let half = PI / grid.dxi;
    let aliased: f64 = nodes.iter().filter(|n| n.0.abs() >= half || n.1.abs() >= half).map(|n| n.2.norm()).sum();
    let values = assemble(&nodes, grid, lab.cfg.chunk);
    Ok(SymbolGrid {
        x: x.clone(),
        xi_grid: grid.clone(),
        values,
        cutoff_spec: format!(
            "radial: 1 for |P| <= {r2}, C4 degree-9 step in 1 - exp(-|P|/sqrt2) to 0 at |P| = {r} (Killing norm)",
            r2 = lab.cfg.cutoff_inner * lab.cfg.cutoff_radius,
            r = lab.cfg.cutoff_radius
        ),
        abs_mass,
        nodes: nodes.len(),
        // `+ 0.0` turns an empty `-0.0` sum into `0.0`.
        alias_fraction: if abs_mass > 0.0 { aliased / abs_mass + 0.0 } else { 0.0 },
    })
}

impl SymbolGrid {
    pub fn at(&self, m1: usize, m2: usize) -> Complex64 {
        self.values[m1 * self.xi_grid.n + m2]
    }

    /// Grid values of a prescribed function of `xi`; used for controls.
    pub fn synthetic(x: OshimaPoint, grid: XiGrid, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let n = grid.n;
        let values = (0..n * n).map(|k| f(grid.xi(k / n), grid.xi(k % n))).collect();
        SymbolGrid { x, xi_grid: grid, values, cutoff_spec: "synthetic".into(), abs_mass: f64::NAN, nodes: 0, alias_fraction: 0.0 }
    }

    /// Scaled magnitude of the outermost frame of the grid.
    fn shell_error(&self) -> f64 {
        let n = self.xi_grid.n;
        let w = (n / 32).max(1);
        let mut acc = 0.0;
        for m1 in 0..n {
            for m2 in 0..n {
                let edge = m1.min(m2).min(n - 1 - m1).min(n - 1 - m2);
                if edge < w {
                    acc += self.at(m1, m2).norm();
                }
            }
        }
        acc * (self.xi_grid.dxi / (2.0 * PI)).powi(2)
    }
}

/// Inverse transform at a single `y` of the same chart.
pub fn kernel_from_symbol(grid: &SymbolGrid, y: &OshimaPoint) -> Result<KernelSample, KernelError> {
    let x = &grid.x;
    if x.t.len() != 1 || y.t.len() != 1 || y.n.len() != 1 {
        return Err(KernelError::InvalidArgument("SL(2) points have one n and one t coordinate".into()));
    }
    if x.t[0] == 0.0 {
        return Err(KernelError::InteriorRequired);
    }
    if x.chart != y.chart {
        return Err(KernelError::InvalidArgument(format!("y in chart {} but x in chart {}", y.chart, x.chart)));
    }
    let xt = x.t[0];
    let z1 = x.n[0] - y.n[0];
    let z2 = 1.0 - y.t[0] / xt;
    let g = &grid.xi_grid;
    let n = g.n;
    let e2: Vec<Complex64> = (0..n).map(|m| Complex64::from_polar(1.0, z2 * g.xi(m))).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for m1 in 0..n {
        let row: Complex64 = (0..n).map(|m2| grid.at(m1, m2) * e2[m2]).sum();
        acc += row * Complex64::from_polar(1.0, z1 * g.xi(m1));
    }
    let scale = (g.dxi / (2.0 * PI)).powi(2) / xt.abs();
    Ok(KernelSample {
        x: x.clone(),
        y: y.clone(),
        value: acc * scale,
        err_estimate: grid.shell_error() / xt.abs(),
        method: KernelMethod::FourierGrid,
        settings: format!("xi_max={} dxi={} n={} nodes={} alias_fraction={:.3e}", g.xi_max, g.dxi, g.n, grid.nodes, grid.alias_fraction),
    })
}

/// Inverse transform on the whole dual grid by 2D FFT.
pub fn kernel_grid(grid: &SymbolGrid) -> Result<KernelGrid, KernelError> {
    let x = &grid.x;
    if x.t.len() != 1 || x.t[0] == 0.0 {
        return Err(KernelError::InteriorRequired);
    }
    let g = &grid.xi_grid;
    let n = g.n;
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(n);
    let mut a = grid.values.clone();
    for row in a.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for m2 in 0..n {
        for m1 in 0..n {
            col[m1] = a[m1 * n + m2];
        }
        fft.process(&mut col);
        for m1 in 0..n {
            a[m1 * n + m2] = col[m1];
        }
    }
    let dz = g.dz();
    let half = (n / 2) as i64;
    let js: Vec<i64> = (-half..n as i64 - half).collect();
    let z: Vec<f64> = js.iter().map(|&j| j as f64 * dz).collect();
    let scale = (g.dxi / (2.0 * PI)).powi(2) / x.t[0].abs();
    let idx = |j: i64| j.rem_euclid(n as i64) as usize;
    let mut values = Vec::with_capacity(n * n);
    for (i1, &j1) in js.iter().enumerate() {
        for (i2, &j2) in js.iter().enumerate() {
            // xi_m = -xi_max + m dxi contributes the phase e^{-i z xi_max}.
            let phase = Complex64::from_polar(1.0, -(z[i1] + z[i2]) * g.xi_max);
            values.push(a[idx(j1) * n + idx(j2)] * phase * scale);
        }
    }
    Ok(KernelGrid { x: x.clone(), z, values, err_estimate: grid.shell_error() / x.t[0].abs() })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LacunaryReport {
    pub j: usize,
    pub violation: f64,
    pub r: Vec<f64>,
    /// `max_{xi_1} |M(xi_1, r)|` for each `r`.
    pub profile: Vec<f64>,
}

/// Step 0.05 over one period `[-pi/dxi, pi/dxi)` of the discrete transform.
pub fn default_r_grid(grid: &XiGrid) -> Vec<f64> {
    let half = PI / grid.dxi;
    (0..).map(|i| -half + 0.05 * i as f64).take_while(|r| *r < half).collect()
}

/// Partial transform `M(xi_1, r) = int e^{-i r xi_2} a(x, xi) dxi_2` on the grid;
/// returns `max_{r < -1} |M| / max |M|`.
pub fn lacunary_check(grid: &SymbolGrid, j: usize, r_grid: &[f64]) -> Result<LacunaryReport, KernelError> {
    if j != 2 {
        return Err(KernelError::InvalidArgument(format!("boundary index must be 2 for SL(2), got {j}")));
    }
    let g = &grid.xi_grid;
    let n = g.n;
    let profile: Vec<f64> = r_grid
        .par_iter()
        .map(|&r| {
            let e: Vec<Complex64> = (0..n).map(|m| Complex64::from_polar(g.dxi, -r * g.xi(m))).collect();
            (0..n)
                .map(|m1| (0..n).map(|m2| grid.at(m1, m2) * e[m2]).sum::<Complex64>().norm())
                .fold(0.0, f64::max)
        })
        .collect();
    let all = profile.iter().cloned().fold(0.0, f64::max);
    let bad = r_grid.iter().zip(&profile).filter(|(r, _)| **r < -1.0).map(|(_, p)| *p).fold(0.0, f64::max);
    let violation = if all > 0.0 { bad / all } else { 0.0 };
    Ok(LacunaryReport { j, violation, r: r_grid.to_vec(), profile })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel_lab::tests::lab;
    use crate::kernel_lab::{geometry, GroupFunctionSpec, KernelConfig};

    fn small() -> XiGrid {
        XiGrid { xi_max: 8.0, dxi: 0.5, n: 32 }
    }

    #[test]
    fn assemble_matches_direct_sum() {
        let nodes = vec![(0.1, -0.2, Complex64::new(0.3, 0.1)), (-0.05, 0.4, Complex64::new(0.7, 0.0)), (0.2, 0.2, Complex64::new(-0.1, 0.2))];
        let g = XiGrid { xi_max: 3.0, dxi: 0.5, n: 12 };
        let a = assemble(&nodes, &g, 2);
        for (m1, m2) in [(0, 0), (3, 7), (11, 5)] {
            let direct: Complex64 = nodes
                .iter()
                .map(|&(w1, w2, w)| w * Complex64::from_polar(1.0, g.xi(m1) * w1 + g.xi(m2) * w2))
                .sum();
            assert!((a[m1 * 12 + m2] - direct).norm() < 1e-13);
        }
    }

    #[test]
    fn zero_frequency_is_mass_and_bound_holds() {
        let lab = lab();
        let f = GroupFunction::new(&GroupFunctionSpec::heat(0.05), &lab.cfg).unwrap();
        let x = OshimaPoint::new("e", vec![0.1], vec![0.8]);
        let g = small();
        let s = symbol(&lab, &f, &x, &g).unwrap();
        let nodes = symbol_nodes(&lab, &f, &x, 8.0).unwrap();
        let mass: Complex64 = nodes.iter().map(|n| n.2).sum();
        // xi = 0 sits at m = n/2.
        assert!((s.at(16, 16) - mass).norm() < 1e-12);
        assert!(s.values.iter().all(|v| v.norm() <= s.abs_mass * (1.0 + 1e-12)));
    }

    #[test]
    fn fft_grid_matches_point_inverse() {
        let lab = lab();
        let f = GroupFunction::new(&GroupFunctionSpec::heat(0.1), &lab.cfg).unwrap();
        let x = OshimaPoint::new("e", vec![0.0], vec![1.0]);
        let s = symbol(&lab, &f, &x, &small()).unwrap();
        let kg = kernel_grid(&s).unwrap();
        for (i1, i2) in [(16, 16), (15, 17), (18, 14)] {
            let y = kg.y(i1, i2);
            let k = kernel_from_symbol(&s, &y).unwrap();
            assert!((k.value - kg.values[i1 * 32 + i2]).norm() < 1e-12 * (1.0 + k.value.norm()));
        }
    }

    #[test]
    fn synthetic_gaussian_is_not_lacunary() {
        let g = XiGrid { xi_max: 24.0, dxi: 0.375, n: 128 };
        let r = default_r_grid(&g);
        assert!(r[0] >= -PI / g.dxi && *r.last().unwrap() < PI / g.dxi);
        let s = SymbolGrid::synthetic(OshimaPoint::new("e", vec![0.0], vec![1.0]), g, |a, b| Complex64::new((-(a * a + b * b)).exp(), 0.0));
        let rep = lacunary_check(&s, 2, &r).unwrap();
        assert!(rep.violation > 0.1, "{}", rep.violation);
    }

    #[test]
    fn symbol_uses_cutoff_radius() {
        let lab = lab();
        let cfg = KernelConfig { n_rho: 8, n_psi: 8, n_theta: 4, ..KernelConfig::default() };
        let lab2 = KernelLab::new(lab.atlas.clone(), cfg).unwrap();
        let f = GroupFunction::new(&GroupFunctionSpec::heat(1.0), &lab2.cfg).unwrap();
        let x = OshimaPoint::new("e", vec![0.0], vec![1.0]);
        let nodes = symbol_nodes(&lab2, &f, &x, 8.0).unwrap();
        let max_d = nodes
            .iter()
            .map(|&(w1, w2, _)| geometry::dist(geometry::chart_e_point(w1, 1.0 + w2), Complex64::i()))
            .fold(0.0, f64::max);
        assert!(max_d <= lab2.cfg.cutoff_rho() + 1e-12);
    }

    #[test]
    fn angular_rules_grow_with_bandwidth() {
        let lab = lab();
        let f = GroupFunction::new(&GroupFunctionSpec::heat(1.0), &lab.cfg).unwrap();
        let x = OshimaPoint::new("e", vec![0.2], vec![0.7]);
        let lo = symbol_nodes(&lab, &f, &x, 4.0).unwrap().len();
        let hi = symbol_nodes(&lab, &f, &x, 32.0).unwrap().len();
        assert!(hi > 4 * lo, "{lo} {hi}");
        assert_eq!(periodic_nodes(0.0, 6), 16);
        assert_eq!(periodic_nodes(100.0, 8), 128);
    }

    #[test]
    fn alias_fraction_flags_coarse_dual_period() {
        let lab = lab();
        let f = GroupFunction::new(&GroupFunctionSpec::heat(1.0), &lab.cfg).unwrap();
        let x = OshimaPoint::new("e", vec![0.0], vec![0.8]);
        let fine = symbol(&lab, &f, &x, &XiGrid { xi_max: 4.0, dxi: 0.25, n: 32 }).unwrap();
        let coarse = symbol(&lab, &f, &x, &XiGrid { xi_max: 64.0, dxi: 4.0, n: 32 }).unwrap();
        assert!(fine.alias_fraction < 1e-6, "{}", fine.alias_fraction);
        assert!(coarse.alias_fraction > 0.05, "{}", coarse.alias_fraction);
    }
}
