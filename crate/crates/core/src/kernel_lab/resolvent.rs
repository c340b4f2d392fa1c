//! Resolvent kernels `R_{alpha,lambda} = Gamma(alpha)^{-1} int_0^inf e^{-lambda tau} tau^{alpha-1} h_tau dtau`.
//!
//! Head `[0, 1]` in `tau = sigma^2` with panels refined geometrically around
//! `sigma = r`; tail `[1, T]` in unit panels, `T` chosen so that both
//! `e^{-(Re lambda - omega)(T - 1)}` and the far-field peak are covered.

use super::fiber::fiber_kernel;
use super::geometry::{dist_origin, M2};
use super::heat::heat_kernel_radial;
use super::quad::gl;
use super::symbol::{KernelMethod, KernelSample};
use super::{GroupFunction, GroupFunctionSpec, KernelError, KernelLab};
use crate::oshima_atlas::OshimaPoint;
use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::gamma::gamma;

const PANEL: usize = 24;

fn check(alpha: f64, lambda: Complex64, omega: f64) -> Result<(), KernelError> {
    if !(alpha > 0.0) {
        return Err(KernelError::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    if !(lambda.re > omega) {
        return Err(KernelError::DivergentTail { re_lambda: lambda.re, omega });
    }
    Ok(())
}

/// `R_{alpha,lambda}(r)` for the heat semigroup of the hyperbolic plane.
pub fn group_resolvent_radial(alpha: f64, lambda: Complex64, r: f64, omega: f64) -> Result<Complex64, KernelError> {
    resolvent_radial_with(alpha, lambda, r, omega, PANEL)
}

/// Value and the change against a rule with two thirds of the nodes per panel.
pub fn group_resolvent_estimate(alpha: f64, lambda: Complex64, r: f64, omega: f64) -> Result<(Complex64, f64), KernelError> {
    let v = resolvent_radial_with(alpha, lambda, r, omega, PANEL)?;
    let coarse = resolvent_radial_with(alpha, lambda, r, omega, 2 * PANEL / 3)?;
    Ok((v, (v - coarse).norm()))
}

fn resolvent_radial_with(alpha: f64, lambda: Complex64, r: f64, omega: f64, panel: usize) -> Result<Complex64, KernelError> {
    check(alpha, lambda, omega)?;
    if r <= 0.0 && alpha <= 1.0 {
        return Err(KernelError::InvalidArgument("resolvent is singular on the diagonal for alpha <= 1".into()));
    }
    let mut brk = vec![0.0];
    let mut b = if r > 0.0 { r / 4.0 } else { 1e-8 };
    while b < 1.0 {
        brk.push(b);
        b *= 4.0;
    }
    brk.push(1.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for w in brk.windows(2) {
        for (s, ws) in gl(panel, w[0], w[1]) {
            let tau = s * s;
            let h = heat_kernel_radial(tau, r)?;
            if h != 0.0 {
                acc += (-lambda * tau).exp() * (ws * 2.0 * s.powf(2.0 * alpha - 1.0) * h);
            }
        }
    }
    let t_end = 1.0 + 23.0 / (lambda.re - omega) + 3.0 * r / (lambda.re + 0.25).sqrt();
    let panels = (t_end - 1.0).ceil().max(1.0) as usize;
    let width = (t_end - 1.0) / panels as f64;
    for p in 0..panels {
        let a = 1.0 + p as f64 * width;
        for (tau, wt) in gl(panel, a, a + width) {
            let h = heat_kernel_radial(tau, r)?;
            if h != 0.0 {
                acc += (-lambda * tau).exp() * (wt * tau.powf(alpha - 1.0) * h);
            }
        }
    }
    Ok(acc / gamma(alpha))
}

pub fn group_resolvent_kernel(alpha: f64, lambda: Complex64, g: &M2, omega: f64) -> Result<Complex64, KernelError> {
    group_resolvent_radial(alpha, lambda, dist_origin(g), omega)
}

/// Radial profile tabulated on a logarithmic grid, linear in `log r`.
#[derive(Clone, Debug)]
pub struct LogRadialTable {
    log_r: Vec<f64>,
    values: Vec<Complex64>,
}

impl LogRadialTable {
    pub const R_MIN: f64 = 1e-6;
    pub const POINTS_PER_DECADE: usize = 32;

    pub fn build(alpha: f64, lambda: Complex64, omega: f64, r_max: f64) -> Result<Self, KernelError> {
        check(alpha, lambda, omega)?;
        let (lo, hi) = (Self::R_MIN.ln(), r_max.max(1.0).ln());
        let n = ((hi - lo) / std::f64::consts::LN_10 * Self::POINTS_PER_DECADE as f64).ceil() as usize + 1;
        let log_r: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
        let values = log_r
            .par_iter()
            .map(|&l| group_resolvent_radial(alpha, lambda, l.exp(), omega))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LogRadialTable { log_r, values })
    }

    /// Clamped below `R_MIN`, zero past the last node.
    pub fn eval(&self, r: f64) -> Complex64 {
        let l = r.max(Self::R_MIN).ln();
        let n = self.log_r.len();
        if l > self.log_r[n - 1] {
            return Complex64::new(0.0, 0.0);
        }
        let i = self.log_r.partition_point(|v| *v <= l).clamp(1, n - 1);
        let s = (l - self.log_r[i - 1]) / (self.log_r[i] - self.log_r[i - 1]);
        self.values[i - 1] + (self.values[i] - self.values[i - 1]) * s
    }
}

/// `R^gamma_{alpha,lambda}(x, y)`: the Laplace transform of the semigroup
/// kernels, evaluated through the fiber integral of `c R_{alpha,lambda}`.
pub fn resolvent_kernel(
    lab: &KernelLab,
    alpha: f64,
    lambda: Complex64,
    x: &OshimaPoint,
    y: &OshimaPoint,
    use_cutoff: bool,
) -> Result<KernelSample, KernelError> {
    let mut v = resolvent_kernels(lab, alpha, lambda, x, std::slice::from_ref(y), use_cutoff)?;
    Ok(v.remove(0))
}

/// [`resolvent_kernel`] at several `y`, sharing one radial table.
pub fn resolvent_kernels(
    lab: &KernelLab,
    alpha: f64,
    lambda: Complex64,
    x: &OshimaPoint,
    ys: &[OshimaPoint],
    use_cutoff: bool,
) -> Result<Vec<KernelSample>, KernelError> {
    let omega = lab.cfg.omega_est.unwrap_or(0.0);
    check(alpha, lambda, omega)?;
    let f = GroupFunction::new(&GroupFunctionSpec::resolvent(alpha, lambda), &lab.cfg)?;
    ys.iter()
        .map(|y| {
            let mut k = fiber_kernel(lab, &f, x, y, use_cutoff)?;
            k.method = KernelMethod::LaplaceOfSemigroup;
            k.settings = format!("{}; log-radial table {} pts/decade, omega_est={omega}", k.settings, LogRadialTable::POINTS_PER_DECADE);
            Ok(k)
        })
        .collect()
}
