//! Heat semigroup kernels and their asymptotics.

use super::fiber::fiber_kernel;
use super::fits::{fit, EstimateFit, FitModel};
use super::geometry::{exp_p, mobius};
use super::quad::{gl, trapezoid_circle};
use super::symbol::{default_grid, kernel_from_symbol, kernel_grid, symbol, KernelSample};
use super::{GroupFunction, GroupFunctionSpec, KernelError, KernelLab};
use crate::oshima_atlas::OshimaPoint;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// `S^gamma_tau(x, y)` through the symbol of `c h_tau`.
pub fn semigroup_kernel(lab: &KernelLab, tau: f64, x: &OshimaPoint, y: &OshimaPoint) -> Result<KernelSample, KernelError> {
    let f = GroupFunction::new(&GroupFunctionSpec::heat(tau), &lab.cfg)?;
    let s = symbol(lab, &f, x, &default_grid(lab))?;
    kernel_from_symbol(&s, y)
}

/// `max |A~(x, z)|` over the dual grid and the given base points.
pub fn sup_kernel(lab: &KernelLab, tau: f64, xs: &[OshimaPoint]) -> Result<f64, KernelError> {
    let f = GroupFunction::new(&GroupFunctionSpec::heat(tau), &lab.cfg)?;
    let mut sup: f64 = 0.0;
    for x in xs {
        let kg = kernel_grid(&symbol(lab, &f, x, &default_grid(lab))?)?;
        let m = kg.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        sup = sup.max(m * x.t[0].abs());
    }
    Ok(sup)
}

pub fn default_blowup_taus() -> Vec<f64> {
    vec![0.02, 0.03, 0.05, 0.1, 0.2, 0.5, 1.0]
}

pub fn default_box_points() -> Vec<OshimaPoint> {
    vec![
        OshimaPoint::new("e", vec![0.0], vec![0.8]),
        OshimaPoint::new("e", vec![0.25], vec![0.7]),
        OshimaPoint::new("e", vec![-0.25], vec![1.25]),
    ]
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SupSeries {
    pub tau: Vec<f64>,
    pub sup: Vec<f64>,
    pub fit: EstimateFit,
}

/// Fit of `sup |A~| ~ tau^{-p}` as `tau -> 0`.
pub fn tau_blowup(lab: &KernelLab, taus: &[f64], xs: &[OshimaPoint]) -> Result<SupSeries, KernelError> {
    let sup = taus.iter().map(|&t| sup_kernel(lab, t, xs)).collect::<Result<Vec<_>, _>>()?;
    let fit = fit(FitModel::TauBlowup, taus, &sup);
    Ok(SupSeries { tau: taus.to_vec(), sup, fit })
}

/// Growth rate `omega >= 0` of `sup |A~| <= c e^{omega tau}` on `taus`.
pub fn fit_omega(lab: &KernelLab, taus: &[f64], xs: &[OshimaPoint]) -> Result<(f64, SupSeries), KernelError> {
    let sup = taus.iter().map(|&t| sup_kernel(lab, t, xs)).collect::<Result<Vec<_>, _>>()?;
    let fit = fit(FitModel::ExpDecay, taus, &sup);
    let omega = (-fit.parameters[1]).max(0.0);
    Ok((omega, SupSeries { tau: taus.to_vec(), sup, fit }))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DecaySeries {
    pub t: Vec<f64>,
    pub kernel: Vec<f64>,
    /// `d log|K| / d log t` between successive samples.
    pub slopes: Vec<f64>,
}

/// `|K_tau(x, y)|` for `x = (u, t)`, `t` running through `ts`, `y` fixed.
pub fn boundary_decay(lab: &KernelLab, tau: f64, u: f64, ts: &[f64], y: &OshimaPoint) -> Result<DecaySeries, KernelError> {
    let f = GroupFunction::new(&GroupFunctionSpec::heat(tau), &lab.cfg)?;
    let kernel = ts
        .iter()
        .map(|&t| {
            let x = OshimaPoint::new(&y.chart, vec![u], vec![t]);
            Ok(fiber_kernel(lab, &f, &x, y, false)?.value.norm())
        })
        .collect::<Result<Vec<_>, KernelError>>()?;
    let slopes = (1..ts.len()).map(|i| (kernel[i] / kernel[i - 1]).ln() / (ts[i] / ts[i - 1]).ln()).collect();
    Ok(DecaySeries { t: ts.to_vec(), kernel, slopes })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CompositionCheck {
    pub direct: f64,
    pub composed: f64,
    pub relative: f64,
}

/// `K_{t1 + t2}(x, y)` against `int K_{t1}(x, z) K_{t2}(z, y) dz` over the
/// orbit of `x`, in geodesic polar coordinates around `x`.
pub fn composition_check(lab: &KernelLab, t1: f64, t2: f64, x: &OshimaPoint, y: &OshimaPoint) -> Result<CompositionCheck, KernelError> {
    let f1 = GroupFunction::new(&GroupFunctionSpec::heat(t1), &lab.cfg)?;
    let f2 = GroupFunction::new(&GroupFunctionSpec::heat(t2), &lab.cfg)?;
    let f12 = GroupFunction::new(&GroupFunctionSpec::heat(t1 + t2), &lab.cfg)?;
    let direct = fiber_kernel(lab, &f12, x, y, false)?.value.re;
    let xg = lab.point_group(x)?;
    let sign = x.t[0].signum();
    let s_max = f1.rho_support(0.0) + 2.0 * super::geometry::dist_origin(&xg);
    let radial = gl(80, 0.0, s_max);
    let ang = trapezoid_circle(64);
    let parts = radial
        .par_iter()
        .map(|&(s, ws)| {
            let mut acc = 0.0;
            for &(b, wb) in &ang {
                let z = lab.from_model(&x.chart, sign, mobius(&(xg * exp_p(s, b)), Complex64::i()))?;
                let k1 = fiber_kernel(lab, &f1, x, &z, false)?.value.re;
                let k2 = fiber_kernel(lab, &f2, &z, y, false)?.value.re;
                // dz_u dz_t = t^2 dA
                acc += wb * k1 * k2 * z.t[0] * z.t[0];
            }
            Ok(ws * s.sinh() * acc)
        })
        .collect::<Result<Vec<f64>, KernelError>>()?;
    let composed: f64 = parts.iter().sum();
    Ok(CompositionCheck { direct, composed, relative: ((composed - direct) / direct).abs() })
}
