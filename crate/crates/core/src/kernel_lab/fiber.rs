//! Kernels by integrating over the fiber `{g : g x = y} = y_G K x_G^{-1}`:
//! `K(x, y) = J(y) int_K (c f)(y_G k x_G^{-1}) dk`, `J(y) = 1/y_t^2`.
//! Zero when `x` and `y` lie in different open orbits.

use super::geometry::{area_density, inv2, rot};
use super::symbol::{KernelMethod, KernelSample};
use super::{GroupFunction, KernelError, KernelLab};
use crate::oshima_atlas::OshimaPoint;
use num_complex::Complex64;
use std::f64::consts::PI;

pub fn fiber_kernel(
    lab: &KernelLab,
    f: &GroupFunction,
    x: &OshimaPoint,
    y: &OshimaPoint,
    use_cutoff: bool,
) -> Result<KernelSample, KernelError> {
    let xg = lab.point_group(x)?;
    let yg = lab.point_group(y)?;
    if x.chart != y.chart {
        return Err(KernelError::InvalidArgument(format!("y in chart {} but x in chart {}", y.chart, x.chart)));
    }
    let n = lab.cfg.n_theta_fiber;
    let settings = format!("fiber trapezoid n_theta={n} cutoff={use_cutoff}");
    let sample = |value, err_estimate| KernelSample {
        x: x.clone(),
        y: y.clone(),
        value,
        err_estimate,
        method: KernelMethod::FiberIntegral,
        settings: settings.clone(),
    };
    if x.t[0].signum() != y.t[0].signum() {
        return Ok(sample(Complex64::new(0.0, 0.0), 0.0));
    }
    let xi = inv2(&xg);
    let mut vals = Vec::with_capacity(n);
    for i in 0..n {
        let g = yg * rot(2.0 * PI * i as f64 / n as f64) * xi;
        let rho = super::geometry::dist_origin(&g);
        let c = if use_cutoff { lab.cfg.cutoff(rho) } else { 1.0 };
        vals.push(if c == 0.0 { Complex64::new(0.0, 0.0) } else { f.value_at(&g)? * c });
    }
    let full: Complex64 = vals.iter().sum::<Complex64>() / n as f64;
    let half: Complex64 = vals.iter().step_by(2).sum::<Complex64>() / (n / 2).max(1) as f64;
    let j = area_density(y.t[0]);
    Ok(sample(full * j, (full - half).norm() * j))
}
