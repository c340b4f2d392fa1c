//! Heat kernel of the hyperbolic plane (curvature -1, generator the
//! Laplace–Beltrami operator):
//!
//! `h_tau(r) = sqrt(2) e^{-tau/4} / (4 pi tau)^{3/2} int_r^inf s e^{-s^2/4tau} / sqrt(cosh s - cosh r) ds`.

use super::geometry::{dist_origin, M2};
use super::KernelError;
use std::f64::consts::PI;

/// Integrand after `s = r + v^2`, using
/// `cosh s - cosh r = 2 sinh((s + r)/2) sinh((s - r)/2)`.
fn integrand(tau: f64, r: f64, v: f64) -> f64 {
    let s = r + v * v;
    let half = 0.5 * v * v;
    let denom_sq = 2.0 * (0.5 * (s + r)).sinh() * half.sinh();
    let lead = -(s * s - r * r) / (4.0 * tau);
    if v == 0.0 {
        return if r > 0.0 { 2.0 * r / r.sinh().sqrt() } else { 0.0 };
    }
    2.0 * v * s * lead.exp() / denom_sq.sqrt()
}

/// `h_tau(r)`.
pub fn heat_kernel_radial(tau: f64, r: f64) -> Result<f64, KernelError> {
    if !(tau > 0.0) || !r.is_finite() || r < 0.0 {
        return Err(KernelError::InvalidArgument(format!("heat kernel at tau={tau}, r={r}")));
    }
    let pref = 2f64.sqrt() * (-tau / 4.0).exp() / (4.0 * PI * tau).powf(1.5) * (-(r * r) / (4.0 * tau)).exp();
    if pref == 0.0 {
        return Ok(0.0);
    }
    // s^2 - r^2 >= 4 tau * 80 beyond v_max.
    let v_max = ((r * r + 320.0 * tau).sqrt() - r).sqrt();
    let scale = (0..=8)
        .map(|i| integrand(tau, r, v_max * (i as f64 + 0.5) / 9.0).abs())
        .fold(0.0, f64::max)
        * v_max;
    let out = quadrature::double_exponential::integrate(|v| integrand(tau, r, v), 0.0, v_max, 1e-14 * scale.max(1e-300));
    let value = pref * out.integral;
    let err = pref * out.error_estimate;
    if !(value.is_finite()) || err > 1e-9 * value.abs() && value.abs() > 1e-280 {
        return Err(KernelError::QuadratureFail { value, error: err });
    }
    Ok(value)
}

/// `h_tau(d(o, g o))` for `g` in SL(2,R).
pub fn heat_kernel_group(tau: f64, g: &M2) -> Result<f64, KernelError> {
    heat_kernel_radial(tau, dist_origin(g))
}
