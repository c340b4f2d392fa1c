//! Product rules for Haar measure in the exponential chart
//! `g = exp(P(rho, psi)) k_theta`, `dg = sinh(rho) drho dpsi dtheta / 2pi`.

use gauss_quad::GaussLegendre;
use std::f64::consts::PI;
use std::num::NonZeroUsize;

/// Gauss–Legendre nodes and weights on `[a, b]`.
pub fn gl(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(n.max(1)).unwrap());
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    rule.as_node_weight_pairs().iter().map(|&(x, w)| (c + h * x, h * w)).collect()
}

/// Periodic trapezoid on `[0, 2pi)`.
pub fn trapezoid_circle(n: usize) -> Vec<(f64, f64)> {
    let h = 2.0 * PI / n as f64;
    (0..n).map(|i| (i as f64 * h, h)).collect()
}

#[derive(Clone, Debug)]
pub struct HaarRule {
    /// `(rho, weight * sinh(rho))`.
    pub rho: Vec<(f64, f64)>,
    pub psi: Vec<(f64, f64)>,
    /// `(theta, weight / 2pi)`.
    pub theta: Vec<(f64, f64)>,
    pub rho_max: f64,
}

impl HaarRule {
    /// `theta_half = None` integrates the full circle with the trapezoid rule;
    /// otherwise Gauss–Legendre on `[-theta_half, theta_half]`.
    pub fn new(rho_max: f64, theta_half: Option<f64>, n_rho: usize, n_psi: usize, n_theta: usize) -> Self {
        Self::on_range(0.0, rho_max, theta_half, n_rho, n_psi, n_theta)
    }

    pub fn on_range(rho_min: f64, rho_max: f64, theta_half: Option<f64>, n_rho: usize, n_psi: usize, n_theta: usize) -> Self {
        Self::with_breaks(&[rho_min, rho_max], theta_half, n_rho, n_psi, n_theta)
    }

    /// `n_rho` Gauss–Legendre nodes on each radial panel between successive breaks.
    pub fn with_breaks(breaks: &[f64], theta_half: Option<f64>, n_rho: usize, n_psi: usize, n_theta: usize) -> Self {
        let rho = breaks
            .windows(2)
            .filter(|w| w[1] > w[0])
            .flat_map(|w| gl(n_rho, w[0], w[1]))
            .map(|(r, w)| (r, w * r.sinh()))
            .collect();
        let rho_max = *breaks.last().unwrap();
        let theta = match theta_half {
            None => trapezoid_circle(n_theta),
            Some(h) => gl(n_theta, -h, h),
        }
        .into_iter()
        .map(|(t, w)| (t, w / (2.0 * PI)))
        .collect();
        HaarRule { rho, psi: trapezoid_circle(n_psi), theta, rho_max }
    }

    pub fn len(&self) -> usize {
        self.rho.len() * self.psi.len() * self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
