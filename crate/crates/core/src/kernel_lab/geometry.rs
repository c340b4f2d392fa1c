//! SL(2,R) specifics: chart points as points of the upper half-plane,
//! hyperbolic distance (curvature -1), the exponential chart of `G` and the
//! coordinate area density.

use nalgebra::Matrix2;
use num_complex::Complex64;

pub type M2 = Matrix2<f64>;

/// Möbius action of a 2x2 matrix on the upper half-plane.
pub fn mobius(g: &M2, z: Complex64) -> Complex64 {
    (z * g[(0, 0)] + g[(0, 1)]) / (z * g[(1, 0)] + g[(1, 1)])
}

pub fn rot(theta: f64) -> M2 {
    let (s, c) = theta.sin_cos();
    M2::new(c, s, -s, c)
}

/// `exp(P)` with `d(o, exp(P) o) = rho` in the geodesic direction `psi`.
pub fn exp_p(rho: f64, psi: f64) -> M2 {
    let r = rot(psi / 2.0);
    r.transpose() * M2::new((rho / 2.0).exp(), 0.0, 0.0, (-rho / 2.0).exp()) * r
}

/// Node `exp(P(rho, psi)) k_theta` of the exponential chart of `G`.
pub fn polar_node(rho: f64, psi: f64, theta: f64) -> M2 {
    exp_p(rho, psi) * rot(theta)
}

/// Hyperbolic distance `d(o, g o)` from `cosh d = tr(g g^T) / 2`.
pub fn dist_origin(g: &M2) -> f64 {
    let c = 0.5 * (g * g.transpose()).trace();
    c.max(1.0).acosh()
}

/// Angle of the orthogonal polar factor (the same for `g = S k` and `g = k S`).
pub fn polar_angle(g: &M2) -> f64 {
    (g[(0, 1)] - g[(1, 0)]).atan2(g[(0, 0)] + g[(1, 1)])
}

pub fn dist(z: Complex64, w: Complex64) -> f64 {
    let num = (z - w).norm_sqr();
    (1.0 + num / (2.0 * z.im * w.im)).max(1.0).acosh()
}

/// Chart-`e` coordinates `(u, |t|)` of a point of the standard model.
/// With `x = n_u a_t o` one has `-1/z = -u + i|t|`.
pub fn chart_e_coords(z: Complex64) -> (f64, f64) {
    let w = -z.inv();
    (-w.re, w.im)
}

pub fn chart_e_point(u: f64, t_abs: f64) -> Complex64 {
    -(Complex64::new(-u, t_abs)).inv()
}

/// Group element `n_u a_{|t|}` (chart `e`).
pub fn na(u: f64, t_abs: f64) -> M2 {
    let s = t_abs.sqrt();
    M2::new(1.0, 0.0, u, 1.0) * M2::new(1.0 / s, 0.0, 0.0, s)
}

/// Coordinate area density of the chart `(u, t)`: `dA = du dt / t^2`.
pub fn area_density(t: f64) -> f64 {
    1.0 / (t * t)
}

/// `exp(X)` for traceless `X`: `cosh(m) I + sinh(m)/m X`, `m^2 = -det X`.
pub fn exp_traceless(x: &M2) -> M2 {
    let m2 = -x.determinant();
    let (c, s) = if m2 >= 0.0 {
        let m = m2.sqrt();
        (m.cosh(), if m > 1e-8 { m.sinh() / m } else { 1.0 + m2 / 6.0 })
    } else {
        let m = (-m2).sqrt();
        (m.cos(), if m > 1e-8 { m.sin() / m } else { 1.0 + m2 / 6.0 })
    };
    M2::identity() * c + x * s
}

pub fn inv2(g: &M2) -> M2 {
    let det = g.determinant();
    M2::new(g[(1, 1)], -g[(0, 1)], -g[(1, 0)], g[(0, 0)]) / det
}
