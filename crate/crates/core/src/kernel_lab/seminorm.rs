//! Weighted `L^1` seminorms `int |dL(X^a) f| e^{kappa |g|} dg` and the
//! integration-by-parts identity `int f1 dL(X) f2 = -int dL(X) f1 f2`,
//! with `dL(X) f(g) = d/ds f(e^{-sX} g)` by central differences.

use super::geometry::{exp_traceless, polar_node, M2};
use super::quad::HaarRule;
use super::{g_norm, FunctionKind, GroupFunction, KernelError, KernelLab};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Shell `[0.9 R, R]` share above which a truncated integral is rejected.
pub const SHELL_LIMIT: f64 = 1e-2;

fn basis(lab: &KernelLab, word: &[usize]) -> Result<Vec<M2>, KernelError> {
    word.iter()
        .map(|&i| {
            let b = lab.atlas.s.algebra_basis.get(i).ok_or_else(|| {
                KernelError::InvalidArgument(format!("basis index {i} out of range 0..{}", lab.atlas.s.dim))
            })?;
            Ok(M2::new(b[(0, 0)], b[(0, 1)], b[(1, 0)], b[(1, 1)]))
        })
        .collect()
}

/// Finite-difference step adapted to the length scale of `f`.
pub fn fd_step(f: &GroupFunction) -> f64 {
    let scale = match f.spec.kind {
        FunctionKind::GaussianBump => f.spec.width.unwrap(),
        FunctionKind::Heat => f.spec.tau.unwrap().sqrt().min(1.0),
        _ => 1.0,
    };
    1e-3 * scale
}

/// `dL(X_{w_1}) ... dL(X_{w_n}) f (g)`.
pub fn derivative(f: &dyn Fn(&M2) -> Result<Complex64, KernelError>, xs: &[M2], h: f64, g: &M2) -> Result<Complex64, KernelError> {
    match xs.split_first() {
        None => f(g),
        Some((x, rest)) => {
            let fwd = derivative(f, rest, h, &(exp_traceless(&(x * -h)) * g))?;
            let bwd = derivative(f, rest, h, &(exp_traceless(&(x * h)) * g))?;
            Ok((fwd - bwd) / (2.0 * h))
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SeminormReport {
    pub value: f64,
    pub shell_fraction: f64,
    pub rho_max: f64,
}

fn rules(lab: &KernelLab, rho_max: f64, theta_half: Option<f64>) -> (HaarRule, HaarRule) {
    let c = &lab.cfg;
    let nt = 2 * c.n_theta;
    (
        HaarRule::on_range(0.0, 0.9 * rho_max, theta_half, c.n_rho, c.n_psi, nt),
        HaarRule::on_range(0.9 * rho_max, rho_max, theta_half, c.n_rho / 2 + 1, c.n_psi, nt),
    )
}

fn integrate<F>(rule: &HaarRule, f: F) -> Result<Complex64, KernelError>
where
    F: Fn(&M2) -> Result<Complex64, KernelError> + Sync,
{
    let parts = rule
        .rho
        .par_iter()
        .map(|&(rho, wr)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(theta, wt) in &rule.theta {
                for &(psi, wp) in &rule.psi {
                    acc += f(&polar_node(rho, psi, theta))? * (wr * wt * wp);
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>, KernelError>>()?;
    Ok(parts.iter().sum())
}

fn shell_guard(inner: f64, shell: f64) -> Result<f64, KernelError> {
    let frac = if inner + shell > 0.0 { shell / (inner + shell) } else { 0.0 };
    if frac > SHELL_LIMIT {
        return Err(KernelError::TruncationDominated(frac));
    }
    Ok(frac)
}

fn theta_range(fs: &[&GroupFunction]) -> Option<f64> {
    // Derivatives of a k-concentrated function stay concentrated; widen slightly.
    let mut half: f64 = 0.0;
    for f in fs {
        half = half.max(f.theta_half()? * 1.2);
    }
    Some(half.min(std::f64::consts::PI))
}

pub fn schwartz_seminorm(lab: &KernelLab, f: &GroupFunction, kappa: f64, word: &[usize]) -> Result<SeminormReport, KernelError> {
    if !(kappa >= 0.0) {
        return Err(KernelError::InvalidArgument(format!("kappa must be non-negative, got {kappa}")));
    }
    let xs = basis(lab, word)?;
    let h = fd_step(f);
    let rho_max = f.rho_support(kappa);
    let (inner, shell) = rules(lab, rho_max, theta_range(&[f]));
    let eval = |g: &M2| f.value_at(g);
    let integrand = |g: &M2| Ok(Complex64::new(derivative(&eval, &xs, h, g)?.norm() * (kappa * g_norm(g)).exp(), 0.0));
    let a = integrate(&inner, integrand)?.re;
    let b = integrate(&shell, integrand)?.re;
    let shell_fraction = shell_guard(a, b)?;
    Ok(SeminormReport { value: a + b, shell_fraction, rho_max })
}

/// Second factor of the integration-by-parts check.
pub enum TestFunction<'a> {
    One,
    Group(&'a GroupFunction),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct IbpReport {
    /// `int f1 dL(X) f2`.
    pub lhs: Complex64,
    /// `int dL(X) f1 f2`.
    pub rhs: Complex64,
    /// `|lhs + rhs|` over the sum of the absolute integrals.
    pub residual: f64,
}

pub fn integration_by_parts_check(lab: &KernelLab, f1: &GroupFunction, f2: TestFunction, x: usize) -> Result<IbpReport, KernelError> {
    let xs = basis(lab, &[x])?;
    let (rho_max, theta, h) = match f2 {
        TestFunction::One => (f1.rho_support(0.0), theta_range(&[f1]), fd_step(f1)),
        TestFunction::Group(g2) => (
            f1.rho_support(0.0).min(g2.rho_support(0.0)),
            match (f1.theta_half(), g2.theta_half()) {
                (Some(_), None) => theta_range(&[f1]),
                (None, Some(_)) => theta_range(&[g2]),
                _ => theta_range(&[f1, g2]),
            },
            fd_step(f1).min(fd_step(g2)),
        ),
    };
    let e1 = |g: &M2| f1.value_at(g);
    let e2 = |g: &M2| match f2 {
        TestFunction::One => Ok(Complex64::new(1.0, 0.0)),
        TestFunction::Group(g2) => g2.value_at(g),
    };
    let (inner, shell) = rules(lab, rho_max, theta);
    let mut lhs = Complex64::new(0.0, 0.0);
    let mut rhs = Complex64::new(0.0, 0.0);
    let mut abs = 0.0;
    let mut abs_shell = 0.0;
    for (k, rule) in [inner, shell].iter().enumerate() {
        let l = integrate(rule, |g| Ok(e1(g)? * derivative(&e2, &xs, h, g)?))?;
        let r = integrate(rule, |g| Ok(derivative(&e1, &xs, h, g)? * e2(g)?))?;
        let a = integrate(rule, |g| {
            Ok(Complex64::new((e1(g)? * derivative(&e2, &xs, h, g)?).norm() + (derivative(&e1, &xs, h, g)? * e2(g)?).norm(), 0.0))
        })?
        .re;
        lhs += l;
        rhs += r;
        if k == 0 {
            abs += a;
        } else {
            abs_shell += a;
        }
    }
    shell_guard(abs, abs_shell)?;
    let total = abs + abs_shell;
    let residual = if total > 0.0 { (lhs + rhs).norm() / total } else { 0.0 };
    Ok(IbpReport { lhs, rhs, residual })
}
