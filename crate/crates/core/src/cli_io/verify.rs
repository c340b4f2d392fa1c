//! Invariant suites behind `okl verify`. Each check records its measured value
//! next to the threshold it is held to; random samples come from a seeded
//! ChaCha stream so reports are reproducible.

use super::output::Table;
use super::{CliError, RunConfig};
use crate::decompositions::{adjoint_coefficients, iwasawa_kan, iwasawa_nak};
use crate::kernel_lab::heat::heat_kernel_radial;
use crate::kernel_lab::quad::gl;
use crate::kernel_lab::seminorm::{integration_by_parts_check, schwartz_seminorm, TestFunction};
use crate::kernel_lab::symbol::{default_grid, default_r_grid, kernel_from_symbol, kernel_grid, lacunary_check, symbol};
use crate::kernel_lab::{geometry, GroupFunction, GroupFunctionSpec, KernelLab};
use crate::lie_structure::StructureData;
use crate::linalg::{bracket, expm, frob, inv, Mat};
use crate::oshima_atlas::{signature, Atlas, OneParameter, OshimaPoint};
use crate::vector_fields::{coordinate_increments, flow_increment, fundamental_vf, gamma_matrix};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const SUITES: [&str; 5] = ["structure", "decomp", "atlas", "vf", "kernel"];

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "==")]
    Equal,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, value: f64, comparison: Comparison, threshold: f64) -> Self {
        let pass = match comparison {
            Comparison::AtMost => value <= threshold,
            Comparison::AtLeast => value >= threshold,
            Comparison::Equal => value == threshold,
        };
        Check { name: name.to_string(), value, threshold, comparison, pass }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tables: Vec<(String, Table)>,
}

impl SuiteReport {
    fn new(suite: &str, checks: Vec<Check>, tables: Vec<(String, Table)>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        SuiteReport { suite: suite.into(), pass, checks, skipped: None, tables }
    }

    fn skipped(suite: &str, why: String) -> Self {
        SuiteReport { suite: suite.into(), pass: true, checks: vec![], skipped: Some(why), tables: vec![] }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct VerifyReport {
    pub group: String,
    pub suite: String,
    pub pass: bool,
    pub suites: Vec<SuiteReport>,
}

impl VerifyReport {
    /// One line per check.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for r in &self.suites {
            if let Some(why) = &r.skipped {
                s.push_str(&format!("SKIP {}: {why}\n", r.suite));
                continue;
            }
            for c in &r.checks {
                let op = match c.comparison {
                    Comparison::AtMost => "<=",
                    Comparison::AtLeast => ">=",
                    Comparison::Equal => "==",
                };
                s.push_str(&format!(
                    "{} {}.{}: {:.3e} {op} {:.3e}\n",
                    if c.pass { "PASS" } else { "FAIL" },
                    r.suite,
                    c.name,
                    c.value,
                    c.threshold
                ));
            }
        }
        let (n, bad) = self
            .suites
            .iter()
            .flat_map(|r| &r.checks)
            .fold((0, 0), |(n, b), c| (n + 1, b + usize::from(!c.pass)));
        s.push_str(&format!("{}: {} checks, {bad} failed ({} {})\n", if self.pass { "PASS" } else { "FAIL" }, n, self.suite, self.group));
        s
    }
}

pub fn run(cfg: &RunConfig, suite: &str) -> Result<VerifyReport, CliError> {
    let names: Vec<&str> = match suite {
        "all" => SUITES.to_vec(),
        s if SUITES.contains(&s) => vec![s],
        s => return Err(CliError::Config(format!("unknown suite {s:?} (expected one of {SUITES:?} or all)"))),
    };
    let atlas = Atlas::for_group(&cfg.group, cfg.atlas_config())?;
    let mut suites = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1000 * i as u64 + 1));
        let r = match *name {
            "structure" => structure_suite(cfg, &atlas.s, &mut rng),
            "decomp" => decomp_suite(cfg, &atlas.s, &mut rng)?,
            "atlas" => atlas_suite(cfg, &atlas, &mut rng)?,
            "vf" => vf_suite(cfg, &atlas, &mut rng)?,
            _ => kernel_suite(cfg, &atlas)?,
        };
        suites.push(r);
    }
    let pass = suites.iter().all(|s| s.pass);
    Ok(VerifyReport { group: cfg.group.clone(), suite: suite.into(), pass, suites })
}

fn uniform(rng: &mut ChaCha8Rng, a: f64) -> f64 {
    rng.gen_range(-a..a)
}

/// Algebra element with basis coefficients uniform in `[-a, a]`.
pub fn random_algebra(s: &StructureData, rng: &mut ChaCha8Rng, a: f64) -> Mat {
    let c = DVector::from_fn(s.dim, |_, _| uniform(rng, a));
    s.from_coords(&c)
}

/// Matrix with entries uniform in `[-3, 3]`, rescaled to determinant one.
pub fn random_sl(n: usize, rng: &mut ChaCha8Rng) -> Mat {
    loop {
        let mut g = Mat::from_fn(n, n, |_, _| uniform(rng, 3.0));
        let d = g.determinant();
        if d.abs() < 1e-2 {
            continue;
        }
        if d < 0.0 {
            g.row_mut(0).neg_mut();
        }
        return g / d.abs().powf(1.0 / n as f64);
    }
}

/// Interior point of the chart box with `|t_i|` in `[0.3, 1.2]`.
pub fn random_point(at: &Atlas, chart: &str, rng: &mut ChaCha8Rng) -> OshimaPoint {
    let n = (0..at.s.k_dim).map(|_| uniform(rng, 0.5 * at.cfg.n_box)).collect();
    let t = (0..at.s.rank)
        .map(|_| {
            let m = rng.gen_range(0.3..1.2);
            if rng.gen_bool(0.5) {
                m
            } else {
                -m
            }
        })
        .collect();
    OshimaPoint::new(chart, n, t)
}

fn structure_suite(cfg: &RunConfig, s: &StructureData, rng: &mut ChaCha8Rng) -> SuiteReport {
    let tol = &cfg.tolerances;
    let n = s.n;
    let weyl = crate::lie_structure::build_weyl(s);
    let fact: usize = (1..=n).product();
    let mut checks = vec![
        Check::new("root_count", s.roots.len() as f64, Comparison::Equal, (n * (n - 1)) as f64),
        Check::new(
            "multiplicity_defect",
            s.roots.iter().map(|r| (r.multiplicity as f64 - 1.0).abs()).fold(0.0, f64::max),
            Comparison::Equal,
            0.0,
        ),
        Check::new("rank", s.rank as f64, Comparison::Equal, (n - 1) as f64),
        Check::new("k", s.k_dim as f64, Comparison::Equal, (n * (n - 1) / 2) as f64),
        Check::new("weyl_order", weyl.as_ref().map(|w| w.len() as f64).unwrap_or(0.0), Comparison::Equal, fact as f64),
    ];

    let mut worst: f64 = 0.0;
    for r in &s.roots {
        for x in &r.root_vectors {
            for (h, f) in s.a_basis.iter().zip(&r.functional) {
                worst = worst.max(frob(&(bracket(h, x) - x * *f)));
            }
        }
    }
    checks.push(Check::new("bracket_relations", worst, Comparison::AtMost, tol.structure));

    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (x, y, z) = (random_algebra(s, rng, 1.0), random_algebra(s, rng, 1.0), random_algebra(s, rng, 1.0));
        let lhs = s.inner(&bracket(&x, &z), &y);
        let rhs = s.inner(&z, &(-bracket(&s.theta(&x), &y)));
        worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
    }
    checks.push(Check::new("adjoint_of_ad", worst, Comparison::AtMost, tol.adjoint));

    let missing = match &weyl {
        Ok(w) => {
            let images: Vec<DVector<f64>> = w
                .elements
                .iter()
                .flat_map(|e| s.simple_roots.iter().map(move |&r| &e.matrix * DVector::from_column_slice(&s.roots[r].functional)))
                .collect();
            s.roots
                .iter()
                .filter(|r| {
                    let f = DVector::from_column_slice(&r.functional);
                    !images.iter().any(|v| (v - &f).norm() < 1e-8)
                })
                .count() as f64
        }
        Err(_) => f64::INFINITY,
    };
    checks.push(Check::new("weyl_orbit_missing_roots", missing, Comparison::Equal, 0.0));

    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x = random_algebra(s, rng, 1.0);
        let mut sum = project(s, &s.m_basis, &x) + project(s, &s.a_basis, &x);
        for r in &s.roots {
            sum += project(s, &r.root_vectors, &x);
        }
        worst = worst.max(s.norm(&(&x - sum)) / s.norm(&x));
    }
    checks.push(Check::new("space_reconstruction", worst, Comparison::AtMost, tol.structure));

    let json = serde_json::to_string(s).expect("structure serialises");
    let same = StructureData::from_json(&json).map(|b| serde_json::to_string(&b).expect("serialises") == json).unwrap_or(false);
    checks.push(Check::new("json_round_trip", f64::from(u8::from(!same)), Comparison::Equal, 0.0));
    SuiteReport::new("structure", checks, vec![])
}

/// Orthogonal projection onto `span(basis)` in the theta form.
fn project(s: &StructureData, basis: &[Mat], x: &Mat) -> Mat {
    let m = basis.len();
    if m == 0 {
        return Mat::zeros(s.n, s.n);
    }
    let gram = Mat::from_fn(m, m, |i, j| s.inner(&basis[i], &basis[j]));
    let rhs = DVector::from_fn(m, |i, _| s.inner(&basis[i], x));
    let c = gram.lu().solve(&rhs).expect("independent basis");
    basis.iter().zip(c.iter()).fold(Mat::zeros(s.n, s.n), |acc, (b, ci)| acc + b * *ci)
}

fn decomp_suite(cfg: &RunConfig, s: &StructureData, rng: &mut ChaCha8Rng) -> Result<SuiteReport, CliError> {
    let tol = cfg.tolerances.decomposition;
    let n = s.n;
    let eye = Mat::identity(n, n);
    let (mut kan, mut nak, mut shape) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let g = random_sl(n, rng);
        let scale = frob(&g);
        let f = iwasawa_kan(&g, s)?;
        kan = kan.max(frob(&(f.product() - &g)) / scale);
        let b = iwasawa_nak(&g, s)?;
        nak = nak.max(frob(&(b.product() - &g)) / scale);
        for h in [&f, &b] {
            shape = shape.max(frob(&(h.k.transpose() * &h.k - &eye)));
            shape = shape.max(frob(&(Mat::from_diagonal(&h.n.diagonal()) - &eye)));
            let off_a = frob(&(&h.a - Mat::from_diagonal(&h.a.diagonal())));
            let neg_a = h.a.diagonal().iter().filter(|v| **v <= 0.0).count() as f64;
            shape = shape.max(off_a + neg_a);
        }
    }
    let mut checks = vec![
        Check::new("kan_reconstruction", kan, Comparison::AtMost, tol),
        Check::new("nak_reconstruction", nak, Comparison::AtMost, tol),
        Check::new("factor_shapes", shape, Comparison::AtMost, tol),
    ];

    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let h = s.from_a_coords(&(0..s.rank).map(|_| uniform(rng, 1.0)).collect::<Vec<_>>());
        let a = expm(&h);
        let ai = inv(&a);
        for (x, &(r, _)) in s.n_minus_basis.iter().zip(&s.n_index) {
            let lhs = &ai * x * &a;
            worst = worst.max(frob(&(lhs - x * s.root_value(r, &h).exp())) / frob(x));
        }
    }
    checks.push(Check::new("ad_a_on_n_minus", worst, Comparison::AtMost, cfg.tolerances.adjoint));

    let (mut recon, mut lin) = (0.0f64, 0.0f64);
    for _ in 0..500 {
        let y = random_algebra(s, rng, 1.0);
        let g = expm(&random_algebra(s, rng, 0.5));
        let u: Vec<f64> = (0..s.k_dim).map(|_| uniform(rng, 1.0)).collect();
        let nm = expm(&s.from_n_minus_coords(&u));
        let c = adjoint_coefficients(&y, &g, &nm, s)?;
        recon = recon.max(c.residual);
        let y2 = random_algebra(s, rng, 1.0);
        let c2 = adjoint_coefficients(&y2, &g, &nm, s)?;
        let c12 = adjoint_coefficients(&(&y * 0.7 - &y2 * 1.3), &g, &nm, s)?;
        let parts = |d: &crate::decompositions::DecompCoefficients| [d.c_plus.clone(), d.c_minus.clone(), d.c_h.clone()].concat();
        let (p1, p2, p12) = (parts(&c), parts(&c2), parts(&c12));
        for i in 0..p1.len() {
            lin = lin.max((p12[i] - (0.7 * p1[i] - 1.3 * p2[i])).abs() / (1.0 + p12[i].abs()));
        }
    }
    checks.push(Check::new("coefficient_reconstruction_mod_m", recon, Comparison::AtMost, tol));
    checks.push(Check::new("coefficient_linearity", lin, Comparison::AtMost, tol));

    if n == 2 {
        let mut worst: f64 = 0.0;
        for u in [-1.5, -0.4, 0.0, 0.3, 1.1, 2.0] {
            let nm = expm(&(&s.n_minus_basis[0] * u));
            let c = adjoint_coefficients(&s.n_plus_basis[0], &eye, &nm, s)?;
            worst = worst.max((c.c_plus[0] - 1.0).abs()).max((c.c_h[0] - 2.0 * u).abs()).max((c.c_minus[0] + u * u).abs());
        }
        checks.push(Check::new("sl2_worked_example", worst, Comparison::AtMost, tol));
    }
    Ok(SuiteReport::new("decomp", checks, vec![]))
}

fn atlas_suite(cfg: &RunConfig, at: &Atlas, rng: &mut ChaCha8Rng) -> Result<SuiteReport, CliError> {
    let tol = &cfg.tolerances;
    let s = &at.s;
    let charts: Vec<String> = at.weyl.elements.iter().map(|e| e.name.clone()).collect();
    let near = |rng: &mut ChaCha8Rng, r: f64| expm(&random_algebra(s, rng, r));

    let mut mismatches = 0usize;
    for i in 0..1000 {
        let p = random_point(at, &charts[i % charts.len()], rng);
        let q = at.act_unchecked(&near(rng, 0.3), &p)?;
        mismatches += usize::from(signature(&q) != signature(&p));
    }
    let mut checks = vec![Check::new("signature_invariance_mismatches", mismatches as f64, Comparison::Equal, 0.0)];

    let (mut law, mut cocycle, mut min_chi) = (0.0f64, 0.0f64, f64::INFINITY);
    for i in 0..200 {
        let p = random_point(at, &charts[i % charts.len()], rng);
        let (g1, g2) = (near(rng, 0.2), near(rng, 0.2));
        let g12 = &g1 * &g2;
        let q2 = at.act_unchecked(&g2, &p)?;
        let a = at.act_unchecked(&g1, &q2)?;
        let b = at.act_unchecked(&g12, &p)?;
        for (x, y) in a.n.iter().chain(&a.t).zip(b.n.iter().chain(&b.t)) {
            law = law.max((x - y).abs() / (1.0 + y.abs()));
        }
        let c12 = at.chi_all(&g12, &p)?;
        let c1 = at.chi_all(&g1, &q2)?;
        let c2 = at.chi_all(&g2, &p)?;
        for j in 0..s.rank {
            cocycle = cocycle.max((c12[j].value - c1[j].value * c2[j].value).abs() / c12[j].value.abs());
            min_chi = min_chi.min(c12[j].value.abs()).min(c1[j].value.abs()).min(c2[j].value.abs());
        }
    }
    checks.push(Check::new("group_law", law, Comparison::AtMost, tol.cocycle));
    checks.push(Check::new("chi_cocycle", cocycle, Comparison::AtMost, tol.cocycle));
    checks.push(Check::new("chi_min_abs", min_chi, Comparison::AtLeast, 1e-6));

    let mut worst: f64 = 0.0;
    for mask in 1..(1usize << s.rank) {
        let mut p = random_point(at, "e", rng);
        for j in 0..s.rank {
            if mask >> j & 1 == 1 {
                p.t[j] = 0.0;
            }
        }
        for c in at.chi_all(&Mat::identity(s.n, s.n), &p)? {
            worst = worst.max((c.value - 1.0).abs());
        }
    }
    checks.push(Check::new("boundary_chi_identity", worst, Comparison::AtMost, tol.boundary_chi));

    let mut worst: f64 = 0.0;
    let ss: Vec<f64> = (0..=10).map(|i| -0.5 + 0.1 * i as f64).collect();
    for chart in &charts {
        let p = random_point(at, chart, rng);
        for &sv in &ss {
            for i in 1..=s.rank {
                let got = at.chi_all(&expm(&(&s.dual_basis[i - 1] * sv)), &p)?;
                for j in 1..=s.rank {
                    let want = at.chi_one_parameter(OneParameter::Cartan(i), sv, chart, j)?.value;
                    worst = worst.max((got[j - 1].value - want).abs());
                }
            }
            if chart == "e" {
                for (b, x) in s.n_minus_basis.iter().enumerate() {
                    let got = at.chi_all(&expm(&(x * sv)), &p)?;
                    for j in 1..=s.rank {
                        let want = at.chi_one_parameter(OneParameter::NilMinus(b), sv, chart, j)?.value;
                        worst = worst.max((got[j - 1].value - want).abs());
                    }
                }
            }
        }
    }
    checks.push(Check::new("one_parameter_laws", worst, Comparison::AtMost, tol.one_parameter));

    let (mut worst, mut done, mut tried) = (0.0f64, 0usize, 0usize);
    for _ in 0..100 {
        let p = random_point(at, "e", rng);
        for chart in charts.iter().skip(1) {
            tried += 1;
            let Ok(q) = at.transition(&p, chart) else { continue };
            let back = at.transition(&q, "e")?;
            done += 1;
            for (x, y) in back.n.iter().chain(&back.t).zip(p.n.iter().chain(&p.t)) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    checks.push(Check::new("chart_round_trip", worst, Comparison::AtMost, tol.round_trip));
    checks.push(Check::new("chart_round_trip_coverage", done as f64 / tried.max(1) as f64, Comparison::AtLeast, 0.25));
    Ok(SuiteReport::new("atlas", checks, vec![]))
}

fn rel_increment(a: &(Vec<f64>, Vec<f64>), b: &(Vec<f64>, Vec<f64>)) -> f64 {
    let va: Vec<f64> = a.0.iter().chain(&a.1).cloned().collect();
    let vb: Vec<f64> = b.0.iter().chain(&b.1).cloned().collect();
    let diff = va.iter().zip(&vb).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let nb = vb.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / nb.max(1e-12)
}

fn vf_suite(cfg: &RunConfig, at: &Atlas, rng: &mut ChaCha8Rng) -> Result<SuiteReport, CliError> {
    let tol = &cfg.tolerances;
    let s = &at.s;
    let charts: Vec<String> = at.weyl.elements.iter().map(|e| e.name.clone()).collect();
    let eps = cfg.quadrature.flow_eps;

    let mut cols: Vec<String> = vec!["sample".into()];
    cols.extend((1..=s.k_dim).map(|i| format!("n{i}")));
    cols.extend((1..=s.rank).map(|i| format!("t{i}")));
    cols.push("relative_residual".into());
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let p = random_point(at, &charts[i % charts.len()], rng);
        let y = random_algebra(s, rng, 1.0);
        let g = expm(&random_algebra(s, rng, 0.3));
        let v = fundamental_vf(at, &y, &g, &p)?;
        let r = rel_increment(&coordinate_increments(at, &p, &v), &flow_increment(at, &y, &g, &p, eps)?);
        worst = worst.max(r);
        let mut row = vec![i as f64];
        row.extend(p.n.iter().chain(&p.t));
        row.push(r);
        rows.push(row);
    }
    let mut checks = vec![Check::new("flow_consistency", worst, Comparison::AtMost, tol.flow_relative)];

    let mut tangency: f64 = 0.0;
    for i in 0..50 {
        let mut p = random_point(at, &charts[i % charts.len()], rng);
        let j = i % s.rank;
        p.t[j] = 0.0;
        let v = fundamental_vf(at, &random_algebra(s, rng, 1.0), &expm(&random_algebra(s, rng, 0.3)), &p)?;
        tangency = tangency.max(v.dt[j].abs());
    }
    checks.push(Check::new("boundary_tangency", tangency, Comparison::Equal, 0.0));

    let mut lin: f64 = 0.0;
    for i in 0..20 {
        let p = random_point(at, &charts[i % charts.len()], rng);
        let g = expm(&random_algebra(s, rng, 0.3));
        let (y1, y2) = (random_algebra(s, rng, 1.0), random_algebra(s, rng, 1.0));
        let a = fundamental_vf(at, &y1, &g, &p)?;
        let b = fundamental_vf(at, &y2, &g, &p)?;
        let c = fundamental_vf(at, &(&y1 * 2.0 + &y2 * -0.5), &g, &p)?;
        for ((x, y), z) in a.dn.iter().chain(&a.dt).zip(b.dn.iter().chain(&b.dt)).zip(c.dn.iter().chain(&c.dt)) {
            lin = lin.max((z - (2.0 * x - 0.5 * y)).abs() / (1.0 + z.abs()));
        }
    }
    checks.push(Check::new("linearity_in_y", lin, Comparison::AtMost, 1e-9));

    let h = cfg.quadrature.gamma_step;
    let grid = [-0.8, -0.3, 0.0, 0.4, 1.0];
    let mut gs = vec![Mat::identity(s.n, s.n)];
    for b in s.algebra_basis.iter().take(3) {
        gs.push(expm(&(b * 0.3)));
        gs.push(expm(&(b * -0.3)));
    }
    let (mut min_det, mut block) = (f64::INFINITY, 0.0f64);
    for &a in &grid {
        for &b in &grid {
            let (n, t) = if s.rank == 1 {
                (vec![a], vec![b])
            } else {
                let mut n = vec![0.1; s.k_dim];
                n[0] = 0.5 * a;
                (n, vec![b, if a == 0.0 { 0.7 } else { a }])
            };
            let p = OshimaPoint::new("e", n, t);
            for g in &gs {
                let gm = gamma_matrix(at, &p, g, h)?;
                min_det = min_det.min(gm.det.abs());
                for r in 0..s.k_dim {
                    for c in s.k_dim..s.k_dim + s.rank {
                        block = block.max(gm.entries[(r, c)].abs());
                    }
                }
            }
        }
    }
    checks.push(Check::new("gamma_min_abs_det", min_det, Comparison::AtLeast, tol.gamma_det));
    checks.push(Check::new("gamma_block2_chart_e", block, Comparison::AtMost, tol.gamma_block));
    if s.n == 2 {
        let gm = gamma_matrix(at, &OshimaPoint::new("e", vec![0.0], vec![1.0]), &Mat::identity(2, 2), h)?;
        let want = Mat::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        checks.push(Check::new("gamma_hand_value", (gm.entries - want).abs().max(), Comparison::AtMost, tol.gamma_hand));
    }
    let table = Table { columns: cols, rows, notes: vec![] };
    Ok(SuiteReport::new("vf", checks, vec![("flow_consistency".into(), table)]))
}

fn kernel_suite(cfg: &RunConfig, at: &Atlas) -> Result<SuiteReport, CliError> {
    if at.s.n != 2 {
        return Ok(SuiteReport::skipped("kernel", format!("kernel_lab evaluates SL(2) only, group is {}", cfg.group)));
    }
    let tol = &cfg.tolerances;
    let lab = KernelLab::new(at.clone(), cfg.kernel_config())?;
    let grid = default_grid(&lab);
    let rg = default_r_grid(&grid);
    let x = OshimaPoint::new("e", vec![0.0], vec![0.8]);

    let heat = GroupFunction::new(&GroupFunctionSpec::heat(1.0), &lab.cfg)?;
    let sg = symbol(&lab, &heat, &x, &grid)?;
    let a0 = sg.at(grid.n / 2, grid.n / 2).norm();
    let amax = sg.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut checks = vec![
        Check::new("symbol_mass_bound", amax / sg.abs_mass, Comparison::AtMost, 1.0 + 1e-12),
        Check::new("symbol_peak_at_zero", amax / a0, Comparison::AtMost, 1.0 + 1e-12),
        Check::new("lacunary_heat", lacunary_check(&sg, 2, &rg)?.violation, Comparison::AtMost, tol.lacunary),
    ];
    let kg = kernel_grid(&sg)?;
    let n = grid.n;
    let peak = kg.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut cross: f64 = 0.0;
    for i1 in 0..n {
        for i2 in 0..n {
            if kg.z[i2] > 1.0 {
                cross = cross.max(kg.values[i1 * n + i2].norm());
            }
        }
    }
    checks.push(Check::new("cross_sign_heat", cross / peak, Comparison::AtMost, tol.cross_sign));

    let bump = GroupFunction::new(&GroupFunctionSpec::bump(0.5), &lab.cfg)?;
    let sb = symbol(&lab, &bump, &x, &grid)?;
    checks.push(Check::new("lacunary_bump", lacunary_check(&sb, 2, &rg)?.violation, Comparison::AtMost, tol.lacunary));

    let narrow = GroupFunction::new(&GroupFunctionSpec::bump(1e-3), &lab.cfg)?;
    let sd = symbol(&lab, &narrow, &x, &grid)?;
    let delta = sd.values.iter().map(|v| (v - 1.0).norm()).fold(0.0, f64::max);
    checks.push(Check::new("delta_limit", delta, Comparison::AtMost, tol.delta_limit));

    let o = OshimaPoint::new("e", vec![0.0], vec![1.0]);
    for tau in [0.5, 1.0] {
        let f = GroupFunction::new(&GroupFunctionSpec::heat(tau), &lab.cfg)?;
        let s = symbol(&lab, &f, &o, &grid)?;
        let mut worst: f64 = 0.0;
        for i in 0..5 {
            for j in 0..5 {
                let y = OshimaPoint::new("e", vec![-0.1 + 0.05 * i as f64], vec![0.85 + 0.075 * j as f64]);
                let k = kernel_from_symbol(&s, &y)?;
                let d = geometry::dist(lab.model_point(&o)?, lab.model_point(&y)?);
                let want = heat_kernel_radial(tau, d)? * geometry::area_density(y.t[0]);
                worst = worst.max(((k.value.re - want) / want).abs());
            }
        }
        checks.push(Check::new(&format!("heat_cross_check_tau_{tau}"), worst, Comparison::AtMost, tol.heat_relative));
    }

    let mass: f64 = gl(200, 0.0, 30.0)
        .iter()
        .map(|&(r, w)| Ok(w * 2.0 * std::f64::consts::PI * r.sinh() * heat_kernel_radial(0.5, r)?))
        .sum::<Result<f64, CliError>>()?;
    checks.push(Check::new("heat_unit_mass", (mass - 1.0).abs(), Comparison::AtMost, 1e-6));

    let bump_mass = schwartz_seminorm(&lab, &bump, 0.0, &[])?.value;
    checks.push(Check::new("bump_unit_mass", (bump_mass - 1.0).abs(), Comparison::AtMost, 1e-6));
    let b2 = GroupFunction::new(&GroupFunctionSpec::bump(0.4), &lab.cfg)?;
    let ibp = integration_by_parts_check(&lab, &bump, TestFunction::Group(&b2), 0)?;
    checks.push(Check::new("integration_by_parts", ibp.residual, Comparison::AtMost, 1e-4));

    let r = crate::kernel_lab::resolvent::group_resolvent_radial(1.0, Complex64::new(4.0, 0.0), 0.8, 0.0)?;
    checks.push(Check::new("resolvent_positive", r.re, Comparison::AtLeast, f64::MIN_POSITIVE));
    Ok(SuiteReport::new("kernel", checks, vec![]))
}
