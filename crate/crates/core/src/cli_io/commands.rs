//! `okl` command line: argument parsing, config layering
//! (defaults, then `--config`, then flags) and dispatch.

use super::output::{emit, render_json, render_table, Table};
use super::{init_threads, verify, CliError, Format, RunConfig, EXIT_INVARIANT, EXIT_OK};
use crate::decompositions::{adjoint_coefficients, iwasawa_kan, iwasawa_nak};
use crate::kernel_lab::resolvent::{group_resolvent_estimate, resolvent_kernels};
use crate::kernel_lab::symbol::{default_grid, kernel_grid, symbol, SymbolGrid};
use crate::kernel_lab::{GroupFunction, GroupFunctionSpec, KernelConfig, KernelLab};
use crate::lie_structure::{build_structure, build_weyl, GroupSpec};
use crate::linalg::{frob, Mat};
use crate::oshima_atlas::{Atlas, OshimaPoint};
use crate::vector_fields::{coordinate_increments, flow_increment, fundamental_vf, gamma_matrix};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use std::ffi::OsString;

#[derive(Parser, Debug)]
#[command(name = "okl", version, about = "Charts, vector fields and invariant kernels on SL(n,R) symmetric spaces")]
pub struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<String>,
    /// sl2 or sl3.
    #[arg(long, global = true)]
    pub group: Option<String>,
    /// Weyl element naming the chart (e, s1, s1s2, ...).
    #[arg(long, global = true)]
    pub chart: Option<String>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub output: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum OperatorKind {
    Heat,
    Bump,
    Resolvent,
}

#[derive(Args, Debug, Default)]
pub struct OperatorArgs {
    /// Group function; defaults to `operator` of the config file.
    #[arg(long, value_enum)]
    pub operator: Option<OperatorKind>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Complex spectral parameter, e.g. `4+0i`.
    #[arg(long)]
    pub lambda: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Restricted roots, dual basis and Weyl group as JSON.
    Structure,
    /// KAN and N^-AK factors of `--g`; with `--y` and `--n` also the
    /// root-space coefficients of `Ad((g n)^{-1}) Y`.
    Decompose {
        #[arg(long)]
        g: String,
        #[arg(long)]
        y: Option<String>,
        /// Exponential coordinates of `n` in N^-.
        #[arg(long, allow_hyphen_values = true)]
        n: Option<String>,
    },
    /// Chart coordinates of `g . x`.
    Act {
        #[arg(long)]
        g: String,
        /// `n_1,..,n_k,t_1,..,t_l`; repeatable.
        #[arg(long, required = true, allow_hyphen_values = true)]
        x: Vec<String>,
    },
    /// All `chi_j(g, x)`.
    Chi {
        #[arg(long)]
        g: String,
        #[arg(long, required = true, allow_hyphen_values = true)]
        x: Vec<String>,
    },
    /// Coordinates of `x` in chart `--to`.
    Transition {
        #[arg(long, required = true, allow_hyphen_values = true)]
        x: Vec<String>,
        #[arg(long)]
        to: String,
    },
    /// Fundamental vector field of `Y` in the chart translated by `g`, with
    /// its finite-difference flow check.
    Vf {
        #[arg(long)]
        y: String,
        /// Identity when omitted.
        #[arg(long)]
        g: Option<String>,
        #[arg(long, required = true, allow_hyphen_values = true)]
        x: Vec<String>,
    },
    /// The matrix of derivatives of `n_j` and `chi_j` along the basis.
    Gamma {
        #[arg(long)]
        g: Option<String>,
        #[arg(long, required = true, allow_hyphen_values = true)]
        x: Vec<String>,
    },
    /// Local symbol on the frequency grid.
    Symbol {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// `default` or `XI_MAX,DXI`.
        #[arg(long)]
        grid: Option<String>,
        #[command(flatten)]
        op: OperatorArgs,
    },
    /// Kernel on the dual grid by inverse FFT of the symbol.
    Kernel {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long)]
        grid: Option<String>,
        #[command(flatten)]
        op: OperatorArgs,
    },
    /// Heat semigroup kernel on the dual grid.
    Semigroup {
        #[arg(long)]
        tau: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long)]
        grid: Option<String>,
    },
    /// Resolvent kernel on a square of `points^2` chart points around `x`.
    Resolvent {
        #[arg(long)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, allow_hyphen_values = true, default_value = "0,0.8")]
        x: String,
        #[arg(long, default_value_t = 16)]
        points: usize,
        /// Half-width of the square in `n` and in `log|t|`.
        #[arg(long, default_value_t = 0.5)]
        span: f64,
    },
    /// Radial profile of the group resolvent on a logarithmic grid.
    GroupResolvent {
        #[arg(long)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, default_value_t = 1e-3)]
        r_min: f64,
        #[arg(long, default_value_t = 5.0)]
        r_max: f64,
        #[arg(long, default_value_t = 40)]
        points: usize,
    },
    /// Invariant suites: structure, decomp, atlas, vf, kernel or all.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Structure => "structure",
            Command::Decompose { .. } => "decompose",
            Command::Act { .. } => "act",
            Command::Chi { .. } => "chi",
            Command::Transition { .. } => "transition",
            Command::Vf { .. } => "vf",
            Command::Gamma { .. } => "gamma",
            Command::Symbol { .. } => "symbol",
            Command::Kernel { .. } => "kernel",
            Command::Semigroup { .. } => "semigroup",
            Command::Resolvent { .. } => "resolvent",
            Command::GroupResolvent { .. } => "group-resolvent",
            Command::Verify { .. } => "verify",
        }
    }
}

fn floats(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| CliError::Config(format!("{what}: cannot parse {v:?} as a number"))))
        .collect()
}

/// `a,b;c,d` row by row, or `e` / `I` for the identity.
pub fn parse_matrix(s: &str, n: usize) -> Result<Mat, CliError> {
    if matches!(s.trim(), "e" | "I" | "identity") {
        return Ok(Mat::identity(n, n));
    }
    let rows: Vec<Vec<f64>> = s.split(';').map(|r| floats(r, "matrix")).collect::<Result<_, _>>()?;
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Config(format!("matrix {s:?} is not {n}x{n}")));
    }
    Ok(Mat::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn parse_point(s: &str, chart: &str, k: usize, l: usize) -> Result<OshimaPoint, CliError> {
    let v = floats(s, "point")?;
    if v.len() != k + l {
        return Err(CliError::Config(format!("point {s:?} needs {k} n and {l} t coordinates")));
    }
    Ok(OshimaPoint::new(chart, v[..k].to_vec(), v[k..].to_vec()))
}

pub fn parse_lambda(s: &str) -> Result<Complex64, CliError> {
    s.trim().parse::<Complex64>().map_err(|_| CliError::Config(format!("cannot parse lambda {s:?} (expected e.g. 4+0i)")))
}

fn apply_grid(cfg: &mut RunConfig, grid: &Option<String>) -> Result<(), CliError> {
    match grid.as_deref() {
        None => Ok(()),
        Some("default") => {
            let d = KernelConfig::default();
            cfg.grid.xi_max = d.xi_max;
            cfg.grid.dxi = d.dxi;
            Ok(())
        }
        Some(g) => {
            let v = floats(g, "grid")?;
            if v.len() != 2 {
                return Err(CliError::Config(format!("grid {g:?} must be `default` or XI_MAX,DXI")));
            }
            cfg.grid.xi_max = v[0];
            cfg.grid.dxi = v[1];
            Ok(())
        }
    }
}

fn operator(cfg: &RunConfig, op: &OperatorArgs) -> Result<GroupFunctionSpec, CliError> {
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| CliError::Config(format!("--{flag} is required for this operator")));
    let spec = match op.operator {
        Some(OperatorKind::Heat) => GroupFunctionSpec::heat(need(op.tau, "tau")?),
        Some(OperatorKind::Bump) => GroupFunctionSpec::bump(need(op.width, "width")?),
        Some(OperatorKind::Resolvent) => {
            let l = op.lambda.as_deref().ok_or_else(|| CliError::Config("--lambda is required for this operator".into()))?;
            GroupFunctionSpec::resolvent(need(op.alpha, "alpha")?, parse_lambda(l)?)
        }
        None => cfg
            .operator
            .clone()
            .ok_or_else(|| CliError::Config("no operator: pass --operator or set `operator` in the config".into()))?,
    };
    spec.validate()?;
    Ok(spec)
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("cannot read {p}: {e}")))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(g) = &cli.group {
        cfg.group = g.clone();
    }
    if let Some(c) = &cli.chart {
        cfg.chart = c.clone();
    }
    if let Some(o) = &cli.output {
        cfg.output.path = Some(o.clone());
    }
    if let Some(f) = cli.format {
        cfg.output.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn kernel_lab(cfg: &RunConfig) -> Result<KernelLab, CliError> {
    let atlas = Atlas::for_group(&cfg.group, cfg.atlas_config())?;
    Ok(KernelLab::new(atlas, cfg.kernel_config())?)
}

fn grid_table(lab: &KernelLab, s: &SymbolGrid, method: &str) -> Result<Table, CliError> {
    let kg = kernel_grid(s)?;
    let n = kg.z.len();
    let mut rows = Vec::with_capacity(n * n);
    for i1 in 0..n {
        for i2 in 0..n {
            let y = kg.y(i1, i2);
            let v = kg.values[i1 * n + i2];
            rows.push(vec![y.n[0], y.t[0], v.re, v.im, kg.err_estimate]);
        }
    }
    Ok(Table {
        columns: ["n1", "t1", "re", "im", "err_estimate"].map(String::from).to_vec(),
        rows,
        notes: vec![
            ("method".into(), method.into()),
            ("x".into(), format!("{:?} {:?} chart {}", s.x.n, s.x.t, s.x.chart)),
            ("cutoff".into(), s.cutoff_spec.clone()),
            (
                "settings".into(),
                format!("xi_max={} dxi={} n={} nodes={} alias_fraction={:.3e}", s.xi_grid.xi_max, s.xi_grid.dxi, s.xi_grid.n, s.nodes, s.alias_fraction),
            ),
            ("rho_cutoff".into(), lab.cfg.cutoff_rho().to_string()),
        ],
    })
}

fn symbol_table(lab: &KernelLab, f: &GroupFunction, x: &OshimaPoint) -> Result<Table, CliError> {
    let grid = default_grid(lab);
    let s = symbol(lab, f, x, &grid)?;
    // Radial rule with half the panels' nodes for the error column.
    let coarse_cfg = KernelConfig { n_rho: (lab.cfg.n_rho / 2).max(1), ..lab.cfg.clone() };
    let coarse_lab = KernelLab::new(lab.atlas.clone(), coarse_cfg)?;
    let c = symbol(&coarse_lab, f, x, &grid)?;
    let n = grid.n;
    let mut rows = Vec::with_capacity(n * n);
    for m1 in 0..n {
        for m2 in 0..n {
            let v = s.at(m1, m2);
            rows.push(vec![grid.xi(m1), grid.xi(m2), v.re, v.im, (v - c.at(m1, m2)).norm()]);
        }
    }
    Ok(Table {
        columns: ["xi1", "xi2", "re", "im", "err_estimate"].map(String::from).to_vec(),
        rows,
        notes: vec![
            ("x".into(), format!("{:?} {:?} chart {}", x.n, x.t, x.chart)),
            ("cutoff".into(), s.cutoff_spec.clone()),
            ("abs_mass".into(), s.abs_mass.to_string()),
            ("nodes".into(), s.nodes.to_string()),
        ],
    })
}

#[derive(Serialize)]
struct StructureOut {
    l: usize,
    k: usize,
    weyl_order: usize,
    structure: crate::lie_structure::StructureData,
    weyl: crate::lie_structure::WeylGroupData,
}

#[derive(Serialize)]
struct Record<T: Serialize> {
    x: OshimaPoint,
    result: T,
}

#[derive(Serialize)]
struct VfOut {
    field: crate::vector_fields::TangentVector,
    /// `(dn, dt)` increments of the chart coordinates.
    increments: (Vec<f64>, Vec<f64>),
    flow: (Vec<f64>, Vec<f64>),
    flow_eps: f64,
    relative_residual: f64,
}

fn run_command(cli: &Cli, cfg: &mut RunConfig) -> Result<i32, CliError> {
    let name = cli.command.name();
    let structure = || -> Result<Atlas, CliError> { Ok(Atlas::for_group(&cfg.group, cfg.atlas_config())?) };
    let points = |at: &Atlas, xs: &[String]| -> Result<Vec<OshimaPoint>, CliError> {
        xs.iter().map(|x| parse_point(x, &cfg.chart, at.s.k_dim, at.s.rank)).collect()
    };
    match &cli.command {
        Command::Structure => {
            let s = build_structure(&GroupSpec::by_name(&cfg.group)?)?;
            let w = build_weyl(&s)?;
            let out = StructureOut { l: s.rank, k: s.k_dim, weyl_order: w.len(), structure: s, weyl: w };
            emit(cfg, &render_json(cfg, name, &out))?;
        }
        Command::Decompose { g, y, n } => {
            let at = structure()?;
            let gm = parse_matrix(g, at.s.n)?;
            let kan = iwasawa_kan(&gm, &at.s)?;
            let nak = iwasawa_nak(&gm, &at.s)?;
            let coefficients = match (y, n) {
                (Some(y), Some(n)) => {
                    let ym = parse_matrix(y, at.s.n)?;
                    let u = floats(n, "n")?;
                    if u.len() != at.s.k_dim {
                        return Err(CliError::Config(format!("--n needs {} coordinates", at.s.k_dim)));
                    }
                    Some(adjoint_coefficients(&ym, &gm, &at.n_matrix(&u), &at.s)?)
                }
                (None, None) => None,
                _ => return Err(CliError::Config("--y and --n go together".into())),
            };
            let res = |p: Mat| frob(&(p - &gm)) / frob(&gm);
            let out = serde_json::json!({
                "kan": kan, "nak": nak,
                "kan_residual": res(kan.product()), "nak_residual": res(nak.product()),
                "coefficients": coefficients,
            });
            emit(cfg, &render_json(cfg, name, &out))?;
        }
        Command::Act { g, x } => {
            let at = structure()?;
            let gm = parse_matrix(g, at.s.n)?;
            let out = points(&at, x)?
                .into_iter()
                .map(|p| Ok(Record { result: at.act_interior(&gm, &p)?, x: p }))
                .collect::<Result<Vec<_>, CliError>>()?;
            emit(cfg, &render_json(cfg, name, &out))?;
        }
        Command::Chi { g, x } => {
            let at = structure()?;
            let gm = parse_matrix(g, at.s.n)?;
            let out = points(&at, x)?
                .into_iter()
                .map(|p| Ok(Record { result: at.chi_all(&gm, &p)?, x: p }))
                .collect::<Result<Vec<_>, CliError>>()?;
            emit(cfg, &render_json(cfg, name, &out))?;
        }
        Command::Transition { x, to } => {
            let at = structure()?;
            let out = points(&at, x)?
                .into_iter()
                .map(|p| Ok(Record { result: at.transition(&p, to)?, x: p }))
                .collect::<Result<Vec<_>, CliError>>()?;
            emit(cfg, &render_json(cfg, name, &out))?;
        }
        Command::Vf { y, g, x } => {
            let at = structure()?;
            let ym = parse_matrix(y, at.s.n)?;
            let gm = parse_matrix(g.as_deref().unwrap_or("e"), at.s.n)?;
            let eps = cfg.quadrature.flow_eps;
            let out = points(&at, x)?
                .into_iter()
                .map(|p| {
                    let field = fundamental_vf(&at, &ym, &gm, &p)?;
                    let increments = coordinate_increments(&at, &p, &field);
                    let flow = if p.is_interior() { flow_increment(&at, &ym, &gm, &p, eps)? } else { increments.clone() };
                    let diff: f64 = increments.0.iter().chain(&increments.1).zip(flow.0.iter().chain(&flow.1)).map(|(a, b)| (a - b).powi(2)).sum();
                    let norm: f64 = flow.0.iter().chain(&flow.1).map(|b| b * b).sum();
                    let relative_residual = diff.sqrt() / norm.sqrt().max(1e-300);
                    Ok(Record { x: p, result: VfOut { field, increments, flow, flow_eps: eps, relative_residual } })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            emit(cfg, &render_json(cfg, name, &out))?;
        }
        Command::Gamma { g, x } => {
            let at = structure()?;
            let gm = parse_matrix(g.as_deref().unwrap_or("e"), at.s.n)?;
            let out = points(&at, x)?
                .into_iter()
                .map(|p| Ok(Record { result: gamma_matrix(&at, &p, &gm, cfg.quadrature.gamma_step)?, x: p }))
                .collect::<Result<Vec<_>, CliError>>()?;
            emit(cfg, &render_json(cfg, name, &out))?;
        }
        Command::Symbol { x, grid, op } => {
            apply_grid(cfg, grid)?;
            cfg.operator = Some(operator(cfg, op)?);
            cfg.validate()?;
            let lab = kernel_lab(cfg)?;
            let p = parse_point(x, &cfg.chart, 1, 1)?;
            let f = GroupFunction::new(cfg.operator.as_ref().expect("set above"), &lab.cfg)?;
            emit(cfg, &render_table(cfg, name, &symbol_table(&lab, &f, &p)?))?;
        }
        Command::Kernel { x, grid, op } => {
            apply_grid(cfg, grid)?;
            cfg.operator = Some(operator(cfg, op)?);
            cfg.validate()?;
            let lab = kernel_lab(cfg)?;
            let p = parse_point(x, &cfg.chart, 1, 1)?;
            let f = GroupFunction::new(cfg.operator.as_ref().expect("set above"), &lab.cfg)?;
            let s = symbol(&lab, &f, &p, &default_grid(&lab))?;
            emit(cfg, &render_table(cfg, name, &grid_table(&lab, &s, "FOURIER_GRID")?))?;
        }
        Command::Semigroup { tau, x, grid } => {
            apply_grid(cfg, grid)?;
            cfg.operator = Some(GroupFunctionSpec::heat(*tau));
            cfg.validate()?;
            let lab = kernel_lab(cfg)?;
            let p = parse_point(x, &cfg.chart, 1, 1)?;
            let f = GroupFunction::new(cfg.operator.as_ref().expect("set above"), &lab.cfg)?;
            let s = symbol(&lab, &f, &p, &default_grid(&lab))?;
            emit(cfg, &render_table(cfg, name, &grid_table(&lab, &s, "FOURIER_GRID")?))?;
        }
        Command::Resolvent { alpha, lambda, x, points: m, span } => {
            let l = parse_lambda(lambda)?;
            cfg.operator = Some(GroupFunctionSpec::resolvent(*alpha, l));
            cfg.validate()?;
            if *m < 2 || !(*span > 0.0) {
                return Err(CliError::Config("--points must be at least 2 and --span positive".into()));
            }
            let lab = kernel_lab(cfg)?;
            let p = parse_point(x, &cfg.chart, 1, 1)?;
            let offsets: Vec<f64> = (0..*m).map(|i| span * (2.0 * i as f64 / (*m - 1) as f64 - 1.0)).collect();
            let ys: Vec<OshimaPoint> = offsets
                .iter()
                .flat_map(|&du| offsets.iter().map(move |&dl| (du, dl)))
                .map(|(du, dl)| OshimaPoint::new(&p.chart, vec![p.n[0] + du], vec![p.t[0] * dl.exp()]))
                .collect();
            let ks = resolvent_kernels(&lab, *alpha, l, &p, &ys, true)?;
            let settings = ks[0].settings.clone();
            let rows = ys.iter().zip(&ks).map(|(y, k)| vec![y.n[0], y.t[0], k.value.re, k.value.im, k.err_estimate]).collect();
            let table = Table {
                columns: ["n1", "t1", "re", "im", "err_estimate"].map(String::from).to_vec(),
                rows,
                notes: vec![("method".into(), "LAPLACE_OF_SEMIGROUP".into()), ("settings".into(), settings)],
            };
            emit(cfg, &render_table(cfg, name, &table))?;
        }
        Command::GroupResolvent { alpha, lambda, r_min, r_max, points: m } => {
            let l = parse_lambda(lambda)?;
            cfg.operator = Some(GroupFunctionSpec::resolvent(*alpha, l));
            cfg.validate()?;
            if !(*r_min > 0.0 && r_max > r_min) || *m < 2 {
                return Err(CliError::Config("need 0 < r_min < r_max and at least 2 points".into()));
            }
            let omega = cfg.quadrature.omega_est.unwrap_or(0.0);
            let ratio = (r_max / r_min).ln() / (*m - 1) as f64;
            let rows = (0..*m)
                .map(|i| {
                    let r = r_min * (ratio * i as f64).exp();
                    let (v, e) = group_resolvent_estimate(*alpha, l, r, omega)?;
                    Ok(vec![r, v.re, v.im, e])
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let table = Table { columns: ["r", "re", "im", "err_estimate"].map(String::from).to_vec(), rows, notes: vec![] };
            emit(cfg, &render_table(cfg, name, &table))?;
        }
        Command::Verify { suite } => {
            cfg.validate()?;
            let report = verify::run(cfg, suite)?;
            emit(cfg, &render_json(cfg, name, &report))?;
            eprint!("{}", report.summary());
            return Ok(if report.pass { EXIT_OK } else { EXIT_INVARIANT });
        }
    }
    Ok(EXIT_OK)
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { super::EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = init_threads().and_then(|_| {
        let mut cfg = load_config(&cli)?;
        cfg.validate()?;
        run_command(&cli, &mut cfg)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("okl: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel_lab::FunctionKind;

    #[test]
    fn parsers() {
        assert_eq!(parse_matrix("1,2;3,4", 2).unwrap(), Mat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
        assert_eq!(parse_matrix("e", 3).unwrap(), Mat::identity(3, 3));
        assert!(parse_matrix("1,2;3", 2).is_err());
        let p = parse_point("0.1,-0.2,0.3,0.5,-0.7", "s1", 3, 2).unwrap();
        assert_eq!((p.n, p.t), (vec![0.1, -0.2, 0.3], vec![0.5, -0.7]));
        assert!(parse_point("0,0.8,1", "e", 1, 1).is_err());
        assert_eq!(parse_lambda("4+0i").unwrap(), Complex64::new(4.0, 0.0));
        assert_eq!(parse_lambda("2-1.5i").unwrap(), Complex64::new(2.0, -1.5));
        assert!(parse_lambda("four").is_err());
    }

    #[test]
    fn operator_flags() {
        let cfg = RunConfig::default();
        let op = OperatorArgs { operator: Some(OperatorKind::Heat), tau: Some(0.5), ..Default::default() };
        assert_eq!(operator(&cfg, &op).unwrap().kind, FunctionKind::Heat);
        let missing = OperatorArgs { operator: Some(OperatorKind::Bump), ..Default::default() };
        assert!(matches!(operator(&cfg, &missing), Err(CliError::Config(_))));
        assert!(matches!(operator(&cfg, &OperatorArgs::default()), Err(CliError::Config(_))));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["okl", "semigroup", "--x", "0,0.8"]), 2);
        assert_eq!(run(["okl", "nonsense"]), 2);
        assert_eq!(run(["okl", "--group", "so5", "structure"]), 2);
        assert_eq!(run(["okl", "--help"]), 0);
    }
}
