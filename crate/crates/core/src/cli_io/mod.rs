//! Run configuration, error classification and result files for the `okl`
//! binary, plus the invariant-suite runner.

pub mod commands;
pub mod output;
pub mod verify;

use crate::decompositions::DecompError;
use crate::kernel_lab::{GroupFunctionSpec, KernelConfig, KernelError};
use crate::lie_structure::StructureError;
use crate::oshima_atlas::{AtlasConfig, AtlasError};
use crate::vector_fields::VfError;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_DIVERGENT_TAIL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("{0}")]
    DivergentTail(String),
    #[error("failed invariant: {0}")]
    Invariant(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric(_) | CliError::Io(_) => EXIT_NUMERIC,
            CliError::DivergentTail(_) => EXIT_DIVERGENT_TAIL,
            CliError::Invariant(_) => EXIT_INVARIANT,
        }
    }
}

impl From<StructureError> for CliError {
    fn from(e: StructureError) -> Self {
        match e {
            StructureError::InvalidSpec(_) | StructureError::UnknownGroup(_) => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<DecompError> for CliError {
    fn from(e: DecompError) -> Self {
        match e {
            DecompError::NotInGroup(_) | DecompError::NotInNMinus => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<AtlasError> for CliError {
    fn from(e: AtlasError) -> Self {
        match e {
            AtlasError::UnknownChart(_) | AtlasError::DimensionMismatch(_) | AtlasError::NotInterior | AtlasError::NotInOverlap => {
                CliError::Config(e.to_string())
            }
            AtlasError::Decomp(d) => d.into(),
            AtlasError::Structure(s) => s.into(),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<VfError> for CliError {
    fn from(e: VfError) -> Self {
        match e {
            VfError::DimensionMismatch(_) => CliError::Config(e.to_string()),
            VfError::Atlas(a) => a.into(),
            VfError::Decomp(d) => d.into(),
            VfError::SingularGamma(_) => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        match e {
            KernelError::DivergentTail { .. } => CliError::DivergentTail(e.to_string()),
            KernelError::InteriorRequired | KernelError::UnsupportedGroup(_) | KernelError::InvalidArgument(_) => {
                CliError::Config(e.to_string())
            }
            KernelError::Atlas(a) => a.into(),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Boxes {
    pub n_box: f64,
    pub t_box: f64,
    /// Radius of `V^1` in the Killing norm of `log` of the polar part; also
    /// the support radius of the cutoff.
    pub v_radius: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Grid {
    pub xi_max: f64,
    pub dxi: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Quadrature {
    pub n_rho: usize,
    pub n_psi: usize,
    pub n_theta: usize,
    pub n_theta_fiber: usize,
    pub cutoff_inner: f64,
    pub chunk: usize,
    pub extrap_eps: f64,
    pub extrap_levels: usize,
    pub extrap_tol: f64,
    /// Central-difference step for `Gamma`.
    pub gamma_step: f64,
    /// Flow step for the vector-field cross-check.
    pub flow_eps: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_est: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub format: Format,
}

/// Thresholds of the invariant suites.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub structure: f64,
    pub adjoint: f64,
    pub decomposition: f64,
    pub cocycle: f64,
    pub round_trip: f64,
    pub one_parameter: f64,
    pub boundary_chi: f64,
    pub flow_relative: f64,
    pub gamma_det: f64,
    pub gamma_block: f64,
    pub gamma_hand: f64,
    pub lacunary: f64,
    pub cross_sign: f64,
    pub delta_limit: f64,
    pub heat_relative: f64,
}

impl Default for Boxes {
    fn default() -> Self {
        let a = AtlasConfig::default();
        Boxes { n_box: a.n_box, t_box: a.t_box, v_radius: a.v_radius }
    }
}

impl Default for Grid {
    fn default() -> Self {
        let k = KernelConfig::default();
        Grid { xi_max: k.xi_max, dxi: k.dxi }
    }
}

impl Default for Quadrature {
    fn default() -> Self {
        let k = KernelConfig::default();
        let a = AtlasConfig::default();
        Quadrature {
            n_rho: k.n_rho,
            n_psi: k.n_psi,
            n_theta: k.n_theta,
            n_theta_fiber: k.n_theta_fiber,
            cutoff_inner: k.cutoff_inner,
            chunk: k.chunk,
            extrap_eps: a.extrap_eps,
            extrap_levels: a.extrap_levels,
            extrap_tol: a.extrap_tol,
            gamma_step: 1e-5,
            flow_eps: 1e-5,
            omega_est: k.omega_est,
        }
    }
}

impl Default for Output {
    fn default() -> Self {
        Output { path: None, format: Format::Csv }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            structure: 1e-10,
            adjoint: 1e-9,
            decomposition: 1e-10,
            cocycle: 1e-8,
            round_trip: 1e-9,
            one_parameter: 1e-8,
            boundary_chi: 1e-6,
            flow_relative: 1e-5,
            gamma_det: 1e-6,
            gamma_block: 1e-8,
            gamma_hand: 1e-6,
            lacunary: 1e-2,
            cross_sign: 1e-3,
            delta_limit: 1e-2,
            heat_relative: 2e-2,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub group: String,
    /// Weyl element naming the chart, e.g. `e`, `s1`, `s1s2`.
    pub chart: String,
    pub boxes: Boxes,
    pub grid: Grid,
    pub quadrature: Quadrature,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator: Option<GroupFunctionSpec>,
    pub output: Output,
    pub tolerances: Tolerances,
    /// Seed of the random samples drawn by `verify`.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            group: "sl2".into(),
            chart: "e".into(),
            boxes: Boxes::default(),
            grid: Grid::default(),
            quadrature: Quadrature::default(),
            operator: None,
            output: Output::default(),
            tolerances: Tolerances::default(),
            seed: 20_240_917,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

fn nonzero(name: &str, v: usize) -> Result<(), CliError> {
    if v > 0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be at least 1")))
    }
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self, CliError> {
        let c: RunConfig = serde_json::from_str(s).map_err(|e| CliError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !matches!(self.group.as_str(), "sl2" | "sl3") {
            return Err(CliError::Config(format!("unknown group {:?} (expected sl2 or sl3)", self.group)));
        }
        let b = &self.boxes;
        positive("boxes.n_box", b.n_box)?;
        positive("boxes.t_box", b.t_box)?;
        positive("boxes.v_radius", b.v_radius)?;
        positive("grid.xi_max", self.grid.xi_max)?;
        positive("grid.dxi", self.grid.dxi)?;
        let q = &self.quadrature;
        for (n, v) in [
            ("quadrature.n_rho", q.n_rho),
            ("quadrature.n_psi", q.n_psi),
            ("quadrature.n_theta", q.n_theta),
            ("quadrature.n_theta_fiber", q.n_theta_fiber),
            ("quadrature.chunk", q.chunk),
            ("quadrature.extrap_levels", q.extrap_levels),
        ] {
            nonzero(n, v)?;
        }
        for (n, v) in [
            ("quadrature.cutoff_inner", q.cutoff_inner),
            ("quadrature.extrap_eps", q.extrap_eps),
            ("quadrature.extrap_tol", q.extrap_tol),
            ("quadrature.gamma_step", q.gamma_step),
            ("quadrature.flow_eps", q.flow_eps),
        ] {
            positive(n, v)?;
        }
        if q.cutoff_inner >= 1.0 {
            return Err(CliError::Config("quadrature.cutoff_inner must be below 1".into()));
        }
        if let Some(w) = q.omega_est {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(CliError::Config(format!("quadrature.omega_est must be non-negative, got {w}")));
            }
        }
        let t = serde_json::to_value(&self.tolerances).expect("tolerances serialise");
        for (k, v) in t.as_object().expect("object") {
            positive(&format!("tolerances.{k}"), v.as_f64().unwrap_or(f64::NAN))?;
        }
        if let Some(op) = &self.operator {
            op.validate().map_err(CliError::from)?;
        }
        Ok(())
    }

    pub fn atlas_config(&self) -> AtlasConfig {
        AtlasConfig {
            n_box: self.boxes.n_box,
            t_box: self.boxes.t_box,
            v_radius: self.boxes.v_radius,
            extrap_eps: self.quadrature.extrap_eps,
            extrap_levels: self.quadrature.extrap_levels,
            extrap_tol: self.quadrature.extrap_tol,
        }
    }

    pub fn kernel_config(&self) -> KernelConfig {
        let q = &self.quadrature;
        KernelConfig {
            xi_max: self.grid.xi_max,
            dxi: self.grid.dxi,
            n_rho: q.n_rho,
            n_psi: q.n_psi,
            n_theta: q.n_theta,
            n_theta_fiber: q.n_theta_fiber,
            cutoff_radius: self.boxes.v_radius,
            cutoff_inner: q.cutoff_inner,
            omega_est: q.omega_est,
            chunk: q.chunk,
        }
    }

    /// SHA-256 of the compact JSON serialisation.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_json().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Caps the global worker pool at `OKL_THREADS` when set.
pub fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("OKL_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::Config(format!("OKL_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}
