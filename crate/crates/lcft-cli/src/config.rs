use std::fmt;
use std::path::PathBuf;

use lcft_core::blocks::BlockOptions;
use lcft_core::bootstrap::{BootstrapConfig, MetricConstants};
use lcft_core::gmc::{McConfig, ShiftKernel};
use lcft_core::quadrature::Quadrature;
use lcft_core::{CftParams, Complex64};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// A config problem, located by its JSON path.
#[derive(Debug)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error at `{}`: {}", self.path, self.message)
    }
}

fn bad(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        path: path.into(),
        message: message.into(),
    }
}

/// A real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Real(f64),
    Pair([f64; 2]),
}

impl Number {
    pub fn complex(self) -> Complex64 {
        match self {
            Number::Real(x) => Complex64::new(x, 0.0),
            Number::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Unit,
    FlatCanonical,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    pub p_max: f64,
    pub panel_width: f64,
    pub nodes_per_panel: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        let q = Quadrature::default();
        Self {
            p_max: q.p_max,
            panel_width: q.panel_width,
            nodes_per_panel: q.nodes_per_panel,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSpec {
    pub seed: u64,
    pub samples: usize,
    pub batches: usize,
    pub grid: usize,
    pub shift: ShiftKernel,
}

impl Default for McSpec {
    fn default() -> Self {
        let m = McConfig::default();
        Self {
            seed: m.seed,
            samples: m.samples,
            batches: m.batches,
            grid: m.grid,
            shift: m.shift,
        }
    }
}

/// Everything a subcommand may read. Unused fields are carried along so the
/// recorded config is complete.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub gamma: f64,
    pub mu: f64,
    pub tau: [f64; 2],
    pub alpha: Vec<Number>,
    /// Upsilon arguments, torus insertion points or sphere points.
    pub points: Vec<Number>,
    pub p: Vec<f64>,
    /// Block moduli; empty means q = exp(2πiτ).
    pub q: Vec<Number>,
    pub delta: Number,
    pub level: u32,
    pub graph: Option<PathBuf>,
    pub metric: Metric,
    pub quadrature: QuadratureSpec,
    pub truncation: u32,
    pub cond_guard: f64,
    pub node_budget: usize,
    pub keep_density: bool,
    pub mc: McSpec,
    pub criteria: Vec<u8>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let b = BootstrapConfig::default();
        Self {
            gamma: std::f64::consts::SQRT_2,
            mu: 1.0,
            tau: [0.0, 1.0],
            alpha: vec![Number::Real(0.8)],
            points: Vec::new(),
            p: vec![1.0],
            q: Vec::new(),
            delta: Number::Real(1.0),
            level: 3,
            graph: None,
            metric: Metric::Unit,
            quadrature: QuadratureSpec::default(),
            truncation: b.block.truncation,
            cond_guard: b.block.cond_guard,
            node_budget: b.node_budget,
            keep_density: false,
            mc: McSpec::default(),
            criteria: lcft_acceptance::ALL.to_vec(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            bad(
                if path.is_empty() {
                    ".".to_string()
                } else {
                    path
                },
                e.into_inner().to_string(),
            )
        })
    }

    /// Range checks that serde cannot express.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.gamma > 0.0 && self.gamma < 2.0) {
            return Err(bad("gamma", "must lie in (0, 2)"));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(bad("mu", "must be positive and finite"));
        }
        if !(self.tau[1] > 0.0) {
            return Err(bad("tau[1]", "Im τ must be positive"));
        }
        let quad = &self.quadrature;
        if !(quad.p_max > 0.0) {
            return Err(bad("quadrature.p_max", "must be positive"));
        }
        if !(quad.panel_width > 0.0) {
            return Err(bad("quadrature.panel_width", "must be positive"));
        }
        if quad.nodes_per_panel == 0 {
            return Err(bad("quadrature.nodes_per_panel", "must be at least 1"));
        }
        if !(self.cond_guard > 1.0) {
            return Err(bad("cond_guard", "must exceed 1"));
        }
        if self.mc.grid < 4 || self.mc.grid % 2 != 0 {
            return Err(bad("mc.grid", "must be an even number ≥ 4"));
        }
        if self.mc.samples == 0 {
            return Err(bad("mc.samples", "must be positive"));
        }
        for (i, p) in self.p.iter().enumerate() {
            if !(*p >= 0.0 && p.is_finite()) {
                return Err(bad(
                    format!("p[{i}]"),
                    "momenta must be finite and non-negative",
                ));
            }
        }
        for (i, q) in self.q.iter().enumerate() {
            let r = q.complex().norm();
            if !(r > 0.0 && r < 1.0) {
                return Err(bad(format!("q[{i}]"), "moduli need 0 < |q| < 1"));
            }
        }
        for (i, id) in self.criteria.iter().enumerate() {
            if !lcft_acceptance::ALL.contains(id) {
                return Err(bad(
                    format!("criteria[{i}]"),
                    "criteria are numbered 1 to 10",
                ));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> lcft_core::Result<CftParams> {
        CftParams::new(self.gamma, self.mu)
    }

    pub fn tau(&self) -> Complex64 {
        Complex64::new(self.tau[0], self.tau[1])
    }

    pub fn real_alphas(&self) -> Result<Vec<f64>, ConfigError> {
        self.alpha
            .iter()
            .enumerate()
            .map(|(i, a)| match a {
                Number::Real(x) => Ok(*x),
                Number::Pair([re, im]) if *im == 0.0 => Ok(*re),
                Number::Pair(_) => Err(bad(
                    format!("alpha[{i}]"),
                    "this subcommand takes real weights",
                )),
            })
            .collect()
    }

    pub fn points(&self) -> Vec<Complex64> {
        self.points.iter().map(|z| z.complex()).collect()
    }

    pub fn block_options(&self) -> BlockOptions {
        BlockOptions {
            truncation: self.truncation,
            cond_guard: self.cond_guard,
        }
    }

    pub fn bootstrap(&self) -> lcft_core::Result<BootstrapConfig> {
        let q = &self.quadrature;
        Ok(BootstrapConfig {
            quadrature: Quadrature::new(q.p_max, q.panel_width, q.nodes_per_panel)?,
            block: self.block_options(),
            node_budget: self.node_budget,
            keep_density: self.keep_density,
        })
    }

    pub fn metric(&self) -> MetricConstants {
        match self.metric {
            Metric::Unit => MetricConstants::default(),
            Metric::FlatCanonical => MetricConstants::flat_canonical(),
        }
    }

    pub fn mc(&self) -> McConfig {
        let m = &self.mc;
        McConfig {
            seed: m.seed,
            samples: m.samples,
            batches: m.batches,
            grid: m.grid,
            shift: m.shift,
        }
    }
}

/// SHA-256 of the compact JSON of the resolved config and the subcommand.
pub fn config_hash(subcommand: &str, config: &RunConfig) -> String {
    let body = serde_json::json!({ "subcommand": subcommand, "config": config });
    let digest = Sha256::digest(body.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
