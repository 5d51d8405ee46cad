use std::fmt;

use lcft_core::blocks::torus_one_point_block;
use lcft_core::bootstrap::{
    graph_correlator, sphere_k_point, torus_k_point, torus_one_point, CorrelatorResult,
};
use lcft_core::dozz::Dozz;
use lcft_core::gmc::TorusOracle;
use lcft_core::graph::AdmissibleGraph;
use lcft_core::special_fn::UpsilonEvaluator;
use lcft_core::virasoro::{normalized_determinant, shapovalov};
use lcft_core::{Complex64, LcftError};
use serde_json::{json, Value};

use crate::config::{ConfigError, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Numeric(LcftError),
    Io(String),
}

impl CliError {
    /// 2 for bad input, 3 for numerical guards.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numeric(e) => e.exit_code(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Numeric(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<LcftError> for CliError {
    fn from(e: LcftError) -> Self {
        CliError::Numeric(e)
    }
}

/// A subcommand result: the JSON body, named CSV curves, and whether it counts as a failure.
pub struct Output {
    pub result: Value,
    pub csv: Vec<(String, String)>,
    pub failed: bool,
}

impl Output {
    fn json(result: Value) -> Self {
        Self {
            result,
            csv: Vec::new(),
            failed: false,
        }
    }
}

pub fn cplx(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn need(cfg: &RunConfig, field: &str, len: usize, exact: bool) -> Result<(), CliError> {
    let have = match field {
        "alpha" => cfg.alpha.len(),
        "points" => cfg.points.len(),
        "p" => cfg.p.len(),
        _ => unreachable!("unknown field {field}"),
    };
    let ok = if exact { have == len } else { have >= len };
    if ok {
        Ok(())
    } else {
        let want = if exact {
            format!("exactly {len}")
        } else {
            format!("at least {len}")
        };
        Err(ConfigError {
            path: field.into(),
            message: format!("{want} entries needed, {have} given"),
        }
        .into())
    }
}

fn correlator(r: CorrelatorResult, name: &str, csv: &mut Vec<(String, String)>) -> Value {
    if !r.density.is_empty() {
        csv.push((format!("{name}_density.csv"), r.density_csv()));
    }
    let mut v = serde_json::to_value(&r).expect("result serializes");
    if let Some(m) = v.as_object_mut() {
        m.remove("density");
    }
    v
}

pub fn run(subcommand: &str, cfg: &RunConfig) -> Result<Output, CliError> {
    let params = cfg.params()?;
    match subcommand {
        "upsilon" => {
            need(cfg, "points", 1, false)?;
            let ev = UpsilonEvaluator::new(cfg.gamma)?;
            let rows = cfg
                .points()
                .into_iter()
                .map(|z| Ok(json!({ "z": cplx(z), "value": cplx(ev.upsilon(z)?) })))
                .collect::<Result<Vec<_>, LcftError>>()?;
            Ok(Output::json(json!({ "q": ev.q(), "values": rows })))
        }
        "dozz" => {
            need(cfg, "alpha", 3, true)?;
            let a = [
                cfg.alpha[0].complex(),
                cfg.alpha[1].complex(),
                cfg.alpha[2].complex(),
            ];
            let d = Dozz::new(params)?;
            Ok(Output::json(
                json!({ "value": cplx(d.constant(a)?), "mu_exponent": cplx(d.mu_exponent(a)) }),
            ))
        }
        "shapovalov" => {
            let delta = cfg.delta.complex();
            let f = shapovalov(delta, params.central_charge(), cfg.level);
            let n = f.basis.len();
            let rows: Vec<Vec<Value>> = (0..n)
                .map(|i| (0..n).map(|j| cplx(f.entries[(i, j)])).collect())
                .collect();
            Ok(Output::json(json!({
                "level": cfg.level,
                "delta": cplx(delta),
                "c": params.central_charge(),
                "basis": f.basis.iter().map(|y| y.parts().to_vec()).collect::<Vec<_>>(),
                "entries": rows,
                "normalized_determinant": normalized_determinant(&f),
            })))
        }
        "block" => {
            need(cfg, "alpha", 1, false)?;
            need(cfg, "p", 1, false)?;
            let alpha = cfg.real_alphas()?[0];
            let q = match cfg.q.first() {
                Some(z) => z.complex(),
                None => (Complex64::i() * 2.0 * std::f64::consts::PI * cfg.tau()).exp(),
            };
            let mut csv = Vec::new();
            let mut rows = Vec::new();
            for (i, &p) in cfg.p.iter().enumerate() {
                let b = torus_one_point_block(alpha, p, &params, &cfg.block_options())?;
                rows.push(json!({
                    "p": p,
                    "value": cplx(b.value(&[q])?),
                    "series": cplx(b.series(&[q])?),
                    "prefactor": b.prefactor(&[q])?,
                    "level_one": cplx(b.coefficient(&[1])),
                }));
                csv.push((format!("block_coefficients_p{i}.csv"), b.to_csv()));
            }
            Ok(Output {
                result: json!({ "alpha": alpha, "q": cplx(q), "blocks": rows }),
                csv,
                failed: false,
            })
        }
        "torus1pt" => {
            need(cfg, "alpha", 1, false)?;
            let boot = cfg.bootstrap()?;
            let mut csv = Vec::new();
            let mut rows = Vec::new();
            for (i, a) in cfg.real_alphas()?.into_iter().enumerate() {
                let r = torus_one_point(a, cfg.tau(), &params, &boot)?;
                rows.push(json!({ "alpha": a, "result": correlator(r, &format!("torus1pt_{i}"), &mut csv) }));
            }
            Ok(Output {
                result: json!({ "values": rows }),
                csv,
                failed: false,
            })
        }
        "toruskpt" => {
            need(cfg, "points", cfg.alpha.len(), true)?;
            let mut csv = Vec::new();
            let r = torus_k_point(
                &cfg.real_alphas()?,
                &cfg.points(),
                cfg.tau(),
                &params,
                &cfg.bootstrap()?,
            )?;
            Ok(Output {
                result: correlator(r, "toruskpt", &mut csv),
                csv,
                failed: false,
            })
        }
        "spherekpt" => {
            need(cfg, "points", cfg.alpha.len(), true)?;
            let mut csv = Vec::new();
            let r = sphere_k_point(
                &cfg.real_alphas()?,
                &cfg.points(),
                &params,
                &cfg.bootstrap()?,
            )?;
            Ok(Output {
                result: correlator(r, "spherekpt", &mut csv),
                csv,
                failed: false,
            })
        }
        "graph" => {
            let path = cfg.graph.as_ref().ok_or_else(|| ConfigError {
                path: "graph".into(),
                message: "a graph file is required".into(),
            })?;
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("cannot read graph {}: {e}", path.display())))?;
            let g = AdmissibleGraph::from_json(&text)?;
            let mut csv = Vec::new();
            let r = graph_correlator(&g, &cfg.metric(), &params, &cfg.bootstrap()?)?;
            Ok(Output {
                result: correlator(r, "graph", &mut csv),
                csv,
                failed: false,
            })
        }
        "mc-torus1pt" => {
            need(cfg, "alpha", 1, false)?;
            let mc = cfg.mc();
            let oracle = TorusOracle::new(cfg.tau(), mc.grid)?;
            let est = oracle.one_point(&cfg.real_alphas()?, &params, &mc)?;
            let csv = est
                .iter()
                .enumerate()
                .map(|(i, e)| (format!("mc_batches_{i}.csv"), e.batch_csv()))
                .collect();
            Ok(Output {
                result: json!({ "estimates": est }),
                csv,
                failed: false,
            })
        }
        "selftest" => {
            let outcomes: Vec<_> = cfg
                .criteria
                .iter()
                .map(|&id| {
                    let o = lcft_acceptance::run(id);
                    eprintln!("{o}");
                    o
                })
                .collect();
            let failed = outcomes.iter().any(|o| !o.pass);
            Ok(Output {
                result: json!({ "outcomes": outcomes }),
                csv: Vec::new(),
                failed,
            })
        }
        other => unreachable!("clap admits no subcommand {other}"),
    }
}
